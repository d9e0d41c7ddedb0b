#include "graphdec/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace graphdec {

void Graph::validate() const {
  require(node_count >= 0, "graph: negative node count");
  require(features.rows() == node_count, "graph: feature rows differ from node count");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto [u, v] = edges[i];
    require(u >= 0 && v >= 0 && u < node_count && v < node_count,
            "graph: edge endpoint out of range");
    require(u != v, "graph: self-loop stored");
    require(u < v, "graph: edge not stored as (low, high)");
    if (i > 0) require(edges[i - 1] < edges[i], "graph: duplicate or unsorted edge");
  }
}

Graph make_graph(int node_count, const std::vector<Edge>& edges, Matrix features,
                 std::optional<int> label) {
  Graph g;
  g.node_count = node_count;
  g.edges.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u == v) continue;
    if (u > v) std::swap(u, v);
    g.edges.emplace_back(u, v);
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  g.features = std::move(features);
  g.label = label;
  g.validate();
  return g;
}

std::vector<int> node_degrees(const Graph& g) {
  std::vector<int> deg(static_cast<std::size_t>(g.node_count), 0);
  for (const auto& [u, v] : g.edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

Matrix degree_one_hot(const Graph& g, int cap) {
  require(cap >= 1, "degree_one_hot: cap must be >= 1");
  Matrix x = Matrix::Zero(g.node_count, cap + 1);
  const auto deg = node_degrees(g);
  for (int v = 0; v < g.node_count; ++v) x(v, std::min(deg[v], cap)) = 1.0;
  return x;
}

int GraphDataset::unit_count() const {
  if (task == TaskKind::graph) return static_cast<int>(graphs.size());
  return graphs.empty() ? 0 : graphs.front().node_count;
}

int GraphDataset::label_of(int unit) const {
  require(unit >= 0 && unit < unit_count(), "dataset: unit id out of range");
  if (task == TaskKind::graph) {
    const auto& g = graphs[unit];
    require(g.label.has_value(), "dataset: graph has no label");
    return *g.label;
  }
  return node_labels[unit];
}

void GraphDataset::validate() const {
  require(class_count >= 1, "dataset: class count must be positive");
  const int fdim = feature_dim();
  for (const auto& g : graphs) {
    g.validate();
    require(g.feature_dim() == fdim, "dataset: inconsistent feature dimension");
    if (g.label) require(*g.label >= 0 && *g.label < class_count, "dataset: label out of range");
  }
  if (task == TaskKind::node) {
    require(graphs.size() == 1, "dataset: node-level dataset must hold exactly one graph");
    require(static_cast<int>(node_labels.size()) == graphs.front().node_count,
            "dataset: node label count differs from node count");
    for (int y : node_labels) require(y >= 0 && y < class_count, "dataset: label out of range");
    for (int v : labeled_nodes) require(v >= 0 && v < graphs.front().node_count,
                                        "dataset: labeled node out of range");
  }
}

std::uint64_t dataset_fingerprint(const GraphDataset& ds) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](std::uint64_t x) { h = mix64(h ^ x); };
  feed(static_cast<std::uint64_t>(ds.task));
  feed(static_cast<std::uint64_t>(ds.class_count));
  for (const auto& g : ds.graphs) {
    feed(static_cast<std::uint64_t>(g.node_count));
    for (const auto& [u, v] : g.edges) feed((static_cast<std::uint64_t>(u) << 32) | v);
    for (Eigen::Index i = 0; i < g.features.size(); ++i) {
      std::uint64_t bits = 0;
      const double x = g.features.data()[i];
      std::memcpy(&bits, &x, sizeof bits);
      feed(bits);
    }
    feed(g.label ? static_cast<std::uint64_t>(*g.label) : ~0ULL);
  }
  for (int y : ds.node_labels) feed(static_cast<std::uint64_t>(y));
  for (int v : ds.labeled_nodes) feed(static_cast<std::uint64_t>(v));
  return h;
}

// ---------------------------------------------------------------------------
// TU format

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long parse_int(const std::string& text, const std::filesystem::path& file, int line) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long value = 0;
  try {
    value = std::stol(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    std::ostringstream msg;
    msg << file.filename().string() << ":" << line << ": cannot parse '" << text << "'";
    throw LoadError(msg.str());
  }
  return value;
}

std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open " + file.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // tolerate trailing blank lines
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::vector<long> read_int_column(const std::filesystem::path& file) {
  const auto lines = read_lines(file);
  std::vector<long> values;
  values.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i)
    values.push_back(parse_int(lines[i], file, static_cast<int>(i + 1)));
  return values;
}

std::string load_error(const std::filesystem::path& file, std::size_t line, const std::string& what) {
  std::ostringstream msg;
  msg << file.filename().string() << ":" << line << ": " << what;
  return msg.str();
}

}  // namespace

GraphDataset load_tu_dataset(const std::filesystem::path& directory, const std::string& name,
                             const TuLoadOptions& options) {
  const auto edge_file = directory / (name + "_A.txt");
  const auto indicator_file = directory / (name + "_graph_indicator.txt");
  const auto graph_label_file = directory / (name + "_graph_labels.txt");
  const auto node_label_file = directory / (name + "_node_labels.txt");

  const auto indicator = read_int_column(indicator_file);
  const long total_nodes = static_cast<long>(indicator.size());
  // Graph ids must start at 1 and be non-decreasing without gaps.
  std::vector<long> first_node;  // 0-based global index of each graph's first node
  for (long v = 0; v < total_nodes; ++v) {
    const long gid = indicator[v];
    const long expected = static_cast<long>(first_node.size());
    if (gid == expected + 1) {
      first_node.push_back(v);
    } else if (gid != expected || expected == 0) {
      throw LoadError(load_error(indicator_file, v + 1, "non-contiguous graph indicator"));
    }
  }
  const long graph_count = static_cast<long>(first_node.size());
  auto graph_size = [&](long g) {
    return (g + 1 < graph_count ? first_node[g + 1] : total_nodes) - first_node[g];
  };

  const auto raw_labels = read_int_column(graph_label_file);
  if (static_cast<long>(raw_labels.size()) != graph_count) {
    throw LoadError(load_error(graph_label_file, raw_labels.size(),
                               "expected " + std::to_string(graph_count) + " graph labels"));
  }

  std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(graph_count));
  {
    const auto lines = read_lines(edge_file);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const auto comma = lines[i].find(',');
      if (comma == std::string::npos)
        throw LoadError(load_error(edge_file, i + 1, "expected 'i, j'"));
      const long a = parse_int(lines[i].substr(0, comma), edge_file, static_cast<int>(i + 1));
      const long b = parse_int(lines[i].substr(comma + 1), edge_file, static_cast<int>(i + 1));
      if (a < 1 || b < 1 || a > total_nodes || b > total_nodes)
        throw LoadError(load_error(edge_file, i + 1, "dangling node reference"));
      const long ga = indicator[a - 1] - 1;
      const long gb = indicator[b - 1] - 1;
      if (ga != gb) throw LoadError(load_error(edge_file, i + 1, "edge joins different graphs"));
      edges[ga].emplace_back(static_cast<int>(a - 1 - first_node[ga]),
                             static_cast<int>(b - 1 - first_node[ga]));
    }
  }

  std::vector<long> node_labels;
  const bool have_node_labels = std::filesystem::exists(node_label_file) &&
                                std::filesystem::file_size(node_label_file) > 0;
  std::map<long, int> node_label_ids;
  if (have_node_labels) {
    node_labels = read_int_column(node_label_file);
    if (static_cast<long>(node_labels.size()) != total_nodes) {
      throw LoadError(load_error(node_label_file, node_labels.size(),
                                 "expected " + std::to_string(total_nodes) + " node labels"));
    }
    for (long y : node_labels) node_label_ids.emplace(y, 0);
    int next = 0;
    for (auto& [value, id] : node_label_ids) id = next++;
  }

  std::map<long, int> class_ids;
  for (long y : raw_labels) class_ids.emplace(y, 0);
  {
    int next = 0;
    for (auto& [value, id] : class_ids) id = next++;
  }

  GraphDataset ds;
  ds.task = TaskKind::graph;
  ds.class_count = static_cast<int>(class_ids.size());
  ds.graphs.reserve(static_cast<std::size_t>(graph_count));
  for (long g = 0; g < graph_count; ++g) {
    const int n = static_cast<int>(graph_size(g));
    Graph graph = make_graph(n, edges[g], Matrix(n, 0), class_ids.at(raw_labels[g]));
    if (have_node_labels) {
      graph.features = Matrix::Zero(n, static_cast<Eigen::Index>(node_label_ids.size()));
      for (int v = 0; v < n; ++v)
        graph.features(v, node_label_ids.at(node_labels[first_node[g] + v])) = 1.0;
    } else {
      graph.features = degree_one_hot(graph, options.degree_cap);
    }
    ds.graphs.push_back(std::move(graph));
  }
  ds.validate();
  return ds;
}

void write_tu_dataset(const GraphDataset& ds, const std::filesystem::path& directory,
                      const std::string& name, const std::vector<int>* node_labels) {
  require(ds.task == TaskKind::graph, "write_tu_dataset: only graph-level datasets");
  std::filesystem::create_directories(directory);
  auto open = [&](const std::string& suffix) {
    std::ofstream out(directory / (name + suffix), std::ios::binary);
    if (!out) throw LoadError("cannot write " + (directory / (name + suffix)).string());
    return out;
  };
  auto edges_out = open("_A.txt");
  auto indicator_out = open("_graph_indicator.txt");
  auto labels_out = open("_graph_labels.txt");
  long offset = 0;
  for (std::size_t gi = 0; gi < ds.graphs.size(); ++gi) {
    const auto& g = ds.graphs[gi];
    for (const auto& [u, v] : g.edges) {
      edges_out << (offset + u + 1) << ", " << (offset + v + 1) << '\n';
      edges_out << (offset + v + 1) << ", " << (offset + u + 1) << '\n';
    }
    for (int v = 0; v < g.node_count; ++v) indicator_out << (gi + 1) << '\n';
    labels_out << (g.label ? *g.label : 0) << '\n';
    offset += g.node_count;
  }
  if (node_labels) {
    require(static_cast<long>(node_labels->size()) == offset,
            "write_tu_dataset: one node label per node required");
    auto nodes_out = open("_node_labels.txt");
    for (int y : *node_labels) nodes_out << y << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic generators

namespace {

void add_noise_edges(int n, double p, RngStream& rng, std::vector<Edge>& edges) {
  if (p <= 0) return;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < p) edges.emplace_back(u, v);
}

}  // namespace

GraphDataset generate_synthetic_imbalanced(const SyntheticSpec& spec) {
  if (spec.min_nodes < 3 || spec.max_nodes < spec.min_nodes)
    throw ContractViolation("generate_synthetic_imbalanced: degenerate size range");
  require(spec.class0_count >= 1 && spec.class1_count >= 1,
          "generate_synthetic_imbalanced: counts must be >= 1");
  require(spec.noise_edge_prob >= 0 && spec.noise_edge_prob <= 1,
          "generate_synthetic_imbalanced: noise probability outside [0, 1]");
  GraphDataset ds;
  ds.task = TaskKind::graph;
  ds.class_count = 2;
  RngStream rng(spec.seed, "generate");
  const int total = spec.class0_count + spec.class1_count;
  ds.graphs.reserve(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    const int label = i < spec.class0_count ? 0 : 1;
    const int span = spec.max_nodes - spec.min_nodes + 1;
    const int n = spec.min_nodes + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(span)));
    std::vector<Edge> edges;
    if (label == 0) {
      for (int v = 0; v < n; ++v) edges.emplace_back(v, (v + 1) % n);
    } else {
      for (int v = 1; v < n; ++v) edges.emplace_back(0, v);
    }
    add_noise_edges(n, spec.noise_edge_prob, rng, edges);
    Graph g = make_graph(n, edges, Matrix(n, 0), label);
    g.features = degree_one_hot(g, spec.degree_cap);
    ds.graphs.push_back(std::move(g));
  }
  ds.validate();
  return ds;
}

namespace {

enum Atom { kC = 0, kN, kO, kF, kI, kCl, kBr, kAtomTypes };

struct MoleculeBuilder {
  std::vector<int> atoms;
  std::vector<Edge> bonds;

  int add(int atom) {
    atoms.push_back(atom);
    return static_cast<int>(atoms.size()) - 1;
  }
  void bond(int a, int b) { bonds.emplace_back(a, b); }

  /// Six-membered carbon ring; returns its atoms in ring order.
  std::vector<int> ring() {
    std::vector<int> r;
    for (int i = 0; i < 6; ++i) r.push_back(add(kC));
    for (int i = 0; i < 6; ++i) bond(r[i], r[(i + 1) % 6]);
    return r;
  }

  /// Ring sharing the bond (r[a], r[b]) with an existing ring.
  std::vector<int> fused_ring(const std::vector<int>& base, int a) {
    const int u = base[a];
    const int v = base[(a + 1) % 6];
    std::vector<int> r{u};
    for (int i = 0; i < 4; ++i) r.push_back(add(kC));
    r.push_back(v);
    for (int i = 0; i + 1 < 6; ++i) bond(r[i], r[i + 1]);
    return r;
  }

  void nitro(int at) {
    const int n = add(kN);
    bond(at, n);
    bond(n, add(kO));
    bond(n, add(kO));
  }
};

void build_positive(MoleculeBuilder& m, RngStream& rng) {
  auto r0 = m.ring();
  std::vector<int> carbons(r0.begin(), r0.end());
  const int fused = 1 + static_cast<int>(rng.uniform_int(2));
  auto last = r0;
  for (int f = 0; f < fused; ++f) {
    last = m.fused_ring(last, 2 + static_cast<int>(rng.uniform_int(2)));
    carbons.insert(carbons.end(), last.begin() + 1, last.end() - 1);
  }
  const int nitros = 1 + static_cast<int>(rng.uniform_int(2));
  for (int k = 0; k < nitros; ++k) m.nitro(carbons[rng.uniform_int(carbons.size())]);
  if (rng.uniform() < 0.3) m.bond(carbons[rng.uniform_int(carbons.size())], m.add(kC));
}

void build_negative(MoleculeBuilder& m, RngStream& rng) {
  auto r0 = m.ring();
  std::vector<int> carbons(r0.begin(), r0.end());
  if (rng.uniform() < 0.5) {
    auto r1 = m.ring();
    m.bond(r0[rng.uniform_int(6)], r1[rng.uniform_int(6)]);
    carbons.insert(carbons.end(), r1.begin(), r1.end());
  }
  static constexpr int kSubstituents[] = {kCl, kF, kBr, kI, kO, kN, kC};
  const int subs = 1 + static_cast<int>(rng.uniform_int(3));
  for (int k = 0; k < subs; ++k) {
    const int atom = kSubstituents[rng.uniform_int(std::size(kSubstituents))];
    m.bond(carbons[rng.uniform_int(carbons.size())], m.add(atom));
  }
}

}  // namespace

GraphDataset generate_molecule_like(const MoleculeSpec& spec, std::vector<int>* atom_types) {
  require(spec.negative_count >= 1 && spec.positive_count >= 1,
          "generate_molecule_like: counts must be >= 1");
  require(spec.label_noise >= 0 && spec.label_noise < 1,
          "generate_molecule_like: label noise outside [0, 1)");
  GraphDataset ds;
  ds.task = TaskKind::graph;
  ds.class_count = 2;
  RngStream rng(spec.seed, "generate");
  if (atom_types) atom_types->clear();
  const int total = spec.negative_count + spec.positive_count;
  for (int i = 0; i < total; ++i) {
    const int label = i < spec.negative_count ? 0 : 1;
    // A noisy sample is drawn from the other class's recipe but keeps its label.
    const bool flip = rng.uniform() < spec.label_noise;
    MoleculeBuilder m;
    if ((label == 1) != flip) {
      build_positive(m, rng);
    } else {
      build_negative(m, rng);
    }
    const int n = static_cast<int>(m.atoms.size());
    Matrix x = Matrix::Zero(n, kAtomTypes);
    for (int v = 0; v < n; ++v) x(v, m.atoms[v]) = 1.0;
    ds.graphs.push_back(make_graph(n, m.bonds, std::move(x), label));
    if (atom_types) atom_types->insert(atom_types->end(), m.atoms.begin(), m.atoms.end());
  }
  ds.validate();
  return ds;
}

GraphDataset generate_node_dataset(const NodeDatasetSpec& spec) {
  require(!spec.class_sizes.empty(), "generate_node_dataset: no classes");
  require(spec.feature_dim >= 1, "generate_node_dataset: feature_dim must be >= 1");
  RngStream rng(spec.seed, "generate");
  const int classes = static_cast<int>(spec.class_sizes.size());
  Matrix centroids(classes, spec.feature_dim);
  for (Eigen::Index i = 0; i < centroids.size(); ++i) centroids.data()[i] = rng.normal();

  std::vector<int> labels;
  for (int c = 0; c < classes; ++c) {
    require(spec.class_sizes[c] >= 1, "generate_node_dataset: empty class");
    labels.insert(labels.end(), static_cast<std::size_t>(spec.class_sizes[c]), c);
  }
  const int n = static_cast<int>(labels.size());
  Matrix x(n, spec.feature_dim);
  for (int v = 0; v < n; ++v)
    for (int f = 0; f < spec.feature_dim; ++f)
      x(v, f) = centroids(labels[v], f) + spec.feature_noise * rng.normal();
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < (labels[u] == labels[v] ? spec.intra_prob : spec.inter_prob))
        edges.emplace_back(u, v);

  GraphDataset ds;
  ds.task = TaskKind::node;
  ds.class_count = classes;
  ds.graphs.push_back(make_graph(n, edges, std::move(x)));
  ds.node_labels = std::move(labels);
  ds.labeled_nodes.resize(static_cast<std::size_t>(n));
  std::iota(ds.labeled_nodes.begin(), ds.labeled_nodes.end(), 0);
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Splits

SplitSpec SplitSpec::binary(int minority, int minority_count, int majority_count,
                            double validation_fraction, std::uint64_t seed) {
  require(minority == 0 || minority == 1, "SplitSpec::binary: minority class must be 0 or 1");
  SplitSpec spec;
  spec.train_counts.assign(2, 0);
  spec.train_counts[minority] = minority_count;
  spec.train_counts[1 - minority] = majority_count;
  spec.validation_fraction = validation_fraction;
  spec.seed = seed;
  return spec;
}

namespace {

std::vector<int> all_units(const GraphDataset& ds) {
  if (ds.task == TaskKind::node) return ds.labeled_nodes;
  std::vector<int> units(static_cast<std::size_t>(ds.unit_count()));
  std::iota(units.begin(), units.end(), 0);
  return units;
}

SplitResult split_with_counts(const GraphDataset& ds, const std::vector<int>& counts,
                              double validation_fraction, std::uint64_t seed) {
  require(static_cast<int>(counts.size()) == ds.class_count,
          "split: one training count per class required");
  require(validation_fraction >= 0 && validation_fraction <= 1,
          "split: validation fraction outside [0, 1]");
  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.class_count));
  for (int u : all_units(ds)) by_class[ds.label_of(u)].push_back(u);

  for (int c = 0; c < ds.class_count; ++c) {
    if (counts[c] < 0 || counts[c] > static_cast<int>(by_class[c].size())) {
      std::ostringstream msg;
      msg << "split: class " << c << " has " << by_class[c].size() << " samples but "
          << counts[c] << " were requested";
      throw ContractViolation(msg.str());
    }
  }

  const RngStream root(seed, "split");
  SplitResult result;
  std::vector<int> remainder;
  for (int c = 0; c < ds.class_count; ++c) {
    auto pool = by_class[c];
    RngStream rng = root.substream(static_cast<std::uint64_t>(c));
    const auto picks = rng.sample_without_replacement(static_cast<int>(pool.size()), counts[c]);
    std::vector<char> taken(pool.size(), 0);
    for (int p : picks) {
      result.train.push_back(pool[p]);
      taken[p] = 1;
    }
    for (std::size_t i = 0; i < pool.size(); ++i)
      if (!taken[i]) remainder.push_back(pool[i]);
  }
  std::sort(result.train.begin(), result.train.end());
  std::sort(remainder.begin(), remainder.end());
  RngStream rng = root.substream(0xa11dULL);
  rng.shuffle(remainder);
  const auto val_count = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(remainder.size())));
  result.validation.assign(remainder.begin(), remainder.begin() + static_cast<long>(val_count));
  result.test.assign(remainder.begin() + static_cast<long>(val_count), remainder.end());
  std::sort(result.validation.begin(), result.validation.end());
  std::sort(result.test.begin(), result.test.end());
  return result;
}

}  // namespace

int minority_class(const GraphDataset& ds) {
  const auto counts = class_counts(ds, all_units(ds));
  return static_cast<int>(std::min_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<int> class_counts(const GraphDataset& ds, const std::vector<int>& indices) {
  std::vector<int> counts(static_cast<std::size_t>(ds.class_count), 0);
  for (int u : indices) ++counts[ds.label_of(u)];
  return counts;
}

SplitResult make_imbalanced_split(const GraphDataset& ds, const SplitSpec& spec) {
  return split_with_counts(ds, spec.train_counts, spec.validation_fraction, spec.seed);
}

std::vector<int> longtail_counts(const GraphDataset& ds, double ratio, int base) {
  require(ratio >= 1, "longtail: ratio must be >= 1");
  require(base >= 1, "longtail: base count must be >= 1");
  const auto population = class_counts(ds, all_units(ds));
  std::vector<int> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return population[a] > population[b]; });
  const int classes = static_cast<int>(order.size());
  std::vector<int> counts(order.size(), 0);
  for (int rank = 0; rank < classes; ++rank) {
    const double exponent = classes > 1 ? -static_cast<double>(rank) / (classes - 1) : 0.0;
    counts[order[rank]] =
        std::max(1, static_cast<int>(std::lround(base * std::pow(ratio, exponent))));
  }
  return counts;
}

SplitResult make_longtail_node_split(const GraphDataset& ds, double ratio, int base,
                                     double validation_fraction, std::uint64_t seed) {
  require(ds.task == TaskKind::node, "make_longtail_node_split: node-level dataset required");
  return split_with_counts(ds, longtail_counts(ds, ratio, base), validation_fraction, seed);
}

}  // namespace graphdec
