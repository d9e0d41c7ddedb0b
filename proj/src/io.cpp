#include "graphdec/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace graphdec {

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  out << text;
  if (!out) throw LoadError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

std::string format_g9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_metrics_jsonl(const fs::path& path, const std::vector<EpochTrace>& traces) {
  std::string text;
  for (const auto& t : traces) {
    nlohmann::json j{{"epoch", t.epoch},
                     {"loss", t.mean_loss},
                     {"subset_size", t.subset_size},
                     {"keep_fraction", t.keep_fraction},
                     {"seconds", t.seconds},
                     {"scored", t.scored_count},
                     {"subset_class_counts", t.subset_class_counts}};
    text += j.dump() + "\n";
  }
  write_text(path, text);
}

void write_scores_csv(const fs::path& path, const std::vector<ScoreRecord>& records) {
  std::string text = "epoch,sample_id,raw_score,normalized_score,in_subset,in_bin\n";
  for (const auto& r : records) {
    text += std::to_string(r.epoch) + "," + std::to_string(r.sample_id) + "," +
            format_g9(r.raw_score) + "," + format_g9(r.normalized_score) + "," +
            (r.in_subset ? "1" : "0") + "," + (r.in_bin ? "1" : "0") + "\n";
  }
  write_text(path, text);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw LoadError(where + ": bad number '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw LoadError(where + ": bad integer '" + s + "'");
  }
}

}  // namespace

std::vector<ScoreRecord> read_scores_csv(const fs::path& path) {
  std::stringstream in(read_text(path));
  std::string line;
  std::getline(in, line);
  if (line != "epoch,sample_id,raw_score,normalized_score,in_subset,in_bin")
    throw LoadError(path.string() + ":1: unexpected header");
  std::vector<ScoreRecord> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(number);
    const auto c = split_csv(line);
    if (c.size() != 6) throw LoadError(where + ": expected 6 columns");
    ScoreRecord r;
    r.epoch = to_int(c[0], where);
    r.sample_id = to_int(c[1], where);
    r.raw_score = to_double(c[2], where);
    r.normalized_score = to_double(c[3], where);
    r.in_subset = to_int(c[4], where) != 0;
    r.in_bin = to_int(c[5], where) != 0;
    out.push_back(r);
  }
  return out;
}

nlohmann::json eval_to_json(const EvalReport& r) {
  return {{"accuracy", r.accuracy},
          {"balanced_accuracy", r.balanced_accuracy},
          {"f1_macro", r.f1_macro},
          {"f1_micro", r.f1_micro},
          {"per_class_f1", r.per_class_f1},
          {"confusion", r.confusion}};
}

nlohmann::json split_to_json(const SplitResult& s) {
  return {{"train", s.train}, {"validation", s.validation}, {"test", s.test}};
}

SplitResult split_from_json(const nlohmann::json& j) {
  try {
    SplitResult s;
    s.train = j.at("train").get<std::vector<int>>();
    s.validation = j.at("validation").get<std::vector<int>>();
    s.test = j.at("test").get<std::vector<int>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("split json: ") + e.what());
  }
}

void write_embeddings_csv(const fs::path& path, const EmbeddingTable& table) {
  require(table.ids.size() == table.labels.size() &&
              static_cast<Eigen::Index>(table.ids.size()) == table.values.rows(),
          "write_embeddings_csv: ids, labels and rows differ in length");
  std::string text = "id,label";
  for (Eigen::Index c = 0; c < table.values.cols(); ++c) text += ",e" + std::to_string(c);
  text += "\n";
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    text += std::to_string(table.ids[i]) + "," + std::to_string(table.labels[i]);
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", table.values(static_cast<Eigen::Index>(i), c));
      text += ",";
      text += buf;
    }
    text += "\n";
  }
  write_text(path, text);
}

EmbeddingTable read_embeddings_csv(const fs::path& path) {
  std::stringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw LoadError(path.string() + ": empty file");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "id" || header[1] != "label")
    throw LoadError(path.string() + ":1: expected header id,label,e0,...");
  const auto dim = static_cast<Eigen::Index>(header.size() - 2);
  EmbeddingTable t;
  std::vector<std::vector<double>> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(number);
    const auto c = split_csv(line);
    if (static_cast<Eigen::Index>(c.size()) != dim + 2)
      throw LoadError(where + ": expected " + std::to_string(dim + 2) + " columns");
    t.ids.push_back(to_int(c[0], where));
    t.labels.push_back(to_int(c[1], where));
    std::vector<double> row;
    for (std::size_t k = 2; k < c.size(); ++k) row.push_back(to_double(c[k], where));
    rows.push_back(std::move(row));
  }
  t.values.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (Eigen::Index k = 0; k < dim; ++k) t.values(static_cast<Eigen::Index>(i), k) = rows[i][k];
  return t;
}

void write_trace_csv(const fs::path& path, const ScoreTraceMatrix& m) {
  std::string text = "epoch";
  for (int id : m.sample_order) text += "," + std::to_string(id);
  text += "\n";
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
    text += std::to_string(m.epochs[r]);
    for (Eigen::Index c = 0; c < m.values.cols(); ++c) text += "," + format_g9(m.values(r, c));
    text += "\n";
  }
  write_text(path, text);
}

void write_theorem_report(const fs::path& path, const std::vector<TheoremRow>& rows) {
  std::string text = "instance,family,policy,seed,lhs,rhs,holds,mean_err\n";
  for (const auto& row : rows) {
    text += std::to_string(row.instance) + "," + to_string(row.family) + "," +
            to_string(row.policy) + "," + std::to_string(row.seed) + "," +
            format_g9(row.report.lhs) + "," + format_g9(row.report.rhs) + "," +
            (row.report.holds ? "true" : "false") + "," + format_g9(row.report.mean_error) + "\n";
  }
  write_text(path, text);
}

}  // namespace graphdec
