#include "graphdec/config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace graphdec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || v.empty())
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double out = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "off" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

struct Field {
  std::string section;
  std::string key;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

template <typename Access>
Field int_field(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](TrainConfig& c, const std::string& v) { access(c) = parse_int(name, v); },
          [=](const TrainConfig& c) {
            TrainConfig copy = c;
            return std::to_string(access(copy));
          }};
}

template <typename Access>
Field double_field(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](TrainConfig& c, const std::string& v) { access(c) = parse_double(name, v); },
          [=](const TrainConfig& c) {
            TrainConfig copy = c;
            return format_double(access(copy));
          }};
}

template <typename Access>
Field bool_field(std::string section, std::string key, Access access) {
  const std::string name = section + "." + key;
  return {section, key,
          [=](TrainConfig& c, const std::string& v) { access(c) = parse_bool(name, v); },
          [=](const TrainConfig& c) {
            TrainConfig copy = c;
            return std::string(access(copy) ? "true" : "false");
          }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = [] {
    std::vector<Field> f;
    f.push_back(int_field("train", "epochs", [](TrainConfig& c) -> int& { return c.epochs; }));
    f.push_back(int_field("train", "batch_size", [](TrainConfig& c) -> int& { return c.batch_size; }));
    f.push_back(double_field("train", "learning_rate",
                             [](TrainConfig& c) -> double& { return c.learning_rate; }));
    f.push_back(double_field("train", "momentum", [](TrainConfig& c) -> double& { return c.momentum; }));
    f.push_back(int_field("train", "hidden_dim", [](TrainConfig& c) -> int& { return c.hidden_dim; }));
    f.push_back(int_field("train", "embed_dim", [](TrainConfig& c) -> int& { return c.embed_dim; }));
    f.push_back(int_field("train", "warmup_epochs",
                          [](TrainConfig& c) -> int& { return c.warmup_epochs; }));
    f.push_back(double_field("train", "temperature",
                             [](TrainConfig& c) -> double& { return c.temperature; }));
    f.push_back({"train", "infonce_denominator",
                 [](TrainConfig& c, const std::string& v) {
                   if (v == "negatives_only") c.denominator = InfoNceDenominator::negatives_only;
                   else if (v == "include_positive") c.denominator = InfoNceDenominator::include_positive;
                   else
                     throw ConfigError("train.infonce_denominator: expected negatives_only or "
                                       "include_positive, got '" + v + "'");
                 },
                 [](const TrainConfig& c) {
                   return std::string(c.denominator == InfoNceDenominator::negatives_only
                                          ? "negatives_only"
                                          : "include_positive");
                 }});
    f.push_back({"train", "selector",
                 [](TrainConfig& c, const std::string& v) { c.selector = selector_from_string(v); },
                 [](const TrainConfig& c) { return to_string(c.selector); }});
    f.push_back({"train", "seed",
                 [](TrainConfig& c, const std::string& v) { c.seed = parse_u64("train.seed", v); },
                 [](const TrainConfig& c) { return std::to_string(c.seed); }});
    f.push_back(int_field("train", "workers", [](TrainConfig& c) -> int& { return c.workers; }));

    f.push_back(double_field("augment", "node_drop_ratio",
                             [](TrainConfig& c) -> double& { return c.augment.node_drop_ratio; }));
    f.push_back(double_field("augment", "edge_drop_ratio",
                             [](TrainConfig& c) -> double& { return c.augment.edge_drop_ratio; }));
    f.push_back({"augment", "kind",
                 [](TrainConfig& c, const std::string& v) {
                   if (v == "node_drop") c.augment.kind = AugmentKind::node_drop;
                   else if (v == "edge_drop") c.augment.kind = AugmentKind::edge_drop;
                   else if (v == "compose") c.augment.kind = AugmentKind::compose;
                   else
                     throw ConfigError("augment.kind: expected node_drop, edge_drop or compose, got '" +
                                       v + "'");
                 },
                 [](const TrainConfig& c) {
                   switch (c.augment.kind) {
                     case AugmentKind::node_drop: return std::string("node_drop");
                     case AugmentKind::edge_drop: return std::string("edge_drop");
                     case AugmentKind::compose: break;
                   }
                   return std::string("compose");
                 }});

    f.push_back(double_field("sparsity", "alpha0",
                             [](TrainConfig& c) -> double& { return c.sparsity.alpha0; }));
    f.push_back(double_field("sparsity", "alpha_min",
                             [](TrainConfig& c) -> double& { return c.sparsity.alpha_min; }));
    f.push_back(int_field("sparsity", "reactivation_interval",
                          [](TrainConfig& c) -> int& { return c.sparsity.reactivation_interval; }));

    f.push_back(double_field("decanter", "initial_fraction",
                             [](TrainConfig& c) -> double& { return c.decanter.initial_fraction; }));
    f.push_back(double_field("decanter", "epsilon",
                             [](TrainConfig& c) -> double& { return c.decanter.epsilon; }));
    f.push_back(int_field("decanter", "min_size",
                          [](TrainConfig& c) -> int& { return c.decanter.min_size; }));

    f.push_back(int_field("diet", "pick_epoch", [](TrainConfig& c) -> int& { return c.diet.pick_epoch; }));
    f.push_back(double_field("diet", "keep_fraction",
                             [](TrainConfig& c) -> double& { return c.diet.keep_fraction; }));

    f.push_back(int_field("probe", "epochs", [](TrainConfig& c) -> int& { return c.probe.epochs; }));
    f.push_back(double_field("probe", "learning_rate",
                             [](TrainConfig& c) -> double& { return c.probe.learning_rate; }));
    f.push_back(double_field("probe", "l2", [](TrainConfig& c) -> double& { return c.probe.l2; }));
    f.push_back(bool_field("probe", "balanced", [](TrainConfig& c) -> bool& { return c.probe.balanced; }));

    f.push_back(bool_field("ablation", "gs", [](TrainConfig& c) -> bool& { return c.ablation.gs; }));
    f.push_back(bool_field("ablation", "ss", [](TrainConfig& c) -> bool& { return c.ablation.ss; }));
    f.push_back(bool_field("ablation", "cad", [](TrainConfig& c) -> bool& { return c.ablation.cad; }));
    f.push_back(bool_field("ablation", "rs", [](TrainConfig& c) -> bool& { return c.ablation.rs; }));
    f.push_back(bool_field("ablation", "rm", [](TrainConfig& c) -> bool& { return c.ablation.rm; }));
    f.push_back(bool_field("ablation", "sg", [](TrainConfig& c) -> bool& { return c.ablation.sg; }));
    f.push_back(bool_field("ablation", "cag", [](TrainConfig& c) -> bool& { return c.ablation.cag; }));
    f.push_back(bool_field("ablation", "rw", [](TrainConfig& c) -> bool& { return c.ablation.rw; }));
    f.push_back(bool_field("ablation", "self_supervision",
                           [](TrainConfig& c) -> bool& { return c.ablation.self_supervision; }));
    return f;
  }();
  return all;
}

const Field& resolve(const std::string& key) {
  const auto dot = key.find('.');
  if (dot != std::string::npos) {
    const auto section = key.substr(0, dot);
    const auto name = key.substr(dot + 1);
    for (const auto& f : fields())
      if (f.section == section && f.key == name) return f;
    throw ConfigError("unknown key '" + key + "'");
  }
  const Field* found = nullptr;
  int matches = 0;
  for (const auto& f : fields()) {
    if (f.key != key) continue;
    if (f.section == "train") return f;
    found = &f;
    ++matches;
  }
  if (matches == 0) throw ConfigError("unknown key '" + key + "'");
  if (matches > 1) throw ConfigError("ambiguous key '" + key + "': qualify it with a section");
  return *found;
}

}  // namespace

void apply_setting(TrainConfig& cfg, const std::string& key, const std::string& value) {
  resolve(key).set(cfg, trim(value));
}

std::vector<Setting> parse_ini(const std::string& text, const std::string& source) {
  std::vector<Setting> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(number);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": empty key");
    out.emplace_back(section.empty() ? key : section + "." + key, trim(line.substr(eq + 1)));
  }
  return out;
}

TrainConfig load_config(const std::optional<std::filesystem::path>& path,
                        const std::vector<Setting>& overrides) {
  TrainConfig cfg;
  std::vector<Setting> settings;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw LoadError("cannot read config file " + path->string());
    std::stringstream buf;
    buf << in.rdbuf();
    settings = parse_ini(buf.str(), path->string());
  }
  settings.insert(settings.end(), overrides.begin(), overrides.end());

  std::vector<std::string> problems;
  for (const auto& [key, value] : settings) {
    try {
      apply_setting(cfg, key, value);
    } catch (const ConfigError& e) {
      problems.emplace_back(e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
  cfg.validate();
  return cfg;
}

std::vector<Setting> config_entries(const TrainConfig& cfg) {
  std::vector<Setting> out;
  for (const auto& f : fields()) out.emplace_back(f.section + "." + f.key, f.get(cfg));
  return out;
}

std::string config_to_ini(const TrainConfig& cfg) {
  std::string text;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) text += "\n";
      section = f.section;
      text += "[" + section + "]\n";
    }
    text += f.key + " = " + f.get(cfg) + "\n";
  }
  return text;
}

}  // namespace graphdec
