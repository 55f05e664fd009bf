#include "relprobe/study_config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "relprobe/error.hpp"

namespace relprobe {

namespace fs = std::filesystem;
using nlohmann::json;

void StudyConfig::validate_and_complete() {
  if (kg_path.empty()) throw InputError("config: kg_path is required");
  if (random_sizes.empty()) throw InputError("config: random_sizes must not be empty");
  for (std::size_t i = 1; i < random_sizes.size(); ++i) {
    if (random_sizes[i] <= random_sizes[i - 1]) {
      throw InputError("config: random_sizes must be strictly increasing");
    }
  }
  if (random_sizes.front() == 0) throw InputError("config: random sizes must be positive");
  if (random_repeats == 0) throw InputError("config: random_repeats must be positive");
  if (min_total < 40) throw InputError("config: min_total must be at least 40");
  if (architectures.empty()) throw InputError("config: training.architectures must not be empty");
  if (jobs == 0) throw InputError("config: jobs must be positive");
  training.validate();

  std::set<std::string> names;
  std::size_t n_random = 0;
  for (const auto& s : spaces) {
    if (s.name.empty()) throw InputError("config: every space needs a name");
    if (!names.insert(s.name).second) throw InputError("config: duplicate space name '" + s.name + "'");
    if (s.is_random) {
      ++n_random;
    } else {
      if (s.path.empty()) throw InputError("config: space '" + s.name + "' needs a path");
      if (s.covers.empty()) throw InputError("config: space '" + s.name + "' covers no node kind");
      if (s.dim) throw InputError("config: dim is only allowed on the random space ('" + s.name + "')");
    }
  }
  if (n_random > 1) throw InputError("config: at most one random space may be listed");
  if (n_random == 0) {
    std::string name = "random";
    while (names.count(name)) name += "_";
    spaces.push_back(SpaceEntry{name, {}, {}, true, std::nullopt});
  }
  for (auto& s : spaces) {
    if (s.is_random) s.covers = {NodeKind::Concept, NodeKind::Instance, NodeKind::Word};
  }
}

ForgeConfig StudyConfig::forge_config() const {
  ForgeConfig f;
  f.master_seed = master_seed;
  f.relations = relations;
  f.default_pair_types = default_pair_types;
  f.pair_types_by_relation = pair_types_by_relation;
  f.min_total = min_total;
  f.random_sizes = random_sizes;
  f.random_repeats = random_repeats;
  f.random_pair_type = random_pair_type;
  return f;
}

const SpaceEntry& StudyConfig::random_space() const {
  for (const auto& s : spaces) {
    if (s.is_random) return s;
  }
  throw InputError("config: no random space");
}

namespace {

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + ": bad value for '" + key + "': " + e.what());
  }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw InputError(where + ": unknown key '" + k + "'");
    }
  }
}

std::vector<PairType> pair_type_list(const json& j, const std::string& where) {
  std::vector<PairType> out;
  if (!j.is_array()) throw InputError(where + ": expected a list of pair types");
  for (const auto& v : j) {
    if (!v.is_string()) throw InputError(where + ": pair types are strings");
    out.push_back(parse_pair_type(v.get<std::string>()));
  }
  return out;
}

NodeKind kind_from_json(const json& v, const std::string& where) {
  if (!v.is_string()) throw InputError(where + ": node kinds are strings");
  return parse_kind_name(v.get<std::string>());
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

}  // namespace

StudyConfig parse_study_config(const std::string& text, const std::string& source,
                               const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(source + ": " + e.what());
  }
  check_keys(j,
             {"kg_path", "kg_name", "spaces", "master_seed", "random_sizes", "random_repeats",
              "random_pair_type", "relations", "pair_types", "groups", "min_total", "training", "out_dir",
              "jobs"},
             source);
  StudyConfig c;
  c.kg_path = resolve(base_dir, get<std::string>(j, "kg_path", source));
  if (j.contains("kg_name")) c.kg_name = get<std::string>(j, "kg_name", source);
  if (j.contains("master_seed")) c.master_seed = get<std::uint64_t>(j, "master_seed", source);
  if (j.contains("random_sizes")) c.random_sizes = get<std::vector<std::size_t>>(j, "random_sizes", source);
  if (j.contains("random_repeats")) c.random_repeats = get<std::size_t>(j, "random_repeats", source);
  if (j.contains("random_pair_type")) {
    c.random_pair_type = parse_pair_type(get<std::string>(j, "random_pair_type", source));
  }
  if (j.contains("relations")) c.relations = get<std::vector<std::string>>(j, "relations", source);
  if (j.contains("groups")) {
    for (const auto& [k, v] : get<std::map<std::string, std::string>>(j, "groups", source)) c.groups[k] = v;
  }
  if (j.contains("min_total")) c.min_total = get<std::size_t>(j, "min_total", source);
  c.out_dir = resolve(base_dir, j.contains("out_dir") ? get<std::string>(j, "out_dir", source) : c.out_dir);
  if (j.contains("jobs")) c.jobs = get<std::size_t>(j, "jobs", source);

  if (j.contains("pair_types")) {
    const auto& pt = j.at("pair_types");
    const std::string where = source + ": pair_types";
    check_keys(pt, {"default", "relations"}, where);
    if (pt.contains("default")) c.default_pair_types = pair_type_list(pt.at("default"), where + ".default");
    if (pt.contains("relations")) {
      if (!pt.at("relations").is_object()) throw InputError(where + ".relations: expected an object");
      for (const auto& [rel, list] : pt.at("relations").items()) {
        c.pair_types_by_relation[rel] = pair_type_list(list, where + ".relations." + rel);
      }
    }
  }

  if (j.contains("spaces")) {
    const auto& spaces = j.at("spaces");
    if (!spaces.is_array()) throw InputError(source + ": spaces must be a list");
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      const auto& s = spaces[i];
      const std::string where = source + ": spaces[" + std::to_string(i) + "]";
      check_keys(s, {"name", "path", "covers", "random", "dim"}, where);
      SpaceEntry e;
      e.name = get<std::string>(s, "name", where);
      if (s.contains("path")) e.path = resolve(base_dir, get<std::string>(s, "path", where));
      if (s.contains("random")) e.is_random = get<bool>(s, "random", where);
      if (s.contains("dim")) e.dim = get<std::size_t>(s, "dim", where);
      if (s.contains("covers")) {
        if (!s.at("covers").is_array()) throw InputError(where + ": covers must be a list");
        for (const auto& k : s.at("covers")) e.covers.insert(kind_from_json(k, where));
      }
      c.spaces.push_back(std::move(e));
    }
  }

  if (j.contains("training")) {
    const auto& t = j.at("training");
    const std::string where = source + ": training";
    check_keys(t,
               {"learning_rate", "dropout", "batch_size", "runs", "perturbation", "architectures",
                "epoch_tiers"},
               where);
    auto& tc = c.training;
    if (t.contains("learning_rate")) tc.learning_rate = get<double>(t, "learning_rate", where);
    if (t.contains("dropout")) tc.dropout = get<double>(t, "dropout", where);
    if (t.contains("batch_size")) tc.batch_size = get<std::size_t>(t, "batch_size", where);
    if (t.contains("runs")) tc.runs = get<std::size_t>(t, "runs", where);
    if (t.contains("perturbation")) tc.perturbation = get<bool>(t, "perturbation", where);
    if (t.contains("architectures")) {
      c.architectures.clear();
      for (const auto& a : get<std::vector<std::string>>(t, "architectures", where)) {
        c.architectures.push_back(parse_probe_kind(a));
      }
    }
    if (t.contains("epoch_tiers")) {
      // [[max_positives or null, epochs], ...]; null means unbounded.
      tc.epoch_tiers.clear();
      for (const auto& tier : t.at("epoch_tiers")) {
        if (!tier.is_array() || tier.size() != 2) throw InputError(where + ": epoch tiers are [max, epochs]");
        EpochTier e{tier[0].is_null() ? kUnbounded : tier[0].get<std::size_t>(), tier[1].get<std::size_t>()};
        tc.epoch_tiers.push_back(e);
      }
    }
  }
  c.validate_and_complete();
  return c;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_study_config(ss.str(), path, fs::path(path).parent_path().string());
}

std::string study_config_json(const StudyConfig& c) {
  json j;
  j["kg_path"] = c.kg_path;
  j["kg_name"] = c.kg_name;
  j["master_seed"] = c.master_seed;
  j["random_sizes"] = c.random_sizes;
  j["random_repeats"] = c.random_repeats;
  j["random_pair_type"] = std::string(pair_type_name(c.random_pair_type));
  if (!c.relations.empty()) j["relations"] = c.relations;
  json pt;
  pt["default"] = json::array();
  for (auto t : c.default_pair_types) pt["default"].push_back(std::string(pair_type_name(t)));
  for (const auto& [rel, list] : c.pair_types_by_relation) {
    json arr = json::array();
    for (auto t : list) arr.push_back(std::string(pair_type_name(t)));
    pt["relations"][rel] = arr;
  }
  j["pair_types"] = pt;
  if (!c.groups.empty()) {
    json g = json::object();
    for (const auto& [k, v] : c.groups) g[k] = v;
    j["groups"] = g;
  }
  j["min_total"] = c.min_total;
  json spaces = json::array();
  for (const auto& s : c.spaces) {
    json e;
    e["name"] = s.name;
    if (!s.path.empty()) e["path"] = s.path;
    if (s.is_random) {
      e["random"] = true;
      if (s.dim) e["dim"] = *s.dim;
    } else {
      e["covers"] = json::array();
      for (auto k : s.covers) e["covers"].push_back(std::string(kind_name(k)));
    }
    spaces.push_back(e);
  }
  j["spaces"] = spaces;
  json t;
  t["learning_rate"] = c.training.learning_rate;
  t["dropout"] = c.training.dropout;
  t["batch_size"] = c.training.batch_size;
  t["runs"] = c.training.runs;
  t["perturbation"] = c.training.perturbation;
  t["architectures"] = json::array();
  for (auto a : c.architectures) t["architectures"].push_back(std::string(probe_kind_name(a)));
  t["epoch_tiers"] = json::array();
  for (const auto& tier : c.training.epoch_tiers) {
    t["epoch_tiers"].push_back(
        json::array({tier.max_positives == kUnbounded ? json(nullptr) : json(tier.max_positives), tier.epochs}));
  }
  j["training"] = t;
  j["out_dir"] = c.out_dir;
  j["jobs"] = c.jobs;
  return j.dump(2) + "\n";
}

}  // namespace relprobe
