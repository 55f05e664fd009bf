#include "relprobe/synthetic.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "relprobe/error.hpp"
#include "relprobe/rng.hpp"

namespace relprobe {

namespace fs = std::filesystem;

namespace {

std::string numbered(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%04zu", prefix, i);
  return buf;
}

}  // namespace

PlantedSpace make_planted_space(const SyntheticOptions& opt) {
  if (opt.dim == 0 || opt.n_pairs == 0) throw InputError("planted space needs dim > 0 and pairs > 0");
  Rng rng(derive_seed(opt.seed, {"planted_space"}));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, opt.noise);

  std::vector<double> offset(opt.dim);
  for (auto& o : offset) o = unit(rng);

  const std::size_t n = opt.n_pairs;
  std::vector<NodeId> vocab;
  std::vector<float> data(2 * n * opt.dim);
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (std::size_t i = 0; i < n; ++i) {
    vocab.push_back(NodeId::word_node(numbered('s', i)));
    pairs.emplace_back(vocab.back(), NodeId::word_node(numbered('o', i)));
  }
  for (std::size_t i = 0; i < n; ++i) vocab.push_back(pairs[i].second);
  for (std::size_t i = 0; i < n; ++i) {
    float* s = &data[i * opt.dim];
    float* o = &data[(n + i) * opt.dim];
    for (std::size_t k = 0; k < opt.dim; ++k) {
      const double sv = unit(rng);
      s[k] = static_cast<float>(sv);
      o[k] = static_cast<float>(sv + offset[k] + noise(rng));
    }
  }
  return PlantedSpace{EmbeddingSpace("planted", opt.dim, std::move(vocab), std::move(data)), std::move(pairs),
                      std::move(offset)};
}

std::vector<RawTriple> synthetic_triples(const PlantedSpace& planted, const SyntheticOptions& opt) {
  std::vector<RawTriple> out;
  for (const auto& [s, o] : planted.pairs) out.push_back(RawTriple{"planted", s, o});
  const std::size_t k = std::min(opt.identity_nodes, planted.pairs.size());
  for (std::size_t i = 0; i < k; ++i) {
    const NodeId& n = planted.pairs[i].first;
    out.push_back(RawTriple{"identity", n, n});
  }
  return out;
}

StudyConfig write_synthetic_study(const std::string& dir, const SyntheticOptions& opt) {
  fs::create_directories(dir);
  const PlantedSpace planted = make_planted_space(opt);
  {
    std::ofstream out(fs::path(dir) / "planted.vec");
    write_embeddings(out, planted.space);
  }
  {
    std::ofstream out(fs::path(dir) / "kg.tsv");
    KnowledgeGraph::from_triples(synthetic_triples(planted, opt), std::nullopt).write(out);
  }
  StudyConfig cfg;
  cfg.kg_path = "kg.tsv";
  cfg.kg_name = "synthetic";
  cfg.spaces = {SpaceEntry{"planted", "planted.vec", {NodeKind::Word}, false, std::nullopt},
                SpaceEntry{"random", {}, {}, true, opt.dim}};
  cfg.master_seed = opt.seed;
  cfg.random_sizes = opt.random_sizes;
  cfg.random_repeats = opt.random_repeats;
  cfg.groups = {{"planted", "planted"}, {"identity", "identity"}};
  cfg.training.runs = opt.runs;
  cfg.training.learning_rate = opt.learning_rate;
  cfg.out_dir = "out";
  const fs::path config_path = fs::path(dir) / "study.json";
  {
    std::ofstream out(config_path);
    out << study_config_json(cfg);
  }
  return load_study_config(config_path.string());
}

}  // namespace relprobe
