#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "relprobe/embedding_store.hpp"
#include "relprobe/kg_store.hpp"
#include "relprobe/study_config.hpp"

namespace relprobe {

// A small study with a known answer: "planted" holds between w:sNNNN and
// w:oNNNN where o = s + offset + N(0, noise^2) in the planted space, and
// "identity" pairs a node with itself.
struct SyntheticOptions {
  std::uint64_t seed = 7;
  std::size_t dim = 32;
  std::size_t n_pairs = 1000;
  double noise = 0.01;
  std::size_t identity_nodes = 500;
  std::vector<std::size_t> random_sizes = {200, 500, 1000};
  std::size_t random_repeats = 4;
  std::size_t runs = 3;
  // The library default (1e-5) is sized for far longer training than this
  // study's epoch budget allows.
  double learning_rate = 1e-3;
};

struct PlantedSpace {
  EmbeddingSpace space;
  std::vector<std::pair<NodeId, NodeId>> pairs;
  std::vector<double> offset;
};

PlantedSpace make_planted_space(const SyntheticOptions& opt);

std::vector<RawTriple> synthetic_triples(const PlantedSpace& planted, const SyntheticOptions& opt);

// Writes kg.tsv, planted.vec and study.json into `dir` and returns the
// loaded config (output below dir/out).
StudyConfig write_synthetic_study(const std::string& dir, const SyntheticOptions& opt);

}  // namespace relprobe
