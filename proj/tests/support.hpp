#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "relprobe/kg_store.hpp"
#include "relprobe/node.hpp"

namespace relprobe::test {

inline NodeId C(const std::string& n) { return NodeId::concept_node(n); }
inline NodeId I(const std::string& n) { return NodeId::instance_node(n); }
inline NodeId W(const std::string& n) { return NodeId::word_node(n); }

inline KnowledgeGraph parse_kg(const std::string& text, const GroupMap& groups = {}) {
  std::istringstream in(text);
  return KnowledgeGraph::parse(in, "fixture", groups);
}

// Fresh directory below the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("relprobe_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Random KG for property tests: concepts linked by two relations plus a
// word-to-concept relation giving each concept 0-2 words.
inline std::vector<RawTriple> random_kg_triples(std::mt19937_64& rng, std::size_t n_concepts,
                                                std::size_t n_triples) {
  std::uniform_int_distribution<std::size_t> pick(0, n_concepts - 1);
  std::uniform_int_distribution<int> n_words(0, 2);
  std::vector<RawTriple> out;
  const char* rels[] = {"hyp", "mero"};
  for (std::size_t i = 0; i < n_triples; ++i) {
    out.push_back(RawTriple{rels[i % 2], C("c" + std::to_string(pick(rng))), C("c" + std::to_string(pick(rng)))});
  }
  std::size_t word = 0;
  for (std::size_t c = 0; c < n_concepts; ++c) {
    for (int k = n_words(rng); k > 0; --k) {
      out.push_back(RawTriple{"rw", W("w" + std::to_string(word++)), C("c" + std::to_string(c))});
    }
  }
  return out;
}

}  // namespace relprobe::test
