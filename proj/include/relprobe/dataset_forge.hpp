#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/embedding_store.hpp"
#include "relprobe/kg_store.hpp"
#include "relprobe/pair_type.hpp"

namespace relprobe {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

std::string_view split_name(Split s);
Split parse_split(std::string_view text);

struct Sample {
  NodeId subject;
  NodeId object;
  int label = 0;

  auto operator<=>(const Sample&) const = default;
  bool operator==(const Sample&) const = default;
};

struct RelationDataset {
  std::string name;      // file stem, e.g. "hypernym.w" or "random_200"
  std::string relation;  // KG relation, or the dataset name for random baselines
  std::string group;
  PairType pair_type = PairType::WordWord;
  bool is_random = false;
  std::uint64_t generation_seed = 0;
  std::vector<Sample> samples;
  std::vector<Split> split;  // parallel to samples

  std::size_t positives() const;
  std::size_t negatives() const;
  std::size_t count(Split s) const;
};

struct SplitRatios {
  double train = 0.90;
  double val = 0.05;
  double test = 0.05;
};

// Positive pairs of `relation` for one pair type, restricted to the seed
// vocabulary. Word-level pair types project concept-level triples through
// the word-to-concept relation; word-level triples stated directly in the
// graph are taken as they are. Sorted, no duplicates.
std::vector<Sample> extract_positive_pairs(const KnowledgeGraph& kg, const std::string& relation,
                                           const SeedVocabulary& seed, PairType pair_type);

// Every (s, o) with s a positive subject and o a positive object that is not
// itself positive. Reflexive pairs are excluded unless some positive is
// reflexive. Sorted.
std::vector<Sample> switch_candidates(const std::vector<Sample>& positives);

// Up to target_count negatives drawn uniformly without replacement from
// switch_candidates(positives).
std::vector<Sample> negative_switch(const std::vector<Sample>& positives, std::size_t target_count,
                                    std::uint64_t rng_seed);

struct FallbackResult {
  std::vector<Sample> negatives;
  std::size_t from_other_relations = 0;
  std::size_t from_random = 0;
};

// Tops up a shortfall of negatives: first with positives of other relations
// of the same pair type, then with uniform random pairs from the seed
// vocabulary. Never returns a positive of `relation` or a member of
// `existing`.
FallbackResult fallback_negatives(const KnowledgeGraph& kg, const std::string& relation,
                                  const SeedVocabulary& seed, PairType pair_type,
                                  std::size_t shortfall, std::uint64_t rng_seed,
                                  const std::vector<Sample>& existing = {});

// Stratified by label: each label class is shuffled, the classes are
// interleaved, and the test then validation splits are cut from the front.
std::vector<Split> split_dataset(const std::vector<Sample>& samples, const SplitRatios& ratios,
                                 std::uint64_t rng_seed);

inline const std::vector<std::size_t> kDefaultRandomSizes = {200, 500, 1000, 5000, 10000, 50000};

// x distinct random pairs labeled 1 and x further distinct pairs labeled 0.
RelationDataset gen_random_dataset(const SeedVocabulary& seed, PairType pair_type, std::size_t x,
                                   std::uint64_t rng_seed, const std::string& name = {},
                                   const SplitRatios& ratios = {});

struct ForgeConfig {
  std::uint64_t master_seed = 0;
  // Relations to forge; empty means every relation except the word-to-concept one.
  std::vector<std::string> relations;
  std::vector<PairType> default_pair_types = {PairType::WordWord};
  std::map<std::string, std::vector<PairType>, std::less<>> pair_types_by_relation;
  std::size_t min_total = 100;
  std::vector<std::size_t> random_sizes = kDefaultRandomSizes;
  std::size_t random_repeats = 1;
  PairType random_pair_type = PairType::WordWord;
  SplitRatios ratios;
  // Unary relations with more distinct class objects than this are skipped.
  std::size_t max_unary_classes = 64;
};

struct ManifestRow {
  std::string dataset;
  std::string relation;
  std::string group;
  PairType pair_type = PairType::WordWord;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  std::size_t n_fallback_other = 0;
  std::size_t n_fallback_random = 0;
  std::string status;  // ok, skipped:too_small, skipped:unbalanced, ...
  std::string note;    // known limitations of the generated negatives
};

struct ForgeOutput {
  std::vector<RelationDataset> datasets;  // only status == ok
  std::vector<ManifestRow> manifest;      // one row per attempted dataset
};

ForgeOutput forge_all(const KnowledgeGraph& kg, const SeedVocabulary& seed,
                      const ForgeConfig& config);

// Dataset file: `#key=value` metadata lines, then
// subject<TAB>object<TAB>label<TAB>split rows.
void write_dataset(std::ostream& out, const RelationDataset& ds);
RelationDataset read_dataset(const std::string& path);
RelationDataset parse_dataset(std::istream& in, const std::string& source);

// Dataset name -> portable file stem.
std::string dataset_file_stem(const std::string& name);

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows);
std::vector<ManifestRow> read_manifest(const std::string& path);

}  // namespace relprobe
