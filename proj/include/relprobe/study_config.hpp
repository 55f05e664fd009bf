#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relprobe/dataset_forge.hpp"
#include "relprobe/embedding_store.hpp"
#include "relprobe/kg_store.hpp"
#include "relprobe/prober.hpp"

namespace relprobe {

struct SpaceEntry {
  std::string name;
  std::string path;  // may be empty for the random space, which is then synthesized
  KindSet covers;
  bool is_random = false;
  std::optional<std::size_t> dim;  // random space only; defaults to the widest real space
};

struct StudyConfig {
  std::string kg_path;
  std::string kg_name = "kg";
  std::vector<SpaceEntry> spaces;
  std::uint64_t master_seed = 0;
  std::vector<std::size_t> random_sizes = kDefaultRandomSizes;
  std::size_t random_repeats = 1;
  PairType random_pair_type = PairType::WordWord;
  std::vector<std::string> relations;
  std::vector<PairType> default_pair_types = {PairType::WordWord};
  std::map<std::string, std::vector<PairType>, std::less<>> pair_types_by_relation;
  GroupMap groups;
  std::size_t min_total = 100;
  TrainingConfig training;
  std::vector<ProbeKind> architectures = {ProbeKind::NN2};
  std::string out_dir = "out";
  std::size_t jobs = 1;

  // Throws InputError. Adds a synthesized random space when none is listed.
  void validate_and_complete();
  ForgeConfig forge_config() const;
  const SpaceEntry& random_space() const;
};

// JSON object whose keys mirror StudyConfig. Relative paths are resolved
// against `base_dir`.
StudyConfig parse_study_config(const std::string& text, const std::string& source,
                               const std::string& base_dir);
StudyConfig load_study_config(const std::string& path);
std::string study_config_json(const StudyConfig& cfg);

}  // namespace relprobe
