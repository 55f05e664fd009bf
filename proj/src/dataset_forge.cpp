#include "relprobe/dataset_forge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_set>

#include <omp.h>

#include "relprobe/csv.hpp"
#include "relprobe/error.hpp"
#include "relprobe/rng.hpp"

namespace relprobe {

std::string_view split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw InputError("unknown split '" + std::string(text) + "'");
}

std::size_t RelationDataset::positives() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const Sample& s) { return s.label == 1; }));
}

std::size_t RelationDataset::negatives() const { return samples.size() - positives(); }

std::size_t RelationDataset::count(Split s) const {
  return static_cast<std::size_t>(std::count(split.begin(), split.end(), s));
}

namespace {

// Switched negatives are not checked against pairs implied by transitivity.
constexpr const char* kTransitivityNote = "negatives not filtered for transitively implied pairs";

// Above this many candidate codes, sampling switches from enumeration to rejection.
constexpr std::uint64_t kEnumerateLimit = std::uint64_t{1} << 22;

// k distinct codes drawn uniformly from [0, total) minus the excluded ones,
// in draw order. n_excluded must be the exact number of excluded codes.
std::vector<std::uint64_t> draw_codes(std::uint64_t total, std::uint64_t n_excluded, std::size_t k,
                                      const std::function<bool(std::uint64_t)>& excluded, Rng& rng) {
  std::uint64_t avail = total - n_excluded;
  k = static_cast<std::size_t>(std::min<std::uint64_t>(k, avail));
  std::vector<std::uint64_t> out;
  if (k == 0) return out;
  if (total <= kEnumerateLimit || 2 * std::uint64_t{k} >= avail) {
    out.reserve(avail);
    for (std::uint64_t c = 0; c < total; ++c) {
      if (!excluded(c)) out.push_back(c);
    }
    for (std::size_t i = 0; i < k; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, out.size() - 1);
      std::swap(out[i], out[pick(rng)]);
    }
    out.resize(k);
    return out;
  }
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(k * 2);
  std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
  out.reserve(k);
  while (out.size() < k) {
    std::uint64_t c = pick(rng);
    if (excluded(c) || !chosen.insert(c).second) continue;
    out.push_back(c);
  }
  return out;
}

std::vector<NodeId> sorted_unique(std::vector<NodeId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

bool any_reflexive(const std::vector<Sample>& samples) {
  return std::any_of(samples.begin(), samples.end(),
                     [](const Sample& s) { return s.subject == s.object; });
}

// Subject and object vocabularies of a positive set, with pair <-> code maps.
struct PairSpace {
  std::vector<NodeId> subjects;
  std::vector<NodeId> objects;
  // same_as_object[i] = index j with objects[j] == subjects[i], or -1
  std::vector<std::int64_t> same_as_object;

  PairSpace(std::vector<NodeId> s, std::vector<NodeId> o)
      : subjects(sorted_unique(std::move(s))), objects(sorted_unique(std::move(o))) {
    same_as_object.assign(subjects.size(), -1);
    for (std::size_t i = 0; i < subjects.size(); ++i) {
      auto it = std::lower_bound(objects.begin(), objects.end(), subjects[i]);
      if (it != objects.end() && *it == subjects[i]) same_as_object[i] = it - objects.begin();
    }
  }

  std::uint64_t total() const { return std::uint64_t{subjects.size()} * objects.size(); }
  std::uint64_t code(std::size_t si, std::size_t oi) const { return std::uint64_t{si} * objects.size() + oi; }
  bool reflexive(std::uint64_t c) const {
    return same_as_object[c / objects.size()] == static_cast<std::int64_t>(c % objects.size());
  }
  std::uint64_t reflexive_count() const {
    return static_cast<std::uint64_t>(
        std::count_if(same_as_object.begin(), same_as_object.end(), [](auto j) { return j >= 0; }));
  }
  std::optional<std::uint64_t> code_of(const NodeId& s, const NodeId& o) const {
    auto si = std::lower_bound(subjects.begin(), subjects.end(), s);
    auto oi = std::lower_bound(objects.begin(), objects.end(), o);
    if (si == subjects.end() || *si != s || oi == objects.end() || *oi != o) return std::nullopt;
    return code(si - subjects.begin(), oi - objects.begin());
  }
  Sample sample(std::uint64_t c, int label) const {
    return {subjects[c / objects.size()], objects[c % objects.size()], label};
  }
};

// Seed-vocabulary node pools for subjects and objects of a pair type.
std::pair<std::vector<NodeId>, std::vector<NodeId>> seed_pools(const SeedVocabulary& seed,
                                                               PairType pt) {
  auto conceptual = [&] {
    std::vector<NodeId> v = seed.of(NodeKind::Concept);
    const auto& inst = seed.of(NodeKind::Instance);
    v.insert(v.end(), inst.begin(), inst.end());
    return v;
  };
  switch (pt) {
    case PairType::ConceptConcept: return {conceptual(), conceptual()};
    case PairType::WordConcept: return {seed.of(NodeKind::Word), conceptual()};
    case PairType::WordWord: return {seed.of(NodeKind::Word), seed.of(NodeKind::Word)};
    case PairType::Unary: break;
  }
  throw InputError("random pairs are not defined for unary datasets");
}

using PairKey = std::pair<NodeId, NodeId>;

struct PairKeyHash {
  std::size_t operator()(const PairKey& k) const noexcept {
    NodeIdHash h;
    return h(k.first) * 1000003u ^ h(k.second);
  }
};
using PairSet = std::unordered_set<PairKey, PairKeyHash>;

// Shared by the public fallback_negatives and forge_all (which passes
// precomputed positive pools of the other relations).
FallbackResult fallback_impl(const std::vector<Sample>& positives,
                             const std::vector<const std::vector<Sample>*>& other_pools,
                             const SeedVocabulary& seed, PairType pair_type,
                             std::size_t shortfall, std::uint64_t rng_seed,
                             const std::vector<Sample>& existing,
                             const std::optional<NodeId>& unary_object) {
  FallbackResult res;
  if (shortfall == 0) return res;
  const bool unary = pair_type == PairType::Unary;
  const bool allow_reflexive = any_reflexive(positives);

  // Unary samples are keyed by subject alone: the object is never embedded.
  std::unordered_set<NodeId, NodeIdHash> blocked_subjects;
  PairSet blocked;
  for (const auto& s : positives) {
    if (unary) blocked_subjects.insert(s.subject);
    else blocked.emplace(s.subject, s.object);
  }
  for (const auto& s : existing) {
    if (unary) blocked_subjects.insert(s.subject);
    else blocked.emplace(s.subject, s.object);
  }
  auto eligible = [&](const NodeId& s, const NodeId& o) {
    if (unary) return !blocked_subjects.count(s);
    if (!allow_reflexive && s == o) return false;
    return !blocked.count({s, o});
  };
  auto take = [&](const NodeId& s, const NodeId& o) {
    if (unary) {
      blocked_subjects.insert(s);
      res.negatives.push_back({s, *unary_object, 0});
    } else {
      blocked.emplace(s, o);
      res.negatives.push_back({s, o, 0});
    }
  };

  Rng rng(rng_seed);

  // Other relations first.
  std::vector<Sample> pool;
  for (const auto* other : other_pools) {
    for (const auto& s : *other) {
      if (eligible(s.subject, s.object)) pool.push_back(unary ? Sample{s.subject, *unary_object, 0} : s);
    }
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end(),
                         [&](const Sample& a, const Sample& b) {
                           return unary ? a.subject == b.subject
                                        : (a.subject == b.subject && a.object == b.object);
                         }),
             pool.end());
  std::size_t want = std::min(shortfall, pool.size());
  for (std::size_t i = 0; i < want; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
    take(pool[i].subject, pool[i].object);
  }
  res.from_other_relations = want;

  // Then random pairs from the seed vocabulary.
  std::size_t missing = shortfall - want;
  if (missing == 0) return res;
  std::vector<NodeId> subj_pool, obj_pool;
  if (unary) {
    std::set<NodeKind> kinds;
    for (const auto& s : positives) kinds.insert(s.subject.kind);
    for (NodeKind k : kinds) {
      const auto& v = seed.of(k);
      subj_pool.insert(subj_pool.end(), v.begin(), v.end());
    }
    obj_pool = {*unary_object};
  } else {
    std::tie(subj_pool, obj_pool) = seed_pools(seed, pair_type);
  }
  if (subj_pool.empty() || obj_pool.empty()) return res;
  std::uniform_int_distribution<std::size_t> pick_s(0, subj_pool.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_o(0, obj_pool.size() - 1);
  std::size_t attempts = 100 * missing + 10000;
  std::size_t got = 0;
  while (got < missing && attempts-- > 0) {
    const NodeId& s = subj_pool[pick_s(rng)];
    const NodeId& o = obj_pool[pick_o(rng)];
    if (!eligible(s, o)) continue;
    take(s, o);
    ++got;
  }
  res.from_random = got;
  return res;
}

// Negatives of a per-class unary dataset: subjects of the relation's other
// classes, drawn uniformly.
std::vector<Sample> unary_switch(const std::vector<Sample>& relation_positives, const NodeId& object,
                                 std::size_t target, std::uint64_t rng_seed) {
  std::set<NodeId> own, others;
  for (const auto& s : relation_positives) {
    if (s.object == object) own.insert(s.subject);
  }
  for (const auto& s : relation_positives) {
    if (s.object != object && !own.count(s.subject)) others.insert(s.subject);
  }
  std::vector<NodeId> cand(others.begin(), others.end());
  Rng rng(rng_seed);
  std::size_t k = std::min(target, cand.size());
  std::vector<Sample> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, cand.size() - 1);
    std::swap(cand[i], cand[pick(rng)]);
    out.push_back({cand[i], object, 0});
  }
  return out;
}

}  // namespace

std::vector<Sample> extract_positive_pairs(const KnowledgeGraph& kg, const std::string& relation,
                                           const SeedVocabulary& seed, PairType pair_type) {
  auto pairs = kg.pairs_of(relation);
  const auto& nodes = kg.nodes();
  auto in_seed = [&](std::uint32_t i) { return seed.contains(nodes[i]); };
  auto conceptual = [&](std::uint32_t i) { return is_conceptual(nodes[i].kind); };

  bool needs_projection = false;
  if (pair_type == PairType::WordConcept || pair_type == PairType::WordWord) {
    needs_projection = std::any_of(pairs.begin(), pairs.end(),
                                   [&](const IndexPair& p) { return conceptual(p.first) && conceptual(p.second); });
    if (needs_projection) kg.require_word_concept_relation();
  }

  std::set<IndexPair> out;
  for (auto [s, o] : pairs) {
    bool sc = conceptual(s), oc = conceptual(o);
    switch (pair_type) {
      case PairType::ConceptConcept:
        if (sc && oc && in_seed(s) && in_seed(o)) out.emplace(s, o);
        break;
      case PairType::WordConcept:
        if (!sc && oc) {
          if (in_seed(s) && in_seed(o)) out.emplace(s, o);
        } else if (sc && oc && in_seed(o)) {
          for (std::uint32_t w : kg.word_indices_of(s)) {
            if (in_seed(w)) out.emplace(w, o);
          }
        }
        break;
      case PairType::WordWord:
        if (!sc && !oc) {
          if (in_seed(s) && in_seed(o)) out.emplace(s, o);
        } else if (sc && oc) {
          for (std::uint32_t ws : kg.word_indices_of(s)) {
            if (!in_seed(ws)) continue;
            for (std::uint32_t wo : kg.word_indices_of(o)) {
              if (in_seed(wo)) out.emplace(ws, wo);
            }
          }
        }
        break;
      case PairType::Unary:
        if (in_seed(s)) out.emplace(s, o);
        break;
    }
  }
  std::vector<Sample> samples;
  samples.reserve(out.size());
  for (auto [s, o] : out) samples.push_back({nodes[s], nodes[o], 1});
  std::sort(samples.begin(), samples.end());
  return samples;
}

std::vector<Sample> switch_candidates(const std::vector<Sample>& positives) {
  std::vector<NodeId> subj, obj;
  for (const auto& p : positives) {
    subj.push_back(p.subject);
    obj.push_back(p.object);
  }
  PairSpace space(std::move(subj), std::move(obj));
  std::unordered_set<std::uint64_t> pos;
  for (const auto& p : positives) pos.insert(*space.code_of(p.subject, p.object));
  const bool allow_reflexive = any_reflexive(positives);
  std::vector<Sample> out;
  for (std::uint64_t c = 0; c < space.total(); ++c) {
    if (pos.count(c) || (!allow_reflexive && space.reflexive(c))) continue;
    out.push_back(space.sample(c, 0));
  }
  return out;
}

std::vector<Sample> negative_switch(const std::vector<Sample>& positives, std::size_t target_count,
                                    std::uint64_t rng_seed) {
  if (positives.empty() || target_count == 0) return {};
  std::vector<NodeId> subj, obj;
  for (const auto& p : positives) {
    subj.push_back(p.subject);
    obj.push_back(p.object);
  }
  PairSpace space(std::move(subj), std::move(obj));
  std::unordered_set<std::uint64_t> pos;
  pos.reserve(positives.size() * 2);
  for (const auto& p : positives) pos.insert(*space.code_of(p.subject, p.object));
  const bool allow_reflexive = any_reflexive(positives);

  // Positive codes and non-positive reflexive codes are disjoint.
  std::uint64_t n_excluded = pos.size();
  if (!allow_reflexive) n_excluded += space.reflexive_count();
  auto excluded = [&](std::uint64_t c) {
    return pos.count(c) != 0 || (!allow_reflexive && space.reflexive(c));
  };
  Rng rng(rng_seed);
  auto codes = draw_codes(space.total(), n_excluded, target_count, excluded, rng);
  std::vector<Sample> out;
  out.reserve(codes.size());
  for (auto c : codes) out.push_back(space.sample(c, 0));
  return out;
}

FallbackResult fallback_negatives(const KnowledgeGraph& kg, const std::string& relation,
                                  const SeedVocabulary& seed, PairType pair_type,
                                  std::size_t shortfall, std::uint64_t rng_seed,
                                  const std::vector<Sample>& existing) {
  if (pair_type == PairType::Unary) {
    throw InputError("fallback_negatives: unary datasets are handled per class by forge_all");
  }
  auto positives = extract_positive_pairs(kg, relation, seed, pair_type);
  std::vector<std::vector<Sample>> others;
  for (const auto& r : kg.relations()) {
    if (r.name == relation) continue;
    try {
      others.push_back(extract_positive_pairs(kg, r.name, seed, pair_type));
    } catch (const InputError&) {
      // Relation cannot be projected to this pair type; contributes nothing.
    }
  }
  std::vector<const std::vector<Sample>*> ptrs;
  for (const auto& o : others) ptrs.push_back(&o);
  return fallback_impl(positives, ptrs, seed, pair_type, shortfall, rng_seed, existing, std::nullopt);
}

std::vector<Split> split_dataset(const std::vector<Sample>& samples, const SplitRatios& ratios,
                                 std::uint64_t rng_seed) {
  if (ratios.train <= 0 || ratios.val <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InputError("split ratios must be positive and sum to 1");
  }
  const std::size_t n = samples.size();
  if (n < 20) throw InputError("split needs at least 20 samples, got " + std::to_string(n));

  std::size_t n_test = std::max<std::size_t>(1, std::lround(n * ratios.test));
  std::size_t n_val = std::max<std::size_t>(1, std::lround(n * ratios.val));

  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < n; ++i) (samples[i].label == 1 ? pos : neg).push_back(i);
  Rng rng(rng_seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);

  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t i = 0; i < std::max(pos.size(), neg.size()); ++i) {
    if (i < pos.size()) order.push_back(pos[i]);
    if (i < neg.size()) order.push_back(neg[i]);
  }
  std::vector<Split> split(n, Split::Train);
  for (std::size_t i = 0; i < n_test; ++i) split[order[i]] = Split::Test;
  for (std::size_t i = n_test; i < n_test + n_val; ++i) split[order[i]] = Split::Val;
  return split;
}

RelationDataset gen_random_dataset(const SeedVocabulary& seed, PairType pair_type, std::size_t x,
                                   std::uint64_t rng_seed, const std::string& name,
                                   const SplitRatios& ratios) {
  auto [subj, obj] = seed_pools(seed, pair_type);
  PairSpace space(std::move(subj), std::move(obj));
  const std::uint64_t refl = space.reflexive_count();
  const std::uint64_t capacity = space.total() - refl;
  if (x == 0 || capacity < 2 * std::uint64_t{x}) {
    throw InputError("seed vocabulary too small for " + std::to_string(x) + " + " + std::to_string(x) +
                     " distinct random pairs (capacity " + std::to_string(capacity) + ")");
  }
  Rng rng(derive_seed(rng_seed, {"pairs"}));
  auto codes = draw_codes(space.total(), refl, 2 * x,
                          [&](std::uint64_t c) { return space.reflexive(c); }, rng);
  RelationDataset ds;
  ds.name = name.empty() ? "random_" + std::to_string(x) : name;
  ds.relation = ds.name;
  ds.group = "random";
  ds.pair_type = pair_type;
  ds.is_random = true;
  ds.generation_seed = rng_seed;
  ds.samples.reserve(2 * x);
  for (std::size_t i = 0; i < codes.size(); ++i) ds.samples.push_back(space.sample(codes[i], i < x ? 1 : 0));
  ds.split = split_dataset(ds.samples, ratios, derive_seed(rng_seed, {"split"}));
  return ds;
}

namespace {

struct ForgeTask {
  std::string relation;
  PairType pair_type;
  std::optional<NodeId> unary_object;
  std::string name;
};

std::string dataset_name(const ForgeTask& t) {
  std::string n = t.relation + "." + std::string(pair_type_code(t.pair_type));
  if (t.unary_object) n += "." + t.unary_object->name;
  return n;
}

}  // namespace

ForgeOutput forge_all(const KnowledgeGraph& kg, const SeedVocabulary& seed,
                      const ForgeConfig& config) {
  if (config.min_total < 40) throw InputError("min_total must be at least 40");
  std::vector<std::string> relations = config.relations;
  if (relations.empty()) {
    for (const auto& r : kg.relations()) {
      if (kg.word_concept_relation() != r.name) relations.push_back(r.name);
    }
  }
  for (const auto& r : relations) {
    if (!kg.has_relation(r)) throw InputError("configured relation '" + r + "' is not in the knowledge graph");
  }
  auto pair_types_for = [&](const std::string& r) -> const std::vector<PairType>& {
    auto it = config.pair_types_by_relation.find(r);
    return it == config.pair_types_by_relation.end() ? config.default_pair_types : it->second;
  };
  auto group_of = [&](const std::string& r) { return kg.relations()[*kg.relation_index(r)].group; };

  // Positive pools for every (relation, pair type) in use; other relations'
  // pools feed the fallback.
  std::set<PairType> used;
  for (const auto& r : relations) used.insert(pair_types_for(r).begin(), pair_types_for(r).end());
  struct PoolEntry {
    std::string relation;
    PairType pair_type;
    std::vector<Sample> positives;
    std::string error;
  };
  std::vector<PoolEntry> pools;
  for (const auto& r : kg.relations()) {
    for (PairType pt : used) pools.push_back({r.name, pt, {}, {}});
  }
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < pools.size(); ++i) {
    try {
      pools[i].positives = extract_positive_pairs(kg, pools[i].relation, seed, pools[i].pair_type);
    } catch (const std::exception& e) {
      pools[i].error = e.what();
    }
  }
  auto pool_of = [&](const std::string& r, PairType pt) -> const PoolEntry& {
    for (const auto& p : pools) {
      if (p.relation == r && p.pair_type == pt) return p;
    }
    throw std::logic_error("missing positive pool");
  };

  ForgeOutput out;
  std::vector<ForgeTask> tasks;
  for (const auto& r : relations) {
    for (PairType pt : pair_types_for(r)) {
      const auto& pool = pool_of(r, pt);
      if (!pool.error.empty()) throw InputError("relation '" + r + "': " + pool.error);
      if (pt != PairType::Unary) {
        tasks.push_back({r, pt, std::nullopt, {}});
        continue;
      }
      std::set<NodeId> objects;
      for (const auto& s : pool.positives) objects.insert(s.object);
      if (objects.size() > config.max_unary_classes) {
        ManifestRow row;
        row.dataset = r + ".u";
        row.relation = r;
        row.group = group_of(r);
        row.pair_type = pt;
        row.n_pos = pool.positives.size();
        row.status = "skipped:too_many_classes";
        out.manifest.push_back(row);
        continue;
      }
      for (const auto& o : objects) tasks.push_back({r, pt, o, {}});
    }
  }
  for (auto& t : tasks) t.name = dataset_name(t);

  std::vector<ManifestRow> rows(tasks.size());
  std::vector<std::optional<RelationDataset>> built(tasks.size());
  std::vector<std::string> errors(tasks.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    try {
      const auto& t = tasks[ti];
      ManifestRow& row = rows[ti];
      row.dataset = t.name;
      row.relation = t.relation;
      row.group = group_of(t.relation);
      row.pair_type = t.pair_type;

      std::vector<Sample> positives;
      const auto& relation_pos = pool_of(t.relation, t.pair_type).positives;
      if (t.unary_object) {
        for (const auto& s : relation_pos) {
          if (s.object == *t.unary_object) positives.push_back(s);
        }
      } else {
        positives = relation_pos;
      }
      row.n_pos = positives.size();
      if (positives.empty() || 2 * positives.size() < config.min_total) {
        row.status = "skipped:too_small";
        continue;
      }

      const std::uint64_t gen_seed = derive_seed(config.master_seed, {"dataset", t.name});
      std::vector<Sample> negatives =
          t.unary_object
              ? unary_switch(relation_pos, *t.unary_object, positives.size(), derive_seed(gen_seed, {"switch"}))
              : negative_switch(positives, positives.size(), derive_seed(gen_seed, {"switch"}));
      if (negatives.size() < positives.size()) {
        std::vector<const std::vector<Sample>*> others;
        for (const auto& p : pools) {
          if (p.relation != t.relation && p.pair_type == t.pair_type && p.error.empty()) {
            others.push_back(&p.positives);
          }
        }
        auto fb = fallback_impl(positives, others, seed, t.pair_type, positives.size() - negatives.size(),
                                derive_seed(gen_seed, {"fallback"}), negatives, t.unary_object);
        row.n_fallback_other = fb.from_other_relations;
        row.n_fallback_random = fb.from_random;
        negatives.insert(negatives.end(), fb.negatives.begin(), fb.negatives.end());
      }
      row.n_neg = negatives.size();
      if (negatives.size() + 1 < positives.size()) {
        row.status = "skipped:unbalanced";
        continue;
      }
      if (positives.size() + negatives.size() < config.min_total) {
        row.status = "skipped:too_small";
        continue;
      }

      RelationDataset ds;
      ds.name = t.name;
      ds.relation = t.relation;
      ds.group = row.group;
      ds.pair_type = t.pair_type;
      ds.generation_seed = gen_seed;
      ds.samples = std::move(positives);
      ds.samples.insert(ds.samples.end(), negatives.begin(), negatives.end());
      ds.split = split_dataset(ds.samples, config.ratios, derive_seed(gen_seed, {"split"}));
      row.status = "ok";
      row.note = kTransitivityNote;
      built[ti] = std::move(ds);
    } catch (const std::exception& e) {
      errors[ti] = e.what();
    }
  }
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    if (!errors[ti].empty()) throw InputError("dataset '" + tasks[ti].name + "': " + errors[ti]);
    out.manifest.push_back(rows[ti]);
    if (built[ti]) out.datasets.push_back(std::move(*built[ti]));
  }

  for (std::size_t x : config.random_sizes) {
    for (std::size_t rep = 1; rep <= config.random_repeats; ++rep) {
      std::string name = "random_" + std::to_string(x);
      if (config.random_repeats > 1) name += "_" + std::to_string(rep);
      ManifestRow row;
      row.dataset = name;
      row.relation = name;
      row.group = "random";
      row.pair_type = config.random_pair_type;
      try {
        auto ds = gen_random_dataset(seed, config.random_pair_type, x,
                                     derive_seed(config.master_seed, {"dataset", name}), name,
                                     config.ratios);
        row.n_pos = ds.positives();
        row.n_neg = ds.negatives();
        row.status = "ok";
        out.datasets.push_back(std::move(ds));
      } catch (const InputError&) {
        row.status = "skipped:vocab_too_small";
      }
      out.manifest.push_back(row);
    }
  }
  return out;
}

void write_dataset(std::ostream& out, const RelationDataset& ds) {
  out << "#name=" << ds.name << '\n'
      << "#relation=" << ds.relation << '\n'
      << "#group=" << ds.group << '\n'
      << "#pair_type=" << pair_type_name(ds.pair_type) << '\n'
      << "#random=" << (ds.is_random ? 1 : 0) << '\n'
      << "#seed=" << ds.generation_seed << '\n';
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    out << s.subject.str() << '\t' << s.object.str() << '\t' << s.label << '\t'
        << split_name(ds.split[i]) << '\n';
  }
}

RelationDataset parse_dataset(std::istream& in, const std::string& source) {
  RelationDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1), value = line.substr(eq + 1);
      try {
        if (key == "name") ds.name = value;
        else if (key == "relation") ds.relation = value;
        else if (key == "group") ds.group = value;
        else if (key == "pair_type") ds.pair_type = parse_pair_type(value);
        else if (key == "random") ds.is_random = value == "1";
        else if (key == "seed") ds.generation_seed = std::stoull(value);
      } catch (const std::exception& e) {
        throw ParseError(source, lineno, std::string("bad metadata: ") + e.what());
      }
      continue;
    }
    std::vector<std::string> f;
    std::size_t start = 0;
    while (true) {
      auto tab = line.find('\t', start);
      f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (f.size() != 4 || (f[2] != "0" && f[2] != "1")) {
      throw ParseError(source, lineno, "expected subject<TAB>object<TAB>label<TAB>split");
    }
    try {
      ds.samples.push_back({NodeId::parse(f[0]), NodeId::parse(f[1]), f[2] == "1" ? 1 : 0});
      ds.split.push_back(parse_split(f[3]));
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (ds.name.empty()) throw InputError(source + ": dataset file lacks #name");
  return ds;
}

RelationDataset read_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset file '" + path + "'");
  return parse_dataset(in, path);
}

std::string dataset_file_stem(const std::string& name) {
  std::string out;
  for (unsigned char c : name) {
    bool keep = std::isalnum(c) || c == '.' || c == '_' || c == '-';
    out += keep ? static_cast<char>(c) : '_';
  }
  return out;
}

void write_manifest(std::ostream& out, const std::vector<ManifestRow>& rows) {
  csv::write_row(out, {"dataset", "relation", "group", "pair_type", "n_pos", "n_neg",
                       "n_fallback_other", "n_fallback_random", "status", "note"});
  for (const auto& r : rows) {
    csv::write_row(out, {r.dataset, r.relation, r.group, std::string(pair_type_name(r.pair_type)),
                         std::to_string(r.n_pos), std::to_string(r.n_neg),
                         std::to_string(r.n_fallback_other), std::to_string(r.n_fallback_random),
                         r.status, r.note});
  }
}

std::vector<ManifestRow> read_manifest(const std::string& path) {
  auto t = csv::read_table(path);
  std::vector<ManifestRow> rows;
  const auto c_ds = t.column("dataset"), c_rel = t.column("relation"), c_grp = t.column("group"),
             c_pt = t.column("pair_type"), c_pos = t.column("n_pos"), c_neg = t.column("n_neg"),
             c_fo = t.column("n_fallback_other"), c_fr = t.column("n_fallback_random"),
             c_st = t.column("status"), c_note = t.column("note");
  for (const auto& f : t.rows) {
    ManifestRow r;
    r.dataset = f[c_ds];
    r.relation = f[c_rel];
    r.group = f[c_grp];
    r.pair_type = parse_pair_type(f[c_pt]);
    r.n_pos = std::stoull(f[c_pos]);
    r.n_neg = std::stoull(f[c_neg]);
    r.n_fallback_other = std::stoull(f[c_fo]);
    r.n_fallback_random = std::stoull(f[c_fr]);
    r.status = f[c_st];
    r.note = f[c_note];
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace relprobe
