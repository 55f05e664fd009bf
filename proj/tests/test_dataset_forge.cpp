#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "relprobe/dataset_forge.hpp"
#include "relprobe/error.hpp"
#include "support.hpp"

using namespace relprobe;
using namespace relprobe::test;

namespace {

// Seed vocabulary holding every node of the graph.
SeedVocabulary full_seed(const KnowledgeGraph& kg) {
  SeedVocabulary s;
  for (const auto& n : kg.nodes()) s.by_kind[static_cast<int>(n.kind)].push_back(n);
  for (auto& v : s.by_kind) std::sort(v.begin(), v.end());
  return s;
}

SeedVocabulary word_seed(std::size_t n) {
  SeedVocabulary s;
  for (std::size_t i = 0; i < n; ++i) s.by_kind[static_cast<int>(NodeKind::Word)].push_back(W("w" + std::to_string(i)));
  std::sort(s.by_kind[2].begin(), s.by_kind[2].end());
  return s;
}

std::vector<Sample> pos(std::initializer_list<std::pair<const char*, const char*>> pairs) {
  std::vector<Sample> out;
  for (auto [s, o] : pairs) out.push_back({W(s), W(o), 1});
  return out;
}

using PairSet = std::set<std::pair<NodeId, NodeId>>;

// Brute-force projected positives of a relation from its raw triples.
PairSet brute_positives(const std::vector<RawTriple>& raw, const std::string& rel, PairType pt) {
  std::multimap<NodeId, NodeId> words;
  for (const auto& t : raw) {
    if (t.relation == "rw") words.emplace(t.object, t.subject);
  }
  PairSet out;
  for (const auto& t : raw) {
    if (t.relation != rel) continue;
    const bool sc = is_conceptual(t.subject.kind), oc = is_conceptual(t.object.kind);
    if (pt == PairType::ConceptConcept && sc && oc) out.insert({t.subject, t.object});
    if (pt == PairType::WordWord && !sc && !oc) out.insert({t.subject, t.object});
    if (pt == PairType::WordWord && sc && oc) {
      auto [a, b] = words.equal_range(t.subject);
      auto [c, d] = words.equal_range(t.object);
      for (auto i = a; i != b; ++i)
        for (auto j = c; j != d; ++j) out.insert({i->second, j->second});
    }
    if (pt == PairType::WordConcept && sc && oc) {
      auto [a, b] = words.equal_range(t.subject);
      for (auto i = a; i != b; ++i) out.insert({i->second, t.object});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("word_word positives project through the word-to-concept relation") {
  auto kg = parse_kg("#rw=rw\nhyp\tc:c1\tc:c2\nrw\tw:w1\tc:c1\nrw\tw:w2\tc:c2\nrw\tw:w3\tc:c2\n");
  auto seed = full_seed(kg);
  auto ww = extract_positive_pairs(kg, "hyp", seed, PairType::WordWord);
  CHECK(ww == pos({{"w1", "w2"}, {"w1", "w3"}}));
  auto wc = extract_positive_pairs(kg, "hyp", seed, PairType::WordConcept);
  REQUIRE(wc.size() == 1);
  CHECK(wc[0].subject == W("w1"));
  CHECK(wc[0].object == C("c2"));
  auto cc = extract_positive_pairs(kg, "hyp", seed, PairType::ConceptConcept);
  REQUIRE(cc.size() == 1);
  CHECK(cc[0].subject == C("c1"));
}

TEST_CASE("cinnamon-spice is a word positive of hypernym when both words are in seed") {
  auto kg = parse_kg("#rw=rw\nhypernym\tc:cinnamon.n.01\tc:spice.n.02\n"
                     "rw\tw:cinnamon\tc:cinnamon.n.01\nrw\tw:spice\tc:spice.n.02\n");
  auto ww = extract_positive_pairs(kg, "hypernym", full_seed(kg), PairType::WordWord);
  CHECK(ww == pos({{"cinnamon", "spice"}}));
  SeedVocabulary partial = full_seed(kg);
  auto& words = partial.by_kind[static_cast<int>(NodeKind::Word)];
  words.erase(std::find(words.begin(), words.end(), W("spice")));
  CHECK(extract_positive_pairs(kg, "hypernym", partial, PairType::WordWord).empty());
}

TEST_CASE("positive extraction errors and vacuous cases") {
  auto kg = parse_kg("hyp\tc:a\tc:b\nsyn\tw:x\tw:y\n");
  CHECK_THROWS_AS(extract_positive_pairs(kg, "nope", full_seed(kg), PairType::WordWord), InputError);
  // Projection needs the word-to-concept relation.
  CHECK_THROWS_AS(extract_positive_pairs(kg, "hyp", full_seed(kg), PairType::WordWord), InputError);
  // Direct word triples need no projection.
  CHECK(extract_positive_pairs(kg, "syn", full_seed(kg), PairType::WordWord).size() == 1);
  CHECK(extract_positive_pairs(kg, "syn", full_seed(kg), PairType::ConceptConcept).empty());
}

TEST_CASE("switch candidates of two positives are the two crossed pairs") {
  auto p = pos({{"ni", "nj"}, {"nk", "nl"}});
  auto cand = switch_candidates(p);
  std::set<Sample> got(cand.begin(), cand.end());
  std::set<Sample> want{{W("nk"), W("nj"), 0}, {W("ni"), W("nl"), 0}};
  CHECK(got == want);
  auto drawn = negative_switch(p, 10, 1);
  CHECK(std::set<Sample>(drawn.begin(), drawn.end()) == want);
}

TEST_CASE("a single positive has no switch candidates") {
  CHECK(switch_candidates(pos({{"a", "b"}})).empty());
  CHECK(negative_switch(pos({{"a", "b"}}), 5, 1).empty());
}

TEST_CASE("4 positives over 3x3 vocabularies draw only oracle candidates") {
  auto p = pos({{"a", "x"}, {"b", "y"}, {"c", "z"}, {"a", "y"}});
  std::set<std::pair<NodeId, NodeId>> positive;
  for (const auto& s : p) positive.insert({s.subject, s.object});
  std::set<Sample> oracle;
  for (auto s : {"a", "b", "c"})
    for (auto o : {"x", "y", "z"})
      if (!positive.count({W(s), W(o)})) oracle.insert({W(s), W(o), 0});
  CHECK(oracle.size() == 5);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto n = negative_switch(p, 3, seed);
    CHECK(n.size() == 3);
    CHECK(std::set<Sample>(n.begin(), n.end()).size() == 3);
    for (const auto& s : n) CHECK(oracle.count(s));
  }
  CHECK(negative_switch(p, 3, 4) == negative_switch(p, 3, 4));
}

TEST_CASE("reflexive negatives only when the relation has reflexive positives") {
  auto p = pos({{"a", "b"}, {"b", "a"}});
  for (const auto& s : switch_candidates(p)) CHECK(s.subject != s.object);
  CHECK(switch_candidates(p).empty());
  auto r = pos({{"a", "a"}, {"b", "b"}});
  auto cand = switch_candidates(r);
  CHECK(cand.size() == 2);
}

TEST_CASE("fallback takes other relations first, then random pairs") {
  // r has 3 positives sharing subject/object structure with no switch room.
  std::string text;
  text += "r\tw:a\tw:b\n";
  for (int i = 0; i < 5; ++i) text += "other\tw:o" + std::to_string(i) + "\tw:p" + std::to_string(i) + "\n";
  text += "other\tw:a\tw:b\n";  // shared with r; must never become a negative
  auto kg = parse_kg(text);
  auto seed = full_seed(kg);
  auto fb = fallback_negatives(kg, "r", seed, PairType::WordWord, 2, 9);
  CHECK(fb.negatives.size() == 2);
  CHECK(fb.from_other_relations == 2);
  CHECK(fb.from_random == 0);
  for (const auto& s : fb.negatives) {
    CHECK(s.label == 0);
    CHECK_FALSE((s.subject == W("a") && s.object == W("b")));
    CHECK(s.subject.name[0] == 'o');
  }

  auto lonely = parse_kg("r\tw:a\tw:b\nr\tw:c\tw:d\nx\tw:e\tw:f\n");
  auto fb2 = fallback_negatives(lonely, "x", full_seed(lonely), PairType::WordWord, 2, 3);
  CHECK(fb2.from_other_relations == 2);
  auto only = parse_kg("r\tw:a\tw:b\nr\tw:c\tw:d\nr\tw:e\tw:f\n");
  auto fb3 = fallback_negatives(only, "r", full_seed(only), PairType::WordWord, 2, 3);
  CHECK(fb3.from_other_relations == 0);
  CHECK(fb3.from_random == 2);
  for (const auto& s : fb3.negatives) {
    CHECK(s.subject != s.object);
    CHECK_FALSE(brute_positives({{"r", W("a"), W("b")}, {"r", W("c"), W("d")}, {"r", W("e"), W("f")}}, "r",
                                PairType::WordWord)
                    .count({s.subject, s.object}));
  }
}

TEST_CASE("random datasets") {
  auto seed = word_seed(10000);
  auto ds = gen_random_dataset(seed, PairType::WordWord, 200, 5);
  CHECK(ds.name == "random_200");
  CHECK(ds.is_random);
  CHECK(ds.samples.size() == 400);
  CHECK(ds.positives() == 200);
  std::set<std::pair<NodeId, NodeId>> distinct;
  for (const auto& s : ds.samples) distinct.insert({s.subject, s.object});
  CHECK(distinct.size() == 400);
  auto again = gen_random_dataset(seed, PairType::WordWord, 200, 5);
  CHECK(again.samples == ds.samples);
  CHECK(again.split == ds.split);
  // 4 words give 12 non-reflexive pairs: 7 + 7 does not fit.
  CHECK_THROWS_AS(gen_random_dataset(word_seed(4), PairType::WordWord, 7, 1), InputError);
  CHECK_THROWS_AS(gen_random_dataset(seed, PairType::Unary, 10, 1), InputError);
}

TEST_CASE("split proportions") {
  std::vector<Sample> s;
  for (int i = 0; i < 500; ++i) {
    s.push_back({W("a" + std::to_string(i)), W("b"), 1});
    s.push_back({W("c" + std::to_string(i)), W("d"), 0});
  }
  auto split = split_dataset(s, {}, 3);
  std::map<std::pair<Split, int>, int> n;
  for (std::size_t i = 0; i < s.size(); ++i) ++n[{split[i], s[i].label}];
  CHECK(n[{Split::Train, 1}] + n[{Split::Train, 0}] == 900);
  CHECK(n[{Split::Val, 1}] + n[{Split::Val, 0}] == 50);
  CHECK(n[{Split::Test, 1}] + n[{Split::Test, 0}] == 50);
  CHECK(std::abs(n[{Split::Val, 1}] - 25) <= 1);
  CHECK(std::abs(n[{Split::Test, 1}] - 25) <= 1);
  CHECK(std::abs(n[{Split::Train, 1}] - 450) <= 1);

  s.resize(20);
  auto small = split_dataset(s, {}, 1);
  CHECK(std::count(small.begin(), small.end(), Split::Train) == 18);
  CHECK(std::count(small.begin(), small.end(), Split::Val) == 1);
  CHECK(std::count(small.begin(), small.end(), Split::Test) == 1);

  CHECK_THROWS_AS(split_dataset(s, {0.9, 0.05, 0.1}, 1), InputError);
  s.resize(19);
  CHECK_THROWS_AS(split_dataset(s, {}, 1), InputError);
}

TEST_CASE("forge_all: two word relations give 2 datasets plus 6 random ones") {
  std::string text;
  for (int i = 0; i < 80; ++i) {
    text += "syn\tw:a" + std::to_string(i) + "\tw:b" + std::to_string(i) + "\n";
    text += "ant\tw:c" + std::to_string(i) + "\tw:d" + std::to_string(i) + "\n";
  }
  auto kg = parse_kg(text);
  auto seed = word_seed(400);
  for (const auto& n : kg.nodes()) seed.by_kind[2].push_back(n);
  std::sort(seed.by_kind[2].begin(), seed.by_kind[2].end());
  ForgeConfig cfg;
  cfg.master_seed = 4;
  auto out = forge_all(kg, seed, cfg);
  CHECK(out.datasets.size() == 8);
  CHECK(out.manifest.size() == 8);
  std::size_t random = 0;
  for (const auto& d : out.datasets) random += d.is_random;
  CHECK(random == 6);
  for (const auto& m : out.manifest) {
    const bool is_random = m.dataset.rfind("random_", 0) == 0;
    CHECK(m.note.empty() == is_random);
  }

  auto again = forge_all(kg, seed, cfg);
  std::ostringstream a, b;
  write_manifest(a, out.manifest);
  write_manifest(b, again.manifest);
  CHECK(a.str() == b.str());
  for (std::size_t i = 0; i < out.datasets.size(); ++i) {
    std::ostringstream x, y;
    write_dataset(x, out.datasets[i]);
    write_dataset(y, again.datasets[i]);
    CHECK(x.str() == y.str());
  }

  cfg.min_total = 200;
  cfg.random_sizes = {200};
  auto strict = forge_all(kg, seed, cfg);
  std::size_t too_small = 0;
  for (const auto& m : strict.manifest) too_small += m.status == "skipped:too_small";
  CHECK(too_small == 2);
}

TEST_CASE("forge_all records a relation that cannot be balanced") {
  // Every ordered pair of 8 words is positive: no switch room, and random
  // pairs over the same 8 words are all positives or reflexive.
  std::string text;
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j)
      if (i != j) text += "all\tw:n" + std::to_string(i) + "\tw:n" + std::to_string(j) + "\n";
  auto kg = parse_kg(text);
  ForgeConfig cfg;
  cfg.min_total = 40;
  cfg.random_sizes = {5};
  auto out = forge_all(kg, full_seed(kg), cfg);
  bool found = false;
  for (const auto& m : out.manifest) {
    if (m.relation != "all") continue;
    found = true;
    CHECK(m.n_pos == 56);
    CHECK(m.n_neg == 0);
    CHECK(m.status == "skipped:unbalanced");
  }
  CHECK(found);
  for (const auto& d : out.datasets) CHECK(d.relation != "all");
}

TEST_CASE("property: closed-world soundness, closure and balance on random graphs") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    auto raw = random_kg_triples(rng, 30, 120);
    auto kg = KnowledgeGraph::from_triples(raw, "rw");
    auto seed = full_seed(kg);
    ForgeConfig cfg;
    cfg.master_seed = trial;
    cfg.min_total = 40;
    cfg.random_sizes = {10};
    cfg.default_pair_types = {PairType::WordWord, PairType::ConceptConcept, PairType::WordConcept};
    auto out = forge_all(kg, seed, cfg);
    std::map<std::string, const ManifestRow*> rows;
    for (const auto& m : out.manifest) rows[m.dataset] = &m;
    for (const auto& ds : out.datasets) {
      CHECK(static_cast<long>(ds.positives()) - static_cast<long>(ds.negatives()) <= 1);
      CHECK(static_cast<long>(ds.negatives()) - static_cast<long>(ds.positives()) <= 1);
      std::set<std::pair<NodeId, NodeId>> seen;
      for (const auto& s : ds.samples) CHECK(seen.insert({s.subject, s.object}).second);
      if (ds.is_random) continue;
      const auto truth = brute_positives(raw, ds.relation, ds.pair_type);
      std::set<NodeId> subjects, objects;
      for (const auto& s : ds.samples) {
        if (s.label == 1) {
          CHECK(truth.count({s.subject, s.object}));
          subjects.insert(s.subject);
          objects.insert(s.object);
        } else {
          CHECK_FALSE(truth.count({s.subject, s.object}));
        }
      }
      const auto& m = *rows.at(ds.name);
      if (m.n_fallback_other + m.n_fallback_random == 0) {
        for (const auto& s : ds.samples) {
          if (s.label == 0) {
            CHECK(subjects.count(s.subject));
            CHECK(objects.count(s.object));
          }
        }
      }
    }
  }
}

TEST_CASE("dataset and manifest files round-trip") {
  auto ds = gen_random_dataset(word_seed(50), PairType::WordWord, 20, 2);
  std::ostringstream out;
  write_dataset(out, ds);
  std::istringstream in(out.str());
  auto back = parse_dataset(in, "mem");
  CHECK(back.name == ds.name);
  CHECK(back.samples == ds.samples);
  CHECK(back.split == ds.split);
  CHECK(back.is_random);
  CHECK(back.generation_seed == ds.generation_seed);

  auto dir = scratch_dir("manifest");
  std::vector<ManifestRow> rows{{"hyp.w", "hyp", "Hypernymy", PairType::WordWord, 10, 10, 1, 2, "ok", "a, b"}};
  {
    std::ofstream f(dir / "m.csv");
    write_manifest(f, rows);
  }
  auto read = read_manifest((dir / "m.csv").string());
  REQUIRE(read.size() == 1);
  CHECK(read[0].dataset == "hyp.w");
  CHECK(read[0].n_fallback_random == 2);
  CHECK(read[0].note == "a, b");
  CHECK(dataset_file_stem("a/b c.w") == "a_b_c.w");
}
