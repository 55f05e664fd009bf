#include "relprobe/kg_store.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "relprobe/csv.hpp"
#include "relprobe/error.hpp"

namespace relprobe {
namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

KnowledgeGraph KnowledgeGraph::build(const std::vector<RawTriple>& raw,
                                     const std::vector<std::size_t>& lines,
                                     std::optional<std::string> rw, const GroupMap& groups,
                                     const std::string& source) {
  KnowledgeGraph g;
  std::set<NodeId> node_set;
  std::set<std::string, std::less<>> rel_set;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& r = raw[i];
    node_set.insert(r.subject);
    node_set.insert(r.object);
    rel_set.insert(r.relation);
    if (rw && r.relation == *rw &&
        (r.subject.kind != NodeKind::Word || !is_conceptual(r.object.kind))) {
      throw ParseError(source, lines[i],
                       "word-to-concept relation '" + *rw + "' must link a w: subject to a c:/i: object");
    }
  }
  g.nodes_.assign(node_set.begin(), node_set.end());
  g.node_index_.reserve(g.nodes_.size());
  for (std::uint32_t i = 0; i < g.nodes_.size(); ++i) g.node_index_.emplace(g.nodes_[i], i);
  for (const auto& name : rel_set) {
    auto it = groups.find(name);
    g.relations_.push_back({name, it == groups.end() ? std::string() : it->second});
  }

  g.triples_.reserve(raw.size());
  for (const auto& r : raw) {
    g.triples_.push_back(
        {*g.relation_index(r.relation), g.node_index_.at(r.subject), g.node_index_.at(r.object)});
  }
  std::sort(g.triples_.begin(), g.triples_.end());
  g.triples_.erase(std::unique(g.triples_.begin(), g.triples_.end()), g.triples_.end());

  g.pairs_by_relation_.resize(g.relations_.size());
  for (const auto& t : g.triples_) g.pairs_by_relation_[t.relation].emplace_back(t.subject, t.object);

  g.rw_ = std::move(rw);
  if (g.rw_) {
    if (auto ri = g.relation_index(*g.rw_)) {
      for (auto [w, c] : g.pairs_by_relation_[*ri]) g.words_by_node_[c].push_back(w);
    }
  }
  return g;
}

KnowledgeGraph KnowledgeGraph::load(const std::string& path, const GroupMap& groups) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open knowledge graph file '" + path + "'");
  return parse(in, path, groups);
}

KnowledgeGraph KnowledgeGraph::parse(std::istream& in, const std::string& source,
                                     const GroupMap& groups) {
  std::vector<RawTriple> raw;
  std::vector<std::size_t> lines;
  std::optional<std::string> rw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#rw=", 0) == 0) {
        std::string name = line.substr(4);
        if (!valid_node_name(name)) throw ParseError(source, lineno, "empty #rw directive");
        if (rw && *rw != name) {
          throw ParseError(source, lineno, "conflicting #rw directives '" + *rw + "' and '" + name + "'");
        }
        rw = std::move(name);
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (fields.size() != 3) {
      throw ParseError(source, lineno,
                       "expected relation<TAB>subject<TAB>object, got " +
                           std::to_string(fields.size()) + " field(s)");
    }
    if (!valid_node_name(fields[0])) throw ParseError(source, lineno, "empty or invalid relation name");
    try {
      raw.push_back({std::string(fields[0]), NodeId::parse(fields[1]), NodeId::parse(fields[2])});
      lines.push_back(lineno);
    } catch (const ParseError&) {
      throw;
    } catch (const InputError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return build(raw, lines, std::move(rw), groups, source);
}

KnowledgeGraph KnowledgeGraph::from_triples(const std::vector<RawTriple>& triples,
                                            std::optional<std::string> word_concept_relation,
                                            const GroupMap& groups) {
  std::vector<std::size_t> lines(triples.size());
  for (std::size_t i = 0; i < lines.size(); ++i) lines[i] = i + 1;
  return build(triples, lines, std::move(word_concept_relation), groups, "<memory>");
}

void KnowledgeGraph::write(std::ostream& out) const {
  if (rw_) out << "#rw=" << *rw_ << '\n';
  for (const auto& t : triples_) {
    out << relations_[t.relation].name << '\t' << nodes_[t.subject].str() << '\t'
        << nodes_[t.object].str() << '\n';
  }
}

std::optional<std::uint32_t> KnowledgeGraph::index_of(const NodeId& n) const {
  auto it = node_index_.find(n);
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> KnowledgeGraph::relation_index(std::string_view name) const {
  auto it = std::lower_bound(relations_.begin(), relations_.end(), name,
                             [](const RelationType& r, std::string_view n) { return r.name < n; });
  if (it == relations_.end() || it->name != name) return std::nullopt;
  return static_cast<std::uint32_t>(it - relations_.begin());
}

std::span<const IndexPair> KnowledgeGraph::pairs_of(std::string_view relation) const {
  auto ri = relation_index(relation);
  if (!ri) throw InputError("unknown relation '" + std::string(relation) + "'");
  return pairs_by_relation_[*ri];
}

void KnowledgeGraph::require_word_concept_relation() const {
  if (!rw_) {
    throw InputError("knowledge graph has no #rw=<relation> directive; word-level pairs need one");
  }
}

std::span<const std::uint32_t> KnowledgeGraph::word_indices_of(std::uint32_t node) const {
  auto it = words_by_node_.find(node);
  if (it == words_by_node_.end()) return {};
  return it->second;
}

std::vector<NodeId> KnowledgeGraph::words_of(const NodeId& n) const {
  if (!is_conceptual(n.kind)) {
    throw InputError("words_of expects a concept or instance, got word '" + n.str() + "'");
  }
  require_word_concept_relation();
  std::vector<NodeId> out;
  if (auto idx = index_of(n)) {
    for (std::uint32_t w : word_indices_of(*idx)) out.push_back(nodes_[w]);
  }
  return out;
}

RelationStats KnowledgeGraph::relation_stats(std::string_view relation, bool unary) const {
  auto ri = relation_index(relation);
  if (!ri) throw InputError("unknown relation '" + std::string(relation) + "'");
  const auto& pairs = pairs_by_relation_[*ri];

  RelationStats st;
  st.relation = relations_[*ri].name;
  st.group = relations_[*ri].group;

  std::set<std::uint32_t> subjects, objects, vocab;
  std::set<IndexPair> wc, ww;
  for (auto [s, o] : pairs) {
    subjects.insert(s);
    objects.insert(o);
    vocab.insert(s);
    vocab.insert(o);
    bool sc = is_conceptual(nodes_[s].kind);
    bool oc = is_conceptual(nodes_[o].kind);
    if (sc && oc) {
      ++st.concept_pairs;
      for (std::uint32_t ws : word_indices_of(s)) {
        wc.emplace(ws, o);
        for (std::uint32_t wo : word_indices_of(o)) ww.emplace(ws, wo);
      }
    } else if (!sc && oc) {
      wc.emplace(s, o);
    } else if (!sc && !oc) {
      ww.emplace(s, o);
    }
  }
  st.word_concept_pairs = wc.size();
  st.word_pairs = ww.size();
  st.distinct_subjects = subjects.size();
  st.distinct_objects = objects.size();
  st.vocab_total = vocab.size();
  if (!unary && !subjects.empty()) {
    st.object_subject_ratio = static_cast<double>(objects.size()) / static_cast<double>(subjects.size());
  }
  return st;
}

void write_kg_summary(std::ostream& out, const std::vector<RelationStats>& stats) {
  csv::write_row(out, {"relation", "group", "concept_pairs", "word_concept_pairs", "word_pairs",
                       "obj_subj_ratio", "vocab_total"});
  for (const auto& s : stats) {
    std::string ratio = "n/a";
    if (s.object_subject_ratio) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.3f", *s.object_subject_ratio);
      ratio = buf;
    }
    csv::write_row(out, {s.relation, s.group, std::to_string(s.concept_pairs),
                         std::to_string(s.word_concept_pairs), std::to_string(s.word_pairs), ratio,
                         std::to_string(s.vocab_total)});
  }
}

}  // namespace relprobe
