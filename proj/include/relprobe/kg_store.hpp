#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "relprobe/node.hpp"

namespace relprobe {

// relation name -> free-form group label ("Hypernymy", "Meronymy", ...)
using GroupMap = std::map<std::string, std::string, std::less<>>;

struct RelationType {
  std::string name;
  std::string group;

  bool operator==(const RelationType&) const = default;
};

// Indices into KnowledgeGraph::nodes() / relations().
struct Triple {
  std::uint32_t relation;
  std::uint32_t subject;
  std::uint32_t object;

  auto operator<=>(const Triple&) const = default;
};

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

// Per-relation counts in the layout of a KG overview table.
struct RelationStats {
  std::string relation;
  std::string group;
  std::size_t concept_pairs = 0;
  std::size_t word_concept_pairs = 0;
  std::size_t word_pairs = 0;
  std::size_t distinct_subjects = 0;
  std::size_t distinct_objects = 0;
  // |distinct objects| / |distinct subjects|; absent for unary relations.
  std::optional<double> object_subject_ratio;
  std::size_t vocab_total = 0;
};

struct RawTriple {
  std::string relation;
  NodeId subject;
  NodeId object;
};

// Immutable knowledge graph. Nodes, relations and triples are kept sorted so
// indices do not depend on the order of the input file.
//
// File format (UTF-8 TSV):
//   #rw=<relation>              names the word-to-concept relation
//   # anything else             comment
//   relation<TAB>subject<TAB>object   with c:/i:/w: prefixed node ids
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  static KnowledgeGraph load(const std::string& path, const GroupMap& groups = {});
  static KnowledgeGraph parse(std::istream& in, const std::string& source,
                              const GroupMap& groups = {});
  static KnowledgeGraph from_triples(const std::vector<RawTriple>& triples,
                                     std::optional<std::string> word_concept_relation,
                                     const GroupMap& groups = {});

  void write(std::ostream& out) const;

  const std::vector<NodeId>& nodes() const { return nodes_; }
  const NodeId& node(std::uint32_t index) const { return nodes_[index]; }
  std::optional<std::uint32_t> index_of(const NodeId& n) const;

  const std::vector<RelationType>& relations() const { return relations_; }
  std::optional<std::uint32_t> relation_index(std::string_view name) const;
  bool has_relation(std::string_view name) const { return relation_index(name).has_value(); }

  const std::vector<Triple>& triples() const { return triples_; }
  // (subject, object) pairs of one relation, sorted. Throws on unknown relation.
  std::span<const IndexPair> pairs_of(std::string_view relation) const;

  const std::optional<std::string>& word_concept_relation() const { return rw_; }
  // Throws InputError when the graph has no #rw directive.
  void require_word_concept_relation() const;

  // Word nodes linked to a concept/instance by the word-to-concept relation.
  std::vector<NodeId> words_of(const NodeId& n) const;
  std::span<const std::uint32_t> word_indices_of(std::uint32_t node) const;

  RelationStats relation_stats(std::string_view relation, bool unary = false) const;

  bool operator==(const KnowledgeGraph& other) const {
    return nodes_ == other.nodes_ && relations_ == other.relations_ &&
           triples_ == other.triples_ && rw_ == other.rw_;
  }

 private:
  // lines[i] is the source line of raw[i], used in validation errors.
  static KnowledgeGraph build(const std::vector<RawTriple>& raw, const std::vector<std::size_t>& lines,
                              std::optional<std::string> rw, const GroupMap& groups,
                              const std::string& source);

  std::vector<NodeId> nodes_;
  std::unordered_map<NodeId, std::uint32_t, NodeIdHash> node_index_;
  std::vector<RelationType> relations_;
  std::vector<Triple> triples_;
  std::vector<std::vector<IndexPair>> pairs_by_relation_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> words_by_node_;
  std::optional<std::string> rw_;
};

// One CSV row per relation: relation, group, concept_pairs, word_concept_pairs,
// word_pairs, obj_subj_ratio, vocab_total.
void write_kg_summary(std::ostream& out, const std::vector<RelationStats>& stats);

}  // namespace relprobe
