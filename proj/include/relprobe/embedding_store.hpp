#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "relprobe/node.hpp"

namespace relprobe {

// Maps embedding-file tokens to nodes: a token starting with `prefix` becomes
// a node of `kind` named by the rest of the token. Tokens matching no rule
// are words named by the whole token.
struct KindRule {
  std::string prefix;
  NodeKind kind;
};
using KindRules = std::vector<KindRule>;

// c: -> concept, i: -> instance, w: -> word
KindRules default_kind_rules();

NodeId token_to_node(std::string_view token, const KindRules& rules);
std::string node_to_token(const NodeId& n, const KindRules& rules);

// Sample standard deviation over every component; 0 for fewer than 2 values.
double compute_component_std(std::span<const float> values);

// An immutable vocabulary -> R^d map stored as one row-major float matrix.
class EmbeddingSpace {
 public:
  EmbeddingSpace(std::string name, std::size_t dim, std::vector<NodeId> vocabulary,
                 std::vector<float> data);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vocabulary_.size(); }
  const std::vector<NodeId>& vocabulary() const { return vocabulary_; }
  std::span<const float> data() const { return data_; }

  bool contains(const NodeId& n) const { return index_.count(n) != 0; }
  std::optional<std::uint32_t> index_of(const NodeId& n) const;
  std::span<const float> row(std::uint32_t index) const {
    return std::span<const float>(data_).subspan(std::size_t{index} * dim_, dim_);
  }
  // Throws InputError naming the node and the space when out of vocabulary.
  std::span<const float> lookup(const NodeId& n) const;

  // Standard deviation of all |V|*d components, computed once at construction.
  double component_std() const { return component_std_; }

 private:
  std::string name_;
  std::size_t dim_;
  std::vector<NodeId> vocabulary_;
  std::unordered_map<NodeId, std::uint32_t, NodeIdHash> index_;
  std::vector<float> data_;
  double component_std_ = 0.0;
};

// word2vec text layout: `<count> <dim>` then `token v1 ... v_dim` per line.
EmbeddingSpace load_embeddings(const std::string& path, const std::string& name,
                               const KindRules& rules = default_kind_rules());
EmbeddingSpace parse_embeddings(std::istream& in, const std::string& source,
                                const std::string& name,
                                const KindRules& rules = default_kind_rules());
void write_embeddings(std::ostream& out, const EmbeddingSpace& space,
                      const KindRules& rules = default_kind_rules());

// Random baseline space: components i.i.d. uniform on [-0.5, 0.5]. The
// vocabulary is sorted first, so the result depends only on its contents.
EmbeddingSpace make_random_space(std::vector<NodeId> vocabulary, std::size_t dim,
                                 std::uint64_t seed, std::string name = "random");

using KindSet = std::set<NodeKind>;

struct CoveredSpace {
  const EmbeddingSpace* space;
  KindSet coverage;
};

// Per node kind, the intersection of the vocabularies of the spaces that
// claim that kind.
struct SeedVocabulary {
  std::array<std::vector<NodeId>, kNodeKindCount> by_kind;  // each sorted
  std::vector<std::string> warnings;

  const std::vector<NodeId>& of(NodeKind kind) const { return by_kind[static_cast<int>(kind)]; }
  bool contains(const NodeId& n) const;
  std::size_t size() const;
  std::vector<NodeId> all() const;
};

SeedVocabulary seed_vocabulary(const std::vector<CoveredSpace>& spaces);

}  // namespace relprobe
