#include "relprobe/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "relprobe/error.hpp"
#include "relprobe/rng.hpp"

namespace relprobe {

KindRules default_kind_rules() {
  return {{"c:", NodeKind::Concept}, {"i:", NodeKind::Instance}, {"w:", NodeKind::Word}};
}

NodeId token_to_node(std::string_view token, const KindRules& rules) {
  for (const auto& rule : rules) {
    if (token.size() > rule.prefix.size() && token.substr(0, rule.prefix.size()) == rule.prefix) {
      return NodeId{rule.kind, std::string(token.substr(rule.prefix.size()))};
    }
  }
  return NodeId::word_node(std::string(token));
}

std::string node_to_token(const NodeId& n, const KindRules& rules) {
  std::string plain = n.name;
  if (n.kind == NodeKind::Word && token_to_node(plain, rules) == n) return plain;
  for (const auto& rule : rules) {
    if (rule.kind == n.kind) return rule.prefix + n.name;
  }
  throw InputError("no token prefix configured for " + std::string(kind_name(n.kind)) + " nodes");
}

double compute_component_std(std::span<const float> values) {
  if (values.size() < 2) return 0.0;
  double mean = 0.0;
  for (float v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (float v : values) {
    double d = v - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

EmbeddingSpace::EmbeddingSpace(std::string name, std::size_t dim, std::vector<NodeId> vocabulary,
                               std::vector<float> data)
    : name_(std::move(name)), dim_(dim), vocabulary_(std::move(vocabulary)), data_(std::move(data)) {
  if (dim_ == 0) throw InputError("embedding space '" + name_ + "' has dimension 0");
  if (data_.size() != vocabulary_.size() * dim_) {
    throw InputError("embedding space '" + name_ + "': matrix size does not match |V| * d");
  }
  index_.reserve(vocabulary_.size());
  for (std::uint32_t i = 0; i < vocabulary_.size(); ++i) {
    if (!index_.emplace(vocabulary_[i], i).second) {
      throw InputError("embedding space '" + name_ + "': duplicate token '" + vocabulary_[i].str() + "'");
    }
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw InputError("embedding space '" + name_ + "' has a non-finite value");
  }
  component_std_ = compute_component_std(data_);
}

std::optional<std::uint32_t> EmbeddingSpace::index_of(const NodeId& n) const {
  auto it = index_.find(n);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingSpace::lookup(const NodeId& n) const {
  auto idx = index_of(n);
  if (!idx) throw InputError("node '" + n.str() + "' is not in the vocabulary of space '" + name_ + "'");
  return row(*idx);
}

namespace {

std::string_view next_field(std::string_view line, std::size_t& pos) {
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  std::size_t start = pos;
  while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
  return line.substr(start, pos - start);
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
  auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc() && res.ptr == field.data() + field.size();
}

}  // namespace

EmbeddingSpace parse_embeddings(std::istream& in, const std::string& source,
                                const std::string& name, const KindRules& rules) {
  std::string line;
  std::size_t lineno = 0;
  std::size_t count = 0, dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t pos = 0;
    auto c = next_field(line, pos);
    auto d = next_field(line, pos);
    if (!parse_number(c, count) || !parse_number(d, dim) || !next_field(line, pos).empty()) {
      throw ParseError(source, lineno, "expected header '<count> <dim>'");
    }
    if (dim == 0) throw ParseError(source, lineno, "dimension must be positive");
    break;
  }
  if (lineno == 0 || dim == 0) throw ParseError(source, 1, "missing header '<count> <dim>'");

  std::vector<NodeId> vocab;
  std::vector<float> data;
  vocab.reserve(count);
  data.reserve(count * dim);
  std::unordered_map<NodeId, std::size_t, NodeIdHash> seen;
  seen.reserve(count);
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t pos = 0;
    auto token = next_field(line, pos);
    NodeId node = token_to_node(token, rules);
    if (!valid_node_name(node.name)) throw ParseError(source, lineno, "invalid token '" + std::string(token) + "'");
    if (auto [it, fresh] = seen.emplace(node, lineno); !fresh) {
      throw ParseError(source, lineno,
                       "duplicate token '" + std::string(token) + "' (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    std::size_t n = 0;
    for (auto field = next_field(line, pos); !field.empty(); field = next_field(line, pos)) {
      float v;
      if (!parse_number(field, v) || !std::isfinite(v)) {
        throw ParseError(source, lineno, "non-finite or malformed value '" + std::string(field) + "'");
      }
      data.push_back(v);
      ++n;
    }
    if (n != dim) {
      throw ParseError(source, lineno,
                       "expected " + std::to_string(dim) + " values, got " + std::to_string(n));
    }
    vocab.push_back(std::move(node));
  }
  if (vocab.size() != count) {
    throw ParseError(source, lineno,
                     "header declares " + std::to_string(count) + " tokens but file has " +
                         std::to_string(vocab.size()));
  }
  return EmbeddingSpace(name, dim, std::move(vocab), std::move(data));
}

EmbeddingSpace load_embeddings(const std::string& path, const std::string& name,
                               const KindRules& rules) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open embedding file '" + path + "'");
  return parse_embeddings(in, path, name, rules);
}

void write_embeddings(std::ostream& out, const EmbeddingSpace& space, const KindRules& rules) {
  out << space.size() << ' ' << space.dim() << '\n';
  char buf[32];
  for (std::uint32_t i = 0; i < space.size(); ++i) {
    out << node_to_token(space.vocabulary()[i], rules);
    for (float v : space.row(i)) {
      auto res = std::to_chars(buf, buf + sizeof(buf), v);
      out << ' ' << std::string_view(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

EmbeddingSpace make_random_space(std::vector<NodeId> vocabulary, std::size_t dim,
                                 std::uint64_t seed, std::string name) {
  if (vocabulary.empty()) throw InputError("random space needs a non-empty vocabulary");
  if (dim == 0) throw InputError("random space needs dimension >= 1");
  std::sort(vocabulary.begin(), vocabulary.end());
  vocabulary.erase(std::unique(vocabulary.begin(), vocabulary.end()), vocabulary.end());
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  std::vector<float> data(vocabulary.size() * dim);
  for (float& v : data) v = static_cast<float>(unif(rng));
  return EmbeddingSpace(std::move(name), dim, std::move(vocabulary), std::move(data));
}

bool SeedVocabulary::contains(const NodeId& n) const {
  const auto& v = of(n.kind);
  return std::binary_search(v.begin(), v.end(), n);
}

std::size_t SeedVocabulary::size() const {
  std::size_t n = 0;
  for (const auto& v : by_kind) n += v.size();
  return n;
}

std::vector<NodeId> SeedVocabulary::all() const {
  std::vector<NodeId> out;
  out.reserve(size());
  for (const auto& v : by_kind) out.insert(out.end(), v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

SeedVocabulary seed_vocabulary(const std::vector<CoveredSpace>& spaces) {
  if (spaces.empty()) throw InputError("seed vocabulary needs at least one embedding space");
  SeedVocabulary seed;
  for (std::size_t k = 0; k < kNodeKindCount; ++k) {
    auto kind = static_cast<NodeKind>(k);
    bool first = true;
    std::vector<NodeId> acc;
    for (const auto& cs : spaces) {
      if (!cs.coverage.count(kind)) continue;
      std::vector<NodeId> members;
      for (const auto& n : cs.space->vocabulary()) {
        if (n.kind == kind) members.push_back(n);
      }
      std::sort(members.begin(), members.end());
      if (first) {
        acc = std::move(members);
        first = false;
      } else {
        std::vector<NodeId> next;
        std::set_intersection(acc.begin(), acc.end(), members.begin(), members.end(),
                              std::back_inserter(next));
        acc = std::move(next);
      }
    }
    if (first) {
      seed.warnings.push_back("no embedding space covers " + std::string(kind_name(kind)) +
                              " nodes; their seed set is empty");
    }
    seed.by_kind[k] = std::move(acc);
  }
  return seed;
}

}  // namespace relprobe
