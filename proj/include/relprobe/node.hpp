#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace relprobe {

enum class NodeKind : std::uint8_t { Concept = 0, Instance = 1, Word = 2 };

inline constexpr std::size_t kNodeKindCount = 3;

std::string_view kind_name(NodeKind kind);
// "concept" / "instance" / "word"; throws InputError otherwise.
NodeKind parse_kind_name(std::string_view name);

// Concepts and instances are handled identically when building datasets.
inline bool is_conceptual(NodeKind kind) { return kind != NodeKind::Word; }

// A node of the knowledge graph, serialized as `c:name`, `i:name` or `w:name`.
struct NodeId {
  NodeKind kind = NodeKind::Word;
  std::string name;

  static NodeId concept_node(std::string n) { return {NodeKind::Concept, std::move(n)}; }
  static NodeId instance_node(std::string n) { return {NodeKind::Instance, std::move(n)}; }
  static NodeId word_node(std::string n) { return {NodeKind::Word, std::move(n)}; }

  // Throws InputError on an unknown prefix or an invalid name.
  static NodeId parse(std::string_view text);

  std::string str() const;

  auto operator<=>(const NodeId&) const = default;
  bool operator==(const NodeId&) const = default;
};

// Non-empty and free of tab/newline/control characters.
bool valid_node_name(std::string_view name);

struct NodeIdHash {
  std::size_t operator()(const NodeId& n) const noexcept {
    return std::hash<std::string>{}(n.name) * 3 + static_cast<std::size_t>(n.kind);
  }
};

}  // namespace relprobe
