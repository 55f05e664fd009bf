#include "relprobe/node.hpp"

#include "relprobe/error.hpp"

namespace relprobe {

std::string_view kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Concept: return "concept";
    case NodeKind::Instance: return "instance";
    case NodeKind::Word: return "word";
  }
  return "?";
}

NodeKind parse_kind_name(std::string_view name) {
  if (name == "concept") return NodeKind::Concept;
  if (name == "instance") return NodeKind::Instance;
  if (name == "word") return NodeKind::Word;
  throw InputError("unknown node kind '" + std::string(name) + "'");
}

bool valid_node_name(std::string_view name) {
  if (name.empty()) return false;
  for (unsigned char c : name) {
    if (c < 0x20 || c == 0x7f) return false;
  }
  return true;
}

NodeId NodeId::parse(std::string_view text) {
  if (text.size() < 2 || text[1] != ':') {
    throw InputError("node id '" + std::string(text) + "' lacks a c:/i:/w: prefix");
  }
  NodeKind kind;
  switch (text[0]) {
    case 'c': kind = NodeKind::Concept; break;
    case 'i': kind = NodeKind::Instance; break;
    case 'w': kind = NodeKind::Word; break;
    default:
      throw InputError("node id '" + std::string(text) + "' has unknown prefix '" +
                       std::string(text.substr(0, 2)) + "'");
  }
  std::string_view name = text.substr(2);
  if (!valid_node_name(name)) {
    throw InputError("node id '" + std::string(text) + "' has an empty or invalid name");
  }
  return NodeId{kind, std::string(name)};
}

std::string NodeId::str() const {
  static constexpr char kPrefix[] = {'c', 'i', 'w'};
  std::string out;
  out.reserve(name.size() + 2);
  out += kPrefix[static_cast<int>(kind)];
  out += ':';
  out += name;
  return out;
}

}  // namespace relprobe
