#include "relprobe/pair_type.hpp"

#include <string>

#include "relprobe/error.hpp"

namespace relprobe {

std::string_view pair_type_name(PairType t) {
  switch (t) {
    case PairType::ConceptConcept: return "concept_concept";
    case PairType::WordConcept: return "word_concept";
    case PairType::WordWord: return "word_word";
    case PairType::Unary: return "unary";
  }
  return "?";
}

std::string_view pair_type_code(PairType t) {
  switch (t) {
    case PairType::ConceptConcept: return "c";
    case PairType::WordConcept: return "wc";
    case PairType::WordWord: return "w";
    case PairType::Unary: return "u";
  }
  return "?";
}

PairType parse_pair_type(std::string_view text) {
  for (PairType t : kAllPairTypes) {
    if (text == pair_type_name(t) || text == pair_type_code(t)) return t;
  }
  throw InputError("unknown pair type '" + std::string(text) + "'");
}

}  // namespace relprobe
