#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace relprobe {

// What a dataset relates. Unary datasets pair each subject with one fixed
// class node and are probed on the subject embedding alone.
enum class PairType : std::uint8_t { ConceptConcept = 0, WordConcept = 1, WordWord = 2, Unary = 3 };

inline constexpr std::array<PairType, 4> kAllPairTypes = {
    PairType::ConceptConcept, PairType::WordConcept, PairType::WordWord, PairType::Unary};

// Long name used in config and manifest: concept_concept, word_concept, word_word, unary.
std::string_view pair_type_name(PairType t);
// Short suffix used in dataset names and report rows: c, wc, w, u.
std::string_view pair_type_code(PairType t);
// Accepts either the long name or the short code.
PairType parse_pair_type(std::string_view text);

}  // namespace relprobe
