#include "relprobe/rng.hpp"

namespace relprobe {

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::string_view> key) {
  std::uint64_t h = splitmix64(master);
  for (std::string_view part : key) {
    // Length-prefix each part so ("ab","c") and ("a","bc") differ.
    h = splitmix64(h ^ stable_hash(part) ^ (static_cast<std::uint64_t>(part.size()) << 56));
  }
  return h;
}

}  // namespace relprobe
