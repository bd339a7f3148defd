#include "fec/rng.hpp"

namespace fec {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
  // FNV-1a over the label, then mixed with the parent.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(parent ^ mix64(h));
}

std::uint64_t frame_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) + mix64(index ^ 0x5851f42d4c957f2dULL));
}

}  // namespace fec
