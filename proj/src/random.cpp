#include "nearstable/random.hpp"

#include <cmath>

namespace nearstable {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

double RandomStream::exponential() { return -std::log(uniform_open()); }

std::uint64_t RandomStream::index(std::uint64_t n) {
  // Rejection keeps the index exactly uniform.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

std::uint64_t SeedTree::derive(std::string_view label, std::uint64_t index) const {
  std::uint64_t h = mix64(root_);
  h = mix64(h ^ fnv1a(label));
  h = mix64(h ^ mix64(index ^ 0x6a09e667f3bcc909ULL));
  return h;
}

}  // namespace nearstable
