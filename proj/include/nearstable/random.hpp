#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nearstable {

/// A single reproducible random stream.
///
/// The engine is std::mt19937_64; the variate transforms are implemented here
/// rather than through <random> distributions so that draws are identical
/// across standard library implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Exp(1).
  double exponential();

  /// Uniform index in [0, n). Requires n >= 1.
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// Deterministic derivation of independent stream seeds from a root seed.
///
/// A stream is keyed by (label, index); the derived seed is a pure function of
/// (root, label, index). Child trees let an experiment hand each replica its
/// own namespace of streams.
class SeedTree {
 public:
  explicit SeedTree(std::uint64_t root = 0) : root_(root) {}

  std::uint64_t root() const { return root_; }

  std::uint64_t derive(std::string_view label, std::uint64_t index = 0) const;

  RandomStream stream(std::string_view label, std::uint64_t index = 0) const {
    return RandomStream(derive(label, index));
  }

  SeedTree child(std::string_view label, std::uint64_t index = 0) const {
    return SeedTree(derive(label, index));
  }

 private:
  std::uint64_t root_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace nearstable
