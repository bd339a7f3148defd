#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "fec/bch.hpp"
#include "fec/rng.hpp"

namespace fec {

/// Bijection on {0..n-1}. Applying it moves the entry at index i to
/// position forward(i): apply(x)[forward(i)] = x[i].
class Permutation {
 public:
  Permutation() = default;
  /// Throws std::invalid_argument if `forward` is not a bijection.
  explicit Permutation(std::vector<std::size_t> forward);

  static Permutation identity(std::size_t n);

  std::size_t size() const { return fwd_.size(); }
  std::size_t operator()(std::size_t i) const { return fwd_[i]; }
  std::size_t inverse_at(std::size_t j) const { return inv_[j]; }
  const std::vector<std::size_t>& forward() const { return fwd_; }
  const std::vector<std::size_t>& inverse_map() const { return inv_; }

  Permutation inverse() const;
  /// (this * first)(i) = this(first(i)): apply `first`, then this.
  Permutation after(const Permutation& first) const;

  template <typename T>
  std::vector<T> apply(std::span<const T> x) const {
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[fwd_[i]] = x[i];
    return out;
  }
  template <typename T>
  std::vector<T> apply(const std::vector<T>& x) const {
    return apply(std::span<const T>(x));
  }
  /// inverse().apply(x) without building the inverse.
  template <typename T>
  std::vector<T> unapply(std::span<const T> x) const {
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[fwd_[i]];
    return out;
  }
  template <typename T>
  std::vector<T> unapply(const std::vector<T>& x) const {
    return unapply(std::span<const T>(x));
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.fwd_ == b.fwd_; }

 private:
  std::vector<std::size_t> fwd_;
  std::vector<std::size_t> inv_;
};

/// i -> (i + shift) mod n.
Permutation cyclic(std::size_t n, std::size_t shift);
/// i -> 2i mod n. Requires odd n.
Permutation frobenius(std::size_t n);
/// Output is (x0, x2, x4, ..., x1, x3, ...); ceil(n/2) even-index entries first.
Permutation interleave(std::size_t n);

struct PermBlockConfig {
  std::size_t n = 63;
  /// Shift step d_p.
  std::size_t step = 21;
  /// Shift multipliers S_p.
  std::vector<std::size_t> multipliers{0, 1, 2};
  /// When set, the random offset d_o is fixed to this value.
  std::optional<std::size_t> fixed_offset;
  /// Ablation switch: every block entry becomes the identity.
  bool identity_only = false;

  /// Defaults for length n: step = n / 3, multipliers {0,1,2}.
  static PermBlockConfig for_length(std::size_t n);
  void validate() const;
  std::size_t block_size() const { return 3 * multipliers.size(); }
};

/// One permutation block: for a single random offset d_o and each s in S_p,
/// the cyclic shift c_s by (s*d_p + d_o) mod n followed by
/// {c_s, frobenius * c_s, interleave * c_s}.
std::vector<Permutation> sample_block(const PermBlockConfig& cfg, Rng& rng);

/// The offset draw used by sample_block (consumes one RNG value unless the
/// offset is fixed).
std::size_t draw_block_offset(const PermBlockConfig& cfg, Rng& rng);
/// The deterministic block for a given offset d_o.
std::vector<Permutation> block_for_offset(const PermBlockConfig& cfg, std::size_t offset);

/// True iff every permuted generator row is a codeword of H_std.
bool is_automorphism(const Code& code, const Permutation& p);

/// Uniform element of the group generated by cyclic shifts and the
/// Frobenius map: frobenius^a * cyclic(b).
Permutation random_automorphism(std::size_t n, Rng& rng);

}  // namespace fec
