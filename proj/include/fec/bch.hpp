#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fec/bitmat.hpp"

namespace fec {

/// GF(2^m) with log/antilog tables over a fixed primitive polynomial.
class Gf2mField {
 public:
  /// Uses the default primitive polynomial for `m` (see primitive_poly_for).
  explicit Gf2mField(unsigned m);
  Gf2mField(unsigned m, std::uint32_t primitive_poly);

  unsigned m() const { return m_; }
  std::uint32_t primitive_poly() const { return prim_; }
  /// Multiplicative group order 2^m - 1.
  std::uint32_t order() const { return order_; }

  std::uint32_t alpha_pow(std::uint64_t e) const { return exp_[e % order_]; }
  std::uint32_t log(std::uint32_t x) const;
  std::uint32_t mul(std::uint32_t a, std::uint32_t b) const;
  std::uint32_t add(std::uint32_t a, std::uint32_t b) const { return a ^ b; }

 private:
  unsigned m_;
  std::uint32_t prim_;
  std::uint32_t order_;
  std::vector<std::uint32_t> exp_;
  std::vector<std::uint32_t> log_;
};

/// x^3+x+1, x^4+x+1, x^5+x^2+1, x^6+x+1, x^7+x^3+1 for m = 3..7.
std::uint32_t primitive_poly_for(unsigned m);

/// Binary polynomial as coefficient list, index = power of x.
using BinaryPoly = std::vector<std::uint8_t>;

BinaryPoly poly_mul(const BinaryPoly& a, const BinaryPoly& b);
/// Remainder of a modulo b (b must be nonzero).
BinaryPoly poly_mod(const BinaryPoly& a, const BinaryPoly& b);
/// Quotient of a divided by b.
BinaryPoly poly_div(const BinaryPoly& a, const BinaryPoly& b);
std::size_t poly_degree(const BinaryPoly& p);

/// Minimal polynomial over GF(2) of alpha^e.
BinaryPoly minimal_polynomial(const Gf2mField& field, std::uint32_t e);

/// How the standard parity-check matrix is laid out.
enum class StdMatrixForm {
  /// Rows are the n-k consecutive shifts of the reciprocal parity polynomial
  /// h(x) = (x^n + 1) / g(x). This is the layout used by the public channel
  /// code database.
  kParityPolynomial,
  /// [P^T | I] null-space form matching the systematic generator.
  kSystematic,
};

class UnsupportedCode : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Narrow-sense binary BCH code. Bit i of a codeword is the coefficient of x^i.
struct Code {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t t = 0;
  BinaryPoly gen_poly;
  /// k x n systematic generator [I_k | P]: the message occupies positions 0..k-1.
  BitMatrix G;
  BitMatrix H_std;
  std::optional<BitMatrix> H_opt;

  std::size_t redundancy() const { return n - k; }
  double rate() const { return static_cast<double>(k) / static_cast<double>(n); }
};

/// Designed-distance parameter t for a narrow-sense BCH code of length n and
/// dimension k, if one exists.
std::optional<std::size_t> bch_designed_t(std::size_t n, std::size_t k);

/// Narrow-sense BCH code of length n = 2^m - 1 (m in 3..7) and dimension k.
/// Throws UnsupportedCode when no such code exists.
Code build_code(std::size_t n, std::size_t k, StdMatrixForm form = StdMatrixForm::kParityPolynomial);

/// Replaces H_std with an externally supplied matrix after checking that it
/// has n columns, rank n-k and annihilates G.
void override_std_matrix(Code& code, BitMatrix h);

Bits encode(const Code& code, const Bits& message);

struct Syndrome {
  Bits bits;
  bool is_zero = true;
};

Syndrome syndrome(const BitMatrix& h, const Bits& word);

/// Same as syndrome(h, word).is_zero without materializing the syndrome.
bool is_codeword(const BitMatrix& h, const Bits& word);

}  // namespace fec
