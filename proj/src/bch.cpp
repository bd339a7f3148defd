#include "fec/bch.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <string>

namespace fec {

std::uint32_t primitive_poly_for(unsigned m) {
  switch (m) {
    case 3: return 0b1011;
    case 4: return 0b10011;
    case 5: return 0b100101;
    case 6: return 0b1000011;
    case 7: return 0b10001001;
    default: throw UnsupportedCode("no primitive polynomial configured for m=" + std::to_string(m));
  }
}

Gf2mField::Gf2mField(unsigned m) : Gf2mField(m, primitive_poly_for(m)) {}

Gf2mField::Gf2mField(unsigned m, std::uint32_t primitive_poly)
    : m_(m), prim_(primitive_poly), order_((1u << m) - 1), exp_(order_), log_(order_ + 1, 0) {
  std::uint32_t x = 1;
  for (std::uint32_t i = 0; i < order_; ++i) {
    if (i > 0 && x == 1) throw std::invalid_argument("polynomial is not primitive");
    exp_[i] = x;
    log_[x] = i;
    x <<= 1;
    if (x >> m) x ^= prim_;
  }
  if (x != 1) throw std::invalid_argument("polynomial is not primitive");
}

std::uint32_t Gf2mField::log(std::uint32_t x) const {
  if (x == 0 || x > order_) throw std::domain_error("log of zero or out-of-field element");
  return log_[x];
}

std::uint32_t Gf2mField::mul(std::uint32_t a, std::uint32_t b) const {
  if (a == 0 || b == 0) return 0;
  return exp_[(log_[a] + log_[b]) % order_];
}

std::size_t poly_degree(const BinaryPoly& p) {
  for (std::size_t i = p.size(); i-- > 0;)
    if (p[i]) return i;
  return 0;
}

namespace {

BinaryPoly trimmed(BinaryPoly p) {
  while (p.size() > 1 && !p.back()) p.pop_back();
  if (p.empty()) p.push_back(0);
  return p;
}

bool is_zero_poly(const BinaryPoly& p) {
  return std::none_of(p.begin(), p.end(), [](std::uint8_t c) { return c != 0; });
}

}  // namespace

BinaryPoly poly_mul(const BinaryPoly& a, const BinaryPoly& b) {
  BinaryPoly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i])
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
  return trimmed(out);
}

namespace {

std::pair<BinaryPoly, BinaryPoly> poly_divmod(const BinaryPoly& a, const BinaryPoly& b) {
  if (is_zero_poly(b)) throw std::domain_error("polynomial division by zero");
  const std::size_t db = poly_degree(b);
  BinaryPoly r = a;
  BinaryPoly q(a.size() > db ? a.size() - db : 1, 0);
  for (std::size_t i = r.size(); i-- > db;) {
    if (!r[i]) continue;
    q[i - db] = 1;
    for (std::size_t j = 0; j <= db; ++j) r[i - db + j] ^= b[j];
  }
  return {trimmed(q), trimmed(r)};
}

}  // namespace

BinaryPoly poly_mod(const BinaryPoly& a, const BinaryPoly& b) { return poly_divmod(a, b).second; }
BinaryPoly poly_div(const BinaryPoly& a, const BinaryPoly& b) { return poly_divmod(a, b).first; }

BinaryPoly minimal_polynomial(const Gf2mField& field, std::uint32_t e) {
  // Product of (x - alpha^j) over the cyclotomic coset of e, computed with
  // coefficients in GF(2^m); the result lies in GF(2)[x].
  std::set<std::uint32_t> coset;
  std::uint32_t j = e % field.order();
  while (coset.insert(j).second) j = (j * 2) % field.order();

  std::vector<std::uint32_t> poly{1};
  for (std::uint32_t r : coset) {
    const std::uint32_t root = field.alpha_pow(r);
    std::vector<std::uint32_t> next(poly.size() + 1, 0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] ^= poly[i];
      next[i] ^= field.mul(poly[i], root);
    }
    poly = std::move(next);
  }
  BinaryPoly out(poly.size());
  for (std::size_t i = 0; i < poly.size(); ++i) {
    if (poly[i] > 1) throw std::logic_error("minimal polynomial has non-binary coefficient");
    out[i] = static_cast<std::uint8_t>(poly[i]);
  }
  return out;
}

namespace {

unsigned extension_degree(std::size_t n) {
  for (unsigned m = 3; m <= 7; ++m)
    if (n == (std::size_t{1} << m) - 1) return m;
  throw UnsupportedCode("unsupported BCH length " + std::to_string(n) + " (expected 2^m-1, m in 3..7)");
}

/// Generator polynomial for designed distance 2t+1.
BinaryPoly generator_for(const Gf2mField& field, std::size_t t) {
  std::set<std::uint32_t> covered;
  BinaryPoly g{1};
  for (std::uint32_t i = 1; i <= 2 * t; ++i) {
    const std::uint32_t e = i % field.order();
    if (covered.count(e)) continue;
    std::uint32_t j = e;
    do {
      covered.insert(j);
      j = (j * 2) % field.order();
    } while (j != e);
    g = poly_mul(g, minimal_polynomial(field, e));
  }
  return g;
}

BitMatrix systematic_generator(const BinaryPoly& g, std::size_t n, std::size_t k) {
  BitMatrix shifts(k, n);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g[i]) shifts.set(r, r + i, true);
  // Any k consecutive positions of a cyclic code form an information set, so
  // the reduced echelon form is [I_k | P].
  BitMatrix G = row_echelon(shifts);
  for (std::size_t r = 0; r < k; ++r)
    if (!G.get(r, r)) throw std::logic_error("generator is not systematic on the leading positions");
  return G;
}

BitMatrix parity_polynomial_matrix(const BinaryPoly& g, std::size_t n, std::size_t k) {
  BinaryPoly xn1(n + 1, 0);
  xn1[0] = xn1[n] = 1;
  const BinaryPoly h = poly_div(xn1, g);
  if (h.size() != k + 1) throw std::logic_error("parity polynomial has unexpected degree");
  BitMatrix H(n - k, n);
  for (std::size_t r = 0; r < n - k; ++r)
    for (std::size_t i = 0; i <= k; ++i)
      if (h[k - i]) H.set(r, r + i, true);
  return H;
}

BitMatrix systematic_parity_matrix(const BitMatrix& G) {
  const std::size_t k = G.rows();
  const std::size_t n = G.cols();
  BitMatrix H(n - k, n);
  for (std::size_t r = 0; r < n - k; ++r) {
    for (std::size_t c = 0; c < k; ++c)
      if (G.get(c, k + r)) H.set(r, c, true);
    H.set(r, k + r, true);
  }
  return H;
}

}  // namespace

std::optional<std::size_t> bch_designed_t(std::size_t n, std::size_t k) {
  const unsigned m = extension_degree(n);
  const Gf2mField field(m);
  std::size_t prev_deg = 0;
  for (std::size_t t = 1; 2 * t + 1 <= n; ++t) {
    const std::size_t deg = poly_degree(generator_for(field, t));
    if (deg >= n) break;
    if (deg == prev_deg) continue;  // t and t-1 give the same code; keep the smaller t
    prev_deg = deg;
    if (n - deg == k) return t;
    if (n - deg < k) break;
  }
  return std::nullopt;
}

Code build_code(std::size_t n, std::size_t k, StdMatrixForm form) {
  const auto t = bch_designed_t(n, k);
  if (!t) throw UnsupportedCode("(" + std::to_string(n) + "," + std::to_string(k) + ") is not a supported narrow-sense BCH pair");
  const Gf2mField field(extension_degree(n));

  Code code;
  code.n = n;
  code.k = k;
  code.t = *t;
  code.gen_poly = generator_for(field, *t);
  code.G = systematic_generator(code.gen_poly, n, k);
  code.H_std = form == StdMatrixForm::kParityPolynomial ? parity_polynomial_matrix(code.gen_poly, n, k)
                                                        : systematic_parity_matrix(code.G);
  return code;
}

void override_std_matrix(Code& code, BitMatrix h) {
  if (h.cols() != code.n)
    throw std::invalid_argument("parity-check override has " + std::to_string(h.cols()) + " columns, expected " +
                                std::to_string(code.n));
  if (rank(h) != code.n - code.k)
    throw std::invalid_argument("parity-check override has rank " + std::to_string(rank(h)) + ", expected " +
                                std::to_string(code.n - code.k));
  if (!code.G.multiply(h.transpose()).is_zero())
    throw std::invalid_argument("parity-check override does not annihilate the code");
  code.H_std = std::move(h);
}

Bits encode(const Code& code, const Bits& message) {
  if (message.size() != code.k)
    throw std::invalid_argument("message length " + std::to_string(message.size()) + ", expected " +
                                std::to_string(code.k));
  std::vector<BitMatrix::Word> acc(code.G.words_per_row(), 0);
  for (std::size_t i = 0; i < code.k; ++i) {
    if (!message[i]) continue;
    const auto r = code.G.row(i);
    for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= r[w];
  }
  Bits out(code.n);
  for (std::size_t c = 0; c < code.n; ++c) out[c] = (acc[c / 64] >> (c % 64)) & 1u;
  return out;
}

namespace {

std::vector<BitMatrix::Word> pack(const Bits& word, std::size_t words) {
  std::vector<BitMatrix::Word> p(words, 0);
  for (std::size_t c = 0; c < word.size(); ++c)
    if (word[c]) p[c / 64] |= BitMatrix::Word{1} << (c % 64);
  return p;
}

bool row_parity(std::span<const BitMatrix::Word> row, const std::vector<BitMatrix::Word>& word) {
  unsigned acc = 0;
  for (std::size_t w = 0; w < row.size(); ++w) acc += static_cast<unsigned>(std::popcount(row[w] & word[w]));
  return acc & 1u;
}

}  // namespace

Syndrome syndrome(const BitMatrix& h, const Bits& word) {
  if (word.size() != h.cols())
    throw std::invalid_argument("syndrome: word length " + std::to_string(word.size()) + ", matrix has " +
                                std::to_string(h.cols()) + " columns");
  const auto packed = pack(word, h.words_per_row());
  Syndrome s;
  s.bits.resize(h.rows());
  for (std::size_t r = 0; r < h.rows(); ++r) {
    s.bits[r] = row_parity(h.row(r), packed) ? 1 : 0;
    if (s.bits[r]) s.is_zero = false;
  }
  return s;
}

bool is_codeword(const BitMatrix& h, const Bits& word) {
  if (word.size() != h.cols()) throw std::invalid_argument("is_codeword: length mismatch");
  const auto packed = pack(word, h.words_per_row());
  for (std::size_t r = 0; r < h.rows(); ++r)
    if (row_parity(h.row(r), packed)) return false;
  return true;
}

}  // namespace fec
