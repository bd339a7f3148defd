#include <gtest/gtest.h>

#include <random>

#include "fec/bch.hpp"
#include "oracles.hpp"

namespace {

// Shift-and-add multiply in GF(2^m); independent of the library tables.
unsigned gf_mul(unsigned a, unsigned b, unsigned m, unsigned prim) {
  unsigned r = 0;
  while (b) {
    if (b & 1u) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a >> m) a ^= prim;
  }
  return r;
}

unsigned gf_pow(unsigned a, unsigned e, unsigned m, unsigned prim) {
  unsigned r = 1;
  while (e--) r = gf_mul(r, a, m, prim);
  return r;
}

unsigned poly_eval(const fec::BinaryPoly& p, unsigned x, unsigned m, unsigned prim) {
  unsigned acc = 0;
  for (std::size_t i = p.size(); i-- > 0;) acc = gf_mul(acc, x, m, prim) ^ p[i];
  return acc;
}

std::vector<int> to_int(const fec::Bits& b) { return std::vector<int>(b.begin(), b.end()); }

fec::Bits random_word(std::size_t len, std::mt19937_64& rng) {
  fec::Bits b(len);
  for (auto& v : b) v = rng() & 1u;
  return b;
}

struct Params {
  std::size_t n, k, t;
  unsigned m;
};

const Params kCodes[] = {{7, 4, 1, 3}, {15, 7, 2, 4}, {15, 11, 1, 4}, {31, 21, 2, 5},
                         {63, 36, 5, 6}, {63, 39, 4, 6}, {63, 45, 3, 6}};

}  // namespace

TEST(Field, LogAntilogRoundTrip) {
  for (unsigned m = 3; m <= 7; ++m) {
    const fec::Gf2mField f(m);
    EXPECT_EQ(f.alpha_pow(f.order()), 1u);
    for (std::uint32_t x = 1; x <= f.order(); ++x) EXPECT_EQ(f.alpha_pow(f.log(x)), x);
  }
}

TEST(Field, MultiplyMatchesShiftAdd) {
  const fec::Gf2mField f(6);
  EXPECT_EQ(f.primitive_poly(), 0x43u);
  for (unsigned a = 0; a < 64; ++a)
    for (unsigned b = 0; b < 64; ++b) EXPECT_EQ(f.mul(a, b), gf_mul(a, b, 6, 0x43));
}

TEST(BuildCode, Hamming7GeneratorPolynomial) {
  const auto code = fec::build_code(7, 4);
  EXPECT_EQ(code.t, 1u);
  EXPECT_EQ(code.gen_poly, (fec::BinaryPoly{1, 1, 0, 1}));
}

TEST(BuildCode, GeneratorHasDesignedRootsAndDividesXnPlus1) {
  for (const auto& p : kCodes) {
    const auto code = fec::build_code(p.n, p.k);
    EXPECT_EQ(code.t, p.t);
    ASSERT_EQ(fec::poly_degree(code.gen_poly), p.n - p.k);
    const unsigned prim = fec::primitive_poly_for(p.m);
    for (unsigned i = 1; i <= 2 * p.t; ++i)
      EXPECT_EQ(poly_eval(code.gen_poly, gf_pow(2, i, p.m, prim), p.m, prim), 0u) << p.n << "," << p.k << " root " << i;
    std::vector<int> xn1(p.n + 1, 0);
    xn1[0] = xn1[p.n] = 1;
    const auto rem = oracle::poly_mod(xn1, std::vector<int>(code.gen_poly.begin(), code.gen_poly.end()));
    for (int v : rem) EXPECT_EQ(v, 0);
  }
}

TEST(BuildCode, StandardMatrixShapeAndRank) {
  for (const auto& p : kCodes) {
    for (auto form : {fec::StdMatrixForm::kParityPolynomial, fec::StdMatrixForm::kSystematic}) {
      const auto code = fec::build_code(p.n, p.k, form);
      EXPECT_EQ(code.G.rows(), p.k);
      EXPECT_EQ(code.G.cols(), p.n);
      EXPECT_EQ(code.H_std.cols(), p.n);
      EXPECT_EQ(fec::rank(code.H_std), p.n - p.k);
      EXPECT_TRUE(code.G.multiply(code.H_std.transpose()).is_zero());
    }
  }
}

TEST(BuildCode, StandardMatrixStatisticsOf63_45) {
  const auto code = fec::build_code(63, 45);
  EXPECT_EQ(code.H_std.rows(), 18u);
  const auto s = fec::stats(code.H_std);
  EXPECT_EQ(s.rank, 18u);
  EXPECT_EQ(s.four_cycles, 7251u);
  EXPECT_EQ(s.row_weight_min, 24u);
  EXPECT_EQ(s.row_weight_max, 24u);
}

TEST(BuildCode, StandardMatrixRowWeights) {
  EXPECT_EQ(fec::stats(fec::build_code(63, 36).H_std).row_weight_max, 18u);
  const auto s39 = fec::stats(fec::build_code(63, 39).H_std);
  EXPECT_EQ(s39.row_weight_min, 28u);
  EXPECT_EQ(s39.row_weight_max, 28u);
}

TEST(BuildCode, UnsupportedPairs) {
  EXPECT_THROW(fec::build_code(63, 62), fec::UnsupportedCode);
  EXPECT_THROW(fec::build_code(63, 40), fec::UnsupportedCode);
  EXPECT_THROW(fec::build_code(64, 45), fec::UnsupportedCode);
  EXPECT_THROW(fec::build_code(511, 493), fec::UnsupportedCode);
}

TEST(BuildCode, MinimumDistanceOf15_7) {
  const auto code = fec::build_code(15, 7);
  std::size_t dmin = 15;
  for (unsigned m = 1; m < (1u << 7); ++m) {
    fec::Bits msg(7);
    for (unsigned i = 0; i < 7; ++i) msg[i] = (m >> i) & 1u;
    const auto cw = fec::encode(code, msg);
    std::size_t w = 0;
    for (auto b : cw) w += b;
    dmin = std::min(dmin, w);
  }
  EXPECT_GE(dmin, 2 * code.t + 1);
}

TEST(OverrideStdMatrix, AcceptsEquivalentAndRejectsWrong) {
  auto code = fec::build_code(15, 7);
  const auto sys = fec::build_code(15, 7, fec::StdMatrixForm::kSystematic).H_std;
  fec::override_std_matrix(code, sys);
  EXPECT_EQ(code.H_std, sys);
  EXPECT_THROW(fec::override_std_matrix(code, fec::BitMatrix(8, 14)), std::invalid_argument);
  auto wrong = sys;
  wrong.flip(0, 0);
  EXPECT_THROW(fec::override_std_matrix(code, wrong), std::invalid_argument);
  EXPECT_THROW(fec::override_std_matrix(code, sys.select_rows(std::vector<std::size_t>{0, 1, 2})),
               std::invalid_argument);
}

TEST(Encode, AllZeroMessage) {
  const auto code = fec::build_code(63, 45);
  const auto cw = fec::encode(code, fec::Bits(45, 0));
  EXPECT_EQ(cw, fec::Bits(63, 0));
}

TEST(Encode, Hamming7UnitMessage) {
  const auto code = fec::build_code(7, 4);
  const fec::Bits msg{1, 0, 0, 0};
  const auto cw = fec::encode(code, msg);
  EXPECT_TRUE(fec::syndrome(code.H_std, cw).is_zero);
  EXPECT_EQ(fec::Bits(cw.begin(), cw.begin() + 4), msg);
  EXPECT_EQ(to_int(cw), oracle::encode_by_division({1, 1, 0, 1}, 7, {1, 0, 0, 0}));
}

TEST(Encode, MatchesDivisionEncoder) {
  std::mt19937_64 rng(21);
  for (const auto& p : kCodes) {
    const auto code = fec::build_code(p.n, p.k);
    const std::vector<int> g(code.gen_poly.begin(), code.gen_poly.end());
    for (int trial = 0; trial < 50; ++trial) {
      const auto msg = random_word(p.k, rng);
      const auto cw = fec::encode(code, msg);
      EXPECT_EQ(to_int(cw), oracle::encode_by_division(g, p.n, to_int(msg)));
      EXPECT_EQ(fec::Bits(cw.begin(), cw.begin() + static_cast<long>(p.k)), msg);
    }
  }
}

TEST(Encode, CodewordsAreCyclic) {
  std::mt19937_64 rng(22);
  for (const auto& p : kCodes) {
    const auto code = fec::build_code(p.n, p.k);
    for (int trial = 0; trial < 200; ++trial) {
      const auto cw = fec::encode(code, random_word(p.k, rng));
      fec::Bits shifted(p.n);
      for (std::size_t i = 0; i < p.n; ++i) shifted[(i + 1) % p.n] = cw[i];
      EXPECT_TRUE(fec::is_codeword(code.H_std, shifted));
    }
  }
}

TEST(Encode, LengthMismatch) {
  const auto code = fec::build_code(15, 7);
  EXPECT_THROW(fec::encode(code, fec::Bits(8)), std::invalid_argument);
}

TEST(Syndrome, SingleFlipGivesColumn) {
  const auto code = fec::build_code(63, 45);
  std::mt19937_64 rng(23);
  const auto cw = fec::encode(code, random_word(45, rng));
  EXPECT_TRUE(fec::syndrome(code.H_std, cw).is_zero);
  for (std::size_t j = 0; j < 63; ++j) {
    auto w = cw;
    w[j] ^= 1u;
    const auto s = fec::syndrome(code.H_std, w);
    EXPECT_FALSE(s.is_zero);
    ASSERT_EQ(s.bits.size(), code.H_std.rows());
    for (std::size_t r = 0; r < code.H_std.rows(); ++r) EXPECT_EQ(s.bits[r], code.H_std.get(r, j));
  }
}

TEST(Syndrome, MatchesDotProductOracle) {
  std::mt19937_64 rng(24);
  const auto code = fec::build_code(63, 39);
  for (int trial = 0; trial < 100; ++trial) {
    const auto w = random_word(63, rng);
    const auto s = fec::syndrome(code.H_std, w);
    bool zero = true;
    for (std::size_t r = 0; r < code.H_std.rows(); ++r) {
      int dot = 0;
      for (std::size_t c = 0; c < 63; ++c) dot ^= code.H_std.get(r, c) & w[c];
      EXPECT_EQ(s.bits[r], dot);
      zero = zero && dot == 0;
    }
    EXPECT_EQ(s.is_zero, zero);
    EXPECT_EQ(fec::is_codeword(code.H_std, w), zero);
  }
}

TEST(Syndrome, DimensionMismatch) {
  const auto code = fec::build_code(15, 7);
  EXPECT_THROW(fec::syndrome(code.H_std, fec::Bits(14)), std::invalid_argument);
  EXPECT_THROW(fec::is_codeword(code.H_std, fec::Bits(16)), std::invalid_argument);
}
