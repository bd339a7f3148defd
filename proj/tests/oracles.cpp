#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace oracle {

std::uint64_t four_cycles(const Dense& h) {
  std::uint64_t count = 0;
  const std::size_t r = h.size(), c = r ? h[0].size() : 0;
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = a + 1; b < r; ++b)
      for (std::size_t x = 0; x < c; ++x)
        for (std::size_t y = x + 1; y < c; ++y)
          if (h[a][x] && h[a][y] && h[b][x] && h[b][y]) ++count;
  return count;
}

std::size_t rank(Dense m) {
  std::size_t rk = 0;
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  for (std::size_t c = 0; c < cols && rk < rows; ++c) {
    std::size_t p = rk;
    while (p < rows && !m[p][c]) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[rk]);
    for (std::size_t r = 0; r < rows; ++r)
      if (r != rk && m[r][c])
        for (std::size_t j = 0; j < cols; ++j) m[r][j] ^= m[rk][j];
    ++rk;
  }
  return rk;
}

std::vector<int> poly_mod(std::vector<int> a, const std::vector<int>& b) {
  std::size_t db = b.size();
  while (db > 0 && !b[db - 1]) --db;
  if (db == 0) throw std::domain_error("division by zero polynomial");
  --db;
  for (std::size_t i = a.size(); i-- > db;)
    if (a[i])
      for (std::size_t j = 0; j <= db; ++j) a[i - db + j] ^= b[j];
  a.resize(db);
  return a;
}

std::vector<int> encode_by_division(const std::vector<int>& gen, std::size_t n, const std::vector<int>& msg) {
  const std::size_t k = msg.size(), r = n - k;
  std::vector<int> g_rev(gen.rbegin(), gen.rend());  // reciprocal polynomial
  // Reversed word: positions r..n-1 carry the message in reverse order.
  std::vector<int> shifted(n, 0);
  for (std::size_t i = 0; i < k; ++i) shifted[r + i] = msg[k - 1 - i];
  const std::vector<int> rem = poly_mod(shifted, g_rev);
  std::vector<int> rev = shifted;
  for (std::size_t i = 0; i < rem.size(); ++i) rev[i] ^= rem[i];
  return std::vector<int>(rev.rbegin(), rev.rend());
}

ScalarMinSum::ScalarMinSum(const Dense& h, double alpha) : h_(h), alpha_(alpha) {
  for (std::size_t j = 0; j < h.size(); ++j)
    for (std::size_t i = 0; i < h[j].size(); ++i)
      if (h[j][i]) c2v_[{j, i}] = 0.0;
}

std::vector<double> ScalarMinSum::iterate(const std::vector<double>& prior) {
  std::map<std::pair<std::size_t, std::size_t>, double> v2c;
  for (const auto& [key, unused] : c2v_) {
    const auto [j, i] = key;
    double s = prior[i];
    for (std::size_t p = 0; p < h_.size(); ++p)
      if (p != j && h_[p][i]) s += c2v_[{p, i}];
    v2c[key] = s;
  }
  for (auto& [key, msg] : c2v_) {
    const auto [j, i] = key;
    double sign = 1.0, mag = std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t q = 0; q < h_[j].size(); ++q) {
      if (q == i || !h_[j][q]) continue;
      const double x = v2c[{j, q}];
      if (x < 0) sign = -sign;
      mag = std::min(mag, std::abs(x));
      any = true;
    }
    msg = any ? alpha_ * sign * mag : 0.0;
  }
  std::vector<double> post = prior;
  for (const auto& [key, msg] : c2v_) post[key.second] += msg;
  return post;
}

std::vector<int> ml_decode(const Dense& gen, const std::vector<double>& y) {
  const std::size_t k = gen.size(), n = gen[0].size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_cw;
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) {
    std::vector<int> cw(n, 0);
    for (std::size_t r = 0; r < k; ++r)
      if ((m >> r) & 1u)
        for (std::size_t c = 0; c < n; ++c) cw[c] ^= gen[r][c];
    double d = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double s = cw[c] ? -1.0 : 1.0;
      d += (y[c] - s) * (y[c] - s);
    }
    if (d < best) {
      best = d;
      best_cw = cw;
    }
  }
  return best_cw;
}

Dense random_matrix(std::size_t rows, std::size_t cols, double density, std::mt19937_64& rng) {
  std::bernoulli_distribution bit(density);
  Dense m(rows, std::vector<int>(cols, 0));
  for (auto& row : m)
    for (auto& v : row) v = bit(rng) ? 1 : 0;
  return m;
}

}  // namespace oracle
