#include "fec/osd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace fec {

MrbContext build_mrb(const Code& code, std::span<const double> reliabilities) {
  if (reliabilities.size() != code.n) throw std::invalid_argument("reliability length does not match code");
  for (double r : reliabilities)
    if (!std::isfinite(r)) throw std::invalid_argument("reliabilities must be finite");

  MrbContext ctx;
  ctx.order.resize(code.n);
  std::iota(ctx.order.begin(), ctx.order.end(), 0);
  std::stable_sort(ctx.order.begin(), ctx.order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(reliabilities[a]) > std::abs(reliabilities[b]);
  });

  BitMatrix g = code.G;
  std::size_t pivots = 0;
  for (std::size_t pos : ctx.order) {
    if (pivots == code.k) break;
    std::size_t p = pivots;
    while (p < code.k && !g.get(p, pos)) ++p;
    if (p == code.k) {
      ctx.skipped.push_back(pos);
      continue;
    }
    g.swap_rows(p, pivots);
    for (std::size_t r = 0; r < code.k; ++r)
      if (r != pivots && g.get(r, pos)) g.xor_row(r, pivots);
    ctx.basis.push_back(pos);
    ++pivots;
  }
  if (pivots != code.k) throw std::logic_error("generator matrix is rank deficient");
  ctx.gen = std::move(g);
  return ctx;
}

double squared_distance(std::span<const double> received, const Bits& codeword) {
  double d = 0.0;
  for (std::size_t i = 0; i < received.size(); ++i) {
    const double s = codeword[i] ? -1.0 : 1.0;
    d += (received[i] - s) * (received[i] - s);
  }
  return d;
}

std::size_t osd_candidate_count(std::size_t k, std::size_t p) {
  std::size_t total = 0;
  std::size_t binom = 1;
  for (std::size_t w = 0; w <= std::min(p, k); ++w) {
    total += binom;
    binom = binom * (k - w) / (w + 1);
  }
  return total;
}

namespace {

using Word = BitMatrix::Word;

struct Scorer {
  std::span<const double> received;
  std::size_t n;
  std::size_t words;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Word> best_word;
  std::size_t count = 0;

  void consider(const std::vector<Word>& cw) {
    ++count;
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = ((cw[i / 64] >> (i % 64)) & 1u) ? -1.0 : 1.0;
      d += (received[i] - s) * (received[i] - s);
    }
    if (d < best) {
      best = d;
      best_word = cw;
    }
  }
};

void xor_into(std::vector<Word>& acc, std::span<const Word> row) {
  for (std::size_t w = 0; w < acc.size(); ++w) acc[w] ^= row[w];
}

/// Enumerates flip sets of size `remaining` over rows [start, k).
void enumerate(const BitMatrix& gen, std::vector<Word>& cw, std::size_t start, std::size_t remaining, Scorer& sc) {
  for (std::size_t r = start; r < gen.rows(); ++r) {
    xor_into(cw, gen.row(r));
    if (remaining == 1)
      sc.consider(cw);
    else
      enumerate(gen, cw, r + 1, remaining - 1, sc);
    xor_into(cw, gen.row(r));
  }
}

}  // namespace

OsdResult osd_decode(std::span<const double> received, std::span<const double> reliabilities, const MrbContext& mrb,
                     std::size_t order) {
  const std::size_t n = mrb.gen.cols();
  if (received.size() != n || reliabilities.size() != n) throw std::invalid_argument("OSD input length mismatch");

  std::vector<Word> cw(mrb.gen.words_per_row(), 0);
  for (std::size_t r = 0; r < mrb.basis.size(); ++r)
    if (reliabilities[mrb.basis[r]] < 0) xor_into(cw, mrb.gen.row(r));

  Scorer sc{received, n, cw.size(), std::numeric_limits<double>::infinity(), {}, 0};
  sc.consider(cw);
  for (std::size_t w = 1; w <= std::min(order, mrb.basis.size()); ++w) enumerate(mrb.gen, cw, 0, w, sc);

  OsdResult res;
  res.codeword.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.codeword[i] = (sc.best_word[i / 64] >> (i % 64)) & 1u;
  res.distance = sc.best;
  res.candidates = sc.count;
  return res;
}

OsdResult osd_decode(std::span<const double> received, std::span<const double> reliabilities, const Code& code,
                     const OsdConfig& cfg) {
  return osd_decode(received, reliabilities, build_mrb(code, reliabilities), cfg.order);
}

MrbErrorCdf mrb_error_histogram(const Code& code, std::span<const MrbSample> samples) {
  MrbErrorCdf out;
  out.samples = samples.size();
  if (samples.empty()) return out;
  std::vector<std::size_t> pre_hist(code.k + 1, 0);
  std::vector<std::size_t> post_hist(code.k + 1, 0);
  for (const auto& s : samples) {
    const MrbContext mrb = build_mrb(code, s.reliabilities);
    auto wrong = [&](std::size_t pos) { return (s.reliabilities[pos] < 0 ? 1 : 0) != s.truth[pos]; };
    std::size_t pre = 0;
    for (std::size_t i = 0; i < code.k; ++i) pre += wrong(mrb.order[i]) ? 1 : 0;
    std::size_t post = 0;
    for (std::size_t pos : mrb.basis) post += wrong(pos) ? 1 : 0;
    ++pre_hist[pre];
    ++post_hist[post];
  }
  auto cumulative = [&](const std::vector<std::size_t>& h) {
    std::vector<double> c(h.size());
    std::size_t acc = 0;
    for (std::size_t d = 0; d < h.size(); ++d) {
      acc += h[d];
      c[d] = static_cast<double>(acc) / static_cast<double>(samples.size());
    }
    return c;
  };
  out.pre = cumulative(pre_hist);
  out.post = cumulative(post_hist);
  return out;
}

}  // namespace fec
