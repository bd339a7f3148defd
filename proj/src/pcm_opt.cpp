#include "fec/pcm_opt.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "fec/rng.hpp"

namespace fec {

using Word = BitMatrix::Word;
using PackedRow = std::vector<Word>;

void OptimizerConfig::validate() const {
  if (!(sa_cooling > 0.0 && sa_cooling < 1.0)) throw std::invalid_argument("sa_cooling must lie strictly inside (0,1)");
  if (weight_cycles < 0.0 || weight_colvar < 0.0 || weight_colfloor < 0.0)
    throw std::invalid_argument("objective weights must be nonnegative");
  if (weight_cycles == 0.0 && weight_colvar == 0.0) throw std::invalid_argument("cycle and variance weights are both zero");
  if (!(sa_initial_temp > 0.0)) throw std::invalid_argument("sa_initial_temp must be positive");
}

OptimizerConfig OptimizerConfig::for_code(const Code& code) {
  OptimizerConfig cfg;
  if (code.n == 63) {
    if (code.k == 36) cfg.final_rows = 183;
    if (code.k == 39) cfg.final_rows = 41;
    if (code.k == 45) cfg.final_rows = 33;
  }
  return cfg;
}

std::size_t CandidatePool::min_weight() const {
  return weights.empty() ? 0 : *std::min_element(weights.begin(), weights.end());
}

namespace {

std::size_t popcount(std::span<const Word> a) {
  std::size_t w = 0;
  for (Word x : a) w += static_cast<std::size_t>(std::popcount(x));
  return w;
}

std::size_t overlap(std::span<const Word> a, std::span<const Word> b) {
  std::size_t w = 0;
  for (std::size_t i = 0; i < a.size(); ++i) w += static_cast<std::size_t>(std::popcount(a[i] & b[i]));
  return w;
}

PackedRow xor_rows(std::span<const Word> a, std::span<const Word> b) {
  PackedRow out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

std::uint64_t pairs(std::size_t lambda) {
  return static_cast<std::uint64_t>(lambda) * (lambda > 0 ? lambda - 1 : 0) / 2;
}

/// Incremental GF(2) row space with pivot-indexed reduced rows.
class Gf2Basis {
 public:
  explicit Gf2Basis(std::size_t n) : n_(n) {}

  /// Reduces `row` against the basis; returns the residue.
  PackedRow reduce(std::span<const Word> row) const {
    PackedRow r(row.begin(), row.end());
    for (const auto& [pivot, b] : rows_)
      if ((r[pivot / 64] >> (pivot % 64)) & 1u)
        for (std::size_t i = 0; i < r.size(); ++i) r[i] ^= b[i];
    return r;
  }
  bool independent(std::span<const Word> row) const { return popcount(reduce(row)) != 0; }
  bool insert(std::span<const Word> row) {
    PackedRow r = reduce(row);
    for (std::size_t c = 0; c < n_; ++c) {
      if ((r[c / 64] >> (c % 64)) & 1u) {
        rows_.emplace(c, std::move(r));
        return true;
      }
    }
    return false;
  }
  std::size_t rank() const { return rows_.size(); }

 private:
  std::size_t n_;
  std::map<std::size_t, PackedRow> rows_;
};

std::size_t rank_of(const std::vector<PackedRow>& rows, std::size_t n, std::size_t skip = static_cast<std::size_t>(-1)) {
  Gf2Basis b(n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (i != skip) b.insert(rows[i]);
  return b.rank();
}

BitMatrix to_matrix(const std::vector<PackedRow>& rows, std::size_t n) {
  BitMatrix m(0, n);
  for (const auto& r : rows) m.append_row(r);
  return m;
}

std::vector<PackedRow> to_rows(const BitMatrix& m) {
  std::vector<PackedRow> rows;
  rows.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) rows.emplace_back(m.row(r).begin(), m.row(r).end());
  return rows;
}

/// Collects sweep results, dropping duplicates and cyclic shifts.
class PoolBuilder {
 public:
  explicit PoolBuilder(std::size_t n) {
    pool_.n = n;
    pool_.rows = BitMatrix(0, n);
  }
  void add(const PackedRow& row, RowOrigin origin) {
    if (!seen_.insert(canonical_rotation(row, pool_.n)).second) return;
    pool_.rows.append_row(row);
    pool_.weights.push_back(popcount(row));
    pool_.origins.push_back(origin);
  }
  CandidatePool take() { return std::move(pool_); }

 private:
  CandidatePool pool_;
  std::set<PackedRow> seen_;
};

/// One density-reduction sweep; `shifts` selects whether partner rows are
/// taken at every cyclic shift.
CandidatePool sweep(const std::vector<PackedRow>& rows, std::size_t n, bool shifts, RowOrigin sum_origin,
                    const std::vector<RowOrigin>* carried) {
  PoolBuilder out(n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::size_t best = popcount(rows[i]);
    std::vector<PackedRow> kept{rows[i]};
    bool original = true;
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (j == i) continue;
      const std::size_t nshift = shifts ? n : 1;
      for (std::size_t q = 0; q < nshift; ++q) {
        PackedRow t = xor_rows(rows[i], shifts ? rotate_row(rows[j], n, q) : rows[j]);
        const std::size_t w = popcount(t);
        if (w == 0) continue;
        if (w < best) {
          best = w;
          kept.clear();
          original = false;
        }
        if (w == best) kept.push_back(std::move(t));
      }
    }
    for (std::size_t s = 0; s < kept.size(); ++s) {
      const RowOrigin origin = (original && s == 0) ? (carried ? (*carried)[i] : RowOrigin::kOriginal) : sum_origin;
      out.add(kept[s], origin);
    }
  }
  return out.take();
}

struct Objective {
  const OptimizerConfig& cfg;
  std::size_t n;

  AnnealObjective evaluate(std::uint64_t cycles, const std::vector<long>& colw) const {
    double sum = 0.0;
    long lo = std::numeric_limits<long>::max();
    for (long w : colw) {
      sum += static_cast<double>(w);
      lo = std::min(lo, w);
    }
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (long w : colw) var += (static_cast<double>(w) - mean) * (static_cast<double>(w) - mean);
    var /= static_cast<double>(n);
    AnnealObjective o;
    o.four_cycles = cycles;
    o.colvar = var;
    o.colfloor = mean - static_cast<double>(lo);
    o.value = cfg.weight_cycles * static_cast<double>(cycles) + cfg.weight_colvar * var + cfg.weight_colfloor * o.colfloor;
    return o;
  }
};

/// Mutable annealing state with incremental overlap bookkeeping.
class AnnealState {
 public:
  AnnealState(std::vector<PackedRow> rows, std::size_t n) : rows_(std::move(rows)), n_(n), colw_(n, 0) {
    const std::size_t m = rows_.size();
    lambda_.assign(m * m, 0);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const std::size_t l = overlap(rows_[a], rows_[b]);
        lambda_[a * m + b] = lambda_[b * m + a] = l;
        cycles_ += pairs(l);
      }
    for (const auto& r : rows_) add_cols(colw_, r, +1);
  }

  std::size_t size() const { return rows_.size(); }
  const PackedRow& row(std::size_t i) const { return rows_[i]; }
  const std::vector<PackedRow>& rows() const { return rows_; }
  std::uint64_t cycles() const { return cycles_; }
  const std::vector<long>& colw() const { return colw_; }

  /// Overlaps of a proposed row with all rows except slot p; returns false if
  /// the proposal duplicates another row.
  bool propose(std::size_t p, const PackedRow& cand, std::vector<std::size_t>& ov, std::uint64_t& new_cycles,
               std::vector<long>& new_colw) const {
    const std::size_t m = rows_.size();
    const std::size_t wc = popcount(cand);
    ov.assign(m, 0);
    std::int64_t delta = 0;
    for (std::size_t q = 0; q < m; ++q) {
      if (q == p) continue;
      ov[q] = overlap(cand, rows_[q]);
      if (ov[q] == wc && popcount(rows_[q]) == wc) return false;
      delta += static_cast<std::int64_t>(pairs(ov[q])) - static_cast<std::int64_t>(pairs(lambda_[p * m + q]));
    }
    new_cycles = static_cast<std::uint64_t>(static_cast<std::int64_t>(cycles_) + delta);
    new_colw = colw_;
    add_cols(new_colw, rows_[p], -1);
    add_cols(new_colw, cand, +1);
    return true;
  }

  void commit(std::size_t p, PackedRow cand, const std::vector<std::size_t>& ov, std::uint64_t new_cycles,
              std::vector<long> new_colw) {
    const std::size_t m = rows_.size();
    for (std::size_t q = 0; q < m; ++q)
      if (q != p) lambda_[p * m + q] = lambda_[q * m + p] = ov[q];
    rows_[p] = std::move(cand);
    cycles_ = new_cycles;
    colw_ = std::move(new_colw);
  }

  std::size_t rank_with(std::size_t p, const PackedRow& cand) const {
    Gf2Basis b(n_);
    for (std::size_t i = 0; i < rows_.size(); ++i) b.insert(i == p ? cand : rows_[i]);
    return b.rank();
  }

 private:
  void add_cols(std::vector<long>& cw, const PackedRow& r, long sign) const {
    for (std::size_t c = 0; c < n_; ++c)
      if ((r[c / 64] >> (c % 64)) & 1u) cw[c] += sign;
  }

  std::vector<PackedRow> rows_;
  std::size_t n_;
  std::vector<std::size_t> lambda_;
  std::uint64_t cycles_ = 0;
  std::vector<long> colw_;
};

}  // namespace

std::vector<Word> rotate_row(std::span<const Word> row, std::size_t n, std::size_t q) {
  q %= n;
  std::vector<Word> out(row.size(), 0);
  if (n <= 64) {
    const Word mask = n == 64 ? ~Word{0} : ((Word{1} << n) - 1);
    const Word x = row[0] & mask;
    out[0] = q == 0 ? x : (((x << q) | (x >> (n - q))) & mask);
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    if ((row[i / 64] >> (i % 64)) & 1u) {
      const std::size_t j = (i + q) % n;
      out[j / 64] |= Word{1} << (j % 64);
    }
  return out;
}

std::vector<Word> canonical_rotation(std::span<const Word> row, std::size_t n) {
  std::vector<Word> best(row.begin(), row.end());
  for (std::size_t q = 1; q < n; ++q) {
    auto r = rotate_row(row, n, q);
    if (std::lexicographical_compare(r.rbegin(), r.rend(), best.rbegin(), best.rend())) best = std::move(r);
  }
  return best;
}

CandidatePool reduce_density(const BitMatrix& h_r) {
  return sweep(to_rows(h_r), h_r.cols(), false, RowOrigin::kSum, nullptr);
}

CandidatePool shift_sweep(const CandidatePool& pool) {
  return sweep(to_rows(pool.rows), pool.n, true, RowOrigin::kShiftedSum, &pool.origins);
}

BitMatrix pad_rows(const CandidatePool& pool, std::size_t target_rows) {
  if (pool.size() == 0) throw std::invalid_argument("cannot pad an empty pool");
  BitMatrix out = pool.rows;
  for (std::size_t i = 0; out.rows() < target_rows; ++i) out.append_row(pool.rows.row(i % pool.size()));
  return out;
}

BitMatrix expand_shifts(const CandidatePool& pool, std::size_t target_rows) {
  return pad_rows(shift_sweep(pool), target_rows);
}

BitMatrix candidate_rows(const CandidatePool& pool, std::size_t rank_target) {
  std::set<std::size_t> classes(pool.weights.begin(), pool.weights.end());
  for (std::size_t w : classes) {
    std::set<PackedRow> rows;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool.weights[i] > w) continue;
      for (std::size_t q = 0; q < pool.n; ++q) rows.insert(rotate_row(pool.rows.row(i), pool.n, q));
    }
    std::vector<PackedRow> list(rows.begin(), rows.end());
    if (rank_of(list, pool.n) >= rank_target) return to_matrix(list, pool.n);
  }
  throw std::runtime_error("candidate pool cannot reach rank " + std::to_string(rank_target));
}

AnnealObjective objective(const BitMatrix& h, const OptimizerConfig& cfg) {
  const auto cw = h.col_weights();
  std::vector<long> colw(cw.begin(), cw.end());
  return Objective{cfg, h.cols()}.evaluate(count_4cycles(h), colw);
}

AnnealResult anneal(const BitMatrix& h_r2, const OptimizerConfig& cfg, const CandidatePool& pool,
                    std::size_t rank_target) {
  cfg.validate();
  const std::size_t n = h_r2.cols();
  if (pool.n != n) throw std::invalid_argument("pool length does not match matrix");
  if (h_r2.rows() < rank_target) throw std::invalid_argument("matrix has fewer rows than the target rank");

  const BitMatrix cand_m = candidate_rows(pool, rank_target);
  const std::vector<PackedRow> cands = to_rows(cand_m);
  const std::set<PackedRow> admissible(cands.begin(), cands.end());
  Rng rng = make_rng(derive_seed(cfg.seed, "anneal"));
  const Objective obj{cfg, n};

  AnnealResult result;
  result.initial = objective(h_r2, cfg);

  // Keep admissible, distinct rows; refill the rest.
  std::vector<PackedRow> rows = to_rows(h_r2);
  std::vector<bool> free_slot(rows.size(), false);
  {
    std::set<PackedRow> seen;
    for (std::size_t i = 0; i < rows.size(); ++i)
      free_slot[i] = !admissible.count(rows[i]) || !seen.insert(rows[i]).second;
  }
  Gf2Basis basis(n);
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!free_slot[i]) basis.insert(rows[i]);
  std::set<PackedRow> present;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (!free_slot[i]) present.insert(rows[i]);

  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uniform_int_distribution<std::size_t> pick_cand(0, cands.size() - 1);
  for (std::size_t slot = 0; slot < rows.size(); ++slot) {
    if (!free_slot[slot]) continue;
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t chosen = cands.size();
    if (basis.rank() < rank_target) {
      for (std::size_t c : order)
        if (!present.count(cands[c]) && basis.independent(cands[c])) {
          chosen = c;
          break;
        }
    }
    if (chosen == cands.size()) {
      // Lowest added overlap among a random sample.
      std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
      const std::size_t samples = std::min<std::size_t>(64, cands.size());
      for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t c = order[s];
        if (present.count(cands[c])) continue;
        std::uint64_t added = 0;
        for (std::size_t i = 0; i < rows.size(); ++i)
          if (!free_slot[i] || present.count(rows[i])) added += pairs(overlap(cands[c], rows[i]));
        if (added < best) {
          best = added;
          chosen = c;
        }
      }
      if (chosen == cands.size()) chosen = pick_cand(rng);
    }
    rows[slot] = cands[chosen];
    present.insert(rows[slot]);
    basis.insert(rows[slot]);
    free_slot[slot] = false;
  }

  AnnealState state(std::move(rows), n);
  std::size_t cur_rank = rank_of(state.rows(), n);
  AnnealObjective cur = obj.evaluate(state.cycles(), state.colw());
  AnnealObjective best = cur;
  std::vector<PackedRow> best_rows = state.rows();
  bool have_best = cur_rank >= rank_target;

  std::uniform_int_distribution<std::size_t> pick_slot(0, state.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_shift(1, n - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> ov;
  std::vector<long> new_colw;
  double temp = cfg.sa_initial_temp;

  for (std::size_t it = 0; it < cfg.sa_iterations; ++it, temp *= cfg.sa_cooling) {
    const std::size_t p = pick_slot(rng);
    PackedRow cand = unit(rng) < 0.5 ? cands[pick_cand(rng)] : rotate_row(state.row(p), n, pick_shift(rng));
    const double u = unit(rng);
    std::uint64_t new_cycles = 0;
    if (!state.propose(p, cand, ov, new_cycles, new_colw)) continue;
    const AnnealObjective next = obj.evaluate(new_cycles, new_colw);

    bool accept = false;
    std::size_t next_rank = cur_rank;
    if (cur_rank < rank_target) {
      next_rank = state.rank_with(p, cand);
      if (next_rank > cur_rank) accept = true;
      else if (next_rank == cur_rank) accept = next.value <= cur.value || u < std::exp((cur.value - next.value) / temp);
    } else {
      accept = next.value <= cur.value || u < std::exp((cur.value - next.value) / temp);
      if (accept) {
        next_rank = state.rank_with(p, cand);
        accept = next_rank >= cur_rank;
      }
    }
    if (!accept) continue;

    state.commit(p, std::move(cand), ov, new_cycles, std::move(new_colw));
    cur_rank = next_rank;
    cur = next;
    ++result.accepted_moves;
    if (cur_rank >= rank_target && (!have_best || cur.value < best.value)) {
      best = cur;
      best_rows = state.rows();
      have_best = true;
    }
  }
  if (!have_best) throw std::runtime_error("annealing did not reach rank " + std::to_string(rank_target));

  result.h = to_matrix(best_rows, n);
  result.final = best;
  return result;
}

BitMatrix prune_rows(const BitMatrix& h, const OptimizerConfig& cfg, std::size_t rank_target,
                     std::optional<std::size_t> final_rows) {
  std::vector<PackedRow> rows = to_rows(h);
  const std::size_t n = h.cols();
  while (rows.size() > rank_target && (!final_rows || rows.size() > *final_rows)) {
    const double std_before = mean_std(to_matrix(rows, n).col_weights()).second;
    std::size_t best = rows.size();
    double best_value = std::numeric_limits<double>::infinity();
    double best_std = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rank_of(rows, n, r) < rank_target) continue;
      std::vector<PackedRow> trial = rows;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(r));
      const BitMatrix m = to_matrix(trial, n);
      const double v = objective(m, cfg).value;
      if (v < best_value) {
        best_value = v;
        best = r;
        best_std = mean_std(m.col_weights()).second;
      }
    }
    if (best == rows.size()) break;
    if (!final_rows && best_std > std_before) break;
    rows.erase(rows.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return to_matrix(rows, n);
}

BitMatrix derive(Code& code, const OptimizerConfig& cfg, DerivationReport* report) {
  cfg.validate();
  const std::size_t redundancy = code.n - code.k;
  const BitMatrix h_r = row_echelon(code.H_std);
  if (h_r.rows() != redundancy) throw std::runtime_error("standard parity-check matrix is rank deficient");

  CandidatePool reduced = reduce_density(h_r);
  CandidatePool swept = shift_sweep(reduced);
  std::size_t target = cfg.target_rows ? cfg.target_rows : 2 * redundancy;
  if (cfg.final_rows && *cfg.final_rows > target) target = *cfg.final_rows;
  BitMatrix h_r2 = pad_rows(swept, target);

  AnnealResult first = anneal(h_r2, cfg, swept, redundancy);
  BitMatrix h_s = prune_rows(first.h, cfg, redundancy, cfg.final_rows);
  if (h_s.rows() < first.h.rows()) {
    OptimizerConfig polish = cfg;
    polish.seed = derive_seed(cfg.seed, "polish");
    h_s = anneal(h_s, polish, swept, redundancy).h;
  }
  if (rank(h_s) != redundancy) throw std::runtime_error("optimized matrix lost rank");

  if (report) {
    report->before = stats(code.H_std);
    report->after = stats(h_s);
    report->reduced = std::move(reduced);
    report->swept = std::move(swept);
    report->h_r2 = std::move(h_r2);
  }
  code.H_opt = h_s;
  return h_s;
}

}  // namespace fec
