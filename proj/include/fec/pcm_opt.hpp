#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fec/bch.hpp"
#include "fec/bitmat.hpp"

namespace fec {

/// Parameters of the parity-check matrix optimizer.
struct OptimizerConfig {
  /// Row count H_r2 is padded to. 0 means 2(n-k).
  std::size_t target_rows = 0;
  /// Row count of the final matrix. Unset: prune while rank and column
  /// balance allow. When larger than the padded size, padding extends to it.
  std::optional<std::size_t> final_rows;
  std::size_t sa_iterations = 20000;
  double sa_initial_temp = 1.0;
  double sa_cooling = 0.995;
  double weight_cycles = 1.0;
  double weight_colvar = 1.0;
  /// Penalty on (mean - min) column weight; lifts the lightest columns.
  double weight_colfloor = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
  /// Defaults with the row counts reported for the three length-63 codes
  /// (183, 41 and 33 rows for k = 36, 39, 45) when `code` is one of them.
  static OptimizerConfig for_code(const Code& code);
};

enum class RowOrigin { kOriginal, kSum, kShiftedSum };

/// Distinct candidate parity checks; no two are equal or cyclic shifts of
/// each other.
struct CandidatePool {
  std::size_t n = 0;
  BitMatrix rows;
  std::vector<std::size_t> weights;
  std::vector<RowOrigin> origins;

  std::size_t size() const { return rows.rows(); }
  std::size_t min_weight() const;
};

/// Cyclic right shift by q positions of a packed row of length n.
std::vector<BitMatrix::Word> rotate_row(std::span<const BitMatrix::Word> row, std::size_t n, std::size_t q);

/// Lexicographically smallest rotation, used to identify cyclic orbits.
std::vector<BitMatrix::Word> canonical_rotation(std::span<const BitMatrix::Word> row, std::size_t n);

/// Binary-sum density reduction over the rows of an echelon matrix: for each
/// row keep every minimum-weight sum with another row (or the row itself when
/// no sum is lighter), then drop duplicates and cyclic shifts.
CandidatePool reduce_density(const BitMatrix& h_r);

/// The same sweep with every partner row replaced by all of its cyclic shifts.
CandidatePool shift_sweep(const CandidatePool& pool);

/// Rows of the pool duplicated sequentially until `target_rows` rows exist.
BitMatrix pad_rows(const CandidatePool& pool, std::size_t target_rows);

/// shift_sweep followed by pad_rows.
BitMatrix expand_shifts(const CandidatePool& pool, std::size_t target_rows);

/// Every distinct cyclic shift of the pool rows of weight at most w*, where
/// w* is the smallest weight whose shifts span a space of dimension `rank`.
/// Throws if no weight class reaches it.
BitMatrix candidate_rows(const CandidatePool& pool, std::size_t rank);

struct AnnealObjective {
  std::uint64_t four_cycles = 0;
  double colvar = 0.0;
  double colfloor = 0.0;
  double value = 0.0;
};

AnnealObjective objective(const BitMatrix& h, const OptimizerConfig& cfg);

struct AnnealResult {
  BitMatrix h;
  AnnealObjective initial;
  AnnealObjective final;
  std::size_t accepted_moves = 0;
};

/// Simulated annealing over redundant parity checks drawn from the cyclic
/// shifts of the pool. Rows of `h_r2` that are duplicated or outside the
/// admissible weight class are first refilled greedily from the candidates,
/// raising the rank until it reaches `rank_target`. Moves that lower the
/// rank are rejected. The result keeps rank `rank_target`.
AnnealResult anneal(const BitMatrix& h_r2, const OptimizerConfig& cfg, const CandidatePool& pool,
                    std::size_t rank_target);

/// Removes rows one at a time, always the one whose removal leaves the lowest
/// objective, as long as the rank stays at `rank_target`. With `final_rows`
/// set, stops at that count; otherwise stops once the column-weight standard
/// deviation would grow.
BitMatrix prune_rows(const BitMatrix& h, const OptimizerConfig& cfg, std::size_t rank_target,
                     std::optional<std::size_t> final_rows);

struct DerivationReport {
  CandidatePool reduced;
  CandidatePool swept;
  BitMatrix h_r2;
  MatrixStats before;
  MatrixStats after;
};

/// Full pipeline: echelon form, density reduction, shift sweep with padding,
/// annealing, pruning and a final anneal at the pruned size. Stores the
/// result in code.H_opt and returns it.
BitMatrix derive(Code& code, const OptimizerConfig& cfg, DerivationReport* report = nullptr);

}  // namespace fec
