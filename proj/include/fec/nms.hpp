#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fec/bch.hpp"
#include "fec/bitmat.hpp"
#include "fec/perms.hpp"
#include "fec/rng.hpp"

namespace fec {

using Llr = std::vector<double>;

/// Edge-indexed view of a parity-check matrix. Edges are numbered check by
/// check, in increasing column order within each check.
class TannerGraph {
 public:
  explicit TannerGraph(const BitMatrix& h);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_checks() const { return check_start_.size() - 1; }
  std::size_t num_edges() const { return edge_var_.size(); }

  /// Edges of check j are [check_begin(j), check_end(j)).
  std::size_t check_begin(std::size_t j) const { return check_start_[j]; }
  std::size_t check_end(std::size_t j) const { return check_start_[j + 1]; }
  std::size_t edge_var(std::size_t e) const { return edge_var_[e]; }
  /// Edge ids incident to variable i.
  std::span<const std::size_t> var_edges(std::size_t i) const {
    return {var_edge_ids_.data() + var_start_[i], var_start_[i + 1] - var_start_[i]};
  }

  const BitMatrix& matrix() const { return h_; }

 private:
  BitMatrix h_;
  std::size_t num_vars_;
  std::vector<std::size_t> check_start_;
  std::vector<std::size_t> edge_var_;
  std::vector<std::size_t> var_start_;
  std::vector<std::size_t> var_edge_ids_;
};

struct NmsConfig {
  double alpha = 0.78;
  std::size_t max_iter = 4;
  /// Saturation applied to accumulated soft values inside the decoders.
  double clip = 30.0;

  void validate() const;
};

/// Check-to-variable messages, one per edge; zero-initialized.
struct MessageState {
  std::vector<double> c2v;

  static MessageState zeros(const TannerGraph& g) { return MessageState{std::vector<double>(g.num_edges(), 0.0)}; }
};

/// One flooding round: variable-to-check messages from `priors` and the
/// previous check-to-variable state, then sign-product / alpha-scaled
/// min-magnitude check updates, then a-posteriori LLRs. `state` is updated
/// in place and the posteriors are returned.
Llr nms_iterate(const TannerGraph& g, std::span<const double> priors, MessageState& state, double alpha);

/// Hard decision: bit is 1 iff the LLR is negative.
Bits hard_decision(std::span<const double> llr);

struct DecodeOutcome {
  Bits hard_decision;
  bool converged = false;
  std::size_t iterations_used = 0;
  /// trajectory[0] is the received LLR vector, trajectory[t] the soft output
  /// of iteration t.
  std::vector<Llr> trajectory;
  /// Valid syndrome but wrong codeword; only known to a simulator.
  bool undetected_candidate = false;
};

/// Permutation-dilated NMS over the optimized parity-check matrix. Each outer
/// iteration draws a fresh permutation block, runs one flooding round from
/// zero messages on every permuted copy of the working vector, averages the
/// un-permuted posteriors and either stops on a valid syndrome or adds the
/// average back into the working vector.
class RevisedNmsDecoder {
 public:
  RevisedNmsDecoder(const BitMatrix& h, NmsConfig cfg, PermBlockConfig pcfg);

  DecodeOutcome decode(std::span<const double> received, Rng& rng) const;

  const TannerGraph& graph() const { return graph_; }
  const NmsConfig& config() const { return cfg_; }
  const PermBlockConfig& block_config() const { return pcfg_; }

 private:
  TannerGraph graph_;
  NmsConfig cfg_;
  PermBlockConfig pcfg_;
  /// blocks_[d_o] for every offset in [0, step).
  std::vector<std::vector<Permutation>> blocks_;
};

/// Convenience wrapper; requires code.H_opt.
DecodeOutcome revised_nms(std::span<const double> received, const Code& code, const NmsConfig& cfg,
                          const PermBlockConfig& pcfg, Rng& rng);

/// Plain flooding NMS with persistent messages, max_iter rounds, early stop
/// on a valid syndrome.
DecodeOutcome flooding_nms(std::span<const double> received, const TannerGraph& g, const NmsConfig& cfg);

struct MrrdConfig {
  std::size_t inner_iters = 15;  // I1
  std::size_t rounds = 50;       // I2
  std::size_t branches = 1;      // I3

  void validate() const;
};

/// Index of the candidate with minimum squared Euclidean distance between the
/// BPSK image (1 - 2c) of the candidate and `received`. Ties keep the first.
std::size_t closest_candidate(std::span<const double> received, const std::vector<Bits>& candidates);

/// Multiple-branch random redundant decoding over code.H_std with NMS inner
/// decoding and random cyclic/Frobenius automorphisms between rounds.
DecodeOutcome mrrd(std::span<const double> received, const Code& code, const MrrdConfig& cfg, const NmsConfig& inner,
                   Rng& rng);

}  // namespace fec
