#include "fec/nms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fec {

TannerGraph::TannerGraph(const BitMatrix& h) : h_(h), num_vars_(h.cols()) {
  check_start_.reserve(h.rows() + 1);
  check_start_.push_back(0);
  std::vector<std::size_t> var_degree(num_vars_, 0);
  for (std::size_t j = 0; j < h.rows(); ++j) {
    for (std::size_t i = 0; i < num_vars_; ++i) {
      if (!h.get(j, i)) continue;
      edge_var_.push_back(i);
      ++var_degree[i];
    }
    check_start_.push_back(edge_var_.size());
  }
  var_start_.assign(num_vars_ + 1, 0);
  for (std::size_t i = 0; i < num_vars_; ++i) var_start_[i + 1] = var_start_[i] + var_degree[i];
  var_edge_ids_.resize(edge_var_.size());
  std::vector<std::size_t> fill(var_start_.begin(), var_start_.end() - 1);
  for (std::size_t e = 0; e < edge_var_.size(); ++e) var_edge_ids_[fill[edge_var_[e]]++] = e;
}

void NmsConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
  if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
}

void MrrdConfig::validate() const {
  if (inner_iters == 0 || rounds == 0 || branches == 0) throw std::invalid_argument("mRRD parameters must be positive");
}

namespace {

/// Check-node update given variable-to-check messages; writes c2v in place.
void check_update(const TannerGraph& g, std::span<const double> v2c, std::span<double> c2v, double alpha) {
  for (std::size_t j = 0; j < g.num_checks(); ++j) {
    const std::size_t b = g.check_begin(j);
    const std::size_t e_end = g.check_end(j);
    if (b == e_end) continue;
    double min1 = std::numeric_limits<double>::infinity();
    double min2 = min1;
    std::size_t arg = b;
    bool negative = false;
    for (std::size_t e = b; e < e_end; ++e) {
      const double m = std::abs(v2c[e]);
      if (v2c[e] < 0) negative = !negative;
      if (m < min1) {
        min2 = min1;
        min1 = m;
        arg = e;
      } else if (m < min2) {
        min2 = m;
      }
    }
    for (std::size_t e = b; e < e_end; ++e) {
      const bool neg = negative != (v2c[e] < 0);
      const double mag = e == arg ? min2 : min1;
      // A degree-1 check carries no extrinsic information.
      c2v[e] = std::isinf(mag) ? 0.0 : alpha * (neg ? -mag : mag);
    }
  }
}

void check_input(const TannerGraph& g, std::span<const double> priors) {
  if (priors.size() != g.num_vars())
    throw std::invalid_argument("LLR length " + std::to_string(priors.size()) + ", graph has " +
                                std::to_string(g.num_vars()) + " variables");
}

double saturate(double x, double clip) { return std::clamp(x, -clip, clip); }

}  // namespace

Llr nms_iterate(const TannerGraph& g, std::span<const double> priors, MessageState& state, double alpha) {
  check_input(g, priors);
  if (state.c2v.size() != g.num_edges()) throw std::invalid_argument("message state does not match graph");

  // Extrinsic sums are formed directly, not as total minus own message, so
  // the result does not depend on cancellation.
  std::vector<double> v2c(g.num_edges());
  for (std::size_t i = 0; i < g.num_vars(); ++i) {
    const auto edges = g.var_edges(i);
    for (std::size_t e : edges) {
      double s = priors[i];
      for (std::size_t o : edges)
        if (o != e) s += state.c2v[o];
      v2c[e] = s;
    }
  }
  check_update(g, v2c, state.c2v, alpha);

  Llr post(priors.begin(), priors.end());
  for (std::size_t e = 0; e < g.num_edges(); ++e) post[g.edge_var(e)] += state.c2v[e];
  return post;
}

Bits hard_decision(std::span<const double> llr) {
  Bits out(llr.size());
  for (std::size_t i = 0; i < llr.size(); ++i) out[i] = llr[i] < 0 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// Revised NMS

RevisedNmsDecoder::RevisedNmsDecoder(const BitMatrix& h, NmsConfig cfg, PermBlockConfig pcfg)
    : graph_(h), cfg_(cfg), pcfg_(std::move(pcfg)) {
  cfg_.validate();
  pcfg_.validate();
  if (pcfg_.n != h.cols()) throw std::invalid_argument("permutation block length does not match matrix");
  if (pcfg_.fixed_offset) {
    blocks_.resize(*pcfg_.fixed_offset + 1);
    blocks_[*pcfg_.fixed_offset] = block_for_offset(pcfg_, *pcfg_.fixed_offset);
  } else {
    for (std::size_t d = 0; d < pcfg_.step; ++d) blocks_.push_back(block_for_offset(pcfg_, d));
  }
}

DecodeOutcome RevisedNmsDecoder::decode(std::span<const double> received, Rng& rng) const {
  check_input(graph_, received);
  const std::size_t n = graph_.num_vars();
  DecodeOutcome out;
  out.trajectory.emplace_back(received.begin(), received.end());

  Llr y(received.begin(), received.end());
  std::vector<double> dilated(n);
  std::vector<double> c2v(graph_.num_edges());
  std::vector<double> v2c(graph_.num_edges());
  Llr avg(n);

  for (std::size_t t = 1; t <= cfg_.max_iter; ++t) {
    const auto& block = blocks_[draw_block_offset(pcfg_, rng)];
    std::fill(avg.begin(), avg.end(), 0.0);
    for (const Permutation& p : block) {
      for (std::size_t i = 0; i < n; ++i) dilated[p(i)] = y[i];
      // Zero incoming messages: every variable-to-check message is the prior.
      for (std::size_t e = 0; e < graph_.num_edges(); ++e) v2c[e] = dilated[graph_.edge_var(e)];
      check_update(graph_, v2c, c2v, cfg_.alpha);
      for (std::size_t e = 0; e < graph_.num_edges(); ++e) dilated[graph_.edge_var(e)] += c2v[e];
      for (std::size_t i = 0; i < n; ++i) avg[i] += dilated[p(i)];
    }
    const double scale = 1.0 / static_cast<double>(block.size());
    for (auto& v : avg) v = saturate(v * scale, cfg_.clip);

    out.trajectory.push_back(avg);
    out.iterations_used = t;
    out.hard_decision = hard_decision(avg);
    if (is_codeword(graph_.matrix(), out.hard_decision)) {
      out.converged = true;
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) y[i] = saturate(y[i] + avg[i], cfg_.clip);
  }
  return out;
}

DecodeOutcome revised_nms(std::span<const double> received, const Code& code, const NmsConfig& cfg,
                          const PermBlockConfig& pcfg, Rng& rng) {
  if (!code.H_opt) throw std::invalid_argument("revised NMS needs an optimized parity-check matrix");
  return RevisedNmsDecoder(*code.H_opt, cfg, pcfg).decode(received, rng);
}

DecodeOutcome flooding_nms(std::span<const double> received, const TannerGraph& g, const NmsConfig& cfg) {
  cfg.validate();
  check_input(g, received);
  DecodeOutcome out;
  out.trajectory.emplace_back(received.begin(), received.end());
  MessageState state = MessageState::zeros(g);
  for (std::size_t t = 1; t <= cfg.max_iter; ++t) {
    Llr post = nms_iterate(g, received, state, cfg.alpha);
    out.hard_decision = hard_decision(post);
    out.trajectory.push_back(std::move(post));
    out.iterations_used = t;
    if (is_codeword(g.matrix(), out.hard_decision)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// mRRD

std::size_t closest_candidate(std::span<const double> received, const std::vector<Bits>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("no candidates");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double d = 0.0;
    for (std::size_t k = 0; k < received.size(); ++k) {
      const double s = candidates[c][k] ? -1.0 : 1.0;
      d += (received[k] - s) * (received[k] - s);
    }
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

DecodeOutcome mrrd(std::span<const double> received, const Code& code, const MrrdConfig& cfg, const NmsConfig& inner,
                   Rng& rng) {
  cfg.validate();
  inner.validate();
  const TannerGraph g(code.H_std);
  check_input(g, received);
  const std::size_t n = code.n;

  struct Branch {
    Bits decision;
    bool valid = false;
    std::vector<Llr> trajectory;
    std::size_t rounds = 0;
  };
  std::vector<Branch> branches(cfg.branches);

  for (auto& br : branches) {
    Permutation theta = random_automorphism(n, rng);
    Llr y = theta.apply(std::span<const double>(received));
    br.trajectory.emplace_back(received.begin(), received.end());
    for (std::size_t round = 1; round <= cfg.rounds; ++round) {
      MessageState state = MessageState::zeros(g);
      Llr soft;
      for (std::size_t it = 0; it < cfg.inner_iters; ++it) soft = nms_iterate(g, y, state, inner.alpha);
      for (std::size_t i = 0; i < n; ++i) y[i] = saturate(y[i] + soft[i], inner.clip);
      Bits c = hard_decision(y);
      br.rounds = round;
      br.trajectory.push_back(theta.unapply(y));
      if (is_codeword(code.H_std, c)) {
        br.valid = true;
        br.decision = theta.unapply(c);
        break;
      }
      if (round == cfg.rounds) {
        br.decision = theta.unapply(c);
        break;
      }
      const Permutation rho = random_automorphism(n, rng);
      y = rho.apply(y);
      theta = rho.after(theta);
    }
  }

  std::vector<std::size_t> pool;
  for (std::size_t b = 0; b < branches.size(); ++b)
    if (branches[b].valid) pool.push_back(b);
  const bool any_valid = !pool.empty();
  if (!any_valid)
    for (std::size_t b = 0; b < branches.size(); ++b) pool.push_back(b);

  std::vector<Bits> candidates;
  for (std::size_t b : pool) candidates.push_back(branches[b].decision);
  Branch& chosen = branches[pool[closest_candidate(received, candidates)]];

  DecodeOutcome out;
  out.hard_decision = chosen.decision;
  out.converged = any_valid;
  out.iterations_used = chosen.rounds;
  out.trajectory = std::move(chosen.trajectory);
  return out;
}

}  // namespace fec
