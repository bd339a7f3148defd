#include "fec/perms.hpp"

#include <numeric>
#include <string>

namespace fec {

Permutation::Permutation(std::vector<std::size_t> forward) : fwd_(std::move(forward)), inv_(fwd_.size(), fwd_.size()) {
  for (std::size_t i = 0; i < fwd_.size(); ++i) {
    if (fwd_[i] >= fwd_.size() || inv_[fwd_[i]] != fwd_.size())
      throw std::invalid_argument("permutation is not a bijection");
    inv_[fwd_[i]] = i;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::size_t> f(n);
  std::iota(f.begin(), f.end(), 0);
  return Permutation(std::move(f));
}

Permutation Permutation::inverse() const { return Permutation(inv_); }

Permutation Permutation::after(const Permutation& first) const {
  if (first.size() != size()) throw std::invalid_argument("composing permutations of different length");
  std::vector<std::size_t> f(size());
  for (std::size_t i = 0; i < size(); ++i) f[i] = fwd_[first.fwd_[i]];
  return Permutation(std::move(f));
}

Permutation cyclic(std::size_t n, std::size_t shift) {
  std::vector<std::size_t> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = (i + shift) % n;
  return Permutation(std::move(f));
}

Permutation frobenius(std::size_t n) {
  if (n % 2 == 0) throw std::invalid_argument("frobenius map needs odd length, got " + std::to_string(n));
  std::vector<std::size_t> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = (2 * i) % n;
  return Permutation(std::move(f));
}

Permutation interleave(std::size_t n) {
  const std::size_t evens = (n + 1) / 2;
  std::vector<std::size_t> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = i % 2 == 0 ? i / 2 : evens + i / 2;
  return Permutation(std::move(f));
}

PermBlockConfig PermBlockConfig::for_length(std::size_t n) {
  PermBlockConfig cfg;
  cfg.n = n;
  cfg.step = std::max<std::size_t>(1, n / 3);
  cfg.multipliers = {0, 1, 2};
  return cfg;
}

void PermBlockConfig::validate() const {
  if (n % 2 == 0) throw std::invalid_argument("permutation block needs odd length");
  if (step == 0) throw std::invalid_argument("shift step must be positive");
  if (multipliers.empty()) throw std::invalid_argument("shift multiplier set is empty");
  if (step * multipliers.size() > n) throw std::invalid_argument("step * |multipliers| exceeds code length");
  if (fixed_offset && *fixed_offset >= step) throw std::invalid_argument("fixed offset must lie in [0, step)");
}

std::size_t draw_block_offset(const PermBlockConfig& cfg, Rng& rng) {
  if (cfg.fixed_offset) return *cfg.fixed_offset;
  return std::uniform_int_distribution<std::size_t>(0, cfg.step - 1)(rng);
}

std::vector<Permutation> block_for_offset(const PermBlockConfig& cfg, std::size_t offset) {
  std::vector<Permutation> block;
  block.reserve(cfg.block_size());
  if (cfg.identity_only) {
    for (std::size_t i = 0; i < cfg.block_size(); ++i) block.push_back(Permutation::identity(cfg.n));
    return block;
  }
  const Permutation frob = frobenius(cfg.n);
  const Permutation inter = interleave(cfg.n);
  for (std::size_t s : cfg.multipliers) {
    Permutation c = cyclic(cfg.n, (s * cfg.step + offset) % cfg.n);
    Permutation f = frob.after(c);
    Permutation i = inter.after(c);
    block.push_back(std::move(c));
    block.push_back(std::move(f));
    block.push_back(std::move(i));
  }
  return block;
}

std::vector<Permutation> sample_block(const PermBlockConfig& cfg, Rng& rng) {
  return block_for_offset(cfg, draw_block_offset(cfg, rng));
}

bool is_automorphism(const Code& code, const Permutation& p) {
  if (p.size() != code.n) return false;
  for (std::size_t r = 0; r < code.G.rows(); ++r)
    if (!is_codeword(code.H_std, p.apply(code.G.row_bits(r)))) return false;
  return true;
}

Permutation random_automorphism(std::size_t n, Rng& rng) {
  // Order of 2 modulo n bounds the distinct Frobenius powers.
  std::size_t order = 1;
  for (std::size_t x = 2 % n; x != 1 % n; x = (x * 2) % n) ++order;
  const std::size_t a = std::uniform_int_distribution<std::size_t>(0, order - 1)(rng);
  const std::size_t b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  Permutation p = cyclic(n, b);
  const Permutation frob = frobenius(n);
  for (std::size_t i = 0; i < a; ++i) p = frob.after(p);
  return p;
}

}  // namespace fec
