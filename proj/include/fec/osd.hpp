#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fec/bch.hpp"
#include "fec/bitmat.hpp"

namespace fec {

enum class ReliabilitySource { kRaw, kDia };

struct OsdConfig {
  std::size_t order = 1;
  ReliabilitySource source = ReliabilitySource::kRaw;
};

/// Most reliable basis for one frame.
struct MrbContext {
  /// Positions sorted by descending |reliability|; ties keep the lower index first.
  std::vector<std::size_t> order;
  /// The k basis positions, in the order their pivots were found.
  std::vector<std::size_t> basis;
  /// Positions among the first ones in `order` that were skipped because their
  /// generator column was dependent on more reliable ones.
  std::vector<std::size_t> skipped;
  /// k x n generator spanning the code with gen(r, basis[s]) = [r == s].
  BitMatrix gen;
};

MrbContext build_mrb(const Code& code, std::span<const double> reliabilities);

struct OsdResult {
  Bits codeword;
  /// Squared Euclidean distance between 1 - 2*codeword and the received vector.
  double distance = 0.0;
  std::size_t candidates = 0;
};

/// Order-p OSD. MRB hard decisions come from the signs of `reliabilities`;
/// candidates are scored against `received`.
OsdResult osd_decode(std::span<const double> received, std::span<const double> reliabilities, const Code& code,
                     const OsdConfig& cfg);

/// Same as osd_decode with a prebuilt basis.
OsdResult osd_decode(std::span<const double> received, std::span<const double> reliabilities, const MrbContext& mrb,
                     std::size_t order);

double squared_distance(std::span<const double> received, const Bits& codeword);

/// Number of test patterns of weight <= p over k positions.
std::size_t osd_candidate_count(std::size_t k, std::size_t p);

struct MrbSample {
  Bits truth;
  std::vector<double> reliabilities;
};

/// cdf[d] = fraction of samples with at most d erroneous hard decisions among
/// the k most reliable positions (pre) or the elimination-adjusted basis (post).
struct MrbErrorCdf {
  std::size_t samples = 0;
  std::vector<double> pre;
  std::vector<double> post;
};

MrbErrorCdf mrb_error_histogram(const Code& code, std::span<const MrbSample> samples);

}  // namespace fec
