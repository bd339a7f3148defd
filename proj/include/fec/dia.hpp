#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

#include "fec/bitmat.hpp"
#include "fec/nms.hpp"

namespace fec {

/// Per-bit trajectory windows. Entry (f, i, d) is window position d of bit i
/// in frame f: d = 0 is the received LLR, d = t the soft output of iteration t.
struct DiaFeatures {
  std::size_t frames = 0;
  std::size_t n = 0;
  std::size_t depth = 0;
  std::vector<double> data;

  std::size_t windows() const { return frames * n; }
  std::span<const double> window(std::size_t w) const { return {data.data() + w * depth, depth}; }
  double at(std::size_t f, std::size_t i, std::size_t d) const { return data[(f * n + i) * depth + d]; }
  /// Appends the frames of `other`; shapes must agree unless this is empty.
  void append(const DiaFeatures& other);
};

/// Features of one failed decode. Throws std::invalid_argument when the
/// outcome converged or its trajectory does not hold exactly `depth` arrays.
DiaFeatures assemble_features(const DecodeOutcome& outcome, std::size_t depth = 5);

/// Failure trajectories with the transmitted codewords, frame-major.
struct DiaDataset {
  DiaFeatures features;
  Bits truth;

  std::size_t frames() const { return features.frames; }
  void append(const DiaFeatures& f, const Bits& codeword);
  /// Frames [begin, end).
  DiaDataset slice(std::size_t begin, std::size_t end) const;
};

enum class Activation : std::uint32_t { kTanh = 0, kRelu = 1 };

struct DiaArch {
  std::size_t depth = 5;
  std::size_t kernel1 = 3;
  std::size_t filters1 = 16;
  std::size_t kernel2 = 3;
  std::size_t filters2 = 8;
  Activation activation = Activation::kTanh;

  void validate() const;
  std::size_t param_count() const;
};

/// Two same-padded 1-D convolutions over the window axis, each followed by the
/// activation, then a dense layer to one linear output per bit. The output is
/// an LLR-like score: positive favours bit 0.
class DiaModel {
 public:
  /// Zero parameters and unit input scale.
  explicit DiaModel(DiaArch arch = {});

  /// Glorot-uniform weights, zero biases.
  static DiaModel random(DiaArch arch, std::uint64_t seed);

  const DiaArch& arch() const { return arch_; }
  std::size_t param_count() const { return params_.size(); }
  std::span<const double> params() const { return params_; }
  std::span<double> params() { return params_; }
  std::span<const double> input_scale() const { return scale_; }
  void set_input_scale(std::vector<double> scale);
  /// Sets each input scale to 1 / RMS of that window position over `f`.
  void fit_input_scale(const DiaFeatures& f);
  /// Rounds parameters and scales to float precision (what the file stores).
  void round_to_float();

  double forward_window(std::span<const double> window) const;
  /// frames * n scores, frame-major. Throws on depth mismatch.
  std::vector<double> forward(const DiaFeatures& f) const;

  /// Mean per-bit sigmoid cross-entropy over all windows, accumulating
  /// d(loss)/d(params) into `grad` when it is non-null (`grad` is resized and
  /// overwritten).
  double loss(const DiaFeatures& f, const Bits& truth, std::vector<double>* grad = nullptr) const;

 private:
  struct Layout;
  Layout layout() const;
  /// Score of one window. With bit >= 0, also adds loss (returned through
  /// `loss`) and, when `grad` is non-null, scale * d(loss)/d(params).
  double window_pass(std::span<const double> window, int bit, double* loss, double* grad, double scale) const;

  DiaArch arch_;
  std::vector<double> scale_;
  std::vector<double> params_;
};

/// Mean sigmoid cross-entropy in nats of scores against truth bits: bit 0
/// contributes log(1 + exp(-s)), bit 1 contributes log(1 + exp(s)).
double cross_entropy(std::span<const double> scores, const Bits& truth);

/// Cross-entropy of window position `column` taken as the score.
double column_cross_entropy(const DiaDataset& data, std::size_t column);

struct TrainConfig {
  std::size_t batch_frames = 100;
  double learning_rate = 1e-2;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  /// Refit the input scale on the training set before the first step.
  bool fit_scale = true;

  void validate() const;
};

struct TrainResult {
  DiaModel model;
  /// Mean training loss of each epoch.
  std::vector<double> loss_history;
};

/// Mini-batch SGD on the mean cross-entropy; frames are reshuffled every
/// epoch from `cfg.seed`. The returned model is rounded to float precision.
TrainResult train(const DiaModel& init, const DiaDataset& data, const TrainConfig& cfg);

class DiaFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kDiaFormatVersion = 1;

void save_model(const DiaModel& m, std::ostream& out);
void save_model(const DiaModel& m, const std::filesystem::path& path);
DiaModel load_model(std::istream& in);
DiaModel load_model(const std::filesystem::path& path);

}  // namespace fec
