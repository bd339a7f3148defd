#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fec/bch.hpp"
#include "fec/dia.hpp"
#include "fec/nms.hpp"
#include "fec/osd.hpp"
#include "fec/perms.hpp"
#include "fec/rng.hpp"

namespace fec {

/// sigma^2 = 1 / (2 r 10^(EbN0/10)); zero for an infinite Eb/N0.
double noise_variance(double ebn0_db, double rate);

struct Transmission {
  Bits codeword;
  /// LLRs under the sigma^2 = 2 convention, so l_i = y_i.
  Llr llr;
};

/// BPSK s = 1 - 2c plus white Gaussian noise.
Transmission transmit(const Code& code, const Bits& message, double ebn0_db, Rng& rng);
/// Same with a uniformly random message drawn from `rng` first.
Transmission transmit_random(const Code& code, double ebn0_db, Rng& rng);

enum class DecoderStack { kNms, kNmsOsd, kNmsDiaOsd, kOsdOnly, kMrrd };

/// "nms", "nms+osd", "nms+dia+osd", "osd-only", "mrrd".
std::string_view stack_name(DecoderStack s);
std::optional<DecoderStack> parse_stack(std::string_view name);
/// Comma separated list of the accepted names.
std::string stack_names();

struct StopRule {
  /// Stop once this many final-stage frame errors have been seen...
  std::size_t min_errors = 100;
  /// ...or this many frames have been simulated.
  std::size_t max_frames = 200000;
};

struct SimConfig {
  DecoderStack stack = DecoderStack::kNmsDiaOsd;
  NmsConfig nms;
  PermBlockConfig perm;
  std::size_t osd_order = 1;
  MrrdConfig mrrd;
  StopRule stop;
  std::uint64_t seed = 1;
  /// 0 uses the hardware concurrency. Never changes results.
  std::size_t workers = 1;
  /// Frames are dispatched and the stop rule checked in chunks of this size.
  std::size_t chunk_frames = 500;
};

enum class FrameClass { kSuccess, kDetectedFailure, kUndetectedError };

struct FrameRecord {
  Bits truth;
  Llr received;
  DecodeOutcome first;
  std::optional<OsdResult> osd;
  FrameClass cls = FrameClass::kSuccess;
  std::size_t first_bit_errors = 0;
  std::size_t final_bit_errors = 0;
  bool final_error = false;
};

/// Counts for one Eb/N0 point. The first stage is NMS (or mRRD); detected
/// failures go to OSD when the stack has one. For osd-only every frame is
/// routed to OSD, so the first stage reports FER 1 and the raw channel BER.
struct CurvePoint {
  double ebn0_db = 0.0;
  std::size_t n = 0;
  std::size_t frames = 0;
  std::size_t first_failures = 0;
  std::size_t undetected = 0;
  std::size_t osd_failures = 0;
  bool has_osd = false;
  std::size_t first_bit_errors = 0;
  std::size_t final_bit_errors = 0;
  std::size_t undetected_bit_errors = 0;

  std::size_t detected() const { return first_failures - undetected; }
  double fer_first() const;
  double fer_undetected() const;
  /// F_2: OSD failures over detected failures; 1 without an OSD stage.
  double fer_osd_cond() const;
  /// F_u + (F_1 - F_u) F_2.
  double fer_hybrid() const;
  double ber_first() const;
  double ber_final() const;
  double ber_undetected() const;

  void merge(const FrameRecord& r);
};

/// Decoder objects shared by all frames of a run.
class Simulator {
 public:
  /// `model` is required for the nms+dia+osd stack and must outlive this.
  Simulator(const Code& code, SimConfig cfg, const DiaModel* model = nullptr);

  FrameRecord frame(double ebn0_db, std::uint64_t seed) const;
  CurvePoint run_point(double ebn0_db) const;
  std::vector<CurvePoint> run(const std::vector<double>& ebn0_grid) const;

  const SimConfig& config() const { return cfg_; }
  /// Stream seed of frame `index` at a given point.
  std::uint64_t point_frame_seed(double ebn0_db, std::size_t index) const;

 private:
  const Code& code_;
  SimConfig cfg_;
  const DiaModel* model_;
  std::optional<RevisedNmsDecoder> nms_;
};

/// Convenience wrapper around Simulator::run_point.
CurvePoint run_point(const Code& code, const SimConfig& cfg, double ebn0_db, const DiaModel* model = nullptr);

inline constexpr std::string_view kCurveHeader =
    "ebn0_db,frames,fer_nms,fer_undetected,fer_osd_cond,fer_hybrid,ber_nms,ber_hybrid,ber_undetected";

/// One row per point, sorted by Eb/N0, values to 9 significant digits.
void emit_curves(std::vector<CurvePoint> points, std::ostream& out);
void emit_curves(const std::vector<CurvePoint>& points, const std::filesystem::path& path);

struct CurveRow {
  double ebn0_db = 0.0;
  std::size_t frames = 0;
  double fer_nms = 0.0, fer_undetected = 0.0, fer_osd_cond = 0.0, fer_hybrid = 0.0;
  double ber_nms = 0.0, ber_hybrid = 0.0, ber_undetected = 0.0;
};

std::vector<CurveRow> parse_curves(std::istream& in);

struct FailureSet {
  DiaDataset data;
  std::size_t frames_simulated = 0;
};

/// The first `count` detected NMS failures in frame order at one Eb/N0, with
/// trajectories and transmitted codewords. Undetected errors are skipped.
/// Throws std::runtime_error if `max_frames` frames do not yield `count`.
FailureSet collect_failures(const Code& code, const SimConfig& cfg, double ebn0_db, std::size_t count,
                            std::size_t max_frames = 10'000'000);

/// Binary failure-set file: magic, version, shape, f64 windows, truth bytes.
void save_failures(const DiaDataset& d, const std::filesystem::path& path);
DiaDataset load_failures(const std::filesystem::path& path);

}  // namespace fec
