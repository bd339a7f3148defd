#include "fec/sim.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <exception>
#include <mutex>
#include <thread>

namespace fec {

double noise_variance(double ebn0_db, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("code rate must be positive");
  if (std::isinf(ebn0_db) && ebn0_db > 0) return 0.0;
  return 1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
}

Transmission transmit(const Code& code, const Bits& message, double ebn0_db, Rng& rng) {
  Transmission t;
  t.codeword = encode(code, message);
  const double sigma = std::sqrt(noise_variance(ebn0_db, code.rate()));
  std::normal_distribution<double> noise(0.0, 1.0);
  t.llr.resize(code.n);
  for (std::size_t i = 0; i < code.n; ++i) {
    const double s = t.codeword[i] ? -1.0 : 1.0;
    // The draw happens even without noise so streams stay aligned.
    const double z = noise(rng);
    t.llr[i] = s + sigma * z;
  }
  return t;
}

Transmission transmit_random(const Code& code, double ebn0_db, Rng& rng) {
  Bits message(code.k);
  for (std::size_t i = 0; i < code.k; ++i) message[i] = static_cast<std::uint8_t>(rng() >> 63);
  return transmit(code, message, ebn0_db, rng);
}

namespace {

constexpr std::array<std::pair<DecoderStack, std::string_view>, 5> kStacks{{
    {DecoderStack::kNms, "nms"},
    {DecoderStack::kNmsOsd, "nms+osd"},
    {DecoderStack::kNmsDiaOsd, "nms+dia+osd"},
    {DecoderStack::kOsdOnly, "osd-only"},
    {DecoderStack::kMrrd, "mrrd"},
}};

std::size_t bit_errors(const Bits& a, const Bits& b) {
  std::size_t e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += a[i] != b[i];
  return e;
}

double ratio(std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; }

/// Runs fn(i) for i in [0, count) on up to `workers` threads.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex mu;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

bool stack_has_osd(DecoderStack s) {
  return s == DecoderStack::kNmsOsd || s == DecoderStack::kNmsDiaOsd || s == DecoderStack::kOsdOnly;
}

}  // namespace

std::string_view stack_name(DecoderStack s) {
  for (const auto& [k, name] : kStacks)
    if (k == s) return name;
  return "unknown";
}

std::optional<DecoderStack> parse_stack(std::string_view name) {
  for (const auto& [k, n] : kStacks)
    if (n == name) return k;
  return std::nullopt;
}

std::string stack_names() {
  std::string out;
  for (const auto& [k, name] : kStacks) {
    if (!out.empty()) out += ", ";
    out += name;
  }
  return out;
}

double CurvePoint::fer_first() const { return ratio(first_failures, frames); }
double CurvePoint::fer_undetected() const { return ratio(undetected, frames); }
double CurvePoint::fer_osd_cond() const { return has_osd ? ratio(osd_failures, detected()) : 1.0; }
double CurvePoint::fer_hybrid() const {
  return fer_undetected() + (fer_first() - fer_undetected()) * fer_osd_cond();
}
double CurvePoint::ber_first() const { return ratio(first_bit_errors, frames * n); }
double CurvePoint::ber_final() const { return ratio(final_bit_errors, frames * n); }
double CurvePoint::ber_undetected() const { return ratio(undetected_bit_errors, frames * n); }

void CurvePoint::merge(const FrameRecord& r) {
  ++frames;
  first_bit_errors += r.first_bit_errors;
  final_bit_errors += r.final_bit_errors;
  if (r.cls == FrameClass::kSuccess) return;
  ++first_failures;
  if (r.cls == FrameClass::kUndetectedError) {
    ++undetected;
    undetected_bit_errors += r.first_bit_errors;
  } else if (has_osd && r.final_error) {
    ++osd_failures;
  }
}

Simulator::Simulator(const Code& code, SimConfig cfg, const DiaModel* model)
    : code_(code), cfg_(std::move(cfg)), model_(model) {
  cfg_.nms.validate();
  cfg_.mrrd.validate();
  if (cfg_.chunk_frames == 0) throw std::invalid_argument("chunk_frames must be positive");
  if (cfg_.stack == DecoderStack::kNms || cfg_.stack == DecoderStack::kNmsOsd ||
      cfg_.stack == DecoderStack::kNmsDiaOsd) {
    if (!code_.H_opt) throw std::invalid_argument("the NMS stage needs an optimized parity-check matrix");
    nms_.emplace(*code_.H_opt, cfg_.nms, cfg_.perm);
  }
  if (cfg_.stack == DecoderStack::kNmsDiaOsd) {
    if (!model_) throw std::invalid_argument("the nms+dia+osd stack needs a trained DIA model");
    if (model_->arch().depth != cfg_.nms.max_iter + 1)
      throw std::invalid_argument("DIA model depth " + std::to_string(model_->arch().depth) +
                                  " does not match NMS iterations + 1 = " + std::to_string(cfg_.nms.max_iter + 1));
  }
  if (stack_has_osd(cfg_.stack) && cfg_.osd_order > code_.k) throw std::invalid_argument("OSD order exceeds k");
}

std::uint64_t Simulator::point_frame_seed(double ebn0_db, std::size_t index) const {
  char label[64];
  std::snprintf(label, sizeof label, "point:%.6f", ebn0_db);
  return frame_seed(derive_seed(cfg_.seed, label), index);
}

FrameRecord Simulator::frame(double ebn0_db, std::uint64_t seed) const {
  Rng rng = make_rng(seed);
  Transmission tx = transmit_random(code_, ebn0_db, rng);
  FrameRecord r;
  r.truth = std::move(tx.codeword);
  r.received = std::move(tx.llr);

  if (cfg_.stack == DecoderStack::kOsdOnly) {
    r.first.hard_decision = hard_decision(r.received);
    r.first.trajectory.push_back(r.received);
    r.first_bit_errors = bit_errors(r.first.hard_decision, r.truth);
    r.cls = FrameClass::kDetectedFailure;
    r.osd = osd_decode(r.received, r.received, code_, OsdConfig{cfg_.osd_order, ReliabilitySource::kRaw});
    r.final_bit_errors = bit_errors(r.osd->codeword, r.truth);
    r.final_error = r.final_bit_errors != 0;
    return r;
  }

  r.first = cfg_.stack == DecoderStack::kMrrd ? mrrd(r.received, code_, cfg_.mrrd, cfg_.nms, rng)
                                              : nms_->decode(r.received, rng);
  r.first_bit_errors = bit_errors(r.first.hard_decision, r.truth);
  const bool wrong = r.first_bit_errors != 0;
  if (!wrong && r.first.converged) {
    r.cls = FrameClass::kSuccess;
  } else if (r.first.converged) {
    r.cls = FrameClass::kUndetectedError;
    r.first.undetected_candidate = true;
  } else {
    r.cls = FrameClass::kDetectedFailure;
  }
  r.final_bit_errors = r.first_bit_errors;
  r.final_error = wrong;

  if (r.cls == FrameClass::kDetectedFailure && stack_has_osd(cfg_.stack)) {
    Llr rel = r.received;
    ReliabilitySource src = ReliabilitySource::kRaw;
    if (cfg_.stack == DecoderStack::kNmsDiaOsd) {
      rel = model_->forward(assemble_features(r.first, model_->arch().depth));
      src = ReliabilitySource::kDia;
    }
    r.osd = osd_decode(r.received, rel, code_, OsdConfig{cfg_.osd_order, src});
    r.final_bit_errors = bit_errors(r.osd->codeword, r.truth);
    r.final_error = r.final_bit_errors != 0;
  }
  return r;
}

CurvePoint Simulator::run_point(double ebn0_db) const {
  CurvePoint p;
  p.ebn0_db = ebn0_db;
  p.n = code_.n;
  p.has_osd = stack_has_osd(cfg_.stack);
  std::size_t final_errors = 0;
  std::vector<FrameRecord> chunk;
  while (p.frames < cfg_.stop.max_frames && final_errors < cfg_.stop.min_errors) {
    const std::size_t base = p.frames;
    const std::size_t count = std::min(cfg_.chunk_frames, cfg_.stop.max_frames - base);
    chunk.assign(count, FrameRecord{});
    parallel_for(count, cfg_.workers,
                 [&](std::size_t i) { chunk[i] = frame(ebn0_db, point_frame_seed(ebn0_db, base + i)); });
    for (const auto& r : chunk) {
      p.merge(r);
      final_errors += r.final_error;
    }
  }
  return p;
}

std::vector<CurvePoint> Simulator::run(const std::vector<double>& ebn0_grid) const {
  std::vector<CurvePoint> out;
  for (double e : ebn0_grid) out.push_back(run_point(e));
  return out;
}

CurvePoint run_point(const Code& code, const SimConfig& cfg, double ebn0_db, const DiaModel* model) {
  return Simulator(code, cfg, model).run_point(ebn0_db);
}

// ---------------------------------------------------------------------------
// Curves

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

void emit_curves(std::vector<CurvePoint> points, std::ostream& out) {
  std::stable_sort(points.begin(), points.end(),
                   [](const CurvePoint& a, const CurvePoint& b) { return a.ebn0_db < b.ebn0_db; });
  out << kCurveHeader << '\n';
  for (const auto& p : points) {
    out << fmt9(p.ebn0_db) << ',' << p.frames << ',' << fmt9(p.fer_first()) << ',' << fmt9(p.fer_undetected()) << ','
        << fmt9(p.fer_osd_cond()) << ',' << fmt9(p.fer_hybrid()) << ',' << fmt9(p.ber_first()) << ','
        << fmt9(p.ber_final()) << ',' << fmt9(p.ber_undetected()) << '\n';
  }
  if (!out) throw std::runtime_error("failed to write curves");
}

void emit_curves(const std::vector<CurvePoint>& points, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  emit_curves(points, out);
}

std::vector<CurveRow> parse_curves(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCurveHeader) throw std::runtime_error("curve file has an unexpected header");
  std::vector<CurveRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 9) throw std::runtime_error("curve line " + std::to_string(lineno) + " has " +
                                                    std::to_string(cells.size()) + " fields, expected 9");
    try {
      CurveRow r;
      r.ebn0_db = std::stod(cells[0]);
      r.frames = std::stoull(cells[1]);
      double* vals[] = {&r.fer_nms, &r.fer_undetected, &r.fer_osd_cond, &r.fer_hybrid,
                        &r.ber_nms, &r.ber_hybrid,     &r.ber_undetected};
      for (std::size_t i = 0; i < 7; ++i) *vals[i] = std::stod(cells[i + 2]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw std::runtime_error("curve line " + std::to_string(lineno) + " has a non-numeric field");
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Failure collection

FailureSet collect_failures(const Code& code, const SimConfig& cfg, double ebn0_db, std::size_t count,
                            std::size_t max_frames) {
  SimConfig c = cfg;
  c.stack = DecoderStack::kNms;
  c.seed = derive_seed(cfg.seed, "collect");
  const Simulator sim(code, c);
  FailureSet out;
  std::vector<FrameRecord> chunk;
  while (out.data.frames() < count) {
    if (out.frames_simulated >= max_frames)
      throw std::runtime_error("collected " + std::to_string(out.data.frames()) + " of " + std::to_string(count) +
                               " failures within " + std::to_string(max_frames) + " frames");
    const std::size_t base = out.frames_simulated;
    const std::size_t n = std::min(c.chunk_frames, max_frames - base);
    chunk.assign(n, FrameRecord{});
    parallel_for(n, c.workers, [&](std::size_t i) { chunk[i] = sim.frame(ebn0_db, sim.point_frame_seed(ebn0_db, base + i)); });
    for (const auto& r : chunk) {
      ++out.frames_simulated;
      if (r.cls == FrameClass::kDetectedFailure) out.data.append(assemble_features(r.first, c.nms.max_iter + 1), r.truth);
      if (out.data.frames() == count) break;
    }
  }
  return out;
}

namespace {

constexpr std::array<char, 8> kFailMagic{'F', 'E', 'C', 'F', 'A', 'I', 'L', '\n'};
constexpr std::uint32_t kFailVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("corrupt failure file: truncated");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = v << 8 | b[i];
  return v;
}

}  // namespace

void save_failures(const DiaDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(kFailMagic.data(), kFailMagic.size());
  put_u64(out, kFailVersion);
  put_u64(out, d.features.frames);
  put_u64(out, d.features.n);
  put_u64(out, d.features.depth);
  for (double v : d.features.data) put_u64(out, std::bit_cast<std::uint64_t>(v));
  out.write(reinterpret_cast<const char*>(d.truth.data()), static_cast<std::streamsize>(d.truth.size()));
  if (!out) throw std::runtime_error("failed to write " + path.string());
}

DiaDataset load_failures(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open failure set " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kFailMagic)
    throw std::runtime_error(path.string() + " is not a failure-set file");
  const std::uint64_t version = get_u64(in);
  if (version != kFailVersion) throw std::runtime_error("unsupported failure-set version " + std::to_string(version));
  DiaDataset d;
  d.features.frames = get_u64(in);
  d.features.n = get_u64(in);
  d.features.depth = get_u64(in);
  if (d.features.n > 4096 || d.features.depth > 1024 || d.features.frames > (std::uint64_t{1} << 32))
    throw std::runtime_error("corrupt failure file: implausible shape");
  d.features.data.resize(d.features.frames * d.features.n * d.features.depth);
  for (auto& v : d.features.data) v = std::bit_cast<double>(get_u64(in));
  d.truth.resize(d.features.frames * d.features.n);
  if (!in.read(reinterpret_cast<char*>(d.truth.data()), static_cast<std::streamsize>(d.truth.size())))
    throw std::runtime_error("corrupt failure file: truncated");
  for (auto b : d.truth)
    if (b > 1) throw std::runtime_error("corrupt failure file: truth bit out of range");
  return d;
}

}  // namespace fec
