#include "fec/dia.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <string>

#include "fec/rng.hpp"

namespace fec {

void DiaFeatures::append(const DiaFeatures& other) {
  if (other.frames == 0) return;
  if (frames == 0) {
    n = other.n;
    depth = other.depth;
  } else if (other.n != n || other.depth != depth) {
    throw std::invalid_argument("feature shapes differ");
  }
  data.insert(data.end(), other.data.begin(), other.data.end());
  frames += other.frames;
}

DiaFeatures assemble_features(const DecodeOutcome& outcome, std::size_t depth) {
  if (outcome.converged) throw std::invalid_argument("features are only defined for failed decodes");
  if (outcome.trajectory.size() != depth)
    throw std::invalid_argument("trajectory holds " + std::to_string(outcome.trajectory.size()) + " arrays, expected " +
                                std::to_string(depth));
  DiaFeatures f;
  f.frames = 1;
  f.n = outcome.trajectory.front().size();
  f.depth = depth;
  f.data.resize(f.n * depth);
  for (std::size_t d = 0; d < depth; ++d) {
    if (outcome.trajectory[d].size() != f.n) throw std::invalid_argument("trajectory arrays differ in length");
    for (std::size_t i = 0; i < f.n; ++i) f.data[i * depth + d] = outcome.trajectory[d][i];
  }
  return f;
}

void DiaDataset::append(const DiaFeatures& f, const Bits& codeword) {
  if (codeword.size() != f.windows()) throw std::invalid_argument("truth length does not match features");
  features.append(f);
  truth.insert(truth.end(), codeword.begin(), codeword.end());
}

DiaDataset DiaDataset::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > frames()) throw std::out_of_range("dataset slice out of range");
  DiaDataset out;
  out.features.frames = end - begin;
  out.features.n = features.n;
  out.features.depth = features.depth;
  const std::size_t stride = features.n * features.depth;
  out.features.data.assign(features.data.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                           features.data.begin() + static_cast<std::ptrdiff_t>(end * stride));
  out.truth.assign(truth.begin() + static_cast<std::ptrdiff_t>(begin * features.n),
                   truth.begin() + static_cast<std::ptrdiff_t>(end * features.n));
  return out;
}

void DiaArch::validate() const {
  if (depth == 0 || kernel1 == 0 || kernel2 == 0 || filters1 == 0 || filters2 == 0)
    throw std::invalid_argument("DIA dimensions must be positive");
  if (kernel1 % 2 == 0 || kernel2 % 2 == 0) throw std::invalid_argument("DIA kernels must have odd length");
  if (activation != Activation::kTanh && activation != Activation::kRelu)
    throw std::invalid_argument("unknown DIA activation");
}

std::size_t DiaArch::param_count() const {
  return filters1 * kernel1 + filters1 + filters2 * filters1 * kernel2 + filters2 + depth * filters2 + 1;
}

struct DiaModel::Layout {
  std::size_t w1, b1, w2, b2, wd, bd;
};

DiaModel::Layout DiaModel::layout() const {
  const DiaArch& a = arch_;
  Layout l{};
  l.w1 = 0;
  l.b1 = l.w1 + a.filters1 * a.kernel1;
  l.w2 = l.b1 + a.filters1;
  l.b2 = l.w2 + a.filters2 * a.filters1 * a.kernel2;
  l.wd = l.b2 + a.filters2;
  l.bd = l.wd + a.depth * a.filters2;
  return l;
}

DiaModel::DiaModel(DiaArch arch) : arch_(arch) {
  arch_.validate();
  scale_.assign(arch_.depth, 1.0);
  params_.assign(arch_.param_count(), 0.0);
}

DiaModel DiaModel::random(DiaArch arch, std::uint64_t seed) {
  DiaModel m(arch);
  const Layout l = m.layout();
  Rng rng = make_rng(derive_seed(seed, "dia-init"));
  auto fill = [&](std::size_t off, std::size_t count, double fan_in, double fan_out) {
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-lim, lim);
    for (std::size_t i = 0; i < count; ++i) m.params_[off + i] = u(rng);
  };
  const auto& a = m.arch_;
  fill(l.w1, a.filters1 * a.kernel1, double(a.kernel1), double(a.kernel1 * a.filters1));
  fill(l.w2, a.filters2 * a.filters1 * a.kernel2, double(a.kernel2 * a.filters1), double(a.kernel2 * a.filters2));
  fill(l.wd, a.depth * a.filters2, double(a.depth * a.filters2), 1.0);
  m.round_to_float();
  return m;
}

void DiaModel::set_input_scale(std::vector<double> scale) {
  if (scale.size() != arch_.depth) throw std::invalid_argument("input scale length does not match depth");
  scale_ = std::move(scale);
}

void DiaModel::fit_input_scale(const DiaFeatures& f) {
  if (f.depth != arch_.depth) throw std::invalid_argument("feature depth does not match model");
  std::vector<double> sq(arch_.depth, 0.0);
  for (std::size_t w = 0; w < f.windows(); ++w)
    for (std::size_t d = 0; d < f.depth; ++d) sq[d] += f.window(w)[d] * f.window(w)[d];
  for (std::size_t d = 0; d < arch_.depth; ++d) {
    const double rms = f.windows() ? std::sqrt(sq[d] / double(f.windows())) : 0.0;
    scale_[d] = static_cast<float>(rms > 0.0 ? 1.0 / rms : 1.0);
  }
}

void DiaModel::round_to_float() {
  for (auto& p : params_) p = static_cast<float>(p);
  for (auto& s : scale_) s = static_cast<float>(s);
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double DiaModel::window_pass(std::span<const double> window, int bit, double* loss, double* grad, double scale) const {
  const DiaArch& a = arch_;
  const Layout l = layout();
  const std::size_t D = a.depth, F1 = a.filters1, F2 = a.filters2, K1 = a.kernel1, K2 = a.kernel2;
  const long h1 = static_cast<long>(K1 / 2), h2 = static_cast<long>(K2 / 2);
  const double* p = params_.data();
  const bool relu = a.activation == Activation::kRelu;
  auto act = [relu](double x) { return relu ? std::max(x, 0.0) : std::tanh(x); };
  // Derivative from the activation output.
  auto dact = [relu](double y) { return relu ? (y > 0.0 ? 1.0 : 0.0) : 1.0 - y * y; };

  thread_local std::vector<double> u, a1, a2, d1, d2;
  u.resize(D);
  a1.resize(D * F1);
  a2.resize(D * F2);
  for (std::size_t d = 0; d < D; ++d) u[d] = window[d] * scale_[d];
  for (std::size_t pos = 0; pos < D; ++pos)
    for (std::size_t f = 0; f < F1; ++f) {
      double s = p[l.b1 + f];
      for (std::size_t j = 0; j < K1; ++j) {
        const long q = static_cast<long>(pos + j) - h1;
        if (q >= 0 && q < static_cast<long>(D)) s += p[l.w1 + f * K1 + j] * u[static_cast<std::size_t>(q)];
      }
      a1[pos * F1 + f] = act(s);
    }
  for (std::size_t pos = 0; pos < D; ++pos)
    for (std::size_t g = 0; g < F2; ++g) {
      double s = p[l.b2 + g];
      for (std::size_t j = 0; j < K2; ++j) {
        const long q = static_cast<long>(pos + j) - h2;
        if (q < 0 || q >= static_cast<long>(D)) continue;
        const double* w = p + l.w2 + (g * F1) * K2 + j;
        const double* in = a1.data() + static_cast<std::size_t>(q) * F1;
        for (std::size_t f = 0; f < F1; ++f) s += w[f * K2] * in[f];
      }
      a2[pos * F2 + g] = act(s);
    }
  double out = p[l.bd];
  for (std::size_t i = 0; i < D * F2; ++i) out += p[l.wd + i] * a2[i];
  if (bit < 0) return out;

  if (loss) *loss += bit ? softplus(out) : softplus(-out);
  if (!grad) return out;

  const double dout = scale * (bit ? sigmoid(out) : -sigmoid(-out));
  grad[l.bd] += dout;
  d2.resize(D * F2);
  d1.assign(D * F1, 0.0);
  for (std::size_t i = 0; i < D * F2; ++i) {
    grad[l.wd + i] += dout * a2[i];
    d2[i] = dout * p[l.wd + i] * dact(a2[i]);
  }
  for (std::size_t pos = 0; pos < D; ++pos)
    for (std::size_t g = 0; g < F2; ++g) {
      const double dz = d2[pos * F2 + g];
      grad[l.b2 + g] += dz;
      for (std::size_t j = 0; j < K2; ++j) {
        const long q = static_cast<long>(pos + j) - h2;
        if (q < 0 || q >= static_cast<long>(D)) continue;
        const std::size_t qq = static_cast<std::size_t>(q);
        for (std::size_t f = 0; f < F1; ++f) {
          const std::size_t wi = l.w2 + (g * F1 + f) * K2 + j;
          grad[wi] += dz * a1[qq * F1 + f];
          d1[qq * F1 + f] += dz * p[wi];
        }
      }
    }
  for (std::size_t pos = 0; pos < D; ++pos)
    for (std::size_t f = 0; f < F1; ++f) {
      const double dz = d1[pos * F1 + f] * dact(a1[pos * F1 + f]);
      grad[l.b1 + f] += dz;
      for (std::size_t j = 0; j < K1; ++j) {
        const long q = static_cast<long>(pos + j) - h1;
        if (q >= 0 && q < static_cast<long>(D)) grad[l.w1 + f * K1 + j] += dz * u[static_cast<std::size_t>(q)];
      }
    }
  return out;
}

double DiaModel::forward_window(std::span<const double> window) const {
  if (window.size() != arch_.depth) throw std::invalid_argument("window length does not match model depth");
  return window_pass(window, -1, nullptr, nullptr, 0.0);
}

std::vector<double> DiaModel::forward(const DiaFeatures& f) const {
  if (f.depth != arch_.depth)
    throw std::invalid_argument("feature depth " + std::to_string(f.depth) + ", model expects " +
                                std::to_string(arch_.depth));
  if (f.data.size() != f.windows() * f.depth) throw std::invalid_argument("feature buffer has wrong size");
  std::vector<double> out(f.windows());
  for (std::size_t w = 0; w < f.windows(); ++w) out[w] = window_pass(f.window(w), -1, nullptr, nullptr, 0.0);
  return out;
}

double DiaModel::loss(const DiaFeatures& f, const Bits& truth, std::vector<double>* grad) const {
  if (f.depth != arch_.depth) throw std::invalid_argument("feature depth does not match model");
  if (truth.size() != f.windows()) throw std::invalid_argument("truth length does not match features");
  if (f.windows() == 0) throw std::invalid_argument("empty feature set");
  const double inv = 1.0 / static_cast<double>(f.windows());
  if (grad) grad->assign(params_.size(), 0.0);
  double total = 0.0;
  for (std::size_t w = 0; w < f.windows(); ++w)
    window_pass(f.window(w), truth[w] ? 1 : 0, &total, grad ? grad->data() : nullptr, inv);
  return total * inv;
}

double cross_entropy(std::span<const double> scores, const Bits& truth) {
  if (scores.size() != truth.size()) throw std::invalid_argument("score and truth lengths differ");
  if (scores.empty()) throw std::invalid_argument("empty score set");
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) total += truth[i] ? softplus(scores[i]) : softplus(-scores[i]);
  return total / static_cast<double>(scores.size());
}

double column_cross_entropy(const DiaDataset& data, std::size_t column) {
  const auto& f = data.features;
  if (column >= f.depth) throw std::out_of_range("window column out of range");
  std::vector<double> s(f.windows());
  for (std::size_t w = 0; w < f.windows(); ++w) s[w] = f.window(w)[column];
  return cross_entropy(s, data.truth);
}

void TrainConfig::validate() const {
  if (batch_frames < 1) throw std::invalid_argument("batch_frames must be at least 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
}

TrainResult train(const DiaModel& init, const DiaDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.frames() == 0) throw std::invalid_argument("cannot train on an empty dataset");
  TrainResult res{init, {}};
  DiaModel& m = res.model;
  if (cfg.fit_scale) m.fit_input_scale(data.features);

  Rng rng = make_rng(derive_seed(cfg.seed, "dia-train"));
  std::vector<std::size_t> order(data.frames());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t n = data.features.n, depth = data.features.depth;
  std::vector<double> grad;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_frames) {
      const std::size_t e = std::min(order.size(), b + cfg.batch_frames);
      DiaDataset batch;
      batch.features.frames = e - b;
      batch.features.n = n;
      batch.features.depth = depth;
      batch.features.data.reserve((e - b) * n * depth);
      batch.truth.reserve((e - b) * n);
      for (std::size_t i = b; i < e; ++i) {
        const std::size_t fr = order[i];
        const auto* src = data.features.data.data() + fr * n * depth;
        batch.features.data.insert(batch.features.data.end(), src, src + n * depth);
        batch.truth.insert(batch.truth.end(), data.truth.begin() + static_cast<std::ptrdiff_t>(fr * n),
                           data.truth.begin() + static_cast<std::ptrdiff_t>((fr + 1) * n));
      }
      sum += m.loss(batch.features, batch.truth, &grad);
      ++batches;
      auto p = m.params();
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= cfg.learning_rate * grad[i];
    }
    res.loss_history.push_back(sum / static_cast<double>(batches));
  }
  m.round_to_float();
  return res;
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr std::array<char, 8> kMagic{'F', 'E', 'C', 'D', 'I', 'A', '\0', '\n'};

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff));
}

void put_f32(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DiaFormatError("corrupt model file: truncated");
  return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 | std::uint32_t(b[3]) << 24;
}

double get_f32(std::istream& in) {
  const float f = std::bit_cast<float>(get_u32(in));
  if (!std::isfinite(f)) throw DiaFormatError("corrupt model file: non-finite parameter");
  return f;
}

}  // namespace

void save_model(const DiaModel& m, std::ostream& out) {
  const DiaArch& a = m.arch();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kDiaFormatVersion);
  for (std::size_t v : {a.depth, a.kernel1, a.filters1, a.kernel2, a.filters2})
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(a.activation));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.param_count()));
  for (double s : m.input_scale()) put_f32(out, s);
  for (double p : m.params()) put_f32(out, p);
  if (!out) throw std::runtime_error("failed to write model");
}

void save_model(const DiaModel& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_model(m, out);
}

DiaModel load_model(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw DiaFormatError("not a DIA model file");
  const std::uint32_t version = get_u32(in);
  if (version != kDiaFormatVersion)
    throw DiaFormatError("unsupported model version " + std::to_string(version) + " (expected " +
                         std::to_string(kDiaFormatVersion) + ")");
  DiaArch a;
  a.depth = get_u32(in);
  a.kernel1 = get_u32(in);
  a.filters1 = get_u32(in);
  a.kernel2 = get_u32(in);
  a.filters2 = get_u32(in);
  a.activation = static_cast<Activation>(get_u32(in));
  try {
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw DiaFormatError(std::string("corrupt model file: ") + e.what());
  }
  if (a.depth > 1024 || a.filters1 > 4096 || a.filters2 > 4096 || a.kernel1 > 1024 || a.kernel2 > 1024)
    throw DiaFormatError("corrupt model file: implausible architecture");
  const std::uint32_t count = get_u32(in);
  if (count != a.param_count()) throw DiaFormatError("corrupt model file: parameter count does not match architecture");
  DiaModel m(a);
  std::vector<double> scale(a.depth);
  for (auto& s : scale) s = get_f32(in);
  m.set_input_scale(std::move(scale));
  for (auto& p : m.params()) p = get_f32(in);
  if (in.peek() != std::char_traits<char>::eof()) throw DiaFormatError("corrupt model file: trailing bytes");
  return m;
}

DiaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model " + path.string());
  return load_model(in);
}

}  // namespace fec
