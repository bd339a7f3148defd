#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fec/bch.hpp"
#include "fec/bitmat.hpp"
#include "fec/dia.hpp"
#include "fec/osd.hpp"
#include "fec/pcm_opt.hpp"
#include "fec/sim.hpp"

#ifndef FEC_VERSION
#define FEC_VERSION "0.0.0"
#endif

namespace fec::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

std::pair<std::size_t, std::size_t> parse_code(const std::string& s) {
  if (s.empty()) throw UsageError("--code n,k is required");
  std::size_t n = 0, k = 0;
  char comma = 0;
  std::istringstream in(s);
  if (!(in >> n >> comma >> k) || comma != ',' || !in.eof() || k == 0 || k >= n)
    throw UsageError("--code expects n,k (for example 63,45), got '" + s + "'");
  return {n, k};
}

std::string code_tag(const Code& c) { return "BCH_" + std::to_string(c.n) + "_" + std::to_string(c.k); }

Code load_code(const CommonOptions& common) {
  const auto [n, k] = parse_code(common.code);
  Code code;
  try {
    code = build_code(n, k);
  } catch (const UnsupportedCode& e) {
    throw UsageError(e.what());
  }
  if (!common.h_matrix.empty()) override_std_matrix(code, read_alist(common.h_matrix));
  return code;
}

fs::path out_dir(const CommonOptions& c) {
  fs::path d = c.out_dir.empty() ? c.data_dir : c.out_dir;
  fs::create_directories(d);
  return d;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw std::runtime_error("missing " + what + ": " + p.string());
}

fs::path hs_path(const CommonOptions& c, const Code& code, const fs::path& given) {
  return given.empty() ? c.data_dir / (code_tag(code) + "_hs.alist") : given;
}

fs::path model_path(const CommonOptions& c, const Code& code, const fs::path& given) {
  return given.empty() ? c.data_dir / (code_tag(code) + "_dia.bin") : given;
}

void load_hs(Code& code, const fs::path& p) {
  require_file(p, "optimized parity-check matrix (run optimize-pcm first)");
  BitMatrix h = read_alist(p);
  if (h.cols() != code.n) throw std::runtime_error(p.string() + " has " + std::to_string(h.cols()) + " columns");
  if (!code.G.multiply(h.transpose()).is_zero())
    throw std::runtime_error(p.string() + " is not a parity-check matrix of " + code_tag(code));
  code.H_opt = std::move(h);
}

std::string fnv1a64_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

class Manifest {
 public:
  Manifest(std::string command, const CommonOptions& c) {
    j_["command"] = std::move(command);
    j_["tool_version"] = FEC_VERSION;
    j_["argv"] = c.argv;
    j_["seeds"] = {{"master", c.seed}};
    j_["config"] = ordered_json::object();
    j_["config"]["code"] = c.code;
    j_["config"]["seed"] = c.seed;
    j_["config"]["workers"] = c.workers;
    j_["config"]["data_dir"] = c.data_dir.string();
    j_["config"]["out_dir"] = c.out_dir.string();
    j_["config"]["h_matrix"] = c.h_matrix.string();
    j_["inputs"] = ordered_json::array();
    j_["outputs"] = ordered_json::array();
    if (!c.h_matrix.empty()) input(c.h_matrix);
  }
  template <typename T>
  void config(const std::string& key, const T& v) {
    j_["config"][key] = v;
  }
  void seed(const std::string& key, std::uint64_t v) { j_["seeds"][key] = v; }
  void input(const fs::path& p) { j_["inputs"].push_back({{"path", p.string()}, {"fnv1a64", fnv1a64_file(p)}}); }
  void output(const fs::path& p) { j_["outputs"].push_back(p.string()); }
  /// Written next to `primary` as <primary>.manifest.json.
  fs::path write(const fs::path& primary) const {
    fs::path p = primary;
    p += ".manifest.json";
    std::ofstream out(p);
    out << j_.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write manifest " + p.string());
    return p;
  }

 private:
  ordered_json j_;
};

void write_stats_header(std::ostream& out) {
  out << "matrix,rows,cols,four_cycles,col_min,col_max,col_mean,col_std,row_min,row_max,row_mean,row_std,rank\n";
}

void write_stats_row(std::ostream& out, const std::string& name, const MatrixStats& s) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%zu,%llu,%zu,%zu,%.6g,%.6g,%zu,%zu,%.6g,%.6g,%zu", s.rows, s.cols,
                static_cast<unsigned long long>(s.four_cycles), s.col_weight_min, s.col_weight_max, s.col_weight_mean,
                s.col_weight_std, s.row_weight_min, s.row_weight_max, s.row_weight_mean, s.row_weight_std, s.rank);
  out << name << ',' << buf << '\n';
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot open " + p.string() + " for writing");
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

int run_optimize(const CommonOptions& common, const OptimizeOptions& opt) {
  Code code = load_code(common);
  OptimizerConfig cfg = OptimizerConfig::for_code(code);
  cfg.sa_iterations = opt.iterations;
  cfg.sa_initial_temp = opt.t0;
  cfg.sa_cooling = opt.cooling;
  cfg.target_rows = opt.target_rows;
  if (opt.rows) cfg.final_rows = *opt.rows;
  cfg.weight_cycles = opt.w_cycles;
  cfg.weight_colvar = opt.w_colvar;
  cfg.weight_colfloor = opt.w_colfloor;
  cfg.seed = derive_seed(common.seed, "optimize-pcm");
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  DerivationReport rep;
  const BitMatrix hs = derive(code, cfg, &rep);

  const fs::path alist = opt.output.empty() ? out_dir(common) / (code_tag(code) + "_hs.alist") : opt.output;
  if (alist.has_parent_path()) fs::create_directories(alist.parent_path());
  write_alist(hs, alist);
  fs::path stats = alist;
  stats.replace_extension(".stats.csv");
  {
    auto out = open_out(stats);
    write_stats_header(out);
    write_stats_row(out, "H", rep.before);
    write_stats_row(out, "H_s", rep.after);
  }

  Manifest m("optimize-pcm", common);
  m.config("sa_iterations", cfg.sa_iterations);
  m.config("sa_initial_temp", cfg.sa_initial_temp);
  m.config("sa_cooling", cfg.sa_cooling);
  m.config("target_rows", cfg.target_rows);
  m.config("final_rows", cfg.final_rows ? ordered_json(*cfg.final_rows) : ordered_json());
  m.config("weight_cycles", cfg.weight_cycles);
  m.config("weight_colvar", cfg.weight_colvar);
  m.config("weight_colfloor", cfg.weight_colfloor);
  m.seed("optimize-pcm", cfg.seed);
  m.output(alist);
  m.output(stats);
  m.write(alist);

  std::cout << code_tag(code) << ": H " << rep.before.rows << "x" << rep.before.cols << " cycles "
            << rep.before.four_cycles << " -> H_s " << rep.after.rows << "x" << rep.after.cols << " cycles "
            << rep.after.four_cycles << " rank " << rep.after.rank << "\n"
            << "wrote " << alist.string() << "\n";
  return 0;
}

int run_collect_train(const CommonOptions& common, const CollectTrainOptions& opt) {
  if (opt.failures == 0) throw UsageError("--failures must be at least 1");
  if (!(opt.holdout >= 0.0 && opt.holdout < 1.0)) throw UsageError("--holdout must lie in [0, 1)");
  Code code = load_code(common);
  const fs::path hs = hs_path(common, code, opt.hs);
  load_hs(code, hs);

  SimConfig sc;
  sc.nms.alpha = opt.alpha;
  sc.nms.max_iter = opt.iters;
  sc.perm = PermBlockConfig::for_length(code.n);
  sc.seed = common.seed;
  sc.workers = common.workers;
  FailureSet set = collect_failures(code, sc, opt.ebn0, opt.failures, opt.max_frames);

  std::size_t n_hold = static_cast<std::size_t>(static_cast<double>(opt.failures) * opt.holdout);
  const std::size_t n_train = opt.failures - n_hold;
  const DiaDataset train_set = set.data.slice(0, n_train);
  const DiaDataset hold_set = set.data.slice(n_train, opt.failures);

  TrainConfig tc;
  tc.epochs = opt.epochs;
  tc.learning_rate = opt.lr;
  tc.batch_frames = opt.batch;
  tc.seed = derive_seed(common.seed, "collect-train");
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  DiaArch arch;
  arch.depth = opt.iters + 1;
  const TrainResult res = train(DiaModel::random(arch, derive_seed(common.seed, "dia-init")), train_set, tc);

  const fs::path dir = out_dir(common);
  const fs::path model = opt.model.empty() ? dir / (code_tag(code) + "_dia.bin") : opt.model;
  if (model.has_parent_path()) fs::create_directories(model.parent_path());
  save_model(res.model, model);
  fs::path stem = model;
  stem.replace_extension();
  const fs::path loss_csv = stem.string() + ".loss.csv";
  const fs::path ce_csv = stem.string() + ".ce.csv";
  const fs::path fail_bin = stem.string() + ".heldout.bin";
  {
    auto out = open_out(loss_csv);
    out << "epoch,train_loss\n";
    for (std::size_t e = 0; e < res.loss_history.size(); ++e) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%zu,%.9g\n", e + 1, res.loss_history[e]);
      out << buf;
    }
  }
  const DiaDataset& eval = hold_set.frames() ? hold_set : train_set;
  const std::string split = hold_set.frames() ? "heldout" : "train";
  double ce_last = 0.0, ce_dia = 0.0;
  {
    auto out = open_out(ce_csv);
    out << "source,split,frames,cross_entropy\n";
    for (std::size_t d = 0; d <= opt.iters; ++d) {
      const double ce = column_cross_entropy(eval, d);
      if (d == opt.iters) ce_last = ce;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s,%s,%zu,%.9g\n", d == 0 ? "received" : ("iter" + std::to_string(d)).c_str(),
                    split.c_str(), eval.frames(), ce);
      out << buf;
    }
    ce_dia = cross_entropy(res.model.forward(eval.features), eval.truth);
    char buf[128];
    std::snprintf(buf, sizeof buf, "dia,%s,%zu,%.9g\n", split.c_str(), eval.frames(), ce_dia);
    out << buf;
  }
  save_failures(eval, fail_bin);

  Manifest m("collect-train", common);
  m.input(hs);
  m.config("ebn0_db", opt.ebn0);
  m.config("failures", opt.failures);
  m.config("holdout", opt.holdout);
  m.config("max_frames", opt.max_frames);
  m.config("epochs", opt.epochs);
  m.config("learning_rate", opt.lr);
  m.config("batch_frames", opt.batch);
  m.config("nms_iterations", opt.iters);
  m.config("alpha", opt.alpha);
  m.config("frames_simulated", set.frames_simulated);
  m.seed("collect", derive_seed(common.seed, "collect"));
  m.seed("train", tc.seed);
  for (const auto& p : {model, loss_csv, ce_csv, fail_bin}) m.output(p);
  m.write(model);

  std::cout << "collected " << opt.failures << " failures in " << set.frames_simulated << " frames at " << opt.ebn0
            << " dB; " << split << " CE iter" << opt.iters << " " << ce_last << ", DIA " << ce_dia << "\n"
            << "wrote " << model.string() << "\n";
  return 0;
}

int run_simulate(const CommonOptions& common, const SimulateOptions& opt) {
  const auto stack = parse_stack(opt.decoder);
  if (!stack) throw UsageError("unknown decoder '" + opt.decoder + "'; valid stacks: " + stack_names());
  if (opt.ebn0.empty()) throw UsageError("--ebn0 needs at least one value");
  Code code = load_code(common);
  Manifest m("simulate", common);

  const bool needs_nms = *stack == DecoderStack::kNms || *stack == DecoderStack::kNmsOsd ||
                         *stack == DecoderStack::kNmsDiaOsd;
  if (needs_nms) {
    const fs::path hs = hs_path(common, code, opt.hs);
    load_hs(code, hs);
    m.input(hs);
  }
  std::optional<DiaModel> model;
  if (*stack == DecoderStack::kNmsDiaOsd) {
    const fs::path mp = model_path(common, code, opt.model);
    require_file(mp, "DIA model (run collect-train first)");
    model = load_model(mp);
    m.input(mp);
  }

  SimConfig sc;
  sc.stack = *stack;
  sc.nms.alpha = opt.alpha;
  sc.nms.max_iter = opt.iters;
  sc.perm = PermBlockConfig::for_length(code.n);
  sc.osd_order = opt.order;
  sc.mrrd = MrrdConfig{opt.mrrd_inner, opt.mrrd_rounds, opt.mrrd_branches};
  sc.stop.min_errors = opt.min_errors;
  sc.stop.max_frames = opt.max_frames;
  sc.seed = common.seed;
  sc.workers = common.workers;
  try {
    sc.nms.validate();
    sc.mrrd.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const Simulator sim(code, sc, model ? &*model : nullptr);
  const auto points = sim.run(opt.ebn0);

  std::string name = std::string(stack_name(*stack));
  for (auto& ch : name)
    if (ch == '+') ch = '_';
  const fs::path csv = opt.output.empty() ? out_dir(common) / (code_tag(code) + "_" + name + ".csv") : opt.output;
  if (csv.has_parent_path()) fs::create_directories(csv.parent_path());
  emit_curves(points, csv);

  m.config("decoder", opt.decoder);
  m.config("ebn0_db", opt.ebn0);
  m.config("min_errors", opt.min_errors);
  m.config("max_frames", opt.max_frames);
  m.config("osd_order", opt.order);
  m.config("nms_iterations", opt.iters);
  m.config("alpha", opt.alpha);
  m.config("mrrd", std::vector<std::size_t>{opt.mrrd_inner, opt.mrrd_rounds, opt.mrrd_branches});
  m.config("chunk_frames", sc.chunk_frames);
  m.output(csv);
  m.write(csv);

  emit_curves(points, std::cout);
  return 0;
}

int run_report(const CommonOptions& common, const ReportOptions& opt) {
  Manifest m("report", common);
  fs::path primary;

  std::vector<std::pair<std::string, BitMatrix>> mats;
  for (const auto& p : opt.matrices) {
    require_file(p, "matrix");
    mats.emplace_back(p.stem().string(), read_alist(p));
    m.input(p);
  }
  const bool want_cdf = !opt.failures.empty();
  std::optional<Code> code;
  if (!common.code.empty()) code = load_code(common);
  if (mats.empty() && !want_cdf) {
    if (!code) throw UsageError("report needs --matrices, --failures, or --code");
    mats.emplace_back(code_tag(*code) + "_H", code->H_std);
    const fs::path hs = hs_path(common, *code, {});
    if (fs::exists(hs)) {
      mats.emplace_back(code_tag(*code) + "_H_s", read_alist(hs));
      m.input(hs);
    }
  }

  if (!mats.empty()) {
    std::ostringstream buf;
    write_stats_header(buf);
    for (const auto& [name, h] : mats) write_stats_row(buf, name, stats(h));
    if (!opt.stats_output.empty()) {
      if (opt.stats_output.has_parent_path()) fs::create_directories(opt.stats_output.parent_path());
      open_out(opt.stats_output) << buf.str();
      m.output(opt.stats_output);
      primary = opt.stats_output;
    }
    std::cout << buf.str();
  }

  if (want_cdf) {
    if (!code) throw UsageError("--failures needs --code for the basis computation");
    require_file(opt.failures, "failure set");
    const DiaDataset data = load_failures(opt.failures);
    m.input(opt.failures);
    if (data.frames() && data.features.n != code->n)
      throw std::runtime_error("failure set length does not match " + code_tag(*code));
    std::optional<DiaModel> model;
    if (!opt.model.empty()) {
      require_file(opt.model, "DIA model");
      model = load_model(opt.model);
      m.input(opt.model);
    }
    std::vector<MrbSample> raw, dia;
    std::vector<double> scores;
    if (model && data.frames()) scores = model->forward(data.features);
    for (std::size_t f = 0; f < data.frames(); ++f) {
      MrbSample s;
      s.truth.assign(data.truth.begin() + static_cast<std::ptrdiff_t>(f * code->n),
                     data.truth.begin() + static_cast<std::ptrdiff_t>((f + 1) * code->n));
      s.reliabilities.resize(code->n);
      for (std::size_t i = 0; i < code->n; ++i) s.reliabilities[i] = data.features.at(f, i, 0);
      raw.push_back(s);
      if (model) {
        for (std::size_t i = 0; i < code->n; ++i) s.reliabilities[i] = scores[f * code->n + i];
        dia.push_back(std::move(s));
      }
    }
    const MrbErrorCdf cr = mrb_error_histogram(*code, raw);
    std::ostringstream buf;
    buf << "delta,received_pre,received_post";
    if (model) buf << ",dia_pre,dia_post";
    buf << '\n';
    if (cr.samples) {
      const MrbErrorCdf cd = model ? mrb_error_histogram(*code, dia) : MrbErrorCdf{};
      for (std::size_t d = 0; d < cr.pre.size(); ++d) {
        char line[160];
        std::snprintf(line, sizeof line, "%zu,%.9g,%.9g", d, cr.pre[d], cr.post[d]);
        buf << line;
        if (model) {
          std::snprintf(line, sizeof line, ",%.9g,%.9g", cd.pre[d], cd.post[d]);
          buf << line;
        }
        buf << '\n';
      }
    }
    if (!opt.cdf_output.empty()) {
      if (opt.cdf_output.has_parent_path()) fs::create_directories(opt.cdf_output.parent_path());
      open_out(opt.cdf_output) << buf.str();
      m.output(opt.cdf_output);
      if (primary.empty()) primary = opt.cdf_output;
    }
    std::cout << buf.str();
  }
  if (!primary.empty()) m.write(primary);
  return 0;
}

}  // namespace fec::cli
