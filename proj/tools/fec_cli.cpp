// fec: parity-check optimization, DIA training, simulation and reports for
// short binary BCH codes.

#include <cstdlib>
#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* sub, fec::cli::CommonOptions& c) {
  sub->add_option("--code", c.code, "Code as n,k, e.g. 63,45");
  sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  sub->add_option("--workers", c.workers, "Worker threads (0: all cores); never changes results")
      ->capture_default_str();
  sub->add_option("--data-dir", c.data_dir, "Artifact directory")->envname("FEC_DATA_DIR")->capture_default_str();
  sub->add_option("--out-dir", c.out_dir, "Output directory (default: data dir)");
  sub->add_option("--h-matrix", c.h_matrix, "alist overriding the standard parity-check matrix");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace fec::cli;
  CLI::App app{"Short BCH decoding toolkit"};
  app.set_config("--config", "", "key=value config file; command-line flags take precedence");
  app.set_version_flag("--version", FEC_VERSION);
  app.require_subcommand(1);

  CommonOptions common;
  common.argv.assign(argv, argv + argc);

  OptimizeOptions oo;
  auto* opt = app.add_subcommand("optimize-pcm", "Derive the optimized parity-check matrix H_s");
  add_common(opt, common);
  opt->add_option("--iterations", oo.iterations, "Annealing iterations")->capture_default_str();
  opt->add_option("--t0", oo.t0, "Initial temperature")->capture_default_str();
  opt->add_option("--cooling", oo.cooling, "Geometric cooling factor")->capture_default_str();
  opt->add_option("--rows", oo.rows, "Final row count (default: per-code preset or pruning)");
  opt->add_option("--target-rows", oo.target_rows, "Padded row count (0: 2(n-k))")->capture_default_str();
  opt->add_option("--w-cycles", oo.w_cycles, "Objective weight of 4-cycles")->capture_default_str();
  opt->add_option("--w-colvar", oo.w_colvar, "Objective weight of column-weight variance")->capture_default_str();
  opt->add_option("--w-colfloor", oo.w_colfloor, "Objective weight of the column-weight floor")->capture_default_str();
  opt->add_option("--output,--out", oo.output, "Output alist (default: <out>/BCH_n_k_hs.alist)");

  CollectTrainOptions co;
  auto* col = app.add_subcommand("collect-train", "Collect NMS failures and train the DIA model");
  add_common(col, common);
  col->add_option("--ebn0", co.ebn0, "Collection Eb/N0 in dB")->capture_default_str();
  col->add_option("--failures", co.failures, "Detected failures to collect")->capture_default_str();
  col->add_option("--holdout", co.holdout, "Held-out fraction for the CE report")->capture_default_str();
  col->add_option("--max-frames", co.max_frames, "Frame budget for collection")->capture_default_str();
  col->add_option("--epochs", co.epochs, "Training epochs")->capture_default_str();
  col->add_option("--lr", co.lr, "SGD learning rate")->capture_default_str();
  col->add_option("--batch", co.batch, "Frames per mini-batch")->capture_default_str();
  col->add_option("--iters", co.iters, "NMS iterations")->capture_default_str();
  col->add_option("--alpha", co.alpha, "NMS normalization factor")->capture_default_str();
  col->add_option("--hs", co.hs, "Optimized matrix (default: <data>/BCH_n_k_hs.alist)");
  col->add_option("--model", co.model, "Model output (default: <out>/BCH_n_k_dia.bin)");

  SimulateOptions so;
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo FER/BER sweep");
  add_common(sim, common);
  sim->add_option("--decoder", so.decoder, "Decoder stack")
      ->check(CLI::IsMember({"nms", "nms+osd", "nms+dia+osd", "osd-only", "mrrd"}))
      ->capture_default_str();
  sim->add_option("--ebn0", so.ebn0, "Eb/N0 grid in dB")->delimiter(',')->expected(1, -1);
  sim->add_option("--min-errors", so.min_errors, "Stop after this many final-stage frame errors")
      ->capture_default_str();
  sim->add_option("--max-frames", so.max_frames, "Frame cap per point")->capture_default_str();
  sim->add_option("--order", so.order, "OSD order")->capture_default_str();
  sim->add_option("--iters", so.iters, "NMS iterations")->capture_default_str();
  sim->add_option("--alpha", so.alpha, "NMS normalization factor")->capture_default_str();
  sim->add_option("--mrrd-inner", so.mrrd_inner, "mRRD inner iterations")->capture_default_str();
  sim->add_option("--mrrd-rounds", so.mrrd_rounds, "mRRD rounds")->capture_default_str();
  sim->add_option("--mrrd-branches", so.mrrd_branches, "mRRD branches")->capture_default_str();
  sim->add_option("--hs", so.hs, "Optimized matrix (default: <data>/BCH_n_k_hs.alist)");
  sim->add_option("--model", so.model, "DIA model (default: <data>/BCH_n_k_dia.bin)");
  sim->add_option("--output", so.output, "CSV output (default: <out>/BCH_n_k_<decoder>.csv)");

  ReportOptions ro;
  auto* rep = app.add_subcommand("report", "Matrix statistics and MRB error CDFs");
  add_common(rep, common);
  rep->add_option("--matrices", ro.matrices, "alist files to summarize")->expected(1, -1);
  rep->add_option("--failures", ro.failures, "Failure set for the MRB CDF report");
  rep->add_option("--model", ro.model, "DIA model for the CDF report");
  rep->add_option("--stats-output", ro.stats_output, "Write the statistics CSV here");
  rep->add_option("--cdf-output", ro.cdf_output, "Write the CDF CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (opt->parsed()) return run_optimize(common, oo);
    if (col->parsed()) return run_collect_train(common, co);
    if (sim->parsed()) return run_simulate(common, so);
    if (rep->parsed()) return run_report(common, ro);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
