#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fec::cli {

/// Bad or missing arguments detected after parsing; exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CommonOptions {
  std::string code;  // "n,k"
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir;  // empty: data_dir
  std::filesystem::path h_matrix;  // optional standard-H override
  std::vector<std::string> argv;   // recorded in the manifest
};

struct OptimizeOptions {
  std::size_t iterations = 20000;
  double t0 = 1.0;
  double cooling = 0.995;
  std::optional<std::size_t> rows;
  std::size_t target_rows = 0;
  double w_cycles = 1.0, w_colvar = 1.0, w_colfloor = 1.0;
  std::filesystem::path output;
};

struct CollectTrainOptions {
  double ebn0 = 2.6;
  std::size_t failures = 10000;
  double holdout = 0.2;
  std::size_t max_frames = 10'000'000;
  std::size_t epochs = 20;
  double lr = 1e-2;
  std::size_t batch = 100;
  std::size_t iters = 4;
  double alpha = 0.78;
  std::filesystem::path hs;
  std::filesystem::path model;
};

struct SimulateOptions {
  std::string decoder = "nms+dia+osd";
  std::vector<double> ebn0{3.0};
  std::size_t min_errors = 100;
  std::size_t max_frames = 200000;
  std::size_t order = 1;
  std::size_t iters = 4;
  double alpha = 0.78;
  std::size_t mrrd_inner = 15, mrrd_rounds = 50, mrrd_branches = 1;
  std::filesystem::path hs;
  std::filesystem::path model;
  std::filesystem::path output;
};

struct ReportOptions {
  std::vector<std::filesystem::path> matrices;
  std::filesystem::path failures;
  std::filesystem::path model;
  std::filesystem::path stats_output;
  std::filesystem::path cdf_output;
};

int run_optimize(const CommonOptions& common, const OptimizeOptions& opt);
int run_collect_train(const CommonOptions& common, const CollectTrainOptions& opt);
int run_simulate(const CommonOptions& common, const SimulateOptions& opt);
int run_report(const CommonOptions& common, const ReportOptions& opt);

}  // namespace fec::cli
