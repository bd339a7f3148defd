#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fec/bitmat.hpp"
#include "fec/dia.hpp"
#include "fec/sim.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  static fs::path root() {
    static const fs::path dir = [] {
      fs::path d = fs::temp_directory_path() / ("fec_cli_test_" + std::to_string(::getpid()));
      fs::remove_all(d);
      fs::create_directories(d);
      return d;
    }();
    return dir;
  }

  static RunResult run(const std::string& args, const std::string& env = "") {
    static int counter = 0;
    const fs::path out = root() / ("out" + std::to_string(counter) + ".txt");
    const fs::path err = root() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = env + " '" FEC_CLI_PATH "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  // A data directory holding an optimized (63,45) matrix, built once.
  static fs::path artifacts() {
    static const fs::path dir = [] {
      const fs::path d = root() / "artifacts";
      const auto r = run("optimize-pcm --code 63,45 --seed 7 --data-dir '" + d.string() + "'");
      EXPECT_EQ(r.code, 0) << r.err;
      return d;
    }();
    return dir;
  }

  static std::string data_dir() { return std::string(FEC_SOURCE_DIR) + "/data"; }

  friend class CleanupEnv;
};

class CleanupEnv : public ::testing::Environment {
 public:
  void TearDown() override { fs::remove_all(CliTest::root()); }
};

const auto* const cleanup = ::testing::AddGlobalTestEnvironment(new CleanupEnv);

TEST_F(CliTest, VersionFlag) {
  const auto r = run("--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find('.'), std::string::npos) << r.out;
}

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(run("").code, 2); }

TEST_F(CliTest, MissingCodeIsUsageError) {
  const auto r = run("optimize-pcm --seed 7");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--code"), std::string::npos) << r.err;
}

TEST_F(CliTest, MalformedAndUnsupportedCodes) {
  EXPECT_EQ(run("optimize-pcm --code 63").code, 2);
  EXPECT_EQ(run("optimize-pcm --code 63,x").code, 2);
  EXPECT_EQ(run("optimize-pcm --code 63,44").code, 2);
}

TEST_F(CliTest, UnknownDecoderListsStacks) {
  const auto r = run("simulate --code 63,45 --decoder belief --ebn0 3.0");
  EXPECT_EQ(r.code, 2);
  for (const char* s : {"nms", "nms+osd", "nms+dia+osd", "osd-only", "mrrd"})
    EXPECT_NE(r.err.find(s), std::string::npos) << s << "\n" << r.err;
}

TEST_F(CliTest, ZeroFailuresIsExplicitError) {
  const auto r = run("collect-train --code 63,45 --failures 0 --data-dir '" + artifacts().string() + "'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--failures"), std::string::npos) << r.err;
}

TEST_F(CliTest, MissingArtifactIsNamed) {
  const fs::path empty = root() / "empty";
  fs::create_directories(empty);
  const auto r = run("simulate --code 63,45 --decoder nms --ebn0 3.0 --data-dir '" + empty.string() + "'");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("BCH_63_45_hs.alist"), std::string::npos) << r.err;
}

TEST_F(CliTest, OptimizeWritesRankEighteenMatrixAndStats) {
  const fs::path alist = artifacts() / "BCH_63_45_hs.alist";
  ASSERT_TRUE(fs::exists(alist));
  const auto h = fec::read_alist(alist);
  EXPECT_EQ(h.cols(), 63u);
  EXPECT_EQ(fec::rank(h), 18u);
  EXPECT_TRUE(fs::exists(artifacts() / "BCH_63_45_hs.stats.csv"));
  EXPECT_TRUE(fs::exists(artifacts() / "BCH_63_45_hs.alist.manifest.json"));
  const std::string stats = slurp(artifacts() / "BCH_63_45_hs.stats.csv");
  EXPECT_EQ(stats.rfind("matrix,rows,cols,four_cycles", 0), 0u) << stats;
  EXPECT_NE(stats.find("\nH,18,63,7251,"), std::string::npos) << stats;
}

TEST_F(CliTest, OptimizeSameSeedIsByteIdentical) {
  const fs::path a = root() / "opt_a", b = root() / "opt_b";
  ASSERT_EQ(run("optimize-pcm --code 63,45 --seed 7 --out-dir '" + a.string() + "'").code, 0);
  ASSERT_EQ(run("optimize-pcm --code 63,45 --seed 7 --out-dir '" + b.string() + "'").code, 0);
  for (const char* f : {"BCH_63_45_hs.alist", "BCH_63_45_hs.stats.csv"}) {
    const std::string x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
  }
  EXPECT_EQ(slurp(a / "BCH_63_45_hs.alist"), slurp(artifacts() / "BCH_63_45_hs.alist"));
}

TEST_F(CliTest, OutFlagNamesTheAlist) {
  const fs::path target = root() / "named" / "hs.alist";
  ASSERT_EQ(run("optimize-pcm --code 63,45 --seed 7 --out '" + target.string() + "'").code, 0);
  EXPECT_EQ(slurp(target), slurp(artifacts() / "BCH_63_45_hs.alist"));
}

TEST_F(CliTest, ReportReproducesStandardMatrixTable) {
  const std::string d = data_dir();
  const fs::path csv = root() / "table.csv";
  const auto r = run("report --matrices '" + d + "/BCH_63_36.alist' '" + d + "/BCH_63_39.alist' '" + d +
                     "/BCH_63_45.alist' --stats-output '" + csv.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(csv), r.out);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "matrix,rows,cols,four_cycles,col_min,col_max,col_mean,col_std,row_min,row_max,row_mean,row_std,rank");
  struct Want {
    const char* name;
    int cycles, row_weight;
  };
  for (const Want& w : {Want{"BCH_63_36", 5909, 18}, Want{"BCH_63_39", 32625, 28}, Want{"BCH_63_45", 7251, 24}}) {
    ASSERT_TRUE(std::getline(in, line));
    std::istringstream row(line);
    std::vector<std::string> cells;
    for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 13u) << line;
    EXPECT_EQ(cells[0], w.name);
    EXPECT_EQ(std::stoi(cells[3]), w.cycles) << line;
    EXPECT_EQ(std::stoi(cells[8]), w.row_weight) << line;
    EXPECT_EQ(std::stoi(cells[9]), w.row_weight) << line;
  }
  EXPECT_FALSE(std::getline(in, line));
}

TEST_F(CliTest, ReportEmptyFailureSetIsHeaderOnly) {
  const fs::path empty = root() / "no_failures.bin";
  fec::save_failures(fec::DiaDataset{}, empty);
  const auto r = run("report --code 63,45 --failures '" + empty.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "delta,received_pre,received_post\n");
}

TEST_F(CliTest, ReportFailuresNeedsCode) {
  const fs::path empty = root() / "no_failures2.bin";
  fec::save_failures(fec::DiaDataset{}, empty);
  EXPECT_EQ(run("report --failures '" + empty.string() + "'").code, 2);
}

TEST_F(CliTest, CollectTrainSmokeAndCdfReport) {
  const fs::path out = root() / "trained";
  const auto r = run("collect-train --code 63,45 --failures 100 --epochs 5 --data-dir '" + artifacts().string() +
                     "' --out-dir '" + out.string() + "' --workers 2");
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path model = out / "BCH_63_45_dia.bin";
  ASSERT_TRUE(fs::exists(model));
  EXPECT_NO_THROW(fec::load_model(model));
  EXPECT_TRUE(fs::exists(out / "BCH_63_45_dia.bin.manifest.json"));

  // Loss history: one row per epoch, last below first.
  std::istringstream loss(slurp(out / "BCH_63_45_dia.loss.csv"));
  std::string line;
  std::getline(loss, line);
  EXPECT_EQ(line, "epoch,train_loss");
  std::vector<double> hist;
  while (std::getline(loss, line)) hist.push_back(std::stod(line.substr(line.find(',') + 1)));
  ASSERT_EQ(hist.size(), 5u);
  EXPECT_LT(hist.back(), hist.front());

  const std::string ce = slurp(out / "BCH_63_45_dia.ce.csv");
  EXPECT_EQ(ce.rfind("source,split,frames,cross_entropy\nreceived,heldout,", 0), 0u) << ce;
  EXPECT_NE(ce.find("\niter4,heldout,"), std::string::npos) << ce;
  EXPECT_NE(ce.find("\ndia,heldout,"), std::string::npos) << ce;

  const auto rep = run("report --code 63,45 --failures '" + (out / "BCH_63_45_dia.heldout.bin").string() +
                       "' --model '" + model.string() + "'");
  ASSERT_EQ(rep.code, 0) << rep.err;
  std::istringstream cdf(rep.out);
  std::getline(cdf, line);
  EXPECT_EQ(line, "delta,received_pre,received_post,dia_pre,dia_post");
  std::vector<double> prev(4, 0.0), last;
  std::size_t rows = 0;
  while (std::getline(cdf, line)) {
    std::istringstream row(line);
    std::string c;
    std::getline(row, c, ',');
    EXPECT_EQ(std::stoul(c), rows);
    std::vector<double> v;
    while (std::getline(row, c, ',')) v.push_back(std::stod(c));
    ASSERT_EQ(v.size(), 4u);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_GE(v[j], prev[j]) << line;
    prev = last = v;
    ++rows;
  }
  EXPECT_EQ(rows, 46u);
  for (double v : last) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST_F(CliTest, SimulateWritesCsvAndManifest) {
  const fs::path out = root() / "sim";
  const auto r = run("simulate --code 63,45 --decoder nms+osd --ebn0 3.0,3.5 --min-errors 10 --max-frames 2000"
                     " --data-dir '" + artifacts().string() + "' --out-dir '" + out.string() + "'");
  ASSERT_EQ(r.code, 0) << r.err;
  const fs::path csv = out / "BCH_63_45_nms_osd.csv";
  ASSERT_TRUE(fs::exists(csv));
  EXPECT_EQ(slurp(csv), r.out);
  EXPECT_TRUE(fs::exists(out / "BCH_63_45_nms_osd.csv.manifest.json"));
  std::istringstream in(r.out);
  const auto points = fec::parse_curves(in);
  ASSERT_EQ(points.size(), 2u);
  EXPECT_DOUBLE_EQ(points[0].ebn0_db, 3.0);
  EXPECT_DOUBLE_EQ(points[1].ebn0_db, 3.5);
}

TEST_F(CliTest, DataDirFromEnvironment) {
  const auto r = run("simulate --code 63,45 --decoder nms --ebn0 3.0 --min-errors 5 --max-frames 500 --out-dir '" +
                         (root() / "env").string() + "'",
                     "FEC_DATA_DIR='" + artifacts().string() + "'");
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  const fs::path cfg = root() / "sim.conf";
  std::ofstream(cfg) << "[simulate]\ndecoder=nms\nmin-errors=5\nmax-frames=500\nebn0=3.0\n";
  const fs::path a = root() / "cfg_a.csv", b = root() / "cfg_b.csv";
  const std::string base =
      "--config '" + cfg.string() + "' simulate --code 63,45 --data-dir '" + artifacts().string() + "'";
  ASSERT_EQ(run(base + " --output '" + a.string() + "'").code, 0);
  ASSERT_EQ(run(base + " --max-frames 1000 --min-errors 1000 --output '" + b.string() + "'").code, 0);
  std::istringstream ia(slurp(a)), ib(slurp(b));
  const auto pa = fec::parse_curves(ia), pb = fec::parse_curves(ib);
  ASSERT_EQ(pa.size(), 1u);
  ASSERT_EQ(pb.size(), 1u);
  EXPECT_LE(pa[0].frames, 500u);
  EXPECT_EQ(pb[0].frames, 1000u);
}

}  // namespace
