#include <doctest.h>

#include "ktt/io.hpp"
#include "ktt/tensor.hpp"
#include "ktt/tucker.hpp"

#include "test_support.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using ktt_test::max_abs_diff;

namespace {

struct CliResult {
  int code = -1;
  std::string text;  // stdout and stderr interleaved
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(KTT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.text.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ktt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// value of the last "key = v" line in the output
double parse_value(const std::string& text, const std::string& key) {
  const std::string needle = key + " = ";
  const std::size_t pos = text.rfind(needle);
  REQUIRE(pos != std::string::npos);
  return std::stod(text.substr(pos + needle.size()));
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(line);
  while (std::getline(in, token, ',')) out.push_back(token);
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("malformed invocations exit nonzero") {
    CHECK(run_cli("").code != 0);
    CHECK(run_cli("compress").code != 0);
    CHECK(run_cli("synth --kind bogus --dims 4x4 -o /dev/null").code != 0);
    CHECK(run_cli("bench").code != 0);
    CHECK(run_cli("error /nonexistent /nonexistent").code != 0);
  }

  TEST_CASE("generate, compress, score, and expand chain together") {
    const fs::path dir = fresh_dir("chain");
    const std::string tensor = (dir / "x.bin").string();
    const std::string bundle = (dir / "bundle").string();
    const std::string rebuilt = (dir / "xhat.bin").string();

    CHECK(run_cli("synth --kind exact-lowrank --dims 16x12x14 --rank 3x2x4 --seed 3 -o " + tensor)
              .code == 0);
    const ktt::DenseTensor x = ktt::read_tensor(tensor);
    CHECK(x.dims() == std::vector<ktt::index_t>{16, 12, 14});

    const CliResult comp = run_cli("compress " + tensor + " -o " + bundle +
                                   " --alg rsthosvd-kron --rank 3x2x4 --oversample 2 --seed 7");
    CHECK(comp.code == 0);
    CHECK(comp.text.find("algorithm = rsthosvd-kron") != std::string::npos);
    CHECK(comp.text.find("core dims = (3,2,4)") != std::string::npos);
    const double reported = parse_value(comp.text, "relative_error");
    CHECK(reported < 1e-8);  // exact low-rank input

    const CliResult err = run_cli("error " + tensor + " " + bundle);
    CHECK(err.code == 0);
    CHECK(parse_value(err.text, "relative_error") == doctest::Approx(reported).epsilon(1e-12));

    CHECK(run_cli("reconstruct " + bundle + " -o " + rebuilt).code == 0);
    const ktt::DenseTensor xhat = ktt::read_tensor(rebuilt);
    CHECK(max_abs_diff(xhat, x) < 1e-7);
  }

  TEST_CASE("reruns produce byte-identical outputs") {
    const fs::path dir = fresh_dir("rerun");
    const std::string args = "synth --kind lowrank-noise --dims 10x9x8 --rank 2x2x2 --seed 5 -o ";
    CHECK(run_cli(args + (dir / "a.bin").string()).code == 0);
    CHECK(run_cli(args + (dir / "b.bin").string()).code == 0);
    CHECK(file_bytes(dir / "a.bin") == file_bytes(dir / "b.bin"));

    const std::string compress = " --alg rhkron-re --rank 2x2x2 --oversample 2 --seed 9 -o ";
    CHECK(run_cli("compress " + (dir / "a.bin").string() + compress + (dir / "c1").string()).code == 0);
    CHECK(run_cli("compress " + (dir / "a.bin").string() + compress + (dir / "c2").string()).code == 0);
    CHECK(file_bytes(dir / "c1" / "core.bin") == file_bytes(dir / "c2" / "core.bin"));
    CHECK(file_bytes(dir / "c1" / "factor_1.bin") == file_bytes(dir / "c2" / "factor_1.bin"));
  }

  TEST_CASE("explicit structured draws fall back with a note on uneven sizes") {
    const fs::path dir = fresh_dir("fallback");
    const std::string tensor = (dir / "x.bin").string();
    CHECK(run_cli("synth --kind geometric --dims 15x15x15 --decay 0.5 --seed 2 -o " + tensor).code == 0);
    const CliResult comp = run_cli("compress " + tensor + " -o " + (dir / "b").string() +
                                   " --alg rsthosvd-kron --rank 3x3x3 --dist srht --seed 4");
    CHECK(comp.code == 0);
    CHECK(comp.text.find("note:") != std::string::npos);
    CHECK(comp.text.find("drew gaussian") != std::string::npos);
  }

  TEST_CASE("simulation ledger balances sends against receives") {
    const fs::path dir = fresh_dir("sim");
    const std::string tensor = (dir / "x.bin").string();
    const std::string report = (dir / "stats.csv").string();
    CHECK(run_cli("synth --kind geometric --dims 8x8x8 --decay 0.5 --seed 6 -o " + tensor).code == 0);

    const CliResult sim = run_cli("simulate " + tensor + " --grid 2x2x2 --rank 2x2x2 --oversample 2" +
                                  " --alg alg12 --mttm is --seed 1 -o " + report);
    CHECK(sim.code == 0);
    CHECK(sim.text.find("algorithm = parallel-rhkron-re") != std::string::npos);
    CHECK(sim.text.find("grid = (2,2,2) (8 procs)") != std::string::npos);

    const std::vector<std::string> lines = csv_lines(report);
    REQUIRE(lines.size() > 1);
    CHECK(lines[0] == "proc,phase,flops,words_sent,words_recv,messages");
    long long sent = 0, recv = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const std::vector<std::string> f = split(lines[i]);
      REQUIRE(f.size() == 6);
      sent += std::stoll(f[3]);
      recv += std::stoll(f[4]);
    }
    CHECK(sent == recv);
    CHECK(sent > 0);
  }

  TEST_CASE("strategy benchmark's predictions equal its measurements") {
    const fs::path dir = fresh_dir("mttm");
    const std::string report = (dir / "mttm.csv").string();
    CHECK(run_cli("bench mttm --n 16 --s 2 --q 2 --d 3 -o " + report).code == 0);
    const std::vector<std::string> lines = csv_lines(report);
    REQUIRE(lines.size() == 3);
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const std::vector<std::string> f = split(lines[i]);
      REQUIRE(f.size() == 13);
      CHECK(f[5] == f[9]);   // flops per processor
      CHECK(f[6] == f[10]);  // first collective payload
    }
  }

  TEST_CASE("shared-contraction benchmark reports the closed forms") {
    const fs::path dir = fresh_dir("dimtree");
    const std::string report = (dir / "dimtree.csv").string();
    CHECK(run_cli("bench dimtree --n 16 --r 2 --d 3 --d 4 -o " + report).code == 0);
    const std::vector<std::string> lines = csv_lines(report);
    REQUIRE(lines.size() == 3);
    const std::vector<std::string> d3 = split(lines[1]);
    REQUIRE(d3.size() == 11);
    CHECK(d3[3] == "38912");
    CHECK(d3[4] == "55296");
    CHECK(d3[8] == "1");       // small enough to actually run
    CHECK(d3[9] == d3[3]);     // measured == predicted
    CHECK(d3[10] == d3[4]);
    const std::vector<std::string> d4 = split(lines[2]);
    CHECK(d4[3] == "606208");
    CHECK(d4[4] == "1196032");
  }

  TEST_CASE("accuracy benchmark writes one row per algorithm") {
    const fs::path dir = fresh_dir("acc");
    const std::string report = (dir / "acc.csv").string();
    CHECK(run_cli("bench accuracy --dims 12x12x12 --decay 0.5 --rank 2x2x2 --oversample 2"
                  " --trials 3 --algs rsthosvd --algs rhkron-re --seed 1 -o " +
                  report)
              .code == 0);
    const std::vector<std::string> lines = csv_lines(report);
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] ==
          "algorithm,distribution,trials,deterministic_error,median_error,max_error,"
          "median_ratio,max_ratio");
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const std::vector<std::string> f = split(lines[i]);
      REQUIRE(f.size() == 8);
      CHECK(f[2] == "3");
      CHECK(std::stod(f[3]) > 0.0);
      CHECK(std::stod(f[5]) >= std::stod(f[4]));  // max >= median
      CHECK(std::stod(f[6]) > 0.0);
    }
  }
}
