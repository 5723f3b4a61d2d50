#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

fs::path work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "relaxctl_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

CliResult run_cli(const std::string& args) {
  const fs::path out_file = work_dir() / "out.txt";
  const std::string cmd =
      std::string(RELAXCTL_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(out_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  int code = -1;
  if (WIFEXITED(status)) code = WEXITSTATUS(status);
  return {code, ss.str()};
}

std::string write_network(const std::string& name, const std::string& contents) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << contents;
  return p.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kChain2 = "n = 2; model = \"XX\"; control = [0]; edges = [[0,1,1.0]]\n";
const std::string kPath3End =
    "n = 3; model = \"XX\"; control = [0]; edges = [[0,1,1.0],[1,2,1.0]]\n";
const std::string kPath3Mid =
    "n = 3; model = \"XX\"; control = [1]; edges = [[0,1,1.0],[1,2,1.0]]\n";
const std::string kPath5 =
    "n = 5; model = \"XX\"; control = [0]; "
    "edges = [[0,1,1.0],[1,2,1.0],[2,3,1.0],[3,4,1.0]]\n";
const std::string kStarLeaf =
    "n = 4; model = \"XX\"; control = [1]; edges = [[0,1,1.0],[0,2,1.0],[0,3,1.0]]\n";

constexpr const char* kPiHalf = "1.5707963267948966";

}  // namespace

TEST_CASE("check certifies the five-site path from its end") {
  const auto net = write_network("path5.net", kPath5);
  const CliResult res = run_cli("check " + net);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("BWWWW\n") != std::string::npos);
  REQUIRE(res.output.find("BBBBB\n") != std::string::npos);
  REQUIRE(res.output.find("CERTIFIED") != std::string::npos);
}

TEST_CASE("check rejects the middle-controlled path with exit 2") {
  const auto net = write_network("path3mid.net", kPath3Mid);
  const CliResult res = run_cli("check " + net);
  REQUIRE(res.exit_code == 2);
  REQUIRE(res.output.find("NOT CERTIFIED") != std::string::npos);
}

TEST_CASE("check --oracle reports the failing condition with a witness") {
  const auto net = write_network("star_leaf.net", kStarLeaf);
  const CliResult res = run_cli("check " + net + " --oracle");
  REQUIRE(res.exit_code == 2);
  REQUIRE(res.output.find("NOT CERTIFIED") != std::string::npos);
  REQUIRE(res.output.find("condition ii: FAILS") != std::string::npos);
  REQUIRE(res.output.find("witness eigenvalue: 0.0000000") != std::string::npos);
}

TEST_CASE("check --oracle --disorder still fails for a symmetry-protected case") {
  const auto net = write_network("path3mid2.net", kPath3Mid);
  const CliResult res = run_cli("check " + net + " --oracle --disorder 11");
  REQUIRE(res.exit_code == 2);
  REQUIRE(res.output.find("disorder: seed=11 scale=0.001") != std::string::npos);
  REQUIRE(res.output.find("condition ii: FAILS") != std::string::npos);
}

TEST_CASE("check --minimal lists the path ends") {
  const auto net = write_network("path5b.net", kPath5);
  const CliResult res = run_cli("check " + net + " --minimal 1");
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("{0}") != std::string::npos);
  REQUIRE(res.output.find("{4}") != std::string::npos);
}

TEST_CASE("check --dot writes a graph file") {
  const auto net = write_network("path3end.net", kPath3End);
  const std::string dot = (work_dir() / "g.dot").string();
  const CliResult res = run_cli("check " + net + " --dot " + dot);
  REQUIRE(res.exit_code == 0);
  const std::string contents = slurp(dot);
  REQUIRE(contents.find("graph network {") != std::string::npos);
  REQUIRE(contents.find("0 -- 1;") != std::string::npos);
}

TEST_CASE("channel reports the swap-point and quarter-point spectra") {
  const auto net = write_network("chain2.net", kChain2);

  const CliResult swap = run_cli("channel " + net + " --time " + kPiHalf);
  REQUIRE(swap.exit_code == 0);
  REQUIRE(swap.output.find("mixing: yes, kappa: 0.0000000, purity: 1.0000000") !=
          std::string::npos);

  const CliResult quarter = run_cli("channel " + net + " --time 0.7853981633974483");
  REQUIRE(quarter.exit_code == 0);
  REQUIRE(quarter.output.find("kappa: 0.7071068") != std::string::npos);

  const CliResult frozen = run_cli("channel " + net + " --time 0");
  REQUIRE(frozen.exit_code == 0);
  REQUIRE(frozen.output.find("mixing: no") != std::string::npos);
}

TEST_CASE("download and upload are perfect at the swap point") {
  const auto net = write_network("chain2b.net", kChain2);
  const std::string args = " --time " + std::string(kPiHalf) + " --steps 1 --state basis:1";

  const CliResult down = run_cli("download " + net + args);
  REQUIRE(down.exit_code == 0);
  REQUIRE(down.output.find("F_d = 1.0000000") != std::string::npos);
  REQUIRE(down.output.find("bound_eq11 = 1.0000000") != std::string::npos);

  const CliResult up = run_cli("upload " + net + args);
  REQUIRE(up.exit_code == 0);
  REQUIRE(up.output.find("F_up = 1.0000000") != std::string::npos);
}

TEST_CASE("download sweep writes the convergence CSV") {
  const auto net = write_network("path3sweep.net", kPath3End);
  const std::string csv = (work_dir() / "sweep.csv").string();
  const CliResult res =
      run_cli("download " + net + " --time 1 --steps 5 --state random:7 --csv " + csv);
  REQUIRE(res.exit_code == 0);
  // L = 1 is exactly degenerate here (two excitations cannot drain through
  // a one-qubit control in one step), so the sweep starts at L = 2.
  REQUIRE(res.output.find("sweep: L=1 skipped") != std::string::npos);

  const std::string contents = slurp(csv);
  REQUIRE(contents.find("# manifest: command=download") == 0);
  REQUIRE(contents.find("L,eta,one_minus_eta,bound_eq11,F_d,F_up\n") != std::string::npos);
  std::istringstream lines(contents);
  std::string line;
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty() && line[0] >= '1' && line[0] <= '9') ++rows;
  REQUIRE(rows == 4);  // L = 2..5

  // Measured fidelity stays above the printed bound on every row.
  lines.clear();
  lines.str(contents);
  while (std::getline(lines, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'L') continue;
    std::istringstream cells(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(cells, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 6);
    REQUIRE(vals[4] >= vals[3]);  // F_d >= bound
    REQUIRE(vals[5] >= vals[3]);  // F_up >= bound
  }
}

TEST_CASE("converge fits the decay rate within five percent") {
  const auto net = write_network("path3conv.net", kPath3End);
  const std::string csv = (work_dir() / "traj.csv").string();
  const CliResult res = run_cli("converge " + net + " --time 1 --max-steps 30 --csv " + csv);
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("kappa = 0.7602446") != std::string::npos);
  REQUIRE(res.output.find("kappa_fit = ") != std::string::npos);

  const auto rel_pos = res.output.find("rel_diff = ");
  REQUIRE(rel_pos != std::string::npos);
  const double rel = std::stod(res.output.substr(rel_pos + 11));
  REQUIRE(rel <= 0.05);

  const std::string contents = slurp(csv);
  REQUIRE(contents.find("L,distance\n") != std::string::npos);
}

TEST_CASE("converge skips the fit for one-step relaxation") {
  const auto net = write_network("chain2c.net", kChain2);
  const CliResult res = run_cli("converge " + net + " --time " + kPiHalf + " --max-steps 10");
  REQUIRE(res.exit_code == 0);
  REQUIRE(res.output.find("fit skipped") != std::string::npos);
}

TEST_CASE("converge exits 2 on a non-mixing channel") {
  const auto net = write_network("chain2d.net", kChain2);
  const CliResult res = run_cli("converge " + net + " --time 0");
  REQUIRE(res.exit_code == 2);
  REQUIRE(res.output.find("not mixing") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers and exit 1") {
  const auto net = write_network("bad.net", "n = 2; model = \"XX\";\ncontrol = [0];\nbogus = 1\n");
  const CliResult res = run_cli("check " + net);
  REQUIRE(res.exit_code == 1);
  REQUIRE(res.output.find("line 3") != std::string::npos);
  REQUIRE(res.output.find("unknown key") != std::string::npos);
}

TEST_CASE("identical manifests produce byte-identical outputs") {
  const auto net = write_network("path3det.net", kPath3End);
  const std::string csv_a = (work_dir() / "det_a.csv").string();
  const std::string csv_b = (work_dir() / "det_b.csv").string();
  const std::string args = " --time 1 --steps 4 --state random:42 --csv ";

  const CliResult a = run_cli("download " + net + args + csv_a);
  const CliResult b = run_cli("download " + net + args + csv_b);
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  // Reports differ only in the echoed csv paths; drop those lines.
  const auto body = [](const std::string& s) {
    std::istringstream in(s);
    std::string line, out;
    while (std::getline(in, line))
      if (line.rfind("manifest:", 0) != 0 && line.rfind("csv:", 0) != 0) out += line + "\n";
    return out;
  };
  REQUIRE(body(a.output) == body(b.output));
  REQUIRE(slurp(csv_a).substr(slurp(csv_a).find('\n')) ==
          slurp(csv_b).substr(slurp(csv_b).find('\n')));

  const CliResult c1 = run_cli("converge " + net + " --time 1 --max-steps 12 --seed 5");
  const CliResult c2 = run_cli("converge " + net + " --time 1 --max-steps 12 --seed 5");
  REQUIRE(c1.output == c2.output);

  const CliResult k1 = run_cli("check " + net + " --oracle");
  const CliResult k2 = run_cli("check " + net + " --oracle");
  REQUIRE(k1.output == k2.output);
}
