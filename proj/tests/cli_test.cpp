#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"

// End-to-end checks against the installed binary. PDPAUDIT_BIN is injected
// by the build so the tests always exercise the freshly built executable.

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pdpaudit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  std::string cmd = std::string(PDPAUDIT_BIN);
  if (!args.empty()) cmd += " " + args;
  cmd += " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string small_csv() {
  std::string text = "color,shape,size\n";
  const char* colors[] = {"red", "green", "blue"};
  const char* shapes[] = {"disc", "box"};
  const char* sizes[] = {"s", "m", "l"};
  for (int i = 0; i < 18; ++i) {
    text += colors[i % 3];
    text += ',';
    text += shapes[(i / 2) % 2];
    text += ',';
    text += sizes[(i / 3) % 3];
    text += '\n';
  }
  return text;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("") == 1);
  CHECK(run("frobnicate") == 1);
  CHECK(run("audit") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("schedule prints the derived kernel table") {
  TempDir dir;
  const std::string out = dir.file("sched.csv");
  CHECK(run("schedule -T 10 --decay 1 --k 2 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("t,alpha,alpha_bar,", 0) == 0);
  CHECK(text.find("\n5,0.5,") != std::string::npos);
}

TEST_CASE("audit writes a parseable report") {
  TempDir dir;
  const std::string csv = dir.file("data.csv");
  spit(csv, small_csv());
  const std::string out = dir.file("report.json");
  CHECK(run("audit " + csv + " -T 4 --decay 0.8 --epsilon 1 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"schema\": \"pdp-report/1\"") != std::string::npos);
  CHECK(text.find("dataset_fingerprint") != std::string::npos);
  CHECK(text.find("\"points\"") != std::string::npos);
}

TEST_CASE("bad input files exit with code 2") {
  TempDir dir;
  CHECK(run("audit " + dir.file("missing.csv") + " -T 4") == 2);
  const std::string ragged = dir.file("ragged.csv");
  spit(ragged, "a,b\nx,y\nz\n");
  CHECK(run("audit " + ragged + " -T 4") == 2);
}

TEST_CASE("strict mode escalates isolated rows to exit 3") {
  TempDir dir;
  const std::string csv = dir.file("iso.csv");
  spit(csv, "a,b\nx,y\nx,y\nx,y\nz,w\n");
  const std::string out = dir.file("report.json");
  CHECK(run("audit " + csv + " -T 4 --strict --out " + out) == 3);
  CHECK(run("audit " + csv + " -T 4 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("support-isolated") != std::string::npos);
  CHECK(text.find("\"Infinity\"") != std::string::npos);
}

TEST_CASE("audit output is byte identical across reruns and thread counts") {
  TempDir dir;
  const std::string csv = dir.file("data.csv");
  spit(csv, small_csv());
  const std::string base = "audit " + csv + " -T 5 --decay 0.9 --epsilon 2";
  REQUIRE(run(base + " --threads 1 --out " + dir.file("r1.json")) == 0);
  REQUIRE(run(base + " --threads 4 --out " + dir.file("r2.json")) == 0);
  REQUIRE(run(base + " --threads 1 --out " + dir.file("r3.json")) == 0);
  const std::string r1 = slurp(dir.file("r1.json"));
  CHECK(r1 == slurp(dir.file("r2.json")));
  CHECK(r1 == slurp(dir.file("r3.json")));
}

TEST_CASE("generate is deterministic for a fixed seed") {
  TempDir dir;
  const std::string csv = dir.file("data.csv");
  spit(csv, small_csv());
  const std::string base = "generate " + csv + " -T 5 --decay 0.9 -m 50";
  REQUIRE(run(base + " --seed 9 --threads 1 --out " + dir.file("g1.csv")) == 0);
  REQUIRE(run(base + " --seed 9 --threads 4 --out " + dir.file("g2.csv")) == 0);
  REQUIRE(run(base + " --seed 10 --threads 1 --out " + dir.file("g3.csv")) == 0);
  const std::string g1 = slurp(dir.file("g1.csv"));
  CHECK(g1 == slurp(dir.file("g2.csv")));
  CHECK(g1 != slurp(dir.file("g3.csv")));
  CHECK(g1.rfind("color,shape,size\n", 0) == 0);

  // fully denoised samples decode back to the ingested vocabulary
  std::istringstream lines(g1);
  std::string line;
  std::getline(lines, line);  // header
  int rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    REQUIRE(c2 != std::string::npos);
    const std::string color = line.substr(0, c1);
    const std::string shape = line.substr(c1 + 1, c2 - c1 - 1);
    const std::string size = line.substr(c2 + 1);
    CHECK((color == "red" || color == "green" || color == "blue"));
    CHECK((shape == "disc" || shape == "box"));
    CHECK((size == "s" || size == "m" || size == "l"));
  }
  CHECK(rows == 50);
}

TEST_CASE("lower-bound emits the bound family as json") {
  TempDir dir;
  const std::string out = dir.file("lb.json");
  CHECK(run("lower-bound --s 50 --schedule sigmoid -T 10 --decay 1 --exact --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"delta_lb\"") != std::string::npos);
  CHECK(text.find("\"full_recursion\"") != std::string::npos);
  CHECK(text.find("\"exact_gap\"") != std::string::npos);
}

TEST_CASE("dp emits the worst-case bound as json") {
  TempDir dir;
  const std::string out = dir.file("dp.json");
  CHECK(run("dp --s 100 --n 3 --k 3 -T 5 --decay 1 --epsilon 1 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("\"delta\"") != std::string::npos);
  CHECK(text.find("\"trace\"") != std::string::npos);
}

TEST_CASE("synth sweeps the skew grid into csv") {
  TempDir dir;
  const std::string out = dir.file("synth.csv");
  CHECK(run("synth --p-grid 0.5 --design n=3,k=3,T=4,s=60,seeds=1,eps=5 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("p,t,psi_term,radius,main_term\n", 0) == 0);
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  CHECK(lines == 1 + 4);
}

TEST_CASE("curate removes the worst rows round by round") {
  TempDir dir;
  const std::string csv = dir.file("data.csv");
  spit(csv, small_csv());
  const std::string out = dir.file("curate.csv");
  CHECK(run("curate " + csv + " -T 4 --decay 0.8 --ratios 0.2,0.4 --out " + out) == 0);
  const std::string text = slurp(out);
  CHECK(text.rfind("ratio,size,mean_delta,max_delta\n", 0) == 0);
  CHECK(text.find("\n0.2,15,") != std::string::npos);  // 18 rows, floor(0.2*18)=3 removed
  CHECK(text.find("\n0.4,11,") != std::string::npos);  // floor(0.4*18)=7 removed in total
  CHECK(run("curate " + csv + " -T 4 --ratios 0.4,0.2 --out " + out) == 2);
}
