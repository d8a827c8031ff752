#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "dsmooth/cli.hpp"
#include "dsmooth/io.hpp"
#include "fixtures.hpp"

namespace fs = std::filesystem;
using namespace dsmooth;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "dsmooth");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Runs the real binary; returns its exit status.
int binary(const std::string& args, const fs::path& stdout_file)
{
  const std::string command = std::string(DSMOOTH_CLI_PATH) + " " + args + " > " + stdout_file.string()
                              + " 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::map<std::string, std::string> fields(const std::string& text)
{
  std::map<std::string, std::string> f;
  std::istringstream in(text);
  std::string key, value;
  while (in >> key >> value)
    f[key] = value;
  return f;
}

struct TempDir {
  fs::path path;
  TempDir()
  : path(fs::temp_directory_path() / ("dsmooth_cli_" + std::to_string(std::rand()) + "_"
                                     + std::to_string(reinterpret_cast<std::uintptr_t>(this))))
  {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path operator/(const std::string& name) const { return path / name; }
};

}

TEST_CASE("gen is deterministic per seed")
{
  TempDir dir;
  const auto a = dir / "a.txt", b = dir / "b.txt", c = dir / "c.txt";
  for (const auto& p : {a, b})
    CHECK(cli({"gen", "--height", "8", "--width", "8", "--labels", "4", "--seed", "7", "--out", p}).code == 0);
  CHECK(cli({"gen", "--height", "8", "--width", "8", "--labels", "4", "--seed", "8", "--out", c}).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  CHECK(read_model_file(a) == generate_random_grid(8, 8, 4, 7));

  CHECK(cli({"gen", "--height", "2", "--width", "3", "--labels", "1", "--seed", "1", "--out", c}).code == 0);
  CHECK(read_model_file(c).labels() == 1);

  const auto r = cli({"gen", "--height", "2", "--width", "2", "--labels", "2", "--seed", "1", "--out",
                      (dir / "missing" / "x.txt").string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") == 0);
}

TEST_CASE("eval prints the energy")
{
  TempDir dir;
  std::ostringstream model;
  write_model(model, fixtures::t1());
  spit(dir / "t1.txt", model.str());
  spit(dir / "x00.txt", "0 0\n");
  spit(dir / "x01.txt", "0 1\n");
  spit(dir / "short.txt", "0\n");
  spit(dir / "range.txt", "0 5\n");

  auto eval = [&](const char* labeling) {
    return cli({"eval", "--model", dir / "t1.txt", "--labeling", dir / labeling});
  };
  CHECK(eval("x00.txt").out == "0\n");
  CHECK(eval("x01.txt").out == "3\n");
  CHECK(eval("short.txt").code == 1);
  const auto r = eval("range.txt");
  CHECK(r.code == 1);
  CHECK(r.err.find("out of range") != std::string::npos);
  CHECK(eval("nonexistent.txt").code == 1);
}

TEST_CASE("solve")
{
  TempDir dir;
  std::ostringstream zero;
  write_model(zero, GridModel(3, 3, 2));
  spit(dir / "zero.txt", zero.str());
  REQUIRE(cli({"gen", "--height", "8", "--width", "8", "--labels", "4", "--seed", "3", "--out",
               dir / "g.txt"}).code == 0);

  SUBCASE("zero model converges immediately for every strategy")
  {
    for (const char* algo : {"a-dsal", "wc-dsal", "a-strws", "wc-strws"}) {
      const auto r = cli({"solve", "--model", dir / "zero.txt", "--algo", algo, "--eps", "1e-3"});
      CHECK(r.code == 0);
      const auto f = fields(r.out);
      CHECK(f.at("status") == "converged");
      CHECK(f.at("gap") == "0");
      CHECK(f.at("algo") == algo);
    }
  }

  SUBCASE("relative accuracy on an 8x8 model, with trace and labeling output")
  {
    const auto r = cli({"solve", "--model", dir / "g.txt", "--algo", "a-dsal", "--eps", "0.001",
                        "--relative", "--trace", dir / "trace.csv", "--labeling-out", dir / "x.txt"});
    CHECK(r.code == 0);
    std::ifstream trace_file(dir / "trace.csv");
    const auto trace = read_trace_csv(trace_file);
    REQUIRE_FALSE(trace.empty());
    CHECK(trace.back().gap_rel < 1e-3);
    CHECK(std::stod(fields(r.out).at("gap_rel")) < 1e-3);
    CHECK(std::to_string(trace.back().oracle_calls) == fields(r.out).at("oracle_calls"));

    const auto e = cli({"eval", "--model", dir / "g.txt", "--labeling", dir / "x.txt"});
    CHECK(e.code == 0);
    CHECK(e.out == fields(r.out).at("integer") + "\n");
  }

  SUBCASE("budget exhaustion exits 2")
  {
    const auto r = cli({"solve", "--model", dir / "g.txt", "--algo", "wc-strws", "--eps", "1e-9",
                        "--max-oracle-calls", "40"});
    CHECK(r.code == 2);
    CHECK(fields(r.out).at("status") == "budget_exhausted");
  }

  SUBCASE("options")
  {
    CHECK(cli({"solve", "--model", dir / "g.txt", "--algo", "a-strws", "--eps", "1e-2", "--relative",
               "--gamma", "3", "--eta", "1.5", "--inner-cycles", "2", "--rho0", "0.5"}).code == 0);
    CHECK(cli({"solve", "--model", dir / "g.txt", "--algo", "a-dsal", "--eps", "1e-2", "--relative",
               "--rho0", "auto"}).code == 0);
    CHECK(cli({"solve", "--model", dir / "g.txt", "--algo", "a-dsal", "--eps", "1e-2", "--rho0", "-1"}).code
          == 1);
    CHECK(cli({"solve", "--model", dir / "g.txt", "--algo", "a-dsal", "--eps", "1e-2", "--rho0", "hot"})
              .code
          == 1);
    CHECK(cli({"solve", "--model", dir / "g.txt", "--algo", "sa", "--eps", "1e-2"}).code == 1);
    CHECK(cli({"solve", "--model", dir / "g.txt", "--algo", "a-dsal", "--eps", "1e-2", "--gamma", "1"})
              .code
          == 1);
  }

  SUBCASE("missing model flag prints usage")
  {
    const auto r = cli({"solve", "--algo", "a-dsal", "--eps", "1e-3"});
    CHECK(r.code == 1);
    CHECK(r.err.find("--model") != std::string::npos);
    CHECK(r.err.find("Usage") != std::string::npos);
  }

  SUBCASE("malformed model names the line")
  {
    spit(dir / "bad.txt", "MRFGRID 1\n1 2 2\n0 1\n0 oops\n0 2 2 0\n");
    const auto r = cli({"solve", "--model", dir / "bad.txt", "--algo", "a-dsal", "--eps", "1e-3"});
    CHECK(r.code == 1);
    CHECK(r.err.find("bad.txt:4:") != std::string::npos);
  }

  SUBCASE("unwritable trace path")
  {
    const auto r = cli({"solve", "--model", dir / "zero.txt", "--algo", "a-dsal", "--eps", "1e-3",
                        "--trace", dir / "no" / "such" / "dir" / "t.csv"});
    CHECK(r.code == 1);
  }

  SUBCASE("compare")
  {
    const auto r = cli({"compare", "--model", dir / "g.txt", "--eps", "1e-3", "--relative",
                        "--max-oracle-calls", "300"});
    CHECK(r.code == 0);
    for (const char* algo : {"a-dsal", "wc-dsal", "a-strws", "wc-strws"})
      CHECK(r.out.find(algo) != std::string::npos);
  }
}

TEST_CASE("help and unknown commands")
{
  CHECK(cli({"--help"}).code == 0);
  CHECK_FALSE(cli({"--help"}).out.empty());
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
}

TEST_CASE("the installed binary reports exit codes")
{
  TempDir dir;
  const auto out = dir / "out.txt";
  std::ostringstream model;
  write_model(model, fixtures::t1());
  spit(dir / "t1.txt", model.str());
  spit(dir / "x.txt", "0 1\n");

  CHECK(binary("eval --model " + (dir / "t1.txt").string() + " --labeling " + (dir / "x.txt").string(), out)
        == 0);
  CHECK(slurp(out) == "3\n");
  CHECK(binary("solve --model " + (dir / "t1.txt").string() + " --algo a-dsal --eps 1e-6", out) == 0);
  CHECK(fields(slurp(out)).at("status") == "converged");
  CHECK(binary("solve --algo a-dsal --eps 1e-3", out) == 1);
  const auto grid = (dir / "g.txt").string();
  CHECK(binary("gen --height 6 --width 6 --labels 4 --seed 2 --out " + grid, out) == 0);
  CHECK(binary("solve --model " + grid + " --algo wc-strws --eps 1e-12 --max-oracle-calls 5", out) == 2);
  CHECK(binary("gen --height 2 --width 2 --labels 2 --seed 1 --out " + (dir / "no" / "g.txt").string(), out)
        == 1);
}
