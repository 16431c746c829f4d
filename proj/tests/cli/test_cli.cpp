#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

fs::path workdir() {
  static const fs::path d = [] {
    fs::path p = fs::temp_directory_path() / ("weberlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Run run(const std::string& args) {
  static int counter = 0;
  const fs::path o = workdir() / ("out" + std::to_string(counter) + ".txt");
  const fs::path e = workdir() / ("err" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string("\"") + WEBERLAB_CLI + "\" " + args + " >\"" + o.string() + "\" 2>\"" + e.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(o);
  r.err = slurp(e);
  return r;
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("mesh gen, validate and info") {
  const auto m = (workdir() / "m.json").string();
  auto g = run("mesh gen --kind through_hole_cube --n 3 -o " + m);
  REQUIRE(g.code == 0);
  auto j = nlohmann::json::parse(slurp(m));
  CHECK(j["topology"]["beta1"] == 1);
  CHECK(j["topology"]["beta2"] == 0);
  CHECK(j["cells"].size() == 24);
  CHECK(j["eta"].size() == 24);
  CHECK(run("mesh validate " + m).code == 0);
  auto info = run("mesh info " + m);
  CHECK(info.code == 0);
  CHECK(info.out.find("non-star-shaped cells  0") != std::string::npos);

  const auto bad = (workdir() / "bad.json").string();
  std::ofstream(bad) << "{\"vertices\": [[0,0,0]], \"cells\": [";
  auto v = run("mesh validate " + bad);
  CHECK(v.code == 2);
  CHECK(v.err.find("JSON") != std::string::npos);
  CHECK(run("mesh validate " + (workdir() / "missing.json").string()).code == 2);
  CHECK(run("mesh gen --kind hollow_cube --n 4 -o " + bad).code == 2);
}

TEST_CASE("verification suites") {
  auto k = run("verify koszul --kind solid_cube --n 2 --degree 1");
  CHECK(k.code == 0);
  CHECK(k.out.find("Div inverse norm") != std::string::npos);
  CHECK(k.out.find("FAIL") == std::string::npos);
  const auto csv = (workdir() / "stab.csv").string();
  CHECK(run("verify stab --kind solid_cube --n 2 --degree 1 --samples 5 --policies minimal,trimmed:0,full -o " + csv).code == 0);
  CHECK(count_lines(slurp(csv)) == 1 + 8 * 2 * 3 * 4);
  CHECK(run("verify reconstruct --kind solid_cube --n 1 --degree 1 --samples 3").code == 0);
  CHECK(run("verify stab --kind solid_cube --policies nonsense").code == 2);
}

TEST_CASE("weber study, estimate and degeneracy") {
  const auto a = (workdir() / "a.csv").string(), b = (workdir() / "b.csv").string();
  const auto js = (workdir() / "a.json").string();
  const std::string study = "weber study --kind solid_cube --degree 0 --levels 3 --flavor tangential --omit-timings";
  auto s1 = run("--threads 1 " + study + " -o " + a + " --json " + js);
  auto s2 = run("--threads 1 " + study + " -o " + b);
  REQUIRE(s1.code == 0);
  REQUIRE(s2.code == 0);
  const std::string text = slurp(a);
  CHECK(text == slurp(b));
  CHECK(count_lines(text) == 4);
  CHECK(text.rfind("level,h,dofs,degree,policy,flavor,include_flux,lambda_max,c_w,lambda_min_A,residual,wall_ms\n", 0) == 0);
  auto j = nlohmann::json::parse(slurp(js));
  CHECK(j["config"]["command"] == "weber study");
  CHECK(j["config"]["levels"] == 3);
  CHECK(j["rows"].size() == 3);
  CHECK(j["rows"][0]["mesh_hash"].get<std::string>().size() == 16);
  double lo = 1e300, hi = 0.;
  for (const auto& r : j["rows"]) {
    lo = std::min(lo, r["c_w"].get<double>());
    hi = std::max(hi, r["c_w"].get<double>());
  }
  CHECK(hi / lo <= 2.);

  const auto m = (workdir() / "e.json").string();
  REQUIRE(run("mesh gen --kind solid_cube --n 2 -o " + m).code == 0);
  auto e = run("weber estimate --mesh " + m + " --degree 1 --policy minimal");
  CHECK(e.code == 0);
  CHECK(count_lines(e.out) == 2);

  auto d = run("weber degeneracy --kind hollow_cube --n 3 --flavor tangential");
  CHECK(d.code == 0);
  CHECK(d.out.find("harmonic dimension (topology)      1") != std::string::npos);
  CHECK(d.out.find("near-kernel dimension") != std::string::npos);

  auto cap = run("weber study --kind solid_cube --levels 3 --dof-cap 1000 --omit-timings");
  CHECK(cap.code == 3);
  CHECK(count_lines(cap.out) >= 3);
  CHECK(cap.err.find("cap") != std::string::npos);

  CHECK(run("weber study --kind solid_cube --levels 1").code == 2);
  CHECK(run("weber estimate --kind solid_cube --flavor sideways").code == 2);
  CHECK(run("weber estimate").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("thread count from the environment") {
  const std::string args = "weber estimate --kind solid_cube --n 2 --omit-timings";
  auto one = run(args);
  ::setenv("WEBERLAB_THREADS", "2", 1);
  auto two = run(args);
  ::unsetenv("WEBERLAB_THREADS");
  CHECK(one.code == 0);
  CHECK(two.code == 0);
  CHECK(one.out == two.out);
}
