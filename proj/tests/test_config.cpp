#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "degel/runner.hpp"

using namespace degel;

namespace {

const char* kMinimalConfig = R"(
# flat slab, sigma_n root, constant right-hand side
[problem]
dimension = 3
shape = 9 9 9
psi = 1
phi = 0
a_tensor = scale_g: 1

[operator]
family = sigma_k_root
k = 3

[continuation]
eps0 = 0.5
ratio = 0.5
levels = 2
)";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const RunConfig cfg = parse_config(kMinimalConfig);
  CHECK(cfg.dimension == 3);
  CHECK(cfg.shape == std::vector<int>{9, 9, 9});
  CHECK(cfg.topology == Topology::slab);
  CHECK(cfg.f.family == SpectralFamily::sigma_k_root);
  CHECK(cfg.f.k == 3);
  CHECK(cfg.a_kind == ATensorKind::scale_g);
  CHECK(cfg.solve.continuation.levels == 2);
  CHECK(cfg.solve.tol_residual == 1e-10);
}

TEST_CASE("misspelled key reports the line with exit code 2") {
  const std::string bad = "[operater]\nfamily = sigma_k_root\n";
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.exit_code == 2);
    CHECK(e.line == 2);  // the key line carries the unknown section prefix
  }

  const std::string bad2 = "[solve]\ntol_residual = 1e-10\nmax_newtons = 3\n";
  try {
    parse_config(bad2);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.exit_code == 2);
    CHECK(e.line == 3);
  }
}

TEST_CASE("log_sigma_n cannot drive the degenerate continuation") {
  const std::string text =
      "[operator]\nfamily = log_sigma_n\n[continuation]\ndegenerate = true\n";
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.exit_code == 3);
  }
  // but it parses fine when the continuation is not degenerate
  const RunConfig ok = parse_config(
      "[operator]\nfamily = log_sigma_n\n[continuation]\ndegenerate = false\n");
  CHECK(ok.f.family == SpectralFamily::log_sigma_n);
}

TEST_CASE("expression errors carry the config line") {
  const std::string text = "[problem]\npsi = 1 + \n";
  try {
    parse_config(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.exit_code == 2);
    CHECK(e.line == 2);
  }
}

TEST_CASE("overrides win over the file") {
  const RunConfig cfg = parse_config(kMinimalConfig, {"problem.shape=7 7 7",
                                                      "continuation.levels=1"});
  CHECK(cfg.shape == std::vector<int>{7, 7, 7});
  CHECK(cfg.solve.continuation.levels == 1);
}

TEST_CASE("semantic validation: dimensions and cone parameters") {
  CHECK_THROWS_AS(parse_config("[problem]\ndimension = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[operator]\nfamily = quotient_root\nk = 2\nl = 2\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[problem]\nshape = 9 9\n"), ConfigError);
}

TEST_CASE("run_command: infeasible psi exits 1, feasible solve exits 0") {
  RunConfig cfg = parse_config(kMinimalConfig, {"output.dir=out_test_cli",
                                                "problem.shape=7 7 7"});
  std::ostringstream log;
  CHECK(run_command("solve", cfg, log) == 0);

  RunConfig bad = parse_config(kMinimalConfig, {"output.dir=out_test_cli",
                                                "problem.shape=7 7 7",
                                                "problem.psi=1000000000000"});
  CHECK(run_command("solve", bad, log) == 1);
}

TEST_CASE("sweep CSVs are bitwise identical across runs") {
  RunConfig cfg = parse_config(kMinimalConfig, {"problem.psi=0",
                                                "problem.phi=0.005*sin(2*pi*x1)",
                                                "output.dir=out_det_a"});
  std::ostringstream log;
  REQUIRE(run_command("sweep", cfg, log) == 0);
  RunConfig cfg2 = parse_config(kMinimalConfig, {"problem.psi=0",
                                                 "problem.phi=0.005*sin(2*pi*x1)",
                                                 "output.dir=out_det_b"});
  REQUIRE(run_command("sweep", cfg2, log) == 0);
  const std::string a = slurp("out_det_a/sweep.csv");
  const std::string b = slurp("out_det_b/sweep.csv");
  REQUIRE(!a.empty());
  CHECK(a == b);
}

TEST_CASE("all three operator families solve end to end") {
  std::ostringstream log;

  RunConfig logcfg = parse_config(kMinimalConfig,
                                  {"problem.shape=7 7 7", "problem.a_tensor=scale_g: 3",
                                   "operator.family=log_sigma_n",
                                   "continuation.degenerate=false",
                                   "output.dir=out_family_log"});
  CHECK(run_command("solve", logcfg, log) == 0);

  RunConfig quot = parse_config(kMinimalConfig,
                                {"problem.shape=7 7 7", "problem.a_tensor=scale_g: 2",
                                 "operator.family=quotient_root", "operator.k=3",
                                 "operator.l=1", "problem.psi=0.3",
                                 "output.dir=out_family_quot"});
  CHECK(run_command("solve", quot, log) == 0);

  // gradient tensor switched on end to end
  RunConfig zeta = parse_config(
      kMinimalConfig,
      {"problem.shape=7 7 7", "problem.eta=zeta: 0.05; 0-0.03; 0.02*x3",
       "problem.warp=0.1*x3*(1-x3)", "output.dir=out_family_zeta"});
  CHECK(run_command("solve", zeta, log) == 0);
}

TEST_CASE("diagnose, subsolution and convergence commands emit their CSVs") {
  std::ostringstream log;

  RunConfig diag = parse_config(kMinimalConfig, {"problem.shape=9 9 9",
                                                 "problem.psi=0.5",
                                                 "output.dir=out_diag_test"});
  CHECK(run_command("diagnose", diag, log) == 0);
  CHECK(slurp("out_diag_test/diagnose.csv").rfind("monitor,value", 0) == 0);

  RunConfig sub = parse_config(kMinimalConfig, {"problem.shape=9 9 9",
                                                "output.dir=out_sub_test"});
  CHECK(run_command("subsolution", sub, log) == 0);
  CHECK(slurp("out_sub_test/subsolution.csv").rfind("A,", 0) == 0);

  // refusal lists the violating nodes
  RunConfig refused = parse_config(
      kMinimalConfig, {"problem.shape=9 9 9", "problem.a_tensor=zero",
                       "output.dir=out_sub_refused"});
  CHECK(run_command("subsolution", refused, log) == 1);
  const std::string viol = slurp("out_sub_refused/subsolution_violations.csv");
  CHECK(viol.rfind("node,x1,x2,x3", 0) == 0);
  CHECK(std::count(viol.begin(), viol.end(), '\n') > 1);

  RunConfig conv = parse_config(
      kMinimalConfig,
      {"problem.shape=9 9 9", "manufactured.u_star=(x1^2+x2^2+x3^2)/2",
       "manufactured.grids=9 13", "output.dir=out_conv_test"});
  CHECK(run_command("convergence", conv, log) == 0);
  const std::string csv = slurp("out_conv_test/convergence.csv");
  CHECK(csv.rfind("nodes,h,err_inf,ratio,seconds", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("verify-lemma writes per-instance gaps") {
  RunConfig cfg = parse_config("", {"lemma.count=200", "lemma.seed=7",
                                    "output.dir=out_lemma_test"});
  std::ostringstream log;
  CHECK(run_command("verify-lemma", cfg, log) == 0);
  const std::string csv = slurp("out_lemma_test/lemma.csv");
  CHECK(csv.rfind("instance,n,epsilon,a,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 201);  // header + rows
}
