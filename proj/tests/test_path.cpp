#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "crtmap/path.hpp"
#include "crtmap/stats.hpp"
#include "test_util.hpp"

using namespace crtmap;

TEST_CASE("correlation parameter from gamma") {
  SimConfig cfg;
  cfg.gamma = std::sqrt(2.0);
  CHECK(std::fabs(cfg.rho()) < 1e-15);  // -cos(pi/2) = 0
  cfg.gamma = std::sqrt(8.0 / 3.0);
  CHECK(cfg.rho() == doctest::Approx(0.5).epsilon(1e-12));  // -cos(2pi/3)
}

TEST_CASE("config validation") {
  SimConfig cfg;
  cfg.gamma = 2.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.gamma = 1.0;
  cfg.epsilon = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epsilon = 1.0;
  cfg.horizon = 0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.horizon = 1e12;  // exceeds the cell budget
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.horizon = 10.0;
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("bridge minimum closed form") {
  // u -> 1 forces the a.s. upper bound min(a,b)
  CHECK(bridge_min_sample(1.0, 2.0, 1.0, 1.0) == doctest::Approx(1.0));
  // exp(-2 m^2) = e^{-2}  =>  m = -1
  CHECK(bridge_min_sample(0.0, 0.0, 1.0, std::exp(-2.0)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(bridge_min_sample(0.0, 0.0, 4.0, std::exp(-2.0)) ==
        doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS_AS(bridge_min_sample(0, 0, 0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(bridge_min_sample(0, 0, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("bridge minimum matches its CDF") {
  // inversion check: P(M <= m) = exp(-2(a-m)(b-m)/T)
  const double a = 0.3, b = -0.2, T = 2.0;
  RngStream r(9, 0, 0);
  int below = 0;
  const int n = 100000;
  const double m0 = -0.8;
  for (int i = 0; i < n; ++i)
    if (bridge_min_sample(a, b, T, r.uniform_pos()) <= m0) ++below;
  double expect = std::exp(-2.0 * (a - m0) * (b - m0) / T);
  CHECK(std::fabs(static_cast<double>(below) / n - expect) < 0.006);
}

TEST_CASE("sample_path determinism and invariants") {
  SimConfig cfg;
  cfg.gamma = 1.3;
  cfg.epsilon = 0.5;
  cfg.horizon = 20.0;
  cfg.seed = 77;
  CellSequence c1 = sample_path(cfg, 4);
  CellSequence c2 = sample_path(cfg, 4);
  REQUIRE(c1.n_cells() == c2.n_cells());
  CHECK(c1.first_cell == c2.first_cell);
  for (std::size_t i = 0; i < c1.n_cells(); ++i) {
    CHECK(c1.inf_L[i] == c2.inf_L[i]);  // bit identical
    CHECK(c1.inf_R[i] == c2.inf_R[i]);
    CHECK(c1.boundary[i] == c2.boundary[i]);
  }
  CellSequence c3 = sample_path(cfg, 5);
  CHECK(c3.inf_L[0] != c1.inf_L[0]);

  // per-cell infimum never exceeds either endpoint value
  for (std::size_t i = 0; i < c1.n_cells(); ++i) {
    CHECK(c1.inf_L[i] <= std::min(c1.end_L[i], c1.end_L[i + 1]));
    CHECK(c1.inf_R[i] <= std::min(c1.end_R[i], c1.end_R[i + 1]));
  }
  // boundaries increase and straddle zero at global cell 1
  for (std::size_t i = 0; i < c1.n_cells(); ++i)
    CHECK(c1.boundary[i] < c1.boundary[i + 1]);
  std::size_t s1 = c1.sidx(1);
  CHECK(c1.boundary[s1] <= 0.0);
  CHECK(c1.boundary[s1 + 1] > 0.0);
}

TEST_CASE("bridge-exact mode keeps infima below endpoints") {
  SimConfig cfg;
  cfg.epsilon = 1.0;
  cfg.horizon = 50.0;
  cfg.inf_mode = InfimumMode::kBridgeExact;
  CellSequence c = sample_path(cfg, 0);
  for (std::size_t i = 0; i < c.n_cells(); ++i)
    CHECK(c.inf_L[i] <= std::min(c.end_L[i], c.end_L[i + 1]));
}

TEST_CASE("increment correlation matches rho") {
  SimConfig cfg;
  cfg.gamma = 1.6;  // rho = -cos(0.64 pi) ~ 0.426
  cfg.epsilon = 1.0;
  cfg.horizon = 400.0;
  double rho = cfg.rho();
  double sa = 0, sb = 0, sab = 0, sa2 = 0, sb2 = 0;
  std::size_t n = 0;
  for (int rep = 0; rep < 40; ++rep) {
    CellSequence c = sample_path(cfg, rep);
    for (std::size_t i = 0; i + 1 < c.end_L.size(); ++i) {
      double da = c.end_L[i + 1] - c.end_L[i];
      double db = c.end_R[i + 1] - c.end_R[i];
      double dt = c.boundary[i + 1] - c.boundary[i];
      if (dt <= 0) continue;
      da /= std::sqrt(dt);
      db /= std::sqrt(dt);
      sa += da; sb += db; sab += da * db; sa2 += da * da; sb2 += db * db;
      ++n;
    }
  }
  double ma = sa / n, mb = sb / n;
  double corr = (sab / n - ma * mb) /
                std::sqrt((sa2 / n - ma * ma) * (sb2 / n - mb * mb));
  CHECK(std::fabs(corr - rho) < 3.0 * 1.5 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("gap check accepts real gaps and rejects degenerate ones") {
  SimConfig cfg;
  cfg.epsilon = 1.0;
  cfg.horizon = 2600.0;
  CellSequence c = sample_path(cfg, 0);
  REQUIRE(c.n_cells() >= 1000);
  GapCheckReport rep = poisson_gap_check(c);
  CHECK(!rep.flagged);
  CHECK(rep.p_value > 1e-4);

  // all gaps identical -> p ~ 0
  CellSequence fake = crtmap::testutil::make_cells(
      0, std::vector<double>(2000, 0.0), std::vector<double>(2000, 0.0));
  for (std::size_t i = 0; i < fake.n_cells(); ++i) fake.inf_L[i] = -double(i);
  GapCheckReport bad = poisson_gap_check(fake);
  CHECK(bad.flagged);

  CellSequence tiny = crtmap::testutil::make_cells(
      0, std::vector<double>(100, 0.0), std::vector<double>(100, 0.0));
  CHECK_THROWS_AS(poisson_gap_check(tiny), std::invalid_argument);
}

TEST_CASE("gap-check pass rate under the null") {
  SimConfig cfg;
  cfg.epsilon = 1.0;
  cfg.horizon = 5000.0;
  int pass = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    cfg.seed = 1000 + s;
    CellSequence c = sample_path(cfg, 0);
    if (!poisson_gap_check(c).flagged) ++pass;
  }
  CHECK(pass >= 99);
}

TEST_CASE("cells cache round trip") {
  SimConfig cfg;
  cfg.horizon = 5.0;
  CellSequence c = sample_path(cfg, 0);
  std::string path = "/tmp/crtmap_test_cells.crtc";
  save_cells(c, path);
  CellSequence d = load_cells(path);
  REQUIRE(c.n_cells() == d.n_cells());
  CHECK(c.first_cell == d.first_cell);
  for (std::size_t i = 0; i < c.n_cells(); ++i) {
    CHECK(c.inf_L[i] == d.inf_L[i]);
    CHECK(c.inf_R[i] == d.inf_R[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("extension equals one long run") {
  SimConfig cfg;
  cfg.horizon = 30.0;
  cfg.seed = 5;
  TwoSidedPathSampler s1(cfg, 0);
  s1.extend_forward(10.0);
  s1.extend_forward(30.0);
  s1.extend_backward(30.0);
  CellSequence a = s1.take();

  TwoSidedPathSampler s2(cfg, 0);
  s2.extend_forward(30.0);
  s2.extend_backward(14.0);
  s2.extend_backward(30.0);
  CellSequence b = s2.take();

  REQUIRE(a.n_cells() == b.n_cells());
  for (std::size_t i = 0; i < a.n_cells(); ++i) {
    CHECK(a.inf_L[i] == b.inf_L[i]);
    CHECK(a.inf_R[i] == b.inf_R[i]);
  }
}
