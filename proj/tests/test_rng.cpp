#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "crtmap/rng.hpp"

using crtmap::RngStream;

TEST_CASE("streams are deterministic and order-independent") {
  RngStream a(42, 7, 3), b(42, 7, 3);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  RngStream c(42, 7, 3), d(42, 7, 4);
  bool differ = false;
  for (int i = 0; i < 16; ++i)
    if (c.next_u64() != d.next_u64()) differ = true;
  CHECK(differ);

  RngStream e(42, 8, 3), f(43, 7, 3);
  CHECK(e.next_u64() != f.next_u64());
}

TEST_CASE("uniform moments") {
  RngStream r(1, 0, 0);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    double u = r.uniform_pos();
    CHECK(u > 0.0);
    CHECK(u <= 1.0);
    s += u;
    s2 += u * u;
  }
  double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::fabs(mean - 0.5) < 0.005);
  CHECK(std::fabs(var - 1.0 / 12.0) < 0.003);
}

TEST_CASE("normal moments") {
  RngStream r(2, 0, 0);
  const int n = 400000;
  double s = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    s += z;
    s2 += z * z;
    s4 += z * z * z * z;
  }
  CHECK(std::fabs(s / n) < 0.01);
  CHECK(std::fabs(s2 / n - 1.0) < 0.02);
  CHECK(std::fabs(s4 / n - 3.0) < 0.1);
}

TEST_CASE("exponential mean") {
  RngStream r(3, 0, 0);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) s += r.exponential(2.5);
  CHECK(std::fabs(s / n - 2.5) < 0.05);
}

TEST_CASE("correlated normals hit the target correlation") {
  for (double rho : {-0.7, 0.0, 0.5}) {
    RngStream r(4, 0, 0);
    const int n = 300000;
    double sa = 0, sb = 0, sab = 0, sa2 = 0, sb2 = 0;
    for (int i = 0; i < n; ++i) {
      double a, b;
      r.correlated_normals(rho, a, b);
      sa += a;
      sb += b;
      sab += a * b;
      sa2 += a * a;
      sb2 += b * b;
    }
    double ma = sa / n, mb = sb / n;
    double cov = sab / n - ma * mb;
    double va = sa2 / n - ma * ma, vb = sb2 / n - mb * mb;
    CHECK(std::fabs(cov / std::sqrt(va * vb) - rho) < 0.01);
  }
}
