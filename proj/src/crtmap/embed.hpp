#pragma once

#include <functional>
#include <string>
#include <vector>

#include "crtmap/map.hpp"
#include "crtmap/orientation.hpp"
#include "crtmap/submap.hpp"

namespace crtmap {

struct Embedding {
  // coordinates indexed by submap-local vertex (v - sub.a)
  std::vector<double> x, y;
  double residual = 0.0;  // max harmonic defect over interior vertices
  int iterations = 0;
  std::vector<std::int32_t> boundary_cycle;  // parent vertex ids, walk order
};

// Boundary pinned to the unit circle in walk order, interior solved to the
// discrete harmonic equation by conjugate gradients.
Embedding tutte_embed(const MatedMap& map, const InducedCellSubmap& sub,
                      double tol = 1e-10, int max_iter = 1'000'000);

using ScalarField = std::function<double(double, double)>;

// Built-in test fields supported on the disk of radius 1/2.
ScalarField make_field(const std::string& name);

struct WeightedCurvatureResult {
  double sum = 0.0;            // (pi/3) sum f(pos(v)) kappa(v)
  Rational residual;           // against the per-vertex oriented-gradient form
  std::size_t support_size = 0;
};

// Evaluates f at the embedded positions (quantized to exact dyadic rationals)
// and checks the embedding-free identity at those values.
WeightedCurvatureResult weighted_curvature_sum(const MatedMap& map,
                                               const InducedCellSubmap& sub,
                                               const Embedding& emb,
                                               const OrientationAssignment& assign,
                                               const ScalarField& f);

struct DiagnosticRow {
  double epsilon = 0.0;
  std::size_t replicas = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
  std::vector<double> values;  // |sum f K| per replica
};

struct ScalingDiagnostic {
  std::vector<DiagnosticRow> rows;
  double slope = 0.0;     // log-log fit of median vs epsilon
  double slope_lo = 0.0;  // bootstrap 95% CI
  double slope_hi = 0.0;
  std::string caveat = "exploratory";
};

struct SimConfig;  // from path.hpp via map.hpp

ScalingDiagnostic scaling_diagnostic(const SimConfig& config,
                                     const std::vector<double>& eps_list,
                                     const std::string& field_name, int replicas);

std::string embedding_to_svg(const MatedMap& map, const InducedCellSubmap& sub,
                             const Embedding& emb);

}  // namespace crtmap
