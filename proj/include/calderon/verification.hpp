#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calderon/forward.hpp"
#include "calderon/lattice.hpp"
#include "calderon/reconstruction.hpp"

namespace calderon {

constexpr double kErrorFloor = 1e-300;

struct EdgeError {
  EdgeId edge = 0;
  NodeId p = 0;
  NodeId q = 0;
  std::vector<double> midpoint;
  double gamma_true = 0.0;
  double gamma_est = 0.0;  // NaN when uncovered
  double abs_err = 0.0;    // NaN when uncovered
  double log10_err = 0.0;  // log10(max(abs_err, 1e-300))
  std::string corner;      // flags of the source corner, empty when uncovered
  double depth = 0.0;      // l1 distance from the midpoint to the source corner node
};

/// Edges grouped by floor(depth).
struct DepthBand {
  int band = 0;
  std::size_t count = 0;
  double median_abs_err = 0.0;
  double max_abs_err = 0.0;
};

struct ErrorReport {
  std::vector<EdgeError> per_edge;
  double max_abs_err = 0.0;     // over covered edges
  double median_abs_err = 0.0;  // over covered edges
  std::size_t uncovered = 0;
  std::vector<DepthBand> profile;  // ascending band

  /// Median abs error over covered edges with depth <= max_depth (NaN if none).
  double median_up_to_depth(double max_depth) const;
};

ErrorReport compare(const Lattice& lat, const ConductivityField& truth, const ReconstructionReport& report);

/// Median of the finite-or-infinite values (NaN entries skipped); NaN if empty.
double median(std::vector<double> values);

struct PropertyCheck {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // bound it is compared against
  std::string detail;
};

struct PropertySuiteResult {
  int dim = 0;
  int size = 0;
  std::uint64_t seed = 0;
  std::vector<PropertyCheck> checks;
  bool all_passed() const;
};

/// Symmetry, zero row sums and sign pattern of a DtN matrix, relative to max|entry|.
std::vector<PropertyCheck> check_dtn_invariants(const Eigen::MatrixXd& dtn, double tol = 1e-10);

/// Linear map of the corner mixed problem: unknown potentials on L_t^S mapped
/// to Kirchhoff residuals on L_{t-1}^S followed by currents on J_{t-1}^S, with
/// zero potentials on J_{t-1}^S. Rows follow L_{t-1}^S then J_{t-1}^S.
Eigen::MatrixXd mixed_problem_matrix(const Lattice& lat, const ConductivityField& g, int t);

/// Dense least-squares solution of the mixed problem with Cauchy data (phi, psi)
/// on J_{t-1}^S; returns potentials on L_t^S in canonical order.
Eigen::VectorXd dense_cauchy_solve(const Lattice& lat, const ConductivityField& g, const BoundaryVector& phi,
                                   const BoundaryVector& psi, int t);

/// Every invariant of the lattice, forward, operators and reconstruction
/// modules on one random conductivity, gamma ~ U[0.5, 2].
PropertySuiteResult run_property_suite(int dim, int size, std::uint64_t seed);

struct StudyRow {
  int size = 0;
  double max_abs_err = 0.0;
  double median_abs_err = 0.0;
  std::size_t degraded_slices = 0;
  std::vector<DepthBand> profile;
};

struct StudyResult {
  int dim = 0;
  double lo = 1.0;
  double hi = 2.0;
  std::uint64_t seed = 0;
  std::vector<StudyRow> rows;
  bool monotone = false;         // max error nondecreasing in n
  double growth_decades = 0.0;   // log10 max error, last row minus first row
};

/// One generate -> DtN -> reconstruct -> compare cycle per n (ascending).
StudyResult error_growth_study(int dim, const std::vector<int>& sizes, double lo, double hi, std::uint64_t seed);

}  // namespace calderon
