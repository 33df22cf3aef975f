#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "calderon/forward.hpp"
#include "calderon/lattice.hpp"

namespace calderon {

/// Conductivity values known on a subset of edges.
struct PartialConductivity {
  std::vector<double> value;
  std::vector<std::uint8_t> known;

  explicit PartialConductivity(std::size_t num_edges = 0) : value(num_edges, 0.0), known(num_edges, 0) {}
  static PartialConductivity from(const ConductivityField& g);
  void set(EdgeId e, double v) {
    value[e] = v;
    known[e] = 1;
  }
  bool is_known(EdgeId e) const { return known[e] != 0; }
};

/// Potential recovered from Cauchy data by layer marching.
struct CauchyResult {
  PotentialField u;        // on every node; zero outside L_t^S and the data support
  double residual = 0.0;   // max Kirchhoff/current mismatch of equations not used for marching, relative
  bool consistent = true;  // residual <= tolerance
};

/// Solves the mixed problem on the corner region: gamma-harmonic on L_{t-1}^S,
/// u = phi and boundary current = psi on J_{t-1}^S, for u on L_t^S. phi and psi
/// are full boundary vectors; only their J_{t-1}^S entries are read, except
/// that phi is copied onto every boundary node of the result. Requires gamma
/// on E^{t-1}.
CauchyResult propagate_cauchy(const Lattice& lat, const PartialConductivity& known, const BoundaryVector& phi,
                              const BoundaryVector& psi, int t, double tol = 1e-8);

/// One corner excitation: its potential (zero outside L_t^S + J_t^S) and the
/// boundary currents it produces.
struct Excitation {
  PotentialField u;
  BoundaryVector psi;
};

/// Stacked Kirchhoff rows over the unknown interface edges E_t.
struct FluxSystem {
  int level = 0;
  std::vector<EdgeId> unknown_edges;
  std::vector<std::pair<std::size_t, NodeId>> row_labels;  // (excitation, node)
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  Eigen::VectorXd rhs;
};

/// Rows sum_q gamma_pq (u_p - u_q) over the edges of p for p in L_t + L_{t+1} + J_t,
/// with entries u_p - u_q on unknown columns and known-edge terms moved to the
/// right-hand side. The right-hand side of a boundary row is -psi_p because
/// currents follow psi_p = gamma_pq (u_q - u_p).
FluxSystem build_flux_system(const Lattice& lat, const PartialConductivity& known, int t,
                             std::span<const Excitation> excitations);

struct SliceSolution {
  Eigen::VectorXd gamma;           // follows FluxSystem::unknown_edges
  double residual = 0.0;           // |A x - b| / |b|
  double min_singular_ratio = 0.0; // sigma_min / sigma_max of the system matrix
  bool rank_deficient = false;     // min_singular_ratio <= rank_tol
  std::vector<EdgeId> nonpositive;
};

/// Least-squares solve by orthogonal factorization. Rows of each node share a
/// column pattern, so every node's block is first reduced by its own QR.
SliceSolution recover_slice(const FluxSystem& sys, double rank_tol = 1e-10);

struct ReconstructionOptions {
  double kernel_tol = 1e-10;
  double cauchy_tol = 1e-8;
  double rank_tol = 1e-10;
  /// Largest allowed distance of a previous kernel vector from the current kernel.
  double containment_tol = 1e-6;
  /// Corners to run; empty means all 2^d.
  std::vector<Corner> corners;
};

struct SliceDiagnostics {
  Corner corner;
  int level = 0;
  std::size_t kernel_dim_numerical = 0;
  std::size_t kernel_dim_expected = 0;
  std::size_t quotient_dim = 0;
  double kernel_gap = 0.0;
  bool kernel_ambiguous = false;
  double containment_residual = 0.0;
  double cauchy_residual = 0.0;
  double flux_residual = 0.0;
  double flux_min_singular_ratio = 0.0;
  std::size_t num_edges = 0;
  std::size_t nonpositive = 0;
  bool degraded = false;
};

struct CornerRun {
  Corner corner;
  int max_level = 0;
  PartialConductivity estimates;  // original lattice frame
  std::vector<SliceDiagnostics> slices;
};

/// Default last level: d * ceil((n+1)/2), clamped to the valid range dn - 1.
int default_max_level(const Lattice& lat);

/// Slice-by-slice reconstruction starting at corner c, levels d-1 .. max_level
/// in the reflected frame. Never aborts on numerical trouble; affected slices
/// are marked degraded.
CornerRun reconstruct_from_corner(const Lattice& lat, const Eigen::MatrixXd& dtn, const Corner& c,
                                  const ReconstructionOptions& opts, std::optional<int> max_level = std::nullopt);

struct ReconstructionReport {
  std::vector<Corner> corners;     // corners that were run
  std::vector<double> estimates;   // per edge; NaN when uncovered
  std::vector<int> source_corner;  // index into `corners`, -1 when uncovered
  std::vector<SliceDiagnostics> slices;
  std::vector<std::string> diagnostics;
  std::size_t degraded_slices = 0;
  std::size_t uncovered_edges = 0;
};

/// Runs the selected corners and keeps, per edge, the estimate from the corner
/// closest to the edge midpoint (ties go to the lexicographically smaller flags).
ReconstructionReport reconstruct(const Lattice& lat, const Eigen::MatrixXd& dtn, const ReconstructionOptions& opts = {});

}  // namespace calderon
