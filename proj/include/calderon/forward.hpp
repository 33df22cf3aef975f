#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "calderon/lattice.hpp"

namespace calderon {

/// Potential over every node (interior then boundary, NodeId order).
using PotentialField = Eigen::VectorXd;
/// Values over boundary nodes in canonical boundary order: either Dirichlet data
/// (potentials) or Neumann data (currents).
using BoundaryVector = Eigen::VectorXd;

/// One strictly positive conductance per lattice edge.
class ConductivityField {
 public:
  ConductivityField(const Lattice& lat, std::vector<double> values);

  static ConductivityField constant(const Lattice& lat, double value);
  /// Independent uniform draws on [lo, hi] from a seeded mt19937_64.
  static ConductivityField uniform(const Lattice& lat, double lo, double hi, std::uint64_t seed);

  double operator[](EdgeId e) const { return values_[e]; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  ConductivityField scaled(double factor) const;
  /// Conductivity of the reflected lattice: result[corner.edge_perm[e]] = this[e].
  ConductivityField permuted(const CornerMap& map) const;

 private:
  std::vector<double> values_;
};

/// Weighted graph Laplacian over all nodes: off-diagonal gamma_pq for each
/// neighbour q, diagonal -sum_r gamma_pr. Row sums vanish.
Eigen::SparseMatrix<double> assemble_laplacian(const Lattice& lat, const ConductivityField& g);

/// Kirchhoff row v_p over all nodes: gamma_pq at neighbours, -sum gamma_pr at p.
Eigen::VectorXd kirchhoff_row(const Lattice& lat, const ConductivityField& g, NodeId p);

/// Factorized interior block of the Laplacian; solves the Dirichlet problem
/// for any number of boundary data sets.
class DirichletSolver {
 public:
  DirichletSolver(const Lattice& lat, const ConductivityField& g);

  /// Full potential: interior gamma-harmonic extension of phi, equal to phi on the boundary.
  PotentialField solve(const BoundaryVector& phi) const;
  /// Interior potentials (num_interior x k) for boundary data columns (num_boundary x k).
  Eigen::MatrixXd solve_interior(const Eigen::MatrixXd& phi) const;

 private:
  std::size_t num_interior_;
  std::size_t num_boundary_;
  Eigen::SparseMatrix<double> coupling_;  // A_IB, interior rows, boundary columns
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor_;  // of -A_II
};

inline PotentialField solve_dirichlet(const Lattice& lat, const ConductivityField& g, const BoundaryVector& phi) {
  return DirichletSolver(lat, g).solve(phi);
}

/// Boundary current psi_p = gamma_pq (u_q - u_p), q the interior neighbour of p.
BoundaryVector boundary_current(const Lattice& lat, const ConductivityField& g, const PotentialField& u);

/// Dense Dirichlet-to-Neumann matrix in canonical boundary order.
struct DtnMatrix {
  Eigen::MatrixXd entries;
  /// max|L - L^T| / max|L| measured before symmetrization.
  double asymmetry = 0.0;
};

/// Assembles the DtN matrix column by column from unit boundary excitations,
/// then symmetrizes. Columns are solved in parallel chunks.
DtnMatrix assemble_dtn(const Lattice& lat, const ConductivityField& g);

/// Invariant diagnostics of a DtN matrix, all relative to max|entry|.
struct DtnDiagnostics {
  double asymmetry = 0.0;
  double max_row_sum = 0.0;
  double max_positive_diagonal = 0.0;      // largest diagonal entry above zero
  double max_negative_off_diagonal = 0.0;  // largest magnitude of a negative off-diagonal
};

DtnDiagnostics diagnose_dtn(const Eigen::MatrixXd& dtn);

/// DtN of a reflected lattice frame: result(i, j) = dtn(perm(i), perm(j)).
Eigen::MatrixXd permute_dtn(const Lattice& lat, const Eigen::MatrixXd& dtn, const CornerMap& map);

}  // namespace calderon
