#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calderon/forward.hpp"
#include "calderon/lattice.hpp"

namespace calderon {

/// Raised when kernel data contradicts the nesting of corner-excitation spaces.
class InconsistentData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense block of a node-indexed linear map, rows and columns in canonical order.
struct SubmatrixOperator {
  std::string base;
  int level = 0;
  std::vector<NodeId> rows;
  std::vector<NodeId> cols;
  Eigen::MatrixXd entries;
};

/// Boundary potentials on J_t^S mapped to currents on the remaining boundary:
/// dtn(dD \ J_t^S ; J_t^S). Valid for d-1 <= t <= dn-1.
SubmatrixOperator extract_T(const Lattice& lat, const Eigen::MatrixXd& dtn, int t);

/// Potentials on J_t^S mapped to the interior potential they induce on L_{t+1}.
SubmatrixOperator build_T1(const Lattice& lat, const ConductivityField& g, int t);

/// DtN block of the upper subgraph: potentials on L_{t+1} to currents on dD \ J_t^S.
SubmatrixOperator build_T2(const Lattice& lat, const ConductivityField& g, int t);

/// DtN block of the corner subgraph: potentials on L_t to currents on J_{t-1}^S.
/// Valid for d <= t <= dn.
SubmatrixOperator build_T2_prime(const Lattice& lat, const ConductivityField& g, int t);

/// Orthonormal nullspace basis (columns of `vectors`, indexed by `support`).
struct KernelBasis {
  int level = 0;
  std::vector<NodeId> support;
  Eigen::MatrixXd vectors;
  double tol = 0.0;
  Eigen::VectorXd singular_values;  // descending
  std::size_t numerical_dim = 0;    // count below tol * sigma_max (plus column excess)
  /// Ratio between the smallest kept and the largest discarded singular value
  /// around the chosen cut; infinite when the cut falls on an exact zero.
  double gap_ratio = 0.0;
  bool ambiguous = false;  // gap_ratio < 10
  std::size_t dim() const { return static_cast<std::size_t>(vectors.cols()); }
};

/// Kernel whose dimension is the number of singular values <= tol * sigma_max.
KernelBasis kernel_basis(const SubmatrixOperator& op, double tol);
/// Kernel spanned by the `dim` trailing right singular vectors; numerical_dim is
/// still reported from `tol` so callers can detect a mismatch.
KernelBasis kernel_basis(const SubmatrixOperator& op, std::size_t dim, double tol);

/// Orthonormal completion of the previous-level kernel inside the current one.
struct QuotientBasis {
  Eigen::MatrixXd vectors;            // indexed by the current kernel's support
  double containment_residual = 0.0;  // max distance of a previous basis vector from span(current)
};

/// Never throws on poor containment; reports it instead.
QuotientBasis complete_basis(const KernelBasis& current, const KernelBasis& previous);
/// Throws InconsistentData when the previous kernel is not contained in the
/// current one to within `tol`.
Eigen::MatrixXd quotient_basis(const KernelBasis& current, const KernelBasis& previous, double tol);

/// Zero-extends vectors indexed by `from` into the ordering `to` (from must be a subset).
Eigen::MatrixXd embed(const Eigen::MatrixXd& vectors, const std::vector<NodeId>& from, const std::vector<NodeId>& to);

/// Localized potentials: each kernel vector's Dirichlet solution restricted to
/// L_t^S + J_t^S.
struct SolutionSpaceBasis {
  int level = 0;
  std::vector<NodeId> support;
  Eigen::MatrixXd fields;  // rows follow `support`
  double leakage = 0.0;    // max |u| off the support, relative to max |u|
  bool leaked = false;     // leakage > 1e-8
};

SolutionSpaceBasis solution_space(const Lattice& lat, const ConductivityField& g, const KernelBasis& kernel, int t);

enum class SubgraphKind { upper, corner, reduced };

/// Node and edge sets of a lattice subgraph with its own interior/boundary split.
struct Subgraph {
  SubgraphKind kind = SubgraphKind::upper;
  std::vector<NodeId> interior;
  std::vector<NodeId> boundary;
  std::vector<EdgeId> edges;
};

/// Graph above the interface L_{t+1}: interior D \ L_{t+1}^S, boundary
/// (L_{t+1} + dD) \ J_t^S, edges induced on those nodes.
Subgraph upper_subgraph(const Lattice& lat, int t);
/// Corner graph: interior L_{t-1}^S, boundary J_{t-1}^S + L_t, edges induced on those nodes.
Subgraph corner_subgraph(const Lattice& lat, int t);
/// Corner graph with node p in L_t removed; its neighbours M_p in the previous
/// layer become boundary nodes and the edges from p to M_p are dropped.
Subgraph reduced_subgraph(const Lattice& lat, int t, NodeId p);
/// M_p: neighbours of p inside J_{t-1}^S + L_{t-1}^S.
std::vector<NodeId> previous_layer_neighbors(const Lattice& lat, int t, NodeId p);

/// DtN matrix of a subgraph, rows/columns in the order of `sub.boundary`.
/// Boundary nodes without incident edges get zero rows.
Eigen::MatrixXd subgraph_dtn(const Lattice& lat, const ConductivityField& g, const Subgraph& sub);

/// Sine of the largest principal angle between two subspaces with orthonormal
/// bases (returns 1 when dimensions differ).
double max_principal_angle_sine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

}  // namespace calderon
