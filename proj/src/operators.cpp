#include "calderon/operators.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <unordered_map>

#include <Eigen/SVD>
#include <Eigen/SparseCholesky>

namespace calderon {

namespace {

std::vector<NodeId> set_union(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<NodeId> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<NodeId> set_difference(const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
  std::vector<NodeId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<NodeId> all_boundary(const Lattice& lat) {
  std::vector<NodeId> out(lat.num_boundary());
  for (std::size_t b = 0; b < out.size(); ++b) out[b] = lat.boundary_node(b);
  return out;
}

std::vector<NodeId> all_interior(const Lattice& lat) {
  std::vector<NodeId> out(lat.num_interior());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<NodeId>(i);
  return out;
}

std::unordered_map<NodeId, Eigen::Index> positions(const std::vector<NodeId>& nodes) {
  std::unordered_map<NodeId, Eigen::Index> pos;
  pos.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) pos.emplace(nodes[i], static_cast<Eigen::Index>(i));
  return pos;
}

std::vector<EdgeId> induced_edges(const Lattice& lat, const std::vector<NodeId>& nodes) {
  std::vector<char> member(lat.num_nodes(), 0);
  for (NodeId p : nodes) member[p] = 1;
  std::vector<EdgeId> out;
  for (std::size_t e = 0; e < lat.num_edges(); ++e)
    if (member[lat.edge(static_cast<EdgeId>(e)).a] && member[lat.edge(static_cast<EdgeId>(e)).b])
      out.push_back(static_cast<EdgeId>(e));
  return out;
}

SubmatrixOperator select_block(std::string base, int level, const Eigen::MatrixXd& full, const std::vector<NodeId>& full_rows,
                               const std::vector<NodeId>& full_cols, std::vector<NodeId> rows, std::vector<NodeId> cols) {
  const auto rpos = positions(full_rows);
  const auto cpos = positions(full_cols);
  SubmatrixOperator op{std::move(base), level, std::move(rows), std::move(cols), {}};
  op.entries.resize(static_cast<Eigen::Index>(op.rows.size()), static_cast<Eigen::Index>(op.cols.size()));
  for (std::size_t i = 0; i < op.rows.size(); ++i)
    for (std::size_t j = 0; j < op.cols.size(); ++j)
      op.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          full(rpos.at(op.rows[i]), cpos.at(op.cols[j]));
  return op;
}

struct Decomposition {
  Eigen::VectorXd sv;
  Eigen::MatrixXd v;
};

Decomposition right_singular(const Eigen::MatrixXd& a) {
  Decomposition d;
  if (a.rows() == 0) {
    d.sv.resize(0);
    d.v = Eigen::MatrixXd::Identity(a.cols(), a.cols());
    return d;
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  d.sv = svd.singularValues();
  d.v = svd.matrixV();
  return d;
}

// Ratio sigma[rank-1] / sigma[rank] around a cut that keeps `rank` values.
double gap_at(const Eigen::VectorXd& sv, std::size_t rank) {
  const auto k = static_cast<std::size_t>(sv.size());
  if (rank == 0 || rank >= k) return std::numeric_limits<double>::infinity();  // cut on exact zeros or nowhere
  const double below = sv[static_cast<Eigen::Index>(rank)];
  if (below == 0.0) return std::numeric_limits<double>::infinity();
  return sv[static_cast<Eigen::Index>(rank - 1)] / below;
}

KernelBasis make_kernel(const SubmatrixOperator& op, const Decomposition& d, std::size_t dim, double tol) {
  const auto n = static_cast<std::size_t>(op.entries.cols());
  KernelBasis k;
  k.level = op.level;
  k.support = op.cols;
  k.tol = tol;
  k.singular_values = d.sv;
  const double smax = d.sv.size() ? d.sv[0] : 0.0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < d.sv.size(); ++i)
    if (d.sv[i] > tol * smax && smax > 0.0) ++rank;
  k.numerical_dim = n - rank;
  dim = std::min(dim, n);
  k.vectors = d.v.rightCols(static_cast<Eigen::Index>(dim));
  k.gap_ratio = gap_at(d.sv, n - dim);
  k.ambiguous = k.gap_ratio < 10.0;
  return k;
}

}  // namespace

SubmatrixOperator extract_T(const Lattice& lat, const Eigen::MatrixXd& dtn, int t) {
  const int d = lat.dim();
  const int n = lat.size();
  if (t < d - 1 || t > d * n - 1)
    throw std::out_of_range("level " + std::to_string(t) + " outside [" + std::to_string(d - 1) + ", " +
                            std::to_string(d * n - 1) + "]");
  const auto s = lat.slice_sets(t);
  const auto boundary = all_boundary(lat);
  auto rows = set_difference(boundary, s.J_cum);
  if (rows.empty() || s.J_cum.empty()) throw std::out_of_range("empty operator at level " + std::to_string(t));
  return select_block("dtn", t, dtn, boundary, boundary, std::move(rows), s.J_cum);
}

SubmatrixOperator build_T1(const Lattice& lat, const ConductivityField& g, int t) {
  const auto s = lat.slice_sets(t);
  const auto next = lat.slice_sets(t + 1);
  const DirichletSolver solver(lat, g);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lat.num_boundary()),
                                              static_cast<Eigen::Index>(s.J_cum.size()));
  for (std::size_t j = 0; j < s.J_cum.size(); ++j)
    phi(static_cast<Eigen::Index>(lat.boundary_index(s.J_cum[j])), static_cast<Eigen::Index>(j)) = 1.0;
  const Eigen::MatrixXd ui = solver.solve_interior(phi);
  SubmatrixOperator op{"solution", t, next.L, s.J_cum, {}};
  op.entries.resize(static_cast<Eigen::Index>(next.L.size()), ui.cols());
  for (std::size_t i = 0; i < next.L.size(); ++i) op.entries.row(static_cast<Eigen::Index>(i)) = ui.row(next.L[i]);
  return op;
}

SubmatrixOperator build_T2(const Lattice& lat, const ConductivityField& g, int t) {
  const auto s = lat.slice_sets(t);
  const auto next = lat.slice_sets(t + 1);
  const auto sub = upper_subgraph(lat, t);
  const Eigen::MatrixXd dtn = subgraph_dtn(lat, g, sub);
  return select_block("upper_subgraph_dtn", t, dtn, sub.boundary, sub.boundary, set_difference(all_boundary(lat), s.J_cum),
                      next.L);
}

SubmatrixOperator build_T2_prime(const Lattice& lat, const ConductivityField& g, int t) {
  if (t < lat.dim() || t > lat.dim() * lat.size()) throw std::out_of_range("level outside the corner-subgraph range");
  const auto prev = lat.slice_sets(t - 1);
  const auto s = lat.slice_sets(t);
  const auto sub = corner_subgraph(lat, t);
  const Eigen::MatrixXd dtn = subgraph_dtn(lat, g, sub);
  return select_block("corner_subgraph_dtn", t, dtn, sub.boundary, sub.boundary, prev.J_cum, s.L);
}

KernelBasis kernel_basis(const SubmatrixOperator& op, double tol) {
  const auto d = right_singular(op.entries);
  const double smax = d.sv.size() ? d.sv[0] : 0.0;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < d.sv.size(); ++i)
    if (smax > 0.0 && d.sv[i] > tol * smax) ++rank;
  return make_kernel(op, d, static_cast<std::size_t>(op.entries.cols()) - rank, tol);
}

KernelBasis kernel_basis(const SubmatrixOperator& op, std::size_t dim, double tol) {
  return make_kernel(op, right_singular(op.entries), dim, tol);
}

Eigen::MatrixXd embed(const Eigen::MatrixXd& vectors, const std::vector<NodeId>& from, const std::vector<NodeId>& to) {
  const auto pos = positions(to);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(to.size()), vectors.cols());
  for (std::size_t i = 0; i < from.size(); ++i) {
    auto it = pos.find(from[i]);
    if (it == pos.end()) throw std::invalid_argument("embedding source is not a subset of the target support");
    out.row(it->second) = vectors.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

QuotientBasis complete_basis(const KernelBasis& current, const KernelBasis& previous) {
  QuotientBasis q;
  const Eigen::MatrixXd& k = current.vectors;
  if (previous.dim() == 0) {
    q.vectors = k;
    return q;
  }
  const Eigen::MatrixXd p = embed(previous.vectors, previous.support, current.support);
  const Eigen::MatrixXd coeff = k.transpose() * p;
  q.containment_residual = (p - k * coeff).colwise().norm().maxCoeff();
  if (current.dim() <= previous.dim()) {
    q.vectors.resize(k.rows(), 0);
    return q;
  }
  // Directions of span(k) orthogonal to the projection of the previous kernel.
  Eigen::BDCSVD<Eigen::MatrixXd> svd(coeff, Eigen::ComputeFullU);
  const auto extra = static_cast<Eigen::Index>(current.dim() - previous.dim());
  q.vectors = k * svd.matrixU().rightCols(extra);
  return q;
}

Eigen::MatrixXd quotient_basis(const KernelBasis& current, const KernelBasis& previous, double tol) {
  auto q = complete_basis(current, previous);
  if (q.containment_residual > tol)
    throw InconsistentData("previous kernel leaves the current kernel by " + std::to_string(q.containment_residual));
  return q.vectors;
}

SolutionSpaceBasis solution_space(const Lattice& lat, const ConductivityField& g, const KernelBasis& kernel, int t) {
  const auto s = lat.slice_sets(t);
  SolutionSpaceBasis out;
  out.level = t;
  out.support = set_union(s.L_cum, s.J_cum);
  const DirichletSolver solver(lat, g);
  std::vector<char> on_support(lat.num_nodes(), 0);
  for (NodeId p : out.support) on_support[p] = 1;

  out.fields.resize(static_cast<Eigen::Index>(out.support.size()), kernel.vectors.cols());
  double leak = 0.0;
  for (Eigen::Index j = 0; j < kernel.vectors.cols(); ++j) {
    BoundaryVector phi = BoundaryVector::Zero(static_cast<Eigen::Index>(lat.num_boundary()));
    for (std::size_t i = 0; i < kernel.support.size(); ++i)
      phi[static_cast<Eigen::Index>(lat.boundary_index(kernel.support[i]))] = kernel.vectors(static_cast<Eigen::Index>(i), j);
    const PotentialField u = solver.solve(phi);
    const double scale = u.cwiseAbs().maxCoeff();
    for (std::size_t p = 0; p < lat.num_nodes(); ++p)
      if (!on_support[p] && scale > 0.0) leak = std::max(leak, std::abs(u[static_cast<Eigen::Index>(p)]) / scale);
    for (std::size_t i = 0; i < out.support.size(); ++i) out.fields(static_cast<Eigen::Index>(i), j) = u[out.support[i]];
  }
  out.leakage = leak;
  out.leaked = leak > 1e-8;
  return out;
}

Subgraph upper_subgraph(const Lattice& lat, int t) {
  const auto s = lat.slice_sets(t);
  const auto next = lat.slice_sets(t + 1);
  Subgraph sub;
  sub.kind = SubgraphKind::upper;
  sub.interior = set_difference(all_interior(lat), next.L_cum);
  sub.boundary = set_union(next.L, set_difference(all_boundary(lat), s.J_cum));
  sub.edges = induced_edges(lat, set_union(sub.interior, sub.boundary));
  return sub;
}

Subgraph corner_subgraph(const Lattice& lat, int t) {
  const auto prev = lat.slice_sets(t - 1);
  const auto s = lat.slice_sets(t);
  Subgraph sub;
  sub.kind = SubgraphKind::corner;
  sub.interior = prev.L_cum;
  sub.boundary = set_union(prev.J_cum, s.L);
  sub.edges = induced_edges(lat, set_union(sub.interior, sub.boundary));
  return sub;
}

std::vector<NodeId> previous_layer_neighbors(const Lattice& lat, int t, NodeId p) {
  const auto prev = lat.slice_sets(t - 1);
  const auto region = set_union(prev.J_cum, prev.L_cum);
  std::vector<NodeId> out;
  for (const auto& nb : lat.neighbors(p))
    if (std::binary_search(region.begin(), region.end(), nb.node)) out.push_back(nb.node);
  std::sort(out.begin(), out.end());
  return out;
}

Subgraph reduced_subgraph(const Lattice& lat, int t, NodeId p) {
  const auto s = lat.slice_sets(t);
  if (!std::binary_search(s.L.begin(), s.L.end(), p)) throw std::invalid_argument("removed node must lie in L_t");
  const auto corner = corner_subgraph(lat, t);
  const auto mp = previous_layer_neighbors(lat, t, p);
  Subgraph sub;
  sub.kind = SubgraphKind::reduced;
  sub.interior = set_difference(corner.interior, mp);
  sub.boundary = set_difference(set_union(corner.boundary, mp), {p});
  for (EdgeId e : corner.edges) {
    const auto& k = lat.edge(e);
    if (k.a == p || k.b == p) continue;
    sub.edges.push_back(e);
  }
  return sub;
}

Eigen::MatrixXd subgraph_dtn(const Lattice& lat, const ConductivityField& g, const Subgraph& sub) {
  const auto ni = static_cast<Eigen::Index>(sub.interior.size());
  const auto nb = static_cast<Eigen::Index>(sub.boundary.size());
  const auto ipos = positions(sub.interior);
  const auto bpos = positions(sub.boundary);

  Eigen::MatrixXd abb = Eigen::MatrixXd::Zero(nb, nb);
  std::vector<Eigen::Triplet<double>> aii, aib;
  Eigen::VectorXd interior_diag = Eigen::VectorXd::Zero(ni);
  for (EdgeId e : sub.edges) {
    const auto& k = lat.edge(e);
    const double w = g[e];
    const auto ia = ipos.find(k.a), ib = ipos.find(k.b);
    const auto ba = bpos.find(k.a), bb = bpos.find(k.b);
    const bool a_in = ia != ipos.end(), b_in = ib != ipos.end();
    if (a_in) interior_diag[ia->second] += w;
    if (b_in) interior_diag[ib->second] += w;
    if (!a_in) abb(ba->second, ba->second) -= w;
    if (!b_in) abb(bb->second, bb->second) -= w;
    if (a_in && b_in) {
      aii.emplace_back(ia->second, ib->second, -w);
      aii.emplace_back(ib->second, ia->second, -w);
    } else if (a_in) {
      aib.emplace_back(ia->second, bb->second, w);
    } else if (b_in) {
      aib.emplace_back(ib->second, ba->second, w);
    } else {
      abb(ba->second, bb->second) += w;
      abb(bb->second, ba->second) += w;
    }
  }
  if (ni == 0) return abb;
  for (Eigen::Index i = 0; i < ni; ++i) aii.emplace_back(i, i, interior_diag[i]);
  Eigen::SparseMatrix<double> neg_aii(ni, ni), coupling(ni, nb);
  neg_aii.setFromTriplets(aii.begin(), aii.end());
  coupling.setFromTriplets(aib.begin(), aib.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(neg_aii);
  if (ldlt.info() != Eigen::Success) throw std::logic_error("subgraph interior block is singular");
  const Eigen::MatrixXd rhs = Eigen::MatrixXd(coupling);
  const Eigen::MatrixXd x = ldlt.solve(rhs);
  return abb + Eigen::MatrixXd(coupling.transpose()) * x;
}

double max_principal_angle_sine(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols() || a.rows() != b.rows()) return 1.0;
  if (a.cols() == 0) return 0.0;
  const Eigen::MatrixXd r = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  return std::min(1.0, svd.singularValues()[0]);
}

}  // namespace calderon
