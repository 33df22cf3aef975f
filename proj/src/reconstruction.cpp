#include "calderon/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "calderon/operators.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

namespace {

// Cauchy data for k excitations at once; columns are excitations.
struct MarchResult {
  Eigen::MatrixXd u;  // num_nodes x k
  Eigen::VectorXd residual;
};

MarchResult march(const Lattice& lat, const PartialConductivity& known, const Eigen::MatrixXd& phi,
                  const Eigen::MatrixXd& psi, int t) {
  const auto k = phi.cols();
  MarchResult out;
  out.u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lat.num_nodes()), k);
  out.u.bottomRows(phi.rows()) = phi;
  out.residual = Eigen::VectorXd::Zero(k);

  auto gamma = [&](EdgeId e) {
    if (!known.is_known(e)) throw std::logic_error("marching reached an edge with unknown conductivity");
    return known.value[e];
  };

  const auto s_prev = lat.slice_sets(t - 1);
  // Interior nodes of L_s, s <= t, in NodeId order; within a level this is
  // ascending first coordinate, so p - e_1 + e_i is always finished before p.
  for (int s = lat.dim(); s <= t; ++s) {
    for (NodeId p : lat.slice_sets(s).L) {
      const int x0 = lat.coords(p)[0];
      const Neighbor* back = nullptr;
      for (const auto& nb : lat.neighbors(p))
        if (lat.coords(nb.node)[0] == x0 - 1) back = &nb;
      const NodeId q = back->node;
      const double gpq = gamma(back->edge);
      if (lat.is_boundary(q)) {
        // psi_q = gamma_pq (u_p - u_q)
        const auto b = static_cast<Eigen::Index>(lat.boundary_index(q));
        out.u.row(p) = out.u.row(q) + psi.row(b) / gpq;
      } else {
        // Kirchhoff at q solved for u_p.
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(k);
        for (const auto& nb : lat.neighbors(q)) {
          if (nb.node == p) continue;
          acc += gamma(nb.edge) * (out.u.row(q) - out.u.row(nb.node));
        }
        out.u.row(p) = out.u.row(q) + acc / gpq;
      }
    }
  }

  // Unused equations: Kirchhoff on L_{t-1}^S, currents on J_{t-1}^S. Scaled by
  // the size of the whole excitation, not of its restriction to the data set.
  double gmax = 0.0;
  Eigen::VectorXd res = Eigen::VectorXd::Zero(k);
  for (NodeId q : s_prev.L_cum) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(k);
    for (const auto& nb : lat.neighbors(q)) {
      const double g = gamma(nb.edge);
      gmax = std::max(gmax, g);
      acc += g * (out.u.row(nb.node) - out.u.row(q));
    }
    res = res.cwiseMax(acc.transpose().cwiseAbs());
  }
  for (NodeId p : s_prev.J_cum) {
    const auto& nb = lat.neighbors(p).front();
    const double g = gamma(nb.edge);
    gmax = std::max(gmax, g);
    const auto b = static_cast<Eigen::Index>(lat.boundary_index(p));
    const Eigen::RowVectorXd cur = g * (out.u.row(nb.node) - out.u.row(p));
    res = res.cwiseMax((cur - psi.row(b)).transpose().cwiseAbs());
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    const double sc = std::max(psi.col(j).cwiseAbs().maxCoeff(), gmax * out.u.col(j).cwiseAbs().maxCoeff());
    out.residual[j] = sc > 0.0 ? res[j] / sc : res[j];
  }
  return out;
}

std::vector<NodeId> sorted_union(std::vector<NodeId> a, const std::vector<NodeId>& b, const std::vector<NodeId>& c) {
  a.insert(a.end(), b.begin(), b.end());
  a.insert(a.end(), c.begin(), c.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

}  // namespace

PartialConductivity PartialConductivity::from(const ConductivityField& g) {
  PartialConductivity out(g.size());
  for (std::size_t e = 0; e < g.size(); ++e) out.set(static_cast<EdgeId>(e), g[static_cast<EdgeId>(e)]);
  return out;
}

CauchyResult propagate_cauchy(const Lattice& lat, const PartialConductivity& known, const BoundaryVector& phi,
                              const BoundaryVector& psi, int t, double tol) {
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());
  if (phi.size() != nb || psi.size() != nb) throw std::invalid_argument("Cauchy data has the wrong length");
  if (known.value.size() != lat.num_edges()) throw std::invalid_argument("conductivity has the wrong length");
  const auto m = march(lat, known, phi, psi, t);
  CauchyResult r;
  r.u = m.u.col(0);
  r.residual = m.residual[0];
  r.consistent = r.residual <= tol;
  return r;
}

FluxSystem build_flux_system(const Lattice& lat, const PartialConductivity& known, int t,
                             std::span<const Excitation> excitations) {
  FluxSystem sys;
  sys.level = t;
  sys.unknown_edges = lat.interface_edges(t);
  std::vector<int> column(lat.num_edges(), -1);
  for (std::size_t j = 0; j < sys.unknown_edges.size(); ++j) column[sys.unknown_edges[j]] = static_cast<int>(j);

  const auto s = lat.slice_sets(t);
  const auto next = lat.slice_sets(t + 1);
  const auto rows = sorted_union(s.L, next.L, s.J);

  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> rhs;
  for (NodeId p : rows) {
    for (std::size_t k = 0; k < excitations.size(); ++k) {
      const auto& u = excitations[k].u;
      const auto r = static_cast<Eigen::Index>(rhs.size());
      double b = 0.0;
      if (lat.is_boundary(p)) {
        const auto& nb = lat.neighbors(p).front();
        trip.emplace_back(r, column[nb.edge], u[p] - u[nb.node]);
        b = -excitations[k].psi[static_cast<Eigen::Index>(lat.boundary_index(p))];
      } else {
        for (const auto& nb : lat.neighbors(p)) {
          const double diff = u[p] - u[nb.node];
          if (column[nb.edge] >= 0)
            trip.emplace_back(r, column[nb.edge], diff);
          else if (known.is_known(nb.edge))
            b -= known.value[nb.edge] * diff;
          // Remaining edges lie above the interface where the excitation vanishes.
        }
      }
      rhs.push_back(b);
      sys.row_labels.emplace_back(k, p);
    }
  }
  sys.matrix.resize(static_cast<Eigen::Index>(rhs.size()), static_cast<Eigen::Index>(sys.unknown_edges.size()));
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  sys.rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return sys;
}

SliceSolution recover_slice(const FluxSystem& sys, double rank_tol) {
  const auto ncols = sys.matrix.cols();
  SliceSolution sol;
  sol.gamma = Eigen::VectorXd::Zero(ncols);
  if (ncols == 0) return sol;

  // Per-node compression: a node's rows touch only its own interface edges.
  Eigen::Index begin = 0;
  const auto nrows = sys.matrix.rows();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::Index out_row = 0;
  std::vector<double> out_rhs;
  while (begin < nrows) {
    Eigen::Index end = begin + 1;
    while (end < nrows && sys.row_labels[end].second == sys.row_labels[begin].second) ++end;
    std::vector<int> cols;
    for (Eigen::Index r = begin; r < end; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sys.matrix, r); it; ++it)
        cols.push_back(static_cast<int>(it.col()));
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    const auto m = end - begin;
    const auto c = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, c);
    for (Eigen::Index r = begin; r < end; ++r)
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sys.matrix, r); it; ++it)
        block(r - begin, std::lower_bound(cols.begin(), cols.end(), static_cast<int>(it.col())) - cols.begin()) =
            it.value();
    Eigen::VectorXd b = sys.rhs.segment(begin, m);
    const Eigen::Index keep = std::min(m, c);
    Eigen::MatrixXd r_block;
    Eigen::VectorXd qb;
    if (m > c) {
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(block);
      r_block = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
      qb = (qr.householderQ().transpose() * b).head(keep);
    } else {
      r_block = block;
      qb = b;
    }
    for (Eigen::Index i = 0; i < keep; ++i) {
      for (Eigen::Index j = 0; j < c; ++j)
        if (r_block(i, j) != 0.0) trip.emplace_back(out_row, cols[j], r_block(i, j));
      out_rhs.push_back(qb[i]);
      ++out_row;
    }
    begin = end;
  }
  Eigen::SparseMatrix<double> compressed(out_row, ncols);
  compressed.setFromTriplets(trip.begin(), trip.end());
  const Eigen::MatrixXd a = compressed;
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(out_rhs.data(), out_row);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const double smin = (sv.size() == ncols && smax > 0.0) ? sv[sv.size() - 1] : 0.0;
  sol.min_singular_ratio = smax > 0.0 ? smin / smax : 0.0;
  sol.rank_deficient = sol.min_singular_ratio <= rank_tol;
  sol.gamma = svd.solve(b);

  const double bnorm = sys.rhs.norm();
  const double rnorm = (sys.matrix * sol.gamma - sys.rhs).norm();
  sol.residual = bnorm > 0.0 ? rnorm / bnorm : rnorm;
  for (Eigen::Index j = 0; j < ncols; ++j)
    if (!(sol.gamma[j] > 0.0)) sol.nonpositive.push_back(sys.unknown_edges[static_cast<std::size_t>(j)]);
  return sol;
}

int default_max_level(const Lattice& lat) {
  const int d = lat.dim();
  const int n = lat.size();
  return std::min(d * ((n + 2) / 2), d * n - 1);
}

CornerRun reconstruct_from_corner(const Lattice& lat, const Eigen::MatrixXd& dtn, const Corner& c,
                                  const ReconstructionOptions& opts, std::optional<int> max_level) {
  const int d = lat.dim();
  const int n = lat.size();
  const int last = std::min(max_level.value_or(default_max_level(lat)), d * n - 1);
  const auto map = lat.corner_map(c);
  const Eigen::MatrixXd frame_dtn = c.is_origin() ? dtn : permute_dtn(lat, dtn, map);
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());

  CornerRun run;
  run.corner = c;
  run.max_level = last;
  PartialConductivity known(lat.num_edges());
  KernelBasis previous;

  for (int t = d - 1; t <= last; ++t) {
    SliceDiagnostics diag;
    diag.corner = c;
    diag.level = t;
    const auto op = extract_T(lat, frame_dtn, t);
    diag.kernel_dim_expected = expected_kernel_dim(lat, t);
    KernelBasis kernel = kernel_basis(op, opts.kernel_tol);
    diag.kernel_dim_numerical = kernel.numerical_dim;
    if (kernel.dim() != diag.kernel_dim_expected) {
      diag.degraded = true;
      kernel = kernel_basis(op, diag.kernel_dim_expected, opts.kernel_tol);
    }
    diag.kernel_gap = kernel.gap_ratio;
    diag.kernel_ambiguous = kernel.ambiguous;

    const auto quotient = complete_basis(kernel, previous);
    diag.containment_residual = quotient.containment_residual;
    if (quotient.containment_residual > opts.containment_tol) diag.degraded = true;
    diag.quotient_dim = static_cast<std::size_t>(quotient.vectors.cols());

    const auto k = quotient.vectors.cols();
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(nb, k);
    for (std::size_t i = 0; i < kernel.support.size(); ++i)
      phi.row(static_cast<Eigen::Index>(lat.boundary_index(kernel.support[i]))) =
          quotient.vectors.row(static_cast<Eigen::Index>(i));
    const Eigen::MatrixXd psi = frame_dtn * phi;

    const auto m = march(lat, known, phi, psi, t);
    diag.cauchy_residual = k ? m.residual.maxCoeff() : 0.0;
    if (diag.cauchy_residual > opts.cauchy_tol) diag.degraded = true;
    std::vector<Excitation> ex(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) ex[static_cast<std::size_t>(j)] = {m.u.col(j), psi.col(j)};

    const auto sys = build_flux_system(lat, known, t, ex);
    const auto sol = recover_slice(sys, opts.rank_tol);
    diag.flux_residual = sol.residual;
    diag.flux_min_singular_ratio = sol.min_singular_ratio;
    diag.num_edges = sys.unknown_edges.size();
    diag.nonpositive = sol.nonpositive.size();
    if (sol.rank_deficient || !sol.nonpositive.empty() || !sol.gamma.allFinite()) diag.degraded = true;
    for (std::size_t j = 0; j < sys.unknown_edges.size(); ++j)
      known.set(sys.unknown_edges[j], sol.gamma[static_cast<Eigen::Index>(j)]);

    run.slices.push_back(diag);
    previous = std::move(kernel);
  }

  // Back to the original frame: frame edge f is original edge edge_perm[f].
  run.estimates = PartialConductivity(lat.num_edges());
  for (std::size_t f = 0; f < lat.num_edges(); ++f)
    if (known.is_known(static_cast<EdgeId>(f))) run.estimates.set(map.edge_perm[f], known.value[f]);
  return run;
}

ReconstructionReport reconstruct(const Lattice& lat, const Eigen::MatrixXd& dtn, const ReconstructionOptions& opts) {
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());
  if (dtn.rows() != nb || dtn.cols() != nb) throw std::invalid_argument("DtN matrix does not match the lattice");
  if (!dtn.allFinite()) throw std::invalid_argument("DtN matrix has non-finite entries");

  ReconstructionReport rep;
  rep.corners = opts.corners.empty() ? all_corners(lat.dim()) : opts.corners;
  std::sort(rep.corners.begin(), rep.corners.end(), [](const Corner& a, const Corner& b) { return a.mask() < b.mask(); });
  rep.corners.erase(std::unique(rep.corners.begin(), rep.corners.end()), rep.corners.end());
  for (const auto& c : rep.corners)
    if (static_cast<int>(c.flags.size()) != lat.dim()) throw std::invalid_argument("corner has the wrong dimension");

  const int d = lat.dim();
  const int n = lat.size();
  const int valid_last = d * n - 1;
  std::vector<CornerMap> maps;
  for (const auto& c : rep.corners) maps.push_back(lat.corner_map(c));

  // Assignment: closest corner whose valid range reaches the edge.
  rep.source_corner.assign(lat.num_edges(), -1);
  std::vector<int> needed(rep.corners.size(), -1);
  std::vector<std::size_t> order(rep.corners.size());
  for (std::size_t e = 0; e < lat.num_edges(); ++e) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return lat.corner_distance(static_cast<EdgeId>(e), rep.corners[a]) <
             lat.corner_distance(static_cast<EdgeId>(e), rep.corners[b]);
    });
    for (std::size_t ci : order) {
      const int level = lat.edge_level(maps[ci].edge_perm[e]);
      if (level <= valid_last) {
        rep.source_corner[e] = static_cast<int>(ci);
        needed[ci] = std::max(needed[ci], level);
        break;
      }
    }
  }

  const int base = default_max_level(lat);
  std::vector<int> last(rep.corners.size(), base);
  for (std::size_t ci = 0; ci < rep.corners.size(); ++ci)
    if (needed[ci] > base) {
      last[ci] = needed[ci];
      rep.diagnostics.push_back("corner " + rep.corners[ci].to_string() + ": loop extended from level " +
                                std::to_string(base) + " to " + std::to_string(needed[ci]) + " to cover its edges");
    }

  std::vector<CornerRun> runs(rep.corners.size());
  parallel_for(rep.corners.size(),
               [&](std::size_t ci) { runs[ci] = reconstruct_from_corner(lat, dtn, rep.corners[ci], opts, last[ci]); });

  rep.estimates.assign(lat.num_edges(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t e = 0; e < lat.num_edges(); ++e) {
    const int ci = rep.source_corner[e];
    if (ci >= 0 && runs[static_cast<std::size_t>(ci)].estimates.is_known(static_cast<EdgeId>(e)))
      rep.estimates[e] = runs[static_cast<std::size_t>(ci)].estimates.value[e];
    else {
      rep.source_corner[e] = -1;
      ++rep.uncovered_edges;
    }
  }
  if (rep.uncovered_edges)
    rep.diagnostics.push_back(std::to_string(rep.uncovered_edges) +
                              " edges lie beyond the last valid level of every selected corner");
  for (auto& r : runs)
    for (auto& s : r.slices) {
      if (s.degraded) ++rep.degraded_slices;
      rep.slices.push_back(std::move(s));
    }
  if (rep.degraded_slices) rep.diagnostics.push_back(std::to_string(rep.degraded_slices) + " slices degraded");
  return rep;
}

}  // namespace calderon
