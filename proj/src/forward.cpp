#include "calderon/forward.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "calderon/parallel.hpp"

namespace calderon {

ConductivityField::ConductivityField(const Lattice& lat, std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() != lat.num_edges())
    throw std::invalid_argument("conductivity has " + std::to_string(values_.size()) + " values, lattice has " +
                                std::to_string(lat.num_edges()) + " edges");
  for (std::size_t e = 0; e < values_.size(); ++e)
    if (!(values_[e] > 0.0) || !std::isfinite(values_[e]))
      throw std::invalid_argument("conductivity must be positive and finite (edge " + std::to_string(e) + ")");
}

ConductivityField ConductivityField::constant(const Lattice& lat, double value) {
  return ConductivityField(lat, std::vector<double>(lat.num_edges(), value));
}

ConductivityField ConductivityField::uniform(const Lattice& lat, double lo, double hi, std::uint64_t seed) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("conductivity range must satisfy 0 < lo <= hi");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(lat.num_edges());
  for (auto& x : v) x = (hi > lo) ? dist(rng) : lo;
  return ConductivityField(lat, std::move(v));
}

ConductivityField ConductivityField::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("scale factor must be positive");
  ConductivityField out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

ConductivityField ConductivityField::permuted(const CornerMap& map) const {
  ConductivityField out = *this;
  for (std::size_t e = 0; e < values_.size(); ++e) out.values_[map.edge_perm[e]] = values_[e];
  return out;
}

Eigen::SparseMatrix<double> assemble_laplacian(const Lattice& lat, const ConductivityField& g) {
  const auto n = static_cast<Eigen::Index>(lat.num_nodes());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(lat.num_nodes() + 2 * lat.num_edges());
  for (Eigen::Index p = 0; p < n; ++p) {
    double diag = 0.0;
    for (const auto& nb : lat.neighbors(static_cast<NodeId>(p))) {
      trip.emplace_back(p, nb.node, g[nb.edge]);
      diag -= g[nb.edge];
    }
    trip.emplace_back(p, p, diag);
  }
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

Eigen::VectorXd kirchhoff_row(const Lattice& lat, const ConductivityField& g, NodeId p) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lat.num_nodes()));
  for (const auto& nb : lat.neighbors(p)) {
    v[nb.node] = g[nb.edge];
    v[p] -= g[nb.edge];
  }
  return v;
}

DirichletSolver::DirichletSolver(const Lattice& lat, const ConductivityField& g)
    : num_interior_(lat.num_interior()), num_boundary_(lat.num_boundary()) {
  const auto ni = static_cast<Eigen::Index>(num_interior_);
  const auto nb = static_cast<Eigen::Index>(num_boundary_);
  std::vector<Eigen::Triplet<double>> interior, coupling;
  for (Eigen::Index p = 0; p < ni; ++p) {
    double diag = 0.0;
    for (const auto& nbr : lat.neighbors(static_cast<NodeId>(p))) {
      const double w = g[nbr.edge];
      diag += w;
      if (lat.is_interior(nbr.node))
        interior.emplace_back(p, nbr.node, -w);
      else
        coupling.emplace_back(p, static_cast<Eigen::Index>(lat.boundary_index(nbr.node)), w);
    }
    interior.emplace_back(p, p, diag);
  }
  Eigen::SparseMatrix<double> neg_aii(ni, ni);
  neg_aii.setFromTriplets(interior.begin(), interior.end());
  coupling_.resize(ni, nb);
  coupling_.setFromTriplets(coupling.begin(), coupling.end());
  factor_.compute(neg_aii);
  if (factor_.info() != Eigen::Success)
    throw std::logic_error("interior Laplacian factorization failed; the block must be definite for positive conductivity");
}

Eigen::MatrixXd DirichletSolver::solve_interior(const Eigen::MatrixXd& phi) const {
  if (phi.rows() != static_cast<Eigen::Index>(num_boundary_))
    throw std::invalid_argument("boundary data has the wrong length");
  // -A_II u_I = A_IB phi
  Eigen::MatrixXd rhs = coupling_ * phi;
  Eigen::MatrixXd u = factor_.solve(rhs);
  if (factor_.info() != Eigen::Success) throw std::logic_error("interior Dirichlet solve failed");
  return u;
}

PotentialField DirichletSolver::solve(const BoundaryVector& phi) const {
  PotentialField u(static_cast<Eigen::Index>(num_interior_ + num_boundary_));
  u.head(static_cast<Eigen::Index>(num_interior_)) = solve_interior(phi);
  u.tail(static_cast<Eigen::Index>(num_boundary_)) = phi;
  return u;
}

BoundaryVector boundary_current(const Lattice& lat, const ConductivityField& g, const PotentialField& u) {
  if (u.size() != static_cast<Eigen::Index>(lat.num_nodes())) throw std::invalid_argument("potential has the wrong length");
  BoundaryVector psi(static_cast<Eigen::Index>(lat.num_boundary()));
  for (std::size_t b = 0; b < lat.num_boundary(); ++b) {
    const NodeId p = lat.boundary_node(b);
    const auto& nb = lat.neighbors(p).front();
    psi[static_cast<Eigen::Index>(b)] = g[nb.edge] * (u[nb.node] - u[p]);
  }
  return psi;
}

DtnMatrix assemble_dtn(const Lattice& lat, const ConductivityField& g) {
  const DirichletSolver solver(lat, g);
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());

  // Column p: currents induced by the unit excitation e_p. The interior
  // neighbour of boundary node b is the only interior node reading phi_b.
  std::vector<NodeId> inner(lat.num_boundary());
  std::vector<double> weight(lat.num_boundary());
  for (std::size_t b = 0; b < lat.num_boundary(); ++b) {
    const auto& nbr = lat.neighbors(lat.boundary_node(b)).front();
    inner[b] = nbr.node;
    weight[b] = g[nbr.edge];
  }

  constexpr Eigen::Index chunk = 64;
  const auto num_chunks = static_cast<std::size_t>((nb + chunk - 1) / chunk);
  DtnMatrix out;
  out.entries.resize(nb, nb);
  parallel_for(num_chunks, [&](std::size_t c) {
    const Eigen::Index begin = static_cast<Eigen::Index>(c) * chunk;
    const Eigen::Index width = std::min(chunk, nb - begin);
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(nb, width);
    for (Eigen::Index j = 0; j < width; ++j) phi(begin + j, j) = 1.0;
    const Eigen::MatrixXd ui = solver.solve_interior(phi);
    for (Eigen::Index j = 0; j < width; ++j)
      for (Eigen::Index b = 0; b < nb; ++b)
        out.entries(b, begin + j) = weight[b] * (ui(inner[b], j) - phi(b, j));
  });

  const double scale = out.entries.cwiseAbs().maxCoeff();
  const Eigen::MatrixXd sym = 0.5 * (out.entries + out.entries.transpose());
  out.asymmetry = scale > 0 ? (out.entries - out.entries.transpose()).cwiseAbs().maxCoeff() / scale : 0.0;
  out.entries = sym;
  return out;
}

DtnDiagnostics diagnose_dtn(const Eigen::MatrixXd& dtn) {
  DtnDiagnostics d;
  const double scale = dtn.size() ? dtn.cwiseAbs().maxCoeff() : 0.0;
  if (scale == 0.0) return d;
  d.asymmetry = (dtn - dtn.transpose()).cwiseAbs().maxCoeff() / scale;
  d.max_row_sum = dtn.rowwise().sum().cwiseAbs().maxCoeff() / scale;
  for (Eigen::Index i = 0; i < dtn.rows(); ++i)
    for (Eigen::Index j = 0; j < dtn.cols(); ++j) {
      if (i == j)
        d.max_positive_diagonal = std::max(d.max_positive_diagonal, dtn(i, j) / scale);
      else
        d.max_negative_off_diagonal = std::max(d.max_negative_off_diagonal, -dtn(i, j) / scale);
    }
  return d;
}

Eigen::MatrixXd permute_dtn(const Lattice& lat, const Eigen::MatrixXd& dtn, const CornerMap& map) {
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());
  std::vector<Eigen::Index> perm(lat.num_boundary());
  for (std::size_t b = 0; b < lat.num_boundary(); ++b)
    perm[b] = static_cast<Eigen::Index>(lat.boundary_index(map.node_perm[lat.boundary_node(b)]));
  Eigen::MatrixXd out(nb, nb);
  for (Eigen::Index i = 0; i < nb; ++i)
    for (Eigen::Index j = 0; j < nb; ++j) out(i, j) = dtn(perm[i], perm[j]);
  return out;
}

}  // namespace calderon
