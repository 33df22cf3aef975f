#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "calderon/forward.hpp"
#include "calderon/operators.hpp"
#include "calderon/reconstruction.hpp"

using namespace calderon;

namespace {

// Truth restricted to edges strictly below level t.
PartialConductivity known_below(const Lattice& lat, const ConductivityField& g, int t) {
  PartialConductivity k(lat.num_edges());
  for (std::size_t e = 0; e < lat.num_edges(); ++e)
    if (lat.edge_level(static_cast<EdgeId>(e)) < t) k.set(static_cast<EdgeId>(e), g[static_cast<EdgeId>(e)]);
  return k;
}

// Corner excitations at level t computed with the true conductivity.
std::vector<Excitation> exact_excitations(const Lattice& lat, const ConductivityField& g, const Eigen::MatrixXd& dtn,
                                          int t) {
  const auto k = kernel_basis(extract_T(lat, dtn, t), 1e-10);
  const DirichletSolver solver(lat, g);
  std::vector<Excitation> out;
  for (Eigen::Index j = 0; j < k.vectors.cols(); ++j) {
    BoundaryVector phi = BoundaryVector::Zero(static_cast<Eigen::Index>(lat.num_boundary()));
    for (std::size_t i = 0; i < k.support.size(); ++i)
      phi[static_cast<Eigen::Index>(lat.boundary_index(k.support[i]))] = k.vectors(static_cast<Eigen::Index>(i), j);
    const auto u = solver.solve(phi);
    out.push_back({u, boundary_current(lat, g, u)});
  }
  return out;
}

double max_error(const Lattice& lat, const ConductivityField& g, const SliceSolution& sol, const FluxSystem& sys) {
  double err = 0.0;
  for (std::size_t j = 0; j < sys.unknown_edges.size(); ++j)
    err = std::max(err, std::abs(sol.gamma[static_cast<Eigen::Index>(j)] - g[sys.unknown_edges[j]]));
  (void)lat;
  return err;
}

}  // namespace

TEST_SUITE("reconstruction") {
  TEST_CASE("flux system layout on the d=3, n=2 lattice") {
    const Lattice lat(3, 2);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 1);
    const auto dtn = assemble_dtn(lat, g).entries;
    const auto ex = exact_excitations(lat, g, dtn, 3);
    REQUIRE(ex.size() == 6);
    const auto sys = build_flux_system(lat, known_below(lat, g, 3), 3, std::span(ex.data(), 1));
    CHECK(sys.matrix.rows() == 10);
    CHECK(sys.matrix.cols() == 9);
    CHECK(sys.unknown_edges == lat.interface_edges(3));

    const auto& u = ex[0].u;
    const auto next = lat.slice_sets(4);
    for (Eigen::Index r = 0; r < sys.matrix.rows(); ++r) {
      const NodeId p = sys.row_labels[static_cast<std::size_t>(r)].second;
      const Eigen::RowVectorXd row = Eigen::MatrixXd(sys.matrix).row(r);
      if (lat.is_boundary(p)) {
        // K^- node: one unknown edge to its interior neighbour, which sits in L_4 where u vanishes.
        CHECK((row.array() != 0.0).count() <= 1);
        CHECK(row.sum() == doctest::Approx(u[p]));
        CHECK(sys.rhs[r] == doctest::Approx(-ex[0].psi[static_cast<Eigen::Index>(lat.boundary_index(p))]));
      } else if (std::binary_search(next.L.begin(), next.L.end(), p)) {
        CHECK(sys.rhs[r] == 0.0);
        for (const auto& nb : lat.neighbors(p)) {
          const auto it = std::find(sys.unknown_edges.begin(), sys.unknown_edges.end(), nb.edge);
          if (it != sys.unknown_edges.end()) CHECK(row[it - sys.unknown_edges.begin()] == doctest::Approx(-u[nb.node]));
        }
      }
    }
  }

  TEST_CASE("base slice recovers gamma as -psi/phi") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 2);
    const auto dtn = assemble_dtn(lat, g).entries;
    const auto ex = exact_excitations(lat, g, dtn, 2);
    const auto sys = build_flux_system(lat, PartialConductivity(lat.num_edges()), 2, ex);
    REQUIRE(sys.unknown_edges.size() == 3);
    for (EdgeId e : sys.unknown_edges) {
      const auto& k = lat.edge(e);
      const NodeId b = lat.is_boundary(k.a) ? k.a : k.b;
      for (const auto& x : ex) {
        const double phi = x.u[b];
        if (std::abs(phi) < 1e-3) continue;
        CHECK(-x.psi[static_cast<Eigen::Index>(lat.boundary_index(b))] / phi == doctest::Approx(g[e]).epsilon(1e-10));
      }
    }
    const auto sol = recover_slice(sys);
    CHECK(max_error(lat, g, sol, sys) < 1e-12);
    CHECK(sol.residual < 1e-12);
  }

  TEST_CASE("marching with zero data gives zero") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 3);
    const auto nb = static_cast<Eigen::Index>(lat.num_boundary());
    for (int t = 3; t <= 7; ++t) {
      const auto r = propagate_cauchy(lat, known_below(lat, g, t), BoundaryVector::Zero(nb), BoundaryVector::Zero(nb), t);
      CHECK(r.u.cwiseAbs().maxCoeff() == 0.0);
      CHECK(r.consistent);
    }
  }

  TEST_CASE("marching reproduces the forward potential on the corner region") {
    for (int d = 2; d <= 3; ++d) {
      const int n = 4;
      const Lattice lat(d, n);
      const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 4);
      const DirichletSolver solver(lat, g);
      const BoundaryVector phi = BoundaryVector::Random(static_cast<Eigen::Index>(lat.num_boundary()));
      const auto u = solver.solve(phi);
      const auto psi = boundary_current(lat, g, u);
      for (int t = d; t <= d * n; ++t) {
        const auto r = propagate_cauchy(lat, known_below(lat, g, t), phi, psi, t);
        CAPTURE(t);
        for (NodeId p : lat.slice_sets(t).L_cum) CHECK(std::abs(r.u[p] - u[p]) < 1e-9);
        CHECK(r.consistent);
      }
    }
  }

  TEST_CASE("duplicated excitations give the same slice") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 5);
    const auto dtn = assemble_dtn(lat, g).entries;
    auto ex = exact_excitations(lat, g, dtn, 4);
    const auto a = recover_slice(build_flux_system(lat, known_below(lat, g, 4), 4, ex));
    const auto n = ex.size();
    for (std::size_t i = 0; i < n; ++i) ex.push_back(ex[i]);
    const auto b = recover_slice(build_flux_system(lat, known_below(lat, g, 4), 4, ex));
    CHECK((a.gamma - b.gamma).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("each slice is exact given exact lower slices") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 6);
    const auto dtn = assemble_dtn(lat, g).entries;
    for (int t = 2; t <= 8; ++t) {
      const auto ex = exact_excitations(lat, g, dtn, t);
      const auto sys = build_flux_system(lat, known_below(lat, g, t), t, ex);
      const auto sol = recover_slice(sys);
      CAPTURE(t);
      CHECK_FALSE(sol.rank_deficient);
      CHECK(sol.nonpositive.empty());
      CHECK(max_error(lat, g, sol, sys) < 1e-9);
    }
  }

  TEST_CASE("rank-deficient systems are flagged") {
    FluxSystem sys;
    sys.unknown_edges = {0, 1};
    sys.row_labels = {{0, 0}, {1, 0}};
    sys.matrix.resize(2, 2);
    sys.matrix.insert(0, 0) = 1.0;
    sys.matrix.insert(0, 1) = 1.0;
    sys.matrix.insert(1, 0) = 2.0;
    sys.matrix.insert(1, 1) = 2.0;
    sys.rhs = Eigen::Vector2d(1.0, 2.0);
    const auto sol = recover_slice(sys);
    CHECK(sol.rank_deficient);
  }

  TEST_CASE("origin corner run") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 7);
    const auto dtn = assemble_dtn(lat, g).entries;
    const auto run = reconstruct_from_corner(lat, dtn, Corner::origin(3), ReconstructionOptions{});
    CHECK(run.max_level == default_max_level(lat));
    CHECK(run.slices.size() == static_cast<std::size_t>(3 * ((3 + 2) / 2) - (3 - 1) + 1));
    for (const auto& s : run.slices) {
      CHECK_FALSE(s.degraded);
      CHECK(s.kernel_dim_numerical == s.kernel_dim_expected);
    }
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto id = static_cast<EdgeId>(e);
      CHECK(run.estimates.is_known(id) == (lat.edge_level(id) <= run.max_level));
      if (run.estimates.is_known(id)) CHECK(std::abs(run.estimates.value[e] - g[id]) < 1e-9);
    }
  }

  TEST_CASE("default max level") {
    CHECK(default_max_level(Lattice(3, 4)) == 9);
    CHECK(default_max_level(Lattice(2, 5)) == 6);
    CHECK(default_max_level(Lattice(2, 1)) == 1);
    CHECK(default_max_level(Lattice(3, 2)) == 5);
  }

  TEST_CASE("origin-only reconstruction covers only reachable edges") {
    const Lattice lat(2, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 8);
    ReconstructionOptions opts;
    opts.corners = {Corner::origin(2)};
    const auto rep = reconstruct(lat, assemble_dtn(lat, g).entries, opts);
    std::size_t uncovered = 0;
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto id = static_cast<EdgeId>(e);
      if (lat.edge_level(id) <= 2 * 3 - 1) {
        CHECK(rep.source_corner[e] == 0);
        CHECK(std::abs(rep.estimates[e] - g[id]) < 1e-9);
      } else {
        CHECK(rep.source_corner[e] == -1);
        CHECK(std::isnan(rep.estimates[e]));
        ++uncovered;
      }
    }
    CHECK(uncovered > 0);
    CHECK(rep.uncovered_edges == uncovered);
  }

  TEST_CASE("all corners cover every edge and pick the closest corner") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 9);
    const auto rep = reconstruct(lat, assemble_dtn(lat, g).entries);
    CHECK(rep.uncovered_edges == 0);
    CHECK(rep.degraded_slices == 0);
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto id = static_cast<EdgeId>(e);
      REQUIRE(rep.source_corner[e] >= 0);
      CHECK(std::abs(rep.estimates[e] - g[id]) < 1e-9);
      const double chosen = lat.corner_distance(id, rep.corners[static_cast<std::size_t>(rep.source_corner[e])]);
      for (const auto& c : rep.corners) CHECK(chosen <= lat.corner_distance(id, c));
    }
  }

  TEST_CASE("a reflection-symmetric conductivity gives identical corner estimates") {
    const Lattice lat(2, 4);
    auto base = ConductivityField::uniform(lat, 0.5, 2.0, 10);
    std::vector<double> sym(lat.num_edges(), 0.0);
    const auto corners = all_corners(2);
    for (const auto& c : corners) {
      const auto p = base.permuted(lat.corner_map(c));
      for (std::size_t e = 0; e < sym.size(); ++e) sym[e] += p[static_cast<EdgeId>(e)] / 4.0;
    }
    const ConductivityField g(lat, sym);
    const auto dtn = assemble_dtn(lat, g).entries;
    ReconstructionOptions origin;
    origin.corners = {Corner::origin(2)};
    const auto single = reconstruct(lat, dtn, origin);
    const auto merged = reconstruct(lat, dtn);
    for (std::size_t e = 0; e < lat.num_edges(); ++e)
      if (single.source_corner[e] >= 0) CHECK(std::abs(single.estimates[e] - merged.estimates[e]) < 1e-9);
  }

  TEST_CASE("input validation") {
    const Lattice lat(2, 2);
    CHECK_THROWS_AS(reconstruct(lat, Eigen::MatrixXd::Zero(3, 3)), std::invalid_argument);
    Eigen::MatrixXd bad = assemble_dtn(lat, ConductivityField::constant(lat, 1.0)).entries;
    bad(0, 0) = std::nan("");
    CHECK_THROWS_AS(reconstruct(lat, bad), std::invalid_argument);
    ReconstructionOptions opts;
    opts.corners = {Corner::origin(3)};
    CHECK_THROWS_AS(reconstruct(lat, assemble_dtn(lat, ConductivityField::constant(lat, 1.0)).entries, opts),
                    std::invalid_argument);
  }
}
