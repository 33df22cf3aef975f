#include <doctest.h>

#include <algorithm>

#include <Eigen/Dense>

#include "calderon/forward.hpp"
#include "calderon/operators.hpp"

using namespace calderon;

namespace {

struct Fixture {
  Lattice lat{3, 2};
  ConductivityField g = ConductivityField::uniform(lat, 0.5, 2.0, 3);
  Eigen::MatrixXd dtn = assemble_dtn(lat, g).entries;
};

}  // namespace

TEST_SUITE("operators") {
  TEST_CASE("operator shapes on the d=3, n=2 lattice") {
    Fixture f;
    const auto t2 = extract_T(f.lat, f.dtn, 2);
    CHECK(t2.entries.rows() == 21);
    CHECK(t2.entries.cols() == 3);
    const auto t3 = extract_T(f.lat, f.dtn, 3);
    CHECK(t3.entries.rows() == 15);
    CHECK(t3.entries.cols() == 9);
    std::vector<NodeId> all = t3.rows;
    all.insert(all.end(), t3.cols.begin(), t3.cols.end());
    std::sort(all.begin(), all.end());
    CHECK(all.size() == f.lat.num_boundary());
    CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
    const auto t1 = build_T1(f.lat, f.g, 3);
    CHECK(t1.entries.rows() == 3);
    CHECK(t1.entries.cols() == 9);
    CHECK_THROWS_AS(extract_T(f.lat, f.dtn, 1), std::out_of_range);
    CHECK_THROWS_AS(extract_T(f.lat, f.dtn, 6), std::out_of_range);
  }

  TEST_CASE("T1 columns are interior solves of unit excitations") {
    Fixture f;
    const auto t1 = build_T1(f.lat, f.g, 3);
    const DirichletSolver solver(f.lat, f.g);
    for (std::size_t j = 0; j < t1.cols.size(); ++j) {
      BoundaryVector phi = BoundaryVector::Zero(static_cast<Eigen::Index>(f.lat.num_boundary()));
      phi[static_cast<Eigen::Index>(f.lat.boundary_index(t1.cols[j]))] = 1.0;
      const auto u = solver.solve(phi);
      for (std::size_t i = 0; i < t1.rows.size(); ++i)
        CHECK(t1.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == doctest::Approx(u[t1.rows[i]]));
    }
  }

  TEST_CASE("factorization through the interface layer") {
    for (int d = 2; d <= 3; ++d)
      for (int n = 2; n <= 3; ++n) {
        const Lattice lat(d, n);
        const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 7);
        const auto dtn = assemble_dtn(lat, g).entries;
        for (int t = d - 1; t <= d * n - 1; ++t) {
          const auto op = extract_T(lat, dtn, t);
          const Eigen::MatrixXd prod = build_T2(lat, g, t).entries * build_T1(lat, g, t).entries;
          CHECK((op.entries - prod).cwiseAbs().maxCoeff() <= 1e-10 * op.entries.cwiseAbs().maxCoeff());
        }
      }
  }

  TEST_CASE("kernel dimensions and quotient") {
    Fixture f;
    const auto k2 = kernel_basis(extract_T(f.lat, f.dtn, 2), 1e-10);
    const auto k3 = kernel_basis(extract_T(f.lat, f.dtn, 3), 1e-10);
    CHECK(k2.dim() == 2);
    CHECK(k3.dim() == 6);
    CHECK_FALSE(k3.ambiguous);
    const auto q = quotient_basis(k3, k2, 1e-8);
    CHECK(q.cols() == 4);
    const Eigen::MatrixXd prev = embed(k2.vectors, k2.support, k3.support);
    CHECK((q.transpose() * prev).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    const auto first = quotient_basis(k2, KernelBasis{}, 1e-8);
    CHECK(first.cols() == 2);
    for (int n = 1; n <= 4; ++n) {
      const Lattice lat(3, n);
      const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 0);
      CHECK(kernel_basis(extract_T(lat, assemble_dtn(lat, g).entries, 2), 1e-10).dim() == 2);
    }
  }

  TEST_CASE("zero operator has a full kernel") {
    SubmatrixOperator op{"zero", 0, {0, 1, 2}, {3, 4}, Eigen::MatrixXd::Zero(3, 2)};
    const auto k = kernel_basis(op, 1e-10);
    CHECK(k.dim() == 2);
  }

  TEST_CASE("explicit dimension overrides the tolerance count") {
    Fixture f;
    const auto op = extract_T(f.lat, f.dtn, 3);
    const auto k = kernel_basis(op, 4, 1e-10);
    CHECK(k.dim() == 4);
    CHECK(k.numerical_dim == 6);
  }

  TEST_CASE("quotient rejects a previous kernel that is not contained") {
    Fixture f;
    const auto k3 = kernel_basis(extract_T(f.lat, f.dtn, 3), 1e-10);
    KernelBasis bogus;
    bogus.support = k3.support;
    bogus.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k3.support.size()), 1);
    // Orthogonal complement direction of the kernel.
    const auto op = extract_T(f.lat, f.dtn, 3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(op.entries, Eigen::ComputeFullV);
    bogus.vectors.col(0) = svd.matrixV().col(0);
    CHECK_THROWS_AS(quotient_basis(k3, bogus, 1e-8), InconsistentData);
    CHECK(complete_basis(k3, bogus).containment_residual > 0.5);
  }

  TEST_CASE("kernels agree with kernels of T1") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 1);
    const auto dtn = assemble_dtn(lat, g).entries;
    for (int t = 2; t <= 8; ++t) {
      const auto a = kernel_basis(extract_T(lat, dtn, t), 1e-10);
      const auto b = kernel_basis(build_T1(lat, g, t), 1e-10);
      REQUIRE(a.dim() == b.dim());
      CHECK(a.dim() == expected_kernel_dim(lat, t));
      CHECK(max_principal_angle_sine(a.vectors, b.vectors) < 1e-8);
    }
  }

  TEST_CASE("solution space is localized and orthogonal to later Kirchhoff rows") {
    const Lattice lat(3, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 2);
    const auto dtn = assemble_dtn(lat, g).entries;
    for (int t = 2; t <= 6; ++t) {
      const auto k = kernel_basis(extract_T(lat, dtn, t), 1e-10);
      const auto u = solution_space(lat, g, k, t);
      CHECK_FALSE(u.leaked);
      CHECK(k.dim() + lat.slice_sets(t + 1).L_cum.size() == u.support.size());
    }
  }

  TEST_CASE("subgraph DtN maps are injective on the interface") {
    for (int d = 2; d <= 3; ++d) {
      const Lattice lat(d, 3);
      const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 5);
      for (int t = d - 1; t <= d * 3 - 1; ++t) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(build_T2(lat, g, t).entries);
        const auto& s = svd.singularValues();
        CHECK(s[s.size() - 1] > 1e-12 * s[0]);
      }
      for (int t = d; t <= d * 3; ++t) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(build_T2_prime(lat, g, t).entries);
        const auto& s = svd.singularValues();
        CHECK(s[s.size() - 1] > 1e-12 * s[0]);
      }
    }
  }

  TEST_CASE("subgraph DtN of the full lattice is the lattice DtN") {
    const Lattice lat(2, 3);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 6);
    Subgraph all;
    for (std::size_t p = 0; p < lat.num_interior(); ++p) all.interior.push_back(static_cast<NodeId>(p));
    for (std::size_t b = 0; b < lat.num_boundary(); ++b) all.boundary.push_back(lat.boundary_node(b));
    for (std::size_t e = 0; e < lat.num_edges(); ++e) all.edges.push_back(static_cast<EdgeId>(e));
    CHECK((subgraph_dtn(lat, g, all) - assemble_dtn(lat, g).entries).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("reduced subgraph") {
    const Lattice lat(3, 2);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 8);
    const auto s = lat.slice_sets(4);
    for (NodeId p : s.L) {
      const auto sub = reduced_subgraph(lat, 4, p);
      CHECK(std::find(sub.boundary.begin(), sub.boundary.end(), p) == sub.boundary.end());
      for (EdgeId e : sub.edges) CHECK((lat.edge(e).a != p && lat.edge(e).b != p));
      const auto mp = previous_layer_neighbors(lat, 4, p);
      for (NodeId m : mp) CHECK(std::binary_search(sub.boundary.begin(), sub.boundary.end(), m));
      const auto m = subgraph_dtn(lat, g, sub);
      std::vector<char> touched(lat.num_nodes(), 0);
      for (EdgeId e : sub.edges) touched[lat.edge(e).a] = touched[lat.edge(e).b] = 1;
      for (std::size_t i = 0; i < sub.boundary.size(); ++i)
        if (!touched[sub.boundary[i]]) CHECK(m.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK_THROWS_AS(reduced_subgraph(lat, 4, s.L.empty() ? 0 : lat.slice_sets(3).L.front()), std::invalid_argument);
  }

  TEST_CASE("principal angles") {
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 1);
    Eigen::MatrixXd b(3, 1);
    b << 0.0, 1.0, 0.0;
    CHECK(max_principal_angle_sine(a, a) == doctest::Approx(0.0));
    CHECK(max_principal_angle_sine(a, b) == doctest::Approx(1.0));
  }
}
