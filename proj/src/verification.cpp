#include "calderon/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <iterator>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "calderon/operators.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

// Records a check whose measured value must not exceed the bound.
void at_most(std::vector<PropertyCheck>& out, std::string name, double value, double bound, std::string detail = {}) {
  out.push_back({std::move(name), value <= bound, value, bound, std::move(detail)});
}

// Records a check whose measured value must exceed the bound.
void above(std::vector<PropertyCheck>& out, std::string name, double value, double bound, std::string detail = {}) {
  out.push_back({std::move(name), value > bound, value, bound, std::move(detail)});
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

double rel(double num, double den) { return den > 0.0 ? num / den : num; }

double sv_ratio(const Eigen::MatrixXd& m) {
  if (m.cols() == 0) return 1.0;
  if (m.rows() < m.cols()) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  return sv[0] > 0.0 ? sv[sv.size() - 1] / sv[0] : 0.0;
}

std::vector<NodeId> merged(std::vector<NodeId> a, const std::vector<NodeId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

struct MixedSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  std::vector<NodeId> unknowns;
};

MixedSystem mixed_system(const Lattice& lat, const ConductivityField& g, const BoundaryVector* phi,
                         const BoundaryVector* psi, int t) {
  const auto prev = lat.slice_sets(t - 1);
  const auto cur = lat.slice_sets(t);
  MixedSystem m;
  m.unknowns = cur.L_cum;
  std::vector<int> col(lat.num_nodes(), -1);
  for (std::size_t j = 0; j < m.unknowns.size(); ++j) col[m.unknowns[j]] = static_cast<int>(j);
  const auto rows = static_cast<Eigen::Index>(prev.L_cum.size() + prev.J_cum.size());
  m.matrix = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(m.unknowns.size()));
  m.rhs = Eigen::VectorXd::Zero(rows);
  auto data = [&](const BoundaryVector* v, NodeId p) {
    return v ? (*v)[static_cast<Eigen::Index>(lat.boundary_index(p))] : 0.0;
  };
  Eigen::Index r = 0;
  for (NodeId q : prev.L_cum) {
    for (const auto& nb : lat.neighbors(q)) {
      const double w = g[nb.edge];
      m.matrix(r, col[q]) -= w;
      if (lat.is_interior(nb.node))
        m.matrix(r, col[nb.node]) += w;
      else
        m.rhs[r] -= w * data(phi, nb.node);
    }
    ++r;
  }
  for (NodeId p : prev.J_cum) {
    const auto& nb = lat.neighbors(p).front();
    const double w = g[nb.edge];
    m.matrix(r, col[nb.node]) += w;
    m.rhs[r] = data(psi, p) + w * data(phi, p);
    ++r;
  }
  return m;
}

struct Sample {
  Lattice lat;
  ConductivityField g;
  DtnMatrix dtn;
};

void lattice_checks(const Lattice& lat, std::vector<PropertyCheck>& out) {
  const int d = lat.dim();
  const int n = lat.size();
  std::size_t nd1 = 1;
  for (int i = 0; i < d - 1; ++i) nd1 *= static_cast<std::size_t>(n);
  const bool counts = lat.num_interior() == nd1 * static_cast<std::size_t>(n) &&
                      lat.num_boundary() == 2 * static_cast<std::size_t>(d) * nd1 &&
                      lat.num_edges() == static_cast<std::size_t>(d) * nd1 * static_cast<std::size_t>(n + 1);
  out.push_back({"lattice_node_and_edge_counts", counts, counts ? 0.0 : 1.0, 0.0, "interior n^d, boundary 2d n^(d-1), edges d n^(d-1) (n+1)"});

  std::size_t bad = 0;
  for (std::size_t b = 0; b < lat.num_boundary(); ++b) {
    const auto nb = lat.neighbors(lat.boundary_node(b));
    if (nb.size() != 1 || !lat.is_interior(nb.front().node)) ++bad;
  }
  out.push_back({"boundary_nodes_have_one_interior_neighbor", bad == 0, static_cast<double>(bad), 0.0, ""});

  bad = 0;
  for (std::size_t p = 0; p < lat.num_nodes(); ++p)
    for (const auto& nb : lat.neighbors(static_cast<NodeId>(p)))
      if (std::abs(lat.coord_sum(nb.node) - lat.coord_sum(static_cast<NodeId>(p))) != 1) ++bad;
  out.push_back({"slice_neighbors_lie_in_adjacent_levels", bad == 0, static_cast<double>(bad), 0.0, ""});

  bad = 0;
  for (int t = 0; t <= d * (n + 1); ++t) {
    const auto s = lat.slice_sets(t);
    if ((!s.L.empty()) != (t >= d && t <= d * n)) ++bad;
    std::vector<NodeId> both;
    std::set_intersection(s.K_minus.begin(), s.K_minus.end(), s.K_plus.begin(), s.K_plus.end(), std::back_inserter(both));
    if (!both.empty()) ++bad;
    const auto next = lat.slice_sets(t + 1);
    if (s.J != merged(s.K_minus, next.K_plus)) ++bad;
    if (s.J_cum != merged(s.K_minus_cum, next.K_plus_cum)) ++bad;
  }
  out.push_back({"slice_set_relations", bad == 0, static_cast<double>(bad), 0.0, "L_t nonempty iff d<=t<=dn, K-/K+ disjoint, J definitions"});

  bad = 0;
  for (const auto& c : all_corners(d)) {
    const auto map = lat.corner_map(c);
    for (std::size_t p = 0; p < lat.num_nodes(); ++p) {
      const NodeId img = map.node_perm[p];
      if (map.node_perm[img] != static_cast<NodeId>(p) || lat.kind(img) != lat.kind(static_cast<NodeId>(p))) ++bad;
      const auto x = lat.coords(static_cast<NodeId>(p));
      const auto y = lat.coords(img);
      for (int i = 0; i < d; ++i)
        if (y[i] != (c.flags[i] ? n + 1 - x[i] : x[i])) ++bad;
    }
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto& k = lat.edge(static_cast<EdgeId>(e));
      const EdgeId img = map.edge_perm[e];
      if (lat.find_edge(map.node_perm[k.a], map.node_perm[k.b]) != img || map.edge_perm[img] != static_cast<EdgeId>(e)) ++bad;
    }
  }
  out.push_back({"corner_maps_are_involutive_automorphisms", bad == 0, static_cast<double>(bad), 0.0, ""});
}

void forward_checks(const Sample& s, std::uint64_t seed, std::vector<PropertyCheck>& out) {
  const auto& lat = s.lat;
  at_most(out, "dtn_reciprocity_before_symmetrization", s.dtn.asymmetry, 1e-10);
  for (auto& c : check_dtn_invariants(s.dtn.entries)) out.push_back(std::move(c));

  const auto lap = assemble_laplacian(lat, s.g);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(lat.num_nodes()));
  at_most(out, "laplacian_rows_sum_to_zero", (lap * ones).cwiseAbs().maxCoeff(), 1e-12);

  // Random Dirichlet data: Kirchhoff residual, maximum principle, current balance.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BoundaryVector phi(static_cast<Eigen::Index>(lat.num_boundary()));
  for (auto& v : phi) v = dist(rng);
  const DirichletSolver solver(lat, s.g);
  const PotentialField u = solver.solve(phi);
  const Eigen::VectorXd lu = lap * u;
  const double gmax = *std::max_element(s.g.values().begin(), s.g.values().end());
  const double phimax = phi.cwiseAbs().maxCoeff();
  at_most(out, "dirichlet_kirchhoff_residual", rel(lu.head(static_cast<Eigen::Index>(lat.num_interior())).cwiseAbs().maxCoeff(), gmax * phimax), 1e-10);
  const double lo = phi.minCoeff(), hi = phi.maxCoeff();
  double violation = 0.0;
  for (std::size_t p = 0; p < lat.num_interior(); ++p)
    violation = std::max({violation, lo - u[static_cast<Eigen::Index>(p)], u[static_cast<Eigen::Index>(p)] - hi});
  at_most(out, "dirichlet_maximum_principle", rel(std::max(violation, 0.0), phimax), 1e-12);
  const BoundaryVector psi = boundary_current(lat, s.g, u);
  at_most(out, "boundary_currents_sum_to_zero", rel(std::abs(psi.sum()), gmax * phimax), 1e-10);
  at_most(out, "dtn_matches_forward_currents", rel((s.dtn.entries * phi - psi).cwiseAbs().maxCoeff(), gmax * phimax), 1e-10);
}

void operator_checks(const Sample& s, std::vector<PropertyCheck>& out) {
  const auto& lat = s.lat;
  const int d = lat.dim();
  const int n = lat.size();
  double fact = 0.0, angle = 0.0, orth = 0.0, annihil = 0.0, nesting = 0.0, leak = 0.0, kirch = 0.0;
  double t2 = std::numeric_limits<double>::infinity(), t2p = t2, uc = t2;
  std::size_t dim_mismatch = 0, formula_mismatch = 0, u_dim_mismatch = 0;
  KernelBasis previous;
  for (int t = d - 1; t <= d * n - 1; ++t) {
    const auto op = extract_T(lat, s.dtn.entries, t);
    const auto t1 = build_T1(lat, s.g, t);
    const auto op2 = build_T2(lat, s.g, t);
    const double scale = max_abs(op.entries);
    fact = std::max(fact, rel(max_abs(op.entries - op2.entries * t1.entries), scale));
    t2 = std::min(t2, sv_ratio(op2.entries));

    const auto k = kernel_basis(op, 1e-10);
    const auto k1 = kernel_basis(t1, 1e-10);
    if (k.dim() != k1.dim()) ++dim_mismatch;
    angle = std::max(angle, max_principal_angle_sine(k.vectors, k1.vectors));
    if (k.dim() != expected_kernel_dim(lat, t)) ++formula_mismatch;
    const auto kdim = static_cast<Eigen::Index>(k.dim());
    orth = std::max(orth, max_abs(k.vectors.transpose() * k.vectors - Eigen::MatrixXd::Identity(kdim, kdim)));
    if (kdim) annihil = std::max(annihil, rel((op.entries * k.vectors).colwise().norm().maxCoeff(), k.singular_values.size() ? k.singular_values[0] : 0.0));
    nesting = std::max(nesting, complete_basis(k, previous).containment_residual);

    const auto u = solution_space(lat, s.g, k, t);
    leak = std::max(leak, u.leakage);
    const auto next = lat.slice_sets(t + 1);
    if (k.dim() + next.L_cum.size() != u.support.size()) ++u_dim_mismatch;
    const double umax = std::max(max_abs(u.fields), 1e-300);
    for (NodeId p : next.L_cum) {
      const auto row = kirchhoff_row(lat, s.g, p);
      for (Eigen::Index j = 0; j < u.fields.cols(); ++j) {
        double dot = 0.0;
        for (std::size_t i = 0; i < u.support.size(); ++i) dot += row[u.support[i]] * u.fields(static_cast<Eigen::Index>(i), j);
        kirch = std::max(kirch, std::abs(dot) / umax);
      }
    }
    previous = k;
  }
  for (int t = d; t <= d * n; ++t) {
    t2p = std::min(t2p, sv_ratio(build_T2_prime(lat, s.g, t).entries));
    uc = std::min(uc, sv_ratio(mixed_problem_matrix(lat, s.g, t)));
  }
  at_most(out, "dtn_block_factorizes_through_interface", fact, 1e-10, "T = T2 T1");
  out.push_back({"kernel_of_T_has_dimension_of_kernel_of_T1", dim_mismatch == 0, static_cast<double>(dim_mismatch), 0.0, ""});
  at_most(out, "kernel_of_T_spans_kernel_of_T1", angle, 1e-8, "sine of largest principal angle");
  out.push_back({"kernel_dimension_formula", formula_mismatch == 0, static_cast<double>(formula_mismatch), 0.0,
                 "|J_t^S| + |L_t^S| - |L_{t+1}^S|"});
  at_most(out, "kernel_basis_orthonormal", orth, 1e-12);
  at_most(out, "kernel_basis_annihilated", annihil, 1e-10);
  at_most(out, "kernels_nested_across_levels", nesting, 1e-8);
  at_most(out, "solution_space_localized", leak, 1e-8);
  out.push_back({"solution_space_dimension", u_dim_mismatch == 0, static_cast<double>(u_dim_mismatch), 0.0,
                 "dim U + |L_{t+1}^S| = |L_t^S + J_t^S|"});
  at_most(out, "solution_space_orthogonal_to_kirchhoff_rows", kirch, 1e-8);
  above(out, "upper_subgraph_dtn_injective", t2, 1e-12, "sigma_min / sigma_max of T2");
  above(out, "corner_subgraph_dtn_injective", t2p, 1e-12, "sigma_min / sigma_max of T2'");
  above(out, "mixed_problem_unique_continuation", uc, 1e-12, "sigma_min / sigma_max of the zero-data map");

  // Reduced corner graphs: isolated boundary nodes carry zero current rows.
  double iso = 0.0, asym = 0.0;
  for (int t = d; t <= d * n; ++t)
    for (NodeId p : lat.slice_sets(t).L) {
      const auto sub = reduced_subgraph(lat, t, p);
      const auto m = subgraph_dtn(lat, s.g, sub);
      std::vector<char> touched(lat.num_nodes(), 0);
      for (EdgeId e : sub.edges) touched[lat.edge(e).a] = touched[lat.edge(e).b] = 1;
      for (std::size_t i = 0; i < sub.boundary.size(); ++i)
        if (!touched[sub.boundary[i]]) iso = std::max(iso, m.row(static_cast<Eigen::Index>(i)).cwiseAbs().maxCoeff());
      asym = std::max(asym, rel(max_abs(m - m.transpose()), max_abs(m)));
    }
  at_most(out, "reduced_subgraph_isolated_rows_zero", iso, 0.0);
  at_most(out, "reduced_subgraph_dtn_symmetric", asym, 1e-10);
}

void marching_checks(const Sample& s, std::uint64_t seed, std::vector<PropertyCheck>& out) {
  const auto& lat = s.lat;
  const int d = lat.dim();
  const int n = lat.size();
  const auto known = PartialConductivity::from(s.g);
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());
  const DirichletSolver solver(lat, s.g);
  std::mt19937_64 rng(seed + 17);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  BoundaryVector phi(nb);
  for (auto& v : phi) v = dist(rng);
  const PotentialField truth = solver.solve(phi);
  const BoundaryVector psi = s.dtn.entries * phi;
  const BoundaryVector zero = BoundaryVector::Zero(nb);

  double zero_out = 0.0, vs_dense = 0.0, vs_forward = 0.0, resid = 0.0;
  for (int t = d; t <= d * n; ++t) {
    const auto z = propagate_cauchy(lat, known, zero, zero, t);
    zero_out = std::max(zero_out, z.u.cwiseAbs().maxCoeff());
    const auto r = propagate_cauchy(lat, known, phi, psi, t);
    resid = std::max(resid, r.residual);
    const auto dense = dense_cauchy_solve(lat, s.g, phi, psi, t);
    const auto cur = lat.slice_sets(t);
    double scale = 0.0;
    for (NodeId p : cur.L_cum) scale = std::max(scale, std::abs(truth[p]));
    for (std::size_t i = 0; i < cur.L_cum.size(); ++i) {
      const NodeId p = cur.L_cum[i];
      vs_dense = std::max(vs_dense, rel(std::abs(r.u[p] - dense[static_cast<Eigen::Index>(i)]), scale));
      vs_forward = std::max(vs_forward, rel(std::abs(r.u[p] - truth[p]), scale));
    }
  }
  at_most(out, "marching_zero_data_gives_zero", zero_out, 0.0);
  at_most(out, "marching_matches_dense_mixed_solve", vs_dense, 1e-10);
  at_most(out, "marching_recovers_forward_potential", vs_forward, 1e-9);
  at_most(out, "marching_unused_equations_consistent", resid, 1e-8);
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) && std::isnan(b[i])) continue;
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(a[i]));
  }
  return rel(diff, scale);
}

void reconstruction_checks(const Sample& s, std::vector<PropertyCheck>& out) {
  const auto& lat = s.lat;
  const auto rep = reconstruct(lat, s.dtn.entries);
  double err = 0.0;
  for (std::size_t e = 0; e < lat.num_edges(); ++e)
    err = std::max(err, std::isnan(rep.estimates[e]) ? std::numeric_limits<double>::infinity()
                                                     : std::abs(rep.estimates[e] - s.g[static_cast<EdgeId>(e)]));
  at_most(out, "round_trip_recovers_conductivity", err, 1e-8, "max abs error of the merged estimate");
  out.push_back({"merge_covers_every_edge", rep.uncovered_edges == 0, static_cast<double>(rep.uncovered_edges), 0.0, ""});

  double rank = std::numeric_limits<double>::infinity(), resid = 0.0;
  for (const auto& sl : rep.slices) {
    rank = std::min(rank, sl.flux_min_singular_ratio);
    resid = std::max({resid, sl.flux_residual, sl.cauchy_residual});
  }
  above(out, "flux_systems_full_column_rank", rank, 1e-10, "smallest sigma_min / sigma_max over slices");
  if (lat.size() <= 5)
    at_most(out, "slice_residuals_small_on_exact_data", resid, 1e-9);

  constexpr double factor = 3.0;
  const auto scaled = reconstruct(lat, assemble_dtn(lat, s.g.scaled(factor)).entries);
  std::vector<double> expect = rep.estimates;
  for (auto& v : expect) v *= factor;
  at_most(out, "scaling_equivariance", max_rel_diff(expect, scaled.estimates), 1e-9, "reconstruct(c gamma) vs c reconstruct(gamma)");

  double corner = 0.0;
  ReconstructionOptions opts;
  for (const auto& c : all_corners(lat.dim())) {
    const auto map = lat.corner_map(c);
    const auto direct = reconstruct_from_corner(lat, s.dtn.entries, c, opts);
    const auto reflected = assemble_dtn(lat, s.g.permuted(map));
    const auto origin = reconstruct_from_corner(lat, reflected.entries, Corner::origin(lat.dim()), opts);
    std::vector<double> a, b;
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const bool ka = direct.estimates.is_known(static_cast<EdgeId>(e));
      const bool kb = origin.estimates.is_known(map.edge_perm[e]);
      if (ka != kb) {
        corner = std::numeric_limits<double>::infinity();
        continue;
      }
      if (!ka) continue;
      a.push_back(direct.estimates.value[e]);
      b.push_back(origin.estimates.value[map.edge_perm[e]]);
    }
    corner = std::max(corner, max_rel_diff(a, b));
  }
  at_most(out, "corner_equivariance", corner, 1e-9, "corner run vs origin run on the reflected conductivity");
}

}  // namespace

double median(std::vector<double> values) {
  std::erase_if(values, [](double v) { return std::isnan(v); });
  if (values.empty()) return kNaN;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double hi = values[mid];
  if (values.size() % 2) return hi;
  const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

double ErrorReport::median_up_to_depth(double max_depth) const {
  std::vector<double> v;
  for (const auto& e : per_edge)
    if (!e.corner.empty() && e.depth <= max_depth) v.push_back(e.abs_err);
  return median(std::move(v));
}

ErrorReport compare(const Lattice& lat, const ConductivityField& truth, const ReconstructionReport& report) {
  if (truth.size() != lat.num_edges() || report.estimates.size() != lat.num_edges() ||
      report.source_corner.size() != lat.num_edges())
    throw std::invalid_argument("reconstruction and conductivity do not belong to the same lattice");
  const auto corners = report.corners.empty() ? all_corners(lat.dim()) : report.corners;
  ErrorReport r;
  r.per_edge.reserve(lat.num_edges());
  std::vector<double> covered;
  std::map<int, std::vector<double>> bands;
  for (std::size_t i = 0; i < lat.num_edges(); ++i) {
    const auto e = static_cast<EdgeId>(i);
    EdgeError row;
    row.edge = e;
    row.p = lat.edge(e).a;
    row.q = lat.edge(e).b;
    row.midpoint = lat.midpoint(e);
    row.gamma_true = truth[e];
    const int src = report.source_corner[i];
    if (src >= 0 && !std::isnan(report.estimates[i])) {
      const auto& c = corners.at(static_cast<std::size_t>(src));
      row.gamma_est = report.estimates[i];
      row.abs_err = std::abs(row.gamma_est - row.gamma_true);
      row.log10_err = std::log10(std::max(row.abs_err, kErrorFloor));
      row.corner = c.to_string();
      row.depth = lat.corner_distance(e, c);
      covered.push_back(row.abs_err);
      bands[static_cast<int>(std::floor(row.depth))].push_back(row.abs_err);
    } else {
      row.gamma_est = row.abs_err = row.log10_err = kNaN;
      row.depth = std::numeric_limits<double>::infinity();
      for (const auto& c : corners) row.depth = std::min(row.depth, lat.corner_distance(e, c));
      ++r.uncovered;
    }
    r.per_edge.push_back(std::move(row));
  }
  r.max_abs_err = covered.empty() ? kNaN : *std::max_element(covered.begin(), covered.end());
  r.median_abs_err = median(covered);
  for (auto& [band, errs] : bands)
    r.profile.push_back({band, errs.size(), median(errs), *std::max_element(errs.begin(), errs.end())});
  return r;
}

bool PropertySuiteResult::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

std::vector<PropertyCheck> check_dtn_invariants(const Eigen::MatrixXd& dtn, double tol) {
  const auto diag = diagnose_dtn(dtn);
  std::vector<PropertyCheck> out;
  at_most(out, "dtn_symmetric", diag.asymmetry, tol);
  at_most(out, "dtn_rows_sum_to_zero", diag.max_row_sum, tol);
  at_most(out, "dtn_diagonal_nonpositive", diag.max_positive_diagonal, tol);
  at_most(out, "dtn_off_diagonal_nonnegative", diag.max_negative_off_diagonal, tol);
  return out;
}

Eigen::MatrixXd mixed_problem_matrix(const Lattice& lat, const ConductivityField& g, int t) {
  return mixed_system(lat, g, nullptr, nullptr, t).matrix;
}

Eigen::VectorXd dense_cauchy_solve(const Lattice& lat, const ConductivityField& g, const BoundaryVector& phi,
                                   const BoundaryVector& psi, int t) {
  const auto m = mixed_system(lat, g, &phi, &psi, t);
  return m.matrix.colPivHouseholderQr().solve(m.rhs);
}

PropertySuiteResult run_property_suite(int dim, int size, std::uint64_t seed) {
  PropertySuiteResult res;
  res.dim = dim;
  res.size = size;
  res.seed = seed;
  Lattice lat(dim, size);
  auto g = ConductivityField::uniform(lat, 0.5, 2.0, seed);
  auto dtn = assemble_dtn(lat, g);
  const Sample s{std::move(lat), std::move(g), std::move(dtn)};
  lattice_checks(s.lat, res.checks);
  forward_checks(s, seed, res.checks);
  operator_checks(s, res.checks);
  marching_checks(s, seed, res.checks);
  reconstruction_checks(s, res.checks);
  for (auto& c : res.checks)
    c.detail = "value " + fmt(c.value) + ", bound " + fmt(c.threshold) + (c.detail.empty() ? "" : "; " + c.detail);
  return res;
}

StudyResult error_growth_study(int dim, const std::vector<int>& sizes, double lo, double hi, std::uint64_t seed) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw std::invalid_argument("sizes must be ascending");
  StudyResult res;
  res.dim = dim;
  res.lo = lo;
  res.hi = hi;
  res.seed = seed;
  res.rows.resize(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t i) {
    const Lattice lat(dim, sizes[i]);
    const auto g = ConductivityField::uniform(lat, lo, hi, seed);
    const auto dtn = assemble_dtn(lat, g);
    const auto rep = reconstruct(lat, dtn.entries);
    const auto err = compare(lat, g, rep);
    res.rows[i] = {sizes[i], err.max_abs_err, err.median_abs_err, rep.degraded_slices, err.profile};
  });
  res.monotone = true;
  for (std::size_t i = 1; i < res.rows.size(); ++i)
    if (!(res.rows[i].max_abs_err >= res.rows[i - 1].max_abs_err)) res.monotone = false;
  if (!res.rows.empty())
    res.growth_decades = std::log10(std::max(res.rows.back().max_abs_err, kErrorFloor)) -
                         std::log10(std::max(res.rows.front().max_abs_err, kErrorFloor));
  return res;
}

}  // namespace calderon
