// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "calderon/forward.hpp"
#include "calderon/reconstruction.hpp"
#include "calderon/verification.hpp"

using namespace calderon;

namespace {

// Pinned tolerances.
constexpr double kRoundTripTol = 1e-8;
constexpr double kStudyBaseTol = 1e-6;
constexpr double kStudyMinDecades = 6.0;
constexpr double kDepthMinDecades = 3.0;
constexpr double kShallowDepth = 3.0;
constexpr double kEquivarianceTol = 1e-9;
constexpr double kHomogeneityFactor = 3.0;

struct Outcome {
  bool passed = false;
  std::string detail;
};

double round_trip_error(int d, int n, std::uint64_t seed, double lo, double hi) {
  const Lattice lat(d, n);
  const auto g = ConductivityField::uniform(lat, lo, hi, seed);
  const auto rep = reconstruct(lat, assemble_dtn(lat, g).entries);
  const auto err = compare(lat, g, rep);
  return err.uncovered ? std::numeric_limits<double>::infinity() : err.max_abs_err;
}

Outcome round_trips(int d, int n) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) worst = std::max(worst, round_trip_error(d, n, seed, 0.5, 2.0));
  char buf[160];
  std::snprintf(buf, sizeof buf, "d=%d n=%d seeds 0-9: worst max abs error %.3e (bound %.0e)", d, n, worst,
                kRoundTripTol);
  return {worst <= kRoundTripTol, buf};
}

Outcome error_growth() {
  const auto s = error_growth_study(3, {8, 13}, 1.0, 2.0, 0);
  const double e8 = s.rows[0].max_abs_err;
  const double e13 = s.rows[1].max_abs_err;
  char buf[200];
  std::snprintf(buf, sizeof buf, "d=3 U[1,2]: max error n=8 %.3e (bound %.0e), n=13 %.3e, growth %.2f decades (min %.0f)",
                e8, kStudyBaseTol, e13, s.growth_decades, kStudyMinDecades);
  return {e8 <= kStudyBaseTol && s.growth_decades >= kStudyMinDecades, buf};
}

Outcome depth_resolution() {
  const Lattice lat(3, 10);
  const auto g = ConductivityField::uniform(lat, 1.0, 2.0, 0);
  const auto err = compare(lat, g, reconstruct(lat, assemble_dtn(lat, g).entries));
  const double shallow = err.median_up_to_depth(kShallowDepth);
  const auto& deepest = err.profile.back();
  const double gap = std::log10(std::max(deepest.median_abs_err, kErrorFloor)) - std::log10(std::max(shallow, kErrorFloor));
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "d=3 n=10: median error depth<=%.0f %.3e, deepest band %d median %.3e, gap %.2f decades (min %.0f)",
                kShallowDepth, shallow, deepest.band, deepest.median_abs_err, gap, kDepthMinDecades);
  return {std::isfinite(gap) && gap >= kDepthMinDecades, buf};
}

Outcome property_suite() {
  std::size_t runs = 0, checks = 0, failed = 0;
  std::string first;
  for (int d = 2; d <= 3; ++d)
    for (int n = 2; n <= 4; ++n)
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto r = run_property_suite(d, n, seed);
        ++runs;
        for (const auto& c : r.checks) {
          ++checks;
          if (!c.passed) {
            ++failed;
            if (first.empty())
              first = "; first failure d=" + std::to_string(d) + " n=" + std::to_string(n) + " seed " +
                      std::to_string(seed) + " " + c.name + " (" + c.detail + ")";
          }
        }
      }
  return {failed == 0, std::to_string(runs) + " suites, " + std::to_string(checks) + " checks, " +
                           std::to_string(failed) + " failed" + first};
}

double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) return std::numeric_limits<double>::infinity();
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

Outcome equivariance() {
  double corner_worst = 0.0, scale_worst = 0.0;
  for (auto [d, n] : {std::pair{3, 4}, std::pair{2, 5}}) {
    const Lattice lat(d, n);
    const auto g = ConductivityField::uniform(lat, 0.5, 2.0, 0);
    const auto base = reconstruct(lat, assemble_dtn(lat, g).entries).estimates;
    for (const auto& c : all_corners(d)) {
      const auto map = lat.corner_map(c);
      const auto rec = reconstruct(lat, assemble_dtn(lat, g.permuted(map)).entries).estimates;
      std::vector<double> pulled(lat.num_edges());
      for (std::size_t e = 0; e < lat.num_edges(); ++e) pulled[e] = rec[map.edge_perm[e]];
      corner_worst = std::max(corner_worst, relative_gap(pulled, base));
    }
    auto scaled = reconstruct(lat, assemble_dtn(lat, g.scaled(kHomogeneityFactor)).entries).estimates;
    for (double& x : scaled) x /= kHomogeneityFactor;
    scale_worst = std::max(scale_worst, relative_gap(scaled, base));
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "d=3 n=4, d=2 n=5: corner reflection %.3e, scaling by %.0f %.3e (bound %.0e relative)",
                corner_worst, kHomogeneityFactor, scale_worst, kEquivarianceTol);
  return {corner_worst <= kEquivarianceTol && scale_worst <= kEquivarianceTol, buf};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 round trip d=3 n=4", [] { return round_trips(3, 4); }},
      {"2 round trip d=2 n=5", [] { return round_trips(2, 5); }},
      {"3 error growth n=8..13", error_growth},
      {"4 depth-dependent resolution", depth_resolution},
      {"5 property suite", property_suite},
      {"6 equivariance", equivariance},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s  criterion %s  [%.1f s]  %s\n", o.passed ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.passed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures ? 1 : 0;
}
