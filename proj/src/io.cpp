#include "calderon/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace calderon::io {

namespace {

using nlohmann::json;

constexpr int kVersion = 1;

json coords_json(const Lattice& lat, NodeId p) {
  const auto x = lat.coords(p);
  return json(std::vector<int>(x.begin(), x.end()));
}

// Non-finite values are stored as strings so that they survive JSON.
json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double to_number(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw FormatError("expected a number, got " + j.dump());
}

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

json parse_json(const std::string& text, const char* format) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != format)
    throw FormatError(std::string("expected a \"") + format + "\" document");
  if (j.value("version", 0) != kVersion) throw FormatError("unsupported format version");
  return j;
}

template <class F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string("schema error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
}

Lattice lattice_of(const json& j) {
  const int dim = j.at("dim").get<int>();
  const int size = j.at("size").get<int>();
  if (dim < 2 || size < 1) throw FormatError("invalid lattice dimensions");
  return Lattice(dim, size);
}

void expect_coords(const Lattice& lat, const json& j, NodeId p, const std::string& what) {
  const auto x = lat.coords(p);
  if (j.get<std::vector<int>>() != std::vector<int>(x.begin(), x.end()))
    throw FormatError(what + " does not follow the canonical ordering");
}

Corner corner_from_string(const std::string& s, int dim) {
  if (static_cast<int>(s.size()) != dim) throw FormatError("corner \"" + s + "\" has the wrong dimension");
  Corner c = Corner::origin(dim);
  for (int i = 0; i < dim; ++i) {
    if (s[i] != '0' && s[i] != '1') throw FormatError("corner \"" + s + "\" must consist of 0/1 flags");
    c.flags[i] = s[i] == '1';
  }
  return c;
}

json slice_json(const SliceDiagnostics& s) {
  return {{"corner", s.corner.to_string()},
          {"level", s.level},
          {"kernel_dim_numerical", s.kernel_dim_numerical},
          {"kernel_dim_expected", s.kernel_dim_expected},
          {"quotient_dim", s.quotient_dim},
          {"kernel_gap", number(s.kernel_gap)},
          {"kernel_ambiguous", s.kernel_ambiguous},
          {"containment_residual", number(s.containment_residual)},
          {"cauchy_residual", number(s.cauchy_residual)},
          {"flux_residual", number(s.flux_residual)},
          {"flux_min_singular_ratio", number(s.flux_min_singular_ratio)},
          {"num_edges", s.num_edges},
          {"nonpositive", s.nonpositive},
          {"degraded", s.degraded}};
}

SliceDiagnostics slice_from(const json& j, int dim) {
  SliceDiagnostics s;
  s.corner = corner_from_string(j.at("corner").get<std::string>(), dim);
  s.level = j.at("level").get<int>();
  s.kernel_dim_numerical = j.at("kernel_dim_numerical").get<std::size_t>();
  s.kernel_dim_expected = j.at("kernel_dim_expected").get<std::size_t>();
  s.quotient_dim = j.at("quotient_dim").get<std::size_t>();
  s.kernel_gap = to_number(j.at("kernel_gap"));
  s.kernel_ambiguous = j.at("kernel_ambiguous").get<bool>();
  s.containment_residual = to_number(j.at("containment_residual"));
  s.cauchy_residual = to_number(j.at("cauchy_residual"));
  s.flux_residual = to_number(j.at("flux_residual"));
  s.flux_min_singular_ratio = to_number(j.at("flux_min_singular_ratio"));
  s.num_edges = j.at("num_edges").get<std::size_t>();
  s.nonpositive = j.at("nonpositive").get<std::size_t>();
  s.degraded = j.at("degraded").get<bool>();
  return s;
}

bool same_slice(const SliceDiagnostics& a, const SliceDiagnostics& b) {
  return a.corner == b.corner && a.level == b.level && a.kernel_dim_numerical == b.kernel_dim_numerical &&
         a.kernel_dim_expected == b.kernel_dim_expected && a.quotient_dim == b.quotient_dim &&
         same(a.kernel_gap, b.kernel_gap) && a.kernel_ambiguous == b.kernel_ambiguous &&
         same(a.containment_residual, b.containment_residual) && same(a.cauchy_residual, b.cauchy_residual) &&
         same(a.flux_residual, b.flux_residual) && same(a.flux_min_singular_ratio, b.flux_min_singular_ratio) &&
         a.num_edges == b.num_edges && a.nonpositive == b.nonpositive && a.degraded == b.degraded;
}

std::string tuple(std::span<const int> x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + std::to_string(x[i]);
  return s;
}

std::string tuple(const std::vector<double>& x) {
  std::string s;
  for (std::size_t i = 0; i < x.size(); ++i) s += (i ? " " : "") + format_double(x[i]);
  return s;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

bool operator==(const ReconstructionFile& a, const ReconstructionFile& b) {
  const auto& x = a.report;
  const auto& y = b.report;
  if (a.dim != b.dim || a.size != b.size || !same(a.kernel_tol, b.kernel_tol)) return false;
  if (x.corners != y.corners || x.source_corner != y.source_corner || x.diagnostics != y.diagnostics ||
      x.degraded_slices != y.degraded_slices || x.uncovered_edges != y.uncovered_edges)
    return false;
  if (x.estimates.size() != y.estimates.size() || x.slices.size() != y.slices.size()) return false;
  for (std::size_t i = 0; i < x.estimates.size(); ++i)
    if (!same(x.estimates[i], y.estimates[i])) return false;
  for (std::size_t i = 0; i < x.slices.size(); ++i)
    if (!same_slice(x.slices[i], y.slices[i])) return false;
  return true;
}

std::string to_json(const ProblemFile& f) {
  const Lattice lat(f.dim, f.size);
  if (f.gamma.size() != lat.num_edges()) throw std::invalid_argument("conductivity does not match the lattice");
  json edges = json::array();
  for (std::size_t e = 0; e < lat.num_edges(); ++e) {
    const auto& k = lat.edge(static_cast<EdgeId>(e));
    edges.push_back({{"p", coords_json(lat, k.a)}, {"q", coords_json(lat, k.b)}, {"gamma", f.gamma[e]}});
  }
  json j = {{"format", "calderon.problem"},
            {"version", kVersion},
            {"dim", f.dim},
            {"size", f.size},
            {"edges", std::move(edges)},
            {"metadata", {{"seed", f.seed}, {"distribution", {{"kind", "uniform"}, {"lo", f.lo}, {"hi", f.hi}}}}}};
  return j.dump(1) + "\n";
}

ProblemFile parse_problem(const std::string& text) {
  const json j = parse_json(text, "calderon.problem");
  return guarded([&] {
    const Lattice lat = lattice_of(j);
    ProblemFile f;
    f.dim = lat.dim();
    f.size = lat.size();
    const auto& edges = j.at("edges");
    if (!edges.is_array() || edges.size() != lat.num_edges())
      throw FormatError("edge list must contain each of the " + std::to_string(lat.num_edges()) + " edges once");
    f.gamma.resize(lat.num_edges());
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto& k = lat.edge(static_cast<EdgeId>(e));
      expect_coords(lat, edges[e].at("p"), k.a, "edge " + std::to_string(e));
      expect_coords(lat, edges[e].at("q"), k.b, "edge " + std::to_string(e));
      f.gamma[e] = edges[e].at("gamma").get<double>();
      if (!(f.gamma[e] > 0.0) || !std::isfinite(f.gamma[e]))
        throw FormatError("edge " + std::to_string(e) + " has a nonpositive conductivity");
    }
    const auto& meta = j.at("metadata");
    f.seed = meta.at("seed").get<std::uint64_t>();
    f.lo = meta.at("distribution").at("lo").get<double>();
    f.hi = meta.at("distribution").at("hi").get<double>();
    return f;
  });
}

std::string to_json(const DtnFile& f) {
  const Lattice lat(f.dim, f.size);
  const auto nb = static_cast<Eigen::Index>(lat.num_boundary());
  if (f.matrix.rows() != nb || f.matrix.cols() != nb) throw std::invalid_argument("DtN matrix does not match the lattice");
  json order = json::array();
  for (std::size_t b = 0; b < lat.num_boundary(); ++b) order.push_back(coords_json(lat, lat.boundary_node(b)));
  json rows = json::array();
  for (Eigen::Index i = 0; i < nb; ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < nb; ++k) row.push_back(f.matrix(i, k));
    rows.push_back(std::move(row));
  }
  json j = {{"format", "calderon.dtn"},
            {"version", kVersion},
            {"dim", f.dim},
            {"size", f.size},
            {"node_order", std::move(order)},
            {"matrix", std::move(rows)},
            {"metadata",
             {{"asymmetry_before_symmetrization", f.asymmetry},
              {"max_row_sum", f.max_row_sum},
              {"symmetric", f.asymmetry <= 1e-10},
              {"row_sums_vanish", f.max_row_sum <= 1e-10}}}};
  return j.dump() + "\n";
}

DtnFile parse_dtn(const std::string& text) {
  const json j = parse_json(text, "calderon.dtn");
  return guarded([&] {
    const Lattice lat = lattice_of(j);
    DtnFile f;
    f.dim = lat.dim();
    f.size = lat.size();
    const auto nb = lat.num_boundary();
    const auto& order = j.at("node_order");
    if (!order.is_array() || order.size() != nb) throw FormatError("node_order must list every boundary node");
    for (std::size_t b = 0; b < nb; ++b) expect_coords(lat, order[b], lat.boundary_node(b), "node_order");
    const auto& rows = j.at("matrix");
    if (!rows.is_array() || rows.size() != nb) throw FormatError("matrix must have one row per boundary node");
    f.matrix.resize(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(nb));
    for (std::size_t i = 0; i < nb; ++i) {
      if (!rows[i].is_array() || rows[i].size() != nb) throw FormatError("matrix must be square");
      for (std::size_t k = 0; k < nb; ++k) f.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k].get<double>();
    }
    const auto& meta = j.at("metadata");
    f.asymmetry = meta.at("asymmetry_before_symmetrization").get<double>();
    f.max_row_sum = meta.at("max_row_sum").get<double>();
    return f;
  });
}

std::string to_json(const ReconstructionFile& f) {
  const Lattice lat(f.dim, f.size);
  const auto& r = f.report;
  if (r.estimates.size() != lat.num_edges() || r.source_corner.size() != lat.num_edges())
    throw std::invalid_argument("reconstruction does not match the lattice");
  json corners = json::array();
  for (const auto& c : r.corners) corners.push_back(c.to_string());
  json edges = json::array();
  for (std::size_t e = 0; e < lat.num_edges(); ++e) {
    const auto& k = lat.edge(static_cast<EdgeId>(e));
    const int src = r.source_corner[e];
    edges.push_back({{"p", coords_json(lat, k.a)},
                     {"q", coords_json(lat, k.b)},
                     {"gamma", number(r.estimates[e])},
                     {"corner", src >= 0 ? json(r.corners.at(static_cast<std::size_t>(src)).to_string()) : json(nullptr)}});
  }
  json slices = json::array();
  for (const auto& s : r.slices) slices.push_back(slice_json(s));
  json j = {{"format", "calderon.reconstruction"},
            {"version", kVersion},
            {"dim", f.dim},
            {"size", f.size},
            {"options", {{"kernel_tol", f.kernel_tol}, {"corners", std::move(corners)}}},
            {"edges", std::move(edges)},
            {"slices", std::move(slices)},
            {"diagnostics", r.diagnostics},
            {"degraded_slices", r.degraded_slices},
            {"uncovered_edges", r.uncovered_edges}};
  return j.dump(1) + "\n";
}

ReconstructionFile parse_reconstruction(const std::string& text) {
  const json j = parse_json(text, "calderon.reconstruction");
  return guarded([&] {
    const Lattice lat = lattice_of(j);
    ReconstructionFile f;
    f.dim = lat.dim();
    f.size = lat.size();
    f.kernel_tol = j.at("options").at("kernel_tol").get<double>();
    auto& r = f.report;
    for (const auto& c : j.at("options").at("corners")) r.corners.push_back(corner_from_string(c.get<std::string>(), f.dim));
    const auto& edges = j.at("edges");
    if (!edges.is_array() || edges.size() != lat.num_edges())
      throw FormatError("edge list must contain each of the " + std::to_string(lat.num_edges()) + " edges once");
    for (std::size_t e = 0; e < lat.num_edges(); ++e) {
      const auto& k = lat.edge(static_cast<EdgeId>(e));
      expect_coords(lat, edges[e].at("p"), k.a, "edge " + std::to_string(e));
      expect_coords(lat, edges[e].at("q"), k.b, "edge " + std::to_string(e));
      r.estimates.push_back(to_number(edges[e].at("gamma")));
      const auto& c = edges[e].at("corner");
      int src = -1;
      if (!c.is_null()) {
        const auto corner = corner_from_string(c.get<std::string>(), f.dim);
        for (std::size_t i = 0; i < r.corners.size(); ++i)
          if (r.corners[i] == corner) src = static_cast<int>(i);
        if (src < 0) throw FormatError("edge " + std::to_string(e) + " names a corner that was not run");
      }
      r.source_corner.push_back(src);
    }
    for (const auto& s : j.at("slices")) r.slices.push_back(slice_from(s, f.dim));
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    r.degraded_slices = j.at("degraded_slices").get<std::size_t>();
    r.uncovered_edges = j.at("uncovered_edges").get<std::size_t>();
    return f;
  });
}

std::string error_csv(const Lattice& lat, const ErrorReport& report) {
  std::ostringstream os;
  os << "edge,p,q,midpoint,depth,gamma_true,gamma_est,abs_err,log10_err,corner\n";
  for (const auto& e : report.per_edge)
    os << e.edge << ',' << tuple(lat.coords(e.p)) << ',' << tuple(lat.coords(e.q)) << ',' << tuple(e.midpoint) << ','
       << format_double(e.depth) << ',' << format_double(e.gamma_true) << ',' << format_double(e.gamma_est) << ','
       << format_double(e.abs_err) << ',' << format_double(e.log10_err) << ',' << e.corner << '\n';
  return os.str();
}

std::string study_csv(const StudyResult& study) {
  std::ostringstream os;
  os << "n,max_abs_err,median_abs_err,log10_max_abs_err,degraded_slices,depth_profile,monotone,growth_decades\n";
  for (const auto& r : study.rows) {
    std::string profile;
    for (const auto& b : r.profile)
      profile += (profile.empty() ? "" : ";") + std::to_string(b.band) + ":" + format_double(b.median_abs_err);
    os << r.size << ',' << format_double(r.max_abs_err) << ',' << format_double(r.median_abs_err) << ','
       << format_double(std::log10(std::max(r.max_abs_err, kErrorFloor))) << ',' << r.degraded_slices << ',' << profile
       << ',' << (study.monotone ? "true" : "false") << ',' << format_double(study.growth_decades) << '\n';
  }
  return os.str();
}

std::string property_csv(const std::vector<PropertySuiteResult>& suites) {
  std::ostringstream os;
  os << "dim,n,seed,check,passed,value,threshold\n";
  for (const auto& s : suites)
    for (const auto& c : s.checks)
      os << s.dim << ',' << s.size << ',' << s.seed << ',' << c.name << ',' << (c.passed ? "true" : "false") << ','
         << format_double(c.value) << ',' << format_double(c.threshold) << '\n';
  return os.str();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace calderon::io
