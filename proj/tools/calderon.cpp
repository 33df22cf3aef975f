// calderon: generate problems, compute DtN maps, reconstruct and verify.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "calderon/forward.hpp"
#include "calderon/io.hpp"
#include "calderon/lattice.hpp"
#include "calderon/reconstruction.hpp"
#include "calderon/verification.hpp"

namespace {

using namespace calderon;

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kIo = 2;

/// Validation failure (bad arguments, mismatched inputs, failed checks).
struct Invalid : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::pair<double, double> parse_range(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Invalid("--dist expects lo,hi");
  double lo = 0.0, hi = 0.0;
  try {
    lo = std::stod(s.substr(0, comma));
    hi = std::stod(s.substr(comma + 1));
  } catch (const std::exception&) {
    throw Invalid("--dist expects two numbers, got \"" + s + "\"");
  }
  if (!(lo > 0.0)) throw Invalid("--dist lower bound must be > 0");
  if (!(hi >= lo) || !std::isfinite(hi)) throw Invalid("--dist upper bound must be finite and >= lower bound");
  return {lo, hi};
}

// "8..13" or "8,10,13".
std::vector<int> parse_sizes(const std::string& s) {
  std::vector<int> out;
  try {
    if (const auto dots = s.find(".."); dots != std::string::npos) {
      const int a = std::stoi(s.substr(0, dots));
      const int b = std::stoi(s.substr(dots + 2));
      for (int n = a; n <= b; ++n) out.push_back(n);
    } else {
      std::stringstream ss(s);
      for (std::string part; std::getline(ss, part, ',');) out.push_back(std::stoi(part));
    }
  } catch (const std::exception&) {
    throw Invalid("--n-list expects a..b or a comma list, got \"" + s + "\"");
  }
  if (out.empty()) throw Invalid("--n-list is empty");
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i] < 1 || (i && out[i] <= out[i - 1])) throw Invalid("--n-list must be ascending positive sizes");
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::write_file(path, text);
}

struct Options {
  int dim = 3;
  int n = 2;
  std::string dist = "1,2";
  std::uint64_t seed = 0;
  std::string input, recon, output;
  std::string corners = "all";
  double tol = 1e-10;
  std::string sizes = "8..13";
};

int cmd_generate(const Options& o) {
  const auto [lo, hi] = parse_range(o.dist);
  if (o.dim < 2 || o.n < 1) throw Invalid("--dim must be >= 2 and --n >= 1");
  const Lattice lat(o.dim, o.n);
  const auto g = ConductivityField::uniform(lat, lo, hi, o.seed);
  emit(o.output, io::to_json(io::ProblemFile{o.dim, o.n, g.values(), o.seed, lo, hi}));
  return kOk;
}

int cmd_dtn(const Options& o) {
  const auto p = io::parse_problem(io::read_file(o.input));
  const Lattice lat(p.dim, p.size);
  const auto dtn = assemble_dtn(lat, ConductivityField(lat, p.gamma));
  const auto diag = diagnose_dtn(dtn.entries);
  emit(o.output, io::to_json(io::DtnFile{p.dim, p.size, dtn.entries, dtn.asymmetry, diag.max_row_sum}));
  std::cerr << "asymmetry before symmetrization " << io::format_double(dtn.asymmetry) << ", max row sum "
            << io::format_double(diag.max_row_sum) << "\n";
  return kOk;
}

int cmd_reconstruct(const Options& o) {
  const auto f = io::parse_dtn(io::read_file(o.input));
  const Lattice lat(f.dim, f.size);
  ReconstructionOptions opts;
  opts.kernel_tol = o.tol;
  if (o.corners == "origin")
    opts.corners = {Corner::origin(f.dim)};
  else if (o.corners != "all")
    throw Invalid("--corners must be all or origin");
  io::ReconstructionFile out{f.dim, f.size, o.tol, reconstruct(lat, f.matrix, opts)};
  emit(o.output, io::to_json(out));
  for (const auto& d : out.report.diagnostics) std::cerr << d << "\n";
  return kOk;
}

int cmd_verify(const Options& o) {
  const auto p = io::parse_problem(io::read_file(o.input));
  const auto r = io::parse_reconstruction(io::read_file(o.recon));
  if (p.dim != r.dim || p.size != r.size)
    throw Invalid("lattice mismatch: problem is d=" + std::to_string(p.dim) + " n=" + std::to_string(p.size) +
                  ", reconstruction is d=" + std::to_string(r.dim) + " n=" + std::to_string(r.size));
  const Lattice lat(p.dim, p.size);
  const auto err = compare(lat, ConductivityField(lat, p.gamma), r.report);
  emit(o.output, io::error_csv(lat, err));
  std::cerr << "max abs error " << io::format_double(err.max_abs_err) << ", median "
            << io::format_double(err.median_abs_err) << ", uncovered " << err.uncovered << "\n";
  return kOk;
}

int cmd_selftest(const Options& o) {
  if (o.dim < 2 || o.n < 1) throw Invalid("--dim must be >= 2 and --n >= 1");
  const auto r = run_property_suite(o.dim, o.n, o.seed);
  for (const auto& c : r.checks) std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << "\n";
  std::cout << (r.all_passed() ? "all properties hold" : "property violations found") << "\n";
  if (!o.output.empty()) io::write_file(o.output, io::property_csv({r}));
  return r.all_passed() ? kOk : kInvalid;
}

int cmd_study(const Options& o) {
  const auto sizes = parse_sizes(o.sizes);
  const auto [lo, hi] = parse_range(o.dist);
  const auto s = error_growth_study(o.dim, sizes, lo, hi, o.seed);
  emit(o.output, io::study_csv(s));
  std::cerr << "max error " << (s.monotone ? "nondecreasing" : "not monotone") << " in n, growth "
            << io::format_double(s.growth_decades) << " decades\n";
  return s.monotone ? kOk : kInvalid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete inverse conductivity on hypercubic lattices"};
  app.require_subcommand(1);
  Options o;
  int (*run)(const Options&) = nullptr;

  auto* gen = app.add_subcommand("generate", "Random conductivity problem file");
  gen->add_option("--dim", o.dim, "Lattice dimension d")->capture_default_str();
  gen->add_option("--n", o.n, "Interior side length n")->capture_default_str();
  gen->add_option("--dist", o.dist, "Uniform conductivity range lo,hi (lo > 0)")->capture_default_str();
  gen->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  gen->add_option("-o,--output", o.output, "Output problem JSON (stdout if omitted)");
  gen->callback([&] { run = cmd_generate; });

  auto* dtn = app.add_subcommand("dtn", "Dirichlet-to-Neumann matrix of a problem");
  dtn->add_option("-i,--input", o.input, "Problem JSON")->required();
  dtn->add_option("-o,--output", o.output, "Output DtN JSON");
  dtn->callback([&] { run = cmd_dtn; });

  auto* rec = app.add_subcommand("reconstruct", "Recover conductivities from a DtN matrix");
  rec->add_option("-i,--input", o.input, "DtN JSON")->required();
  rec->add_option("--corners", o.corners, "all or origin")->capture_default_str();
  rec->add_option("--tol", o.tol, "Relative kernel tolerance")->capture_default_str();
  rec->add_option("-o,--output", o.output, "Output reconstruction JSON");
  rec->callback([&] { run = cmd_reconstruct; });

  auto* ver = app.add_subcommand("verify", "Per-edge error report of a reconstruction");
  ver->add_option("-i,--input", o.input, "Problem JSON with the true conductivity")->required();
  ver->add_option("--recon", o.recon, "Reconstruction JSON")->required();
  ver->add_option("-o,--output", o.output, "Output CSV");
  ver->callback([&] { run = cmd_verify; });

  auto* self = app.add_subcommand("selftest", "Run the property suite on a random conductivity");
  self->add_option("--dim", o.dim, "Lattice dimension d")->capture_default_str();
  self->add_option("--n", o.n, "Interior side length n")->capture_default_str();
  self->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  self->add_option("-o,--output", o.output, "Optional CSV of check results");
  self->callback([&] { run = cmd_selftest; });

  auto* study = app.add_subcommand("study", "Error growth with lattice size");
  study->add_option("--dim", o.dim, "Lattice dimension d")->capture_default_str();
  study->add_option("--n-list", o.sizes, "Sizes as a..b or a,b,c")->capture_default_str();
  study->add_option("--dist", o.dist, "Uniform conductivity range lo,hi")->capture_default_str();
  study->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  study->add_option("-o,--output", o.output, "Output CSV");
  study->callback([&] { run = cmd_study; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }
  try {
    return run(o);
  } catch (const Invalid& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const io::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const io::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInvalid;
  }
}
