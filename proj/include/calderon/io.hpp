#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calderon/forward.hpp"
#include "calderon/lattice.hpp"
#include "calderon/reconstruction.hpp"
#include "calderon/verification.hpp"

namespace calderon::io {

/// Malformed or inconsistent file contents.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable or unwritable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ProblemFile {
  int dim = 0;
  int size = 0;
  std::vector<double> gamma;  // canonical edge order
  std::uint64_t seed = 0;
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const ProblemFile&, const ProblemFile&) = default;
};

struct DtnFile {
  int dim = 0;
  int size = 0;
  Eigen::MatrixXd matrix;  // canonical boundary order
  double asymmetry = 0.0;  // before symmetrization
  double max_row_sum = 0.0;

  friend bool operator==(const DtnFile& a, const DtnFile& b) {
    return a.dim == b.dim && a.size == b.size && a.matrix.rows() == b.matrix.rows() &&
           a.matrix.cols() == b.matrix.cols() && a.matrix == b.matrix && a.asymmetry == b.asymmetry &&
           a.max_row_sum == b.max_row_sum;
  }
};

struct ReconstructionFile {
  int dim = 0;
  int size = 0;
  double kernel_tol = 0.0;
  ReconstructionReport report;
};

bool operator==(const ReconstructionFile& a, const ReconstructionFile& b);

std::string to_json(const ProblemFile& f);
std::string to_json(const DtnFile& f);
std::string to_json(const ReconstructionFile& f);

ProblemFile parse_problem(const std::string& text);
DtnFile parse_dtn(const std::string& text);
ReconstructionFile parse_reconstruction(const std::string& text);

/// Per-edge error table: endpoints, midpoint, depth, gamma_true, gamma_est,
/// abs_err, log10_err, corner.
std::string error_csv(const Lattice& lat, const ErrorReport& report);
std::string study_csv(const StudyResult& study);
std::string property_csv(const std::vector<PropertySuiteResult>& suites);

/// Shortest decimal form that parses back to the same double; "nan"/"inf" otherwise.
std::string format_double(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace calderon::io
