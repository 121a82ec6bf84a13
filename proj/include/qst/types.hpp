#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qst {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// Outcome of a product measurement: one 0-based element index per site.
using Outcome = std::vector<int>;

/// Largest site count for which a dense operator may be materialized.
inline constexpr int kMaxDenseSites = 10;

/// Malformed input: shape mismatch, out-of-range index, bad file contents.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: degenerate normalization, non-finite iterate,
/// probabilities that are too negative to be floating-point noise.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

inline long long ipow(long long base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

}  // namespace qst
