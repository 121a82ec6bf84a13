#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "qst/povm.hpp"

namespace qst {

namespace {

constexpr long long kMaxMomentDim = 1000;  // dim^s, i.e. at most 1e6 matrix entries

double binomial(long long n, long long k) {
  double r = 1;
  for (long long i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

long long moment_dim(int dim, int s) {
  require(dim >= 1 && s >= 1, "moment operator needs dim >= 1 and s >= 1");
  long long total = 1;
  for (int i = 0; i < s; ++i) {
    total *= dim;
    require(total <= kMaxMomentDim, "dim^s exceeds the moment-operator size cap");
  }
  return total;
}

}  // namespace

CMatrix sym_projector(int dim, int s) {
  const long long total = moment_dim(dim, s);
  CMatrix proj = CMatrix::Zero(total, total);
  std::vector<int> perm(s);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> digits(s), permuted(s);
  double count = 0;
  do {
    count += 1;
    for (long long x = 0; x < total; ++x) {
      long long rest = x;
      for (int t = s - 1; t >= 0; --t) {
        digits[t] = static_cast<int>(rest % dim);
        rest /= dim;
      }
      for (int t = 0; t < s; ++t) permuted[t] = digits[perm[t]];
      long long y = 0;
      for (int t = 0; t < s; ++t) y = y * dim + permuted[t];
      proj(y, x) += 1.0;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return proj / count;
}

DesignReport check_t_design(const std::vector<CVector>& vectors, int s) {
  require(!vectors.empty(), "design check needs at least one vector");
  const int dim = static_cast<int>(vectors[0].size());
  const long long total = moment_dim(dim, s);
  for (const auto& w : vectors) {
    require(w.size() == dim, "design vectors must share one dimension");
    require(std::abs(w.norm() - 1.0) <= 1e-12, "design vectors must be unit norm");
  }

  CMatrix moment = CMatrix::Zero(total, total);
  for (const auto& w : vectors) {
    CVector v = w;
    for (int t = 1; t < s; ++t) v = Eigen::kroneckerProduct(v, w).eval();
    moment.noalias() += v * v.adjoint();
  }
  moment /= static_cast<double>(vectors.size());

  const double haar_dim = binomial(dim + s - 1, s);
  const CMatrix p_sym = sym_projector(dim, s);
  CMatrix delta = moment - p_sym / haar_dim;
  delta = 0.5 * (delta + delta.adjoint()).eval();

  DesignReport rep;
  rep.s = s;
  Eigen::SelfAdjointEigenSolver<CMatrix> full(delta, Eigen::EigenvaluesOnly);
  rep.delta_upper = haar_dim * full.eigenvalues().cwiseAbs().maxCoeff();

  // Restriction to the symmetric subspace: the tightest delta for which the
  // two-sided operator sandwich holds.
  Eigen::SelfAdjointEigenSolver<CMatrix> basis(p_sym);
  const auto& pe = basis.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < pe.size(); ++i)
    if (pe(i) > 0.5) keep.push_back(i);
  CMatrix q(total, static_cast<Eigen::Index>(keep.size()));
  for (size_t c = 0; c < keep.size(); ++c) q.col(static_cast<Eigen::Index>(c)) = basis.eigenvectors().col(keep[c]);
  const CMatrix restricted = q.adjoint() * delta * q;
  Eigen::SelfAdjointEigenSolver<CMatrix> sym(restricted, Eigen::EigenvaluesOnly);
  const auto& se = sym.eigenvalues();
  rep.delta_lower = haar_dim * std::max({0.0, se.maxCoeff(), -se.minCoeff()});
  return rep;
}

}  // namespace qst
