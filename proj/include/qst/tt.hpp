#pragma once

// Tensor-train / matrix product operator representation.
//
// An operator rho on (C^d)^{⊗n} is stored as n cores. Core l holds the
// matrices X_l^{s} (r_{l-1} x r_l) for every fused physical index
// s = i + d*j, where i is the row (ket) and j the column (bra) index of
// site l, all 0-based. Entry rho(i_1..i_n, j_1..j_n) is the product
// X_1^{s_1} X_2^{s_2} ... X_n^{s_n}. Row/column multi-indices of the dense
// operator put site 1 first (most significant), matching the Kronecker
// product B_1 ⊗ ... ⊗ B_n.
//
// Storage: core l is a (r_{l-1} * d^2) x r_l column-major matrix whose row
// a + r_{l-1} * s holds entry (a, s, :). The same buffer read as an
// r_{l-1} x (d^2 * r_l) matrix is the right unfolding.

#include <optional>
#include <span>
#include <vector>

#include "qst/types.hpp"

namespace qst {

class TTTensor {
 public:
  TTTensor() = default;
  /// Validates that adjacent core dimensions chain and that boundary ranks are 1.
  TTTensor(int d, std::vector<CMatrix> cores);

  int sites() const { return static_cast<int>(cores_.size()); }
  int local_dim() const { return d_; }
  int phys_dim() const { return d_ * d_; }

  /// Full rank vector (r_0 = 1, r_1, ..., r_n = 1).
  std::vector<int> ranks() const;
  /// Internal ranks (r_1, ..., r_{n-1}).
  std::vector<int> bond_ranks() const;
  int max_rank() const;
  int left_rank(int l) const { return static_cast<int>(cores_[l].rows()) / phys_dim(); }
  int right_rank(int l) const { return static_cast<int>(cores_[l].cols()); }

  const CMatrix& core(int l) const { return cores_[l]; }
  const std::vector<CMatrix>& cores() const { return cores_; }

  /// Matrix X_l^{s} for fused index s.
  auto slice(int l, int s) const {
    const int r = left_rank(l);
    return cores_[l].block(static_cast<Eigen::Index>(r) * s, 0, r, cores_[l].cols());
  }

  /// rho(row, col) from per-site row and column indices.
  Complex element(std::span<const int> row, std::span<const int> col) const;

 private:
  int d_ = 2;
  std::vector<CMatrix> cores_;
};

/// Materialized operator on d^n dimensions.
struct DenseOperator {
  int sites = 0;
  int local_dim = 2;
  CMatrix matrix;

  DenseOperator() = default;
  DenseOperator(int n, int d, CMatrix m);
  long long dim() const { return matrix.rows(); }
  bool is_hermitian(double tol = 1e-12) const;
};

/// Exactly one of ranks / tolerance is set.
struct Truncation {
  std::optional<std::vector<int>> ranks;
  std::optional<double> tolerance;

  static Truncation to_ranks(std::vector<int> r) { return {std::move(r), std::nullopt}; }
  static Truncation to_tolerance(double tol) { return {std::nullopt, tol}; }
};

/// Maximal admissible rank at every internal cut: min(p^l, p^{n-l}), p = d^2.
std::vector<int> rank_caps(int n, int d);
/// Same rank at every internal cut, capped by rank_caps.
std::vector<int> uniform_ranks(int n, int d, int rank);
void validate_ranks(int n, int d, const std::vector<int>& ranks);

// Fused-tensor views of dense operators. The fused vector has length
// (d^2)^n with s_1 varying fastest.
CVector dense_to_fused(const DenseOperator& op);
DenseOperator fused_to_dense(const CVector& fused, int n, int d);

TTTensor tt_from_dense(const DenseOperator& dense, const Truncation& trunc,
                       int max_sites = kMaxDenseSites);
TTTensor tt_from_fused(const CVector& fused, int n, int d, const Truncation& trunc);
DenseOperator tt_to_dense(const TTTensor& tt, int max_sites = kMaxDenseSites);
CVector tt_to_fused(const TTTensor& tt, int max_sites = kMaxDenseSites);

/// <a, b> = trace(a^† b).
Complex tt_inner(const TTTensor& a, const TTTensor& b);
double tt_norm(const TTTensor& a);
/// Frobenius distance computed from an orthogonalized difference; accurate
/// to roughly machine precision times the operand norms.
double tt_distance(const TTTensor& a, const TTTensor& b);
Complex tt_trace(const TTTensor& a);

TTTensor tt_add(const TTTensor& a, const TTTensor& b);
TTTensor tt_scale(const TTTensor& a, Complex c);
TTTensor tt_round(const TTTensor& a, const Truncation& trunc);
TTTensor tt_adjoint(const TTTensor& a);
bool is_hermitian(const TTTensor& a, double tol);

/// min over cuts l of sigma_{r_l} of the l-th unfolding (dense route).
double smallest_tt_singular_value(const TTTensor& a, const std::vector<int>& ranks,
                                  int max_sites = kMaxDenseSites);
/// Singular values of every unfolding of the fused tensor, descending.
std::vector<RVector> unfolding_singular_values(const CVector& fused, int n, int d);

/// All-ranks-1 tensor from per-site d x d factors.
TTTensor tt_product(const std::vector<CMatrix>& factors);
TTTensor tt_zero(int n, int d);

}  // namespace qst
