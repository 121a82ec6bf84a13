#pragma once

// POVM construction, verification and the measurement map on MPOs.

#include <optional>
#include <span>
#include <vector>

#include "qst/tt.hpp"
#include "qst/types.hpp"

namespace qst {

struct LocalPOVM {
  int d = 2;
  std::vector<CMatrix> elements;

  int size() const { return static_cast<int>(elements.size()); }
  /// Element i flattened with the fused index s = row + d * col.
  CVector fused(int i) const;
  /// p x K_loc matrix whose column i is fused(i).
  CMatrix fused_matrix() const;
};

/// One local POVM per site; the global element for outcome (i_1..i_n) is
/// B_{i_1} ⊗ ... ⊗ B_{i_n}. Outcome indices are 0-based in memory.
struct ProductPOVM {
  std::vector<LocalPOVM> sites;

  static ProductPOVM uniform(const LocalPOVM& local, int n);
  int num_sites() const { return static_cast<int>(sites.size()); }
  int local_dim() const { return sites.empty() ? 0 : sites[0].d; }
  /// Total outcome count K as a double; it overflows integers for large n.
  double outcome_count() const;
  void validate() const;
  void check_outcome(std::span<const int> outcome) const;
  /// Lexicographic flat index, site 1 most significant.
  long long flat_index(std::span<const int> outcome) const;
  Outcome outcome_at(long long flat) const;
};

struct DensePOVM {
  long long dim = 0;
  std::vector<CMatrix> elements;
  /// Unit vectors w_k with A_k = (dim / K) w_k w_k^† when the POVM is rank-one.
  std::optional<std::vector<CVector>> vectors;

  int size() const { return static_cast<int>(elements.size()); }
};

struct SicReport {
  bool count_ok = false;
  double trace_dev = 0;
  double self_dev = 0;
  double cross_dev = 0;

  bool passes(double tol) const {
    return count_ok && trace_dev <= tol && self_dev <= tol && cross_dev <= tol;
  }
};

struct DesignReport {
  int s = 0;
  double delta_lower = 0;
  double delta_upper = 0;
  std::string method = "spectral norm of symmetric-subspace moment deviation";
};

struct GammaReport {
  double gamma = 0;
  Outcome argmax_outcome;
  bool exact = false;
};

/// The four-element qubit SIC used as the local measurement.
LocalPOVM sic_qubit();

DensePOVM to_dense_povm(const LocalPOVM& local);
/// Kronecker lift; attaches rank-one vectors when every site has them.
DensePOVM to_dense_povm(const ProductPOVM& povm, int max_sites = kMaxDenseSites);
/// Extracts unit vectors w_k from rank-one elements (A_k = (dim/K) w w^†).
std::optional<std::vector<CVector>> rank_one_vectors(const DensePOVM& povm, double tol = 1e-10);

/// Weyl-Heisenberg orbit X^a Z^b |fiducial>, elements (1/d) |psi><psi|.
DensePOVM wh_sic_from_fiducial(int d, const CVector& fiducial);
/// Known fiducials for small dimensions (d = 2, 3).
std::optional<CVector> bundled_fiducial(int d);

SicReport check_sic(const DensePOVM& povm);
bool check_povm(const LocalPOVM& povm, double tol = 1e-10);
bool check_povm(const DensePOVM& povm, double tol = 1e-10);
/// Dual frame of a SIC: dim (dim + 1) A_k - I.
std::vector<CMatrix> dual_basis_sic(const DensePOVM& povm);

// Measurement map. Values are Re <A_k, rho> after checking that the
// imaginary residue is below 1e-10 (relative to the largest magnitude).
RVector measure_map_dense(const DensePOVM& povm, const DenseOperator& state);
/// Lexicographically ordered probabilities of a product POVM (site 1 most significant).
RVector measure_map_dense(const ProductPOVM& povm, const DenseOperator& state,
                          int max_sites = kMaxDenseSites);
/// Same ordering, computed by contracting the tensor train; never forms the operator.
RVector all_outcome_probabilities(const ProductPOVM& povm, const TTTensor& state,
                                  int max_sites = kMaxDenseSites);

/// Clamps entries in [-1e-10, 0) to zero and returns how many were clamped.
/// Throws NumericalError for anything more negative.
int clamp_probabilities(std::span<double> probs, double clamp_tol = 1e-10);

/// Precomputed site contractions of a state against the local POVM
/// elements, plus right environments of the identity transfer. Serves
/// outcome probabilities, prefix marginals and conditionals in O(n r^2).
class OutcomeContractor {
 public:
  OutcomeContractor(const ProductPOVM& povm, const TTTensor& state);

  int sites() const { return static_cast<int>(site_terms_.size()); }
  int local_outcomes(int l) const { return static_cast<int>(site_terms_[l].size()); }

  Complex probability(std::span<const int> outcome) const;
  Complex marginal(std::span<const int> prefix) const;
  /// Row vector G_1[i_1] ... G_l[i_l] for a prefix of length l.
  CMatrix left_vector(std::span<const int> prefix) const;
  /// Unnormalized weights of each next outcome given the left vector of a
  /// prefix of length l (entry i is the marginal of prefix + i).
  RVector next_weights(const CMatrix& left, int l) const;
  const CMatrix& site_term(int l, int i) const { return site_terms_[l][i]; }
  const CVector& right_env(int l) const { return right_env_[l]; }

 private:
  // site_terms_[l][i] = sum_s conj(b_i[s]) X_l^s.
  std::vector<std::vector<CMatrix>> site_terms_;
  // right_env_[l] = T_l T_{l+1} ... T_{n-1} * 1, T = identity transfer; right_env_[n] = 1.
  std::vector<CVector> right_env_;
};

double prob_of_outcome(const ProductPOVM& povm, const TTTensor& state, std::span<const int> outcome);
double marginal_prefix_prob(const ProductPOVM& povm, const TTTensor& state, std::span<const int> prefix);

enum class GammaMethod { exhaustive, beam };
GammaReport gamma(const ProductPOVM& povm, const TTTensor& state, GammaMethod method,
                  int beam_width = 64, int max_sites = kMaxDenseSites);

/// sum_k <A_k, rho> A_k applied site by site; ranks are unchanged.
TTTensor sum_channel(const ProductPOVM& povm, const TTTensor& state);
/// Local superoperator S[s', s] = sum_i b_i[s'] conj(b_i[s]).
CMatrix channel_superoperator(const LocalPOVM& local);

/// Contracts mode l of a tensor stored with mode 0 fastest against op
/// (new_dim x dims[l]); the returned tensor has dims[l] replaced by op.rows().
CVector apply_mode(const CVector& x, const std::vector<int>& dims, int l, const CMatrix& op);

// Design checks.
CMatrix sym_projector(int dim, int s);
DesignReport check_t_design(const std::vector<CVector>& vectors, int s);

}  // namespace qst
