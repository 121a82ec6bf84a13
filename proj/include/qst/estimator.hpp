#pragma once

// Constrained least-squares state estimation over MPOs of bounded rank:
//   minimize || A(rho) - p_hat ||_2^2  subject to  rank_tt(rho) <= r, trace(rho) = 1,
// by projected (stochastic) gradient descent with TT-SVD projection.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qst/povm.hpp"
#include "qst/sampler.hpp"
#include "qst/tt.hpp"

namespace qst {

enum class InitMode { spectral, random, provided };
enum class Backend { automatic, dense, tt };

/// Largest n for which Backend::automatic iterates on the fused dense tensor.
inline constexpr int kAutoDenseSites = 8;

struct EstimatorConfig {
  std::vector<int> ranks;  // internal ranks r_1..r_{n-1}
  double mu0 = 5.0 / 4.0;
  double lambda = 0.9;
  bool scale_2n = true;  // step mu_tau = mu0 * 2^n * lambda^tau
  int max_iters = 200;   // PGD iterations
  int max_epochs = 50;   // PSGD epochs
  InitMode init = InitMode::random;
  std::uint64_t init_seed = 0;
  std::optional<TTTensor> provided_init;
  Backend backend = Backend::automatic;
  long long epoch_size = 0;  // N; 0 selects 40 n rbar^2 (640 n at rbar = 4)
  long long batch_size = 32;  // B
  std::uint64_t batch_seed = 0;  // zero-outcome filler and batch order
  double tt_round_tol = 1e-12;   // exactness tolerance for intermediate sums
  bool record_trace = true;
  double plateau_tol = 1e-10;
  int plateau_window = 10;
  /// Design order t of the measurement; selects gamma_t (gamma for t = 2, 1 otherwise)
  /// in the step-size diagnostic.
  int design_t = 2;

  void validate(int n, int d) const;
  int max_rank() const;
};

enum class SchedulePreset { random_r1, random_r4, spectral_r1, spectral_r4, fixed_random, fixed_spectral };

/// Step-size presets of the reference experiments; fixed_* use lambda = 1.
void apply_schedule(EstimatorConfig& config, SchedulePreset preset);
/// Preset chosen from init mode and rank (rank <= 1 vs larger), decaying or fixed.
SchedulePreset default_preset(InitMode init, int rbar, bool fixed_step);

struct IterateLog {
  int iter = 0;
  double loss = 0;
  double error = std::numeric_limits<double>::quiet_NaN();  // vs truth, when supplied
  double step = 0;
  double wall_ms = 0;
};

struct Estimate {
  TTTensor state;
  std::vector<IterateLog> trace_log;
  int iterations_run = 0;
  bool converged = false;
  std::string converged_reason;
  double initial_error = std::numeric_limits<double>::quiet_NaN();
  double final_loss = 0;
  long long epoch_size = 0;
  long long batch_size = 0;
  Backend backend = Backend::automatic;
};

Backend resolve_backend(Backend b, int n);

// --- loss --------------------------------------------------------------

/// <rho, Phi(rho)> - 2 sum_{f_k > 0} p_hat_k <A_k, rho> + sum p_hat_k^2; never
/// touches zero-count outcomes.
double loss(const TTTensor& state, const OutcomeRecord& record, const ProductPOVM& povm);
/// Same value from the full K-vector of probabilities of a dense operator.
double loss_dense(const DenseOperator& state, const OutcomeRecord& record, const ProductPOVM& povm);

// --- gradient ----------------------------------------------------------

struct WeightedOutcome {
  Outcome outcome;
  double weight = 0;
};

/// Sum_k weight_k A_k as an exact tensor train, accumulated in blocks of 64
/// rank-one terms with tolerance rounding in between.
TTTensor product_terms_tt(const ProductPOVM& povm, const std::vector<WeightedOutcome>& terms, double round_tol);
/// Same sum as a fused dense tensor.
CVector product_terms_fused(const ProductPOVM& povm, const std::vector<WeightedOutcome>& terms);

/// Precomputed constant part of a gradient (e.g. -sum p_hat_k A_k), in
/// whichever representations the chosen backend needs.
struct PrecomputedTerm {
  std::optional<TTTensor> tt;
  std::optional<CVector> fused;
};

/// Lazy Wirtinger gradient: channel + sum_k weight_k A_k + precomputed.
/// Nothing dense is formed until to_fused() is called.
class GradientHandle {
 public:
  GradientHandle(const ProductPOVM& povm, std::optional<TTTensor> channel, std::vector<WeightedOutcome> terms,
                 std::shared_ptr<const PrecomputedTerm> precomputed = nullptr);

  const std::optional<TTTensor>& channel() const { return channel_; }
  const std::vector<WeightedOutcome>& terms() const { return terms_; }

  TTTensor to_tt(double round_tol = 1e-12) const;
  CVector to_fused() const;
  DenseOperator to_dense() const;
  /// state - mu * gradient, exact up to round_tol.
  TTTensor step_tt(const TTTensor& state, double mu, double round_tol) const;
  CVector step_fused(const TTTensor& state, double mu) const;

 private:
  ProductPOVM povm_;
  std::optional<TTTensor> channel_;
  std::vector<WeightedOutcome> terms_;
  std::shared_ptr<const PrecomputedTerm> precomputed_;
};

/// grad g(rho) = sum_k (<A_k, rho> - p_hat_k) A_k = Phi(rho) - sum_{f_k > 0} p_hat_k A_k.
GradientHandle wirtinger_gradient(const TTTensor& state, const OutcomeRecord& record, const ProductPOVM& povm);

// --- projection --------------------------------------------------------

/// Rank truncation, Hermitian symmetrization, then division by the trace.
TTTensor project_mpo(const TTTensor& raw, const std::vector<int>& ranks);
TTTensor project_mpo(const DenseOperator& raw, const std::vector<int>& ranks);
TTTensor project_fused(const CVector& raw, int n, int d, const std::vector<int>& ranks);
TTTensor project_mpo(const TTTensor& state, const GradientHandle& grad, double mu, const std::vector<int>& ranks,
                     Backend backend = Backend::tt, double round_tol = 1e-12);

// --- algorithms --------------------------------------------------------

Estimate pgd(const OutcomeRecord& record, const ProductPOVM& povm, const EstimatorConfig& config,
             const std::optional<TTTensor>& truth = std::nullopt);
Estimate psgd(const OutcomeRecord& record, const ProductPOVM& povm, const EstimatorConfig& config,
              const std::optional<TTTensor>& truth = std::nullopt);

/// Projection of sum_k K (d^n + 1) / d^n p_hat_k A_k onto the rank-r, unit-trace set.
TTTensor spectral_init(const OutcomeRecord& record, const ProductPOVM& povm, const std::vector<int>& ranks,
                       Backend backend = Backend::automatic);
/// Random MPDO with kappa = ceil(sqrt(rbar)), projected to ranks if it exceeds them.
TTTensor random_init(const std::vector<int>& ranks, int n, int d, std::uint64_t seed);

/// Euclidean projection onto unit-trace PSD operators (eigenvalues onto the simplex).
DenseOperator psd_project(const DenseOperator& state);
/// Euclidean projection of v onto {x >= 0, sum x = 1}.
RVector project_to_simplex(const RVector& v);

/// Frobenius distance between two MPOs.
double recovery_error(const TTTensor& a, const TTTensor& b);

/// Admissible step interval and contraction factor of the local linear
/// convergence analysis (diagnostic only; the default schedule does not use it).
struct StepWindow {
  double lower = 0;
  double upper = 0;
  double rate = 0;          // a at mu = upper
  double init_radius = 0;   // admissible ||rho0 - rho*||_F
  bool nonempty = false;
};
StepWindow local_convergence_window(double outcome_count, int n, int d, double sigma_min, double init_error,
                                    double delta);

}  // namespace qst
