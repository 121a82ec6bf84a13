#include "qst/estimator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "qst/rng.hpp"
#include "qst/statesim.hpp"

namespace qst {

namespace {

constexpr size_t kTermBlock = 64;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double step_size(const EstimatorConfig& c, int n, int tau) {
  const double base = c.scale_2n ? c.mu0 * std::ldexp(1.0, n) : c.mu0;
  return base * std::pow(c.lambda, tau);
}

double sum_sq_empirical(const OutcomeRecord& record) {
  double s = 0;
  const double m = static_cast<double>(record.shots());
  for (const auto& [k, c] : record.counts()) s += (c / m) * (c / m);
  return s;
}

std::vector<WeightedOutcome> empirical_terms(const OutcomeRecord& record, double scale) {
  std::vector<WeightedOutcome> terms;
  terms.reserve(record.distinct());
  const double m = static_cast<double>(record.shots());
  for (const auto& [k, c] : record.counts()) terms.push_back({k, scale * static_cast<double>(c) / m});
  return terms;
}

// Rank-U tensor train of sum_k w_k A_k for one block of terms.
TTTensor block_terms_tt(const ProductPOVM& povm, std::span<const WeightedOutcome> terms) {
  const int n = povm.num_sites(), p = povm.local_dim() * povm.local_dim();
  const int u = static_cast<int>(terms.size());
  std::vector<CMatrix> cores;
  if (n == 1) {
    CMatrix c = CMatrix::Zero(p, 1);
    for (const auto& t : terms) c.col(0) += t.weight * povm.sites[0].fused(t.outcome[0]);
    cores.push_back(c);
    return TTTensor(povm.local_dim(), std::move(cores));
  }
  for (int l = 0; l < n; ++l) {
    const int left = (l == 0) ? 1 : u;
    const int right = (l == n - 1) ? 1 : u;
    CMatrix c = CMatrix::Zero(static_cast<Eigen::Index>(left) * p, right);
    for (int k = 0; k < u; ++k) {
      const CVector b = povm.sites[l].fused(terms[k].outcome[l]);
      const double w = (l == 0) ? terms[k].weight : 1.0;
      for (int s = 0; s < p; ++s) {
        const Eigen::Index row = static_cast<Eigen::Index>(left) * s + (l == 0 ? 0 : k);
        c(row, l == n - 1 ? 0 : k) = w * b(s);
      }
    }
    cores.push_back(std::move(c));
  }
  return TTTensor(povm.local_dim(), std::move(cores));
}

TTTensor finalize_projection(const TTTensor& rounded, const std::vector<int>& ranks) {
  TTTensor herm = tt_scale(tt_add(rounded, tt_adjoint(rounded)), 0.5);
  herm = rounded.sites() > 1 ? tt_round(herm, Truncation::to_ranks(ranks)) : herm;
  const Complex tr = tt_trace(herm);
  if (std::abs(tr) < 1e-8 || !std::isfinite(std::abs(tr)))
    throw NumericalError("projection: trace of the rank-truncated operator is numerically zero");
  return tt_scale(herm, 1.0 / tr.real());
}

TTTensor initial_state(const OutcomeRecord& record, const ProductPOVM& povm, const EstimatorConfig& c,
                       Backend backend) {
  const int n = povm.num_sites(), d = povm.local_dim();
  switch (c.init) {
    case InitMode::spectral:
      return spectral_init(record, povm, c.ranks, backend);
    case InitMode::random:
      return random_init(c.ranks, n, d, c.init_seed);
    case InitMode::provided:
      require(c.provided_init.has_value(), "init = provided but no initial state given");
      require(c.provided_init->sites() == n && c.provided_init->local_dim() == d,
              "provided initial state has the wrong shape");
      return project_mpo(*c.provided_init, c.ranks);
  }
  throw InputError("unknown init mode");
}

void check_finite(double value, int iter) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << "non-finite loss at iteration " << iter << " (step size too large?)";
    throw NumericalError(os.str());
  }
}

// Relative loss change over the plateau window.
bool plateaued(const std::vector<double>& losses, const EstimatorConfig& c) {
  const size_t w = static_cast<size_t>(c.plateau_window);
  if (losses.size() <= w) return false;
  const double now = losses.back(), then = losses[losses.size() - 1 - w];
  return std::abs(now - then) <= c.plateau_tol * std::max(std::abs(then), 1e-300);
}

}  // namespace

void EstimatorConfig::validate(int n, int d) const {
  validate_ranks(n, d, ranks);
  require(mu0 > 0 && std::isfinite(mu0), "mu0 must be positive");
  require(lambda > 0 && lambda <= 1, "lambda must lie in (0, 1]");
  require(max_iters >= 0 && max_epochs >= 0, "iteration limits must be >= 0");
  require(batch_size >= 1, "batch size must be >= 1");
  require(epoch_size == 0 || batch_size <= epoch_size, "batch size must not exceed the epoch size");
  require(plateau_window >= 1, "plateau window must be >= 1");
  require(tt_round_tol >= 0, "tt_round_tol must be >= 0");
  require(design_t >= 2, "design order must be >= 2");
  if (init == InitMode::provided) require(provided_init.has_value(), "init = provided but no initial state given");
}

int EstimatorConfig::max_rank() const {
  return ranks.empty() ? 1 : *std::max_element(ranks.begin(), ranks.end());
}

void apply_schedule(EstimatorConfig& c, SchedulePreset preset) {
  c.scale_2n = true;
  c.lambda = 0.9;
  switch (preset) {
    case SchedulePreset::random_r1: c.mu0 = 5.0 / 4.0; break;
    case SchedulePreset::random_r4: c.mu0 = 5.0 / 8.0; break;
    case SchedulePreset::spectral_r1: c.mu0 = 5.0 / 8.0; break;
    case SchedulePreset::spectral_r4: c.mu0 = 5.0 / 16.0; break;
    case SchedulePreset::fixed_random: c.mu0 = 5.0 / 32.0; c.lambda = 1.0; break;
    case SchedulePreset::fixed_spectral: c.mu0 = 1.0 / 16.0; c.lambda = 1.0; break;
  }
}

SchedulePreset default_preset(InitMode init, int rbar, bool fixed_step) {
  const bool spectral = init == InitMode::spectral;
  if (fixed_step) return spectral ? SchedulePreset::fixed_spectral : SchedulePreset::fixed_random;
  if (rbar <= 1) return spectral ? SchedulePreset::spectral_r1 : SchedulePreset::random_r1;
  return spectral ? SchedulePreset::spectral_r4 : SchedulePreset::random_r4;
}

Backend resolve_backend(Backend b, int n) {
  if (b != Backend::automatic) return b;
  return n <= kAutoDenseSites ? Backend::dense : Backend::tt;
}

double loss(const TTTensor& state, const OutcomeRecord& record, const ProductPOVM& povm) {
  record.validate_against(povm);
  const double quad = tt_inner(state, sum_channel(povm, state)).real();
  const OutcomeContractor oc(povm, state);
  double cross = 0;
  const double m = static_cast<double>(record.shots());
  for (const auto& [k, c] : record.counts()) cross += (c / m) * oc.probability(k).real();
  return std::max(0.0, quad - 2.0 * cross + sum_sq_empirical(record));
}

double loss_dense(const DenseOperator& state, const OutcomeRecord& record, const ProductPOVM& povm) {
  record.validate_against(povm);
  const RVector p = measure_map_dense(povm, state);
  RVector resid = p;
  const double m = static_cast<double>(record.shots());
  for (const auto& [k, c] : record.counts()) resid(povm.flat_index(k)) -= c / m;
  return resid.squaredNorm();
}

TTTensor product_terms_tt(const ProductPOVM& povm, const std::vector<WeightedOutcome>& terms, double round_tol) {
  povm.validate();
  const int n = povm.num_sites();
  if (terms.empty()) return tt_zero(n, povm.local_dim());
  for (const auto& t : terms) {
    require(static_cast<int>(t.outcome.size()) == n, "term outcome length differs from the site count");
    povm.check_outcome(t.outcome);
  }
  std::optional<TTTensor> acc;
  const std::span<const WeightedOutcome> all(terms);
  for (size_t start = 0; start < terms.size(); start += kTermBlock) {
    const auto block = all.subspan(start, std::min(kTermBlock, terms.size() - start));
    TTTensor part = block_terms_tt(povm, block);
    acc = tt_round(acc ? tt_add(*acc, part) : part, Truncation::to_tolerance(round_tol));
  }
  return *acc;
}

CVector product_terms_fused(const ProductPOVM& povm, const std::vector<WeightedOutcome>& terms) {
  povm.validate();
  const int n = povm.num_sites(), p = povm.local_dim() * povm.local_dim();
  require(n <= kMaxDenseSites, "dense gradient exceeds the materialization cap");
  // Weights scattered on the outcome tensor (site 1 fastest), then each mode
  // is mapped from outcomes to the fused physical index.
  std::vector<int> dims;
  long long total = 1;
  for (const auto& s : povm.sites) {
    dims.push_back(s.size());
    total *= s.size();
  }
  CVector x = CVector::Zero(total);
  for (const auto& t : terms) {
    require(static_cast<int>(t.outcome.size()) == n, "term outcome length differs from the site count");
    povm.check_outcome(t.outcome);
    long long idx = 0;
    for (int l = n - 1; l >= 0; --l) idx = idx * dims[l] + t.outcome[l];
    x(idx) += t.weight;
  }
  for (int l = 0; l < n; ++l) {
    x = apply_mode(x, dims, l, povm.sites[l].fused_matrix());
    dims[l] = p;
  }
  return x;
}

GradientHandle::GradientHandle(const ProductPOVM& povm, std::optional<TTTensor> channel,
                               std::vector<WeightedOutcome> terms, std::shared_ptr<const PrecomputedTerm> precomputed)
    : povm_(povm), channel_(std::move(channel)), terms_(std::move(terms)), precomputed_(std::move(precomputed)) {}

TTTensor GradientHandle::to_tt(double round_tol) const {
  std::optional<TTTensor> acc = channel_;
  auto add = [&acc](const TTTensor& t) { acc = acc ? tt_add(*acc, t) : t; };
  if (!terms_.empty()) add(product_terms_tt(povm_, terms_, round_tol));
  if (precomputed_) {
    require(precomputed_->tt.has_value(), "gradient handle lacks a tensor-train precomputed term");
    add(*precomputed_->tt);
  }
  if (!acc) return tt_zero(povm_.num_sites(), povm_.local_dim());
  return tt_round(*acc, Truncation::to_tolerance(round_tol));
}

CVector GradientHandle::to_fused() const {
  const int n = povm_.num_sites(), p = povm_.local_dim() * povm_.local_dim();
  CVector g = CVector::Zero(ipow(p, n));
  if (channel_) g += tt_to_fused(*channel_);
  if (!terms_.empty()) g += product_terms_fused(povm_, terms_);
  if (precomputed_) {
    require(precomputed_->fused.has_value(), "gradient handle lacks a dense precomputed term");
    g += *precomputed_->fused;
  }
  return g;
}

DenseOperator GradientHandle::to_dense() const {
  return fused_to_dense(to_fused(), povm_.num_sites(), povm_.local_dim());
}

TTTensor GradientHandle::step_tt(const TTTensor& state, double mu, double round_tol) const {
  TTTensor acc = state;
  if (channel_) acc = tt_add(acc, tt_scale(*channel_, -mu));
  if (!terms_.empty()) acc = tt_add(acc, tt_scale(product_terms_tt(povm_, terms_, round_tol), -mu));
  if (precomputed_) {
    require(precomputed_->tt.has_value(), "gradient handle lacks a tensor-train precomputed term");
    acc = tt_add(acc, tt_scale(*precomputed_->tt, -mu));
  }
  return acc;
}

CVector GradientHandle::step_fused(const TTTensor& state, double mu) const {
  return tt_to_fused(state) - mu * to_fused();
}

GradientHandle wirtinger_gradient(const TTTensor& state, const OutcomeRecord& record, const ProductPOVM& povm) {
  record.validate_against(povm);
  return GradientHandle(povm, sum_channel(povm, state), empirical_terms(record, -1.0));
}

TTTensor project_mpo(const TTTensor& raw, const std::vector<int>& ranks) {
  if (raw.sites() == 1) return finalize_projection(raw, ranks);
  return finalize_projection(tt_round(raw, Truncation::to_ranks(ranks)), ranks);
}

TTTensor project_mpo(const DenseOperator& raw, const std::vector<int>& ranks) {
  DenseOperator herm(raw.sites, raw.local_dim, 0.5 * (raw.matrix + raw.matrix.adjoint()));
  const Truncation trunc = raw.sites > 1 ? Truncation::to_ranks(ranks) : Truncation::to_tolerance(0.0);
  return finalize_projection(tt_from_dense(herm, trunc), ranks);
}

TTTensor project_fused(const CVector& raw, int n, int d, const std::vector<int>& ranks) {
  return project_mpo(fused_to_dense(raw, n, d), ranks);
}

TTTensor project_mpo(const TTTensor& state, const GradientHandle& grad, double mu, const std::vector<int>& ranks,
                     Backend backend, double round_tol) {
  if (resolve_backend(backend, state.sites()) == Backend::dense)
    return project_fused(grad.step_fused(state, mu), state.sites(), state.local_dim(), ranks);
  return project_mpo(grad.step_tt(state, mu, round_tol), ranks);
}

TTTensor spectral_init(const OutcomeRecord& record, const ProductPOVM& povm, const std::vector<int>& ranks,
                       Backend backend) {
  record.validate_against(povm);
  require(record.distinct() > 0, "spectral init needs a nonempty record");
  const int n = povm.num_sites(), d = povm.local_dim();
  validate_ranks(n, d, ranks);
  const double dim = std::pow(static_cast<double>(d), n);
  const double scale = povm.outcome_count() * (dim + 1.0) / dim;
  const auto terms = empirical_terms(record, scale);
  if (resolve_backend(backend, n) == Backend::dense) return project_fused(product_terms_fused(povm, terms), n, d, ranks);
  return project_mpo(product_terms_tt(povm, terms, 1e-12), ranks);
}

TTTensor random_init(const std::vector<int>& ranks, int n, int d, std::uint64_t seed) {
  require(d == 2, "random initialization is defined for qubits (d = 2)");
  validate_ranks(n, d, ranks);
  const int rbar = ranks.empty() ? 1 : *std::max_element(ranks.begin(), ranks.end());
  const int kappa = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(rbar)) - 1e-12));
  MPDOGenConfig cfg;
  cfg.n = n;
  cfg.kappa = std::max(1, kappa);
  cfg.seed = seed;
  TTTensor state = random_mpdo(cfg);
  const auto have = state.bond_ranks();
  for (size_t l = 0; l < have.size(); ++l)
    if (have[l] > ranks[l]) return project_mpo(state, ranks);
  return state;
}

namespace {

struct RunLog {
  Clock::time_point start = Clock::now();
  std::vector<double> losses;
  std::vector<IterateLog> entries;
  bool record = true;

  void push(int iter, double loss_value, double error, double step) {
    check_finite(loss_value, iter);
    losses.push_back(loss_value);
    if (record) entries.push_back({iter, loss_value, error, step, elapsed_ms(start)});
  }
};

double error_vs(const std::optional<TTTensor>& truth, const TTTensor& state) {
  return truth ? recovery_error(state, *truth) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

Estimate pgd(const OutcomeRecord& record, const ProductPOVM& povm, const EstimatorConfig& config,
             const std::optional<TTTensor>& truth) {
  povm.validate();
  record.validate_against(povm);
  const int n = povm.num_sites(), d = povm.local_dim();
  config.validate(n, d);
  const Backend backend = resolve_backend(config.backend, n);
  require(backend == Backend::tt || n <= kMaxDenseSites, "dense backend exceeds the materialization cap");

  Estimate est;
  est.backend = backend;
  TTTensor rho = initial_state(record, povm, config, backend);
  est.initial_error = error_vs(truth, rho);

  auto pre = std::make_shared<PrecomputedTerm>();
  const auto data_terms = empirical_terms(record, -1.0);
  if (backend == Backend::dense)
    pre->fused = product_terms_fused(povm, data_terms);
  else
    pre->tt = product_terms_tt(povm, data_terms, config.tt_round_tol);
  const double phat_sq = sum_sq_empirical(record);

  // loss = <rho, Phi rho> + 2 Re <pre, rho> + sum p_hat^2, with pre = -sum p_hat A.
  auto current_loss = [&](const TTTensor& state, const TTTensor& channel) {
    double quad, cross;
    if (backend == Backend::dense) {
      const CVector v = tt_to_fused(state);
      quad = v.dot(tt_to_fused(channel)).real();
      cross = pre->fused->dot(v).real();
    } else {
      quad = tt_inner(state, channel).real();
      cross = tt_inner(*pre->tt, state).real();
    }
    return std::max(0.0, quad + 2.0 * cross + phat_sq);
  };

  RunLog log;
  log.record = config.record_trace;
  TTTensor channel = sum_channel(povm, rho);
  log.push(0, current_loss(rho, channel), error_vs(config.record_trace ? truth : std::nullopt, rho), 0.0);
  est.converged_reason = "max_iters";
  for (int tau = 0; tau < config.max_iters; ++tau) {
    const double mu = step_size(config, n, tau);
    const GradientHandle grad(povm, channel, {}, pre);
    rho = project_mpo(rho, grad, mu, config.ranks, backend, config.tt_round_tol);
    channel = sum_channel(povm, rho);
    est.iterations_run = tau + 1;
    log.push(tau + 1, current_loss(rho, channel), error_vs(config.record_trace ? truth : std::nullopt, rho), mu);
    if (plateaued(log.losses, config)) {
      est.converged = true;
      est.converged_reason = "loss_plateau";
      break;
    }
  }
  est.final_loss = log.losses.back();
  est.trace_log = std::move(log.entries);
  est.state = std::move(rho);
  return est;
}

Estimate psgd(const OutcomeRecord& record, const ProductPOVM& povm, const EstimatorConfig& config,
              const std::optional<TTTensor>& truth) {
  povm.validate();
  record.validate_against(povm);
  const int n = povm.num_sites(), d = povm.local_dim();
  config.validate(n, d);
  const Backend backend = resolve_backend(config.backend, n);

  const double k_total = povm.outcome_count();
  const long long nonzero = static_cast<long long>(record.distinct());
  const int rbar = config.max_rank();
  // The default N keeps at least as many zero-count outcomes as observed ones;
  // an explicit N only has to cover the observed ones.
  long long epoch = config.epoch_size > 0 ? config.epoch_size : std::max(40LL * n * rbar * rbar, 2 * nonzero);
  if (static_cast<double>(epoch) > k_total) epoch = static_cast<long long>(k_total);
  require(epoch >= nonzero, "epoch size N must cover every nonzero outcome");
  const long long batch = std::min(config.batch_size, epoch);
  const long long iters_per_epoch = epoch / batch;

  Estimate est;
  est.backend = backend;
  est.epoch_size = epoch;
  est.batch_size = batch;
  TTTensor rho = initial_state(record, povm, config, backend);
  est.initial_error = error_vs(truth, rho);

  const auto observed = nonzero_outcomes(record);
  const std::set<Outcome> observed_set(observed.begin(), observed.end());
  const double m = static_cast<double>(record.shots());

  RunLog log;
  log.record = config.record_trace;
  log.push(0, loss(rho, record, povm), error_vs(config.record_trace ? truth : std::nullopt, rho), 0.0);
  est.converged_reason = "max_epochs";
  for (int e = 0; e < config.max_epochs; ++e) {
    // Epoch subset: every observed outcome plus seeded zero-count filler.
    std::vector<Outcome> subset = observed;
    const long long filler = epoch - nonzero;
    if (filler > 0) {
      if (static_cast<double>(epoch) >= k_total) {
        for (long long f = 0; f < static_cast<long long>(k_total); ++f) {
          Outcome o = povm.outcome_at(f);
          if (!observed_set.count(o)) subset.push_back(std::move(o));
        }
      } else {
        CounterStream rng(config.batch_seed, derive_stream(static_cast<std::uint64_t>(e), "filler"));
        std::set<Outcome> chosen;
        while (static_cast<long long>(chosen.size()) < filler) {
          Outcome o(n);
          for (int l = 0; l < n; ++l) o[l] = static_cast<int>(rng.below(povm.sites[l].size()));
          if (!observed_set.count(o)) chosen.insert(std::move(o));
        }
        subset.insert(subset.end(), chosen.begin(), chosen.end());
      }
    }
    CounterStream order(config.batch_seed, derive_stream(static_cast<std::uint64_t>(e), "order"));
    for (size_t i = subset.size(); i > 1; --i) std::swap(subset[i - 1], subset[order.below(i)]);

    const double mu = step_size(config, n, e);
    for (long long it = 0; it < iters_per_epoch; ++it) {
      const OutcomeContractor oc(povm, rho);
      std::vector<WeightedOutcome> terms;
      terms.reserve(static_cast<size_t>(batch));
      for (long long b = it * batch; b < (it + 1) * batch; ++b) {
        const Outcome& o = subset[static_cast<size_t>(b)];
        const auto hit = record.counts().find(o);
        const double phat = hit == record.counts().end() ? 0.0 : hit->second / m;
        terms.push_back({o, oc.probability(o).real() - phat});
      }
      const GradientHandle grad(povm, std::nullopt, std::move(terms));
      rho = project_mpo(rho, grad, mu, config.ranks, backend, config.tt_round_tol);
    }
    est.iterations_run = e + 1;
    log.push(e + 1, loss(rho, record, povm), error_vs(config.record_trace ? truth : std::nullopt, rho), mu);
    if (plateaued(log.losses, config)) {
      est.converged = true;
      est.converged_reason = "loss_plateau";
      break;
    }
  }
  est.final_loss = log.losses.back();
  est.trace_log = std::move(log.entries);
  est.state = std::move(rho);
  return est;
}

RVector project_to_simplex(const RVector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0, theta = 0;
  for (size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0) theta = t;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

DenseOperator psd_project(const DenseOperator& state) {
  const double scale = std::max(1.0, state.matrix.cwiseAbs().maxCoeff());
  if ((state.matrix - state.matrix.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw InputError("psd_project: input is not Hermitian");
  const CMatrix herm = 0.5 * (state.matrix + state.matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(herm);
  const RVector lam = project_to_simplex(eig.eigenvalues());
  const CMatrix& vecs = eig.eigenvectors();
  return DenseOperator(state.sites, state.local_dim, vecs * lam.cast<Complex>().asDiagonal() * vecs.adjoint());
}

double recovery_error(const TTTensor& a, const TTTensor& b) {
  require(a.sites() == b.sites() && a.local_dim() == b.local_dim(), "recovery_error shape mismatch");
  return tt_distance(a, b);
}

StepWindow local_convergence_window(double k, int n, int d, double sigma_min, double init_error, double delta) {
  require(sigma_min > 0, "smallest TT singular value must be positive");
  const double dn = std::pow(static_cast<double>(d), n);
  StepWindow w;
  w.init_radius = sigma_min * (d - 1) * (1 - delta) * (1 - delta) /
                  (600.0 * n * (1 + delta * delta + (4.0 * d - 2.0) * delta));
  const double c = 600.0 * n / sigma_min * init_error;
  w.lower = c / (1 + c) * k * (dn + 1) / (dn * (1 - delta));
  w.upper = (d - 1) * (dn + 1) * (1 - delta) * k / ((1 + delta) * (1 + delta) * dn * d);
  w.rate = (1 + c) * (1 - dn * (1 - delta) * w.upper / (k * (dn + 1)));
  w.nonempty = w.lower < w.upper && init_error < w.init_radius;
  return w;
}

}  // namespace qst
