#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qst/estimator.hpp"
#include "qst/statesim.hpp"

using namespace qst;

namespace {

ProductPOVM sic(int n) { return ProductPOVM::uniform(sic_qubit(), n); }

TTTensor mpdo(int n, int kappa, std::uint64_t seed) {
  MPDOGenConfig cfg;
  cfg.n = n;
  cfg.kappa = kappa;
  cfg.seed = seed;
  return random_mpdo(cfg);
}

// SIC probabilities of |0> are (1/2, 1/6, 1/6, 1/6), so |0..0> has an exact
// integer record with M = 6^n.
OutcomeRecord exact_zero_record(int n) {
  std::map<Outcome, long long> counts;
  const ProductPOVM povm = sic(n);
  for (long long f = 0; f < ipow(4, n); ++f) {
    const Outcome o = povm.outcome_at(f);
    long long c = 1;
    for (int i : o) c *= i == 0 ? 3 : 1;
    counts[o] = c;
  }
  return make_record(std::move(counts));
}

// Counts proportional to the probabilities with 2^40 total resolution.
OutcomeRecord fine_record(const ProductPOVM& povm, const TTTensor& rho) {
  const RVector p = all_outcome_probabilities(povm, rho);
  std::map<Outcome, long long> counts;
  for (long long f = 0; f < p.size(); ++f) {
    const long long c = std::llround(p(f) * 1099511627776.0);
    if (c > 0) counts[povm.outcome_at(f)] = c;
  }
  return make_record(std::move(counts));
}

EstimatorConfig base_config(int n, int rank) {
  EstimatorConfig c;
  c.ranks = uniform_ranks(n, 2, rank);
  return c;
}

CMatrix dense(const TTTensor& t) { return tt_to_dense(t).matrix; }

}  // namespace

TEST(Loss, ZeroForExactRecord) {
  for (int n = 1; n <= 3; ++n) {
    const TTTensor rho = pure_product(std::string(n, '0'));
    EXPECT_NEAR(loss(rho, exact_zero_record(n), sic(n)), 0.0, 1e-12);
    EXPECT_NEAR(loss_dense(tt_to_dense(rho), exact_zero_record(n), sic(n)), 0.0, 1e-12);
  }
}

TEST(Loss, TTMatchesDense) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const TTTensor rho = mpdo(2, 2, seed);
    const OutcomeRecord rec = sample_enumerate(sic(2), mpdo(2, 2, seed + 100), 500, seed);
    const double a = loss(rho, rec, sic(2));
    EXPECT_NEAR(a, loss_dense(tt_to_dense(rho), rec, sic(2)), 1e-10);
    EXPECT_GE(a, 0.0);
    // Direct sum over all K outcomes.
    const RVector p = measure_map_dense(sic(2), tt_to_dense(rho));
    double ref = 0;
    for (long long f = 0; f < 16; ++f) {
      const double r = p(f) - empirical_probability(rec, sic(2).outcome_at(f));
      ref += r * r;
    }
    EXPECT_NEAR(a, ref, 1e-12);
  }
}

TEST(Loss, ShapeMismatch) {
  EXPECT_THROW(loss(maximally_mixed(2), exact_zero_record(3), sic(2)), InputError);
}

TEST(Gradient, ZeroAtExactRecord) {
  const TTTensor rho = pure_product("000");
  EXPECT_LE(wirtinger_gradient(rho, exact_zero_record(3), sic(3)).to_dense().matrix.norm(), 1e-10);
  std::map<Outcome, long long> uniform;
  for (long long f = 0; f < 64; ++f) uniform[sic(3).outcome_at(f)] = 1;
  const GradientHandle g = wirtinger_gradient(maximally_mixed(3), make_record(uniform), sic(3));
  EXPECT_LE(g.to_dense().matrix.norm(), 1e-10);
  EXPECT_LE(tt_norm(g.to_tt()), 1e-10);
}

TEST(Gradient, MatchesExplicitSum) {
  const TTTensor rho = mpdo(2, 2, 3);
  const OutcomeRecord rec = sample_enumerate(sic(2), rho, 200, 4);
  const GradientHandle g = wirtinger_gradient(rho, rec, sic(2));
  const CMatrix d = dense(rho);
  CMatrix ref = CMatrix::Zero(4, 4);
  for (const auto& k : oracle::all_outcomes(2, 4)) {
    const CMatrix a = oracle::product_element(sic(2), k);
    ref += (oracle::inner_re(a, d) - empirical_probability(rec, k)) * a;
  }
  EXPECT_LE((g.to_dense().matrix - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((dense(g.to_tt()) - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((fused_to_dense(g.to_fused(), 2, 2).matrix - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gradient, FiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 3; ++n) {
    const TTTensor rho = mpdo(n, 2, 10 + n);
    const OutcomeRecord rec = sample_enumerate(sic(n), rho, 300, 6);
    const CMatrix g = wirtinger_gradient(rho, rec, sic(n)).to_dense().matrix;
    const CMatrix d = dense(rho);
    const double h = 1e-5;
    for (int t = 0; t < 20; ++t) {
      const CMatrix dir = oracle::random_hermitian(d.rows(), rng);
      const double up = loss_dense(DenseOperator(n, 2, d + h * dir), rec, sic(n));
      const double dn = loss_dense(DenseOperator(n, 2, d - h * dir), rec, sic(n));
      const double fd = (up - dn) / (2 * h);
      const double an = 2.0 * oracle::inner_re(dir, g);
      EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an)));
    }
  }
}

TEST(ProductTerms, TTMatchesFused) {
  std::vector<WeightedOutcome> terms;
  std::mt19937_64 rng(7);
  for (int i = 0; i < 150; ++i)
    terms.push_back({Outcome{static_cast<int>(rng() % 4), static_cast<int>(rng() % 4), static_cast<int>(rng() % 4)},
                     std::uniform_real_distribution<double>(-1, 1)(rng)});
  const TTTensor t = product_terms_tt(sic(3), terms, 1e-13);
  const CVector f = product_terms_fused(sic(3), terms);
  CMatrix ref = CMatrix::Zero(8, 8);
  for (const auto& w : terms) ref += w.weight * oracle::product_element(sic(3), w.outcome);
  EXPECT_LE((dense(t) - ref).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((fused_to_dense(f, 3, 2).matrix - ref).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, FixedPointAndScaling) {
  const TTTensor star = mpdo(3, 2, 8);
  EXPECT_LE(recovery_error(project_mpo(star, {4, 4}), star), 1e-10);
  EXPECT_LE(recovery_error(project_mpo(tt_scale(star, 2.0), {4, 4}), star), 1e-10);
  EXPECT_LE(recovery_error(project_mpo(tt_to_dense(star), {4, 4}), star), 1e-10);
}

TEST(Projection, SmallPerturbation) {
  std::mt19937_64 rng(9);
  const std::vector<int> ranks{4, 4, 4};
  for (int t = 0; t < 20; ++t) {
    const TTTensor star = mpdo(4, 2, 200 + t);
    const double sigma = smallest_tt_singular_value(star, ranks);
    CMatrix e = oracle::random_hermitian(16, rng);
    e -= (e.trace().real() / 16.0) * CMatrix::Identity(16, 16);  // keep the trace at 1
    const double en = sigma / (500.0 * 4) * 0.5;
    e *= en / e.norm();
    const TTTensor out = project_mpo(DenseOperator(4, 2, dense(star) + e), ranks);
    const double err = (dense(out) - dense(star)).norm();
    EXPECT_LE(err * err, en * en + 600.0 * 4 * en * en * en / sigma + 1e-20);
  }
}

TEST(Projection, DegenerateTrace) {
  CMatrix z = CMatrix::Zero(4, 4);
  z(0, 0) = 1.0;
  z(1, 1) = -1.0;
  EXPECT_THROW(project_mpo(DenseOperator(2, 2, z), {2}), NumericalError);
}

TEST(Projection, StepHandleBackendsAgree) {
  const TTTensor rho = mpdo(3, 2, 11);
  const OutcomeRecord rec = sample_enumerate(sic(3), mpdo(3, 2, 12), 400, 1);
  const GradientHandle g = wirtinger_gradient(rho, rec, sic(3));
  const TTTensor a = project_mpo(rho, g, 0.7, {4, 4}, Backend::dense);
  const TTTensor b = project_mpo(rho, g, 0.7, {4, 4}, Backend::tt);
  EXPECT_LE(recovery_error(a, b), 1e-10);
  EXPECT_NEAR(tt_trace(a).real(), 1.0, 1e-12);
  EXPECT_TRUE(is_hermitian(a, 1e-10));
}

TEST(PGD, NoiselessFixedPoint) {
  const TTTensor truth = pure_product("000");
  EstimatorConfig c = base_config(3, 1);
  c.init = InitMode::provided;
  c.provided_init = truth;
  c.max_iters = 10;
  const Estimate e = pgd(exact_zero_record(3), sic(3), c, truth);
  EXPECT_LE(recovery_error(e.state, truth), 1e-10);
  for (const auto& it : e.trace_log) EXPECT_LE(it.error, 1e-10);

  const TTTensor mixed = mpdo(3, 2, 13);
  EstimatorConfig c4 = base_config(3, 4);
  c4.init = InitMode::provided;
  c4.provided_init = mixed;
  c4.max_iters = 10;
  EXPECT_LE(recovery_error(pgd(fine_record(sic(3), mixed), sic(3), c4).state, mixed), 1e-10);
}

TEST(PGD, RecoversRankOneState) {
  const TTTensor truth = mpdo(3, 1, 14);
  const OutcomeRecord rec = sample_enumerate(sic(3), truth, 100000, 15);
  EstimatorConfig c = base_config(3, 1);
  apply_schedule(c, SchedulePreset::random_r1);
  c.init = InitMode::random;
  c.init_seed = 16;
  const Estimate e = pgd(rec, sic(3), c, truth);
  EXPECT_LT(recovery_error(e.state, truth), 0.1 * e.initial_error);
  // Smoothed loss (window 5) does not increase beyond rounding.
  std::vector<double> l;
  for (const auto& it : e.trace_log) l.push_back(it.loss);
  for (size_t i = 5; i + 1 <= l.size() - 4; ++i) {
    double a = 0, b = 0;
    for (size_t j = 0; j < 5; ++j) {
      a += l[i - 1 + j];
      b += l[i + j];
    }
    EXPECT_LE(b, a * (1 + 1e-9) + 1e-15);
  }
}

TEST(PGD, InvariantsAtEveryIterate) {
  const TTTensor truth = mpdo(3, 2, 17);
  const OutcomeRecord rec = sample_enumerate(sic(3), truth, 2000, 18);
  EstimatorConfig c = base_config(3, 4);
  apply_schedule(c, SchedulePreset::random_r4);
  c.plateau_tol = 0;
  for (int iters = 0; iters <= 8; ++iters) {
    c.max_iters = iters;
    const Estimate e = pgd(rec, sic(3), c);
    EXPECT_NEAR(std::abs(tt_trace(e.state) - 1.0), 0.0, 1e-10);
    EXPECT_TRUE(is_hermitian(e.state, 1e-8));
    EXPECT_EQ(e.iterations_run, iters);
    EXPECT_EQ(e.trace_log.size(), static_cast<size_t>(iters + 1));
  }
}

TEST(PGD, BackendsProduceSameIterates) {
  for (int n = 2; n <= 3; ++n) {
    const TTTensor truth = mpdo(n, 2, 19 + n);
    const OutcomeRecord rec = sample_enumerate(sic(n), truth, 3000, 20);
    EstimatorConfig c = base_config(n, 4);
    apply_schedule(c, SchedulePreset::random_r4);
    c.max_iters = 20;
    c.plateau_tol = 0;
    c.backend = Backend::dense;
    const Estimate a = pgd(rec, sic(n), c, truth);
    c.backend = Backend::tt;
    const Estimate b = pgd(rec, sic(n), c, truth);
    EXPECT_LE(recovery_error(a.state, b.state), 1e-8);
    ASSERT_EQ(a.trace_log.size(), b.trace_log.size());
    for (size_t i = 0; i < a.trace_log.size(); ++i) EXPECT_NEAR(a.trace_log[i].error, b.trace_log[i].error, 1e-8);
  }
}

TEST(PGD, PlateauStopsEarly) {
  const TTTensor truth = pure_product("00");
  EstimatorConfig c = base_config(2, 1);
  c.init = InitMode::provided;
  c.provided_init = truth;
  c.max_iters = 200;
  c.plateau_tol = 1e-10;
  const Estimate e = pgd(exact_zero_record(2), sic(2), c);
  EXPECT_TRUE(e.converged);
  EXPECT_EQ(e.converged_reason, "loss_plateau");
  EXPECT_LT(e.iterations_run, 200);
}

TEST(PGD, DivergenceIsReported) {
  const TTTensor truth = mpdo(2, 1, 21);
  EstimatorConfig c = base_config(2, 1);
  c.mu0 = 1e200;
  c.lambda = 1.0;
  c.max_iters = 50;
  EXPECT_THROW(pgd(sample_enumerate(sic(2), truth, 100, 1), sic(2), c), NumericalError);
}

TEST(PSGD, FullBatchEqualsPGD) {
  const TTTensor truth = mpdo(2, 2, 22);
  const OutcomeRecord rec = sample_enumerate(sic(2), truth, 1000, 23);
  EstimatorConfig c = base_config(2, 4);
  apply_schedule(c, SchedulePreset::random_r4);
  c.plateau_tol = 0;
  c.max_iters = 6;
  c.max_epochs = 6;
  c.epoch_size = 16;
  c.batch_size = 16;
  const Estimate a = pgd(rec, sic(2), c, truth);
  const Estimate b = psgd(rec, sic(2), c, truth);
  EXPECT_LE(recovery_error(a.state, b.state), 1e-10);
  for (size_t i = 0; i < a.trace_log.size(); ++i) EXPECT_NEAR(a.trace_log[i].error, b.trace_log[i].error, 1e-10);
}

TEST(PSGD, DefaultEpochMetadata) {
  const TTTensor truth = mpdo(6, 2, 24);
  const OutcomeRecord rec = sample_sequential(sic(6), truth, 500, 25);
  EstimatorConfig c = base_config(6, 4);
  c.max_epochs = 1;
  const Estimate e = psgd(rec, sic(6), c);
  EXPECT_EQ(e.epoch_size, 640 * 6);
  EXPECT_EQ(e.batch_size, 32);
  c.epoch_size = 100;
  c.batch_size = 64;
  EXPECT_THROW(psgd(rec, sic(6), c), InputError);
  // The default N grows to cover every observed outcome.
  const OutcomeRecord many = sample_sequential(sic(6), truth, 20000, 26);
  EstimatorConfig r1 = base_config(6, 1);
  r1.max_epochs = 1;
  const Estimate big = psgd(many, sic(6), r1);
  EXPECT_EQ(big.epoch_size, std::min<long long>(4096, std::max<long long>(240, 2 * many.distinct())));
}

TEST(PSGD, ComparableToPGD) {
  const TTTensor truth = mpdo(5, 1, 26);
  const OutcomeRecord rec = sample_enumerate(sic(5), truth, 3000, 27);
  EstimatorConfig c = base_config(5, 1);
  apply_schedule(c, SchedulePreset::random_r1);
  c.init_seed = 28;
  const double e_pgd = recovery_error(pgd(rec, sic(5), c).state, truth);
  const double e_psgd = recovery_error(psgd(rec, sic(5), c).state, truth);
  EXPECT_LE(e_psgd, 2.0 * e_pgd);
}

TEST(SpectralInit, SingleQubitDualIdentity) {
  const OutcomeRecord rec = exact_zero_record(1);
  std::vector<WeightedOutcome> terms;
  for (const auto& [k, c] : rec.counts()) terms.push_back({k, 6.0 * c / rec.shots()});
  const CMatrix raw = fused_to_dense(product_terms_fused(sic(1), terms), 1, 2).matrix;
  const CMatrix rho = dense(pure_product("0"));
  EXPECT_LE((raw - (rho + CMatrix::Identity(2, 2))).cwiseAbs().maxCoeff(), 1e-14);
  const TTTensor init = spectral_init(rec, sic(1), {});
  EXPECT_LE((dense(init) - (rho + CMatrix::Identity(2, 2)) / 3.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SpectralInit, MaximallyMixedTruth) {
  const OutcomeRecord rec = sample_enumerate(sic(2), maximally_mixed(2), 100000, 29);
  for (Backend b : {Backend::dense, Backend::tt}) {
    const TTTensor init = spectral_init(rec, sic(2), {1}, b);
    EXPECT_LE(recovery_error(init, maximally_mixed(2)), 0.05);
    EXPECT_LE(init.max_rank(), 1);
  }
}

TEST(SpectralInit, RankCap) {
  const OutcomeRecord rec = sample_enumerate(sic(4), mpdo(4, 2, 30), 5000, 31);
  const TTTensor a = spectral_init(rec, sic(4), {2, 3, 2}, Backend::dense);
  const TTTensor b = spectral_init(rec, sic(4), {2, 3, 2}, Backend::tt);
  for (const auto* t : {&a, &b}) {
    const auto r = t->bond_ranks();
    EXPECT_LE(r[0], 2);
    EXPECT_LE(r[1], 3);
    EXPECT_LE(r[2], 2);
  }
  EXPECT_LE(recovery_error(a, b), 1e-8);
  EXPECT_THROW(spectral_init(make_record({{Outcome{0}, 1}}), sic(4), {1, 1, 1}), InputError);
}

TEST(RandomInit, Properties) {
  int differ = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const TTTensor a = random_init({4, 4}, 3, 2, s);
    EXPECT_NEAR(std::abs(tt_trace(a) - 1.0), 0.0, 1e-10);
    EXPECT_TRUE(is_hermitian(a, 1e-10));
    const TTTensor b = random_init({4, 4}, 3, 2, s + 1000);
    if (recovery_error(a, b) > 0.01) ++differ;
  }
  EXPECT_EQ(differ, 20);
  EXPECT_EQ(random_init({2, 2}, 3, 2, 1).max_rank(), 2);
  const TTTensor x = random_init({1, 1}, 3, 2, 5), y = random_init({1, 1}, 3, 2, 5);
  for (int l = 0; l < 3; ++l) EXPECT_EQ(x.core(l), y.core(l));
}

TEST(PsdProject, Examples) {
  const TTTensor rho = mpdo(2, 2, 32);
  const DenseOperator d = tt_to_dense(rho);
  EXPECT_LE((psd_project(d).matrix - d.matrix).cwiseAbs().maxCoeff(), 1e-10);

  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 0) = 1.2;
  m(1, 1) = -0.2;
  CMatrix expect = CMatrix::Zero(2, 2);
  expect(0, 0) = 1.0;
  EXPECT_LE((psd_project(DenseOperator(1, 2, m)).matrix - expect).cwiseAbs().maxCoeff(), 1e-14);

  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW(psd_project(DenseOperator(1, 2, bad)), InputError);
}

TEST(PsdProject, NonExpansive) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 100; ++t) {
    const CMatrix star = oracle::random_density(4, rng);
    CMatrix est = oracle::random_hermitian(4, rng) * 0.3 + star;
    est /= est.trace().real();
    const CMatrix p = psd_project(DenseOperator(2, 2, est)).matrix;
    EXPECT_LE((p - star).norm(), (est - star).norm() + 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<CMatrix>(p).eigenvalues().minCoeff(), -1e-12);
    EXPECT_NEAR(p.trace().real(), 1.0, 1e-12);
  }
}

TEST(Simplex, Projection) {
  RVector v(2);
  v << 1.2, -0.2;
  EXPECT_LE((project_to_simplex(v) - RVector::Unit(2, 0)).norm(), 1e-15);
  RVector w(3);
  w << 0.5, 0.5, 0.5;
  EXPECT_LE((project_to_simplex(w) - RVector::Constant(3, 1.0 / 3)).norm(), 1e-15);
  RVector x(3);
  x << 0.2, 0.3, 0.5;
  EXPECT_LE((project_to_simplex(x) - x).norm(), 1e-15);
}

TEST(RecoveryError, Examples) {
  const TTTensor a = mpdo(3, 2, 34), b = mpdo(3, 2, 35), c = mpdo(3, 2, 36);
  EXPECT_LE(recovery_error(a, a), 1e-12);
  EXPECT_NEAR(recovery_error(a, b), (dense(a) - dense(b)).norm(), 1e-10);
  EXPECT_LE(recovery_error(a, c), recovery_error(a, b) + recovery_error(b, c) + 1e-12);
  EXPECT_THROW(recovery_error(a, mpdo(2, 2, 1)), InputError);
}

TEST(Schedule, Presets) {
  EstimatorConfig c;
  const std::vector<std::pair<SchedulePreset, double>> expect{
      {SchedulePreset::random_r1, 1.25},      {SchedulePreset::random_r4, 0.625},
      {SchedulePreset::spectral_r1, 0.625},   {SchedulePreset::spectral_r4, 0.3125},
      {SchedulePreset::fixed_random, 5.0 / 32}, {SchedulePreset::fixed_spectral, 1.0 / 16}};
  for (const auto& [p, mu] : expect) {
    apply_schedule(c, p);
    EXPECT_EQ(c.mu0, mu);
    EXPECT_TRUE(c.scale_2n);
  }
  apply_schedule(c, SchedulePreset::random_r1);
  EXPECT_EQ(c.lambda, 0.9);
  apply_schedule(c, SchedulePreset::fixed_spectral);
  EXPECT_EQ(c.lambda, 1.0);
  EXPECT_EQ(default_preset(InitMode::random, 1, false), SchedulePreset::random_r1);
  EXPECT_EQ(default_preset(InitMode::spectral, 4, false), SchedulePreset::spectral_r4);
  EXPECT_EQ(default_preset(InitMode::spectral, 1, true), SchedulePreset::fixed_spectral);
  EXPECT_EQ(resolve_backend(Backend::automatic, kAutoDenseSites), Backend::dense);
  EXPECT_EQ(resolve_backend(Backend::automatic, kAutoDenseSites + 1), Backend::tt);
}

TEST(Schedule, LoggedSteps) {
  const TTTensor truth = mpdo(2, 1, 37);
  EstimatorConfig c = base_config(2, 1);
  apply_schedule(c, SchedulePreset::random_r1);
  c.max_iters = 4;
  c.plateau_tol = 0;
  const Estimate e = pgd(sample_enumerate(sic(2), truth, 500, 1), sic(2), c);
  for (int t = 1; t <= 4; ++t) EXPECT_NEAR(e.trace_log[t].step, 1.25 * 4 * std::pow(0.9, t - 1), 1e-14);
}

TEST(Config, Validation) {
  EstimatorConfig c = base_config(3, 2);
  EXPECT_NO_THROW(c.validate(3, 2));
  c.lambda = 0;
  EXPECT_THROW(c.validate(3, 2), InputError);
  c = base_config(3, 2);
  c.lambda = 1.5;
  EXPECT_THROW(c.validate(3, 2), InputError);
  c = base_config(3, 2);
  c.ranks = {5, 2};
  EXPECT_THROW(c.validate(3, 2), InputError);
  c = base_config(3, 2);
  c.epoch_size = 10;
  c.batch_size = 20;
  EXPECT_THROW(c.validate(3, 2), InputError);
}

TEST(StepWindow, Diagnostic) {
  const StepWindow w = local_convergence_window(256, 4, 2, 1e-3, 1e-12, 0.0);
  EXPECT_GT(w.upper, 0.0);
  EXPECT_LT(w.lower, w.upper);
  EXPECT_TRUE(w.nonempty);
  EXPECT_LT(w.rate, 1.0);
  const StepWindow far = local_convergence_window(256, 4, 2, 1e-3, 0.5, 0.0);
  EXPECT_FALSE(far.nonempty);
  EXPECT_THROW(local_convergence_window(256, 4, 2, 0.0, 0.1, 0.0), InputError);
}
