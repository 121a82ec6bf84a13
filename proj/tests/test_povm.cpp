#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qst/povm.hpp"
#include "qst/statesim.hpp"

using namespace qst;

namespace {

const ProductPOVM& sic_product(int n) {
  static std::map<int, ProductPOVM> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, ProductPOVM::uniform(sic_qubit(), n)).first;
  return it->second;
}

TTTensor mpdo(int n, int kappa, std::uint64_t seed) {
  MPDOGenConfig cfg;
  cfg.n = n;
  cfg.kappa = kappa;
  cfg.seed = seed;
  return random_mpdo(cfg);
}

// Vectors w_k with B_k = (1/2) w_k w_k^†.
std::vector<CVector> sic_vectors() {
  std::vector<CVector> out;
  for (const auto& b : sic_qubit().elements) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(2.0 * b);
    out.push_back(es.eigenvectors().col(1));
  }
  return out;
}

}  // namespace

TEST(SicQubit, Elements) {
  const LocalPOVM sic = sic_qubit();
  ASSERT_EQ(sic.size(), 4);
  CMatrix b1(2, 2);
  b1 << 0.5, 0.0, 0.0, 0.0;
  EXPECT_LE((sic.elements[0] - b1).cwiseAbs().maxCoeff(), 1e-15);
  CMatrix sum = CMatrix::Zero(2, 2);
  for (const auto& b : sic.elements) sum += b;
  EXPECT_LE((sum - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(oracle::inner_re(sic.elements[0], sic.elements[1]), 1.0 / 12, 1e-15);
  EXPECT_NEAR(oracle::inner_re(sic.elements[1], sic.elements[1]), 0.25, 1e-15);
  for (int i = 1; i < 4; ++i) {
    EXPECT_NEAR(std::abs(sic.elements[i](0, 1)), std::sqrt(2.0) / 6, 1e-15);
    EXPECT_NEAR(sic.elements[i](0, 0).real(), 1.0 / 6, 1e-15);
  }
  EXPECT_TRUE(check_povm(sic));
}

TEST(SicQubit, FusedLayout) {
  const LocalPOVM sic = sic_qubit();
  for (int i = 0; i < 4; ++i) {
    const CVector f = sic.fused(i);
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) EXPECT_EQ(f(r + 2 * c), sic.elements[i](r, c));
    EXPECT_EQ((sic.fused_matrix().col(i) - f).norm(), 0.0);
  }
}

TEST(CheckPovm, RejectsBrokenSets) {
  LocalPOVM scaled = sic_qubit();
  for (auto& b : scaled.elements) b *= 0.9;
  EXPECT_FALSE(check_povm(scaled));
  LocalPOVM negated = sic_qubit();
  negated.elements[2] *= -1.0;
  EXPECT_FALSE(check_povm(negated));
  EXPECT_TRUE(check_povm(to_dense_povm(sic_product(2))));
}

TEST(CheckSic, QubitSicPasses) {
  const SicReport r = check_sic(to_dense_povm(sic_qubit()));
  EXPECT_TRUE(r.count_ok);
  EXPECT_LE(r.trace_dev, 1e-12);
  EXPECT_LE(r.self_dev, 1e-12);
  EXPECT_LE(r.cross_dev, 1e-12);
}

TEST(CheckSic, ProductIsNotSic) {
  const DensePOVM two = to_dense_povm(sic_product(2));
  EXPECT_EQ(two.size(), 16);
  // Cross products take the values 1/48 and 1/144 against the target 1/80.
  EXPECT_NEAR(check_sic(two).cross_dev, 1.0 / 48 - 1.0 / 80, 1e-15);
  EXPECT_FALSE(check_sic(two).passes(1e-3));
}

TEST(CheckSic, WrongCountFlagged) {
  DensePOVM basis;
  basis.dim = 2;
  basis.elements = {CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)};
  basis.elements[0](0, 0) = 1.0;
  basis.elements[1](1, 1) = 1.0;
  const SicReport r = check_sic(basis);
  EXPECT_FALSE(r.count_ok);
  EXPECT_FALSE(r.passes(1e-6));
}

TEST(WeylHeisenberg, QubitFiducial) {
  CVector f(2);
  f << std::sqrt((3 + std::sqrt(3.0)) / 6), std::polar(std::sqrt((3 - std::sqrt(3.0)) / 6), M_PI / 4);
  const DensePOVM p = wh_sic_from_fiducial(2, f);
  EXPECT_TRUE(check_sic(p).passes(1e-10));
  EXPECT_TRUE(check_povm(p));
}

TEST(WeylHeisenberg, DegenerateFiducial) {
  CVector f(2);
  f << 1.0, 0.0;
  const DensePOVM p = wh_sic_from_fiducial(2, f);
  EXPECT_GT(check_sic(p).cross_dev, 1e-3);
  CMatrix sum = CMatrix::Zero(2, 2);
  for (const auto& a : p.elements) sum += a;
  EXPECT_LE((sum - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(WeylHeisenberg, BundledQutrit) {
  const auto f = bundled_fiducial(3);
  ASSERT_TRUE(f.has_value());
  EXPECT_TRUE(check_sic(wh_sic_from_fiducial(3, *f)).passes(1e-10));
  CVector bad(2);
  bad << 1.0, 1.0;
  EXPECT_THROW(wh_sic_from_fiducial(2, bad), InputError);
}

TEST(DualBasis, QubitSic) {
  const DensePOVM p = to_dense_povm(sic_qubit());
  const auto dual = dual_basis_sic(p);
  ASSERT_EQ(dual.size(), 4u);
  for (int k = 0; k < 4; ++k) {
    EXPECT_LE((dual[k] - (6.0 * p.elements[k] - CMatrix::Identity(2, 2))).cwiseAbs().maxCoeff(), 1e-14);
    for (int j = 0; j < 4; ++j)
      EXPECT_NEAR(oracle::inner_re(p.elements[k], dual[j]), k == j ? 1.0 : 0.0, 1e-12);
  }
  std::mt19937_64 rng(1);
  const CMatrix rho = oracle::random_hermitian(2, rng);
  CMatrix rec = CMatrix::Zero(2, 2);
  for (int k = 0; k < 4; ++k) rec += (p.elements[k].adjoint() * rho).trace() * dual[k];
  EXPECT_LE((rec - rho).cwiseAbs().maxCoeff(), 1e-10);

  CMatrix mixed = CMatrix::Zero(2, 2);
  for (int k = 0; k < 4; ++k) mixed += 0.25 * dual[k];
  EXPECT_LE((mixed - CMatrix::Identity(2, 2) / 2.0).cwiseAbs().maxCoeff(), 1e-14);

  EXPECT_THROW(dual_basis_sic(to_dense_povm(sic_product(2))), InputError);
}

TEST(SymProjector, TracesAndIdempotence) {
  EXPECT_NEAR(sym_projector(2, 2).trace().real(), 3.0, 1e-12);
  EXPECT_NEAR(sym_projector(2, 3).trace().real(), 4.0, 1e-12);
  const CMatrix p = sym_projector(4, 2);
  EXPECT_LE((p * p - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((p - p.adjoint()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_NEAR(p.trace().real(), 10.0, 1e-12);
  EXPECT_THROW(sym_projector(100, 4), InputError);
}

TEST(Design, SicIsTwoButNotThreeDesign) {
  const auto w = sic_vectors();
  EXPECT_LE(check_t_design(w, 2).delta_upper, 1e-10);
  EXPECT_GE(check_t_design(w, 3).delta_lower, 0.01);
  EXPECT_LE(check_t_design(w, 1).delta_upper, 1e-12);
  std::vector<CVector> basis{CVector::Unit(2, 0), CVector::Unit(2, 1)};
  EXPECT_LE(check_t_design(basis, 1).delta_upper, 1e-12);
  EXPECT_GT(check_t_design(basis, 2).delta_upper, 0.1);
  std::vector<CVector> non_unit{2.0 * CVector::Unit(2, 0)};
  EXPECT_THROW(check_t_design(non_unit, 2), InputError);
}

TEST(Design, RankOneVectorsMatch) {
  const DensePOVM p = to_dense_povm(sic_product(2));
  ASSERT_TRUE(p.vectors.has_value());
  for (int k = 0; k < p.size(); ++k) {
    const CVector& w = (*p.vectors)[k];
    EXPECT_NEAR(w.norm(), 1.0, 1e-12);
    EXPECT_LE((p.elements[k] - (4.0 / 16.0) * w * w.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(MeasureMap, MaximallyMixedQubit) {
  const RVector p = measure_map_dense(to_dense_povm(sic_qubit()), DenseOperator(1, 2, CMatrix::Identity(2, 2) / 2.0));
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(p(k), 0.25, 1e-15);
}

TEST(MeasureMap, NormIdentityAndDistancePreservation) {
  std::mt19937_64 rng(2);
  const DensePOVM p = to_dense_povm(sic_qubit());
  for (int t = 0; t < 200; ++t) {
    const CMatrix rho = oracle::random_hermitian(2, rng);
    const RVector v = measure_map_dense(p, DenseOperator(1, 2, rho));
    const double tr = rho.trace().real();
    EXPECT_NEAR(v.squaredNorm(), (rho.squaredNorm() + tr * tr) / 6.0, 1e-10);
  }
  for (int t = 0; t < 50; ++t) {
    const CMatrix r1 = oracle::random_density(2, rng), r2 = oracle::random_density(2, rng);
    const RVector diff = measure_map_dense(p, DenseOperator(1, 2, r1)) - measure_map_dense(p, DenseOperator(1, 2, r2));
    EXPECT_NEAR(diff.squaredNorm(), (r1 - r2).squaredNorm() / 6.0, 1e-10);
  }
}

TEST(MeasureMap, ProductStateFactorizes) {
  const DenseOperator zz = tt_to_dense(pure_product("00"));
  const RVector p = measure_map_dense(sic_product(2), zz);
  ASSERT_EQ(p.size(), 16);
  EXPECT_NEAR(p(0), 0.25, 1e-15);
  const RVector single = measure_map_dense(to_dense_povm(sic_qubit()), tt_to_dense(pure_product("0")));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) EXPECT_NEAR(p(4 * a + b), single(a) * single(b), 1e-15);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
}

TEST(MeasureMap, AgreesWithKroneckerOracle) {
  const TTTensor rho = mpdo(3, 2, 3);
  const CMatrix dense = oracle::dense_by_products(rho);
  const RVector p = measure_map_dense(sic_product(3), DenseOperator(3, 2, dense));
  const RVector q = all_outcome_probabilities(sic_product(3), rho);
  const auto outcomes = oracle::all_outcomes(3, 4);
  for (size_t k = 0; k < outcomes.size(); ++k) {
    const double ref = oracle::inner_re(oracle::product_element(sic_product(3), outcomes[k]), dense);
    EXPECT_NEAR(p(k), ref, 1e-12);
    EXPECT_NEAR(q(k), ref, 1e-12);
    EXPECT_GE(p(k), -1e-12);
  }
  EXPECT_NEAR(p.sum(), 1.0, 1e-10);
}

TEST(DesignSandwich, HoldsWithMeasuredDefect) {
  std::mt19937_64 rng(4);
  const auto w = sic_vectors();
  const double delta = check_t_design(w, 2).delta_upper;
  const DensePOVM p = to_dense_povm(sic_qubit());
  const double dim = 2, k = 4;
  for (int t = 0; t < 100; ++t) {
    const CMatrix rho = oracle::random_hermitian(2, rng);
    const double tr = rho.trace().real();
    const double mid = dim * (rho.squaredNorm() + tr * tr) / (k * (dim + 1));
    const double val = measure_map_dense(p, DenseOperator(1, 2, rho)).squaredNorm();
    EXPECT_LE(val, (1 + delta) * mid + 1e-12);
    EXPECT_GE(val, (1 - delta) * mid - 1e-12);
  }
}

TEST(CrossTerm, InnerProductBound) {
  std::mt19937_64 rng(5);
  const DensePOVM p = to_dense_povm(sic_qubit());
  const double delta = check_t_design(sic_vectors(), 2).delta_upper;
  ASSERT_LE(delta, 1e-10);
  for (int t = 0; t < 100; ++t) {
    const CMatrix r1 = oracle::random_density(2, rng) * 3.0, r2 = oracle::random_density(2, rng);
    const double lhs = measure_map_dense(p, DenseOperator(1, 2, r1)).dot(measure_map_dense(p, DenseOperator(1, 2, r2)));
    const double rhs = (1 + delta) * 2.0 * (r1.trace().real() * r2.trace().real() + (r1 * r2).trace().real()) / (4.0 * 3.0);
    EXPECT_LE(lhs, rhs + 1e-9);
  }
}

TEST(ProbOfOutcome, MaximallyMixed) {
  for (int n = 1; n <= 5; ++n) {
    const Outcome k(n, 2);
    EXPECT_NEAR(prob_of_outcome(sic_product(n), maximally_mixed(n), k), std::pow(4.0, -n), 1e-15);
  }
}

TEST(ProbOfOutcome, MatchesDenseAndSumsToTrace) {
  for (int n = 1; n <= 4; ++n) {
    const TTTensor rho = mpdo(n, 2, 10 + n);
    double total = 0;
    const RVector dense = n <= 3 ? measure_map_dense(sic_product(n), tt_to_dense(rho)) : RVector();
    const auto outcomes = oracle::all_outcomes(n, 4);
    for (size_t k = 0; k < outcomes.size(); ++k) {
      const double p = prob_of_outcome(sic_product(n), rho, outcomes[k]);
      if (n <= 3) EXPECT_NEAR(p, dense(k), 1e-10);
      total += p;
    }
    EXPECT_NEAR(total, tt_trace(rho).real(), 1e-8);
  }
}

TEST(ProbOfOutcome, RangeChecks) {
  const TTTensor rho = maximally_mixed(2);
  EXPECT_THROW(prob_of_outcome(sic_product(2), rho, Outcome{0, 4}), InputError);
  EXPECT_THROW(prob_of_outcome(sic_product(2), rho, Outcome{0}), InputError);
  EXPECT_THROW(marginal_prefix_prob(sic_product(2), rho, Outcome{0, 0, 0}), InputError);
  EXPECT_THROW(prob_of_outcome(sic_product(2), rho, Outcome{-1, 0}), InputError);
}

TEST(MarginalPrefix, Examples) {
  const TTTensor rho = mpdo(3, 2, 20);
  EXPECT_NEAR(marginal_prefix_prob(sic_product(3), rho, Outcome{}), 1.0, 1e-12);
  for (int l = 0; l <= 4; ++l)
    EXPECT_NEAR(marginal_prefix_prob(sic_product(4), maximally_mixed(4), Outcome(l, 1)), std::pow(4.0, -l), 1e-15);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0;
      for (int c = 0; c < 4; ++c) s += prob_of_outcome(sic_product(3), rho, Outcome{a, b, c});
      EXPECT_NEAR(marginal_prefix_prob(sic_product(3), rho, Outcome{a, b}), s, 1e-10);
    }
  EXPECT_NEAR(marginal_prefix_prob(sic_product(3), rho, Outcome{1, 2, 3}),
              prob_of_outcome(sic_product(3), rho, Outcome{1, 2, 3}), 1e-15);
}

TEST(ClampProbabilities, Policy) {
  std::vector<double> p{0.5, -5e-11, 0.5};
  EXPECT_EQ(clamp_probabilities(p), 1);
  EXPECT_EQ(p[1], 0.0);
  std::vector<double> bad{0.5, -1e-6};
  EXPECT_THROW(clamp_probabilities(bad), NumericalError);
}

TEST(Gamma, Examples) {
  for (int n = 1; n <= 4; ++n) {
    const GammaReport mm = gamma(sic_product(n), maximally_mixed(n), GammaMethod::exhaustive);
    EXPECT_NEAR(mm.gamma, 1.0, 1e-12);
    EXPECT_TRUE(mm.exact);
    const GammaReport zero = gamma(sic_product(n), pure_product(std::string(n, '0')), GammaMethod::exhaustive);
    EXPECT_NEAR(zero.gamma, std::pow(2.0, n), 1e-12);
    EXPECT_EQ(zero.argmax_outcome, Outcome(n, 0));
  }
}

TEST(Gamma, BeamIsLowerBound) {
  int equal = 0;
  for (int t = 0; t < 50; ++t) {
    const TTTensor rho = mpdo(4, 2, 100 + t);
    const GammaReport ex = gamma(sic_product(4), rho, GammaMethod::exhaustive);
    const GammaReport bm = gamma(sic_product(4), rho, GammaMethod::beam, 16);
    EXPECT_FALSE(bm.exact);
    EXPECT_LE(bm.gamma, ex.gamma + 1e-12);
    const RVector p = all_outcome_probabilities(sic_product(4), rho);
    EXPECT_NEAR(ex.gamma / 256.0, p.maxCoeff(), 1e-15);
    if (std::abs(bm.gamma - ex.gamma) <= 1e-12) ++equal;
  }
  EXPECT_GE(equal, 45);
  EXPECT_THROW(gamma(sic_product(11), maximally_mixed(11), GammaMethod::exhaustive), InputError);
}

TEST(SumChannel, MatchesBruteForce) {
  std::mt19937_64 rng(6);
  const TTTensor rho = oracle::random_tt(2, 2, {3}, rng);
  const TTTensor out = sum_channel(sic_product(2), rho);
  EXPECT_EQ(out.bond_ranks(), rho.bond_ranks());
  const CMatrix dense = oracle::dense_by_products(rho);
  CMatrix ref = CMatrix::Zero(4, 4);
  for (const auto& k : oracle::all_outcomes(2, 4)) {
    const CMatrix a = oracle::product_element(sic_product(2), k);
    ref += (a.adjoint() * dense).trace() * a;
  }
  EXPECT_LE((tt_to_dense(out).matrix - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SumChannel, QuadraticFormIsSquaredMeasurement) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const TTTensor h = oracle::random_hermitian_tt(3, 2, {2, 2}, rng);
    const double quad = tt_inner(h, sum_channel(sic_product(3), h)).real();
    EXPECT_GE(quad, 0.0);
    EXPECT_NEAR(quad, measure_map_dense(sic_product(3), tt_to_dense(h)).squaredNorm(), 1e-10 * (1 + quad));
  }
}

TEST(ProductPovm, FlatIndexRoundTrip) {
  const ProductPOVM& p = sic_product(3);
  EXPECT_EQ(p.outcome_count(), 64.0);
  EXPECT_EQ(p.flat_index(Outcome{1, 0, 3}), 19);
  EXPECT_EQ(p.outcome_at(19), (Outcome{1, 0, 3}));
  for (long long f = 0; f < 64; ++f) EXPECT_EQ(p.flat_index(p.outcome_at(f)), f);
}

TEST(ApplyMode, MatchesExplicitContraction) {
  std::mt19937_64 rng(8);
  const std::vector<int> dims{2, 3, 4};
  const CVector x = oracle::random_matrix(24, 1, rng);
  const CMatrix op = oracle::random_matrix(5, 3, rng);
  const CVector y = apply_mode(x, dims, 1, op);
  ASSERT_EQ(y.size(), 2 * 5 * 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 5; ++b)
      for (int c = 0; c < 4; ++c) {
        Complex s = 0;
        for (int j = 0; j < 3; ++j) s += op(b, j) * x(a + 2 * (j + 3 * c));
        EXPECT_LE(std::abs(y(a + 2 * (b + 5 * c)) - s), 1e-12);
      }
}
