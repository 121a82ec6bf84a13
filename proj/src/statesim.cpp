#include "qst/statesim.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

#include "qst/rng.hpp"

namespace qst {

namespace {

constexpr int kMaxResamples = 5;

int purity_rank_at(const MPDOGenConfig& c, int l) {
  return c.per_site_purity_rank.empty() ? c.purity_rank : c.per_site_purity_rank[l];
}

void validate(const MPDOGenConfig& c) {
  require(c.n >= 1, "MPDO needs n >= 1");
  require(c.kappa >= 1, "MPDO needs kappa >= 1");
  require(c.purity_rank >= 1, "MPDO needs K_l >= 1");
  require(c.per_site_purity_rank.empty() || static_cast<int>(c.per_site_purity_rank.size()) == c.n,
          "per-site K_l override must have n entries");
  for (int k : c.per_site_purity_rank) require(k >= 1, "MPDO needs K_l >= 1");
}

}  // namespace

TTTensor random_mpdo_unnormalized(const MPDOGenConfig& config, std::uint64_t draw) {
  validate(config);
  constexpr int d = 2;
  const int n = config.n, kappa = config.kappa;
  std::vector<CMatrix> cores;
  for (int l = 0; l < n; ++l) {
    const int kl = (l == 0) ? 1 : kappa;
    const int kr = (l == n - 1) ? 1 : kappa;
    const int terms = purity_rank_at(config, l);
    CounterStream rng(config.seed, mix64(draw * 0x10001ULL + static_cast<std::uint64_t>(l)));
    // kraus[i][a] is the kl x kr matrix A_l^{i,a}.
    std::vector<std::vector<CMatrix>> kraus(d, std::vector<CMatrix>(terms));
    for (int i = 0; i < d; ++i) {
      for (int a = 0; a < terms; ++a) {
        CMatrix m(kl, kr);
        for (int c = 0; c < kr; ++c)
          for (int r = 0; r < kl; ++r) {
            const double re = rng.uniform(-1.0, 1.0);
            const double im = rng.uniform(-1.0, 1.0);
            m(r, c) = Complex(re, im);
          }
        kraus[i][a] = std::move(m);
      }
    }
    const int left = kl * kl, right = kr * kr;
    CMatrix core = CMatrix::Zero(static_cast<Eigen::Index>(left) * d * d, right);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        CMatrix x = CMatrix::Zero(left, right);
        for (int a = 0; a < terms; ++a) x += Eigen::kroneckerProduct(kraus[i][a], kraus[j][a].conjugate()).eval();
        core.block(static_cast<Eigen::Index>(left) * (i + d * j), 0, left, right) = x;
      }
    }
    cores.push_back(std::move(core));
  }
  return TTTensor(d, std::move(cores));
}

TTTensor random_mpdo(const MPDOGenConfig& config, MPDOGenInfo* info) {
  validate(config);
  const int n = config.n;
  const auto caps = rank_caps(n, 2);
  std::vector<int> expected;
  bool over_cap = false;
  for (int c : caps) {
    expected.push_back(std::min(c, config.kappa * config.kappa));
    over_cap = over_cap || config.kappa * config.kappa > c;
  }

  MPDOGenInfo local;
  for (int draw = 0; draw <= kMaxResamples; ++draw) {
    TTTensor raw = random_mpdo_unnormalized(config, static_cast<std::uint64_t>(draw));
    const Complex tr = tt_trace(raw);
    if (!(tr.real() > 0) || std::abs(tr.imag()) > 1e-10 * std::abs(tr)) {
      ++local.resamples;
      continue;
    }
    if (n > 1) {
      const TTTensor compact = tt_round(raw, Truncation::to_tolerance(1e-12));
      if (compact.bond_ranks() != expected) {
        ++local.resamples;
        continue;
      }
      if (over_cap) raw = compact;
    }
    local.raw_trace = tr.real();
    const double scale = std::pow(tr.real(), -1.0 / n);
    std::vector<CMatrix> cores = raw.cores();
    for (auto& c : cores) c *= scale;
    if (info) *info = local;
    return TTTensor(2, std::move(cores));
  }
  std::ostringstream os;
  os << "random_mpdo: no admissible draw after " << kMaxResamples << " resamples (seed " << config.seed << ")";
  throw NumericalError(os.str());
}

double purity(const TTTensor& state) { return tt_inner(state, state).real(); }

TTTensor maximally_mixed(int n, int d) {
  require(n >= 1, "maximally_mixed needs n >= 1");
  return tt_product(std::vector<CMatrix>(n, CMatrix::Identity(d, d) / static_cast<double>(d)));
}

TTTensor pure_product(const std::string& bits) {
  require(!bits.empty(), "pure_product needs at least one bit");
  std::vector<CMatrix> factors;
  for (char b : bits) {
    require(b == '0' || b == '1', "pure_product bits must be '0' or '1'");
    CMatrix f = CMatrix::Zero(2, 2);
    const int k = b - '0';
    f(k, k) = 1.0;
    factors.push_back(f);
  }
  return tt_product(factors);
}

TTTensor ghz_density(int n) {
  require(n >= 1, "ghz_density needs n >= 1");
  // Bond index b = x + 2y tracks the ket branch x and bra branch y.
  constexpr int d = 2, p = 4, bond = 4;
  std::vector<CMatrix> cores;
  for (int l = 0; l < n; ++l) {
    const int left = (l == 0) ? 1 : bond;
    const int right = (l == n - 1) ? 1 : bond;
    CMatrix c = CMatrix::Zero(static_cast<Eigen::Index>(left) * p, right);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const int b = i + 2 * j;
        const int s = i + d * j;
        const int row = (l == 0) ? 0 : b;
        const int col = (l == n - 1) ? 0 : b;
        c(static_cast<Eigen::Index>(left) * s + row, col) = (l == 0) ? 0.5 : 1.0;
      }
    cores.push_back(std::move(c));
  }
  return TTTensor(d, std::move(cores));
}

}  // namespace qst
