#pragma once

// Ground-truth states: random matrix product density operators and fixtures.

#include <cstdint>
#include <string>
#include <vector>

#include "qst/tt.hpp"

namespace qst {

struct MPDOGenConfig {
  int n = 4;
  int kappa = 1;       // Kraus bond dimension; MPO bond dimension is kappa^2
  int purity_rank = 10;  // number of Kraus terms per site (1 gives a pure state)
  std::uint64_t seed = 0;
  /// Optional per-site override of purity_rank (size n when set).
  std::vector<int> per_site_purity_rank;
};

struct MPDOGenInfo {
  int resamples = 0;  // rank-deficient or non-positive-trace draws discarded
  double raw_trace = 0;
};

/// PSD, Hermitian, unit-trace MPO built from random local Kraus cores with
/// entries uniform in [-1, 1] (real and imaginary parts).
TTTensor random_mpdo(const MPDOGenConfig& config, MPDOGenInfo* info = nullptr);

/// The same construction without unit-trace normalization.
TTTensor random_mpdo_unnormalized(const MPDOGenConfig& config, std::uint64_t draw = 0);

/// trace(rho^2) = ||rho||_F^2 for Hermitian rho.
double purity(const TTTensor& state);

TTTensor maximally_mixed(int n, int d = 2);
/// Computational-basis product state; bits is a string over {'0','1'} (d = 2).
TTTensor pure_product(const std::string& bits);
/// |GHZ><GHZ| with |GHZ> = (|0..0> + |1..1>)/sqrt(2).
TTTensor ghz_density(int n);

}  // namespace qst
