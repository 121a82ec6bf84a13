#pragma once

// Finite-shot measurement simulation.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "qst/povm.hpp"
#include "qst/tt.hpp"

namespace qst {

struct SamplingDiagnostics {
  int clamped = 0;              // probabilities/conditionals clamped from [-1e-10, 0)
  long long aborted_shots = 0;  // shots restarted after a zero-mass prefix
};

/// Sparse multiset of observed outcomes. Immutable after construction.
class OutcomeRecord {
 public:
  OutcomeRecord() = default;
  OutcomeRecord(std::map<Outcome, long long> counts, long long shots, std::string povm_id,
                std::uint64_t seed, SamplingDiagnostics diag = {});

  const std::map<Outcome, long long>& counts() const { return counts_; }
  long long shots() const { return shots_; }
  const std::string& povm_id() const { return povm_id_; }
  std::uint64_t seed() const { return seed_; }
  const SamplingDiagnostics& diagnostics() const { return diag_; }
  size_t distinct() const { return counts_.size(); }

  /// Throws InputError unless every key is a complete, in-range outcome.
  void validate_against(const ProductPOVM& povm) const;

  bool operator==(const OutcomeRecord& o) const {
    return counts_ == o.counts_ && shots_ == o.shots_ && povm_id_ == o.povm_id_ && seed_ == o.seed_;
  }

 private:
  std::map<Outcome, long long> counts_;
  long long shots_ = 0;
  std::string povm_id_;
  std::uint64_t seed_ = 0;
  SamplingDiagnostics diag_;
};

double empirical_probability(const OutcomeRecord& record, std::span<const int> outcome);
/// Observed outcomes in lexicographic order.
std::vector<Outcome> nonzero_outcomes(const OutcomeRecord& record);

/// Builds a record whose counts are given directly (tests, synthetic data).
OutcomeRecord make_record(std::map<Outcome, long long> counts, std::string povm_id = "synthetic",
                          std::uint64_t seed = 0);

// Enumeration sampler: full probability vector, then M categorical draws
// (one multinomial sample). Shot t uses counter t of a dedicated stream.
OutcomeRecord sample_enumerate(const ProductPOVM& povm, const TTTensor& state, long long shots,
                               std::uint64_t seed, const std::string& povm_id = "local-sic",
                               int max_sites = kMaxDenseSites);
OutcomeRecord sample_enumerate(const ProductPOVM& povm, const DenseOperator& state, long long shots,
                               std::uint64_t seed, const std::string& povm_id = "local-sic",
                               int max_sites = kMaxDenseSites);
/// Outcomes are single-entry vectors {k}.
OutcomeRecord sample_enumerate(const DensePOVM& povm, const DenseOperator& state, long long shots,
                               std::uint64_t seed, const std::string& povm_id = "dense");

/// Lower-level entry: probabilities in lexicographic outcome order.
std::map<long long, long long> sample_categorical(RVector probs, long long shots, std::uint64_t seed,
                                                  SamplingDiagnostics& diag);

// Sequential (chain-rule) sampler: each shot draws i_1, then i_2 | i_1, ...
// from prefix marginals. Shot t uses stream t, so shots may run on any
// thread and the merged record is identical.
OutcomeRecord sample_sequential(const ProductPOVM& povm, const TTTensor& state, long long shots,
                                std::uint64_t seed, const std::string& povm_id = "local-sic",
                                int threads = 1);

/// Product of the conditionals the sequential sampler uses along outcome.
double sequential_path_probability(const OutcomeContractor& oc, std::span<const int> outcome);

}  // namespace qst
