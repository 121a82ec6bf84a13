#include "qst/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "qst/rng.hpp"

namespace qst {

namespace {

constexpr int kMaxShotRetries = 10;

std::map<Outcome, long long> to_outcome_counts(const std::map<long long, long long>& flat,
                                                const ProductPOVM& povm) {
  std::map<Outcome, long long> out;
  for (const auto& [k, c] : flat) out.emplace(povm.outcome_at(k), c);
  return out;
}

}  // namespace

OutcomeRecord::OutcomeRecord(std::map<Outcome, long long> counts, long long shots, std::string povm_id,
                             std::uint64_t seed, SamplingDiagnostics diag)
    : counts_(std::move(counts)), shots_(shots), povm_id_(std::move(povm_id)), seed_(seed), diag_(diag) {
  require(shots_ >= 1, "outcome record needs at least one shot");
  long long total = 0;
  for (const auto& [k, c] : counts_) {
    require(c >= 1, "outcome counts must be positive");
    require(!k.empty(), "empty outcome key");
    total += c;
  }
  require(total == shots_, "outcome counts must sum to the shot count");
}

void OutcomeRecord::validate_against(const ProductPOVM& povm) const {
  for (const auto& [k, c] : counts_) {
    require(static_cast<int>(k.size()) == povm.num_sites(), "record outcome length differs from the POVM site count");
    povm.check_outcome(k);
  }
}

double empirical_probability(const OutcomeRecord& record, std::span<const int> outcome) {
  const auto it = record.counts().find(Outcome(outcome.begin(), outcome.end()));
  if (it == record.counts().end()) return 0.0;
  return static_cast<double>(it->second) / static_cast<double>(record.shots());
}

std::vector<Outcome> nonzero_outcomes(const OutcomeRecord& record) {
  std::vector<Outcome> out;
  out.reserve(record.distinct());
  for (const auto& [k, c] : record.counts()) out.push_back(k);
  return out;
}

OutcomeRecord make_record(std::map<Outcome, long long> counts, std::string povm_id, std::uint64_t seed) {
  long long total = 0;
  for (const auto& [k, c] : counts) total += c;
  return OutcomeRecord(std::move(counts), total, std::move(povm_id), seed);
}

std::map<long long, long long> sample_categorical(RVector probs, long long shots, std::uint64_t seed,
                                                  SamplingDiagnostics& diag) {
  require(shots >= 1, "shot count must be >= 1");
  diag.clamped += clamp_probabilities(std::span<double>(probs.data(), probs.size()));
  const double mass = probs.sum();
  if (std::abs(mass - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "probability mass " << mass << " deviates from 1 by more than 1e-6";
    throw NumericalError(os.str());
  }
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.data(), probs.data() + probs.size(), cdf.begin());
  const std::uint64_t stream = derive_stream(0, "enumerate");
  std::map<long long, long long> counts;
  for (long long t = 0; t < shots; ++t) {
    const double u = counter_uniform(seed, stream, static_cast<std::uint64_t>(t)) * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    long long k = std::min<long long>(it - cdf.begin(), static_cast<long long>(cdf.size()) - 1);
    while (probs(k) <= 0 && k > 0) --k;  // u landed exactly on a boundary
    ++counts[k];
  }
  return counts;
}

OutcomeRecord sample_enumerate(const ProductPOVM& povm, const TTTensor& state, long long shots,
                               std::uint64_t seed, const std::string& povm_id, int max_sites) {
  SamplingDiagnostics diag;
  const auto flat = sample_categorical(all_outcome_probabilities(povm, state, max_sites), shots, seed, diag);
  return OutcomeRecord(to_outcome_counts(flat, povm), shots, povm_id, seed, diag);
}

OutcomeRecord sample_enumerate(const ProductPOVM& povm, const DenseOperator& state, long long shots,
                               std::uint64_t seed, const std::string& povm_id, int max_sites) {
  SamplingDiagnostics diag;
  const auto flat = sample_categorical(measure_map_dense(povm, state, max_sites), shots, seed, diag);
  return OutcomeRecord(to_outcome_counts(flat, povm), shots, povm_id, seed, diag);
}

OutcomeRecord sample_enumerate(const DensePOVM& povm, const DenseOperator& state, long long shots,
                               std::uint64_t seed, const std::string& povm_id) {
  SamplingDiagnostics diag;
  const auto flat = sample_categorical(measure_map_dense(povm, state), shots, seed, diag);
  std::map<Outcome, long long> counts;
  for (const auto& [k, c] : flat) counts.emplace(Outcome{static_cast<int>(k)}, c);
  return OutcomeRecord(std::move(counts), shots, povm_id, seed, diag);
}

namespace {

struct ShotResult {
  Outcome outcome;
  int clamped = 0;
  int aborted = 0;
};

ShotResult draw_shot(const OutcomeContractor& oc, std::uint64_t seed, long long shot) {
  const int n = oc.sites();
  ShotResult res;
  for (int attempt = 0; attempt <= kMaxShotRetries; ++attempt) {
    Outcome outcome;
    outcome.reserve(n);
    CMatrix left = CMatrix::Identity(1, 1);
    bool ok = true;
    for (int l = 0; l < n; ++l) {
      RVector w = oc.next_weights(left, l);
      const double total = w.sum();
      if (!(total > 1e-300) || !std::isfinite(total)) {
        ok = false;
        break;
      }
      w /= total;
      res.clamped += clamp_probabilities(std::span<double>(w.data(), w.size()));
      const double u = counter_uniform(seed, static_cast<std::uint64_t>(shot),
                                       static_cast<std::uint64_t>(attempt) * n + l) * w.sum();
      int pick = 0;
      double acc = w(0);
      while (acc <= u && pick + 1 < w.size()) acc += w(++pick);
      while (w(pick) <= 0 && pick > 0) --pick;
      outcome.push_back(pick);
      left = (left * oc.site_term(l, pick)) / total;
    }
    if (ok) {
      res.outcome = std::move(outcome);
      return res;
    }
    ++res.aborted;
  }
  throw NumericalError("sequential sampler: zero-mass prefix persisted after retries");
}

}  // namespace

OutcomeRecord sample_sequential(const ProductPOVM& povm, const TTTensor& state, long long shots,
                                std::uint64_t seed, const std::string& povm_id, int threads) {
  require(shots >= 1, "shot count must be >= 1");
  const OutcomeContractor oc(povm, state);
  const double trace = oc.marginal({}).real();
  if (std::abs(trace - 1.0) > 1e-6) throw NumericalError("sequential sampler: state trace deviates from 1");

  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::min<long long>(shots, 256))));
  std::vector<std::map<Outcome, long long>> partial(threads);
  std::vector<SamplingDiagnostics> diags(threads);
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](int w) {
    try {
      for (long long t = w; t < shots; t += threads) {
        auto r = draw_shot(oc, seed, t);
        ++partial[w][r.outcome];
        diags[w].clamped += r.clamped;
        diags[w].aborted_shots += r.aborted;
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::map<Outcome, long long> counts;
  SamplingDiagnostics diag;
  for (int w = 0; w < threads; ++w) {
    for (const auto& [k, c] : partial[w]) counts[k] += c;
    diag.clamped += diags[w].clamped;
    diag.aborted_shots += diags[w].aborted_shots;
  }
  return OutcomeRecord(std::move(counts), shots, povm_id, seed, diag);
}

double sequential_path_probability(const OutcomeContractor& oc, std::span<const int> outcome) {
  require(static_cast<int>(outcome.size()) == oc.sites(), "outcome length must equal the site count");
  double prob = 1.0;
  CMatrix left = CMatrix::Identity(1, 1);
  for (int l = 0; l < oc.sites(); ++l) {
    const RVector w = oc.next_weights(left, l);
    const double total = w.sum();
    if (!(total > 0)) return 0.0;
    prob *= w(outcome[l]) / total;
    left = (left * oc.site_term(l, outcome[l])) / total;
  }
  return prob;
}

}  // namespace qst
