// qst: generate states, simulate measurements, estimate, verify POVMs and
// designs, and run experiment sweeps. Exit codes: 0 ok, 1 input error,
// 2 numerical failure.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "qst/estimator.hpp"
#include "qst/experiment.hpp"
#include "qst/io.hpp"
#include "qst/povm.hpp"
#include "qst/sampler.hpp"
#include "qst/statesim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qst;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = default_threads();
  std::string backend = "auto";
};

void add_common(CLI::App* app, Common& c, bool with_backend) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--out", c.out, "output file or directory");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--threads", c.threads, "worker threads (default: QST_THREADS or hardware concurrency)")
      ->check(CLI::PositiveNumber);
  if (with_backend) app->add_option("--backend", c.backend, "auto | dense | tt")->check(CLI::IsMember({"auto", "dense", "tt"}));
}

void emit(const std::string& out, const json& j) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    io::write_json(out, j);
}

json with_provenance(json body, const json& inputs, std::uint64_t seed) {
  body["provenance"] = io::provenance(io::json_hash(inputs), seed);
  return body;
}

// --- generate ------------------------------------------------------------

struct GenerateArgs {
  Common common;
  std::string kind = "mpdo";
  int n = 4;
  int kappa = 1;
  int purity_rank = 10;
  std::string bits;
};

int cmd_generate(const GenerateArgs& a) {
  json inputs = {{"command", "generate"}, {"kind", a.kind}};
  TTTensor state;
  std::uint64_t seed = a.common.seed.value_or(0);
  if (a.kind == "mpdo") {
    MPDOGenConfig cfg{a.n, a.kappa, a.purity_rank, seed, {}};
    if (!a.common.config.empty()) cfg = io::mpdo_config_from_json(io::read_json(a.common.config), cfg);
    if (a.common.seed) cfg.seed = *a.common.seed;
    seed = cfg.seed;
    MPDOGenInfo info;
    state = random_mpdo(cfg, &info);
    inputs["manifest"] = io::to_json(cfg);
    inputs["manifest"]["resamples"] = info.resamples;
  } else if (a.kind == "maximally-mixed") {
    state = maximally_mixed(a.n);
    inputs["n"] = a.n;
  } else if (a.kind == "ghz") {
    state = ghz_density(a.n);
    inputs["n"] = a.n;
  } else if (a.kind == "product") {
    state = pure_product(a.bits);
    inputs["bits"] = a.bits;
  } else {
    throw InputError("unknown state kind '" + a.kind + "'");
  }
  json body = io::to_json(state);
  body["manifest"] = inputs;
  emit(a.common.out, with_provenance(body, inputs, seed));
  return 0;
}

// --- measure -------------------------------------------------------------

struct MeasureArgs {
  Common common;
  std::string state;
  std::string povm = "local-sic";
  long long shots = 1000;
  std::string sampler = "auto";
};

int cmd_measure(const MeasureArgs& a) {
  const TTTensor state = io::tt_from_json(io::read_json(a.state));
  const ProductPOVM povm = io::resolve_product_povm(a.povm, state.sites());
  const std::uint64_t seed = a.common.seed.value_or(0);
  const bool enumerate = a.sampler == "enumerate" || (a.sampler == "auto" && state.sites() <= kMaxDenseSites);
  const OutcomeRecord rec = enumerate ? sample_enumerate(povm, state, a.shots, seed, a.povm)
                                      : sample_sequential(povm, state, a.shots, seed, a.povm, a.common.threads);
  const json inputs = {{"command", "measure"}, {"state", io::json_hash(io::to_json(state))}, {"povm", a.povm},
                       {"M", a.shots},         {"sampler", enumerate ? "enumerate" : "sequential"}};
  json body = io::to_json(rec);
  body["sampler"] = enumerate ? "enumerate" : "sequential";
  emit(a.common.out, with_provenance(body, inputs, seed));
  return 0;
}

// --- estimate ------------------------------------------------------------

struct EstimateArgs {
  Common common;
  std::string record;
  std::string povm = "local-sic";
  std::string truth;
  std::string algorithm = "pgd";
  std::string init;
  std::string init_state;
  int rank = 0;
  int n = 0;
};

int cmd_estimate(const EstimateArgs& a) {
  const OutcomeRecord rec = io::record_from_json(io::read_json(a.record));
  require(rec.distinct() > 0, "record is empty");
  const int n = a.n > 0 ? a.n : static_cast<int>(rec.counts().begin()->first.size());
  const ProductPOVM povm = io::resolve_product_povm(a.povm, n);
  rec.validate_against(povm);

  EstimatorConfig cfg;
  json cfg_json = json::object();
  if (!a.common.config.empty()) cfg_json = io::read_json(a.common.config);
  int rbar = a.rank;
  if (rbar <= 0 && cfg_json.contains("ranks")) {
    const auto r = cfg_json.at("ranks").get<std::vector<int>>();
    rbar = r.empty() ? 1 : *std::max_element(r.begin(), r.end());
  }
  if (rbar <= 0) rbar = 1;
  std::string init_name = a.init.empty() ? cfg_json.value("init", std::string("random")) : a.init;
  if (!a.init_state.empty()) init_name = "provided";
  const InitMode init = io::parse_init(init_name);
  apply_schedule(cfg, default_preset(init, rbar, false));
  cfg = io::estimator_config_from_json(cfg_json, cfg);
  cfg.init = init;
  if (!a.init_state.empty()) cfg.provided_init = io::tt_from_json(io::read_json(a.init_state));
  if (a.rank > 0 || !cfg_json.contains("ranks")) cfg.ranks = uniform_ranks(n, povm.local_dim(), rbar);
  if (a.common.seed) cfg.init_seed = cfg.batch_seed = *a.common.seed;
  if (a.common.backend != "auto" || !cfg_json.contains("backend")) cfg.backend = io::parse_backend(a.common.backend);

  std::optional<TTTensor> truth;
  if (!a.truth.empty()) truth = io::tt_from_json(io::read_json(a.truth));
  const Estimate est = a.algorithm == "pgd" ? pgd(rec, povm, cfg, truth) : psgd(rec, povm, cfg, truth);

  json inputs = {{"command", "estimate"}, {"record", io::json_hash(io::to_json(rec))}, {"povm", a.povm},
                 {"algorithm", a.algorithm}, {"config", io::to_json(cfg)}};
  if (truth) inputs["truth"] = io::json_hash(io::to_json(*truth));
  const std::string hash = io::json_hash(inputs);
  const std::uint64_t seed = cfg.init_seed;

  json summary = {{"algorithm", a.algorithm},
                  {"config", io::to_json(cfg)},
                  {"iterations_run", est.iterations_run},
                  {"converged", est.converged},
                  {"converged_reason", est.converged_reason},
                  {"final_loss", est.final_loss},
                  {"backend", io::to_string(est.backend)}};
  if (a.algorithm == "psgd") summary["epoch_size"] = est.epoch_size, summary["batch_size"] = est.batch_size;
  if (truth) {
    summary["initial_error"] = est.initial_error;
    summary["final_error"] = recovery_error(est.state, *truth);
  }
  summary["provenance"] = io::provenance(hash, seed);
  if (a.common.out.empty()) {
    std::cout << summary.dump(2) << "\n";
    return 0;
  }
  const fs::path dir(a.common.out);
  json body = io::to_json(est.state);
  body["estimate"] = summary;
  io::write_json(dir / "estimate.json", with_provenance(body, inputs, seed));
  io::write_text(dir / "trace.csv", io::trace_csv(est, hash, seed));
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// --- checks --------------------------------------------------------------

struct CheckPovmArgs {
  Common common;
  std::string povm = "local-sic";
  int n = 1;
};

int cmd_check_povm(const CheckPovmArgs& a) {
  DensePOVM povm;
  if (a.povm == "local-sic") {
    povm = to_dense_povm(ProductPOVM::uniform(sic_qubit(), a.n));
  } else {
    json j = io::read_json(a.povm);
    if (j.contains("local")) j = j.at("local");
    povm = io::dense_povm_from_json(j);
  }
  const SicReport sic = check_sic(povm);
  json body = {{"povm", a.povm}, {"dim", povm.dim}, {"elements", povm.size()}, {"is_povm", check_povm(povm)},
               {"rank_one", povm.vectors.has_value()}, {"sic", io::to_json(sic)}};
  emit(a.common.out, with_provenance(body, {{"command", "check-povm"}, {"povm", a.povm}, {"n", a.n}}, 0));
  return 0;
}

struct CheckDesignArgs {
  Common common;
  std::string vectors;
  int s = 2;
};

int cmd_check_design(const CheckDesignArgs& a) {
  std::vector<CVector> vecs;
  if (a.vectors == "local-sic") {
    vecs = *to_dense_povm(sic_qubit()).vectors;
  } else {
    const json j = io::read_json(a.vectors);
    vecs = j.contains("vectors") ? io::vectors_from_json(j) : *io::dense_povm_from_json(j).vectors;
  }
  const DesignReport rep = check_t_design(vecs, a.s);
  emit(a.common.out,
       with_provenance(io::to_json(rep), {{"command", "check-design"}, {"vectors", a.vectors}, {"s", a.s}}, 0));
  return 0;
}

struct GammaArgs {
  Common common;
  std::string state;
  std::string povm = "local-sic";
  std::string method = "beam";
  int beam_width = 64;
};

int cmd_gamma(const GammaArgs& a) {
  const TTTensor state = io::tt_from_json(io::read_json(a.state));
  const ProductPOVM povm = io::resolve_product_povm(a.povm, state.sites());
  const GammaReport rep =
      gamma(povm, state, a.method == "exhaustive" ? GammaMethod::exhaustive : GammaMethod::beam, a.beam_width);
  json body = io::to_json(rep);
  body["method"] = a.method;
  const json inputs = {{"command", "gamma"},
                       {"state", io::json_hash(io::to_json(state))},
                       {"povm", a.povm},
                       {"method", a.method},
                       {"beam_width", a.beam_width}};
  emit(a.common.out, with_provenance(body, inputs, 0));
  return 0;
}

// --- experiment ----------------------------------------------------------

struct ExperimentArgs {
  Common common;
  bool no_plots = false;
};

int cmd_experiment(const ExperimentArgs& a) {
  require(!a.common.config.empty(), "experiment needs --config SPEC.json");
  require(!a.common.out.empty(), "experiment needs --out DIR");
  json j = io::read_json(a.common.config);
  if (a.common.seed) j["base_seed"] = *a.common.seed;
  if (a.common.backend != "auto") {
    if (!j.contains("overrides")) j["overrides"] = json::object();
    j["overrides"]["backend"] = a.common.backend;
  }
  const ExperimentSpec spec = ExperimentSpec::from_json(j);
  ExperimentOptions opt;
  opt.out = a.common.out;
  opt.threads = a.common.threads;
  opt.plots = !a.no_plots;
  const auto total = enumerate_cells(spec).size();
  size_t done = 0;
  opt.on_row = [&](const ResultRow& r) {
    ++done;
    std::cerr << "[" << done << "] " << r.cell.key(spec.algorithm) << " error=" << io::fmt(r.final_error)
              << (r.converged ? "" : " (not converged: " + r.reason + ")") << "\n";
  };
  const auto rows = run_experiment(spec, opt);
  std::cerr << rows.size() << " rows (" << total << " cells, " << done << " newly computed) -> " << a.common.out
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MPO state tomography from product POVM measurements"};
  app.set_version_flag("--version", std::string(io::kLibraryVersion));
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a ground-truth MPO state");
  add_common(g, gen.common, false);
  g->add_option("--kind", gen.kind, "mpdo | maximally-mixed | ghz | product")
      ->check(CLI::IsMember({"mpdo", "maximally-mixed", "ghz", "product"}));
  g->add_option("--n", gen.n, "number of qubits")->check(CLI::PositiveNumber);
  g->add_option("--kappa", gen.kappa, "Kraus bond dimension (MPO rank kappa^2)")->check(CLI::PositiveNumber);
  g->add_option("--purity-rank", gen.purity_rank, "Kraus terms per site")->check(CLI::PositiveNumber);
  g->add_option("--bits", gen.bits, "bit string for --kind product");

  MeasureArgs meas;
  auto* m = app.add_subcommand("measure", "sample an outcome record from a state");
  add_common(m, meas.common, false);
  m->add_option("--state", meas.state, "state JSON")->required();
  m->add_option("--povm", meas.povm, "local-sic or local POVM JSON");
  m->add_option("--shots,-M", meas.shots, "number of shots")->check(CLI::PositiveNumber);
  m->add_option("--sampler", meas.sampler, "auto | enumerate | sequential")
      ->check(CLI::IsMember({"auto", "enumerate", "sequential"}));

  EstimateArgs est;
  auto* e = app.add_subcommand("estimate", "recover an MPO from an outcome record");
  add_common(e, est.common, true);
  e->add_option("--record", est.record, "outcome record JSON")->required();
  e->add_option("--povm", est.povm, "local-sic or local POVM JSON");
  e->add_option("--truth", est.truth, "ground-truth state JSON (adds error columns)");
  e->add_option("--algorithm", est.algorithm, "pgd | psgd")->check(CLI::IsMember({"pgd", "psgd"}));
  e->add_option("--init", est.init, "spectral | random | provided");
  e->add_option("--init-state", est.init_state, "initial state JSON (implies --init provided)");
  e->add_option("--rank", est.rank, "uniform target rank")->check(CLI::PositiveNumber);

  CheckPovmArgs cp;
  auto* c = app.add_subcommand("check-povm", "verify POVM and SIC properties");
  add_common(c, cp.common, false);
  c->add_option("--povm", cp.povm, "local-sic or POVM JSON");
  c->add_option("--n", cp.n, "sites for local-sic")->check(CLI::Range(1, 5));

  CheckDesignArgs cd;
  auto* d = app.add_subcommand("check-design", "measure the t-design defect of a vector set");
  add_common(d, cd.common, false);
  d->add_option("--vectors", cd.vectors, "local-sic or vector/POVM JSON")->required();
  d->add_option("--s", cd.s, "moment order")->check(CLI::Range(1, 6));

  GammaArgs ga;
  auto* gm = app.add_subcommand("gamma", "largest scaled outcome probability K max_k p_k");
  add_common(gm, ga.common, false);
  gm->add_option("--state", ga.state, "state JSON")->required();
  gm->add_option("--povm", ga.povm, "local-sic or local POVM JSON");
  gm->add_option("--method", ga.method, "exhaustive | beam")->check(CLI::IsMember({"exhaustive", "beam"}));
  gm->add_option("--beam-width", ga.beam_width, "beam width")->check(CLI::PositiveNumber);

  ExperimentArgs ex;
  auto* x = app.add_subcommand("experiment", "run a parameter sweep");
  add_common(x, ex.common, true);
  x->add_flag("--no-plots", ex.no_plots, "skip SVG output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& s) {
    return app.exit(s);
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 1;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*m) return cmd_measure(meas);
    if (*e) return cmd_estimate(est);
    if (*c) return cmd_check_povm(cp);
    if (*d) return cmd_check_design(cd);
    if (*gm) return cmd_gamma(ga);
    if (*x) return cmd_experiment(ex);
  } catch (const NumericalError& err) {
    std::cerr << "numerical failure: " << err.what() << "\n";
    return 2;
  } catch (const InputError& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& err) {
    std::cerr << "input error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 1;
}
