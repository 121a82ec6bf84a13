#include "qst/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "qst/io.hpp"
#include "qst/rng.hpp"
#include "qst/sampler.hpp"
#include "qst/statesim.hpp"

namespace qst {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int kappa_for(int rbar) {
  const int k = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rbar))));
  require(k >= 1 && k * k == rbar, "rbar must be a perfect square (rbar = kappa^2)");
  return k;
}

std::uint64_t cell_hash(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (auto p : parts) h = mix64(h ^ p);
  return h;
}

ProductPOVM cell_povm(const ExperimentSpec& spec, int n) {
  if (spec.povm == "local-sic") return ProductPOVM::uniform(sic_qubit(), n);
  json j = io::read_json(spec.povm);
  j["n"] = n;
  return io::product_povm_from_json(j);
}

json row_to_json(const ResultRow& r) {
  return {{"n", r.cell.n},
          {"M", r.cell.shots},
          {"rbar", r.cell.rbar},
          {"init", io::to_string(r.cell.init)},
          {"seed", r.cell.seed},
          {"algorithm", r.algorithm},
          {"final_error", r.final_error},
          {"final_loss", r.final_loss},
          {"init_error", r.init_error},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"reason", r.reason},
          {"gamma", std::isnan(r.gamma) ? json(nullptr) : json(r.gamma)},
          {"wall_ms", r.wall_ms}};
}

double number_or_nan(const json& j) {
  return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

ResultRow row_from_json(const json& j) {
  ResultRow r;
  r.cell.n = j.at("n");
  r.cell.shots = j.at("M");
  r.cell.rbar = j.at("rbar");
  r.cell.init = io::parse_init(j.at("init"));
  r.cell.seed = j.at("seed");
  r.algorithm = j.at("algorithm");
  r.final_error = number_or_nan(j.at("final_error"));
  r.final_loss = number_or_nan(j.at("final_loss"));
  r.init_error = number_or_nan(j.at("init_error"));
  r.iterations = j.at("iterations");
  r.converged = j.at("converged");
  r.reason = j.at("reason");
  r.gamma = number_or_nan(j.at("gamma"));
  r.wall_ms = number_or_nan(j.at("wall_ms"));
  return r;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_plots(const ExperimentSpec& spec, const std::vector<SummaryRow>& summary, const fs::path& out,
                 const std::string& note) {
  std::set<long long> shot_values;
  std::set<int> n_values;
  for (const auto& s : summary) {
    shot_values.insert(s.shots);
    n_values.insert(s.n);
  }
  auto label = [](const SummaryRow& s) { return "rbar=" + std::to_string(s.rbar) + " " + io::to_string(s.init); };

  if (n_values.size() > 1) {
    for (long long m : shot_values) {
      std::map<std::string, PlotSeries> series;
      for (const auto& s : summary) {
        if (s.shots != m || !(s.median_error > 0)) continue;
        auto& ps = series[label(s)];
        ps.label = label(s);
        ps.x.push_back(s.n);
        ps.y.push_back(s.median_error);
      }
      std::vector<PlotSeries> list;
      for (auto& [k, v] : series) list.push_back(std::move(v));
      io::write_text(out / ("error_vs_n_M" + std::to_string(m) + ".svg"),
                     svg_line_plot(spec.name + ": median error vs n (M=" + std::to_string(m) + ")", "n",
                                   "median ||rho_hat - rho*||_F", list, false, true, note));
    }
  }
  if (shot_values.size() > 1) {
    std::map<std::string, PlotSeries> series;
    for (const auto& s : summary) {
      if (!(s.median_error > 0)) continue;
      const std::string l = "n=" + std::to_string(s.n) + " " + label(s);
      auto& ps = series[l];
      ps.label = l;
      ps.x.push_back(static_cast<double>(s.shots));
      ps.y.push_back(s.median_error);
    }
    std::vector<PlotSeries> list;
    for (auto& [k, v] : series) list.push_back(std::move(v));
    io::write_text(out / "error_vs_M.svg", svg_line_plot(spec.name + ": median error vs M", "M",
                                                         "median ||rho_hat - rho*||_F", list, true, true, note));
  }
}

void write_convergence_plot(const ExperimentSpec& spec, const std::vector<Cell>& cells, const fs::path& out,
                            const std::string& note) {
  std::vector<PlotSeries> list;
  for (const auto& c : cells) {
    if (c.seed != 0) continue;
    const fs::path trace = out / "traces" / (c.key(spec.algorithm) + ".csv");
    std::ifstream in(trace);
    if (!in) continue;
    PlotSeries ps;
    ps.label = "n=" + std::to_string(c.n) + " M=" + std::to_string(c.shots) + " rbar=" + std::to_string(c.rbar) + " " +
               io::to_string(c.init);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'i') continue;
      std::istringstream ls(line);
      std::string iter, loss, err;
      std::getline(ls, iter, ',');
      std::getline(ls, loss, ',');
      std::getline(ls, err, ',');
      const double e = std::strtod(err.c_str(), nullptr);
      if (e > 0 && std::isfinite(e)) {
        ps.x.push_back(std::strtod(iter.c_str(), nullptr));
        ps.y.push_back(e);
      }
    }
    if (!ps.x.empty()) list.push_back(std::move(ps));
  }
  if (!list.empty())
    io::write_text(out / "convergence.svg", svg_line_plot(spec.name + ": recovery error per iteration (seed 0)",
                                                          "iteration", "||rho_t - rho*||_F", list, false, true, note));
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json(const json& j) {
  require(j.is_object(), "experiment spec must be a JSON object");
  ExperimentSpec s;
  try {
    s.name = j.value("name", s.name);
    s.n_values = j.at("n").get<std::vector<int>>();
    s.shots = j.at("M").get<std::vector<long long>>();
    s.rbar = j.value("rbar", std::vector<int>{1});
    for (const auto& m : j.value("init", std::vector<std::string>{"random"})) s.inits.push_back(io::parse_init(m));
    s.algorithm = j.value("algorithm", s.algorithm);
    s.seeds = j.value("seeds", s.seeds);
    s.base_seed = j.value("base_seed", s.base_seed);
    s.povm = j.value("povm", s.povm);
    s.sampler = j.value("sampler", s.sampler);
    s.purity_rank = j.value("purity_rank", s.purity_rank);
    s.fixed_step = j.value("fixed_step", s.fixed_step);
    s.gamma = j.value("gamma", s.gamma);
    s.gamma_beam = j.value("gamma_beam", s.gamma_beam);
    if (j.contains("overrides")) s.overrides = j.at("overrides");
  } catch (const json::exception& e) {
    throw InputError(std::string("experiment spec: ") + e.what());
  }
  s.validate();
  return s;
}

json ExperimentSpec::to_json() const {
  std::vector<std::string> init_names;
  for (auto m : inits) init_names.push_back(io::to_string(m));
  return {{"name", name},       {"n", n_values},         {"M", shots},
          {"rbar", rbar},       {"init", init_names},    {"algorithm", algorithm},
          {"seeds", seeds},     {"base_seed", base_seed}, {"povm", povm},
          {"sampler", sampler}, {"purity_rank", purity_rank}, {"fixed_step", fixed_step},
          {"gamma", gamma},     {"gamma_beam", gamma_beam}, {"overrides", overrides}};
}

void ExperimentSpec::validate() const {
  require(!n_values.empty() && !shots.empty() && !rbar.empty() && !inits.empty(), "sweep axes must be non-empty");
  require(seeds >= 1, "seeds must be >= 1");
  require(algorithm == "pgd" || algorithm == "psgd", "algorithm must be pgd or psgd");
  require(sampler == "auto" || sampler == "enumerate" || sampler == "sequential", "unknown sampler");
  require(overrides.is_object(), "overrides must be a JSON object");
  for (int n : n_values) require(n >= 1, "n must be >= 1");
  for (long long m : shots) require(m >= 1, "M must be >= 1");
  for (int r : rbar) kappa_for(r);
  for (auto m : inits) require(m != InitMode::provided, "experiments support random and spectral init only");
  require(purity_rank >= 1, "purity_rank must be >= 1");
}

std::string ExperimentSpec::hash() const { return io::json_hash(to_json()); }

std::string Cell::key(const std::string& algorithm) const {
  std::ostringstream os;
  os << algorithm << "_n" << n << "_M" << shots << "_r" << rbar << "_" << io::to_string(init) << "_s" << seed;
  return os.str();
}

std::vector<Cell> enumerate_cells(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<Cell> cells;
  for (int n : spec.n_values)
    for (long long m : spec.shots)
      for (int r : spec.rbar)
        for (auto init : spec.inits)
          for (int s = 0; s < spec.seeds; ++s) cells.push_back({n, m, r, init, s});
  return cells;
}

CellSeeds cell_seeds(const ExperimentSpec& spec, const Cell& c) {
  const auto n = static_cast<std::uint64_t>(c.n), r = static_cast<std::uint64_t>(c.rbar),
             s = static_cast<std::uint64_t>(c.seed), m = static_cast<std::uint64_t>(c.shots);
  const auto init = static_cast<std::uint64_t>(c.init);
  return {cell_hash({spec.base_seed, derive_stream(0, "truth"), n, r, s}),
          cell_hash({spec.base_seed, derive_stream(0, "record"), n, r, s, m}),
          cell_hash({spec.base_seed, derive_stream(0, "init"), n, r, s, init}),
          cell_hash({spec.base_seed, derive_stream(0, "batch"), n, r, s, m, init})};
}

EstimatorConfig cell_config(const ExperimentSpec& spec, const Cell& c) {
  EstimatorConfig cfg;
  apply_schedule(cfg, default_preset(c.init, c.rbar, spec.fixed_step));
  cfg = io::estimator_config_from_json(spec.overrides, cfg);
  cfg.ranks = uniform_ranks(c.n, 2, c.rbar);
  cfg.init = c.init;
  const auto seeds = cell_seeds(spec, c);
  cfg.init_seed = seeds.init;
  cfg.batch_seed = seeds.batch;
  cfg.record_trace = true;
  return cfg;
}

ResultRow run_cell(const ExperimentSpec& spec, const Cell& c, Estimate* estimate) {
  const auto start = std::chrono::steady_clock::now();
  const auto seeds = cell_seeds(spec, c);
  const ProductPOVM povm = cell_povm(spec, c.n);
  require(povm.local_dim() == 2, "experiments generate qubit MPDOs; the POVM must act on qubits");

  MPDOGenConfig gen;
  gen.n = c.n;
  gen.kappa = kappa_for(c.rbar);
  gen.purity_rank = spec.purity_rank;
  gen.seed = seeds.truth;
  const TTTensor truth = random_mpdo(gen);

  const bool enumerate = spec.sampler == "enumerate" || (spec.sampler == "auto" && c.n <= kMaxDenseSites);
  const OutcomeRecord record = enumerate ? sample_enumerate(povm, truth, c.shots, seeds.record, spec.povm)
                                         : sample_sequential(povm, truth, c.shots, seeds.record, spec.povm);

  ResultRow row;
  row.cell = c;
  row.algorithm = spec.algorithm;
  if (spec.gamma) row.gamma = gamma(povm, truth, GammaMethod::beam, spec.gamma_beam).gamma;
  const EstimatorConfig cfg = cell_config(spec, c);
  try {
    Estimate est = spec.algorithm == "pgd" ? pgd(record, povm, cfg, truth) : psgd(record, povm, cfg, truth);
    row.final_error = recovery_error(est.state, truth);
    row.final_loss = est.final_loss;
    row.init_error = est.initial_error;
    row.iterations = est.iterations_run;
    row.converged = est.converged;
    row.reason = est.converged_reason;
    if (estimate) *estimate = std::move(est);
  } catch (const NumericalError& e) {
    row.final_error = row.final_loss = row.init_error = std::numeric_limits<double>::quiet_NaN();
    row.reason = std::string("numerical_failure: ") + e.what();
  }
  row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return row;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec, const ExperimentOptions& options) {
  const auto cells = enumerate_cells(spec);
  const std::string hash = spec.hash();
  const bool persist = !options.out.empty();
  if (persist) {
    fs::create_directories(options.out / "cells");
    json spec_file = spec.to_json();
    spec_file["provenance"] = io::provenance(hash, spec.base_seed);
    io::write_json(options.out / "spec.json", spec_file);
  }

  std::vector<std::optional<ResultRow>> rows(cells.size());
  if (persist) {
    for (size_t i = 0; i < cells.size(); ++i) {
      const fs::path f = options.out / "cells" / (cells[i].key(spec.algorithm) + ".json");
      if (!fs::exists(f)) continue;
      const json j = io::read_json(f);
      if (j.value("spec_hash", "") == hash) rows[i] = row_from_json(j.at("row"));
    }
  }

  std::mutex write_mutex;
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(std::max(1, options.threads));
  auto worker = [&](int w) {
    try {
      for (size_t i = next++; i < cells.size(); i = next++) {
        if (rows[i]) continue;
        Estimate est;
        ResultRow row = run_cell(spec, cells[i], &est);
        std::lock_guard<std::mutex> lock(write_mutex);
        if (persist) {
          const std::string key = cells[i].key(spec.algorithm);
          if (options.write_traces && !est.trace_log.empty())
            io::write_text(options.out / "traces" / (key + ".csv"), io::trace_csv(est, hash, spec.base_seed));
          io::write_json(options.out / "cells" / (key + ".json"),
                         {{"spec_hash", hash}, {"provenance", io::provenance(hash, spec.base_seed)}, {"row", row_to_json(row)}});
        }
        if (options.on_row) options.on_row(row);
        rows[i] = std::move(row);
      }
    } catch (...) {
      errors[w] = std::current_exception();
      next = cells.size();
    }
  };
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(cells.size())));
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ResultRow> out;
  for (auto& r : rows) out.push_back(std::move(*r));
  if (persist) {
    const auto summary = summarize(out);
    io::write_text(options.out / "results.csv", results_csv(out, hash, spec.base_seed));
    io::write_text(options.out / "summary.csv", summary_csv(summary, hash, spec.base_seed));
    std::ostringstream timing;
    timing << io::csv_provenance(hash, spec.base_seed) << "key,wall_ms\n";
    for (const auto& r : out) timing << r.cell.key(spec.algorithm) << ',' << io::fmt(r.wall_ms) << '\n';
    io::write_text(options.out / "timing.csv", timing.str());
    if (options.plots) {
      const std::string note = "spec " + hash + ", version " + std::string(io::kLibraryVersion);
      write_plots(spec, summary, options.out, note);
      write_convergence_plot(spec, cells, options.out, note);
    }
  }
  return out;
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t h = v.size() / 2;
  return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

std::vector<SummaryRow> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::tuple<int, long long, int, int>, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows)
    groups[{r.cell.n, r.cell.shots, r.cell.rbar, static_cast<int>(r.cell.init)}].push_back(&r);
  std::vector<SummaryRow> out;
  for (const auto& [key, members] : groups) {
    SummaryRow s;
    s.n = std::get<0>(key);
    s.shots = std::get<1>(key);
    s.rbar = std::get<2>(key);
    s.init = static_cast<InitMode>(std::get<3>(key));
    std::vector<double> err, init, loss, iters, gam;
    for (const auto* r : members) {
      ++s.runs;
      if (!r->converged) ++s.not_converged;
      err.push_back(r->final_error);
      init.push_back(r->init_error);
      loss.push_back(r->final_loss);
      iters.push_back(r->iterations);
      gam.push_back(r->gamma);
    }
    s.median_error = median(err);
    s.median_init_error = median(init);
    s.median_loss = median(loss);
    s.median_iterations = median(iters);
    s.median_gamma = median(gam);
    out.push_back(s);
  }
  return out;
}

std::string results_csv(const std::vector<ResultRow>& rows, const std::string& spec_hash, std::uint64_t seed) {
  std::ostringstream os;
  os << io::csv_provenance(spec_hash, seed)
     << "n,M,rbar,init,algorithm,seed,final_error,final_loss,init_error,iterations,converged,reason,gamma\n";
  for (const auto& r : rows)
    os << r.cell.n << ',' << r.cell.shots << ',' << r.cell.rbar << ',' << io::to_string(r.cell.init) << ','
       << r.algorithm << ',' << r.cell.seed << ',' << io::fmt(r.final_error) << ',' << io::fmt(r.final_loss) << ','
       << io::fmt(r.init_error) << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ',' << r.reason << ','
       << io::fmt(r.gamma) << '\n';
  return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows, const std::string& spec_hash, std::uint64_t seed) {
  std::ostringstream os;
  os << io::csv_provenance(spec_hash, seed)
     << "n,M,rbar,init,runs,not_converged,median_error,median_init_error,median_loss,median_iterations,median_gamma\n";
  for (const auto& s : rows)
    os << s.n << ',' << s.shots << ',' << s.rbar << ',' << io::to_string(s.init) << ',' << s.runs << ','
       << s.not_converged << ',' << io::fmt(s.median_error) << ',' << io::fmt(s.median_init_error) << ','
       << io::fmt(s.median_loss) << ',' << io::fmt(s.median_iterations) << ',' << io::fmt(s.median_gamma) << '\n';
  return os.str();
}

std::string svg_line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                          const std::vector<PlotSeries>& series, bool log_x, bool log_y,
                          const std::string& provenance_note) {
  constexpr double W = 720, H = 480, L = 80, R = 220, T = 50, B = 60;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#17becf", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
  auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  if (log_y) y0 = std::floor(y0), y1 = std::ceil(y1);
  const double pad = 0.03 * (x1 - x0);
  x0 -= pad, x1 += pad;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<!-- " << escape_xml(provenance_note) << " -->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  // y ticks: decades on a log axis, five even steps otherwise.
  std::vector<double> yticks;
  if (log_y)
    for (double e = y0; e <= y1 + 1e-9; e += 1) yticks.push_back(e);
  else
    for (int i = 0; i <= 5; ++i) yticks.push_back(y0 + (y1 - y0) * i / 5);
  for (double t : yticks) {
    const double y = H - B - (t - y0) / (y1 - y0) * (H - T - B);
    os << "<line x1=\"" << L - 4 << "\" y1=\"" << y << "\" x2=\"" << W - R << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n";
    os << "<text x=\"" << L - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
       << io::fmt(log_y ? std::pow(10.0, t) : std::round(t * 1e6) / 1e6) << "</text>\n";
  }
  std::set<double> xs;
  for (const auto& s : series) xs.insert(s.x.begin(), s.x.end());
  for (double v : xs) {
    const double x = px(v);
    os << "<line x1=\"" << x << "\" y1=\"" << H - B << "\" x2=\"" << x << "\" y2=\"" << H - B + 4
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">" << io::fmt(v) << "</text>\n";
    if (xs.size() > 12) break;
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">" << escape_xml(xlabel)
     << "</text>\n";
  os << "<text transform=\"translate(18," << (T + H - B) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape_xml(ylabel) << "</text>\n";

  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 10];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    os << "\"/>\n";
    if (s.x.size() <= 40)
      for (size_t i = 0; i < s.x.size(); ++i)
        os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = T + 14 + 16 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly - 4
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << W - R + 36 << "\" y=\"" << ly << "\">" << escape_xml(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

int default_threads() {
  if (const char* env = std::getenv("QST_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace qst
