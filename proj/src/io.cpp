#include "qst/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qst/rng.hpp"

namespace qst::io {

namespace {

Complex complex_from_json(const json& j) {
  require(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
          "complex numbers must be [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

json complex_to_json(Complex c) { return json::array({c.real(), c.imag()}); }

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace

json matrix_to_json(const CMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty() && j[0].is_array(), "matrix must be a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size()), cols = static_cast<Eigen::Index>(j[0].size());
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    require(j[r].is_array() && static_cast<Eigen::Index>(j[r].size()) == cols, "matrix rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from_json(j[r][c]);
  }
  return m;
}

json vector_to_json(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

CVector vector_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "vector must be a nonempty array");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

json to_json(const TTTensor& tt) {
  json cores = json::array();
  for (int l = 0; l < tt.sites(); ++l) {
    const CMatrix& c = tt.core(l);
    json data = json::array();
    for (Eigen::Index i = 0; i < c.size(); ++i) data.push_back(complex_to_json(c.data()[i]));
    cores.push_back({{"left", tt.left_rank(l)}, {"phys", tt.phys_dim()}, {"right", tt.right_rank(l)}, {"data", data}});
  }
  return {{"type", "mpo"}, {"n", tt.sites()}, {"d", tt.local_dim()}, {"ranks", tt.bond_ranks()}, {"cores", cores}};
}

TTTensor tt_from_json(const json& j) {
  require(j.is_object() && j.contains("cores") && j.contains("d"), "MPO JSON needs 'd' and 'cores'");
  const int d = get_or(j, "d", 2);
  require(d >= 2, "local dimension must be >= 2");
  std::vector<CMatrix> cores;
  for (const auto& c : j.at("cores")) {
    const int left = get_or(c, "left", 0), phys = get_or(c, "phys", 0), right = get_or(c, "right", 0);
    require(left >= 1 && right >= 1 && phys == d * d, "core shape is invalid");
    const auto& data = c.at("data");
    require(data.is_array() && data.size() == static_cast<size_t>(left) * phys * right, "core data has the wrong length");
    CMatrix m(static_cast<Eigen::Index>(left) * phys, right);
    for (size_t i = 0; i < data.size(); ++i) m.data()[i] = complex_from_json(data[i]);
    cores.push_back(std::move(m));
  }
  require(!cores.empty(), "MPO needs at least one core");
  if (j.contains("n")) require(get_or(j, "n", 0) == static_cast<int>(cores.size()), "'n' disagrees with the core count");
  try {
    return TTTensor(d, std::move(cores));
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
}

json to_json(const LocalPOVM& povm) {
  json el = json::array();
  for (const auto& e : povm.elements) el.push_back(matrix_to_json(e));
  return {{"d", povm.d}, {"elements", el}};
}

LocalPOVM local_povm_from_json(const json& j) {
  require(j.is_object() && j.contains("elements"), "local POVM JSON needs 'elements'");
  LocalPOVM p;
  for (const auto& e : j.at("elements")) p.elements.push_back(matrix_from_json(e));
  require(!p.elements.empty(), "local POVM has no elements");
  p.d = get_or(j, "d", static_cast<int>(p.elements[0].rows()));
  for (const auto& e : p.elements) require(e.rows() == p.d && e.cols() == p.d, "POVM element has the wrong shape");
  return p;
}

ProductPOVM product_povm_from_json(const json& j) {
  require(j.is_object(), "POVM JSON must be an object");
  ProductPOVM povm;
  if (get_or<std::string>(j, "kind", "") == "local-sic") {
    povm = ProductPOVM::uniform(sic_qubit(), get_or(j, "n", 0));
  } else if (j.contains("local")) {
    povm = ProductPOVM::uniform(local_povm_from_json(j.at("local")), get_or(j, "n", 0));
  } else if (j.contains("sites")) {
    for (const auto& s : j.at("sites")) povm.sites.push_back(local_povm_from_json(s));
  } else {
    throw InputError("unknown POVM description (expected kind, local or sites)");
  }
  povm.validate();
  for (const auto& s : povm.sites)
    if (!check_povm(s)) throw InputError("local POVM elements are not PSD or do not sum to the identity");
  return povm;
}

ProductPOVM resolve_product_povm(const std::string& spec, int n) {
  if (spec == "local-sic") {
    require(n >= 1, "site count must be >= 1");
    return ProductPOVM::uniform(sic_qubit(), n);
  }
  json j = read_json(spec);
  if (!j.contains("n") && n >= 1) j["n"] = n;
  ProductPOVM povm = product_povm_from_json(j);
  require(povm.num_sites() == n, "POVM site count differs from the state");
  return povm;
}

std::vector<CVector> vectors_from_json(const json& j) {
  require(j.is_object() && j.contains("vectors"), "vector set JSON needs 'vectors'");
  std::vector<CVector> out;
  for (const auto& v : j.at("vectors")) out.push_back(vector_from_json(v));
  require(!out.empty(), "vector set is empty");
  for (const auto& v : out) require(v.size() == out[0].size(), "vectors differ in length");
  return out;
}

DensePOVM dense_povm_from_json(const json& j) {
  require(j.is_object(), "POVM JSON must be an object");
  if (get_or<std::string>(j, "kind", "") == "local-sic") return to_dense_povm(ProductPOVM::uniform(sic_qubit(), get_or(j, "n", 1)));
  DensePOVM p;
  if (j.contains("elements")) {
    for (const auto& e : j.at("elements")) p.elements.push_back(matrix_from_json(e));
    require(!p.elements.empty(), "POVM has no elements");
    p.dim = p.elements[0].rows();
    for (const auto& e : p.elements) require(e.rows() == p.dim && e.cols() == p.dim, "POVM elements differ in shape");
    p.vectors = rank_one_vectors(p);
    return p;
  }
  const auto vecs = vectors_from_json(j);
  p.dim = vecs[0].size();
  const double scale = static_cast<double>(p.dim) / static_cast<double>(vecs.size());
  for (const auto& v : vecs) {
    require(std::abs(v.norm() - 1.0) <= 1e-10, "design vectors must have unit norm");
    p.elements.push_back(scale * v * v.adjoint());
  }
  p.vectors = vecs;
  return p;
}

json to_json(const OutcomeRecord& record) {
  json counts = json::array();
  for (const auto& [k, c] : record.counts()) {
    json o = json::array();
    for (int i : k) o.push_back(i + 1);
    counts.push_back(json::array({o, c}));
  }
  return {{"type", "outcome_record"},
          {"M", record.shots()},
          {"seed", record.seed()},
          {"povm_id", record.povm_id()},
          {"counts", counts},
          {"diagnostics",
           {{"clamped", record.diagnostics().clamped}, {"aborted_shots", record.diagnostics().aborted_shots}}}};
}

OutcomeRecord record_from_json(const json& j) {
  require(j.is_object() && j.contains("counts") && j.contains("M"), "record JSON needs 'M' and 'counts'");
  std::map<Outcome, long long> counts;
  for (const auto& e : j.at("counts")) {
    require(e.is_array() && e.size() == 2 && e[0].is_array() && e[1].is_number_integer(),
            "record entries must be [[outcome...], count]");
    Outcome o;
    for (const auto& i : e[0]) {
      require(i.is_number_integer() && i.get<int>() >= 1, "outcome indices are 1-based positive integers");
      o.push_back(i.get<int>() - 1);
    }
    require(counts.emplace(std::move(o), e[1].get<long long>()).second, "duplicate outcome in record");
  }
  SamplingDiagnostics diag;
  if (j.contains("diagnostics")) {
    diag.clamped = get_or(j.at("diagnostics"), "clamped", 0);
    diag.aborted_shots = get_or(j.at("diagnostics"), "aborted_shots", 0LL);
  }
  return OutcomeRecord(std::move(counts), get_or(j, "M", 0LL), get_or<std::string>(j, "povm_id", "unknown"),
                       get_or<std::uint64_t>(j, "seed", 0), diag);
}

json to_json(const MPDOGenConfig& c) {
  json j = {{"n", c.n}, {"kappa", c.kappa}, {"purity_rank", c.purity_rank}, {"seed", c.seed}};
  if (!c.per_site_purity_rank.empty()) j["per_site_purity_rank"] = c.per_site_purity_rank;
  return j;
}

MPDOGenConfig mpdo_config_from_json(const json& j, MPDOGenConfig c) {
  require(j.is_object(), "generator config must be a JSON object");
  c.n = get_or(j, "n", c.n);
  c.kappa = get_or(j, "kappa", c.kappa);
  c.purity_rank = get_or(j, "purity_rank", c.purity_rank);
  c.seed = get_or(j, "seed", c.seed);
  c.per_site_purity_rank = get_or(j, "per_site_purity_rank", c.per_site_purity_rank);
  return c;
}

std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::spectral: return "spectral";
    case InitMode::random: return "random";
    case InitMode::provided: return "provided";
  }
  return "?";
}

std::string to_string(Backend b) {
  switch (b) {
    case Backend::automatic: return "auto";
    case Backend::dense: return "dense";
    case Backend::tt: return "tt";
  }
  return "?";
}

InitMode parse_init(const std::string& s) {
  if (s == "spectral") return InitMode::spectral;
  if (s == "random") return InitMode::random;
  if (s == "provided") return InitMode::provided;
  throw InputError("unknown init mode '" + s + "'");
}

Backend parse_backend(const std::string& s) {
  if (s == "auto") return Backend::automatic;
  if (s == "dense") return Backend::dense;
  if (s == "tt") return Backend::tt;
  throw InputError("unknown backend '" + s + "'");
}

EstimatorConfig estimator_config_from_json(const json& j, EstimatorConfig c) {
  require(j.is_object(), "estimator config must be a JSON object");
  c.ranks = get_or(j, "ranks", c.ranks);
  c.mu0 = get_or(j, "mu0", c.mu0);
  c.lambda = get_or(j, "lambda", c.lambda);
  c.scale_2n = get_or(j, "scale_2n", c.scale_2n);
  c.max_iters = get_or(j, "max_iters", c.max_iters);
  c.max_epochs = get_or(j, "max_epochs", c.max_epochs);
  if (j.contains("init")) c.init = parse_init(j.at("init").get<std::string>());
  c.init_seed = get_or(j, "init_seed", c.init_seed);
  if (j.contains("backend")) c.backend = parse_backend(j.at("backend").get<std::string>());
  c.epoch_size = get_or(j, "epoch_size", c.epoch_size);
  c.batch_size = get_or(j, "batch_size", c.batch_size);
  c.batch_seed = get_or(j, "batch_seed", c.batch_seed);
  c.tt_round_tol = get_or(j, "tt_round_tol", c.tt_round_tol);
  c.record_trace = get_or(j, "record_trace", c.record_trace);
  c.plateau_tol = get_or(j, "plateau_tol", c.plateau_tol);
  c.plateau_window = get_or(j, "plateau_window", c.plateau_window);
  c.design_t = get_or(j, "design_t", c.design_t);
  if (j.contains("provided_init")) c.provided_init = tt_from_json(j.at("provided_init"));
  return c;
}

json to_json(const EstimatorConfig& c) {
  return {{"ranks", c.ranks},
          {"mu0", c.mu0},
          {"lambda", c.lambda},
          {"scale_2n", c.scale_2n},
          {"max_iters", c.max_iters},
          {"max_epochs", c.max_epochs},
          {"init", to_string(c.init)},
          {"init_seed", c.init_seed},
          {"backend", to_string(c.backend)},
          {"epoch_size", c.epoch_size},
          {"batch_size", c.batch_size},
          {"batch_seed", c.batch_seed},
          {"tt_round_tol", c.tt_round_tol},
          {"record_trace", c.record_trace},
          {"plateau_tol", c.plateau_tol},
          {"plateau_window", c.plateau_window},
          {"design_t", c.design_t}};
}

json to_json(const SicReport& r) {
  return {{"count_ok", r.count_ok},
          {"trace_dev", r.trace_dev},
          {"self_dev", r.self_dev},
          {"cross_dev", r.cross_dev},
          {"pass", r.passes(1e-12)}};
}

json to_json(const DesignReport& r) {
  return {{"s", r.s}, {"delta_lower", r.delta_lower}, {"delta_upper", r.delta_upper}, {"method", r.method}};
}

json to_json(const GammaReport& r) {
  json o = json::array();
  for (int i : r.argmax_outcome) o.push_back(i + 1);
  return {{"gamma", r.gamma}, {"argmax_outcome", o}, {"exact", r.exact}};
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string json_hash(const json& j) { return fnv1a_hex(j.dump()); }

json provenance(const std::string& spec_hash, std::uint64_t seed) {
  return {{"spec_hash", spec_hash}, {"seed", seed}, {"version", std::string(kLibraryVersion)},
          {"rng", std::string(kRngVersion)}};
}

std::string csv_provenance(const std::string& spec_hash, std::uint64_t seed) {
  std::ostringstream os;
  os << "# spec_hash=" << spec_hash << "\n# seed=" << seed << "\n# version=" << kLibraryVersion
     << "\n# rng=" << kRngVersion << "\n";
  return os.str();
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
  }
  std::filesystem::rename(tmp, path);
}

std::string trace_csv(const Estimate& est, const std::string& spec_hash, std::uint64_t seed) {
  std::ostringstream os;
  os << csv_provenance(spec_hash, seed) << "iter,loss,error,step,wall_ms\n";
  for (const auto& e : est.trace_log)
    os << e.iter << ',' << fmt(e.loss) << ',' << fmt(e.error) << ',' << fmt(e.step) << ',' << fmt(e.wall_ms) << '\n';
  return os.str();
}

}  // namespace qst::io
