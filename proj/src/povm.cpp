#include "qst/povm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/KroneckerProduct>

namespace qst {

namespace {

double max_abs_imag(const Eigen::Ref<const CVector>& v) {
  return v.size() ? v.imag().cwiseAbs().maxCoeff() : 0.0;
}

RVector checked_real(const CVector& values) {
  const double scale = std::max(1.0, values.size() ? values.cwiseAbs().maxCoeff() : 0.0);
  if (max_abs_imag(values) > 1e-10 * scale)
    throw InputError("measurement of a non-Hermitian operator: imaginary residue above 1e-10");
  return values.real();
}

bool is_psd(const CMatrix& a, double tol) {
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(a, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

template <class Elements>
bool completes_identity(const Elements& elems, long long dim, double tol) {
  CMatrix sum = CMatrix::Zero(dim, dim);
  for (const auto& e : elems) {
    if (e.rows() != dim || e.cols() != dim) return false;
    sum += e;
  }
  return (sum - CMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

CVector LocalPOVM::fused(int i) const {
  const auto& e = elements.at(i);
  return Eigen::Map<const CVector>(e.data(), static_cast<Eigen::Index>(d) * d);
}

CMatrix LocalPOVM::fused_matrix() const {
  CMatrix f(d * d, size());
  for (int i = 0; i < size(); ++i) f.col(i) = fused(i);
  return f;
}

ProductPOVM ProductPOVM::uniform(const LocalPOVM& local, int n) {
  require(n >= 1, "product POVM needs at least one site");
  return ProductPOVM{std::vector<LocalPOVM>(n, local)};
}

double ProductPOVM::outcome_count() const {
  double k = 1;
  for (const auto& s : sites) k *= s.size();
  return k;
}

void ProductPOVM::validate() const {
  require(!sites.empty(), "product POVM has no sites");
  for (const auto& s : sites) {
    require(s.d == sites[0].d, "all sites of a product POVM must share the local dimension");
    require(s.size() >= 1, "local POVM with no elements");
    for (const auto& e : s.elements)
      require(e.rows() == s.d && e.cols() == s.d, "local POVM element has wrong shape");
  }
}

void ProductPOVM::check_outcome(std::span<const int> outcome) const {
  require(outcome.size() <= sites.size(), "outcome longer than the site count");
  for (size_t l = 0; l < outcome.size(); ++l) {
    if (outcome[l] < 0 || outcome[l] >= sites[l].size()) {
      std::ostringstream os;
      os << "outcome index " << outcome[l] << " at site " << l << " out of range [0, " << sites[l].size()
         << ")";
      throw InputError(os.str());
    }
  }
}

long long ProductPOVM::flat_index(std::span<const int> outcome) const {
  require(outcome.size() == sites.size(), "outcome length must equal the site count");
  check_outcome(outcome);
  long long k = 0;
  for (size_t l = 0; l < sites.size(); ++l) k = k * sites[l].size() + outcome[l];
  return k;
}

Outcome ProductPOVM::outcome_at(long long flat) const {
  Outcome o(sites.size());
  for (int l = num_sites() - 1; l >= 0; --l) {
    o[l] = static_cast<int>(flat % sites[l].size());
    flat /= sites[l].size();
  }
  require(flat == 0, "flat outcome index out of range");
  return o;
}

// Lower diagonal entry is 1/3: with 1/6 the elements would not sum to the
// identity and would not be rank one.
LocalPOVM sic_qubit() {
  using std::numbers::pi;
  const double off = std::sqrt(2.0) / 6.0;
  LocalPOVM p;
  p.d = 2;
  CMatrix b1(2, 2);
  b1 << 0.5, 0.0, 0.0, 0.0;
  p.elements.push_back(b1);
  for (int m = 0; m < 3; ++m) {
    const Complex phase = std::polar(1.0, 2.0 * pi * m / 3.0);
    CMatrix b(2, 2);
    b << 1.0 / 6.0, off * std::conj(phase), off * phase, 1.0 / 3.0;
    p.elements.push_back(b);
  }
  return p;
}

DensePOVM to_dense_povm(const LocalPOVM& local) {
  DensePOVM out{local.d, local.elements, std::nullopt};
  out.vectors = rank_one_vectors(out);
  return out;
}

DensePOVM to_dense_povm(const ProductPOVM& povm, int max_sites) {
  povm.validate();
  require(povm.num_sites() <= max_sites, "site count exceeds the dense materialization cap");
  std::vector<DensePOVM> locals;
  for (const auto& s : povm.sites) locals.push_back(to_dense_povm(s));
  const bool rank_one = std::all_of(locals.begin(), locals.end(), [](const auto& l) { return l.vectors.has_value(); });

  DensePOVM out{1, {CMatrix::Identity(1, 1)}, std::nullopt};
  std::vector<CVector> vecs{CVector::Ones(1)};
  for (const auto& loc : locals) {
    std::vector<CMatrix> next;
    std::vector<CVector> next_vecs;
    for (size_t k = 0; k < out.elements.size(); ++k) {
      for (int i = 0; i < loc.size(); ++i) {
        next.push_back(Eigen::kroneckerProduct(out.elements[k], loc.elements[i]).eval());
        if (rank_one) next_vecs.push_back(Eigen::kroneckerProduct(vecs[k], (*loc.vectors)[i]).eval());
      }
    }
    out.elements = std::move(next);
    vecs = std::move(next_vecs);
    out.dim *= loc.dim;
  }
  if (rank_one) out.vectors = std::move(vecs);
  return out;
}

std::optional<std::vector<CVector>> rank_one_vectors(const DensePOVM& povm, double tol) {
  if (povm.elements.empty()) return std::nullopt;
  const double scale = static_cast<double>(povm.dim) / povm.size();
  std::vector<CVector> out;
  for (const auto& a : povm.elements) {
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(a);
    const auto& ev = eig.eigenvalues();
    const Eigen::Index top = ev.size() - 1;
    if (std::abs(ev(top) - scale) > tol) return std::nullopt;
    if (top > 0 && ev.head(top).cwiseAbs().maxCoeff() > tol) return std::nullopt;
    out.push_back(eig.eigenvectors().col(top));
  }
  return out;
}

DensePOVM wh_sic_from_fiducial(int d, const CVector& fiducial) {
  require(d >= 2 && d <= 16, "Weyl-Heisenberg construction supports 2 <= d <= 16");
  require(fiducial.size() == d, "fiducial length must equal d");
  require(std::abs(fiducial.norm() - 1.0) <= 1e-12, "fiducial must be a unit vector");
  const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / d);
  DensePOVM out;
  out.dim = d;
  std::vector<CVector> vecs;
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      CVector psi(d);
      for (int j = 0; j < d; ++j) {
        // (X^a Z^b f)_{j} = omega^{b (j - a)} f_{j - a}
        const int src = ((j - a) % d + d) % d;
        psi(j) = std::pow(omega, static_cast<double>(b * src)) * fiducial(src);
      }
      out.elements.push_back(psi * psi.adjoint() / static_cast<double>(d));
      vecs.push_back(psi);
    }
  }
  out.vectors = std::move(vecs);
  return out;
}

std::optional<CVector> bundled_fiducial(int d) {
  if (d == 2) {
    CVector f(2);
    f << std::sqrt((3.0 + std::sqrt(3.0)) / 6.0),
        std::polar(std::sqrt((3.0 - std::sqrt(3.0)) / 6.0), std::numbers::pi / 4.0);
    return f;
  }
  if (d == 3) {
    CVector f(3);
    f << 0.0, 1.0 / std::sqrt(2.0), -1.0 / std::sqrt(2.0);
    return f;
  }
  return std::nullopt;
}

SicReport check_sic(const DensePOVM& povm) {
  SicReport rep;
  const double dim = static_cast<double>(povm.dim);
  rep.count_ok = povm.size() == static_cast<long long>(povm.dim * povm.dim);
  const double self_target = 1.0 / (dim * dim);
  const double cross_target = 1.0 / (dim * dim * (dim + 1.0));
  for (int k = 0; k < povm.size(); ++k) {
    const auto& a = povm.elements[k];
    rep.trace_dev = std::max(rep.trace_dev, std::abs(a.trace() - 1.0 / dim));
    for (int j = k; j < povm.size(); ++j) {
      const Complex ip = (a.adjoint() * povm.elements[j]).trace();
      if (j == k)
        rep.self_dev = std::max(rep.self_dev, std::abs(ip - self_target));
      else
        rep.cross_dev = std::max(rep.cross_dev, std::abs(ip - cross_target));
    }
  }
  return rep;
}

bool check_povm(const LocalPOVM& povm, double tol) {
  if (povm.elements.empty()) return false;
  for (const auto& e : povm.elements)
    if (e.rows() != povm.d || e.cols() != povm.d || !is_psd(e, tol)) return false;
  return completes_identity(povm.elements, povm.d, tol);
}

bool check_povm(const DensePOVM& povm, double tol) {
  if (povm.elements.empty()) return false;
  for (const auto& e : povm.elements)
    if (e.rows() != povm.dim || !is_psd(e, tol)) return false;
  return completes_identity(povm.elements, povm.dim, tol);
}

std::vector<CMatrix> dual_basis_sic(const DensePOVM& povm) {
  if (!check_sic(povm).passes(1e-8)) throw InputError("dual_basis_sic: input is not a SIC-POVM");
  const double dim = static_cast<double>(povm.dim);
  std::vector<CMatrix> dual;
  for (const auto& a : povm.elements)
    dual.push_back(dim * (dim + 1.0) * a - CMatrix::Identity(povm.dim, povm.dim));
  return dual;
}

RVector measure_map_dense(const DensePOVM& povm, const DenseOperator& state) {
  require(state.dim() == povm.dim, "state and POVM dimensions differ");
  CVector p(povm.size());
  for (int k = 0; k < povm.size(); ++k) p(k) = povm.elements[k].conjugate().cwiseProduct(state.matrix).sum();
  return checked_real(p);
}

CVector apply_mode(const CVector& x, const std::vector<int>& dims, int l, const CMatrix& op) {
  long long inner = 1, outer = 1;
  for (int i = 0; i < l; ++i) inner *= dims[i];
  for (size_t i = l + 1; i < dims.size(); ++i) outer *= dims[i];
  require(op.cols() == dims[l], "apply_mode: operator width does not match the mode size");
  require(x.size() == inner * dims[l] * outer, "apply_mode: tensor size does not match dims");
  const long long out_mode = op.rows();
  CVector y(inner * out_mode * outer);
  const CMatrix op_t = op.transpose();
  for (long long o = 0; o < outer; ++o) {
    Eigen::Map<const CMatrix> blk(x.data() + o * inner * dims[l], inner, dims[l]);
    Eigen::Map<CMatrix>(y.data() + o * inner * out_mode, inner, out_mode).noalias() = blk * op_t;
  }
  return y;
}

namespace {

// Probabilities with outcome i_1 fastest -> lexicographic (site 1 slowest).
RVector reorder_to_lexicographic(const CVector& raw, const ProductPOVM& povm) {
  const int n = povm.num_sites();
  const long long total = raw.size();
  CVector lex(total);
  Outcome o(n, 0);
  for (long long f = 0; f < total; ++f) {
    long long k = 0;
    for (int l = 0; l < n; ++l) k = k * povm.sites[l].size() + o[l];
    lex(k) = raw(f);
    for (int l = 0; l < n; ++l) {
      if (++o[l] < povm.sites[l].size()) break;
      o[l] = 0;
    }
  }
  return checked_real(lex);
}

}  // namespace

RVector measure_map_dense(const ProductPOVM& povm, const DenseOperator& state, int max_sites) {
  povm.validate();
  const int n = povm.num_sites();
  require(n <= max_sites, "outcome enumeration exceeds the dense cap");
  require(state.sites == n && state.local_dim == povm.local_dim(), "state and POVM shapes differ");
  const int p = povm.local_dim() * povm.local_dim();
  CVector x = dense_to_fused(state);
  std::vector<int> dims(n, p);
  for (int l = 0; l < n; ++l) {
    x = apply_mode(x, dims, l, povm.sites[l].fused_matrix().adjoint());
    dims[l] = povm.sites[l].size();
  }
  return reorder_to_lexicographic(x, povm);
}

RVector all_outcome_probabilities(const ProductPOVM& povm, const TTTensor& state, int max_sites) {
  povm.validate();
  const int n = povm.num_sites();
  require(n <= max_sites, "outcome enumeration exceeds the dense cap");
  require(state.sites() == n && state.local_dim() == povm.local_dim(), "state and POVM shapes differ");
  OutcomeContractor oc(povm, state);
  CMatrix acc = CMatrix::Identity(1, 1);
  for (int l = 0; l < n; ++l) {
    const int kl = oc.local_outcomes(l);
    CMatrix next(acc.rows() * kl, state.right_rank(l));
    for (int i = 0; i < kl; ++i) {
      const CMatrix part = acc * oc.site_term(l, i);
      for (Eigen::Index q = 0; q < acc.rows(); ++q) next.row(q * kl + i) = part.row(q);
    }
    acc = std::move(next);
  }
  return checked_real(acc.col(0));
}

int clamp_probabilities(std::span<double> probs, double clamp_tol) {
  int clamped = 0;
  for (auto& v : probs) {
    if (v >= 0) continue;
    if (v < -clamp_tol) {
      std::ostringstream os;
      os << "probability " << v << " below the clamp tolerance; state is not PSD";
      throw NumericalError(os.str());
    }
    v = 0;
    ++clamped;
  }
  return clamped;
}

OutcomeContractor::OutcomeContractor(const ProductPOVM& povm, const TTTensor& state) {
  povm.validate();
  const int n = state.sites();
  require(povm.num_sites() == n && povm.local_dim() == state.local_dim(), "state and POVM shapes differ");
  const int p = state.phys_dim();
  site_terms_.resize(n);
  for (int l = 0; l < n; ++l) {
    const auto& loc = povm.sites[l];
    for (int i = 0; i < loc.size(); ++i) {
      const CVector b = loc.fused(i);
      CMatrix g = CMatrix::Zero(state.left_rank(l), state.right_rank(l));
      for (int s = 0; s < p; ++s)
        if (b(s) != Complex(0)) g += std::conj(b(s)) * state.slice(l, s);
      site_terms_[l].push_back(std::move(g));
    }
  }
  right_env_.resize(n + 1);
  right_env_[n] = CVector::Ones(1);
  for (int l = n - 1; l >= 0; --l) {
    CMatrix transfer = CMatrix::Zero(state.left_rank(l), state.right_rank(l));
    for (const auto& g : site_terms_[l]) transfer += g;
    right_env_[l] = transfer * right_env_[l + 1];
  }
}

CMatrix OutcomeContractor::left_vector(std::span<const int> prefix) const {
  require(prefix.size() <= site_terms_.size(), "prefix longer than the site count");
  CMatrix acc = CMatrix::Identity(1, 1);
  for (size_t l = 0; l < prefix.size(); ++l) {
    require(prefix[l] >= 0 && prefix[l] < local_outcomes(static_cast<int>(l)), "outcome index out of range");
    acc = acc * site_terms_[l][prefix[l]];
  }
  return acc;
}

Complex OutcomeContractor::probability(std::span<const int> outcome) const {
  require(static_cast<int>(outcome.size()) == sites(), "outcome length must equal the site count");
  return left_vector(outcome)(0, 0);
}

Complex OutcomeContractor::marginal(std::span<const int> prefix) const {
  return (left_vector(prefix) * right_env_[prefix.size()])(0, 0);
}

RVector OutcomeContractor::next_weights(const CMatrix& left, int l) const {
  RVector w(local_outcomes(l));
  const CVector& env = right_env_[l + 1];
  for (int i = 0; i < local_outcomes(l); ++i) w(i) = (left * (site_terms_[l][i] * env))(0, 0).real();
  return w;
}

double prob_of_outcome(const ProductPOVM& povm, const TTTensor& state, std::span<const int> outcome) {
  povm.check_outcome(outcome);
  require(static_cast<int>(outcome.size()) == state.sites(), "outcome length must equal the site count");
  const int p = state.phys_dim();
  CMatrix acc = CMatrix::Identity(1, 1);
  for (int l = 0; l < state.sites(); ++l) {
    const CVector b = povm.sites[l].fused(outcome[l]);
    CMatrix g = CMatrix::Zero(state.left_rank(l), state.right_rank(l));
    for (int s = 0; s < p; ++s) g += std::conj(b(s)) * state.slice(l, s);
    acc = acc * g;
  }
  return acc(0, 0).real();
}

double marginal_prefix_prob(const ProductPOVM& povm, const TTTensor& state, std::span<const int> prefix) {
  povm.check_outcome(prefix);
  return OutcomeContractor(povm, state).marginal(prefix).real();
}

GammaReport gamma(const ProductPOVM& povm, const TTTensor& state, GammaMethod method, int beam_width,
                  int max_sites) {
  const double k_total = povm.outcome_count();
  GammaReport rep;
  if (method == GammaMethod::exhaustive) {
    require(state.sites() <= max_sites, "exhaustive gamma exceeds the dense cap; use beam search");
    const RVector p = all_outcome_probabilities(povm, state, max_sites);
    Eigen::Index best = 0;
    p.maxCoeff(&best);
    rep.gamma = k_total * p(best);
    rep.argmax_outcome = povm.outcome_at(best);
    rep.exact = true;
    return rep;
  }
  require(beam_width >= 1, "beam width must be >= 1");
  OutcomeContractor oc(povm, state);
  struct Candidate {
    Outcome prefix;
    CMatrix left;
    double weight;
  };
  std::vector<Candidate> beam{{Outcome{}, CMatrix::Identity(1, 1), 1.0}};
  for (int l = 0; l < state.sites(); ++l) {
    std::vector<Candidate> grown;
    for (const auto& c : beam) {
      const RVector w = oc.next_weights(c.left, l);
      for (int i = 0; i < oc.local_outcomes(l); ++i) {
        Outcome pre = c.prefix;
        pre.push_back(i);
        grown.push_back({std::move(pre), c.left * oc.site_term(l, i), w(i)});
      }
    }
    std::stable_sort(grown.begin(), grown.end(),
                     [](const Candidate& a, const Candidate& b) { return a.weight > b.weight; });
    if (static_cast<int>(grown.size()) > beam_width) grown.resize(beam_width);
    beam = std::move(grown);
  }
  rep.gamma = k_total * beam.front().weight;
  rep.argmax_outcome = beam.front().prefix;
  rep.exact = false;
  return rep;
}

CMatrix channel_superoperator(const LocalPOVM& local) {
  const CMatrix f = local.fused_matrix();
  return f * f.adjoint();
}

TTTensor sum_channel(const ProductPOVM& povm, const TTTensor& state) {
  povm.validate();
  require(povm.num_sites() == state.sites() && povm.local_dim() == state.local_dim(),
          "state and POVM shapes differ");
  const int p = state.phys_dim();
  std::vector<CMatrix> cores;
  for (int l = 0; l < state.sites(); ++l) {
    const CMatrix sop = channel_superoperator(povm.sites[l]);
    const int left = state.left_rank(l);
    CMatrix c = CMatrix::Zero(state.core(l).rows(), state.core(l).cols());
    for (int sp = 0; sp < p; ++sp) {
      auto blk = c.block(static_cast<Eigen::Index>(left) * sp, 0, left, c.cols());
      for (int s = 0; s < p; ++s)
        if (sop(sp, s) != Complex(0)) blk += sop(sp, s) * state.slice(l, s);
    }
    cores.push_back(std::move(c));
  }
  return TTTensor(state.local_dim(), std::move(cores));
}

}  // namespace qst
