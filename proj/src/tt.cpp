#include "qst/tt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qst {

namespace {

struct ThinSvd {
  CMatrix u;
  RVector s;
  CMatrix v;
};

ThinSvd thin_svd(const Eigen::Ref<const CMatrix>& m) {
  Eigen::BDCSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// Number of singular values to keep. In tolerance mode the discarded tail
// satisfies sum sigma_i^2 <= budget_sq.
int choose_rank(const RVector& s, std::optional<int> max_rank, double budget_sq) {
  const int count = static_cast<int>(s.size());
  if (max_rank) return std::max(1, std::min(*max_rank, count));
  double tail = 0.0;
  int r = count;
  while (r > 1) {
    const double next = tail + s(r - 1) * s(r - 1);
    if (next > budget_sq) break;
    tail = next;
    --r;
  }
  return r;
}

Eigen::Map<const CMatrix> right_unfolding(const CMatrix& core, int left, int p) {
  return {core.data(), left, static_cast<Eigen::Index>(p) * core.cols()};
}

// Makes cores 1..n-1 right-orthonormal (their right unfoldings have
// orthonormal rows); the norm of the tensor ends up in core 0.
void right_orthogonalize(std::vector<CMatrix>& cores, int p) {
  for (int l = static_cast<int>(cores.size()) - 1; l >= 1; --l) {
    const int left = static_cast<int>(cores[l].rows()) / p;
    const int right = static_cast<int>(cores[l].cols());
    const CMatrix unf_adj = right_unfolding(cores[l], left, p).adjoint();
    Eigen::HouseholderQR<CMatrix> qr(unf_adj);
    const int k = std::min<int>(unf_adj.rows(), unf_adj.cols());
    const CMatrix q = qr.householderQ() * CMatrix::Identity(unf_adj.rows(), k);
    const CMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    CMatrix fresh(static_cast<Eigen::Index>(k) * p, right);
    Eigen::Map<CMatrix>(fresh.data(), k, static_cast<Eigen::Index>(p) * right) = q.adjoint();
    cores[l] = std::move(fresh);
    cores[l - 1] = cores[l - 1] * r.adjoint();
  }
}

std::string ranks_to_string(const std::vector<int>& r) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
  os << ")";
  return os.str();
}

}  // namespace

TTTensor::TTTensor(int d, std::vector<CMatrix> cores) : d_(d), cores_(std::move(cores)) {
  require(d >= 2, "local dimension must be >= 2");
  require(!cores_.empty(), "tensor train needs at least one core");
  const int p = d * d;
  int left = 1;
  for (size_t l = 0; l < cores_.size(); ++l) {
    const auto& c = cores_[l];
    if (c.rows() != static_cast<Eigen::Index>(left) * p) {
      std::ostringstream os;
      os << "core " << l << " has " << c.rows() << " rows, expected " << left * p;
      throw InputError(os.str());
    }
    require(c.cols() >= 1, "core with zero right rank");
    left = static_cast<int>(c.cols());
  }
  require(left == 1, "last core must have right rank 1");
}

std::vector<int> TTTensor::ranks() const {
  std::vector<int> r{1};
  for (const auto& c : cores_) r.push_back(static_cast<int>(c.cols()));
  return r;
}

std::vector<int> TTTensor::bond_ranks() const {
  std::vector<int> r;
  for (size_t l = 0; l + 1 < cores_.size(); ++l) r.push_back(static_cast<int>(cores_[l].cols()));
  return r;
}

int TTTensor::max_rank() const {
  int m = 1;
  for (const auto& c : cores_) m = std::max<int>(m, c.cols());
  return m;
}

Complex TTTensor::element(std::span<const int> row, std::span<const int> col) const {
  require(static_cast<int>(row.size()) == sites() && static_cast<int>(col.size()) == sites(),
          "element index length must equal site count");
  CMatrix acc = CMatrix::Identity(1, 1);
  for (int l = 0; l < sites(); ++l) {
    require(row[l] >= 0 && row[l] < d_ && col[l] >= 0 && col[l] < d_, "element index out of range");
    acc = acc * slice(l, row[l] + d_ * col[l]);
  }
  return acc(0, 0);
}

DenseOperator::DenseOperator(int n, int d, CMatrix m) : sites(n), local_dim(d), matrix(std::move(m)) {
  require(n >= 1 && d >= 2, "dense operator needs n >= 1 and d >= 2");
  require(n <= 20, "dense operator site count too large");
  const long long dim = ipow(d, n);
  require(matrix.rows() == dim && matrix.cols() == dim, "dense operator dimension must be d^n");
}

bool DenseOperator::is_hermitian(double tol) const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

std::vector<int> rank_caps(int n, int d) {
  const long long p = static_cast<long long>(d) * d;
  std::vector<int> caps;
  for (int l = 1; l < n; ++l) {
    const int e = std::min(l, n - l);
    long long cap = 1;
    for (int i = 0; i < e && cap < (1LL << 30); ++i) cap *= p;
    caps.push_back(static_cast<int>(std::min<long long>(cap, 1LL << 30)));
  }
  return caps;
}

std::vector<int> uniform_ranks(int n, int d, int rank) {
  require(rank >= 1, "rank must be >= 1");
  auto caps = rank_caps(n, d);
  for (auto& c : caps) c = std::min(c, rank);
  return caps;
}

void validate_ranks(int n, int d, const std::vector<int>& ranks) {
  if (static_cast<int>(ranks.size()) != n - 1) {
    std::ostringstream os;
    os << "rank vector " << ranks_to_string(ranks) << " must have " << n - 1 << " entries";
    throw InputError(os.str());
  }
  const auto caps = rank_caps(n, d);
  for (int l = 0; l < n - 1; ++l) {
    if (ranks[l] < 1 || ranks[l] > caps[l]) {
      std::ostringstream os;
      os << "rank vector " << ranks_to_string(ranks) << " violates cap " << ranks_to_string(caps);
      throw InputError(os.str());
    }
  }
}

CVector dense_to_fused(const DenseOperator& op) {
  const int n = op.sites, d = op.local_dim, p = d * d;
  const long long total = ipow(p, n);
  CVector out(total);
  std::vector<int> s(n, 0);
  std::vector<long long> weight(n);
  for (int l = 0; l < n; ++l) weight[l] = ipow(d, n - 1 - l);
  for (long long f = 0; f < total; ++f) {
    long long row = 0, col = 0;
    for (int l = 0; l < n; ++l) {
      row += (s[l] % d) * weight[l];
      col += (s[l] / d) * weight[l];
    }
    out(f) = op.matrix(row, col);
    for (int l = 0; l < n; ++l) {
      if (++s[l] < p) break;
      s[l] = 0;
    }
  }
  return out;
}

DenseOperator fused_to_dense(const CVector& fused, int n, int d) {
  const int p = d * d;
  const long long total = ipow(p, n);
  require(fused.size() == total, "fused vector length must be (d^2)^n");
  const long long dim = ipow(d, n);
  CMatrix m(dim, dim);
  std::vector<int> s(n, 0);
  std::vector<long long> weight(n);
  for (int l = 0; l < n; ++l) weight[l] = ipow(d, n - 1 - l);
  for (long long f = 0; f < total; ++f) {
    long long row = 0, col = 0;
    for (int l = 0; l < n; ++l) {
      row += (s[l] % d) * weight[l];
      col += (s[l] / d) * weight[l];
    }
    m(row, col) = fused(f);
    for (int l = 0; l < n; ++l) {
      if (++s[l] < p) break;
      s[l] = 0;
    }
  }
  return DenseOperator(n, d, std::move(m));
}

TTTensor tt_zero(int n, int d) {
  std::vector<CMatrix> cores(n, CMatrix::Zero(d * d, 1));
  return TTTensor(d, std::move(cores));
}

TTTensor tt_product(const std::vector<CMatrix>& factors) {
  require(!factors.empty(), "product operator needs at least one factor");
  const int d = static_cast<int>(factors[0].rows());
  std::vector<CMatrix> cores;
  for (const auto& f : factors) {
    require(f.rows() == d && f.cols() == d, "product factors must all be d x d");
    // Column-major storage of f is exactly f(i, j) at i + d*j.
    cores.emplace_back(Eigen::Map<const CMatrix>(f.data(), d * d, 1));
  }
  return TTTensor(d, std::move(cores));
}

TTTensor tt_from_fused(const CVector& fused, int n, int d, const Truncation& trunc) {
  const int p = d * d;
  require(fused.size() == ipow(p, n), "fused vector length must be (d^2)^n");
  require(trunc.ranks.has_value() != trunc.tolerance.has_value(),
          "exactly one of target ranks or truncation tolerance must be given");
  if (trunc.ranks) validate_ranks(n, d, *trunc.ranks);
  if (trunc.tolerance) require(*trunc.tolerance >= 0.0, "truncation tolerance must be >= 0");

  const double norm = fused.norm();
  if (n == 1) return TTTensor(d, {fused});
  if (norm <= 1e-14) return tt_zero(n, d);

  const double budget_sq =
      trunc.tolerance ? std::pow(*trunc.tolerance * norm, 2) / static_cast<double>(n - 1) : 0.0;

  std::vector<CMatrix> cores;
  CMatrix work = fused;  // current remainder, column-major (left, s, rest)
  long long rest = ipow(p, n);
  int left = 1;
  for (int l = 0; l < n - 1; ++l) {
    rest /= p;
    Eigen::Map<const CMatrix> unf(work.data(), static_cast<Eigen::Index>(left) * p, rest);
    auto svd = thin_svd(unf);
    const std::optional<int> cap = trunc.ranks ? std::optional<int>((*trunc.ranks)[l]) : std::nullopt;
    const int r = choose_rank(svd.s, cap, budget_sq);
    cores.emplace_back(svd.u.leftCols(r));
    CMatrix next = svd.s.head(r).asDiagonal() * svd.v.leftCols(r).adjoint();  // r x rest
    work = Eigen::Map<CMatrix>(next.data(), next.size(), 1);
    left = r;
  }
  cores.emplace_back(Eigen::Map<CMatrix>(work.data(), static_cast<Eigen::Index>(left) * p, 1));
  return TTTensor(d, std::move(cores));
}

TTTensor tt_from_dense(const DenseOperator& dense, const Truncation& trunc, int max_sites) {
  require(dense.sites <= max_sites, "site count exceeds the dense materialization cap");
  return tt_from_fused(dense_to_fused(dense), dense.sites, dense.local_dim, trunc);
}

CVector tt_to_fused(const TTTensor& tt, int max_sites) {
  require(tt.sites() <= max_sites, "site count exceeds the dense materialization cap");
  const int p = tt.phys_dim();
  CMatrix acc = tt.core(0);  // p x r_1, rows indexed by s_1
  for (int l = 1; l < tt.sites(); ++l) {
    const Eigen::Index rows = acc.rows();
    CMatrix next(rows * p, tt.right_rank(l));
    for (int s = 0; s < p; ++s) next.middleRows(rows * s, rows) = acc * tt.slice(l, s);
    acc = std::move(next);
  }
  return Eigen::Map<CVector>(acc.data(), acc.size());
}

DenseOperator tt_to_dense(const TTTensor& tt, int max_sites) {
  return fused_to_dense(tt_to_fused(tt, max_sites), tt.sites(), tt.local_dim());
}

Complex tt_inner(const TTTensor& a, const TTTensor& b) {
  require(a.sites() == b.sites() && a.local_dim() == b.local_dim(), "inner product shape mismatch");
  const int p = a.phys_dim();
  CMatrix env = CMatrix::Identity(1, 1);
  for (int l = 0; l < a.sites(); ++l) {
    CMatrix next = CMatrix::Zero(a.right_rank(l), b.right_rank(l));
    for (int s = 0; s < p; ++s) next.noalias() += a.slice(l, s).adjoint() * (env * b.slice(l, s));
    env = std::move(next);
  }
  return env(0, 0);
}

double tt_norm(const TTTensor& a) {
  const Complex v = tt_inner(a, a);
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, std::abs(v.real())))
    throw NumericalError("tt_norm: inner product has a non-negligible imaginary part");
  return std::sqrt(std::max(0.0, v.real()));
}

double tt_distance(const TTTensor& a, const TTTensor& b) {
  auto diff = tt_add(a, tt_scale(b, -1.0));
  std::vector<CMatrix> cores = diff.cores();
  right_orthogonalize(cores, diff.phys_dim());
  return cores[0].norm();
}

Complex tt_trace(const TTTensor& a) {
  const int d = a.local_dim();
  CMatrix acc = CMatrix::Identity(1, 1);
  for (int l = 0; l < a.sites(); ++l) {
    CMatrix diag = CMatrix::Zero(a.left_rank(l), a.right_rank(l));
    for (int i = 0; i < d; ++i) diag += a.slice(l, i + d * i);
    acc = acc * diag;
  }
  return acc(0, 0);
}

TTTensor tt_add(const TTTensor& a, const TTTensor& b) {
  require(a.sites() == b.sites() && a.local_dim() == b.local_dim(), "tt_add shape mismatch");
  const int n = a.sites(), p = a.phys_dim();
  if (n == 1) return TTTensor(a.local_dim(), {a.core(0) + b.core(0)});
  std::vector<CMatrix> cores;
  cores.reserve(n);
  for (int l = 0; l < n; ++l) {
    const int la = a.left_rank(l), lb = b.left_rank(l);
    const int ra = a.right_rank(l), rb = b.right_rank(l);
    const int left = (l == 0) ? 1 : la + lb;
    const int right = (l == n - 1) ? 1 : ra + rb;
    CMatrix c = CMatrix::Zero(static_cast<Eigen::Index>(left) * p, right);
    for (int s = 0; s < p; ++s) {
      auto blk = c.block(static_cast<Eigen::Index>(left) * s, 0, left, right);
      if (l == 0) {
        blk.leftCols(ra) = a.slice(l, s);
        blk.rightCols(rb) = b.slice(l, s);
      } else if (l == n - 1) {
        blk.topRows(la) = a.slice(l, s);
        blk.bottomRows(lb) = b.slice(l, s);
      } else {
        blk.topLeftCorner(la, ra) = a.slice(l, s);
        blk.bottomRightCorner(lb, rb) = b.slice(l, s);
      }
    }
    cores.push_back(std::move(c));
  }
  return TTTensor(a.local_dim(), std::move(cores));
}

TTTensor tt_scale(const TTTensor& a, Complex c) {
  std::vector<CMatrix> cores = a.cores();
  cores[0] *= c;
  return TTTensor(a.local_dim(), std::move(cores));
}

TTTensor tt_round(const TTTensor& a, const Truncation& trunc) {
  const int n = a.sites(), d = a.local_dim(), p = a.phys_dim();
  require(trunc.ranks.has_value() != trunc.tolerance.has_value(),
          "exactly one of target ranks or truncation tolerance must be given");
  if (trunc.ranks) validate_ranks(n, d, *trunc.ranks);
  if (trunc.tolerance) require(*trunc.tolerance >= 0.0, "truncation tolerance must be >= 0");

  std::vector<CMatrix> cores = a.cores();
  right_orthogonalize(cores, p);
  const double norm = cores[0].norm();
  if (norm <= 1e-14) return tt_zero(n, d);
  if (n == 1) return TTTensor(d, std::move(cores));

  const double budget_sq =
      trunc.tolerance ? std::pow(*trunc.tolerance * norm, 2) / static_cast<double>(n - 1) : 0.0;

  for (int l = 0; l < n - 1; ++l) {
    auto svd = thin_svd(cores[l]);
    const std::optional<int> cap = trunc.ranks ? std::optional<int>((*trunc.ranks)[l]) : std::nullopt;
    const int r = choose_rank(svd.s, cap, budget_sq);
    cores[l] = svd.u.leftCols(r);
    const CMatrix carry = svd.s.head(r).asDiagonal() * svd.v.leftCols(r).adjoint();
    const int left_next = static_cast<int>(cores[l + 1].rows()) / p;
    const int right_next = static_cast<int>(cores[l + 1].cols());
    CMatrix merged = carry * right_unfolding(cores[l + 1], left_next, p);
    CMatrix next(static_cast<Eigen::Index>(r) * p, right_next);
    Eigen::Map<CMatrix>(next.data(), r, static_cast<Eigen::Index>(p) * right_next) = merged;
    cores[l + 1] = std::move(next);
  }
  return TTTensor(d, std::move(cores));
}

TTTensor tt_adjoint(const TTTensor& a) {
  const int d = a.local_dim(), p = a.phys_dim();
  std::vector<CMatrix> cores;
  cores.reserve(a.sites());
  for (int l = 0; l < a.sites(); ++l) {
    const int left = a.left_rank(l);
    CMatrix c(a.core(l).rows(), a.core(l).cols());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        c.block(static_cast<Eigen::Index>(left) * (i + d * j), 0, left, c.cols()) =
            a.slice(l, j + d * i).conjugate();
    cores.push_back(std::move(c));
  }
  (void)p;
  return TTTensor(d, std::move(cores));
}

bool is_hermitian(const TTTensor& a, double tol) {
  return tt_distance(a, tt_adjoint(a)) <= tol * tt_norm(a);
}

std::vector<RVector> unfolding_singular_values(const CVector& fused, int n, int d) {
  const int p = d * d;
  require(fused.size() == ipow(p, n), "fused vector length must be (d^2)^n");
  std::vector<RVector> out;
  for (int l = 1; l < n; ++l) {
    Eigen::Map<const CMatrix> unf(fused.data(), ipow(p, l), ipow(p, n - l));
    Eigen::BDCSVD<CMatrix> svd(unf);
    out.push_back(svd.singularValues());
  }
  return out;
}

double smallest_tt_singular_value(const TTTensor& a, const std::vector<int>& ranks, int max_sites) {
  require(static_cast<int>(ranks.size()) == a.sites() - 1, "rank vector length must be n - 1");
  const auto svals = unfolding_singular_values(tt_to_fused(a, max_sites), a.sites(), a.local_dim());
  double best = std::numeric_limits<double>::infinity();
  for (size_t l = 0; l < svals.size(); ++l) {
    const int r = ranks[l];
    require(r >= 1, "ranks must be >= 1");
    const double v = r <= svals[l].size() ? svals[l](r - 1) : 0.0;
    best = std::min(best, v);
  }
  return best;
}

}  // namespace qst
