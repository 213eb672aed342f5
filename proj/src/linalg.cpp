#include "mafem/linalg.hpp"

#include <suitesparse/cholmod.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <mutex>
#include <string>
#include <vector>

namespace mafem {

struct Factorization::Impl {
  cholmod_common common{};
  cholmod_factor* factor = nullptr;
  int n = 0;
  FactorKind kind = FactorKind::positive_definite;
  int negative = 0;
  int positive = 0;
  double pivot_ratio = 0.0;
  // cholmod_solve uses workspace in `common`; serialize solves.
  mutable std::mutex mutex;

  Impl() { cholmod_start(&common); }
  ~Impl() {
    if (factor) cholmod_free_factor(&factor, &common);
    cholmod_finish(&common);
  }
};

namespace {

cholmod_sparse view_of(const SparseSym& m) {
  cholmod_sparse a{};
  a.nrow = static_cast<std::size_t>(m.rows());
  a.ncol = static_cast<std::size_t>(m.cols());
  a.nzmax = static_cast<std::size_t>(m.nonZeros());
  a.p = const_cast<int*>(m.outerIndexPtr());
  a.i = const_cast<int*>(m.innerIndexPtr());
  a.nz = nullptr;
  a.x = const_cast<double*>(m.valuePtr());
  a.z = nullptr;
  a.stype = 1; // upper triangle referenced
  a.itype = CHOLMOD_INT;
  a.xtype = CHOLMOD_REAL;
  a.dtype = CHOLMOD_DOUBLE;
  a.sorted = 0;
  a.packed = 1;
  return a;
}

cholmod_dense dense_view(const Vector& v) {
  cholmod_dense d{};
  d.nrow = static_cast<std::size_t>(v.size());
  d.ncol = 1;
  d.nzmax = d.nrow;
  d.d = d.nrow;
  d.x = const_cast<double*>(v.data());
  d.z = nullptr;
  d.xtype = CHOLMOD_REAL;
  d.dtype = CHOLMOD_DOUBLE;
  return d;
}

SparseSym probe_matrix() {
  // 7-point Laplacian on a 10^3 grid plus identity: large enough for the
  // supernodal path to hand dense blocks to BLAS.
  const int g = 10;
  auto id = [g](int i, int j, int k) { return (i * g + j) * g + k; };
  std::vector<Eigen::Triplet<double, int>> trip;
  auto link = [&trip](int r, int c) {
    trip.emplace_back(r, c, -1.0);
    trip.emplace_back(c, r, -1.0);
  };
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      for (int k = 0; k < g; ++k) {
        const int r = id(i, j, k);
        trip.emplace_back(r, r, 7.0);
        if (i + 1 < g) link(r, id(i + 1, j, k));
        if (j + 1 < g) link(r, id(i, j + 1, k));
        if (k + 1 < g) link(r, id(i, j, k + 1));
      }
    }
  }
  SparseSym a(g * g * g, g * g * g);
  a.setFromTriplets(trip.begin(), trip.end());
  a.makeCompressed();
  return a;
}

bool run_supernodal_probe() {
  if (const char* env = std::getenv("MAXWELL_AFEM_SUPERNODAL")) {
    if (std::string(env) == "0") return false;
  }
  const SparseSym a = probe_matrix();
  cholmod_common c{};
  cholmod_start(&c);
  c.print = 0;
  c.error_handler = nullptr;
  c.nmethods = 1;
  c.method[0].ordering = CHOLMOD_AMD;
  c.supernodal = CHOLMOD_SUPERNODAL;
  cholmod_sparse view = view_of(a);
  cholmod_factor* f = cholmod_analyze(&view, &c);
  bool ok = false;
  if (f) {
    cholmod_factorize(&view, f, &c);
    if (c.status == CHOLMOD_OK) {
      const Vector b = Vector::Ones(a.rows());
      cholmod_dense rhs = dense_view(b);
      if (cholmod_dense* x = cholmod_solve(CHOLMOD_A, f, &rhs, &c)) {
        const Vector xv = Eigen::Map<const Vector>(static_cast<const double*>(x->x), a.rows());
        const double res = (a * xv - b).norm() / b.norm();
        ok = std::isfinite(res) && res < 1e-10;
        cholmod_free_dense(&x, &c);
      }
    }
    cholmod_free_factor(&f, &c);
  }
  cholmod_finish(&c);
  return ok;
}

} // namespace

bool supernodal_available() {
  static const bool ok = run_supernodal_probe();
  return ok;
}

Factorization::Factorization(const SparseSym& matrix, FactorKind kind)
    : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols()) throw ArgumentError("factor: matrix not square");
  if (!matrix.isCompressed()) throw ArgumentError("factor: matrix must be compressed");
  impl_->n = static_cast<int>(matrix.rows());
  impl_->kind = kind;
  if (impl_->n == 0) return;

  cholmod_common& c = impl_->common;
  c.print = 0;
  c.error_handler = nullptr;
  c.nmethods = 1;
  c.method[0].ordering = CHOLMOD_AMD;
  c.postorder = 1;
  // CHOLMOD's LDL^T is simplicial only. Cholesky goes supernodal when the
  // BLAS passed the probe.
  if (kind == FactorKind::indefinite) {
    c.supernodal = CHOLMOD_SIMPLICIAL;
    c.final_ll = 0;
  } else {
    c.supernodal = supernodal_available() ? CHOLMOD_AUTO : CHOLMOD_SIMPLICIAL;
    c.final_ll = 1;
  }

  cholmod_sparse a = view_of(matrix);
  impl_->factor = cholmod_analyze(&a, &c);
  if (!impl_->factor) throw FactorizationError("factor: symbolic analysis failed");
  cholmod_factorize(&a, impl_->factor, &c);
  if (c.status == CHOLMOD_NOT_POSDEF) {
    throw FactorizationError(kind == FactorKind::indefinite
                                 ? "factor: zero pivot in LDL^T"
                                 : "factor: matrix is not positive definite");
  }
  if (c.status < CHOLMOD_OK) throw FactorizationError("factor: numeric factorization failed");

  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  if (kind == FactorKind::indefinite) {
    const cholmod_factor* f = impl_->factor;
    const auto* lp = static_cast<const int*>(f->p);
    const auto* lx = static_cast<const double*>(f->x);
    for (int j = 0; j < impl_->n; ++j) {
      const double d = lx[lp[j]];
      if (!std::isfinite(d) || d == 0.0) throw FactorizationError("factor: zero pivot in LDL^T");
      (d < 0 ? impl_->negative : impl_->positive) += 1;
      dmin = std::min(dmin, std::abs(d));
      dmax = std::max(dmax, std::abs(d));
    }
    impl_->pivot_ratio = dmin / dmax;
    if (impl_->pivot_ratio < 1e-14) throw FactorizationError("factor: near-zero pivot in LDL^T");
  } else {
    impl_->positive = impl_->n;
    impl_->pivot_ratio = std::numeric_limits<double>::quiet_NaN();
  }
}

Factorization::~Factorization() = default;
Factorization::Factorization(Factorization&&) noexcept = default;
Factorization& Factorization::operator=(Factorization&&) noexcept = default;

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != impl_->n) throw ArgumentError("solve: dimension mismatch");
  if (impl_->n == 0) return Vector();
  std::lock_guard<std::mutex> lock(impl_->mutex);
  cholmod_dense rhs = dense_view(b);
  cholmod_dense* x = cholmod_solve(CHOLMOD_A, impl_->factor, &rhs, &impl_->common);
  if (!x) throw FactorizationError("solve failed");
  Vector out = Eigen::Map<const Vector>(static_cast<const double*>(x->x), impl_->n);
  cholmod_free_dense(&x, &impl_->common);
  return out;
}

Vector Factorization::solve_refined(const SparseSym& matrix, const Vector& b) const {
  Vector x = solve(b);
  const Vector r = b - matrix * x;
  x += solve(r);
  return x;
}

int Factorization::dim() const { return impl_->n; }
FactorKind Factorization::kind() const { return impl_->kind; }
int Factorization::negative_pivots() const { return impl_->negative; }
int Factorization::positive_pivots() const { return impl_->positive; }
double Factorization::pivot_ratio() const { return impl_->pivot_ratio; }

Preconditioner jacobi_preconditioner(const SparseSym& matrix) {
  Vector inv = matrix.diagonal();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) != 0.0 ? 1.0 / inv(i) : 1.0;
  return [inv](const Vector& r) -> Vector { return inv.cwiseProduct(r); };
}

Preconditioner identity_preconditioner() {
  return [](const Vector& r) { return r; };
}

PcgResult pcg(const SparseSym& matrix, const Vector& b, const Preconditioner& precond,
              double tol, int maxit, const Vector* x0) {
  PcgResult res;
  const double bnorm = b.norm();
  res.x = x0 ? *x0 : Vector::Zero(b.size());
  if (bnorm == 0.0) {
    res.x.setZero();
    return res;
  }
  Vector r = b - matrix * res.x;
  res.relative_residual = r.norm() / bnorm;
  if (res.relative_residual <= tol) return res;
  Vector z = precond(r);
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= maxit; ++it) {
    const Vector ap = matrix * p;
    const double alpha = rz / p.dot(ap);
    res.x += alpha * p;
    r -= alpha * ap;
    res.iterations = it;
    res.relative_residual = r.norm() / bnorm;
    if (res.relative_residual <= tol) return res;
    z = precond(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  throw ConvergenceError("pcg: iteration limit reached", res.relative_residual);
}

double asymmetry(const SparseSym& matrix) {
  const SparseSym t = matrix.transpose();
  const SparseSym d = matrix - t;
  double m = 0.0;
  for (int k = 0; k < d.outerSize(); ++k) {
    for (SparseSym::InnerIterator it(d, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

} // namespace mafem
