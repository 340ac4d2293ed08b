#include "nosig/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace nosig {

namespace {

constexpr double kNormalizationTolerance = 1e-10;
constexpr double kHermitianTolerance = 1e-10;

std::variant<DenseMatrix, SparseMatrix> choose_storage(DenseMatrix m) {
  const Index entries = m.rows() * m.cols();
  if (entries <= LinearOperator::kDenseEntryLimit) return m;
  const Index nnz = (m.array() != Complex(0.0)).count();
  if (static_cast<double>(nnz) > LinearOperator::kDenseFillFraction * entries) return m;
  SparseMatrix s = m.sparseView(Complex(1.0), 0.0);
  s.makeCompressed();
  return s;
}

std::variant<DenseMatrix, SparseMatrix> choose_storage(SparseMatrix m) {
  const Index entries = m.rows() * m.cols();
  m.prune(Complex(0.0));
  if (entries <= LinearOperator::kDenseEntryLimit ||
      static_cast<double>(m.nonZeros()) > LinearOperator::kDenseFillFraction * entries) {
    return DenseMatrix(m);
  }
  m.makeCompressed();
  return m;
}

void require_same_basis(const BasisTag& a, const BasisTag& b, const char* what) {
  if (!(a == b)) {
    throw DimensionError(std::string(what) + ": basis mismatch ('" + a.name() + "' vs '" +
                         b.name() + "')");
  }
}

std::string shape(Index r, Index c) {
  std::ostringstream os;
  os << r << "x" << c;
  return os.str();
}

}  // namespace

BasisTag tensor_tag(const BasisTag& a, const BasisTag& b) {
  return BasisTag(a.name() + "*" + b.name());
}

// ---------------------------------------------------------------------------
// StateVector

StateVector::StateVector(Vector amps, BasisTag basis)
    : amps_(std::move(amps)), basis_(std::move(basis)) {
  if (amps_.size() == 0) throw DimensionError("StateVector: empty amplitude array");
  if (!amps_.allFinite()) throw PreconditionError("StateVector: non-finite amplitude");
}

StateVector StateVector::basis_state(Index dim, Index index, BasisTag basis) {
  if (index < 0 || index >= dim) throw DimensionError("basis_state: index out of range");
  Vector v = Vector::Zero(dim);
  v[index] = 1.0;
  return {std::move(v), std::move(basis)};
}

StateVector StateVector::normalized() const {
  const double n = norm();
  if (!(n > 1e-300)) throw PreconditionError("normalize: zero-norm state");
  return {amps_ / n, basis_};
}

// ---------------------------------------------------------------------------
// LinearOperator

LinearOperator::LinearOperator(DenseMatrix m, BasisTag basis) : basis_(std::move(basis)) {
  if (m.rows() == 0 || m.cols() == 0) throw DimensionError("LinearOperator: empty matrix");
  if (!m.allFinite()) throw PreconditionError("LinearOperator: non-finite entry");
  m_ = choose_storage(std::move(m));
}

LinearOperator::LinearOperator(SparseMatrix m, BasisTag basis) : basis_(std::move(basis)) {
  if (m.rows() == 0 || m.cols() == 0) throw DimensionError("LinearOperator: empty matrix");
  for (Index k = 0; k < m.nonZeros(); ++k) {
    const Complex z = m.valuePtr()[k];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw PreconditionError("LinearOperator: non-finite entry");
    }
  }
  m_ = choose_storage(std::move(m));
}

LinearOperator LinearOperator::identity(Index dim, BasisTag basis) {
  SparseMatrix id(dim, dim);
  id.setIdentity();
  return {std::move(id), std::move(basis)};
}

LinearOperator LinearOperator::zero(Index dim, BasisTag basis) {
  return {SparseMatrix(dim, dim), std::move(basis)};
}

Index LinearOperator::rows() const {
  return std::visit([](const auto& m) { return m.rows(); }, m_);
}

Index LinearOperator::cols() const {
  return std::visit([](const auto& m) { return m.cols(); }, m_);
}

DenseMatrix LinearOperator::to_dense() const {
  if (const auto* d = dense_if()) return *d;
  return DenseMatrix(*sparse_if());
}

SparseMatrix LinearOperator::to_sparse() const {
  if (const auto* s = sparse_if()) return *s;
  SparseMatrix s = dense_if()->sparseView(Complex(1.0), 0.0);
  s.makeCompressed();
  return s;
}

Complex LinearOperator::coeff(Index r, Index c) const {
  return std::visit([&](const auto& m) -> Complex { return m.coeff(r, c); }, m_);
}

Index LinearOperator::nonzeros() const {
  if (const auto* s = sparse_if()) return s->nonZeros();
  return (dense_if()->array() != Complex(0.0)).count();
}

LinearOperator LinearOperator::adjoint() const {
  if (const auto* d = dense_if()) return {DenseMatrix(d->adjoint()), basis_};
  return {SparseMatrix(sparse_if()->adjoint()), basis_};
}

double LinearOperator::norm() const {
  return std::visit([](const auto& m) { return m.norm(); }, m_);
}

LinearOperator operator*(const LinearOperator& a, const LinearOperator& b) {
  require_same_basis(a.basis_, b.basis_, "operator product");
  if (a.cols() != b.rows()) {
    throw DimensionError("operator product: shapes " + shape(a.rows(), a.cols()) + " and " +
                         shape(b.rows(), b.cols()));
  }
  const auto* ad = a.dense_if();
  const auto* bd = b.dense_if();
  if (ad && bd) return {DenseMatrix(*ad * *bd), a.basis_};
  if (!ad && !bd) return {SparseMatrix(*a.sparse_if() * *b.sparse_if()), a.basis_};
  if (ad) return {DenseMatrix(*ad * *b.sparse_if()), a.basis_};
  return {DenseMatrix(*a.sparse_if() * *bd), a.basis_};
}

namespace {

template <typename Op>
LinearOperator combine(const LinearOperator& a, const LinearOperator& b, Op op, const char* what) {
  require_same_basis(a.basis(), b.basis(), what);
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shapes " + shape(a.rows(), a.cols()) + " and " +
                         shape(b.rows(), b.cols()));
  }
  if (!a.is_sparse() || !b.is_sparse()) {
    return {DenseMatrix(op(a.to_dense(), b.to_dense())), a.basis()};
  }
  return {SparseMatrix(op(*a.sparse_if(), *b.sparse_if())), a.basis()};
}

}  // namespace

LinearOperator operator+(const LinearOperator& a, const LinearOperator& b) {
  return combine(a, b, [](const auto& x, const auto& y) { return x + y; }, "operator sum");
}

LinearOperator operator-(const LinearOperator& a, const LinearOperator& b) {
  return combine(a, b, [](const auto& x, const auto& y) { return x - y; }, "operator difference");
}

LinearOperator operator*(Complex s, const LinearOperator& a) {
  if (const auto* d = a.dense_if()) return {DenseMatrix(s * *d), a.basis_};
  return {SparseMatrix(s * *a.sparse_if()), a.basis_};
}

Vector LinearOperator::multiply(const Vector& v) const {
  return std::visit([&](const auto& m) -> Vector { return m * v; }, m_);
}

double hermiticity_defect(const LinearOperator& a) {
  if (!a.is_square()) return std::numeric_limits<double>::infinity();
  return (a - a.adjoint()).norm();
}

double projector_defect(const LinearOperator& p) {
  if (!p.is_square()) return std::numeric_limits<double>::infinity();
  return (p * p - p).norm() + hermiticity_defect(p);
}

double unitarity_defect(const LinearOperator& u) {
  if (!u.is_square()) return std::numeric_limits<double>::infinity();
  return (u.adjoint() * u - LinearOperator::identity(u.rows(), u.basis())).norm();
}

// ---------------------------------------------------------------------------
// Tensor products

LinearOperator tensor_product(const LinearOperator& a, const LinearOperator& b) {
  const Index rb = b.rows();
  const Index cb = b.cols();
  const BasisTag tag = tensor_tag(a.basis(), b.basis());
  if (!a.is_sparse() && !b.is_sparse() &&
      a.rows() * rb * a.cols() * cb <= LinearOperator::kDenseEntryLimit) {
    const DenseMatrix& da = *a.dense_if();
    const DenseMatrix& db = *b.dense_if();
    DenseMatrix out(a.rows() * rb, a.cols() * cb);
    for (Index i = 0; i < da.rows(); ++i) {
      for (Index j = 0; j < da.cols(); ++j) {
        out.block(i * rb, j * cb, rb, cb) = da(i, j) * db;
      }
    }
    return {std::move(out), tag};
  }
  const SparseMatrix sa = a.to_sparse();
  const SparseMatrix sb = b.to_sparse();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(sa.nonZeros() * sb.nonZeros()));
  for (Index i = 0; i < sa.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator ia(sa, i); ia; ++ia) {
      for (Index k = 0; k < sb.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator ib(sb, k); ib; ++ib) {
          trips.emplace_back(ia.row() * rb + ib.row(), ia.col() * cb + ib.col(),
                             ia.value() * ib.value());
        }
      }
    }
  }
  SparseMatrix out(a.rows() * rb, a.cols() * cb);
  out.setFromTriplets(trips.begin(), trips.end());
  return {std::move(out), tag};
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
  Vector out(a.dim() * b.dim());
  for (Index i = 0; i < a.dim(); ++i) {
    out.segment(i * b.dim(), b.dim()) = a[i] * b.amps();
  }
  return {std::move(out), tensor_tag(a.basis(), b.basis())};
}

StateVector apply(const LinearOperator& op, const StateVector& s) {
  require_same_basis(op.basis(), s.basis(), "apply");
  if (op.cols() != s.dim()) {
    throw DimensionError("apply: operator " + shape(op.rows(), op.cols()) +
                         " on state of dimension " + std::to_string(s.dim()));
  }
  return {op.multiply(s.amps()), s.basis()};
}

Complex inner_product(const StateVector& a, const StateVector& b) {
  require_same_basis(a.basis(), b.basis(), "inner_product");
  if (a.dim() != b.dim()) throw DimensionError("inner_product: dimension mismatch");
  return a.amps().dot(b.amps());
}

// ---------------------------------------------------------------------------
// BranchEnsemble

BranchEnsemble::BranchEnsemble(std::vector<Branch> branches) : branches_(std::move(branches)) {
  if (branches_.empty()) throw PreconditionError("BranchEnsemble: no branches");
  double total = 0.0;
  for (const auto& b : branches_) {
    if (!(b.weight >= 0.0) || !std::isfinite(b.weight)) {
      throw PreconditionError("BranchEnsemble: negative or non-finite weight");
    }
    if (std::abs(b.state.norm() - 1.0) > kNormalizationTolerance) {
      throw PreconditionError("BranchEnsemble: branch state not normalized");
    }
    if (!(b.state.basis() == branches_.front().state.basis()) ||
        b.state.dim() != branches_.front().state.dim()) {
      throw DimensionError("BranchEnsemble: branches on different bases");
    }
    total += b.weight;
  }
  if (std::abs(total - 1.0) > kWeightTolerance) {
    throw PreconditionError("BranchEnsemble: weights sum to " + std::to_string(total));
  }
}

BranchEnsemble BranchEnsemble::pure(StateVector s) {
  std::vector<Branch> b;
  b.push_back({1.0, std::move(s)});
  return BranchEnsemble(std::move(b));
}

// ---------------------------------------------------------------------------
// Expectation values

namespace {

void require_hermitian(const LinearOperator& obs) {
  const double defect = hermiticity_defect(obs);
  if (defect > kHermitianTolerance) {
    throw PreconditionError("expectation: observable is not Hermitian (defect " +
                            std::to_string(defect) + ")");
  }
}

double expectation_unchecked(const LinearOperator& obs, const StateVector& s) {
  require_same_basis(obs.basis(), s.basis(), "expectation");
  if (obs.cols() != s.dim()) throw DimensionError("expectation: dimension mismatch");
  if (std::abs(s.norm() - 1.0) > kNormalizationTolerance) {
    throw PreconditionError("expectation: state not normalized");
  }
  const Complex v = s.amps().dot(obs.multiply(s.amps()));
  if (std::abs(v.imag()) > kHermitianTolerance * std::max(1.0, obs.norm())) {
    throw PreconditionError("expectation: imaginary residue above tolerance");
  }
  return v.real();
}

}  // namespace

double expectation(const LinearOperator& obs, const StateVector& s) {
  require_hermitian(obs);
  return expectation_unchecked(obs, s);
}

double expectation(const LinearOperator& obs, const BranchEnsemble& e) {
  require_hermitian(obs);
  double total = 0.0;
  for (const auto& b : e) total += b.weight * expectation_unchecked(obs, b.state);
  return total;
}

// ---------------------------------------------------------------------------
// Lüders measurement

void check_resolution_of_identity(std::span<const LinearOperator> projectors, double tol) {
  if (projectors.empty()) throw PreconditionError("luders_measure: empty projector set");
  const auto& first = projectors.front();
  if (!first.is_square()) throw DimensionError("luders_measure: non-square projector");
  LinearOperator sum = LinearOperator::zero(first.rows(), first.basis());
  for (const auto& p : projectors) {
    if (!(p.basis() == first.basis()) || p.rows() != first.rows() || !p.is_square()) {
      throw DimensionError("luders_measure: projectors on different spaces");
    }
    if (hermiticity_defect(p) > tol) {
      throw PreconditionError("luders_measure: projector is not Hermitian");
    }
    sum = sum + p;
  }
  const double completeness =
      (sum - LinearOperator::identity(first.rows(), first.basis())).norm();
  if (completeness > tol) {
    throw PreconditionError("luders_measure: projectors do not sum to the identity (defect " +
                            std::to_string(completeness) + ")");
  }
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    for (std::size_t j = i + 1; j < projectors.size(); ++j) {
      if ((projectors[i] * projectors[j]).norm() > tol) {
        throw PreconditionError("luders_measure: projectors are not mutually orthogonal");
      }
    }
  }
}

namespace {

std::vector<Branch> split_branch(std::span<const LinearOperator> projectors, double weight,
                                 const StateVector& s) {
  std::vector<Branch> out;
  for (const auto& p : projectors) {
    StateVector projected = apply(p, s);
    const double prob = projected.squared_norm();
    if (prob > kBranchPruneThreshold) {
      out.push_back({weight * prob, projected.normalized()});
    }
  }
  return out;
}

BranchEnsemble renormalized(std::vector<Branch> branches) {
  double total = 0.0;
  for (const auto& b : branches) total += b.weight;
  if (!(total > 0.0)) throw PreconditionError("luders_measure: every branch was pruned");
  for (auto& b : branches) b.weight /= total;
  return BranchEnsemble(std::move(branches));
}

}  // namespace

BranchEnsemble luders_measure(std::span<const LinearOperator> projectors, const StateVector& s) {
  check_resolution_of_identity(projectors);
  if (std::abs(s.norm() - 1.0) > kNormalizationTolerance) {
    throw PreconditionError("luders_measure: state not normalized");
  }
  return renormalized(split_branch(projectors, 1.0, s));
}

BranchEnsemble luders_measure(std::span<const LinearOperator> projectors,
                              const BranchEnsemble& e) {
  check_resolution_of_identity(projectors);
  std::vector<Branch> out;
  for (const auto& b : e) {
    auto split = split_branch(projectors, b.weight, b.state);
    std::move(split.begin(), split.end(), std::back_inserter(out));
  }
  return renormalized(std::move(out));
}

// ---------------------------------------------------------------------------
// Density matrices

DensityMatrix::DensityMatrix(DenseMatrix rho) : rho_(std::move(rho)) {
  if (rho_.rows() == 0 || rho_.rows() != rho_.cols()) {
    throw DimensionError("DensityMatrix: not square");
  }
  if ((rho_ - rho_.adjoint()).norm() > 1e-12) {
    throw PreconditionError("DensityMatrix: not Hermitian");
  }
  if (std::abs(trace() - 1.0) > 1e-10) {
    throw PreconditionError("DensityMatrix: trace is " + std::to_string(trace()));
  }
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(rho_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw PreconditionError("DensityMatrix: negative eigenvalue");
  }
}

double DensityMatrix::expectation(const LinearOperator& obs) const {
  if (obs.rows() != dim() || !obs.is_square()) {
    throw DimensionError("DensityMatrix::expectation: dimension mismatch");
  }
  require_hermitian(obs);
  return (obs.to_dense() * rho_).trace().real();
}

namespace {

struct TraceLayout {
  Index keep_dim = 1;
  Index rest_dim = 1;
  std::vector<Index> keep_index;  // full index -> kept index
  std::vector<Index> rest_index;  // full index -> traced index
};

TraceLayout make_layout(Index dim, std::span<const std::size_t> keep, std::span<const Index> dims) {
  if (dims.empty()) throw DimensionError("reduced_density: no factors");
  Index product = 1;
  for (Index d : dims) {
    if (d <= 0) throw DimensionError("reduced_density: non-positive factor dimension");
    product *= d;
  }
  if (product != dim) {
    throw DimensionError("reduced_density: factor dimensions multiply to " +
                         std::to_string(product) + ", state has " + std::to_string(dim));
  }
  std::vector<bool> kept(dims.size(), false);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= dims.size()) throw DimensionError("reduced_density: factor out of range");
    if (i > 0 && keep[i] <= keep[i - 1]) {
      throw DimensionError("reduced_density: kept factors must be strictly increasing");
    }
    kept[keep[i]] = true;
  }

  TraceLayout layout;
  for (std::size_t f = 0; f < dims.size(); ++f) {
    (kept[f] ? layout.keep_dim : layout.rest_dim) *= dims[f];
  }
  layout.keep_index.resize(static_cast<std::size_t>(dim));
  layout.rest_index.resize(static_cast<std::size_t>(dim));
  std::vector<Index> digit(dims.size(), 0);
  for (Index idx = 0; idx < dim; ++idx) {
    Index k = 0;
    Index r = 0;
    for (std::size_t f = 0; f < dims.size(); ++f) {
      if (kept[f]) {
        k = k * dims[f] + digit[f];
      } else {
        r = r * dims[f] + digit[f];
      }
    }
    layout.keep_index[static_cast<std::size_t>(idx)] = k;
    layout.rest_index[static_cast<std::size_t>(idx)] = r;
    for (std::size_t f = dims.size(); f-- > 0;) {
      if (++digit[f] < dims[f]) break;
      digit[f] = 0;
    }
  }
  return layout;
}

void accumulate(DenseMatrix& rho, const TraceLayout& layout, double weight, const Vector& amps) {
  DenseMatrix m = DenseMatrix::Zero(layout.keep_dim, layout.rest_dim);
  for (Index i = 0; i < amps.size(); ++i) {
    const auto u = static_cast<std::size_t>(i);
    m(layout.keep_index[u], layout.rest_index[u]) = amps[i];
  }
  rho.noalias() += weight * (m * m.adjoint());
}

DensityMatrix finish(DenseMatrix rho) {
  DenseMatrix sym = 0.5 * (rho + rho.adjoint());
  return DensityMatrix(std::move(sym));
}

}  // namespace

DensityMatrix reduced_density(const StateVector& s, std::span<const std::size_t> keep,
                              std::span<const Index> dims) {
  const TraceLayout layout = make_layout(s.dim(), keep, dims);
  DenseMatrix rho = DenseMatrix::Zero(layout.keep_dim, layout.keep_dim);
  accumulate(rho, layout, 1.0, s.amps());
  return finish(std::move(rho));
}

DensityMatrix reduced_density(const BranchEnsemble& e, std::span<const std::size_t> keep,
                              std::span<const Index> dims) {
  const TraceLayout layout = make_layout(e.dim(), keep, dims);
  DenseMatrix rho = DenseMatrix::Zero(layout.keep_dim, layout.keep_dim);
  for (const auto& b : e) accumulate(rho, layout, b.weight, b.state.amps());
  return finish(std::move(rho));
}

// ---------------------------------------------------------------------------
// Single-spin conveniences

namespace spin {

BasisTag tag() { return BasisTag("spin"); }

StateVector up() { return StateVector::basis_state(2, kUp, tag()); }
StateVector down() { return StateVector::basis_state(2, kDown, tag()); }

LinearOperator sigma_x() {
  DenseMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return {std::move(m), tag()};
}

LinearOperator sigma_y() {
  // Rows/cols ordered (d, u): σy|u⟩ = i|d⟩, σy|d⟩ = −i|u⟩.
  const Complex i(0.0, 1.0);
  DenseMatrix m(2, 2);
  m << 0.0, i, -i, 0.0;
  return {std::move(m), tag()};
}

LinearOperator sigma_z() {
  DenseMatrix m(2, 2);
  m << -1.0, 0.0, 0.0, 1.0;
  return {std::move(m), tag()};
}

LinearOperator identity() { return {DenseMatrix(DenseMatrix::Identity(2, 2)), tag()}; }

}  // namespace spin

}  // namespace nosig
