#pragma once

// Basis-agnostic complex linear algebra: state vectors, operators,
// non-selective projective measurement and partial traces.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace nosig {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using Vector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

/// Raised when operands live on different bases or have incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an input violates a numerical precondition (normalization,
/// hermiticity, projector algebra).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Opaque label naming the basis convention a vector or operator lives on.
class BasisTag {
 public:
  BasisTag() = default;
  explicit BasisTag(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }
  bool operator==(const BasisTag&) const = default;

 private:
  std::string name_;
};

/// Tag of a tensor product, first factor slowest.
BasisTag tensor_tag(const BasisTag& a, const BasisTag& b);

class StateVector {
 public:
  StateVector(Vector amps, BasisTag basis);

  static StateVector basis_state(Index dim, Index index, BasisTag basis);

  Index dim() const { return amps_.size(); }
  const Vector& amps() const { return amps_; }
  Complex operator[](Index i) const { return amps_[i]; }
  const BasisTag& basis() const { return basis_; }

  double norm() const { return amps_.norm(); }
  double squared_norm() const { return amps_.squaredNorm(); }

  /// Throws PreconditionError on a (numerically) zero vector.
  StateVector normalized() const;

 private:
  Vector amps_;
  BasisTag basis_;
};

/// Complex matrix over a named basis.
///
/// Storage follows the operator, not the caller: small or well-filled
/// matrices are held dense, large sparse ones in compressed row form.
/// Results of arithmetic re-apply the same policy.
class LinearOperator {
 public:
  /// Matrices with at most this many entries are always stored dense.
  static constexpr Index kDenseEntryLimit = 256 * 256;
  /// Above the limit, a matrix filled beyond this fraction stays dense.
  static constexpr double kDenseFillFraction = 0.25;

  LinearOperator(DenseMatrix m, BasisTag basis);
  LinearOperator(SparseMatrix m, BasisTag basis);

  static LinearOperator identity(Index dim, BasisTag basis);
  static LinearOperator zero(Index dim, BasisTag basis);

  Index rows() const;
  Index cols() const;
  const BasisTag& basis() const { return basis_; }

  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(m_); }
  const DenseMatrix* dense_if() const { return std::get_if<DenseMatrix>(&m_); }
  const SparseMatrix* sparse_if() const { return std::get_if<SparseMatrix>(&m_); }

  DenseMatrix to_dense() const;
  SparseMatrix to_sparse() const;

  Complex coeff(Index r, Index c) const;
  Index nonzeros() const;

  LinearOperator adjoint() const;
  /// Frobenius norm.
  double norm() const;
  bool is_square() const { return rows() == cols(); }

  friend LinearOperator operator*(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator+(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator-(const LinearOperator& a, const LinearOperator& b);
  friend LinearOperator operator*(Complex s, const LinearOperator& a);

  /// Matrix-vector product on raw amplitudes; no basis checks.
  Vector multiply(const Vector& v) const;

 private:
  std::variant<DenseMatrix, SparseMatrix> m_;
  BasisTag basis_;
};

/// ‖A − A†‖_F.
double hermiticity_defect(const LinearOperator& a);
/// ‖A² − A‖_F + ‖A − A†‖_F.
double projector_defect(const LinearOperator& p);
/// ‖U†U − I‖_F.
double unitarity_defect(const LinearOperator& u);

LinearOperator tensor_product(const LinearOperator& a, const LinearOperator& b);
StateVector tensor_product(const StateVector& a, const StateVector& b);

/// Matrix-vector product; never normalizes.
StateVector apply(const LinearOperator& op, const StateVector& s);

Complex inner_product(const StateVector& a, const StateVector& b);

struct Branch {
  double weight;
  StateVector state;
};

/// Weighted list of normalized pure states: the result of a non-selective
/// measurement.
class BranchEnsemble {
 public:
  static constexpr double kWeightTolerance = 1e-10;

  explicit BranchEnsemble(std::vector<Branch> branches);
  static BranchEnsemble pure(StateVector s);

  const std::vector<Branch>& branches() const { return branches_; }
  std::size_t size() const { return branches_.size(); }
  const BasisTag& basis() const { return branches_.front().state.basis(); }
  Index dim() const { return branches_.front().state.dim(); }

  auto begin() const { return branches_.begin(); }
  auto end() const { return branches_.end(); }

 private:
  std::vector<Branch> branches_;
};

/// ⟨ψ|obs|ψ⟩ for Hermitian obs and normalized ψ; the imaginary residue is
/// checked and dropped.
double expectation(const LinearOperator& obs, const StateVector& s);
double expectation(const LinearOperator& obs, const BranchEnsemble& e);

/// Branches with ‖Pᵢψ‖² at or below this are dropped.
inline constexpr double kBranchPruneThreshold = 1e-14;

/// Non-selective Lüders update over a resolution of the identity.
BranchEnsemble luders_measure(std::span<const LinearOperator> projectors,
                              const StateVector& s);
BranchEnsemble luders_measure(std::span<const LinearOperator> projectors,
                              const BranchEnsemble& e);

/// Throws PreconditionError unless the set is a mutually orthogonal
/// resolution of the identity to `tol`.
void check_resolution_of_identity(std::span<const LinearOperator> projectors,
                                  double tol = 1e-10);

class DensityMatrix {
 public:
  explicit DensityMatrix(DenseMatrix rho);

  Index dim() const { return rho_.rows(); }
  const DenseMatrix& matrix() const { return rho_; }
  double trace() const { return rho_.trace().real(); }
  double expectation(const LinearOperator& obs) const;

 private:
  DenseMatrix rho_;
};

/// Partial trace keeping the factors listed in `keep` (indices into `dims`,
/// first factor slowest). Kept factors retain their relative order.
DensityMatrix reduced_density(const StateVector& s, std::span<const std::size_t> keep,
                              std::span<const Index> dims);
DensityMatrix reduced_density(const BranchEnsemble& e, std::span<const std::size_t> keep,
                              std::span<const Index> dims);

namespace spin {

/// Spin encoding: d ↦ 0, u ↦ 1, with σz|u⟩ = +|u⟩.
inline constexpr int kDown = 0;
inline constexpr int kUp = 1;

BasisTag tag();
StateVector up();
StateVector down();
LinearOperator sigma_x();
LinearOperator sigma_y();
LinearOperator sigma_z();
LinearOperator identity();

}  // namespace spin

}  // namespace nosig
