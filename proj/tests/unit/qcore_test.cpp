#include "nosig/qcore.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "nosig/protocol.hpp"
#include "test_util.hpp"

namespace nosig {
namespace {

const BasisTag kPair = tensor_tag(spin::tag(), spin::tag());

StateVector two_spin(int s1, int s2) {
  return tensor_product(s1 == spin::kUp ? spin::up() : spin::down(),
                        s2 == spin::kUp ? spin::up() : spin::down());
}

std::vector<LinearOperator> bell_pair() {
  const LinearOperator pb = bell_projector();
  return {pb, LinearOperator::identity(4, pb.basis()) - pb};
}

TEST(TensorProduct, IdentityTimesIdentity) {
  const LinearOperator i4 = tensor_product(spin::identity(), spin::identity());
  EXPECT_EQ(i4.rows(), 4);
  EXPECT_LT((i4.to_dense() - DenseMatrix::Identity(4, 4)).norm(), 1e-15);
  EXPECT_EQ(i4.basis(), kPair);
}

TEST(TensorProduct, StateIndexFirstFactorSlowest) {
  // u = 1, d = 0: |u⟩⊗|d⟩ sits at 1·2 + 0.
  const StateVector ud = tensor_product(spin::up(), spin::down());
  EXPECT_EQ(ud.dim(), 4);
  EXPECT_EQ(ud[2], Complex(1.0));
  EXPECT_NEAR(ud.norm(), 1.0, 1e-15);
}

TEST(TensorProduct, FlipBothTakesDownDownToUpUp) {
  // σx⊗σx written out by hand: anti-diagonal ones.
  DenseMatrix hand = DenseMatrix::Zero(4, 4);
  for (int i = 0; i < 4; ++i) hand(i, 3 - i) = 1.0;
  const LinearOperator xx = tensor_product(spin::sigma_x(), spin::sigma_x());
  EXPECT_LT((xx.to_dense() - hand).norm(), 1e-15);
  const StateVector out = apply(xx, two_spin(spin::kDown, spin::kDown));
  EXPECT_LT((out.amps() - two_spin(spin::kUp, spin::kUp).amps()).norm(), 1e-15);
}

TEST(TensorProduct, AssociativeOnRandomMatrices) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const BasisTag t("m");
    const LinearOperator a(testing::random_matrix(rng, 2, 3), t);
    const LinearOperator b(testing::random_matrix(rng, 3, 2), t);
    const LinearOperator c(testing::random_matrix(rng, 2, 2), t);
    const DenseMatrix left = tensor_product(tensor_product(a, b), c).to_dense();
    const DenseMatrix right = tensor_product(a, tensor_product(b, c)).to_dense();
    EXPECT_LT((left - right).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(TensorProduct, SparseOperandsMatchDense) {
  std::mt19937_64 rng(3);
  const BasisTag t("m");
  const DenseMatrix a = testing::random_matrix(rng, 300, 300);
  const SparseMatrix b = testing::random_matrix(rng, 2, 2).sparseView();
  const LinearOperator sparse_a(SparseMatrix(a.sparseView()), t);
  const LinearOperator out = tensor_product(sparse_a, LinearOperator(b, t));
  EXPECT_EQ(out.rows(), 600);
  const DenseMatrix db(b);
  EXPECT_NEAR(std::abs(out.coeff(2 * 7 + 1, 2 * 5 + 0) - a(7, 5) * db(1, 0)), 0.0, 1e-14);
}

TEST(Apply, IdentityLeavesStateAlone) {
  std::mt19937_64 rng(1);
  const StateVector s = testing::random_state(rng, 4, kPair);
  const StateVector out = apply(LinearOperator::identity(4, kPair), s);
  EXPECT_EQ((out.amps() - s.amps()).norm(), 0.0);
}

TEST(Apply, BellProjectorKillsUpDown) {
  const StateVector out = apply(bell_projector(), two_spin(spin::kUp, spin::kDown));
  EXPECT_EQ(out.norm(), 0.0);
}

TEST(Apply, BellProjectorHalvesDownDown) {
  // ⟨B|dd⟩ = 1/√2, so ‖P_B|dd⟩‖² = |⟨B|dd⟩|² = 1/2.
  const StateVector out = apply(bell_projector(), two_spin(spin::kDown, spin::kDown));
  EXPECT_NEAR(out.squared_norm(), 0.5, 1e-15);
}

TEST(Apply, DoesNotNormalize) {
  const StateVector out = apply(0.5 * spin::identity(), spin::up());
  EXPECT_NEAR(out.norm(), 0.5, 1e-15);
}

TEST(Apply, RejectsShapeAndBasisMismatch) {
  EXPECT_THROW(apply(spin::sigma_x(), two_spin(0, 0)), DimensionError);
  const LinearOperator other(DenseMatrix(DenseMatrix::Identity(2, 2)), BasisTag("qubit"));
  EXPECT_THROW(apply(other, spin::up()), DimensionError);
}

TEST(Apply, UnitariesPreserveNorm) {
  std::mt19937_64 rng(5);
  const BasisTag t("r");
  for (int trial = 0; trial < 50; ++trial) {
    const Index dim = 2 + trial % 30;
    const LinearOperator u(testing::random_unitary(rng, dim), t);
    const StateVector s = testing::random_state(rng, dim, t);
    EXPECT_NEAR(apply(u, s).norm(), s.norm(), 1e-12);
  }
}

TEST(Expectation, IdentityIsOne) {
  std::mt19937_64 rng(2);
  const StateVector s = testing::random_state(rng, 4, kPair);
  EXPECT_NEAR(expectation(LinearOperator::identity(4, kPair), s), 1.0, 1e-14);
}

TEST(Expectation, SigmaZConvention) {
  EXPECT_DOUBLE_EQ(expectation(spin::sigma_z(), spin::down()), -1.0);
  EXPECT_DOUBLE_EQ(expectation(spin::sigma_z(), spin::up()), 1.0);
}

TEST(Expectation, EvenMixtureOfSigmaZEigenstates) {
  const BranchEnsemble e({{0.5, spin::up()}, {0.5, spin::down()}});
  EXPECT_NEAR(expectation(spin::sigma_z(), e), 0.0, 1e-15);
}

TEST(Expectation, RejectsNonHermitianAndUnnormalized) {
  DenseMatrix m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  EXPECT_THROW(expectation(LinearOperator(m, spin::tag()), spin::up()), PreconditionError);
  const StateVector doubled(2.0 * spin::up().amps(), spin::tag());
  EXPECT_THROW(expectation(spin::sigma_z(), doubled), PreconditionError);
}

TEST(Luders, BellOnDownDownSplitsEvenly) {
  const auto ps = bell_pair();
  const BranchEnsemble e = luders_measure(ps, two_spin(spin::kDown, spin::kDown));
  ASSERT_EQ(e.size(), 2u);
  EXPECT_NEAR(e.branches()[0].weight, 0.5, 1e-15);
  EXPECT_NEAR(e.branches()[1].weight, 0.5, 1e-15);
}

TEST(Luders, BellOnUpDownLeavesSingleBranch) {
  const auto ps = bell_pair();
  const StateVector ud = two_spin(spin::kUp, spin::kDown);
  const BranchEnsemble e = luders_measure(ps, ud);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_DOUBLE_EQ(e.branches()[0].weight, 1.0);
  EXPECT_LT((e.branches()[0].state.amps() - ud.amps()).norm(), 1e-15);
}

TEST(Luders, TrivialMeasurement) {
  std::mt19937_64 rng(4);
  const StateVector s = testing::random_state(rng, 4, kPair);
  const std::vector<LinearOperator> ps{LinearOperator::identity(4, kPair)};
  const BranchEnsemble e = luders_measure(ps, s);
  ASSERT_EQ(e.size(), 1u);
  EXPECT_LT((e.branches()[0].state.amps() - s.amps()).norm(), 1e-15);
}

TEST(Luders, RejectsIncompleteOrOverlappingSets) {
  const LinearOperator pb = bell_projector();
  const std::vector<LinearOperator> incomplete{pb};
  EXPECT_THROW(luders_measure(incomplete, two_spin(0, 0)), PreconditionError);
  // Two halves of the identity: complete and Hermitian, but not orthogonal.
  const LinearOperator half = 0.5 * LinearOperator::identity(4, pb.basis());
  const std::vector<LinearOperator> overlapping{half, half};
  EXPECT_THROW(check_resolution_of_identity(overlapping), PreconditionError);
  EXPECT_THROW(luders_measure(overlapping, two_spin(0, 0)), PreconditionError);
}

TEST(Luders, WeightsSumToOneOverRandomProjectorPairs) {
  std::mt19937_64 rng(2024);
  const BasisTag t("r");
  for (int trial = 0; trial < 300; ++trial) {
    const Index dim = 2 + trial % 15;
    const Index rank = 1 + trial % (dim - 1);
    const LinearOperator p(testing::random_projector(rng, dim, rank), t);
    const std::vector<LinearOperator> ps{p, LinearOperator::identity(dim, t) - p};
    const StateVector s = testing::random_state(rng, dim, t);
    const BranchEnsemble e = luders_measure(ps, s);
    ASSERT_EQ(e.size(), 2u);
    double total = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      // Born weight ⟨ψ|Pᵢ|ψ⟩ computed independently of the update.
      EXPECT_NEAR(e.branches()[i].weight, expectation(ps[i], s), 1e-12);
      total += expectation(ps[i], s);
    }
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

TEST(Luders, NonSelectiveConsistency) {
  // ⟨obs⟩ after the update equals Σᵢ ⟨ψ|Pᵢ obs Pᵢ|ψ⟩.
  std::mt19937_64 rng(99);
  const BasisTag t("r");
  for (int trial = 0; trial < 100; ++trial) {
    const Index dim = 3 + trial % 8;
    const DenseMatrix p = testing::random_projector(rng, dim, 1 + trial % (dim - 1));
    const DenseMatrix q = DenseMatrix::Identity(dim, dim) - p;
    const DenseMatrix obs = testing::random_hermitian(rng, dim);
    const StateVector s = testing::random_state(rng, dim, t);
    const std::vector<LinearOperator> ps{LinearOperator(p, t), LinearOperator(q, t)};
    const double lhs = expectation(LinearOperator(obs, t), luders_measure(ps, s));
    const Vector& v = s.amps();
    const double rhs = (v.dot(p * obs * p * v) + v.dot(q * obs * q * v)).real();
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(ReducedDensity, ProductStateKeepsFactor) {
  const std::vector<Index> dims{2, 2};
  const std::vector<std::size_t> keep{1};
  const DensityMatrix rho = reduced_density(two_spin(spin::kUp, spin::kDown), keep, dims);
  DenseMatrix expected = DenseMatrix::Zero(2, 2);
  expected(spin::kDown, spin::kDown) = 1.0;
  EXPECT_LT((rho.matrix() - expected).norm(), 1e-15);
}

TEST(ReducedDensity, BellStateMatchesExplicitPartialTrace) {
  Vector b = Vector::Zero(4);
  b[0] = b[3] = 1.0 / std::sqrt(2.0);
  const StateVector bell(b, kPair);
  // Oracle: ρ_A[i][j] = Σ_k ψ[2i+k] ψ*[2j+k], ρ_B[i][j] = Σ_k ψ[2k+i] ψ*[2k+j].
  DenseMatrix oracle_a = DenseMatrix::Zero(2, 2);
  DenseMatrix oracle_b = DenseMatrix::Zero(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        oracle_a(i, j) += b[2 * i + k] * std::conj(b[2 * j + k]);
        oracle_b(i, j) += b[2 * k + i] * std::conj(b[2 * k + j]);
      }
    }
  }
  const std::vector<Index> dims{2, 2};
  const std::vector<std::size_t> keep_a{0};
  const std::vector<std::size_t> keep_b{1};
  EXPECT_LT((reduced_density(bell, keep_a, dims).matrix() - oracle_a).norm(), 1e-15);
  EXPECT_LT((reduced_density(bell, keep_b, dims).matrix() - oracle_b).norm(), 1e-15);
  EXPECT_LT((oracle_a - 0.5 * DenseMatrix::Identity(2, 2)).norm(), 1e-15);
}

TEST(ReducedDensity, MeasuredDownDownIsMaximallyMixed) {
  // Without a kick every observable on spin 2 averages to ½ tr C.
  const auto ps = bell_pair();
  const BranchEnsemble e = luders_measure(ps, two_spin(spin::kDown, spin::kDown));
  const std::vector<Index> dims{2, 2};
  const std::vector<std::size_t> keep{1};
  const DensityMatrix rho = reduced_density(e, keep, dims);
  EXPECT_LT((rho.matrix() - 0.5 * DenseMatrix::Identity(2, 2)).norm(), 1e-14);
}

TEST(ReducedDensity, ThreeFactorsAgreeWithFullExpectation) {
  std::mt19937_64 rng(8);
  const StateVector s = testing::random_state(rng, 2 * 3 * 4, BasisTag("r"));
  const std::vector<Index> dims{2, 3, 4};
  const std::vector<std::size_t> keep{0, 2};
  const DensityMatrix rho = reduced_density(s, keep, dims);
  const DenseMatrix a = testing::random_hermitian(rng, 2);
  const DenseMatrix c = testing::random_hermitian(rng, 4);
  // Full observable a ⊗ I₃ ⊗ c.
  const BasisTag t("r");
  const LinearOperator full = tensor_product(
      tensor_product(LinearOperator(a, t), LinearOperator(DenseMatrix(DenseMatrix::Identity(3, 3)), t)),
      LinearOperator(c, t));
  const LinearOperator full_tagged(full.to_dense(), t);
  const LinearOperator reduced(DenseMatrix(tensor_product(LinearOperator(a, t), LinearOperator(c, t)).to_dense()), t);
  EXPECT_NEAR(rho.expectation(reduced), expectation(full_tagged, s), 1e-12);
}

TEST(ReducedDensity, RejectsDimensionMismatch) {
  const std::vector<Index> dims{2, 3};
  const std::vector<std::size_t> keep{0};
  EXPECT_THROW(reduced_density(two_spin(0, 0), keep, dims), DimensionError);
}

TEST(BranchEnsemble, RejectsBadWeights) {
  EXPECT_THROW(BranchEnsemble({{0.7, spin::up()}, {0.2, spin::down()}}), PreconditionError);
  EXPECT_THROW(BranchEnsemble({{-0.5, spin::up()}, {1.5, spin::down()}}), PreconditionError);
  EXPECT_THROW(BranchEnsemble(std::vector<Branch>{}), PreconditionError);
}

TEST(LinearOperator, StoragePolicy) {
  EXPECT_FALSE(spin::sigma_x().is_sparse());
  const LinearOperator big = LinearOperator::identity(1000, BasisTag("b"));
  EXPECT_TRUE(big.is_sparse());
  EXPECT_EQ(big.nonzeros(), 1000);
}

TEST(StateVector, RejectsNonFinite) {
  Vector v = Vector::Zero(2);
  v[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(StateVector(v, spin::tag()), PreconditionError);
  EXPECT_THROW(StateVector(Vector::Zero(2), spin::tag()).normalized(), PreconditionError);
}

}  // namespace
}  // namespace nosig
