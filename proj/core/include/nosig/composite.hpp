#pragma once

// Two particles, each with a lattice position and a spin-½, plus one
// detector qubit. Basis ordering (slowest first): x1, x2, s1, s2, q.

#include <functional>
#include <string_view>
#include <utility>
#include <vector>

#include "nosig/lattice.hpp"
#include "nosig/qcore.hpp"

namespace nosig {

enum class Statistics { fermion, boson, distinguishable };

std::string_view to_string(Statistics s);

enum class Particle { first = 1, second = 2 };

/// Which single-particle factor an operator addresses. `both` is the 2n-dim
/// position⊗spin space of one particle (position slowest).
enum class Factor { position, spin, both };

struct BasisLabel {
  Index x1 = 0;
  Index x2 = 0;
  int s1 = 0;
  int s2 = 0;
  int q = 0;

  bool operator==(const BasisLabel&) const = default;
};

class CompositeSpace {
 public:
  /// Number of (s1, s2, q) states per position pair.
  static constexpr Index kInternalDim = 8;

  explicit CompositeSpace(Index n);

  Index n() const { return n_; }
  Index dim() const { return n_ * n_ * kInternalDim; }
  BasisTag basis() const;

  /// idx = q + 2·(s2 + 2·(s1 + 2·(x2 + n·x1))). Throws std::out_of_range.
  Index index(const BasisLabel& b) const;
  BasisLabel decode(Index idx) const;

 private:
  Index n_;
};

Index basis_index(const CompositeSpace& space, Index x1, Index x2, int s1, int s2, int q);

/// Internal (s1, s2, q) index, s1 slowest.
constexpr Index internal_index(int s1, int s2, int q) { return q + 2 * (s2 + 2 * s1); }

/// Particle-exchange permutation S: |x1 x2 s1 s2 q⟩ ↦ |x2 x1 s2 s1 q⟩.
LinearOperator exchange_operator(const CompositeSpace& space);
/// S·s without materializing S.
StateVector exchange(const CompositeSpace& space, const StateVector& s);

/// (I − S)s normalized. Throws PreconditionError if ‖(I − S)s‖ ≤ 1e−10.
StateVector antisymmetrize(const CompositeSpace& space, const StateVector& s);
/// (I + S)s normalized. Throws PreconditionError if ‖(I + S)s‖ ≤ 1e−10.
StateVector symmetrize(const CompositeSpace& space, const StateVector& s);

/// ‖(I + S)s‖/2: zero exactly on the fermionic sector.
double antisymmetry_violation(const CompositeSpace& space, const StateVector& s);
/// ‖(I − S)s‖/2: zero exactly on the bosonic sector.
double symmetry_violation(const CompositeSpace& space, const StateVector& s);
/// Violation of the sector `stats` demands; always 0 for distinguishable.
double statistics_violation(const CompositeSpace& space, Statistics stats, const StateVector& s);

/// packet1 ⊗ packet2 on positions, spins |dd⟩, qubit |0⟩, projected onto the
/// sector of `stats`. Indistinguishable statistics require disjoint supports.
StateVector prepare_initial(const CompositeSpace& space, Statistics stats,
                            const StateVector& packet1, const StateVector& packet2);

/// Embeds a single-particle operator on the chosen particle and factor;
/// identity everywhere else, qubit untouched.
LinearOperator lift_one_particle(const CompositeSpace& space, const LinearOperator& op,
                                 Particle particle, Factor factor);

/// ‖S·op·S − op‖_F ≤ tol, evaluated exactly by index permutation.
bool is_exchange_symmetric(const CompositeSpace& space, const LinearOperator& op, double tol);

/// Operator block-diagonal in positions: `block(x1, x2)` returns the 8×8
/// action on (s1, s2, q) for that position pair.
LinearOperator position_controlled(const CompositeSpace& space,
                                   const std::function<DenseMatrix(Index x1, Index x2)>& block);

/// Embeds a two-spin operator (4×4, s1 slowest) into the 8-dim internal space.
DenseMatrix embed_spin_pair(const DenseMatrix& op4);
/// Embeds a (spin, qubit) operator (4×4, spin slowest) acting on the spin
/// of `particle` and the qubit.
DenseMatrix embed_spin_qubit(const DenseMatrix& op4, Particle particle);
/// Embeds a single-spin operator on `particle`.
DenseMatrix embed_spin(const DenseMatrix& op2, Particle particle);

/// Applies an n×n position operator to one particle, structured as a
/// matrix product along that axis (never forms the lifted operator).
StateVector apply_position_operator(const CompositeSpace& space, const DenseMatrix& a,
                                    Particle particle, const StateVector& s);
/// (U ⊗ U ⊗ I₈)·s.
StateVector evolve_positions(const CompositeSpace& space, const DenseMatrix& u,
                             const StateVector& s);

/// ⟨ψ|P₁^R P₂^R|ψ⟩.
double joint_occupancy(const CompositeSpace& space, const Region& r, const StateVector& psi);

/// lift(P^R, particle, position).
LinearOperator occupancy_projector(const CompositeSpace& space, const Region& r,
                                   Particle particle);
/// lift(P^R, 1) + lift(P^R, 2): counts particles in R (0, 1 or 2).
LinearOperator occupancy_count(const CompositeSpace& space, const Region& r);
/// Projector onto configurations with at least one particle in R.
LinearOperator any_occupancy_projector(const CompositeSpace& space, const Region& r);
/// Projector onto detector qubit value `q`.
LinearOperator qubit_projector(const CompositeSpace& space, int q);

/// Per-site marginal occupancy of each particle slot over an ensemble.
struct SiteMarginals {
  Eigen::VectorXd slot1;
  Eigen::VectorXd slot2;
};
SiteMarginals site_marginals(const CompositeSpace& space, const BranchEnsemble& e);

}  // namespace nosig
