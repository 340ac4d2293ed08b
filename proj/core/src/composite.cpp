#include "nosig/composite.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace nosig {

namespace {

constexpr double kSectorZeroNorm = 1e-10;

void require_on_space(const CompositeSpace& space, const StateVector& s, const char* what) {
  if (s.dim() != space.dim() || !(s.basis() == space.basis())) {
    throw DimensionError(std::string(what) + ": state is not on " + space.basis().name());
  }
}

void require_on_space(const CompositeSpace& space, const LinearOperator& op, const char* what) {
  if (op.rows() != space.dim() || op.cols() != space.dim() || !(op.basis() == space.basis())) {
    throw DimensionError(std::string(what) + ": operator is not on " + space.basis().name());
  }
}

Index swapped_index(const CompositeSpace& space, Index idx) {
  const BasisLabel b = space.decode(idx);
  return space.index({b.x2, b.x1, b.s2, b.s1, b.q});
}

Vector exchanged(const CompositeSpace& space, const Vector& v) {
  const Index n = space.n();
  constexpr Index k = CompositeSpace::kInternalDim;
  Vector out(v.size());
  for (Index x1 = 0; x1 < n; ++x1) {
    for (Index x2 = 0; x2 < n; ++x2) {
      const Index src = k * (x2 + n * x1);
      const Index dst = k * (x1 + n * x2);
      for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) {
          for (int q = 0; q < 2; ++q) {
            out[dst + internal_index(s2, s1, q)] = v[src + internal_index(s1, s2, q)];
          }
        }
      }
    }
  }
  return out;
}

std::vector<bool> support_of(const StateVector& packet) {
  std::vector<bool> on(static_cast<std::size_t>(packet.dim()));
  for (Index x = 0; x < packet.dim(); ++x) on[static_cast<std::size_t>(x)] = packet[x] != 0.0;
  return on;
}

}  // namespace

std::string_view to_string(Statistics s) {
  switch (s) {
    case Statistics::fermion:
      return "fermion";
    case Statistics::boson:
      return "boson";
    case Statistics::distinguishable:
      return "distinguishable";
  }
  return "unknown";
}

CompositeSpace::CompositeSpace(Index n) : n_(n) {
  if (n <= 0) throw std::invalid_argument("CompositeSpace: n must be positive");
}

BasisTag CompositeSpace::basis() const {
  return BasisTag("composite(n=" + std::to_string(n_) + ")");
}

Index CompositeSpace::index(const BasisLabel& b) const {
  auto bit = [](int v) { return v == 0 || v == 1; };
  if (b.x1 < 0 || b.x1 >= n_ || b.x2 < 0 || b.x2 >= n_ || !bit(b.s1) || !bit(b.s2) || !bit(b.q)) {
    throw std::out_of_range("basis_index: label out of range");
  }
  return b.q + 2 * (b.s2 + 2 * (b.s1 + 2 * (b.x2 + n_ * b.x1)));
}

BasisLabel CompositeSpace::decode(Index idx) const {
  if (idx < 0 || idx >= dim()) throw std::out_of_range("decode: index out of range");
  BasisLabel b;
  b.q = static_cast<int>(idx % 2);
  idx /= 2;
  b.s2 = static_cast<int>(idx % 2);
  idx /= 2;
  b.s1 = static_cast<int>(idx % 2);
  idx /= 2;
  b.x2 = idx % n_;
  b.x1 = idx / n_;
  return b;
}

Index basis_index(const CompositeSpace& space, Index x1, Index x2, int s1, int s2, int q) {
  return space.index({x1, x2, s1, s2, q});
}

LinearOperator exchange_operator(const CompositeSpace& space) {
  SparseMatrix s(space.dim(), space.dim());
  s.reserve(Eigen::VectorXi::Constant(space.dim(), 1));
  for (Index c = 0; c < space.dim(); ++c) s.insert(swapped_index(space, c), c) = 1.0;
  s.makeCompressed();
  return {std::move(s), space.basis()};
}

StateVector exchange(const CompositeSpace& space, const StateVector& s) {
  require_on_space(space, s, "exchange");
  return {exchanged(space, s.amps()), s.basis()};
}

StateVector antisymmetrize(const CompositeSpace& space, const StateVector& s) {
  require_on_space(space, s, "antisymmetrize");
  Vector v = s.amps() - exchanged(space, s.amps());
  if (v.norm() <= kSectorZeroNorm) {
    throw PreconditionError("antisymmetrize: state has no antisymmetric component");
  }
  v /= v.norm();
  return {std::move(v), s.basis()};
}

StateVector symmetrize(const CompositeSpace& space, const StateVector& s) {
  require_on_space(space, s, "symmetrize");
  Vector v = s.amps() + exchanged(space, s.amps());
  if (v.norm() <= kSectorZeroNorm) {
    throw PreconditionError("symmetrize: state has no symmetric component");
  }
  v /= v.norm();
  return {std::move(v), s.basis()};
}

double antisymmetry_violation(const CompositeSpace& space, const StateVector& s) {
  require_on_space(space, s, "antisymmetry_violation");
  return (s.amps() + exchanged(space, s.amps())).norm() / 2.0;
}

double symmetry_violation(const CompositeSpace& space, const StateVector& s) {
  require_on_space(space, s, "symmetry_violation");
  return (s.amps() - exchanged(space, s.amps())).norm() / 2.0;
}

double statistics_violation(const CompositeSpace& space, Statistics stats, const StateVector& s) {
  switch (stats) {
    case Statistics::fermion:
      return antisymmetry_violation(space, s);
    case Statistics::boson:
      return symmetry_violation(space, s);
    case Statistics::distinguishable:
      return 0.0;
  }
  return 0.0;
}

StateVector prepare_initial(const CompositeSpace& space, Statistics stats,
                            const StateVector& packet1, const StateVector& packet2) {
  const Index n = space.n();
  for (const StateVector* p : {&packet1, &packet2}) {
    if (p->dim() != n) throw DimensionError("prepare_initial: packet is not on an n-site lattice");
    if (std::abs(p->norm() - 1.0) > 1e-10) {
      throw PreconditionError("prepare_initial: packet not normalized");
    }
  }
  if (!(packet1.basis() == packet2.basis())) {
    throw DimensionError("prepare_initial: packets on different lattices");
  }
  if (stats != Statistics::distinguishable) {
    const auto a = support_of(packet1);
    const auto b = support_of(packet2);
    for (std::size_t x = 0; x < a.size(); ++x) {
      if (a[x] && b[x]) {
        throw PreconditionError("prepare_initial: packet supports overlap at site " +
                                std::to_string(x) + "; indistinguishable particles need disjoint "
                                "supports");
      }
    }
  }

  Vector v = Vector::Zero(space.dim());
  for (Index x1 = 0; x1 < n; ++x1) {
    if (packet1[x1] == 0.0) continue;
    for (Index x2 = 0; x2 < n; ++x2) {
      v[space.index({x1, x2, 0, 0, 0})] = packet1[x1] * packet2[x2];
    }
  }
  StateVector product(std::move(v), space.basis());
  switch (stats) {
    case Statistics::fermion:
      return antisymmetrize(space, product);
    case Statistics::boson:
      return symmetrize(space, product);
    case Statistics::distinguishable:
      return product;
  }
  return product;
}

LinearOperator lift_one_particle(const CompositeSpace& space, const LinearOperator& op,
                                 Particle particle, Factor factor) {
  const Index n = space.n();
  const Index expected = factor == Factor::position ? n : factor == Factor::spin ? 2 : 2 * n;
  if (op.rows() != expected || op.cols() != expected) {
    throw DimensionError("lift_one_particle: operator has dimension " + std::to_string(op.rows()) +
                         ", factor needs " + std::to_string(expected));
  }
  const bool first = particle == Particle::first;
  // Coordinate of the addressed factor for a basis label, and its inverse.
  auto coordinate = [&](const BasisLabel& b) -> Index {
    const Index x = first ? b.x1 : b.x2;
    const int s = first ? b.s1 : b.s2;
    switch (factor) {
      case Factor::position:
        return x;
      case Factor::spin:
        return s;
      case Factor::both:
        return 2 * x + s;
    }
    return 0;
  };
  auto with_coordinate = [&](BasisLabel b, Index c) {
    Index& x = first ? b.x1 : b.x2;
    int& s = first ? b.s1 : b.s2;
    switch (factor) {
      case Factor::position:
        x = c;
        break;
      case Factor::spin:
        s = static_cast<int>(c);
        break;
      case Factor::both:
        x = c / 2;
        s = static_cast<int>(c % 2);
        break;
    }
    return b;
  };

  const Eigen::SparseMatrix<Complex, Eigen::ColMajor> cols = op.to_sparse();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(space.dim() * (cols.nonZeros() / expected + 1)));
  for (Index c = 0; c < space.dim(); ++c) {
    const BasisLabel b = space.decode(c);
    for (Eigen::SparseMatrix<Complex, Eigen::ColMajor>::InnerIterator it(cols, coordinate(b)); it;
         ++it) {
      trips.emplace_back(space.index(with_coordinate(b, it.row())), c, it.value());
    }
  }
  SparseMatrix out(space.dim(), space.dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return {std::move(out), space.basis()};
}

bool is_exchange_symmetric(const CompositeSpace& space, const LinearOperator& op, double tol) {
  require_on_space(space, op, "is_exchange_symmetric");
  const SparseMatrix m = op.to_sparse();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(m.nonZeros()));
  for (Index r = 0; r < m.outerSize(); ++r) {
    const Index pr = swapped_index(space, r);
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      trips.emplace_back(pr, swapped_index(space, it.col()), it.value());
    }
  }
  SparseMatrix conj(space.dim(), space.dim());
  conj.setFromTriplets(trips.begin(), trips.end());
  return SparseMatrix(conj - m).norm() <= tol;
}

LinearOperator position_controlled(const CompositeSpace& space,
                                   const std::function<DenseMatrix(Index x1, Index x2)>& block) {
  constexpr Index k = CompositeSpace::kInternalDim;
  const Index n = space.n();
  std::vector<Eigen::Triplet<Complex>> trips;
  trips.reserve(static_cast<std::size_t>(space.dim() * 2));
  for (Index x1 = 0; x1 < n; ++x1) {
    for (Index x2 = 0; x2 < n; ++x2) {
      const DenseMatrix b = block(x1, x2);
      if (b.rows() != k || b.cols() != k) {
        throw DimensionError("position_controlled: block must be 8x8");
      }
      const Index base = k * (x2 + n * x1);
      for (Index c = 0; c < k; ++c) {
        for (Index r = 0; r < k; ++r) {
          if (b(r, c) != 0.0) trips.emplace_back(base + r, base + c, b(r, c));
        }
      }
    }
  }
  SparseMatrix out(space.dim(), space.dim());
  out.setFromTriplets(trips.begin(), trips.end());
  return {std::move(out), space.basis()};
}

DenseMatrix embed_spin_pair(const DenseMatrix& op4) {
  if (op4.rows() != 4 || op4.cols() != 4) throw DimensionError("embed_spin_pair: need 4x4");
  DenseMatrix out = DenseMatrix::Zero(8, 8);
  for (int q = 0; q < 2; ++q) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        out(internal_index(r / 2, r % 2, q), internal_index(c / 2, c % 2, q)) = op4(r, c);
      }
    }
  }
  return out;
}

DenseMatrix embed_spin_qubit(const DenseMatrix& op4, Particle particle) {
  if (op4.rows() != 4 || op4.cols() != 4) throw DimensionError("embed_spin_qubit: need 4x4");
  const bool first = particle == Particle::first;
  DenseMatrix out = DenseMatrix::Zero(8, 8);
  for (int other = 0; other < 2; ++other) {
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        const int rs = r / 2, rq = r % 2, cs = c / 2, cq = c % 2;
        const Index row = first ? internal_index(rs, other, rq) : internal_index(other, rs, rq);
        const Index col = first ? internal_index(cs, other, cq) : internal_index(other, cs, cq);
        out(row, col) = op4(r, c);
      }
    }
  }
  return out;
}

DenseMatrix embed_spin(const DenseMatrix& op2, Particle particle) {
  if (op2.rows() != 2 || op2.cols() != 2) throw DimensionError("embed_spin: need 2x2");
  DenseMatrix op4 = DenseMatrix::Zero(4, 4);
  for (int q = 0; q < 2; ++q) {
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) op4(2 * r + q, 2 * c + q) = op2(r, c);
    }
  }
  return embed_spin_qubit(op4, particle);
}

StateVector apply_position_operator(const CompositeSpace& space, const DenseMatrix& a,
                                    Particle particle, const StateVector& s) {
  require_on_space(space, s, "apply_position_operator");
  const Index n = space.n();
  constexpr Index k = CompositeSpace::kInternalDim;
  if (a.rows() != n || a.cols() != n) {
    throw DimensionError("apply_position_operator: operator is not n x n");
  }
  Vector out(space.dim());
  if (particle == Particle::first) {
    // Columns indexed by x1, rows by (x2, s1, s2, q).
    Eigen::Map<const DenseMatrix> in(s.amps().data(), k * n, n);
    Eigen::Map<DenseMatrix> res(out.data(), k * n, n);
    res.noalias() = in * a.transpose();
  } else {
    for (Index x1 = 0; x1 < n; ++x1) {
      Eigen::Map<const DenseMatrix> in(s.amps().data() + x1 * k * n, k, n);
      Eigen::Map<DenseMatrix> res(out.data() + x1 * k * n, k, n);
      res.noalias() = in * a.transpose();
    }
  }
  return {std::move(out), s.basis()};
}

StateVector evolve_positions(const CompositeSpace& space, const DenseMatrix& u,
                             const StateVector& s) {
  return apply_position_operator(space, u, Particle::second,
                                 apply_position_operator(space, u, Particle::first, s));
}

double joint_occupancy(const CompositeSpace& space, const Region& r, const StateVector& psi) {
  require_on_space(space, psi, "joint_occupancy");
  constexpr Index k = CompositeSpace::kInternalDim;
  double total = 0.0;
  for (Index x1 = std::max<Index>(r.lo, 0); x1 < std::min(r.hi, space.n()); ++x1) {
    for (Index x2 = std::max<Index>(r.lo, 0); x2 < std::min(r.hi, space.n()); ++x2) {
      total += psi.amps().segment(k * (x2 + space.n() * x1), k).squaredNorm();
    }
  }
  return total;
}

namespace {

LinearOperator diagonal_by_position(const CompositeSpace& space,
                                    const std::function<double(Index, Index, int)>& value) {
  SparseMatrix d(space.dim(), space.dim());
  d.reserve(Eigen::VectorXi::Constant(space.dim(), 1));
  for (Index i = 0; i < space.dim(); ++i) {
    const BasisLabel b = space.decode(i);
    const double v = value(b.x1, b.x2, b.q);
    if (v != 0.0) d.insert(i, i) = v;
  }
  d.makeCompressed();
  return {std::move(d), space.basis()};
}

}  // namespace

LinearOperator occupancy_projector(const CompositeSpace& space, const Region& r,
                                   Particle particle) {
  const bool first = particle == Particle::first;
  return diagonal_by_position(space, [&](Index x1, Index x2, int) {
    return r.contains(first ? x1 : x2) ? 1.0 : 0.0;
  });
}

LinearOperator occupancy_count(const CompositeSpace& space, const Region& r) {
  return diagonal_by_position(space, [&](Index x1, Index x2, int) {
    return (r.contains(x1) ? 1.0 : 0.0) + (r.contains(x2) ? 1.0 : 0.0);
  });
}

LinearOperator any_occupancy_projector(const CompositeSpace& space, const Region& r) {
  return diagonal_by_position(space, [&](Index x1, Index x2, int) {
    return r.contains(x1) || r.contains(x2) ? 1.0 : 0.0;
  });
}

LinearOperator qubit_projector(const CompositeSpace& space, int q) {
  if (q != 0 && q != 1) throw std::out_of_range("qubit_projector: q must be 0 or 1");
  return diagonal_by_position(space, [&](Index, Index, int bq) { return bq == q ? 1.0 : 0.0; });
}

SiteMarginals site_marginals(const CompositeSpace& space, const BranchEnsemble& e) {
  const Index n = space.n();
  constexpr Index k = CompositeSpace::kInternalDim;
  SiteMarginals m{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  for (const auto& b : e) {
    require_on_space(space, b.state, "site_marginals");
    for (Index x1 = 0; x1 < n; ++x1) {
      for (Index x2 = 0; x2 < n; ++x2) {
        const double p = b.weight * b.state.amps().segment(k * (x2 + n * x1), k).squaredNorm();
        m.slot1[x1] += p;
        m.slot2[x2] += p;
      }
    }
  }
  return m;
}

}  // namespace nosig
