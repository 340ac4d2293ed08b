#pragma once

// Single-particle dynamics on a 1-D tight-binding lattice with hard walls.
// Units: ħ = 1, lattice spacing 1, mass absorbed into the hopping J.

#include <array>
#include <vector>

#include "nosig/qcore.hpp"

namespace nosig {

/// Half-open site interval [lo, hi).
struct Region {
  Index lo = 0;
  Index hi = 0;

  Index size() const { return hi - lo; }
  bool contains(Index x) const { return x >= lo && x < hi; }
  bool overlaps(const Region& o) const { return lo < o.hi && o.lo < hi; }
  bool operator==(const Region&) const = default;
};

class Lattice1D {
 public:
  static constexpr Index kMinSites = 8;

  /// Throws std::invalid_argument unless n ≥ 8 and hopping > 0.
  Lattice1D(Index n, double hopping);

  Index n() const { return n_; }
  double hopping() const { return hopping_; }
  BasisTag basis() const;

  /// Throws std::out_of_range unless 0 ≤ lo < hi ≤ n.
  void require_region(const Region& r) const;

 private:
  Index n_;
  double hopping_;
};

Lattice1D make_lattice(Index n, double hopping);

/// Diagonal 0/1 projector onto the sites of `r`.
LinearOperator region_projector(const Lattice1D& lat, const Region& r);

/// H[i,i] = 2J, H[i,i±1] = −J.
LinearOperator hamiltonian(const Lattice1D& lat);

/// Eigendecomposition of the lattice Hamiltonian, reused for every time.
class LatticeSpectrum {
 public:
  explicit LatticeSpectrum(const Lattice1D& lat);

  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXd& modes() const { return modes_; }

  /// exp(−iHt) as a dense n×n matrix. Throws on t < 0.
  DenseMatrix evolution_matrix(double t) const;
  LinearOperator propagator(double t) const;

 private:
  Lattice1D lat_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd modes_;
};

LinearOperator propagator(const Lattice1D& lat, double t);

/// Compactly supported packet: raised-cosine envelope
/// cos²(π(x − center)/(4·width)) on |x − center| < 2·width, times e^{i·momentum·x},
/// clipped to `support` and normalized.
StateVector wavepacket(const Lattice1D& lat, const Region& support, double center, double width,
                       double momentum);

/// Largest singular value of P_dst U_t P_src.
double leakage(const Lattice1D& lat, const Region& src, const Region& dst, double t);
double leakage(const LatticeSpectrum& spectrum, const Region& src, const Region& dst, double t);

struct SpacelikeCertificate {
  double epsilon = 0.0;
  double leak_13 = 0.0;
  double leak_31 = 0.0;
  double overlap_O1 = 0.0;
  double overlap_O3 = 0.0;
  bool pass = false;

  bool operator==(const SpacelikeCertificate&) const = default;
};

inline constexpr int kCertificateGridPoints = 9;

/// Numerical stand-in for exact spacelike separation: transport between O1
/// and O3 (maximum over a 9-point time grid on [0, t_total]) and joint
/// occupancy of either region by both particles must all be ≤ eps. `psi`
/// lives on the two-particle composite space over `lat`.
SpacelikeCertificate check_spacelike(const Lattice1D& lat, const Region& o1, const Region& o3,
                                     const StateVector& psi, double t_total, double eps);

}  // namespace nosig
