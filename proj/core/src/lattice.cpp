#include "nosig/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "nosig/composite.hpp"

namespace nosig {

Lattice1D::Lattice1D(Index n, double hopping) : n_(n), hopping_(hopping) {
  if (n < kMinSites) {
    throw std::invalid_argument("lattice: n = " + std::to_string(n) + " is below the minimum of " +
                                std::to_string(kMinSites) + " sites");
  }
  if (!(hopping > 0.0) || !std::isfinite(hopping)) {
    throw std::invalid_argument("lattice: hopping must be positive and finite");
  }
}

BasisTag Lattice1D::basis() const { return BasisTag("lattice(n=" + std::to_string(n_) + ")"); }

void Lattice1D::require_region(const Region& r) const {
  if (!(r.lo >= 0 && r.lo < r.hi && r.hi <= n_)) {
    throw std::out_of_range("region [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) +
                            ") violates 0 <= lo < hi <= " + std::to_string(n_));
  }
}

Lattice1D make_lattice(Index n, double hopping) { return {n, hopping}; }

LinearOperator region_projector(const Lattice1D& lat, const Region& r) {
  lat.require_region(r);
  SparseMatrix p(lat.n(), lat.n());
  p.reserve(Eigen::VectorXi::Constant(lat.n(), 1));
  for (Index x = r.lo; x < r.hi; ++x) p.insert(x, x) = 1.0;
  p.makeCompressed();
  return {std::move(p), lat.basis()};
}

LinearOperator hamiltonian(const Lattice1D& lat) {
  const double j = lat.hopping();
  DenseMatrix h = DenseMatrix::Zero(lat.n(), lat.n());
  for (Index i = 0; i < lat.n(); ++i) {
    h(i, i) = 2.0 * j;
    if (i + 1 < lat.n()) {
      h(i, i + 1) = -j;
      h(i + 1, i) = -j;
    }
  }
  return {std::move(h), lat.basis()};
}

LatticeSpectrum::LatticeSpectrum(const Lattice1D& lat) : lat_(lat) {
  const Eigen::MatrixXd h = hamiltonian(lat).to_dense().real();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
  if (eig.info() != Eigen::Success) throw std::runtime_error("lattice: eigensolver failed");
  energies_ = eig.eigenvalues();
  modes_ = eig.eigenvectors();
}

DenseMatrix LatticeSpectrum::evolution_matrix(double t) const {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("propagator: time must be finite and non-negative");
  }
  const Vector phases =
      (energies_.cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
  const DenseMatrix v = modes_.cast<Complex>();
  return v * phases.asDiagonal() * v.transpose();
}

LinearOperator LatticeSpectrum::propagator(double t) const {
  return {evolution_matrix(t), lat_.basis()};
}

LinearOperator propagator(const Lattice1D& lat, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("propagator: time must be non-negative");
  return LatticeSpectrum(lat).propagator(t);
}

StateVector wavepacket(const Lattice1D& lat, const Region& support, double center, double width,
                       double momentum) {
  lat.require_region(support);
  if (!(width > 0.0) || width > static_cast<double>(support.size()) / 4.0) {
    throw std::invalid_argument("wavepacket: width must lie in (0, (hi - lo)/4]");
  }
  if (!(center >= static_cast<double>(support.lo)) ||
      !(center <= static_cast<double>(support.hi - 1))) {
    throw std::invalid_argument("wavepacket: center outside its support");
  }
  Vector amps = Vector::Zero(lat.n());
  for (Index x = support.lo; x < support.hi; ++x) {
    const double u = (static_cast<double>(x) - center) / (2.0 * width);
    if (std::abs(u) >= 1.0) continue;
    const double c = std::cos(0.5 * std::numbers::pi * u);
    amps[x] = c * c * std::polar(1.0, momentum * static_cast<double>(x));
  }
  const double norm = amps.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("wavepacket: envelope vanishes on every site");
  return {amps / norm, lat.basis()};
}

double leakage(const LatticeSpectrum& spectrum, const Region& src, const Region& dst, double t) {
  const DenseMatrix u = spectrum.evolution_matrix(t);
  if (!(src.lo >= 0 && src.lo < src.hi && src.hi <= u.cols()) ||
      !(dst.lo >= 0 && dst.lo < dst.hi && dst.hi <= u.rows())) {
    throw std::out_of_range("leakage: region outside lattice");
  }
  // Only the dst×src block of U survives the two projections; its largest
  // singular value is the square root of the top eigenvalue of B†B.
  const DenseMatrix block = u.block(dst.lo, src.lo, dst.size(), src.size());
  const DenseMatrix gram = block.adjoint() * block;
  Eigen::SelfAdjointEigenSolver<DenseMatrix> eig(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
}

double leakage(const Lattice1D& lat, const Region& src, const Region& dst, double t) {
  lat.require_region(src);
  lat.require_region(dst);
  return leakage(LatticeSpectrum(lat), src, dst, t);
}

SpacelikeCertificate check_spacelike(const Lattice1D& lat, const Region& o1, const Region& o3,
                                     const StateVector& psi, double t_total, double eps) {
  lat.require_region(o1);
  lat.require_region(o3);
  const CompositeSpace space(lat.n());
  if (psi.dim() != space.dim()) {
    throw DimensionError("check_spacelike: state is not on the composite space");
  }

  SpacelikeCertificate cert;
  cert.epsilon = eps;
  const LatticeSpectrum spectrum(lat);
  for (int k = 0; k < kCertificateGridPoints; ++k) {
    const double t = t_total * k / (kCertificateGridPoints - 1);
    cert.leak_13 = std::max(cert.leak_13, leakage(spectrum, o1, o3, t));
    cert.leak_31 = std::max(cert.leak_31, leakage(spectrum, o3, o1, t));
  }
  cert.overlap_O1 = joint_occupancy(space, o1, psi);
  cert.overlap_O3 = joint_occupancy(space, o3, psi);
  cert.pass = cert.leak_13 <= eps && cert.leak_31 <= eps && cert.overlap_O1 <= eps &&
              cert.overlap_O3 <= eps;
  return cert;
}

}  // namespace nosig
