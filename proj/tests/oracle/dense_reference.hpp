#pragma once

// Brute-force reference implementations used only by tests. Nothing here
// calls into the library's lattice, composite or protocol code: operators are
// assembled from Kronecker products, propagators come from a Padé matrix
// exponential, and the pipeline runs on a full density matrix.

#include <Eigen/Dense>

#include "nosig/protocol.hpp"

namespace nosig::oracle {

/// exp(−iHt) for the hard-wall tight-binding chain via Eigen's matrix
/// exponential.
Eigen::MatrixXcd dense_propagator(Index n, double hopping, double t);

/// Largest singular value of P_dst U_t P_src from a full JacobiSVD.
double dense_leakage(Index n, double hopping, const Region& src, const Region& dst, double t);

/// The raised-cosine packet, written out directly.
Eigen::VectorXcd packet(Index n, const PacketSpec& spec);

/// 4×4 density-matrix evaluation of the two-spin calculation.
double naive_two_spin(const Eigen::Matrix2cd& c, bool kick);

struct ArmResult {
  double p_q1 = 0.0;
  double arrival_prob = 0.0;
  /// ‖Mρ‖_F/2 right after the detector coupling, M = I + S (fermion) or
  /// I − S (boson). Equals the branch violation when ρ is pure and bounds
  /// the largest branch violation otherwise.
  double sector_violation = 0.0;
};

struct ScenarioResult {
  ArmResult kick;
  ArmResult nokick;
};

/// Full density-matrix pipeline on the 8n²-dim space. Cost grows as n⁶;
/// intended for n ≤ 16.
ScenarioResult dense_scenario(const ScenarioConfig& cfg);

}  // namespace nosig::oracle
