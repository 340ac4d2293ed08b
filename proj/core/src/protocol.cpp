#include "nosig/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <string>
#include <thread>

namespace nosig {

std::string_view to_string(KickMode m) {
  switch (m) {
    case KickMode::off:
      return "off";
    case KickMode::position:
      return "position";
    case KickMode::label1:
      return "label1";
  }
  return "unknown";
}

std::string_view to_string(JointMode m) {
  switch (m) {
    case JointMode::none:
      return "none";
    case JointMode::global_bell:
      return "global_bell";
    case JointMode::localized_bell:
      return "localized_bell";
  }
  return "unknown";
}

std::string_view to_string(DetectorMode m) {
  switch (m) {
    case DetectorMode::position:
      return "position";
    case DetectorMode::label2:
      return "label2";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void require(bool ok, const std::string& invariant) {
  if (!ok) throw ValidationError(invariant);
}

void require_region(const Region& r, Index n, const char* name) {
  require(r.lo >= 0 && r.lo < r.hi && r.hi <= n,
          std::string(name) + ": 0 <= lo < hi <= n (got [" + std::to_string(r.lo) + ", " +
              std::to_string(r.hi) + "))");
}

void require_packet(const PacketSpec& p, Index n, const char* name) {
  require_region(p.support, n, (std::string(name) + ".support").c_str());
  require(std::isfinite(p.width) && p.width > 0.0 &&
              p.width <= static_cast<double>(p.support.size()) / 4.0,
          std::string(name) + ": 0 < width <= (support.hi - support.lo)/4");
  require(std::isfinite(p.center) && p.center >= static_cast<double>(p.support.lo) &&
              p.center <= static_cast<double>(p.support.hi - 1),
          std::string(name) + ": center inside support");
  require(std::isfinite(p.momentum), std::string(name) + ": momentum finite");
}

}  // namespace

void validate(const ScenarioConfig& cfg) {
  require(cfg.n >= Lattice1D::kMinSites, "n >= 8");
  require(std::isfinite(cfg.hopping) && cfg.hopping > 0.0, "hopping > 0");
  require_region(cfg.O1, cfg.n, "O1");
  require_region(cfg.O2, cfg.n, "O2");
  require_region(cfg.O3, cfg.n, "O3");
  require(!cfg.O1.overlaps(cfg.O3), "O1, O3 disjoint");
  require(std::isfinite(cfg.t1) && cfg.t1 >= 0.0, "t1 >= 0");
  require(std::isfinite(cfg.t2) && cfg.t2 >= 0.0, "t2 >= 0");
  require(std::isfinite(cfg.eps) && cfg.eps > 0.0, "eps > 0");
  require_packet(cfg.packet1, cfg.n, "packet1");
  require_packet(cfg.packet2, cfg.n, "packet2");
  if (cfg.statistics != Statistics::distinguishable) {
    require(!cfg.packet1.support.overlaps(cfg.packet2.support),
            "packet supports disjoint for indistinguishable statistics");
  }
}

// ---------------------------------------------------------------------------
// Building blocks

LinearOperator bell_projector() {
  Vector b = Vector::Zero(4);
  b[0] = 1.0 / std::sqrt(2.0);  // |dd⟩
  b[3] = 1.0 / std::sqrt(2.0);  // |uu⟩
  return {DenseMatrix(b * b.adjoint()), tensor_tag(spin::tag(), spin::tag())};
}

LinearOperator kick_operator(const CompositeSpace& space, const Region& o1, KickMode mode) {
  if (o1.lo < 0 || o1.lo >= o1.hi || o1.hi > space.n()) {
    throw std::out_of_range("kick_operator: O1 outside lattice");
  }
  if (mode == KickMode::off) return LinearOperator::identity(space.dim(), space.basis());
  const DenseMatrix flip1 = embed_spin(spin::sigma_x().to_dense(), Particle::first);
  const DenseMatrix flip2 = embed_spin(spin::sigma_x().to_dense(), Particle::second);
  const DenseMatrix id = DenseMatrix::Identity(8, 8);
  return position_controlled(space, [&](Index x1, Index x2) -> DenseMatrix {
    DenseMatrix b = id;
    if (o1.contains(x1)) b = flip1 * b;
    if (mode == KickMode::position && o1.contains(x2)) b = flip2 * b;
    return b;
  });
}

LinearOperator detector_coupling() {
  // (spin, qubit) index 2·s + q: d0 = 0, d1 = 1, u0 = 2, u1 = 3.
  DenseMatrix d = DenseMatrix::Zero(4, 4);
  d(0, 0) = 1.0;
  d(1, 2) = 1.0;
  d(2, 1) = 1.0;
  d(3, 3) = 1.0;
  return {std::move(d), tensor_tag(spin::tag(), BasisTag("qubit"))};
}

MeasurementProcedure::MeasurementProcedure(std::optional<LinearOperator> coupling,
                                           std::vector<LinearOperator> projectors, bool selective)
    : coupling_(std::move(coupling)), projectors_(std::move(projectors)), selective_(selective) {
  if (selective_ && projectors_.empty()) {
    throw std::invalid_argument("MeasurementProcedure: selective measurement needs projectors");
  }
  if (!projectors_.empty()) check_resolution_of_identity(projectors_);
}

namespace {

BranchEnsemble map_branches(const BranchEnsemble& e,
                            const std::function<StateVector(const StateVector&)>& f) {
  std::vector<Branch> out;
  out.reserve(e.size());
  for (const auto& b : e) out.push_back({b.weight, f(b.state)});
  return BranchEnsemble(std::move(out));
}

}  // namespace

MeasurementProcedure::Outcome MeasurementProcedure::apply(const BranchEnsemble& e) const {
  BranchEnsemble current = e;
  if (coupling_) {
    current = map_branches(current, [&](const StateVector& s) { return nosig::apply(*coupling_, s); });
  }
  if (projectors_.empty()) return {std::move(current), 1.0};
  if (!selective_) return {luders_measure(projectors_, current), 1.0};

  // Keep the first outcome only; branch weights renormalize over what survives.
  std::vector<Branch> kept;
  double retained = 0.0;
  for (const auto& b : current) {
    StateVector projected = nosig::apply(projectors_.front(), b.state);
    const double prob = projected.squared_norm();
    if (prob > kBranchPruneThreshold) {
      kept.push_back({b.weight * prob, projected.normalized()});
      retained += b.weight * prob;
    }
  }
  if (kept.empty()) return {std::nullopt, 0.0};
  for (auto& b : kept) b.weight /= retained;
  return {BranchEnsemble(std::move(kept)), retained};
}

MeasurementProcedure detector_measurement(const CompositeSpace& space, const Region& o3,
                                          DetectorMode mode, bool selective) {
  if (o3.lo < 0 || o3.lo >= o3.hi || o3.hi > space.n()) {
    throw std::out_of_range("detector_measurement: O3 outside lattice");
  }
  const DenseMatrix d = detector_coupling().to_dense();
  const DenseMatrix d1 = embed_spin_qubit(d, Particle::first);
  const DenseMatrix d2 = embed_spin_qubit(d, Particle::second);
  const DenseMatrix id = DenseMatrix::Identity(8, 8);
  LinearOperator coupling = position_controlled(space, [&](Index x1, Index x2) -> DenseMatrix {
    const bool in1 = o3.contains(x1);
    const bool in2 = o3.contains(x2);
    if (mode == DetectorMode::label2) return in1 || in2 ? d2 : id;
    if (in1 && !in2) return d1;
    if (in2 && !in1) return d2;
    return id;
  });
  std::vector<LinearOperator> projectors;
  if (selective) {
    LinearOperator occupied = any_occupancy_projector(space, o3);
    LinearOperator empty = LinearOperator::identity(space.dim(), space.basis()) - occupied;
    projectors.push_back(std::move(occupied));
    projectors.push_back(std::move(empty));
  }
  return {std::move(coupling), std::move(projectors), selective};
}

MeasurementProcedure joint_measurement(const CompositeSpace& space, JointMode mode,
                                       const Region& o2) {
  if (mode == JointMode::none) return {std::nullopt, {}, false};
  if (mode == JointMode::localized_bell && (o2.lo < 0 || o2.lo >= o2.hi || o2.hi > space.n())) {
    throw std::out_of_range("joint_measurement: O2 outside lattice");
  }
  const DenseMatrix pb = embed_spin_pair(bell_projector().to_dense());
  const DenseMatrix zero = DenseMatrix::Zero(8, 8);
  LinearOperator fire = position_controlled(space, [&](Index x1, Index x2) -> DenseMatrix {
    if (mode == JointMode::global_bell) return pb;
    return o2.contains(x1) && o2.contains(x2) ? pb : zero;
  });
  LinearOperator rest = LinearOperator::identity(space.dim(), space.basis()) - fire;
  std::vector<LinearOperator> projectors;
  projectors.push_back(std::move(fire));
  projectors.push_back(std::move(rest));
  return {std::nullopt, std::move(projectors), false};
}

// ---------------------------------------------------------------------------
// Two-spin calculation

double run_naive_sorkin(const LinearOperator& c, bool kick) {
  if (c.rows() != 2 || c.cols() != 2) throw DimensionError("run_naive_sorkin: C must be 2x2");
  const LinearOperator obs(c.to_dense(), spin::tag());
  if (hermiticity_defect(obs) > 1e-10) {
    throw PreconditionError("run_naive_sorkin: observable is not Hermitian");
  }
  StateVector psi = tensor_product(spin::down(), spin::down());
  if (kick) psi = apply(tensor_product(spin::sigma_x(), spin::identity()), psi);
  const LinearOperator pb = bell_projector();
  const std::vector<LinearOperator> projectors{
      pb, LinearOperator::identity(4, pb.basis()) - pb};
  const BranchEnsemble measured = luders_measure(projectors, psi);
  return expectation(tensor_product(spin::identity(), obs), measured);
}

// ---------------------------------------------------------------------------
// Localized pipeline

ArmTrace run_arm(const ScenarioConfig& cfg, bool kick) {
  validate(cfg);
  const Lattice1D lat(cfg.n, cfg.hopping);
  const CompositeSpace space(cfg.n);
  const LatticeSpectrum spectrum(lat);

  const StateVector p1 = wavepacket(lat, cfg.packet1.support, cfg.packet1.center,
                                    cfg.packet1.width, cfg.packet1.momentum);
  const StateVector p2 = wavepacket(lat, cfg.packet2.support, cfg.packet2.center,
                                    cfg.packet2.width, cfg.packet2.momentum);

  auto evolve = [&](const BranchEnsemble& e, double t) {
    if (t == 0.0) return e;
    const DenseMatrix u = spectrum.evolution_matrix(t);
    return map_branches(e, [&](const StateVector& s) { return evolve_positions(space, u, s); });
  };

  BranchEnsemble prepared =
      BranchEnsemble::pure(prepare_initial(space, cfg.statistics, p1, p2));
  BranchEnsemble post_kick = prepared;
  if (kick && cfg.kick_mode != KickMode::off) {
    const LinearOperator k = kick_operator(space, cfg.O1, cfg.kick_mode);
    post_kick = map_branches(prepared, [&](const StateVector& s) { return apply(k, s); });
  }
  const BranchEnsemble before_o2 = evolve(post_kick, cfg.t1);
  BranchEnsemble post_o2 =
      *joint_measurement(space, cfg.joint_mode, cfg.O2).apply(before_o2).ensemble;
  BranchEnsemble final = evolve(post_o2, cfg.t2);
  const auto detected =
      detector_measurement(space, cfg.O3, cfg.detector_mode, cfg.selective_o3).apply(final);

  ArmTrace trace{std::move(prepared), std::move(post_kick), std::move(post_o2), std::move(final),
                 detected.ensemble, detected.retained_weight, 0.0, 0.0};
  if (trace.detected) trace.p_q1 = expectation(qubit_projector(space, 1), *trace.detected);

  auto worst = [&](const BranchEnsemble& e) {
    for (const auto& b : e) {
      trace.max_violation =
          std::max(trace.max_violation, statistics_violation(space, cfg.statistics, b.state));
    }
  };
  worst(trace.prepared);
  worst(trace.post_kick);
  worst(before_o2);
  worst(trace.post_o2);
  worst(trace.final);
  if (trace.detected) worst(*trace.detected);
  return trace;
}

SignalingReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
  validate(cfg);
  const Lattice1D lat(cfg.n, cfg.hopping);
  const CompositeSpace space(cfg.n);

  const int threads = opts.threads > 0 ? opts.threads
                                       : static_cast<int>(std::thread::hardware_concurrency());
  std::future<ArmTrace> kicked;
  if (threads > 1) kicked = std::async(std::launch::async, run_arm, std::cref(cfg), true);
  const ArmTrace nokick = run_arm(cfg, false);
  const ArmTrace kick = kicked.valid() ? kicked.get() : run_arm(cfg, true);

  SignalingReport report;
  report.certificate = check_spacelike(lat, cfg.O1, cfg.O3, nokick.prepared.branches().front().state,
                                       cfg.t1 + cfg.t2, cfg.eps);
  report.p_q1_kick = kick.p_q1;
  report.p_q1_nokick = nokick.p_q1;
  report.delta = std::abs(report.p_q1_kick - report.p_q1_nokick);
  report.arrival_prob =
      std::clamp(expectation(occupancy_count(space, cfg.O3), nokick.final), 0.0, 1.0);
  report.max_antisym_violation = std::max(kick.max_violation, nokick.max_violation);
  report.branch_count_kick = kick.detected ? kick.detected->size() : 0;
  report.branch_count_nokick = nokick.detected ? nokick.detected->size() : 0;
  return report;
}

double signaling_delta(const SignalingReport& report) {
  return std::abs(report.p_q1_kick - report.p_q1_nokick);
}

}  // namespace nosig
