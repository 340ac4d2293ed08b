#pragma once

// The kick / joint-measurement / detector scenario: the two-spin calculation
// with no spatial structure, and the localized pipeline on the composite
// space that quantifies detector signaling between the kick and no-kick arms.

#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "nosig/composite.hpp"
#include "nosig/lattice.hpp"
#include "nosig/qcore.hpp"

namespace nosig {

enum class KickMode { off, position, label1 };
enum class JointMode { none, global_bell, localized_bell };
enum class DetectorMode { position, label2 };

std::string_view to_string(KickMode m);
std::string_view to_string(JointMode m);
std::string_view to_string(DetectorMode m);

struct PacketSpec {
  Region support;
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;

  bool operator==(const PacketSpec&) const = default;
};

/// Defaults reproduce the reference geometry: particle 1 at rest inside O1,
/// particle 2 launched at maximal group velocity so that it sits in O3 at
/// t1 + t2 = 10.
struct ScenarioConfig {
  Index n = 96;
  double hopping = 1.0;
  Region O1{8, 20};
  Region O2{60, 72};
  Region O3{76, 88};
  PacketSpec packet1{{8, 20}, 13.5, 3.0, 0.0};
  PacketSpec packet2{{56, 68}, 61.5, 3.0, std::numbers::pi / 2};
  Statistics statistics = Statistics::fermion;
  KickMode kick_mode = KickMode::position;
  JointMode joint_mode = JointMode::none;
  DetectorMode detector_mode = DetectorMode::position;
  double t1 = 0.0;
  double t2 = 10.0;
  double eps = 1e-6;
  bool selective_o3 = false;

  bool operator==(const ScenarioConfig&) const = default;
};

/// A configuration invariant does not hold. The message names it.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const ScenarioConfig& cfg);

struct SignalingReport {
  double p_q1_kick = 0.0;
  double p_q1_nokick = 0.0;
  double delta = 0.0;
  double arrival_prob = 0.0;
  SpacelikeCertificate certificate;
  double max_antisym_violation = 0.0;
  std::size_t branch_count_kick = 0;
  std::size_t branch_count_nokick = 0;

  bool operator==(const SignalingReport&) const = default;
};

/// |B⟩⟨B| with B = (|uu⟩ + |dd⟩)/√2 on two spins.
LinearOperator bell_projector();

/// Spin flip conditioned on position in O1: on every particle (position
/// mode) or on particle 1 only (label1). `off` yields the identity.
LinearOperator kick_operator(const CompositeSpace& space, const Region& o1, KickMode mode);

/// Detector interaction on (spin, qubit): |u0⟩ ↔ |d1⟩, |d0⟩ and |u1⟩ fixed.
LinearOperator detector_coupling();

/// An optional unitary coupling followed by an optional Lüders measurement.
/// When selective, only the first outcome is kept and renormalized.
class MeasurementProcedure {
 public:
  MeasurementProcedure(std::optional<LinearOperator> coupling,
                       std::vector<LinearOperator> projectors, bool selective);

  const std::optional<LinearOperator>& coupling() const { return coupling_; }
  const std::vector<LinearOperator>& projectors() const { return projectors_; }
  bool selective() const { return selective_; }

  struct Outcome {
    /// Empty when a selective measurement retains no weight.
    std::optional<BranchEnsemble> ensemble;
    double retained_weight = 1.0;
  };

  Outcome apply(const BranchEnsemble& e) const;

 private:
  std::optional<LinearOperator> coupling_;
  std::vector<LinearOperator> projectors_;
  bool selective_;
};

/// Position mode: D on the (spin, qubit) of whichever particle sits in O3
/// (identity when neither or both do). label2 mode: D on spin slot 2 whenever
/// any particle sits in O3. Selective adds post-selection on O3 occupancy.
MeasurementProcedure detector_measurement(const CompositeSpace& space, const Region& o3,
                                          DetectorMode mode, bool selective);

/// Non-selective Bell measurement on the spins, everywhere (global) or only
/// when both particles occupy O2 (localized). `none` is a no-op.
MeasurementProcedure joint_measurement(const CompositeSpace& space, JointMode mode,
                                       const Region& o2);

/// ⟨I ⊗ C⟩ after |dd⟩ → optional σx on spin 1 → non-selective Bell measurement.
double run_naive_sorkin(const LinearOperator& c, bool kick);

/// Every intermediate ensemble of one arm.
struct ArmTrace {
  BranchEnsemble prepared;
  BranchEnsemble post_kick;
  BranchEnsemble post_o2;
  BranchEnsemble final;
  std::optional<BranchEnsemble> detected;
  double retained_weight = 1.0;
  double p_q1 = 0.0;
  double max_violation = 0.0;
};

/// Runs one arm; `kick` false skips the kick regardless of cfg.kick_mode.
ArmTrace run_arm(const ScenarioConfig& cfg, bool kick);

struct RunOptions {
  /// 0 selects automatically; 1 runs the arms sequentially.
  int threads = 0;
};

SignalingReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

double signaling_delta(const SignalingReport& report);

}  // namespace nosig
