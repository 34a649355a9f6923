#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace dpc {

inline constexpr double kNoCollapse = std::numeric_limits<double>::infinity();

enum class Branch { None, Branch1, Branch2 };

const char* to_string(Branch b);

// Diagonal populations and the off-diagonal element (as magnitude and phase) of
// the 2x2 density matrix of a two-branch superposition.
struct TwoBranchState {
  double p1 = 0.5;
  double p2 = 0.5;
  double coherence_mag = 0.5;
  double coherence_phase = 0.0;  // rad; carried, not read by the detector model
  Branch collapsed = Branch::None;

  double trace() const { return p1 + p2; }
  double purity() const;
  // Trace, positivity and collapse-consistency checks at `tol`.
  bool is_physical(double tol = 1e-12) const;
};

TwoBranchState initial_state(double phase = 0.0);

// Environmental dephasing: scales the coherence by exp(-gamma_dec * dt).
// Populations never change. Throws StateError on a collapsed state.
TwoBranchState decohere_step(const TwoBranchState& state, double dt, double gamma_dec);

// Born-rule symmetry breaking: Branch1 iff u < p1.
TwoBranchState apply_collapse(const TwoBranchState& state, double u);

struct HazardTrajectory {
  std::function<double(double)> rate;  // 1/s, t measured from superposition onset
  double horizon = 0.0;                // s
};

enum class CollapseModel { Poisson, Deterministic };

const char* to_string(CollapseModel m);
CollapseModel collapse_model_from_string(const std::string& s);

// Smallest T with int_0^T rate = target, or kNoCollapse if the cumulative
// hazard over the horizon stays below target.
double first_passage_time(const HazardTrajectory& hazard, double target);

// Inverse-survival draw: first_passage_time(hazard, -ln u).
double sample_collapse_time(const HazardTrajectory& hazard, double u);

struct TimelinePoint {
  double t = 0.0;
  double p1 = 0.5;
  double p2 = 0.5;
  double coherence = 0.5;
  Branch collapsed = Branch::None;
};

struct Evolution {
  double collapse_time = kNoCollapse;
  Branch branch = Branch::None;
  std::vector<TimelinePoint> timeline;
};

// Runs decoherence at `dt` resolution over the hazard horizon and applies one
// collapse at the sampled time. Deterministic in `seed`.
Evolution evolve(const HazardTrajectory& hazard, double gamma_dec, double dt,
                 std::uint64_t seed, CollapseModel model = CollapseModel::Poisson,
                 double phase = 0.0);

}  // namespace dpc
