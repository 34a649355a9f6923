#include "dpc/dynamics.hpp"

#include <cmath>

#include "dpc/errors.hpp"
#include "dpc/integrate.hpp"
#include "dpc/random.hpp"

namespace dpc {

const char* to_string(Branch b) {
  switch (b) {
    case Branch::Branch1: return "branch1";
    case Branch::Branch2: return "branch2";
    case Branch::None: break;
  }
  return "none";
}

const char* to_string(CollapseModel m) {
  return m == CollapseModel::Poisson ? "poisson" : "deterministic";
}

CollapseModel collapse_model_from_string(const std::string& s) {
  if (s == "poisson") return CollapseModel::Poisson;
  if (s == "deterministic") return CollapseModel::Deterministic;
  throw DomainError("unknown collapse model '" + s + "' (expected poisson|deterministic)");
}

double TwoBranchState::purity() const {
  return p1 * p1 + p2 * p2 + 2.0 * coherence_mag * coherence_mag;
}

bool TwoBranchState::is_physical(double tol) const {
  if (std::abs(trace() - 1.0) > tol) return false;
  if (p1 < 0.0 || p2 < 0.0 || coherence_mag < 0.0) return false;
  if (coherence_mag > std::sqrt(p1 * p2) + tol) return false;
  if (collapsed == Branch::Branch1) return p1 == 1.0 && p2 == 0.0 && coherence_mag == 0.0;
  if (collapsed == Branch::Branch2) return p1 == 0.0 && p2 == 1.0 && coherence_mag == 0.0;
  return true;
}

TwoBranchState initial_state(double phase) {
  return TwoBranchState{0.5, 0.5, 0.5, phase, Branch::None};
}

TwoBranchState decohere_step(const TwoBranchState& state, double dt, double gamma_dec) {
  if (state.collapsed != Branch::None) throw StateError("decohere_step on a collapsed state");
  if (!(dt >= 0.0)) throw DomainError("decohere_step: dt must be >= 0");
  if (!(gamma_dec >= 0.0)) throw DomainError("decohere_step: gamma_dec must be >= 0");
  TwoBranchState next = state;
  if (gamma_dec > 0.0 && dt > 0.0) next.coherence_mag *= std::exp(-gamma_dec * dt);
  return next;
}

TwoBranchState apply_collapse(const TwoBranchState& state, double u) {
  if (state.collapsed != Branch::None) throw StateError("apply_collapse on a collapsed state");
  TwoBranchState next = state;
  next.coherence_mag = 0.0;
  if (u < state.p1) {
    next.p1 = 1.0;
    next.p2 = 0.0;
    next.collapsed = Branch::Branch1;
  } else {
    next.p1 = 0.0;
    next.p2 = 1.0;
    next.collapsed = Branch::Branch2;
  }
  return next;
}

double first_passage_time(const HazardTrajectory& hazard, double target) {
  if (!(hazard.horizon > 0.0)) throw DomainError("hazard horizon must be > 0");
  if (!(target >= 0.0)) throw DomainError("hazard target must be >= 0");
  if (target == 0.0) return 0.0;

  auto segment = [&](double a, double b) { return integrate_adaptive(hazard.rate, a, b, 1e-9); };

  // Bracket by doubling from a small fraction of the horizon.
  double lo = 0.0, h_lo = 0.0;
  double hi = std::ldexp(hazard.horizon, -30);
  double h_hi = segment(lo, hi);
  while (h_hi < target) {
    if (hi >= hazard.horizon) return kNoCollapse;
    lo = hi;
    h_lo = h_hi;
    hi = std::min(2.0 * hi, hazard.horizon);
    h_hi = h_lo + segment(lo, hi);
  }

  // Bisection, with a Newton proposal (dH/dt = rate) taken when it lands
  // inside the bracket.
  double t = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double h_t = h_lo + segment(lo, t);
    const double r = hazard.rate(t);
    if (r > 0.0 && std::abs(h_t - target) <= 1e-13 * target) return t;
    if (h_t < target) {
      lo = t;
      h_lo = h_t;
    } else {
      hi = t;
      h_hi = h_t;
    }
    const double newton = r > 0.0 ? t - (h_t - target) / r : -1.0;
    t = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }
  return 0.5 * (lo + hi);
}

double sample_collapse_time(const HazardTrajectory& hazard, double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("sample_collapse_time: u must lie in (0, 1)");
  return first_passage_time(hazard, -std::log(u));
}

Evolution evolve(const HazardTrajectory& hazard, double gamma_dec, double dt,
                 std::uint64_t seed, CollapseModel model, double phase) {
  if (!(dt > 0.0)) throw DomainError("evolve: dt must be > 0");
  CounterRng rng(seed);
  const double u_time = rng.uniform();
  const double u_branch = rng.uniform();

  Evolution out;
  out.collapse_time = model == CollapseModel::Poisson ? sample_collapse_time(hazard, u_time)
                                                      : first_passage_time(hazard, 1.0);

  const auto steps = static_cast<std::size_t>(std::ceil(hazard.horizon / dt - 1e-9));
  out.timeline.reserve(steps + 1);
  TwoBranchState state = initial_state(phase);
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    if (k > 0 && state.collapsed == Branch::None) state = decohere_step(state, dt, gamma_dec);
    if (state.collapsed == Branch::None && t >= out.collapse_time) {
      state = apply_collapse(state, u_branch);
      out.branch = state.collapsed;
    }
    out.timeline.push_back({t, state.p1, state.p2, state.coherence_mag, state.collapsed});
  }
  // Collapse inside the horizon but past the last grid point.
  if (out.branch == Branch::None && out.collapse_time <= hazard.horizon) {
    out.branch = apply_collapse(state, u_branch).collapsed;
  }
  return out;
}

}  // namespace dpc
