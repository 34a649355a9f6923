#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "dpc/analysis.hpp"
#include "dpc/dynamics.hpp"
#include "dpc/errors.hpp"
#include "dpc/random.hpp"

using namespace dpc;

namespace {
HazardTrajectory constant(double rate, double horizon = 1e6) {
  return {[rate](double) { return rate; }, horizon};
}
}  // namespace

TEST_CASE("initial state") {
  const auto s = initial_state();
  CHECK(s.p1 == 0.5);
  CHECK(s.p2 == 0.5);
  CHECK(s.coherence_mag == 0.5);
  CHECK(s.collapsed == Branch::None);
  CHECK(s.purity() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.is_physical());
  CHECK(initial_state(1.2).coherence_phase == 1.2);
}

TEST_CASE("decoherence") {
  const auto s = initial_state();
  const auto same = decohere_step(s, 1.0, 0.0);
  CHECK(same.coherence_mag == 0.5);
  CHECK(same.p1 == 0.5);

  const auto half = decohere_step(s, std::numbers::ln2, 1.0);
  CHECK(half.coherence_mag == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(half.p1 == 0.5);
  CHECK(half.p2 == 0.5);

  const auto gone = decohere_step(s, 1e-9, 1e38);
  CHECK(gone.coherence_mag == 0.0);
  CHECK(gone.trace() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gone.is_physical());

  const auto collapsed = apply_collapse(s, 0.1);
  CHECK_THROWS_AS(decohere_step(collapsed, 1e-9, 1.0), StateError);
}

TEST_CASE("collapse selection") {
  TwoBranchState certain = initial_state();
  certain.p1 = 1.0;
  certain.p2 = 0.0;
  certain.coherence_mag = 0.0;
  CHECK(apply_collapse(certain, 0.999).collapsed == Branch::Branch1);

  const auto s = initial_state();
  CounterRng rng(77);
  int branch1 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto c = apply_collapse(s, rng.uniform());
    CHECK(c.is_physical());
    CHECK(c.coherence_mag == 0.0);
    if (c.collapsed == Branch::Branch1) {
      ++branch1;
      CHECK(c.p1 == 1.0);
    } else {
      CHECK(c.p2 == 1.0);
    }
  }
  CHECK(std::abs(static_cast<double>(branch1) / n - 0.5) < 0.005);

  const auto done = apply_collapse(s, 0.3);
  CHECK_THROWS_AS(apply_collapse(done, 0.3), StateError);
}

TEST_CASE("first passage is exact for analytic hazards") {
  const auto h = constant(3.0);
  for (double target : {1e-9, 0.1, 1.0, 25.0}) {
    CHECK(first_passage_time(h, target) == doctest::Approx(target / 3.0).epsilon(1e-10));
  }
  const double c = 1e21;
  const HazardTrajectory ramp{[c](double t) { return c * t * t; }, 1.0};
  for (double target : {1e-6, 0.69, 4.0}) {
    CHECK(first_passage_time(ramp, target) ==
          doctest::Approx(std::cbrt(3.0 * target / c)).epsilon(1e-10));
  }
  CHECK(first_passage_time(constant(1.0, 2.0), 3.0) == kNoCollapse);
}

TEST_CASE("collapse sampling") {
  CHECK(sample_collapse_time(constant(0.0), 0.5) == kNoCollapse);
  CHECK_THROWS(sample_collapse_time(constant(1.0), 0.0));
  CHECK_THROWS(sample_collapse_time(constant(1.0), 1.0));

  const double rate = 1e7;
  CounterRng rng(1);
  std::vector<double> draws(20000);
  for (auto& d : draws) d = sample_collapse_time(constant(rate, 1.0), rng.uniform());
  const auto ks = ks_one_sample(draws, [rate](double t) { return 1.0 - std::exp(-rate * t); });
  CHECK(ks.p_value > 0.01);

  const double c = 1e21;
  const HazardTrajectory ramp{[c](double t) { return c * t * t; }, 1.0};
  for (auto& d : draws) d = sample_collapse_time(ramp, rng.uniform());
  std::nth_element(draws.begin(), draws.begin() + draws.size() / 2, draws.end());
  const double median = draws[draws.size() / 2];
  CHECK(median == doctest::Approx(std::cbrt(3.0 * std::numbers::ln2 / c)).epsilon(0.02));
}

TEST_CASE("property: larger hazard collapses no later") {
  CounterRng rng(9);
  for (int i = 0; i < 2000; ++i) {
    const double a = std::pow(10.0, 3.0 + 6.0 * rng.uniform());
    const double extra = std::pow(10.0, 3.0 + 6.0 * rng.uniform());
    const HazardTrajectory low{[a](double t) { return a * (1.0 + t * 1e3); }, 1.0};
    const HazardTrajectory high{[a, extra](double t) { return a * (1.0 + t * 1e3) + extra; }, 1.0};
    const double u = rng.uniform();
    CHECK(sample_collapse_time(high, u) <= sample_collapse_time(low, u));
  }
}

TEST_CASE("evolution") {
  const auto never = evolve(constant(0.0, 1e-7), 1e7, 1e-8, 3);
  CHECK(never.collapse_time == kNoCollapse);
  CHECK(never.branch == Branch::None);
  CHECK(never.timeline.size() == 11);
  CHECK(never.timeline.back().p1 == 0.5);
  CHECK(never.timeline.back().coherence == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-12));

  int branch1 = 0;
  for (std::uint64_t seed = 0; seed < 4000; ++seed) {
    const auto e = evolve(constant(1e30, 1e-7), 1e38, 1e-8, seed);
    CHECK(e.collapse_time < 1e-8);
    CHECK(e.timeline[1].collapsed == e.branch);
    if (e.branch == Branch::Branch1) ++branch1;
  }
  CHECK(std::abs(branch1 / 4000.0 - 0.5) < 0.04);

  const auto a = evolve(constant(1e7, 2e-6), 1e38, 1e-8, 42);
  const auto b = evolve(constant(1e7, 2e-6), 1e38, 1e-8, 42);
  CHECK(a.collapse_time == b.collapse_time);
  CHECK(a.branch == b.branch);

  // Dephasing does not feed back into the collapse time or branch.
  const auto pure = evolve(constant(1e7, 2e-6), 0.0, 1e-8, 42);
  CHECK(pure.collapse_time == a.collapse_time);
  CHECK(pure.branch == a.branch);

  const auto det = evolve(constant(1e7, 2e-6), 1e38, 1e-8, 5, CollapseModel::Deterministic);
  CHECK(det.collapse_time == doctest::Approx(1e-7).epsilon(1e-10));

  for (const auto& p : a.timeline) {
    CHECK(p.p1 + p.p2 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p.coherence * p.coherence <= p.p1 * p.p2 + 1e-15);
  }
}

TEST_CASE("property: density matrix stays physical") {
  CounterRng rng(123);
  TwoBranchState s = initial_state();
  for (int i = 0; i < 200000; ++i) {
    if (s.collapsed != Branch::None || rng.uniform() < 0.001) s = initial_state(rng.uniform());
    const double dt = std::pow(10.0, -12.0 + 6.0 * rng.uniform());
    const double g = rng.uniform() < 0.1 ? 0.0 : std::pow(10.0, 40.0 * rng.uniform());
    s = decohere_step(s, dt, g);
    if (rng.uniform() < 0.01) s = apply_collapse(s, rng.uniform());
    REQUIRE(s.is_physical());
    REQUIRE(std::abs(s.trace() - 1.0) <= 1e-12);
  }
}

TEST_CASE("names") {
  CHECK(std::string(to_string(Branch::Branch2)) == "branch2");
  CHECK(collapse_model_from_string("deterministic") == CollapseModel::Deterministic);
  CHECK_THROWS(collapse_model_from_string("bogus"));
}
