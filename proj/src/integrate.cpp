#include "dpc/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "dpc/errors.hpp"

namespace dpc {
namespace {

struct SimpsonCtx {
  const ScalarFn& f;
  double rtol;
  double atol;
};

double simpson_recurse(const SimpsonCtx& ctx, double a, double b, double fa, double fm,
                       double fb, double whole, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = ctx.f(lm);
  const double frm = ctx.f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double refined = left + right;
  const double err = refined - whole;
  if (depth <= 0 || std::abs(err) <= std::max(15.0 * ctx.rtol * std::abs(refined), ctx.atol)) {
    return refined + err / 15.0;
  }
  return simpson_recurse(ctx, a, m, fa, flm, fm, left, depth - 1) +
         simpson_recurse(ctx, m, b, fm, frm, fb, right, depth - 1);
}

}  // namespace

double integrate_adaptive(const ScalarFn& f, double a, double b, double rtol, double atol,
                          int max_depth) {
  if (a == b) return 0.0;
  const SimpsonCtx ctx{f, rtol, atol};
  // Split once so a function vanishing at a, (a+b)/2 and b is still probed.
  const double m = 0.5 * (a + b);
  double total = 0.0;
  for (auto [lo, hi] : {std::pair{a, m}, std::pair{m, b}}) {
    const double flo = f(lo);
    const double fmid = f(0.5 * (lo + hi));
    const double fhi = f(hi);
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += simpson_recurse(ctx, lo, hi, flo, fmid, fhi, whole, max_depth);
  }
  return total;
}

double mean_first_event_time(const ScalarFn& rate, double rtol, double t_limit) {
  // State y = (H, M): H' = rate(t), M' = exp(-H).
  using State = std::array<double, 2>;
  auto deriv = [&](double t, const State& y) -> State {
    const double r = rate(t);
    if (!(r >= 0.0)) throw DomainError("hazard rate must be >= 0");
    return {r, std::exp(-y[0])};
  };

  // Dormand-Prince 5(4) tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                   b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const double r0 = rate(0.0);
  double t = 0.0;
  State y{0.0, 0.0};
  double h = r0 > 0.0 ? 1e-3 / r0 : 1e-12;
  State k1 = deriv(t, y);

  for (int iter = 0; iter < 1'000'000; ++iter) {
    const double survival = std::exp(-y[0]);
    const double r = k1[0];
    // Remaining mass below tolerance: close with the constant-rate tail.
    if (r > 0.0 && survival / r <= 1e-3 * rtol * y[1]) {
      return y[1] + survival / r;
    }
    if (survival == 0.0) return y[1];
    if (t >= t_limit) {
      if (y[0] < 1e-3) return std::numeric_limits<double>::infinity();
      return r > 0.0 ? y[1] + survival / r : std::numeric_limits<double>::infinity();
    }
    h = std::min(h, t_limit - t);

    auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
      State out = y;
      for (auto [w, k] : terms) {
        out[0] += h * w * (*k)[0];
        out[1] += h * w * (*k)[1];
      }
      return out;
    };
    const State k2 = deriv(t + c2 * h, axpy({{a21, &k1}}));
    const State k3 = deriv(t + c3 * h, axpy({{a31, &k1}, {a32, &k2}}));
    const State k4 = deriv(t + c4 * h, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const State k5 =
        deriv(t + c5 * h, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const State k6 = deriv(
        t + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    const State y5 = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const State k7 = deriv(t + h, y5);

    double err = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double e =
          h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale = 1e-300 + rtol * 1e-2 * std::max({std::abs(y[i]), std::abs(y5[i]),
                                                           i == 0 ? 1.0 : h});
      err = std::max(err, std::abs(e) / scale);
    }
    if (err <= 1.0) {
      t += h;
      y = y5;
      k1 = k7;
    }
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  throw DomainError("mean_first_event_time: step budget exhausted");
}

}  // namespace dpc
