#pragma once

#include <functional>

namespace dpc {

using ScalarFn = std::function<double(double)>;

// Adaptive Simpson quadrature (trapezoid refinement with Richardson
// extrapolation) on [a, b]. Stops when the local error estimate falls below
// rtol * |integral| or `atol`, or at max_depth.
double integrate_adaptive(const ScalarFn& f, double a, double b, double rtol = 1e-9,
                          double atol = 0.0, int max_depth = 48);

// Mean of the first event time of an inhomogeneous Poisson process,
// E[T] = int_0^inf exp(-int_0^t rate) dt, integrated as an ODE with an
// embedded Dormand-Prince 5(4) pair. Returns +inf when the survival function
// does not decay (cumulative hazard bounded by ~1e-3 out to `t_limit`).
double mean_first_event_time(const ScalarFn& rate, double rtol = 1e-8,
                             double t_limit = 1e30);

}  // namespace dpc
