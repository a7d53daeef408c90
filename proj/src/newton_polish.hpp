#pragma once

#include <hocp/inner_solver.hpp>

namespace hocp::detail {

// Newton step on the real components with the integers frozen. The working
// set is the constraints tight at x, minus those whose multiplier estimate
// has the wrong sign; the Hessian comes from forward differences of the
// gradient. Returns true and updates x, fx on an Armijo decrease.
bool newton_polish(const SmoothFunction& phi, const MilSet& X, Vec& x, double& fx, const Vec& g);

}  // namespace hocp::detail
