#pragma once

// Which member of the mu-family is being run: the weight lambda, the inertia
// operator, and (for muBurgers) the gauge c(t) = mu(u_t) left free by the
// equation. The default gauge c = 0 is the mean-preserving choice under
// which muB coincides with the inviscid Burgers equation.

#include <functional>

#include "muflow/densities.hpp"

namespace muflow {

struct FamilyConfig {
    double lambda = 3.0;
    InertiaOperator op = InertiaOperator::MuMinusDxx;
    std::function<double(double)> muburgers_gauge;  // c(t); empty means 0

    double gauge(double t) const { return muburgers_gauge ? muburgers_gauge(t) : 0.0; }

    bool is_muburgers() const { return op == InertiaOperator::MinusDxx; }

    static FamilyConfig mudp() { return {3.0, InertiaOperator::MuMinusDxx, {}}; }
    static FamilyConfig much() { return {2.0, InertiaOperator::MuMinusDxx, {}}; }
    static FamilyConfig mu_lambda(double lambda) { return {lambda, InertiaOperator::MuMinusDxx, {}}; }
    static FamilyConfig muburgers(std::function<double(double)> gauge = {}) {
        return {3.0, InertiaOperator::MinusDxx, std::move(gauge)};
    }
};

} // namespace muflow
