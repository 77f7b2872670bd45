#pragma once

/**
 * @file design.hpp
 * @brief Piecewise-affine pulse modulation and the five-step design procedure.
 *
 * Modulation acts on the measured effect y (percent):
 *   next interval = clamp(k2 y + k1, phi_lo, phi_hi)
 *   next weight   = clamp(k4 y + k3, f_lo, f_hi)
 */

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cycle.hpp"
#include "errors.hpp"
#include "plant.hpp"

namespace pulsemod {

/// Saturation bounds of the interval (min) and weight (ug/kg) channels.
struct SaturationBounds {
    double phi_lo = 10.0;
    double phi_hi = 30.0;
    double f_lo = 80.0;
    double f_hi = 400.0;

    void validate() const {
        if (!(phi_lo > 0.0 && phi_lo <= phi_hi) || !std::isfinite(phi_hi))
            throw OutOfRange("interval bounds must satisfy 0 < phi_lo <= phi_hi");
        if (!(f_lo > 0.0 && f_lo <= f_hi) || !std::isfinite(f_hi))
            throw OutOfRange("weight bounds must satisfy 0 < f_lo <= f_hi");
    }
};

struct ModulationConfig {
    double k1 = 20.0;   ///< interval intercept, min
    double k2 = 0.0;    ///< interval slope, min per %, <= 0
    double k3 = 200.0;  ///< weight intercept, ug/kg
    double k4 = 0.0;    ///< weight slope, ug/kg per %, >= 0
    SaturationBounds bounds;

    /// Constant (T, lambda) modulation: the open-loop pulse train.
    [[nodiscard]] static ModulationConfig constant(const CycleTarget& target, const SaturationBounds& bounds = {}) {
        return {target.period, 0.0, target.weight, 0.0, bounds};
    }

    void validate() const {
        bounds.validate();
        if (!std::isfinite(k1) || !std::isfinite(k3))
            throw OutOfRange("modulation intercepts must be finite");
        if (!(k2 <= 0.0))
            throw OutOfRange("k2 must be <= 0 so the composed interval is non-decreasing in concentration");
        if (!(k4 >= 0.0))
            throw OutOfRange("k4 must be >= 0 so the composed weight is non-increasing in concentration");
    }
};

struct ModulationOutput {
    double interval = 0.0;
    double weight = 0.0;
};

[[nodiscard]] inline ModulationOutput eval_modulation(const ModulationConfig& config, double y_measured) {
    if (!(y_measured >= 0.0 && y_measured <= 100.0))
        throw OutOfRangeMeasurement("measured effect must lie in [0, 100], got " + std::to_string(y_measured));
    const auto& b = config.bounds;
    return {std::clamp(config.k2 * y_measured + config.k1, b.phi_lo, b.phi_hi),
            std::clamp(config.k4 * y_measured + config.k3, b.f_lo, b.f_hi)};
}

struct DesignResult {
    ModulationConfig config;
    double y_design = 0.0;      ///< phi(ybar0), the measured effect at the fixed point
    double hill_slope = 0.0;    ///< phi'(ybar0)
    FixedPoint fixed_point;
    StabilityReport stability;
    std::vector<std::string> warnings;
};

/**
 * Steps: fixed point, stability of the chosen slopes, chain rule to measured-output slopes
 * (k4 = xi / phi', k2 = eta / phi'), intercepts from F(ybar0) = lambda and Phi(ybar0) = T.
 */
[[nodiscard]] inline DesignResult design_modulation(const PlantParams& plant, const CycleTarget& target,
                                                    const SlopePair& slopes, const SaturationBounds& bounds = {}) {
    bounds.validate();
    slopes.validate();
    const LinearizedCycle lc(plant, target);

    DesignResult out;
    out.fixed_point = lc.fixed_point();
    out.stability = lc.report(slopes);
    if (!out.stability.stable)
        throw UnstableSlopes("slopes (" + std::to_string(slopes.xi) + ", " + std::to_string(slopes.eta) +
                             ") fail the stability test");

    const double ybar0 = out.fixed_point.ybar0;
    out.y_design = hill(plant, ybar0);
    out.hill_slope = hill_slope(plant, ybar0);

    auto& c = out.config;
    c.bounds = bounds;
    c.k4 = slopes.xi / out.hill_slope;
    c.k2 = slopes.eta / out.hill_slope;
    c.k3 = target.weight - c.k4 * out.y_design;
    c.k1 = target.period - c.k2 * out.y_design;
    // xi = 0 gives -0.0 / negative; normalise the sign of zero.
    c.k4 = c.k4 == 0.0 ? 0.0 : c.k4;
    c.k2 = c.k2 == 0.0 ? 0.0 : c.k2;

    if (target.period < bounds.phi_lo || target.period > bounds.phi_hi)
        throw InfeasibleBounds("interval saturation clips the design point T = " + std::to_string(target.period));
    if (target.weight < bounds.f_lo || target.weight > bounds.f_hi)
        throw InfeasibleBounds("weight saturation clips the design point lambda = " + std::to_string(target.weight));

    if (!(bounds.phi_lo <= c.k1))
        out.warnings.emplace_back("phi_lo <= k1 violated");
    if (!(100.0 * c.k2 + c.k1 <= bounds.phi_hi))
        out.warnings.emplace_back("100 k2 + k1 <= phi_hi violated");
    if (!(bounds.f_lo <= c.k3))
        out.warnings.emplace_back("f_lo <= k3 violated");
    if (!(100.0 * c.k4 + c.k3 <= bounds.f_hi))
        out.warnings.emplace_back("100 k4 + k3 <= f_hi violated");
    return out;
}

}  // namespace pulsemod
