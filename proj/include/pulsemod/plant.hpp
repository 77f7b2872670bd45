#pragma once

/**
 * @file plant.hpp
 * @brief Wiener PK/PD patient model: a three-compartment chain followed by a Hill nonlinearity.
 *
 * Units: time in min, doses in ug/kg, concentrations in ug/ml, effect in percent.
 */

#include <array>
#include <cmath>
#include <string>

#include "errors.hpp"
#include "matfun3.hpp"

namespace pulsemod {

/// Fixed pole ratios v1 < v2 < v3.
inline constexpr std::array<double, 3> kPoleRatios{1.0, 4.0, 10.0};
inline constexpr double kDefaultC50 = 3.2425;
inline constexpr double kAlphaMax = 0.1;
inline constexpr double kGammaMax = 10.0;

/// Compartment state (x1, x2, x3); x3 is the effect-site concentration.
using StateVec = Vec3;

class PlantParams;
PlantParams make_plant(double alpha, double gamma, double c50 = kDefaultC50);

/// Validated patient parameters with the derived chain coefficients. Build with make_plant.
class PlantParams {
public:
    [[nodiscard]] double alpha() const noexcept { return alpha_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }
    [[nodiscard]] double c50() const noexcept { return c50_; }

    /// Pole magnitudes a_i = v_i alpha.
    [[nodiscard]] const std::array<double, 3>& a() const noexcept { return chain_.rates; }
    [[nodiscard]] double g1() const noexcept { return chain_.g1; }
    [[nodiscard]] double g2() const noexcept { return chain_.g2; }
    [[nodiscard]] double pole_sum() const noexcept { return chain_.rates[0] + chain_.rates[1] + chain_.rates[2]; }

    [[nodiscard]] const ChainMatrix& chain() const noexcept { return chain_; }
    [[nodiscard]] Mat3 A() const { return chain_.dense(); }
    [[nodiscard]] static Vec3 B() { return Vec3::UnitX(); }
    [[nodiscard]] static RowVec3 C() { return RowVec3(0.0, 0.0, 1.0); }

    /// e^{At}; the identity at t = 0.
    [[nodiscard]] Mat3 transition(double t) const {
        if (t < 0.0)
            throw OutOfRange("transition: negative time");
        return chain_exp(chain_, t);
    }

private:
    friend PlantParams make_plant(double, double, double);
    PlantParams(double alpha, double gamma, double c50) : alpha_(alpha), gamma_(gamma), c50_(c50) {
        chain_.rates = {kPoleRatios[0] * alpha, kPoleRatios[1] * alpha, kPoleRatios[2] * alpha};
        chain_.g1 = kPoleRatios[0] * alpha;
        chain_.g2 = kPoleRatios[1] * kPoleRatios[2] * alpha * alpha;
    }

    double alpha_;
    double gamma_;
    double c50_;
    ChainMatrix chain_;
};

inline PlantParams make_plant(double alpha, double gamma, double c50) {
    if (!(alpha > 0.0 && alpha <= kAlphaMax))
        throw OutOfRange("alpha must lie in (0, 0.1], got " + std::to_string(alpha));
    if (!(gamma > 0.0 && gamma <= kGammaMax))
        throw OutOfRange("gamma must lie in (0, 10], got " + std::to_string(gamma));
    if (!(c50 > 0.0) || !std::isfinite(c50))
        throw OutOfRange("c50 must be positive, got " + std::to_string(c50));
    return PlantParams(alpha, gamma, c50);
}

/// f(tA) for the plant's chain matrix.
template <class F>
    requires std::invocable<const F&, double>
[[nodiscard]] Mat3 matrix_function(const PlantParams& plant, double t, const F& f) {
    return matrix_function(plant.chain(), t, f);
}

/// Hill effect 100 C50^g / (C50^g + z^g), in percent.
[[nodiscard]] inline double hill(const PlantParams& plant, double z) {
    if (z < 0.0 || std::isnan(z))
        throw NegativeConcentration("hill: concentration must be nonnegative");
    if (z == 0.0)
        return 100.0;
    // Written as 100 / (1 + (z/C50)^g) to avoid overflow of C50^g for large g.
    return 100.0 / (1.0 + std::pow(z / plant.c50(), plant.gamma()));
}

/// d hill / dz = -g 100 C50^g z^{g-1} / (C50^g + z^g)^2.
[[nodiscard]] inline double hill_slope(const PlantParams& plant, double z) {
    if (z < 0.0 || std::isnan(z))
        throw NegativeConcentration("hill_slope: concentration must be nonnegative");
    const double g = plant.gamma();
    if (z == 0.0) {
        if (g > 1.0)
            return 0.0;
        throw NegativeConcentration("hill_slope: z = 0 requires gamma > 1");
    }
    const double r = std::pow(z / plant.c50(), g);
    return -g * 100.0 * r / (z * (1.0 + r) * (1.0 + r));
}

}  // namespace pulsemod
