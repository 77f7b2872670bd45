#pragma once

/**
 * @file cycle.hpp
 * @brief The designed 1-cycle: fixed point, Jacobian of the impulse-to-impulse map,
 *        the analytic stability criterion and convergence-rate optimisation.
 *
 * The Jacobian at the fixed point X is Q(xi, eta) = e^{AT} + (xi J + eta D) C with
 * J = e^{AT} B and D = A X, where xi and eta are the composed amplitude and frequency
 * slopes of the modulation functions at ybar0 = C X.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "matfun3.hpp"
#include "plant.hpp"

namespace pulsemod {

/// Desired 1-cycle: period T (min) and impulse weight lambda (ug/kg).
struct CycleTarget {
    double period = 20.0;
    double weight = 200.0;

    void validate() const {
        if (!(period > 0.0) || !std::isfinite(period))
            throw OutOfRange("cycle period T must be positive");
        if (!(weight > 0.0) || !std::isfinite(weight))
            throw OutOfRange("impulse weight lambda must be positive");
    }
};

struct FixedPoint {
    StateVec x;
    double ybar0 = 0.0;
};

/// Composed slopes xi = F'(ybar0) <= 0 and eta = Phi'(ybar0) >= 0.
struct SlopePair {
    double xi = 0.0;
    double eta = 0.0;

    void validate() const {
        if (!(xi <= 0.0) || !std::isfinite(xi))
            throw OutOfRange("amplitude slope xi must be <= 0");
        if (!(eta >= 0.0) || !std::isfinite(eta))
            throw OutOfRange("frequency slope eta must be >= 0");
    }
};

struct StabilityReport {
    double psi_at_zero = 0.0;
    double psi_at_minus_one = 0.0;
    double c0 = 0.0;
    double c0_times_psi_c0 = 0.0;
    bool critical_branch_used = false;
    double critical_lhs = 0.0;  ///< |C e^{-2AT}(xi J + eta D)|, critical branch only
    double exp_pole_sum = 0.0;  ///< e^{(a1+a2+a3)T}, the bound used by two of the conditions
    Spectrum3 spectrum;
    double rho = 0.0;
    bool stable = false;
};

/// Coefficients of D(s) = s^3 - gamma1 s^2 - gamma2 s - gamma3.
struct AmplitudeCharPoly {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma3 = 0.0;

    [[nodiscard]] MonicCubic cubic() const { return {-gamma1, -gamma2, -gamma3}; }
};

enum class SlopeMode { amplitude, frequency, joint };

/// Critical case of the stability test when |c0(eta)| <= kCriticalRelTol * c0(0).
inline constexpr double kCriticalRelTol = 1e-12;
/// psi is rejected within kPoleRelTol * (1 + |pole|) of a pole.
inline constexpr double kPoleRelTol = 1e-9;

/// Everything about one (plant, target) pair that does not depend on the slopes, computed once.
class LinearizedCycle {
public:
    LinearizedCycle(const PlantParams& plant, const CycleTarget& target) : plant_(plant), target_(target) {
        target_.validate();
        const double T = target_.period;
        E_ = plant_.transition(T);
        x_ = target_.weight * matrix_function(plant_, T, MuFunction{}).col(0);
        J_ = E_.col(0);
        D_ = plant_.A() * x_;
        const Mat3 I_minus_E = Mat3::Identity() - E_;
        const Vec3 resolvent_b = I_minus_E.triangularView<Eigen::Lower>().solve(PlantParams::B());
        cab_ = PlantParams::C() * plant_.A() * resolvent_b;
        exp_pole_sum_ = std::exp(plant_.pole_sum() * T);
        c0_at_zero_ = std::exp(-plant_.pole_sum() * T);
    }

    [[nodiscard]] const PlantParams& plant() const noexcept { return plant_; }
    [[nodiscard]] const CycleTarget& target() const noexcept { return target_; }

    [[nodiscard]] FixedPoint fixed_point() const { return {x_, x_(2)}; }
    /// e^{AT}
    [[nodiscard]] const Mat3& propagator() const noexcept { return E_; }
    [[nodiscard]] const Vec3& D() const noexcept { return D_; }
    [[nodiscard]] const Vec3& J() const noexcept { return J_; }
    /// C A (I - e^{AT})^{-1} B, always negative.
    [[nodiscard]] double cab() const noexcept { return cab_; }
    [[nodiscard]] double exp_pole_sum() const noexcept { return exp_pole_sum_; }

    [[nodiscard]] Mat3 jacobian(const SlopePair& s) const {
        return E_ + feedback(s) * PlantParams::C();
    }

    /// psi(s) = 1 - C (sI - e^{AT})^{-1} (xi J + eta D)
    [[nodiscard]] double psi(const SlopePair& slopes, double s) const {
        for (int i = 0; i < 3; ++i) {
            const double pole = E_(i, i);
            if (std::abs(s - pole) < kPoleRelTol * (1.0 + std::abs(pole)))
                throw PoleProximity("psi: s = " + std::to_string(s) + " is at a pole of the resolvent");
        }
        const Mat3 M = s * Mat3::Identity() - E_;
        const Vec3 v = M.triangularView<Eigen::Lower>().solve(feedback(slopes));
        return 1.0 - v(2);
    }

    /// chi(s) = det(sI - Q)
    [[nodiscard]] double chi(const SlopePair& slopes, double s) const {
        return characteristic_polynomial(jacobian(slopes))(s);
    }

    /// c0(eta) = e^{-(a1+a2+a3)T} (1 + eta lambda C A (I - e^{AT})^{-1} B) = det Q
    [[nodiscard]] double c0(double eta) const {
        return c0_at_zero_ * (1.0 + eta * target_.weight * cab_);
    }

    /// Frequency slope at which c0 vanishes.
    [[nodiscard]] double eta_star() const { return -1.0 / (target_.weight * cab_); }

    [[nodiscard]] StabilityReport report(const SlopePair& slopes) const {
        slopes.validate();
        StabilityReport r;
        r.exp_pole_sum = exp_pole_sum_;
        r.psi_at_zero = psi(slopes, 0.0);
        r.psi_at_minus_one = psi(slopes, -1.0);
        r.c0 = c0(slopes.eta);
        r.critical_branch_used = std::abs(r.c0) <= kCriticalRelTol * c0_at_zero_;
        if (r.critical_branch_used) {
            const auto lower = E_.triangularView<Eigen::Lower>();
            const Vec3 once = lower.solve(feedback(slopes));
            r.critical_lhs = std::abs(lower.solve(once)(2));
            r.stable = r.psi_at_minus_one > 0.0 && r.critical_lhs < exp_pole_sum_;
        } else {
            r.c0_times_psi_c0 = r.c0 * psi(slopes, r.c0);
            r.stable = r.psi_at_zero > -exp_pole_sum_ && r.psi_at_minus_one > 0.0 && r.c0_times_psi_c0 > 0.0;
        }
        r.spectrum = cubic_eigenvalues(jacobian(slopes));
        r.rho = spectral_radius(r.spectrum);
        return r;
    }

    [[nodiscard]] AmplitudeCharPoly amplitude_char_poly(double xi) const {
        const double T = target_.period;
        const auto& a = plant_.a();
        const ExpFunction e;
        const double x1 = -a[0] * T, x2 = -a[1] * T, x3 = -a[2] * T;
        const double e1 = std::exp(x1), e2 = std::exp(x2), e3 = std::exp(x3);
        const double scale = xi * plant_.g1() * plant_.g2() * T * T;
        const double d12 = e.divided_difference(x1, x2);
        const double d23 = e.divided_difference(x2, x3);
        const double d123 = e.divided_difference(x1, x2, x3);
        AmplitudeCharPoly p;
        p.gamma1 = e1 + e2 + e3 + scale * d123;
        p.gamma2 = scale * (d12 * d23 - e2 * d123) - e1 * (e2 + e3) - std::exp(x2 + x3);
        p.gamma3 = c0_at_zero_;
        return p;
    }

    /// Eigenvector (u1, u2, 1) of Q(xi, 0) for a real eigenvalue s.
    [[nodiscard]] Vec3 amplitude_eigenvector(double xi, double s) const {
        const double e1 = E_(0, 0);
        const double e2 = E_(1, 1);
        if (std::abs(e1 - s) <= kPoleRelTol * (1.0 + std::abs(e1)) ||
            std::abs(e2 - s) <= kPoleRelTol * (1.0 + std::abs(e2)))
            throw DegenerateEigenvalue("amplitude_eigenvector: eigenvalue coincides with e^{-a1 T} or e^{-a2 T}");
        const double u1 = -xi * e1 / (e1 - s);
        const double u2 = xi * s * E_(1, 0) / ((e1 - s) * (e2 - s));
        return {u1, u2, 1.0};
    }

private:
    [[nodiscard]] Vec3 feedback(const SlopePair& s) const { return s.xi * J_ + s.eta * D_; }

    PlantParams plant_;
    CycleTarget target_;
    Mat3 E_;
    StateVec x_;
    Vec3 J_;
    Vec3 D_;
    double cab_ = 0.0;
    double exp_pole_sum_ = 0.0;
    double c0_at_zero_ = 0.0;
};

[[nodiscard]] inline FixedPoint fixed_point(const PlantParams& plant, const CycleTarget& target) {
    return LinearizedCycle(plant, target).fixed_point();
}

/// (D, J) with D = A X and J = e^{AT} B.
[[nodiscard]] inline std::pair<Vec3, Vec3> impulse_vectors(const PlantParams& plant, const CycleTarget& target) {
    const LinearizedCycle lc(plant, target);
    return {lc.D(), lc.J()};
}

[[nodiscard]] inline Mat3 jacobian(const PlantParams& plant, const CycleTarget& target, const SlopePair& slopes) {
    return LinearizedCycle(plant, target).jacobian(slopes);
}

[[nodiscard]] inline double psi(const PlantParams& plant, const CycleTarget& target, const SlopePair& slopes,
                                double s) {
    return LinearizedCycle(plant, target).psi(slopes, s);
}

[[nodiscard]] inline double c0(const PlantParams& plant, const CycleTarget& target, double eta) {
    if (!(eta >= 0.0))
        throw OutOfRange("c0: eta must be >= 0");
    return LinearizedCycle(plant, target).c0(eta);
}

[[nodiscard]] inline StabilityReport stability_report(const PlantParams& plant, const CycleTarget& target,
                                                      const SlopePair& slopes) {
    return LinearizedCycle(plant, target).report(slopes);
}

[[nodiscard]] inline AmplitudeCharPoly amplitude_char_poly(const PlantParams& plant, const CycleTarget& target,
                                                           double xi) {
    if (!(xi <= 0.0))
        throw OutOfRange("amplitude slope xi must be <= 0");
    return LinearizedCycle(plant, target).amplitude_char_poly(xi);
}

[[nodiscard]] inline Vec3 amplitude_eigenvector(const PlantParams& plant, const CycleTarget& target, double xi,
                                                double eigenvalue) {
    return LinearizedCycle(plant, target).amplitude_eigenvector(xi, eigenvalue);
}

/// Slope box for searches: xi in [xi_lo, xi_hi], eta in [eta_lo, eta_hi].
struct SlopeBox {
    double xi_lo = -30.0;
    double xi_hi = 0.0;
    double eta_lo = 0.0;
    double eta_hi = 3.0;

    void validate() const {
        if (!(xi_lo <= xi_hi && xi_hi <= 0.0 && eta_lo >= 0.0 && eta_lo <= eta_hi))
            throw OutOfRange("slope box must satisfy xi_lo <= xi_hi <= 0 <= eta_lo <= eta_hi");
    }
};

inline constexpr int kHopfScanPoints = 256;
inline constexpr double kHopfResolution = 1e-10;

namespace detail {

inline SlopePair single_slope(SlopeMode mode, double v) {
    return mode == SlopeMode::amplitude ? SlopePair{v, 0.0} : SlopePair{0.0, v};
}

}  // namespace detail

/**
 * @brief Single-slope value where two real multipliers merge into a complex pair.
 *
 * Scans the discriminant of det(sI - Q) outward from slope 0 over the box edge, then bisects
 * the first sign change.
 */
[[nodiscard]] inline double hopf_slope(const PlantParams& plant, const CycleTarget& target, SlopeMode mode,
                                       const SlopeBox& box = {}) {
    if (mode == SlopeMode::joint)
        throw OutOfRange("hopf_slope: mode must be amplitude or frequency");
    box.validate();
    const LinearizedCycle lc(plant, target);
    // Parameterise by distance from the open-loop end of the range.
    const double start = mode == SlopeMode::amplitude ? box.xi_hi : box.eta_lo;
    const double end = mode == SlopeMode::amplitude ? box.xi_lo : box.eta_hi;
    const auto disc = [&](double v) {
        return characteristic_polynomial(lc.jacobian(detail::single_slope(mode, v))).discriminant();
    };

    double prev_v = start;
    double prev_d = disc(start);
    for (int i = 1; i < kHopfScanPoints; ++i) {
        const double v = start + (end - start) * i / (kHopfScanPoints - 1);
        const double d = disc(v);
        if ((prev_d > 0.0) != (d > 0.0)) {
            double lo = prev_v;
            double hi = v;
            const bool lo_positive = prev_d > 0.0;
            while (std::abs(hi - lo) > kHopfResolution) {
                const double mid = 0.5 * (lo + hi);
                if ((disc(mid) > 0.0) == lo_positive)
                    lo = mid;
                else
                    hi = mid;
            }
            return 0.5 * (lo + hi);
        }
        prev_v = v;
        prev_d = d;
    }
    throw NoBifurcationInRange("hopf_slope: discriminant keeps its sign over the search range");
}

struct OptimalSlopes {
    SlopePair slopes;
    double rho = 0.0;
};

inline constexpr int kLineGridPoints = 2001;
inline constexpr int kJointGridPoints = 201;

namespace detail {

/// Golden-section minimisation of a unimodal f on [lo, hi].
inline std::pair<double, double> golden_min(const std::function<double(double)>& f, double lo, double hi) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo)); ++it) {
        if (fc <= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Evaluates f(i) for i in [0, n) across hardware threads.
inline std::vector<double> parallel_eval(std::size_t n, const std::function<double(std::size_t)>& f) {
    std::vector<double> out(n);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 16));
    if (workers == 1 || n < 1024) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = f(i);
        return out;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers)
                out[i] = f(i);
        });
    }
    return out;
}

}  // namespace detail

/// Grid search with local refinement for the slopes minimising rho(Q).
[[nodiscard]] inline OptimalSlopes min_spectral_radius(const PlantParams& plant, const CycleTarget& target,
                                                       SlopeMode mode, const SlopeBox& box = {}) {
    box.validate();
    const LinearizedCycle lc(plant, target);
    const auto rho = [&](const SlopePair& s) { return spectral_radius(cubic_eigenvalues(lc.jacobian(s))); };

    if (mode != SlopeMode::joint) {
        const double lo = mode == SlopeMode::amplitude ? box.xi_lo : box.eta_lo;
        const double hi = mode == SlopeMode::amplitude ? box.xi_hi : box.eta_hi;
        const auto at = [&](std::size_t i) { return lo + (hi - lo) * static_cast<double>(i) / (kLineGridPoints - 1); };
        const auto values = detail::parallel_eval(kLineGridPoints,
                                                  [&](std::size_t i) { return rho(detail::single_slope(mode, at(i))); });
        const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
        OptimalSlopes out{detail::single_slope(mode, at(best)), values[best]};
        if (hi > lo) {
            const double a = at(best == 0 ? 0 : best - 1);
            const double b = at(std::min<std::size_t>(best + 1, kLineGridPoints - 1));
            const auto [v, r] = detail::golden_min([&](double x) { return rho(detail::single_slope(mode, x)); }, a, b);
            if (r < out.rho)
                out = {detail::single_slope(mode, v), r};
        }
        return out;
    }

    const std::size_t n = kJointGridPoints;
    const auto xi_at = [&](double lo, double hi, std::size_t i) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };
    auto search = [&](double xlo, double xhi, double elo, double ehi) {
        const auto values = detail::parallel_eval(n * n, [&](std::size_t k) {
            return rho({xi_at(xlo, xhi, k / n), xi_at(elo, ehi, k % n)});
        });
        const auto k = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
        return std::pair{k, values[k]};
    };
    const auto [k, r] = search(box.xi_lo, box.xi_hi, box.eta_lo, box.eta_hi);
    OptimalSlopes out{{xi_at(box.xi_lo, box.xi_hi, k / n), xi_at(box.eta_lo, box.eta_hi, k % n)}, r};

    // One refinement pass on the cell neighbourhood of the coarse optimum.
    const double dx = (box.xi_hi - box.xi_lo) / static_cast<double>(n - 1);
    const double de = (box.eta_hi - box.eta_lo) / static_cast<double>(n - 1);
    const double xlo = std::max(box.xi_lo, out.slopes.xi - dx);
    const double xhi = std::min(box.xi_hi, out.slopes.xi + dx);
    const double elo = std::max(box.eta_lo, out.slopes.eta - de);
    const double ehi = std::min(box.eta_hi, out.slopes.eta + de);
    const auto [k2, r2] = search(xlo, xhi, elo, ehi);
    if (r2 < out.rho)
        out = {{xi_at(xlo, xhi, k2 / n), xi_at(elo, ehi, k2 % n)}, r2};
    return out;
}

}  // namespace pulsemod
