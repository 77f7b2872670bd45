#pragma once

/**
 * @file sim.hpp
 * @brief Exact event-driven simulation of impulsive dosing.
 *
 * Between impulses the plant is LTI, so every sample is x(t) = e^{A(t - t_n)} (x(t_n^-) + lambda_n B)
 * evaluated through the chain-matrix exponential. Samples lie on the global grid t = k dt and are
 * observational only: they never influence firing times or weights.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include "cycle.hpp"
#include "design.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "plant.hpp"

namespace pulsemod {

struct Firing {
    double time = 0.0;
    double weight = 0.0;
    double interval = 0.0;  ///< time until the next firing (or to the horizon for a last open-loop event)
    StateVec x_pre = StateVec::Zero();
};

struct Sample {
    double time = 0.0;
    StateVec x = StateVec::Zero();
    double ybar = 0.0;
    double y = 100.0;
};

struct SimTrace {
    std::vector<Firing> firings;
    std::vector<Sample> samples;
    double dt_sample = 0.0;
    double horizon = 0.0;
};

struct DoseEvent {
    double time = 0.0;
    double dose = 0.0;
};

struct DoseSchedule {
    std::vector<DoseEvent> events;

    void validate() const {
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (!(events[i].dose > 0.0) || !std::isfinite(events[i].dose))
                throw OutOfRange("dose schedule: doses must be positive");
            if (!(events[i].time >= 0.0) || !std::isfinite(events[i].time))
                throw OutOfRange("dose schedule: times must be nonnegative");
            if (i > 0 && events[i].time < events[i - 1].time)
                throw OutOfRange("dose schedule: times must be nondecreasing");
        }
    }

    /// Bolus at t = 0 followed by `count` maintenance doses every `period`.
    [[nodiscard]] static DoseSchedule standard(double bolus = 400.0, double maintenance = 200.0,
                                               double period = 20.0, int count = 4) {
        DoseSchedule s;
        s.events.push_back({0.0, bolus});
        for (int i = 1; i <= count; ++i)
            s.events.push_back({period * i, maintenance});
        return s;
    }
};

inline constexpr double kDefaultDtSample = 0.01;
inline constexpr double kDefaultHorizonPeriods = 12.0;
inline constexpr double kDefaultBolus = 400.0;

/// Closed-loop protocol knobs. The first firing happens at t = 0.
struct ClosedLoopOptions {
    /// Forces the weight of the first firing; std::nullopt keeps pure feedback.
    std::optional<double> first_weight = kDefaultBolus;
};

struct ImpulseStep {
    StateVec x_next;
    double interval = 0.0;
    double weight = 0.0;
};

namespace detail {

inline void require_nonnegative(const StateVec& x) {
    if (!(x.array() >= 0.0).all())
        throw NegativeConcentration("state must be componentwise nonnegative");
}

inline void require_sampling(double horizon, double dt) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw OutOfRange("horizon must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw OutOfRange("dt_sample must be positive");
}

inline Sample make_sample(const PlantParams& plant, double t, const StateVec& x) {
    const double ybar = std::max(0.0, x(2));
    return {t, x, ybar, hill(plant, ybar)};
}

/// Appends grid samples k dt in [t0, t1) (or [t0, t1] when `closed`) from the post-jump state x0 at t0.
inline void sample_segment(const PlantParams& plant, SimTrace& trace, std::size_t& next_k, double t0, double t1,
                           const StateVec& x0, bool closed) {
    const double dt = trace.dt_sample;
    for (;; ++next_k) {
        const double t = static_cast<double>(next_k) * dt;
        if (t > trace.horizon * (1.0 + 1e-12))
            return;
        if (closed ? t > t1 : t >= t1)
            return;
        trace.samples.push_back(make_sample(plant, t, plant.transition(std::max(0.0, t - t0)) * x0));
    }
}

}  // namespace detail

/// One impulse-to-impulse step under modulation: read C x_pre, fire, propagate over the chosen interval.
[[nodiscard]] inline ImpulseStep impulse_step(const PlantParams& plant, const ModulationConfig& config,
                                              const StateVec& x_pre) {
    detail::require_nonnegative(x_pre);
    const auto out = eval_modulation(config, hill(plant, x_pre(2)));
    return {plant.transition(out.interval) * (x_pre + out.weight * PlantParams::B()), out.interval, out.weight};
}

/// One step with constant interval and weight.
[[nodiscard]] inline ImpulseStep impulse_step(const PlantParams& plant, const CycleTarget& constants,
                                              const StateVec& x_pre) {
    detail::require_nonnegative(x_pre);
    if (!(constants.period > 0.0) || !(constants.weight >= 0.0))
        throw OutOfRange("constant modulation needs T > 0 and lambda >= 0");
    return {plant.transition(constants.period) * (x_pre + constants.weight * PlantParams::B()), constants.period,
            constants.weight};
}

template <class Policy>
[[nodiscard]] StateVec impulse_map(const PlantParams& plant, const Policy& policy, const StateVec& x_pre) {
    return impulse_step(plant, policy, x_pre).x_next;
}

[[nodiscard]] inline SimTrace simulate_closed_loop(const PlantParams& plant, const ModulationConfig& config,
                                                   const StateVec& x0, double horizon,
                                                   double dt_sample = kDefaultDtSample,
                                                   const ClosedLoopOptions& options = {}) {
    config.validate();
    detail::require_sampling(horizon, dt_sample);
    detail::require_nonnegative(x0);
    if (options.first_weight && !(*options.first_weight > 0.0))
        throw OutOfRange("first-dose override must be positive");

    SimTrace trace;
    trace.dt_sample = dt_sample;
    trace.horizon = horizon;
    std::size_t k = 0;
    double t = 0.0;
    StateVec x = x0;
    bool first = true;
    while (t <= horizon) {
        auto out = eval_modulation(config, hill(plant, x(2)));
        if (first && options.first_weight)
            out.weight = *options.first_weight;
        first = false;
        trace.firings.push_back({t, out.weight, out.interval, x});
        const StateVec post = x + out.weight * PlantParams::B();
        const double t_next = t + out.interval;
        detail::sample_segment(plant, trace, k, t, t_next, post, false);
        x = plant.transition(out.interval) * post;
        t = t_next;
    }
    return trace;
}

/// Applies each scheduled dose as an exact impulse; coincident events are merged by summing doses.
[[nodiscard]] inline SimTrace simulate_open_loop(const PlantParams& plant, const DoseSchedule& schedule,
                                                 double horizon, double dt_sample = kDefaultDtSample,
                                                 const StateVec& x0 = StateVec::Zero()) {
    schedule.validate();
    detail::require_sampling(horizon, dt_sample);
    detail::require_nonnegative(x0);

    std::vector<DoseEvent> merged;
    for (const auto& e : schedule.events) {
        if (e.time > horizon)
            throw OutOfRange("dose schedule extends past the horizon");
        if (!merged.empty() && merged.back().time == e.time)
            merged.back().dose += e.dose;
        else
            merged.push_back(e);
    }

    SimTrace trace;
    trace.dt_sample = dt_sample;
    trace.horizon = horizon;
    std::size_t k = 0;
    double t = 0.0;
    StateVec x = x0;
    for (std::size_t i = 0; i <= merged.size(); ++i) {
        const bool last = i == merged.size();
        const double t_event = last ? horizon : merged[i].time;
        detail::sample_segment(plant, trace, k, t, t_event, x, last);
        x = plant.transition(t_event - t) * x;
        t = t_event;
        if (!last) {
            const double next = i + 1 < merged.size() ? merged[i + 1].time : horizon;
            trace.firings.push_back({t, merged[i].dose, next - t, x});
            x += merged[i].dose * PlantParams::B();
        }
    }
    return trace;
}

namespace detail {

/// Vertex of the parabola through (-h, a), (0, b), (h, c); returns b when the three are collinear.
inline double parabola_extremum(double a, double b, double c) {
    const double curvature = a - 2.0 * b + c;
    if (curvature == 0.0)
        return b;
    return b - (a - c) * (a - c) / (8.0 * curvature);
}

}  // namespace detail

struct TraceMetrics {
    double inf_y = 0.0;
    double sup_y_T_5T = 0.0;
};

/// inf of y over the whole trace and sup of y over [T, 5T], with quadratic refinement at interior extremes.
[[nodiscard]] inline TraceMetrics trace_metrics(const SimTrace& trace, double period_T) {
    if (!(period_T > 0.0))
        throw OutOfRange("trace_metrics: period must be positive");
    const auto& s = trace.samples;
    const double tol = 1e-9 * (1.0 + 5.0 * period_T);
    if (s.empty() || s.back().time < 5.0 * period_T - tol)
        throw HorizonTooShort("trace must cover at least 5 T");

    TraceMetrics m;
    const auto min_it = std::min_element(s.begin(), s.end(), [](const Sample& l, const Sample& r) { return l.y < r.y; });
    const auto i = static_cast<std::size_t>(min_it - s.begin());
    m.inf_y = s[i].y;
    if (i > 0 && i + 1 < s.size())
        m.inf_y = std::min(m.inf_y, detail::parabola_extremum(s[i - 1].y, s[i].y, s[i + 1].y));

    std::size_t lo = s.size();
    std::size_t hi = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (s[j].time >= period_T - tol && s[j].time <= 5.0 * period_T + tol) {
            lo = std::min(lo, j);
            hi = j;
        }
    }
    std::size_t jmax = lo;
    for (std::size_t j = lo; j <= hi; ++j) {
        if (s[j].y > s[jmax].y)
            jmax = j;
    }
    m.sup_y_T_5T = s[jmax].y;
    if (jmax > lo && jmax < hi)
        m.sup_y_T_5T = std::max(m.sup_y_T_5T, detail::parabola_extremum(s[jmax - 1].y, s[jmax].y, s[jmax + 1].y));
    return m;
}

struct Corridor {
    double y_lo = 0.0;
    double y_hi = 0.0;
};

/// Output band of the steady 1-cycle started at the fixed point, by dense periodic sampling.
[[nodiscard]] inline Corridor cycle_corridor(const PlantParams& plant, const CycleTarget& target,
                                             double dt_sample = kDefaultDtSample) {
    target.validate();
    if (!(dt_sample > 0.0) || dt_sample >= target.period)
        throw OutOfRange("cycle_corridor: dt_sample must lie in (0, T)");
    const StateVec post = fixed_point(plant, target).x + target.weight * PlantParams::B();
    const double T = target.period;
    const auto y_at = [&](double tau) {
        tau = std::fmod(tau, T);
        if (tau < 0.0)
            tau += T;
        return hill(plant, std::max(0.0, (plant.transition(tau) * post)(2)));
    };

    const auto n = static_cast<std::size_t>(std::ceil(T / dt_sample - 1e-9));
    std::vector<double> y(n);
    for (std::size_t k = 0; k < n; ++k)
        y[k] = y_at(static_cast<double>(k) * dt_sample);
    const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
    const auto refine = [&](std::size_t k) {
        const double tau = static_cast<double>(k) * dt_sample;
        return detail::parabola_extremum(y_at(tau - dt_sample), y[k], y_at(tau + dt_sample));
    };
    const auto kmin = static_cast<std::size_t>(min_it - y.begin());
    const auto kmax = static_cast<std::size_t>(max_it - y.begin());
    return {std::min(y[kmin], refine(kmin)), std::max(y[kmax], refine(kmax))};
}

/// Header `time_min,x1,x2,x3,ybar,y`, rows in time order.
inline void write_samples_csv(std::ostream& os, const SimTrace& trace) {
    os << "time_min,x1,x2,x3,ybar,y\n";
    for (const auto& s : trace.samples) {
        os << format_full(s.time) << ',' << format_full(s.x(0)) << ',' << format_full(s.x(1)) << ','
           << format_full(s.x(2)) << ',' << format_full(s.ybar) << ',' << format_full(s.y) << '\n';
    }
}

/// Header `t_min,weight,interval`.
inline void write_firings_csv(std::ostream& os, const SimTrace& trace) {
    os << "t_min,weight,interval\n";
    for (const auto& f : trace.firings)
        os << format_full(f.time) << ',' << format_full(f.weight) << ',' << format_full(f.interval) << '\n';
}

}  // namespace pulsemod
