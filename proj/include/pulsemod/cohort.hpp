#pragma once

/**
 * @file cohort.hpp
 * @brief Virtual-patient cohorts: CSV ingestion, seeded lognormal synthesis, and
 *        evaluation of a dosing policy against clinical output bounds.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "design.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "plant.hpp"
#include "population.hpp"
#include "sim.hpp"

namespace pulsemod {

struct PatientRecord {
    int pin = 0;
    double alpha = 0.0;
    double gamma = 0.0;

    /// False when (alpha, gamma) lies outside the extent of the identified clinical dataset.
    [[nodiscard]] bool in_dataset_range() const noexcept {
        return alpha >= population::kAlphaDatasetMin && alpha <= population::kAlphaDatasetMax &&
               gamma >= population::kGammaDatasetMin && gamma <= population::kGammaDatasetMax;
    }

    [[nodiscard]] PlantParams plant(double c50 = kDefaultC50) const { return make_plant(alpha, gamma, c50); }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
        out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

template <class T>
T parse_number(const std::string& cell, std::size_t row, const char* field) {
    T value{};
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last)
        throw ParseError(row, std::string("cannot parse ") + field + " from '" + cell + "'");
    return value;
}

}  // namespace detail

/// Reads `pin,alpha,gamma` CSV. Lines starting with '#' and blank lines are ignored; rows are numbered from 1 by line.
[[nodiscard]] inline std::vector<PatientRecord> load_cohort(std::istream& in) {
    std::vector<PatientRecord> out;
    std::set<int> seen;
    std::string line;
    std::size_t row = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++row;
        const std::string t = detail::trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        const auto cells = detail::split_csv(t);
        if (!header_seen) {
            if (cells != std::vector<std::string>{"pin", "alpha", "gamma"})
                throw ParseError(row, "expected header 'pin,alpha,gamma'");
            header_seen = true;
            continue;
        }
        if (cells.size() != 3)
            throw ParseError(row, "expected 3 fields, got " + std::to_string(cells.size()));
        PatientRecord r;
        r.pin = detail::parse_number<int>(cells[0], row, "pin");
        r.alpha = detail::parse_number<double>(cells[1], row, "alpha");
        r.gamma = detail::parse_number<double>(cells[2], row, "gamma");
        if (r.pin <= 0)
            throw ParseError(row, "pin must be a positive integer");
        try {
            (void)make_plant(r.alpha, r.gamma);
        } catch (const OutOfRange& e) {
            throw OutOfRange("row " + std::to_string(row) + ": " + e.what());
        }
        if (!seen.insert(r.pin).second)
            throw DuplicatePin("row " + std::to_string(row) + ": duplicate pin " + std::to_string(r.pin));
        out.push_back(r);
    }
    if (!header_seen)
        throw ParseError(row, "missing header 'pin,alpha,gamma'");
    return out;
}

/// Lognormal law parameterised by its median and the standard deviation of log X.
struct LognormalParams {
    double median = 1.0;
    double log_sd = 0.1;

    void validate() const {
        if (!(median > 0.0) || !(log_sd > 0.0) || !std::isfinite(median) || !std::isfinite(log_sd))
            throw OutOfRange("lognormal median and log-sd must be positive");
    }
};

/// Defaults centred on the population-mean patient; +-2.1 sd spans the clinical dataset's range.
inline constexpr LognormalParams kDefaultAlphaDist{0.0374, 0.16};
inline constexpr LognormalParams kDefaultGammaDist{2.6677, 0.33};

/// Seeded synthetic cohort with PINs 1..n. Draws outside the model's hard ranges are redrawn.
[[nodiscard]] inline std::vector<PatientRecord> sample_cohort(std::size_t n, const LognormalParams& alpha_dist,
                                                              const LognormalParams& gamma_dist,
                                                              std::uint64_t seed) {
    if (n == 0)
        throw OutOfRange("cohort size must be positive");
    alpha_dist.validate();
    gamma_dist.validate();
    std::mt19937_64 rng(seed);
    std::lognormal_distribution<double> da(std::log(alpha_dist.median), alpha_dist.log_sd);
    std::lognormal_distribution<double> dg(std::log(gamma_dist.median), gamma_dist.log_sd);
    std::vector<PatientRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double a = 0.0;
        double g = 0.0;
        do {
            a = da(rng);
        } while (!(a > 0.0 && a <= kAlphaMax));
        do {
            g = dg(rng);
        } while (!(g > 0.0 && g <= kGammaMax));
        out.push_back({static_cast<int>(i + 1), a, g});
    }
    return out;
}

using DosingPolicy = std::variant<ModulationConfig, DoseSchedule>;

struct EvaluationOptions {
    double y_min = 2.0;
    double y_max = 10.0;
    double period_T = 20.0;                    ///< T used for the [T, 5T] window
    std::optional<double> horizon;             ///< defaults to 12 T
    double dt_sample = kDefaultDtSample;
    ClosedLoopOptions closed_loop;             ///< first-dose override for modulation policies
    std::string case_label;
};

struct PatientOutcome {
    int pin = 0;
    double inf_y = 0.0;
    double sup_y_T_5T = 0.0;
    bool underdose = false;
    bool overdose = false;
    bool never_below_y_max = false;  ///< y stayed above y_max over the whole horizon
};

struct EvaluationReport {
    std::vector<PatientOutcome> per_patient;
    std::size_t underdose_count = 0;
    std::size_t overdose_count = 0;
    std::string case_label;
};

[[nodiscard]] inline PatientOutcome evaluate_patient(const PatientRecord& patient, const DosingPolicy& policy,
                                                     const EvaluationOptions& opt) {
    const PlantParams plant = patient.plant();
    const double horizon = opt.horizon.value_or(kDefaultHorizonPeriods * opt.period_T);
    const SimTrace trace = std::visit(
        [&](const auto& p) {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ModulationConfig>)
                return simulate_closed_loop(plant, p, StateVec::Zero(), horizon, opt.dt_sample, opt.closed_loop);
            else
                return simulate_open_loop(plant, p, horizon, opt.dt_sample);
        },
        policy);
    const TraceMetrics m = trace_metrics(trace, opt.period_T);
    PatientOutcome o;
    o.pin = patient.pin;
    o.inf_y = m.inf_y;
    o.sup_y_T_5T = m.sup_y_T_5T;
    o.underdose = m.sup_y_T_5T > opt.y_max;
    o.overdose = m.inf_y < opt.y_min;
    o.never_below_y_max = m.inf_y > opt.y_max;
    return o;
}

/// Simulates every patient from x0 = 0. Patients run concurrently; the report is ordered by PIN.
[[nodiscard]] inline EvaluationReport evaluate_cohort(const std::vector<PatientRecord>& cohort,
                                                      const DosingPolicy& policy, const EvaluationOptions& opt = {}) {
    if (!(opt.y_min <= opt.y_max))
        throw OutOfRange("clinical bounds must satisfy y_min <= y_max");
    std::visit([](const auto& p) { p.validate(); }, policy);

    std::vector<PatientOutcome> outcomes(cohort.size());
    std::vector<std::exception_ptr> errors(cohort.size());
    const std::size_t workers =
        std::max<std::size_t>(1, std::min<std::size_t>({std::thread::hardware_concurrency(), cohort.size(), 16}));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < cohort.size(); i += workers) {
                    try {
                        outcomes[i] = evaluate_patient(cohort[i], policy, opt);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }

    // Report the failure of the smallest PIN so the error is deterministic.
    std::optional<std::size_t> failed;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        if (errors[i] && (!failed || cohort[i].pin < cohort[*failed].pin))
            failed = i;
    }
    if (failed) {
        try {
            std::rethrow_exception(errors[*failed]);
        } catch (const std::exception& e) {
            throw PatientSimulationError(cohort[*failed].pin, e.what());
        }
    }

    EvaluationReport r;
    r.case_label = opt.case_label;
    r.per_patient = std::move(outcomes);
    std::sort(r.per_patient.begin(), r.per_patient.end(),
              [](const PatientOutcome& a, const PatientOutcome& b) { return a.pin < b.pin; });
    for (const auto& o : r.per_patient) {
        r.underdose_count += o.underdose ? 1 : 0;
        r.overdose_count += o.overdose ? 1 : 0;
    }
    return r;
}

/// Header `pin,inf_y,sup_y_T_5T,underdose,overdose`; flags are 0/1.
inline void write_report_csv(std::ostream& os, const EvaluationReport& report) {
    os << "pin,inf_y,sup_y_T_5T,underdose,overdose\n";
    for (const auto& o : report.per_patient) {
        os << o.pin << ',' << format_full(o.inf_y) << ',' << format_full(o.sup_y_T_5T) << ',' << (o.underdose ? 1 : 0)
           << ',' << (o.overdose ? 1 : 0) << '\n';
    }
}

/// Header `pin,alpha,gamma`.
inline void write_cohort_csv(std::ostream& os, const std::vector<PatientRecord>& cohort) {
    os << "pin,alpha,gamma\n";
    for (const auto& p : cohort)
        os << p.pin << ',' << format_full(p.alpha) << ',' << format_full(p.gamma) << '\n';
}

}  // namespace pulsemod
