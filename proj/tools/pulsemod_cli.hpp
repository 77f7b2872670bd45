#pragma once

// Command-line front end. `run` is separated from main so tests can drive it in-process.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pulsemod/io.hpp"
#include "pulsemod/pulsemod.hpp"

namespace pulsemod::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Slope presets of the reference design comparison.
inline constexpr std::array<SlopePair, 5> kDesignCases{{
    {0.0, 0.0},
    {-1.0, 4.0},
    {-2.0, 0.7},
    {-2.0, 0.33707},
    {-1.0, 0.392},
}};

/// Config files: a flat JSON object, or key=value lines (INI/TOML subset handled by CLI11).
class FlatConfig : public CLI::ConfigTOML {
public:
    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        const std::string text{std::istreambuf_iterator<char>(input), std::istreambuf_iterator<char>()};
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first == std::string::npos || text[first] != '{') {
            std::istringstream again(text);
            return CLI::ConfigTOML::from_config(again);
        }
        const auto j = nlohmann::json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw CLI::ConversionError("config file is not a flat JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_string())
                item.inputs = {value.get<std::string>()};
            else if (value.is_boolean())
                item.inputs = {value.get<bool>() ? "true" : "false"};
            else if (value.is_number())
                item.inputs = {format_full(value.get<double>())};
            else
                throw CLI::ConversionError("config key '" + key + "' must be a scalar");
            items.push_back(std::move(item));
        }
        return items;
    }
};

struct Options {
    double alpha = population::kAlpha;
    double gamma = population::kGamma;
    double c50 = kDefaultC50;
    double T = population::kReferencePeriod;
    double lambda = population::kReferenceWeight;
    double xi = 0.0;
    double eta = 0.0;
    std::optional<int> design_case;
    SaturationBounds bounds;
    std::string out_dir;
    bool json = false;
    std::string config_file;

    // simulate / evaluate
    std::string mode;
    std::string modulation_file;
    std::string x0 = "zero";
    double first_dose = kDefaultBolus;
    bool no_first_dose = false;
    double bolus = 400.0;
    double maintenance = 200.0;
    int doses = 4;
    std::optional<double> horizon;
    double dt = kDefaultDtSample;

    // sweep
    SlopeBox box;
    int points = 201;

    // evaluate
    std::string cohort_file;
    std::size_t synthetic = 48;
    std::uint64_t seed = 1;
    LognormalParams alpha_dist = kDefaultAlphaDist;
    LognormalParams gamma_dist = kDefaultGammaDist;
    double y_min = 2.0;
    double y_max = 10.0;
    std::string label;
};

namespace detail {

inline void add_plant(CLI::App& app, Options& o) {
    app.add_option("--alpha", o.alpha, "PK scale alpha, 1/min (default: population mean)");
    app.add_option("--gamma", o.gamma, "Hill exponent (default: population mean)");
    app.add_option("--c50", o.c50, "Half-effect concentration, ug/ml");
}

inline void add_target(CLI::App& app, Options& o) {
    app.add_option("--T", o.T, "Cycle period, min");
    app.add_option("--lambda", o.lambda, "Impulse weight, ug/kg");
}

inline void add_slopes(CLI::App& app, Options& o) {
    app.add_option("--xi", o.xi, "Composed amplitude slope F'(ybar0), <= 0");
    app.add_option("--eta", o.eta, "Composed frequency slope Phi'(ybar0), >= 0");
    app.add_option("--case", o.design_case, "Preset design case 0..4 (overrides --xi/--eta)")->check(CLI::Range(0, 4));
}

inline void add_bounds(CLI::App& app, Options& o) {
    app.add_option("--phi-lo", o.bounds.phi_lo, "Minimum inter-dose interval, min");
    app.add_option("--phi-hi", o.bounds.phi_hi, "Maximum inter-dose interval, min");
    app.add_option("--f-lo", o.bounds.f_lo, "Minimum dose, ug/kg");
    app.add_option("--f-hi", o.bounds.f_hi, "Maximum dose, ug/kg");
}

inline void add_output(CLI::App& app, Options& o) {
    app.add_option("--out", o.out_dir, "Directory for output files");
    app.add_flag("--json", o.json, "Print JSON instead of human-readable text");
}

inline SlopePair slopes(const Options& o) {
    return o.design_case ? kDesignCases[static_cast<std::size_t>(*o.design_case)] : SlopePair{o.xi, o.eta};
}

inline CycleTarget target(const Options& o) {
    CycleTarget t{o.T, o.lambda};
    t.validate();
    return t;
}

inline std::filesystem::path out_path(const Options& o, const std::string& name) {
    std::filesystem::create_directories(o.out_dir);
    return std::filesystem::path(o.out_dir) / name;
}

inline void write_json(const Options& o, const std::string& name, const nlohmann::json& j) {
    std::ofstream f(out_path(o, name));
    if (!f)
        throw ValidationError("cannot write " + name + " in " + o.out_dir);
    f << j.dump(2) << '\n';
}

inline std::ofstream open_csv(const Options& o, const std::string& name, const Provenance& prov) {
    std::ofstream f(out_path(o, name));
    if (!f)
        throw ValidationError("cannot write " + name + " in " + o.out_dir);
    f << prov.csv_line() << '\n';
    return f;
}

inline ModulationConfig load_modulation(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ValidationError("cannot open modulation file " + path);
    const auto j = nlohmann::json::parse(f, nullptr, false);
    if (j.is_discarded())
        throw ValidationError("modulation file " + path + " is not valid JSON");
    return modulation_from_json(j);
}

inline std::vector<PatientRecord> load_cohort_file(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ValidationError("cannot open cohort file " + path);
    return load_cohort(f);
}

inline std::string vec3(const Vec3& v) {
    return "(" + format_human(v(0)) + ", " + format_human(v(1)) + ", " + format_human(v(2)) + ")";
}

/// Applies a --config file to the parsed subcommand; options given on the command line win.
inline void apply_config(CLI::App& sub, const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ValidationError("cannot open config file " + path);
    for (const auto& item : FlatConfig{}.from_config(f)) {
        if (!item.parents.empty())
            throw ValidationError("config file " + path + ": sections are not supported ('" + item.fullname() + "')");
        CLI::Option* opt = item.name == "config" ? nullptr : sub.get_option_no_throw("--" + item.name);
        if (opt == nullptr)
            throw ValidationError("config file " + path + ": unknown key '" + item.name + "' for " + sub.get_name());
        if (opt->count() > 0)
            continue;
        for (const auto& v : item.inputs)
            opt->add_result(v);
        opt->run_callback();
    }
}

/// Open-loop schedule; zero doses are dropped, so `--bolus 0 --doses 0` gives an empty schedule.
inline DoseSchedule schedule(const Options& o, double period) {
    DoseSchedule s;
    for (const auto& e : DoseSchedule::standard(o.bolus, o.maintenance, period, o.doses).events) {
        if (e.dose != 0.0)
            s.events.push_back(e);
    }
    return s;
}

/// Modulation for closed-loop commands: an explicit file, otherwise designed on the nominal plant.
inline ModulationConfig modulation(const Options& o, const PlantParams& nominal, std::ostream& err) {
    if (!o.modulation_file.empty())
        return load_modulation(o.modulation_file);
    const auto d = design_modulation(nominal, target(o), slopes(o), o.bounds);
    for (const auto& w : d.warnings)
        err << "warning: " << w << '\n';
    return d.config;
}

}  // namespace detail

inline int cmd_fixed_point(const Options& o, const Provenance& prov, std::ostream& out) {
    const auto plant = make_plant(o.alpha, o.gamma, o.c50);
    const auto fp = fixed_point(plant, detail::target(o));
    auto j = to_json(fp);
    j["provenance"] = prov.json();
    if (!o.out_dir.empty())
        detail::write_json(o, "fixed_point.json", j);
    if (o.json) {
        out << j.dump(2) << '\n';
    } else {
        out << "fixed point X = " << detail::vec3(fp.x) << '\n';
        out << "ybar0 = " << format_human(fp.ybar0) << " ug/ml\n";
    }
    return kExitOk;
}

inline int cmd_stability(const Options& o, const Provenance& prov, std::ostream& out) {
    const auto plant = make_plant(o.alpha, o.gamma, o.c50);
    const auto s = detail::slopes(o);
    const auto r = stability_report(plant, detail::target(o), s);
    auto j = to_json(r);
    j["xi"] = s.xi;
    j["eta"] = s.eta;
    j["provenance"] = prov.json();
    if (!o.out_dir.empty())
        detail::write_json(o, "stability.json", j);
    if (o.json) {
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    out << "slopes xi = " << format_human(s.xi) << ", eta = " << format_human(s.eta) << '\n';
    out << "psi(0) = " << format_human(r.psi_at_zero) << "  (bound > " << format_human(-r.exp_pole_sum) << ")\n";
    out << "psi(-1) = " << format_human(r.psi_at_minus_one) << "  (bound > 0)\n";
    out << "c0 = " << format_human(r.c0) << '\n';
    if (r.critical_branch_used)
        out << "critical case: |C e^{-2AT}(xi J + eta D)| = " << format_human(r.critical_lhs) << '\n';
    else
        out << "c0 psi(c0) = " << format_human(r.c0_times_psi_c0) << "  (bound > 0)\n";
    out << "eigenvalues:";
    for (const auto& z : r.spectrum.values)
        out << ' ' << format_human(z.real()) << (z.imag() < 0 ? "-" : "+") << format_human(std::abs(z.imag())) << 'i';
    out << "\nrho = " << format_human(r.rho) << '\n';
    out << "verdict: " << (r.stable ? "stable" : "unstable") << '\n';
    return kExitOk;
}

inline int cmd_design(const Options& o, const Provenance& prov, std::ostream& out, std::ostream& err) {
    const auto plant = make_plant(o.alpha, o.gamma, o.c50);
    const auto d = design_modulation(plant, detail::target(o), detail::slopes(o), o.bounds);
    for (const auto& w : d.warnings)
        err << "warning: " << w << '\n';
    auto j = to_json(d.config);
    j["y_design"] = d.y_design;
    j["hill_slope"] = d.hill_slope;
    j["warnings"] = d.warnings;
    j["provenance"] = prov.json();
    if (!o.out_dir.empty())
        detail::write_json(o, "modulation.json", j);
    if (o.json) {
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    const auto& c = d.config;
    out << "phi(ybar0) = " << format_human(d.y_design) << " %, phi'(ybar0) = " << format_human(d.hill_slope) << '\n';
    out << "k1 = " << format_human(c.k1) << "  k2 = " << format_human(c.k2) << "  k3 = " << format_human(c.k3)
        << "  k4 = " << format_human(c.k4) << '\n';
    out << "interval in [" << format_human(c.bounds.phi_lo) << ", " << format_human(c.bounds.phi_hi)
        << "] min, weight in [" << format_human(c.bounds.f_lo) << ", " << format_human(c.bounds.f_hi) << "] ug/kg\n";
    return kExitOk;
}

inline int cmd_simulate(const Options& o, const Provenance& prov, std::ostream& out, std::ostream& err) {
    const auto plant = make_plant(o.alpha, o.gamma, o.c50);
    const auto tgt = detail::target(o);
    const double horizon = o.horizon.value_or(kDefaultHorizonPeriods * tgt.period);

    SimTrace trace;
    if (o.mode == "open") {
        trace = simulate_open_loop(plant, detail::schedule(o, tgt.period), horizon, o.dt);
    } else {
        const auto config = detail::modulation(o, plant, err);
        StateVec x0 = StateVec::Zero();
        if (o.x0 == "fixed")
            x0 = fixed_point(plant, tgt).x;
        ClosedLoopOptions cl;
        cl.first_weight = o.no_first_dose ? std::nullopt : std::optional<double>(o.first_dose);
        trace = simulate_closed_loop(plant, config, x0, horizon, o.dt, cl);
    }

    if (!o.out_dir.empty()) {
        auto samples = detail::open_csv(o, "samples.csv", prov);
        write_samples_csv(samples, trace);
        auto firings = detail::open_csv(o, "firings.csv", prov);
        write_firings_csv(firings, trace);
    }

    nlohmann::json j = {{"firings", trace.firings.size()}, {"samples", trace.samples.size()}, {"horizon", horizon}};
    std::optional<TraceMetrics> m;
    if (horizon >= 5.0 * tgt.period) {
        m = trace_metrics(trace, tgt.period);
        j["inf_y"] = m->inf_y;
        j["sup_y_T_5T"] = m->sup_y_T_5T;
    }
    j["provenance"] = prov.json();
    if (o.json) {
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    out << (o.mode == "open" ? "open loop" : "closed loop") << ": " << trace.firings.size() << " firings, "
        << trace.samples.size() << " samples over " << format_human(horizon) << " min\n";
    if (m)
        out << "inf y = " << format_human(m->inf_y) << " %, sup y on [T, 5T] = " << format_human(m->sup_y_T_5T)
            << " %\n";
    return kExitOk;
}

inline int cmd_sweep(const Options& o, const Provenance& prov, std::ostream& out) {
    const auto plant = make_plant(o.alpha, o.gamma, o.c50);
    const auto tgt = detail::target(o);
    o.box.validate();
    if (o.points < 2)
        throw OutOfRange("--points must be at least 2");
    const LinearizedCycle lc(plant, tgt);
    const auto n = static_cast<std::size_t>(o.points);
    const auto lerp = [n](double lo, double hi, std::size_t i) {
        return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    };

    std::vector<std::pair<SlopePair, double>> rows;
    SlopeMode mode = SlopeMode::amplitude;
    if (o.mode == "frequency")
        mode = SlopeMode::frequency;
    else if (o.mode == "joint")
        mode = SlopeMode::joint;
    for (std::size_t i = 0; i < n; ++i) {
        if (mode == SlopeMode::joint) {
            for (std::size_t k = 0; k < n; ++k)
                rows.push_back({{lerp(o.box.xi_lo, o.box.xi_hi, i), lerp(o.box.eta_lo, o.box.eta_hi, k)}, 0.0});
        } else if (mode == SlopeMode::amplitude) {
            rows.push_back({{lerp(o.box.xi_lo, o.box.xi_hi, i), 0.0}, 0.0});
        } else {
            rows.push_back({{0.0, lerp(o.box.eta_lo, o.box.eta_hi, i)}, 0.0});
        }
    }
    for (auto& [s, rho] : rows)
        rho = spectral_radius(cubic_eigenvalues(lc.jacobian(s)));

    if (!o.out_dir.empty()) {
        auto f = detail::open_csv(o, "sweep.csv", prov);
        f << "xi,eta,rho\n";
        for (const auto& [s, rho] : rows)
            f << format_full(s.xi) << ',' << format_full(s.eta) << ',' << format_full(rho) << '\n';
    }

    const auto best = min_spectral_radius(plant, tgt, mode, o.box);
    nlohmann::json j = {{"mode", o.mode}, {"points", rows.size()}, {"best_xi", best.slopes.xi},
                        {"best_eta", best.slopes.eta}, {"best_rho", best.rho}};
    // Single-slope sweeps also report the Hopf crossing; none in the box is a numeric failure (exit 3),
    // raised after sweep.csv has been written.
    std::optional<double> hopf;
    if (mode != SlopeMode::joint) {
        hopf = hopf_slope(plant, tgt, mode, o.box);
        j["hopf_slope"] = *hopf;
    }
    j["provenance"] = prov.json();
    if (o.json) {
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    out << o.mode << " sweep over " << rows.size() << " points\n";
    out << "minimum rho = " << format_human(best.rho) << " at xi = " << format_human(best.slopes.xi)
        << ", eta = " << format_human(best.slopes.eta) << '\n';
    if (mode != SlopeMode::joint)
        out << "hopf slope = " << format_human(*hopf) << '\n';
    return kExitOk;
}

inline int cmd_evaluate(const Options& o, const Provenance& prov, std::ostream& out, std::ostream& err) {
    const auto nominal = make_plant(o.alpha, o.gamma, o.c50);
    const auto tgt = detail::target(o);
    const bool synthetic = o.cohort_file.empty();
    const auto cohort = synthetic ? sample_cohort(o.synthetic, o.alpha_dist, o.gamma_dist, o.seed)
                                  : detail::load_cohort_file(o.cohort_file);

    EvaluationOptions eo;
    eo.y_min = o.y_min;
    eo.y_max = o.y_max;
    eo.period_T = tgt.period;
    eo.horizon = o.horizon;
    eo.dt_sample = o.dt;
    eo.closed_loop.first_weight = o.no_first_dose ? std::nullopt : std::optional<double>(o.first_dose);

    DosingPolicy policy;
    if (o.mode == "open") {
        policy = detail::schedule(o, tgt.period);
        eo.case_label = o.label.empty() ? "open-loop" : o.label;
    } else {
        policy = detail::modulation(o, nominal, err);
        eo.case_label = !o.label.empty()         ? o.label
                        : o.design_case          ? "case " + std::to_string(*o.design_case)
                        : o.modulation_file.empty() ? "closed-loop"
                                                    : o.modulation_file;
    }

    const auto report = evaluate_cohort(cohort, policy, eo);
    auto summary = summary_json(report);
    summary["provenance"] = prov.json();
    if (!o.out_dir.empty()) {
        auto f = detail::open_csv(o, "report.csv", prov);
        write_report_csv(f, report);
        detail::write_json(o, "summary.json", summary);
        if (synthetic) {
            auto c = detail::open_csv(o, "cohort.csv", prov);
            write_cohort_csv(c, cohort);
        }
    }
    if (o.json) {
        out << summary.dump(2) << '\n';
        return kExitOk;
    }
    out << report.case_label << ": n = " << report.per_patient.size() << ", underdose (y > " << format_human(o.y_max)
        << " on [T, 5T]) = " << report.underdose_count << ", overdose (y < " << format_human(o.y_min)
        << ") = " << report.overdose_count << '\n';
    for (const auto& p : report.per_patient) {
        if (p.underdose || p.overdose)
            out << "  pin " << p.pin << (p.underdose ? " underdose" : "") << (p.never_below_y_max ? " never-below" : "")
                << (p.overdose ? " overdose" : "") << '\n';
    }
    return kExitOk;
}

/// Runs one command line (without the program name). Returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Design and evaluation of pulse-modulated impulsive dosing controllers", "pulsemod"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_file, "Flat key=value or JSON file supplying any long flag")
            ->check(CLI::ExistingFile);
        detail::add_plant(*sub, o);
        detail::add_target(*sub, o);
        detail::add_output(*sub, o);
    };

    auto* fp = app.add_subcommand("fixed-point", "Fixed point of the target 1-cycle");
    add_common(fp);

    auto* st = app.add_subcommand("stability", "Stability test of the 1-cycle for given slopes");
    add_common(st);
    detail::add_slopes(*st, o);

    auto* de = app.add_subcommand("design", "Design piecewise-affine modulation functions");
    add_common(de);
    detail::add_slopes(*de, o);
    detail::add_bounds(*de, o);

    auto add_dosing = [&](CLI::App* sub) {
        detail::add_slopes(*sub, o);
        detail::add_bounds(*sub, o);
        sub->add_option("--mode", o.mode, "closed (modulated feedback) or open (fixed schedule)")
            ->check(CLI::IsMember({"closed", "open"}));
        sub->add_option("--modulation", o.modulation_file, "Modulation JSON written by `design`")
            ->check(CLI::ExistingFile);
        sub->add_option("--first-dose", o.first_dose, "Weight forced on the first closed-loop firing, ug/kg");
        sub->add_flag("--no-first-dose", o.no_first_dose, "Use pure feedback for the first firing");
        sub->add_option("--bolus", o.bolus, "Open loop: bolus at t = 0, ug/kg");
        sub->add_option("--maintenance", o.maintenance, "Open loop: maintenance dose, ug/kg");
        sub->add_option("--doses", o.doses, "Open loop: number of maintenance doses, one every T")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--horizon", o.horizon, "Simulation horizon, min (default 12 T)");
        sub->add_option("--dt", o.dt, "Output sampling step, min");
    };

    auto* si = app.add_subcommand("simulate", "Simulate one patient and write sampled traces");
    add_common(si);
    add_dosing(si);
    si->add_option("--x0", o.x0, "Initial state: zero or fixed (the 1-cycle fixed point)")
        ->check(CLI::IsMember({"zero", "fixed"}));

    auto* sw = app.add_subcommand("sweep", "Spectral radius of the Jacobian over a slope grid");
    add_common(sw);
    sw->add_option("--mode", o.mode, "amplitude, frequency or joint")
        ->check(CLI::IsMember({"amplitude", "frequency", "joint"}));
    sw->add_option("--xi-lo", o.box.xi_lo, "Lower amplitude slope");
    sw->add_option("--xi-hi", o.box.xi_hi, "Upper amplitude slope");
    sw->add_option("--eta-lo", o.box.eta_lo, "Lower frequency slope");
    sw->add_option("--eta-hi", o.box.eta_hi, "Upper frequency slope");
    sw->add_option("--points", o.points, "Grid points per axis");

    auto* ev = app.add_subcommand("evaluate", "Evaluate a dosing policy on a patient cohort");
    add_common(ev);
    add_dosing(ev);
    ev->add_option("--cohort", o.cohort_file, "CSV with header pin,alpha,gamma")->check(CLI::ExistingFile);
    ev->add_option("--synthetic", o.synthetic, "Synthetic cohort size when no --cohort is given");
    ev->add_option("--seed", o.seed, "Seed of the synthetic cohort");
    ev->add_option("--alpha-median", o.alpha_dist.median, "Synthetic alpha: lognormal median");
    ev->add_option("--alpha-logsd", o.alpha_dist.log_sd, "Synthetic alpha: sd of log alpha");
    ev->add_option("--gamma-median", o.gamma_dist.median, "Synthetic gamma: lognormal median");
    ev->add_option("--gamma-logsd", o.gamma_dist.log_sd, "Synthetic gamma: sd of log gamma");
    ev->add_option("--y-min", o.y_min, "Lower clinical bound on y, %");
    ev->add_option("--y-max", o.y_max, "Upper clinical bound on y, %");
    ev->add_option("--label", o.label, "Case label for the summary");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    Provenance prov;
    prov.args = args;
    try {
        if (!o.config_file.empty())
            detail::apply_config(*app.get_subcommands().front(), o.config_file);
        if (fp->parsed()) {
            prov.command = "fixed-point";
            return cmd_fixed_point(o, prov, out);
        }
        if (st->parsed()) {
            prov.command = "stability";
            return cmd_stability(o, prov, out);
        }
        if (de->parsed()) {
            prov.command = "design";
            return cmd_design(o, prov, out, err);
        }
        if (si->parsed()) {
            prov.command = "simulate";
            if (o.mode.empty())
                o.mode = "closed";
            return cmd_simulate(o, prov, out, err);
        }
        if (sw->parsed()) {
            prov.command = "sweep";
            if (o.mode.empty())
                o.mode = "amplitude";
            return cmd_sweep(o, prov, out);
        }
        if (ev->parsed()) {
            prov.command = "evaluate";
            if (o.mode.empty())
                o.mode = "closed";
            return cmd_evaluate(o, prov, out, err);
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const CLI::Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    return kExitValidation;
}

}  // namespace pulsemod::cli
