#pragma once

// JSON serialisation of library values and provenance stamps for output files.
// Requires nlohmann/json on the include path.

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "cohort.hpp"
#include "cycle.hpp"
#include "design.hpp"
#include "format.hpp"

namespace pulsemod {

inline constexpr std::string_view kVersion = "1.0.0";

/// 64-bit FNV-1a.
[[nodiscard]] constexpr std::uint64_t fnv1a(std::string_view data) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct Provenance {
    std::string command;
    std::vector<std::string> args;

    [[nodiscard]] std::string args_hash() const {
        std::string joined;
        for (const auto& a : args) {
            joined += a;
            joined.push_back('\0');
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(joined)));
        return buf;
    }

    /// '#'-prefixed first line for CSV outputs.
    [[nodiscard]] std::string csv_line() const {
        return "# pulsemod " + command + " version=" + std::string(kVersion) + " args_fnv1a=" + args_hash();
    }

    [[nodiscard]] nlohmann::json json() const {
        return {{"command", command}, {"version", std::string(kVersion)}, {"args_fnv1a", args_hash()}};
    }
};

[[nodiscard]] inline nlohmann::json to_json(const ModulationConfig& c) {
    return {{"k1", c.k1},
            {"k2", c.k2},
            {"k3", c.k3},
            {"k4", c.k4},
            {"phi_lo", c.bounds.phi_lo},
            {"phi_hi", c.bounds.phi_hi},
            {"f_lo", c.bounds.f_lo},
            {"f_hi", c.bounds.f_hi}};
}

/// Reads the eight modulation fields; other keys (such as provenance) are ignored.
[[nodiscard]] inline ModulationConfig modulation_from_json(const nlohmann::json& j) {
    const auto get = [&](const char* key) {
        if (!j.contains(key) || !j.at(key).is_number())
            throw ValidationError(std::string("modulation config: missing numeric field '") + key + "'");
        return j.at(key).get<double>();
    };
    ModulationConfig c;
    c.k1 = get("k1");
    c.k2 = get("k2");
    c.k3 = get("k3");
    c.k4 = get("k4");
    c.bounds = {get("phi_lo"), get("phi_hi"), get("f_lo"), get("f_hi")};
    c.validate();
    return c;
}

[[nodiscard]] inline nlohmann::json to_json(const FixedPoint& fp) {
    return {{"x", {fp.x(0), fp.x(1), fp.x(2)}}, {"ybar0", fp.ybar0}};
}

[[nodiscard]] inline nlohmann::json to_json(const Spectrum3& s) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < 3; ++i)
        out.push_back({{"re", s.values[i].real()},
                       {"im", s.values[i].imag()},
                       {"kind", s.kinds[i] == RootKind::real ? "real" : "conjugate_pair"}});
    return out;
}

[[nodiscard]] inline nlohmann::json to_json(const StabilityReport& r) {
    nlohmann::json j = {{"psi_at_zero", r.psi_at_zero},
                        {"psi_at_minus_one", r.psi_at_minus_one},
                        {"c0", r.c0},
                        {"critical_branch_used", r.critical_branch_used},
                        {"exp_pole_sum", r.exp_pole_sum},
                        {"eigenvalues", to_json(r.spectrum)},
                        {"rho", r.rho},
                        {"stable", r.stable}};
    if (r.critical_branch_used)
        j["critical_lhs"] = r.critical_lhs;
    else
        j["c0_times_psi_c0"] = r.c0_times_psi_c0;
    return j;
}

[[nodiscard]] inline nlohmann::json summary_json(const EvaluationReport& r) {
    nlohmann::json never_below = nlohmann::json::array();
    for (const auto& o : r.per_patient) {
        if (o.never_below_y_max)
            never_below.push_back(o.pin);
    }
    return {{"case_label", r.case_label},
            {"underdose_count", r.underdose_count},
            {"overdose_count", r.overdose_count},
            {"n", r.per_patient.size()},
            {"never_below_y_max_pins", never_below}};
}

}  // namespace pulsemod
