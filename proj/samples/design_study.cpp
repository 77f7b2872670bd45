// Reference design study: fixed point, stability of the chosen slopes, modulation design,
// and the closed-loop transient from an empty patient.

#include <iomanip>
#include <iostream>

#include "pulsemod/pulsemod.hpp"

int main() {
    using namespace pulsemod;
    const PlantParams plant = population::mean_plant();
    const CycleTarget target{20.0, 200.0};
    const SlopePair slopes{-2.0, 0.7};

    std::cout << std::setprecision(6);
    const LinearizedCycle cycle(plant, target);
    const FixedPoint fp = cycle.fixed_point();
    std::cout << "X = " << fp.x.transpose() << "\n";

    const StabilityReport report = cycle.report(slopes);
    std::cout << "rho = " << report.rho << (report.stable ? " (stable)" : " (unstable)") << "\n";

    const DesignResult design = design_modulation(plant, target, slopes);
    const ModulationConfig& c = design.config;
    std::cout << "k1 = " << c.k1 << ", k2 = " << c.k2 << ", k3 = " << c.k3 << ", k4 = " << c.k4 << "\n";

    const SimTrace trace = simulate_closed_loop(plant, c, StateVec::Zero(), 12 * target.period);
    const TraceMetrics m = trace_metrics(trace, target.period);
    std::cout << "inf y = " << m.inf_y << " %, sup y on [T, 5T] = " << m.sup_y_T_5T << " %\n";

    std::cout << "first firings:";
    for (std::size_t i = 0; i < 6 && i < trace.firings.size(); ++i)
        std::cout << " (" << trace.firings[i].time << " min, " << trace.firings[i].weight << ")";
    std::cout << "\n";

    const Corridor corridor = cycle_corridor(plant, target);
    std::cout << "1-cycle corridor: [" << corridor.y_lo << ", " << corridor.y_hi << "] %\n";
    return 0;
}
