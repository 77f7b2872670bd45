#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pulsemod/cycle.hpp"
#include "pulsemod/population.hpp"
#include "pulsemod/sim.hpp"

using namespace pulsemod;

namespace {

const CycleTarget kReference{20.0, 200.0};

/// det(sI - E) from the oracle exponential.
double open_loop_det(const PlantParams& p, double T, double s) {
    const Mat3 E = oracle::expm(T * p.A());
    return (s * Mat3::Identity() - E).determinant();
}

/// chi(s) rebuilt from oracle eigenvalues.
double chi_from_eigenvalues(const Mat3& Q, double s) {
    std::complex<double> prod = 1.0;
    for (const auto& z : oracle::eigenvalues(Q))
        prod *= s - z;
    return prod.real();
}

}  // namespace

TEST(FixedPoint, ReferenceValues) {
    const auto fp = fixed_point(population::mean_plant(), kReference);
    EXPECT_NEAR(fp.x(0), 179.7316, 5e-4);
    EXPECT_NEAR(fp.x(1), 56.3880, 5e-4);
    EXPECT_NEAR(fp.x(2), 9.0833, 5e-4);
    EXPECT_EQ(fp.ybar0, fp.x(2));
}

TEST(FixedPoint, MatchesResolventFormAndIsInvariant) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ua(0.005, 0.1), uT(1.0, 60.0), ul(1.0, 500.0);
    for (int k = 0; k < 300; ++k) {
        const auto p = make_plant(ua(rng), 2.5);
        const CycleTarget tg{uT(rng), ul(rng)};
        const auto fp = fixed_point(p, tg);
        const Mat3 E = oracle::expm(tg.period * p.A());
        const Vec3 want = tg.weight * (E.inverse() - Mat3::Identity()).inverse() * PlantParams::B();
        EXPECT_LT((fp.x - want).norm(), 1e-9 * want.norm());
        EXPECT_LT((fp.x - E * (fp.x + tg.weight * PlantParams::B())).norm(), 1e-9 * fp.x.norm());
        EXPECT_TRUE((fp.x.array() > 0.0).all());
    }
}

TEST(FixedPoint, LinearInWeight) {
    const auto p = population::mean_plant();
    const auto a = fixed_point(p, {20.0, 200.0});
    const auto b = fixed_point(p, {20.0, 400.0});
    EXPECT_LT((b.x - 2.0 * a.x).norm(), 1e-12 * b.x.norm());
}

TEST(FixedPoint, ComponentsDecreaseWithAlpha) {
    Vec3 prev = Vec3::Constant(INFINITY);
    for (int i = 0; i < 100; ++i) {
        const double alpha = population::kAlphaDatasetMin +
                             (population::kAlphaDatasetMax - population::kAlphaDatasetMin) * i / 99.0;
        const auto fp = fixed_point(make_plant(alpha, 2.0), kReference);
        EXPECT_TRUE((fp.x.array() < prev.array()).all()) << alpha;
        prev = fp.x;
    }
}

TEST(FixedPoint, RejectsInvalidTargets) {
    const auto p = population::mean_plant();
    EXPECT_THROW((void)fixed_point(p, {0.0, 200.0}), OutOfRange);
    EXPECT_THROW((void)fixed_point(p, {20.0, 0.0}), OutOfRange);
}

TEST(ImpulseVectors, SignsAndIdentities) {
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> ua(1e-3, 0.1), uT(0.5, 80.0), ul(1.0, 500.0);
    for (int k = 0; k < 1000; ++k) {
        const auto p = make_plant(ua(rng), 2.5);
        const CycleTarget tg{uT(rng), ul(rng)};
        const auto [D, J] = impulse_vectors(p, tg);
        EXPECT_TRUE((D.array() < 0.0).all());
        EXPECT_TRUE((J.array() > 0.0).all());
        EXPECT_EQ(J, matrix_function(p, tg.period, ExpFunction{}).col(0));
        const Vec3 AX = p.A() * fixed_point(p, tg).x;
        EXPECT_LT((D - AX).norm(), 1e-10 * (1.0 + AX.norm()));
    }
}

TEST(Jacobian, OpenLoopIsPropagator) {
    const auto p = population::mean_plant();
    EXPECT_EQ(jacobian(p, kReference, {0.0, 0.0}), p.transition(kReference.period));
}

TEST(Jacobian, DeterminantEqualsC0ForAnyAmplitudeSlope) {
    const LinearizedCycle lc(population::mean_plant(), kReference);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> ux(-30.0, 0.0), ue(0.0, 3.0);
    for (int k = 0; k < 500; ++k) {
        const SlopePair s{ux(rng), ue(rng)};
        const double det = lc.jacobian(s).determinant();
        EXPECT_NEAR(det, lc.c0(s.eta), 1e-9 * std::abs(lc.c0(0.0)));
    }
}

TEST(Jacobian, NegativeFeedbackDirection) {
    const LinearizedCycle lc(population::mean_plant(), kReference);
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> ux(-30.0, 0.0), ue(0.0, 3.0);
    for (int k = 0; k < 500; ++k) {
        const SlopePair s{ux(rng), ue(rng)};
        if (s.xi == 0.0 && s.eta == 0.0)
            continue;
        const Vec3 w = s.xi * lc.J() + s.eta * lc.D();
        EXPECT_TRUE((w.array() < 0.0).all());
    }
}

TEST(Psi, OpenLoopIsOne) {
    const LinearizedCycle lc(population::mean_plant(), kReference);
    for (double s : {-2.0, -1.0, 0.0, 0.3, 2.0})
        EXPECT_EQ(lc.psi({0.0, 0.0}, s), 1.0);
}

TEST(Psi, RatioOfCharacteristicPolynomials) {
    std::mt19937_64 rng(47);
    std::uniform_real_distribution<double> ua(0.02, 0.06), ux(-30.0, 0.0), ue(0.0, 3.0), us(-2.0, 2.0);
    for (int k = 0; k < 500; ++k) {
        const auto p = make_plant(ua(rng), 2.5);
        const LinearizedCycle lc(p, kReference);
        const SlopePair sl{ux(rng), ue(rng)};
        const double s = us(rng);
        const double want = chi_from_eigenvalues(lc.jacobian(sl), s) / open_loop_det(p, kReference.period, s);
        EXPECT_NEAR(lc.psi(sl, s), want, 1e-9 * (1.0 + std::abs(want)));
        EXPECT_NEAR(lc.psi(sl, s) * open_loop_det(p, kReference.period, s), lc.chi(sl, s),
                    1e-9 * (1.0 + std::abs(lc.chi(sl, s))));
    }
}

TEST(Psi, RejectsPoles) {
    const LinearizedCycle lc(population::mean_plant(), kReference);
    const Mat3& E = lc.propagator();
    for (int i = 0; i < 3; ++i)
        EXPECT_THROW((void)lc.psi({-1.0, 0.5}, E(i, i)), PoleProximity);
}

TEST(C0, InterceptMonotonicityAndRoot) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const double intercept = std::exp(-p.pole_sum() * kReference.period);
    EXPECT_NEAR(lc.c0(0.0), intercept, 1e-15 * intercept);
    double prev = lc.c0(0.0);
    for (double eta = 0.05; eta < 5.0; eta += 0.05) {
        EXPECT_LT(lc.c0(eta), prev);
        prev = lc.c0(eta);
    }
    const double root = oracle::bisect([&](double e) { return lc.c0(e); }, 0.0, 50.0);
    EXPECT_NEAR(root, lc.eta_star(), 1e-10 * lc.eta_star());
    const Mat3 E = oracle::expm(kReference.period * p.A());
    const double cab = (PlantParams::C() * p.A() * (Mat3::Identity() - E).inverse() * PlantParams::B())(0);
    EXPECT_NEAR(lc.eta_star(), -1.0 / (kReference.weight * cab), 1e-9 * lc.eta_star());
    EXPECT_THROW((void)c0(p, kReference, -0.1), OutOfRange);
}

TEST(StabilityReport, OpenLoopIsStable) {
    const auto r = stability_report(population::mean_plant(), kReference, {0.0, 0.0});
    EXPECT_TRUE(r.stable);
    EXPECT_FALSE(r.critical_branch_used);
    EXPECT_NEAR(r.rho, std::exp(-population::kAlpha * kReference.period), 1e-12);
}

TEST(StabilityReport, ReferenceDesignConditionsHold) {
    const auto r = stability_report(population::mean_plant(), kReference, {-2.0, 0.7});
    EXPECT_TRUE(r.stable);
    EXPECT_FALSE(r.critical_branch_used);
    EXPECT_GT(r.psi_at_zero, -r.exp_pole_sum);
    EXPECT_GT(r.psi_at_minus_one, 0.0);
    EXPECT_GT(r.c0_times_psi_c0, 0.0);
    EXPECT_NEAR(r.rho, 0.2349, 1e-3);
    EXPECT_NEAR(r.spectrum.values[0].real(), 0.1551, 1e-3);
    EXPECT_NEAR(std::abs(r.spectrum.values[0].imag()), 0.1765, 1e-3);
    EXPECT_NEAR(r.spectrum.values[2].real(), 0.0002, 1e-3);
}

TEST(StabilityReport, RejectsInadmissibleSlopes) {
    const auto p = population::mean_plant();
    EXPECT_THROW((void)stability_report(p, kReference, {0.5, 0.0}), OutOfRange);
    EXPECT_THROW((void)stability_report(p, kReference, {-1.0, -0.1}), OutOfRange);
}

namespace {

struct VerdictCount {
    int stable = 0;
    int unstable = 0;
};

VerdictCount check_verdicts(const LinearizedCycle& lc, double xi_min, double eta_max, int n) {
    VerdictCount count;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const SlopePair s{xi_min * i / (n - 1), eta_max * j / (n - 1)};
            const auto r = lc.report(s);
            const bool want = oracle::schur_stable(lc.jacobian(s));
            EXPECT_EQ(r.stable, want) << s.xi << " " << s.eta;
            (want ? count.stable : count.unstable)++;
            if (r.stable && !r.critical_branch_used) {
                EXPECT_GT(r.rho, std::abs(r.c0));
            }
        }
    }
    return count;
}

}  // namespace

TEST(StabilityReport, VerdictMatchesEigenvalueOracleOnGrid) {
    const LinearizedCycle lc(population::mean_plant(), kReference);
    EXPECT_GT(check_verdicts(lc, -30.0, 3.0, 60).stable, 0);
}

// The default slope box is entirely stable for the mean plant; a wider box reaches the unstable side.
TEST(StabilityReport, VerdictMatchesOracleAcrossBoundary) {
    const LinearizedCycle lc(population::mean_plant(), kReference);
    const auto count = check_verdicts(lc, -200.0, 30.0, 60);
    EXPECT_GT(count.stable, 0);
    EXPECT_GT(count.unstable, 0);
}

TEST(StabilityReport, CriticalBranchAtEtaStar) {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> ua(population::kAlphaDatasetMin, population::kAlphaDatasetMax);
    std::uniform_real_distribution<double> ux(-30.0, 0.0);
    for (int k = 0; k < 50; ++k) {
        const LinearizedCycle lc(make_plant(ua(rng), 2.5), kReference);
        const SlopePair s{ux(rng), lc.eta_star()};
        const auto r = lc.report(s);
        EXPECT_TRUE(r.critical_branch_used);
        EXPECT_EQ(r.stable, oracle::schur_stable(lc.jacobian(s)));
    }
}

TEST(AmplitudeCharPoly, OpenLoopRootsArePoles) {
    const auto p = population::mean_plant();
    const auto poly = amplitude_char_poly(p, kReference, 0.0);
    const auto s = cubic_roots(poly.cubic());
    const auto& a = p.a();
    const std::vector<std::complex<double>> want{std::exp(-a[0] * 20.0), std::exp(-a[1] * 20.0),
                                                 std::exp(-a[2] * 20.0)};
    EXPECT_LT(oracle::max_matching_error(oracle::as_vector(s), want), 1e-12);
}

TEST(AmplitudeCharPoly, MatchesAssembledJacobian) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const double gamma3 = std::exp(-p.pole_sum() * kReference.period);
    std::vector<double> xs, g1s;
    for (double xi = 0.0; xi >= -30.0; xi -= 0.75) {
        const auto poly = lc.amplitude_char_poly(xi);
        EXPECT_NEAR(poly.gamma3, gamma3, 1e-15 * gamma3);
        const Mat3 Q = lc.jacobian({xi, 0.0});
        EXPECT_NEAR(Q.determinant(), gamma3, 1e-9 * gamma3);
        EXPECT_NEAR(poly.gamma1, Q.trace(), 1e-12);
        const auto ev = oracle::eigenvalues(Q);
        const std::complex<double> pair_sum = ev[0] * ev[1] + ev[0] * ev[2] + ev[1] * ev[2];
        EXPECT_NEAR(poly.gamma2, -pair_sum.real(), 1e-10);
        EXPECT_NEAR(poly.gamma3, (ev[0] * ev[1] * ev[2]).real(), 1e-10);
        EXPECT_LT(oracle::max_matching_error(oracle::as_vector(cubic_roots(poly.cubic())),
                                             oracle::as_vector(cubic_eigenvalues(Q))),
                  1e-9);
        xs.push_back(xi);
        g1s.push_back(poly.gamma1);
    }
    // gamma1 is affine in xi.
    const double slope = (g1s.back() - g1s.front()) / (xs.back() - xs.front());
    for (std::size_t i = 0; i < xs.size(); ++i)
        EXPECT_NEAR(g1s[i], g1s.front() + slope * (xs[i] - xs.front()), 1e-12);
}

TEST(AmplitudeEigenvector, OpenLoopThirdMode) {
    const auto p = population::mean_plant();
    const Vec3 u = amplitude_eigenvector(p, kReference, 0.0, std::exp(-p.a()[2] * 20.0));
    EXPECT_EQ(u, Vec3(0.0, 0.0, 1.0));
}

TEST(AmplitudeEigenvector, ResidualAndDirectFormula) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const Mat3 E = oracle::expm(20.0 * p.A());
    for (double xi : {-0.5, -2.0, -5.0, -8.0}) {
        const Mat3 Q = lc.jacobian({xi, 0.0});
        for (const auto& z : cubic_eigenvalues(Q).values) {
            if (z.imag() != 0.0)
                continue;
            const double s = z.real();
            const Vec3 u = lc.amplitude_eigenvector(xi, s);
            EXPECT_LT((Q * u - s * u).norm(), 1e-8 * u.norm()) << xi << " " << s;
            const double u1 = -xi * E(0, 0) / (E(0, 0) - s);
            const double u2 = xi * s * E(1, 0) / ((E(0, 0) - s) * (E(1, 1) - s));
            EXPECT_NEAR(u(0), u1, 1e-9 * (1.0 + std::abs(u1)));
            EXPECT_NEAR(u(1), u2, 1e-9 * (1.0 + std::abs(u2)));
        }
    }
    EXPECT_THROW((void)lc.amplitude_eigenvector(-2.0, E(0, 0)), DegenerateEigenvalue);
    EXPECT_THROW((void)lc.amplitude_eigenvector(-2.0, E(1, 1)), DegenerateEigenvalue);
}

TEST(HopfSlope, AmplitudeDoubleRoot) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const double xi = hopf_slope(p, kReference, SlopeMode::amplitude);
    EXPECT_LT(xi, 0.0);
    const auto disc = [&](double x) { return characteristic_polynomial(lc.jacobian({x, 0.0})).discriminant(); };
    EXPECT_GT(disc(xi + 1e-6), 0.0);
    EXPECT_LT(disc(xi - 1e-6), 0.0);

    // D(s) = (s - r1)^2 (s - r3) with the double root r1 and the simple root r3.
    const auto poly = lc.amplitude_char_poly(xi);
    const auto ev = oracle::eigenvalues(lc.jacobian({xi, 0.0}));
    std::vector<double> re;
    for (const auto& z : ev)
        re.push_back(z.real());
    std::sort(re.begin(), re.end());
    const double r3 = re[0];
    const double r1 = 0.5 * (re[1] + re[2]);
    EXPECT_NEAR(poly.gamma1, 2.0 * r1 + r3, 1e-6);
    EXPECT_NEAR(poly.gamma2, -(r1 * r1 + 2.0 * r1 * r3), 1e-6);
    EXPECT_NEAR(poly.gamma3, r1 * r1 * r3, 1e-6);
}

TEST(HopfSlope, FrequencyModeAndErrors) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const double eta = hopf_slope(p, kReference, SlopeMode::frequency);
    EXPECT_GT(eta, 0.0);
    const auto disc = [&](double e) { return characteristic_polynomial(lc.jacobian({0.0, e})).discriminant(); };
    EXPECT_GT(disc(eta - 1e-6), 0.0);
    EXPECT_LT(disc(eta + 1e-6), 0.0);
    EXPECT_THROW((void)hopf_slope(p, kReference, SlopeMode::amplitude, {-1.0, 0.0, 0.0, 3.0}), NoBifurcationInRange);
    EXPECT_THROW((void)hopf_slope(p, kReference, SlopeMode::joint), OutOfRange);
}

TEST(MinSpectralRadius, SingleSlopeModesSitAtHopfPoint) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const double e_a1 = std::exp(-p.a()[0] * 20.0);
    const double e_a3 = std::exp(-p.a()[2] * 20.0);

    const auto amp = min_spectral_radius(p, kReference, SlopeMode::amplitude);
    EXPECT_NEAR(amp.slopes.xi, hopf_slope(p, kReference, SlopeMode::amplitude), 1e-2);
    EXPECT_LE(amp.rho, e_a1);
    const double h = 30.0 / (kLineGridPoints - 1);
    EXPECT_LE(amp.rho, oracle::spectral_radius(lc.jacobian({std::min(0.0, amp.slopes.xi + h), 0.0})));
    EXPECT_LE(amp.rho, oracle::spectral_radius(lc.jacobian({amp.slopes.xi - h, 0.0})));

    const auto freq = min_spectral_radius(p, kReference, SlopeMode::frequency);
    EXPECT_NEAR(freq.slopes.eta, hopf_slope(p, kReference, SlopeMode::frequency), 1e-2);
    EXPECT_LE(freq.rho, e_a1);
    EXPECT_GE(freq.rho, e_a3);
}

TEST(MinSpectralRadius, JointModeBeatsOpenLoop) {
    const auto p = population::mean_plant();
    const LinearizedCycle lc(p, kReference);
    const auto joint = min_spectral_radius(p, kReference, SlopeMode::joint);
    EXPECT_LE(joint.rho, std::exp(-p.a()[0] * 20.0));
    EXPECT_NEAR(joint.rho, oracle::spectral_radius(lc.jacobian(joint.slopes)), 1e-9);
    const double dx = 30.0 / (kJointGridPoints - 1), de = 3.0 / (kJointGridPoints - 1);
    for (int i = -1; i <= 1; ++i) {
        for (int j = -1; j <= 1; ++j) {
            const SlopePair s{std::clamp(joint.slopes.xi + i * dx, -30.0, 0.0),
                              std::clamp(joint.slopes.eta + j * de, 0.0, 3.0)};
            EXPECT_LE(joint.rho, oracle::spectral_radius(lc.jacobian(s)) + 1e-12);
        }
    }
}

TEST(CrossModule, FixedPointIsInvariantUnderConstantPulseTrain) {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> ua(0.01, 0.1), uT(2.0, 40.0), ul(10.0, 400.0);
    for (int k = 0; k < 200; ++k) {
        const auto p = make_plant(ua(rng), 2.5);
        const CycleTarget tg{uT(rng), ul(rng)};
        const Vec3 X = fixed_point(p, tg).x;
        EXPECT_LT((impulse_map(p, tg, X) - X).norm(), 1e-9 * X.norm());
    }
}
