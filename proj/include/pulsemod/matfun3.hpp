#pragma once

/**
 * @file matfun3.hpp
 * @brief Exact scalar-function evaluation on 3x3 lower-bidiagonal chain matrices.
 *
 * A chain matrix has diagonal (-a1, -a2, -a3) with a1 < a2 < a3 and subdiagonal (g1, g2).
 * For such a matrix the Opitz formula expresses f(tM) through divided differences of f
 * at the scaled eigenvalues -a_i t, so no series or ODE stepping is ever needed.
 *
 * The module also holds the closed-form cubic eigenvalue solver used for every 3x3
 * spectrum in the library.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace pulsemod {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using RowVec3 = Eigen::RowVector3d;

/// Nodes closer than this (relative to 1 + max|x|) are treated as confluent.
inline constexpr double kNodeSeparation = 1e-9;
/// An eigenvalue is real when |Im| <= kRealTolerance * (1 + |Re|).
inline constexpr double kRealTolerance = 1e-9;

namespace detail {

inline void require_separated(std::span<const double> nodes) {
    double scale = 0.0;
    for (double x : nodes)
        scale = std::max(scale, std::abs(x));
    const double tol = kNodeSeparation * (1.0 + scale);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (std::size_t j = i + 1; j < nodes.size(); ++j) {
            if (std::abs(nodes[i] - nodes[j]) < tol) {
                throw NodesTooClose("divided differences: nodes " + std::to_string(nodes[i]) + " and " +
                                    std::to_string(nodes[j]) + " are confluent");
            }
        }
    }
}

}  // namespace detail

/// Triangular table of divided differences; entry (i, j) with i <= j is f[x_i, ..., x_j].
class DividedDifferenceTable {
public:
    DividedDifferenceTable(std::vector<double> nodes, std::vector<double> entries)
        : nodes_(std::move(nodes)), entries_(std::move(entries)) {}

    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const {
        if (i > j || j >= size())
            throw OutOfRange("divided difference index out of range");
        return entries_[i * size() + j];
    }

    /// f[x_0, ..., x_{n-1}]
    [[nodiscard]] double highest() const { return (*this)(0, size() - 1); }

private:
    std::vector<double> nodes_;
    std::vector<double> entries_;
};

/// Recursive divided differences of f over pairwise-distinct nodes.
template <class F>
    requires std::invocable<const F&, double>
[[nodiscard]] DividedDifferenceTable divided_differences(const F& f, std::span<const double> nodes) {
    const std::size_t n = nodes.size();
    if (n == 0)
        throw OutOfRange("divided differences need at least one node");
    detail::require_separated(nodes);

    std::vector<long double> work(n * n, 0.0L);
    for (std::size_t i = 0; i < n; ++i)
        work[i * n + i] = static_cast<long double>(f(nodes[i]));
    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t i = 0; i + k < n; ++i) {
            const std::size_t j = i + k;
            work[i * n + j] = (work[(i + 1) * n + j] - work[i * n + j - 1]) /
                              (static_cast<long double>(nodes[j]) - static_cast<long double>(nodes[i]));
        }
    }
    std::vector<double> entries(work.begin(), work.end());
    return {std::vector<double>(nodes.begin(), nodes.end()), std::move(entries)};
}

/// Functions that know how to evaluate their own first and second divided differences accurately.
template <class F>
concept StableDividedDifferences = requires(const F& f, double x) {
    { f.divided_difference(x, x) } -> std::convertible_to<double>;
    { f.divided_difference(x, x, x) } -> std::convertible_to<double>;
};

/// exp with cancellation-free divided differences, valid even for confluent nodes.
struct ExpFunction {
    double operator()(double x) const { return std::exp(x); }

    [[nodiscard]] double divided_difference(double x0, double x1) const {
        const double h = x1 - x0;
        if (h == 0.0)
            return std::exp(x0);
        return std::exp(x0) * std::expm1(h) / h;
    }

    [[nodiscard]] double divided_difference(double x0, double x1, double x2) const {
        const double h1 = x1 - x0;
        const double h2 = x2 - x0;
        if (std::max(std::abs(h1), std::abs(h2)) <= 1.0) {
            // exp[0, h1, h2] = sum_{n>=2} S_{n-2}(h1, h2) / n!, S_m the complete homogeneous polynomial.
            double s = 1.0;
            double h2_pow = 1.0;
            double factorial = 2.0;
            double sum = 0.5;
            for (int n = 3; n < 40; ++n) {
                h2_pow *= h2;
                s = h1 * s + h2_pow;
                factorial *= n;
                const double term = s / factorial;
                sum += term;
                if (std::abs(term) <= 1e-18 * std::abs(sum))
                    break;
            }
            return std::exp(x0) * sum;
        }
        const double d01 = divided_difference(x0, x1);
        const double d12 = divided_difference(x1, x2);
        return (d12 - d01) / (x2 - x0);
    }
};

/// mu(x) = 1 / (e^{-x} - 1), positive increasing and convex on x < 0.
struct MuFunction {
    double operator()(double x) const { return 1.0 / std::expm1(-x); }
};

/// nu(x) = -x mu(x) = x / (1 - e^{-x}).
struct NuFunction {
    double operator()(double x) const { return -x / std::expm1(-x); }
};

/// rho(x) = x / (1 - e^{x}), concave on x < 0.
struct RhoFunction {
    double operator()(double x) const { return -x / std::expm1(x); }
};

/// A 3x3 lower-bidiagonal chain matrix with diagonal (-rates) and subdiagonal (g1, g2).
struct ChainMatrix {
    std::array<double, 3> rates{};
    double g1 = 0.0;
    double g2 = 0.0;

    [[nodiscard]] Mat3 dense() const {
        Mat3 m = Mat3::Zero();
        m(0, 0) = -rates[0];
        m(1, 1) = -rates[1];
        m(2, 2) = -rates[2];
        m(1, 0) = g1;
        m(2, 1) = g2;
        return m;
    }
};

/**
 * @brief f(t M) for a chain matrix M by the Opitz formula.
 *
 * Diagonal f(-a_i t); subdiagonal g1 t f[-a1 t, -a2 t] and g2 t f[-a2 t, -a3 t];
 * corner g1 g2 t^2 f[-a1 t, -a2 t, -a3 t]. Entries above the diagonal are exactly zero.
 */
template <class F>
    requires std::invocable<const F&, double>
[[nodiscard]] Mat3 matrix_function(const ChainMatrix& m, double t, const F& f) {
    if (!(t > 0.0))
        throw OutOfRange("matrix_function: t must be positive");
    const std::array<double, 3> x{-m.rates[0] * t, -m.rates[1] * t, -m.rates[2] * t};

    double d01 = 0.0;
    double d12 = 0.0;
    double d012 = 0.0;
    if constexpr (StableDividedDifferences<F>) {
        d01 = f.divided_difference(x[0], x[1]);
        d12 = f.divided_difference(x[1], x[2]);
        d012 = f.divided_difference(x[0], x[1], x[2]);
    } else {
        const auto table = divided_differences(f, std::span<const double>(x));
        d01 = table(0, 1);
        d12 = table(1, 2);
        d012 = table(0, 2);
    }

    Mat3 out = Mat3::Zero();
    out(0, 0) = f(x[0]);
    out(1, 1) = f(x[1]);
    out(2, 2) = f(x[2]);
    out(1, 0) = m.g1 * t * d01;
    out(2, 1) = m.g2 * t * d12;
    out(2, 0) = m.g1 * m.g2 * t * t * d012;
    return out;
}

/// e^{tM}, with e^{0} = I.
[[nodiscard]] inline Mat3 chain_exp(const ChainMatrix& m, double t) {
    if (t == 0.0)
        return Mat3::Identity();
    return matrix_function(m, t, ExpFunction{});
}

/// Monic cubic s^3 + b s^2 + c s + d.
struct MonicCubic {
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    template <class T>
    [[nodiscard]] T operator()(T s) const {
        return ((s + b) * s + c) * s + d;
    }

    template <class T>
    [[nodiscard]] T derivative(T s) const {
        return (3.0 * s + 2.0 * b) * s + c;
    }

    /// Positive for three distinct real roots, negative for one real root and a conjugate pair.
    [[nodiscard]] double discriminant() const {
        return 18.0 * b * c * d - 4.0 * b * b * b * d + b * b * c * c - 4.0 * c * c * c - 27.0 * d * d;
    }
};

/// det(sI - m) as a monic cubic.
[[nodiscard]] inline MonicCubic characteristic_polynomial(const Mat3& m) {
    const double minors = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                          m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    return {-m.trace(), minors, -m.determinant()};
}

enum class RootKind { real, conjugate_pair };

/// Three eigenvalues, ordered by decreasing modulus; a conjugate pair is adjacent with Im > 0 first.
struct Spectrum3 {
    std::array<std::complex<double>, 3> values{};
    std::array<RootKind, 3> kinds{};

    [[nodiscard]] static bool is_real(std::complex<double> z) noexcept {
        return std::abs(z.imag()) <= kRealTolerance * (1.0 + std::abs(z.real()));
    }

    /// Classifies and orders arbitrary values. Near-real values are snapped onto the real axis.
    [[nodiscard]] static Spectrum3 from_values(std::array<std::complex<double>, 3> raw) {
        Spectrum3 s;
        for (auto& z : raw) {
            if (is_real(z))
                z = {z.real(), 0.0};
        }
        std::sort(raw.begin(), raw.end(), [](const auto& l, const auto& r) {
            const double ml = std::abs(l);
            const double mr = std::abs(r);
            if (ml != mr)
                return ml > mr;
            return l.imag() > r.imag();
        });
        s.values = raw;
        for (std::size_t i = 0; i < 3; ++i)
            s.kinds[i] = raw[i].imag() == 0.0 ? RootKind::real : RootKind::conjugate_pair;
        return s;
    }

    [[nodiscard]] bool all_real() const noexcept {
        return std::all_of(kinds.begin(), kinds.end(), [](RootKind k) { return k == RootKind::real; });
    }
};

namespace detail {

template <class T>
T newton_polish(const MonicCubic& p, T z) {
    auto residual = std::abs(p(z));
    for (int it = 0; it < 4 && residual > 0.0; ++it) {
        const T slope = p.derivative(z);
        if (std::abs(slope) == 0.0)
            break;
        const T next = z - p(z) / slope;
        const auto next_residual = std::abs(p(next));
        if (!(next_residual < residual))
            break;
        z = next;
        residual = next_residual;
    }
    return z;
}

}  // namespace detail

/// Roots of a monic cubic: depressed-cubic closed form (Cardano / trigonometric) plus Newton polish.
[[nodiscard]] inline Spectrum3 cubic_roots(const MonicCubic& p) {
    using cd = std::complex<double>;
    const double shift = p.b / 3.0;
    const double pp = p.c - p.b * p.b / 3.0;
    const double qq = 2.0 * p.b * p.b * p.b / 27.0 - p.b * p.c / 3.0 + p.d;
    const double disc = qq * qq / 4.0 + pp * pp * pp / 27.0;

    std::array<cd, 3> roots;
    if (disc > 0.0) {
        // One real root; pick the cube root without cancellation and recover the other via uv = -p/3.
        const double sq = std::sqrt(disc);
        const double u = std::cbrt(qq > 0.0 ? -qq / 2.0 - sq : -qq / 2.0 + sq);
        const double v = u != 0.0 ? -pp / (3.0 * u) : 0.0;
        const double real_root = detail::newton_polish(p, u + v - shift);
        cd pair{-(u + v) / 2.0 - shift, std::numbers::sqrt3 / 2.0 * std::abs(u - v)};
        pair = detail::newton_polish(p, pair);
        roots = {cd{real_root, 0.0}, pair, std::conj(pair)};
    } else if (pp == 0.0) {
        const double r = detail::newton_polish(p, -shift);
        roots = {cd{r, 0.0}, cd{r, 0.0}, cd{r, 0.0}};
    } else {
        const double radius = 2.0 * std::sqrt(-pp / 3.0);
        const double arg = std::clamp(3.0 * qq / (2.0 * pp) * std::sqrt(-3.0 / pp), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            const double t = radius * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0);
            roots[static_cast<std::size_t>(k)] = cd{detail::newton_polish(p, t - shift), 0.0};
        }
    }
    return Spectrum3::from_values(roots);
}

[[nodiscard]] inline Spectrum3 cubic_eigenvalues(const Mat3& m) {
    return cubic_roots(characteristic_polynomial(m));
}

[[nodiscard]] inline double spectral_radius(const Spectrum3& s) {
    double r = 0.0;
    for (const auto& z : s.values)
        r = std::max(r, std::abs(z));
    return r;
}

}  // namespace pulsemod
