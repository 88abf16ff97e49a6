#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the library's solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Mat2 = std::array<std::array<Complex, 2>, 2>;
using Mat4 = std::array<std::array<Complex, 4>, 4>;

inline constexpr double kPi = std::numbers::pi;

inline double rad(double deg) { return deg * kPi / 180.0; }

// Closed-form two-sector prediction, written out directly.
inline double twoSector(double x, double y, double m2, double thetaDeg, bool conjunction) {
    const double logical = conjunction ? x * y : x + y - x * y;
    const double mag = (x + y > 1.0) ? std::sqrt((1 - x) * (1 - y)) : std::sqrt(x * y);
    return m2 * logical + (1 - m2) * ((x + y) / 2 + mag * std::cos(rad(thetaDeg)));
}

// Smallest achievable max marginal mismatch over a grid of 4-atom joints.
inline double jointSearch(double muA, double muB, double muAB, int steps = 200) {
    double best = 1e9;
    const double h = 1.0 / steps;
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j)
            for (int k = 0; i + j + k <= steps; ++k) {
                const double ab = i * h, abp = j * h, apb = k * h;
                const double err =
                    std::max({std::abs(ab + abp - muA), std::abs(ab + apb - muB), std::abs(ab - muAB)});
                best = std::min(best, err);
            }
    return best;
}

struct GridFit {
    double bestResidual = 1e9;
    double minAbsCos = 1e9;  // among points within `band` of the target
    double m2AtMin = 0.0;
};

// Dense (m2, theta) grid with n x n points.
inline GridFit gridFit(double x, double y, double target, bool conjunction, int n, double band) {
    GridFit g;
    for (int i = 0; i < n; ++i) {
        const double m2 = static_cast<double>(i) / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double theta = 180.0 * j / (n - 1);
            const double r = std::abs(twoSector(x, y, m2, theta, conjunction) - target);
            g.bestResidual = std::min(g.bestResidual, r);
            if (r <= band) {
                const double c = (m2 == 1.0) ? 0.0 : std::abs(std::cos(rad(theta)));
                if (c < g.minAbsCos) {
                    g.minAbsCos = c;
                    g.m2AtMin = m2;
                }
            }
        }
    }
    return g;
}

// Smallest |cos theta| over m2 rows 0, 1/(rows-1), ..., 1, solving each row
// for cos theta exactly. Returns 2 when no row is feasible.
inline double rowScanMinCos(double x, double y, double target, bool conjunction, int rows) {
    const double logical = conjunction ? x * y : x + y - x * y;
    const double mag = (x + y > 1.0) ? std::sqrt((1 - x) * (1 - y)) : std::sqrt(x * y);
    double best = 2.0;
    for (int i = 0; i < rows; ++i) {
        const double m2 = static_cast<double>(i) / (rows - 1);
        if (i == rows - 1) {
            if (std::abs(logical - target) <= 1e-12) best = 0.0;
            continue;
        }
        const double emergent = (target - m2 * logical) / (1 - m2);
        const double gap = emergent - (x + y) / 2;
        if (mag == 0.0) {
            if (std::abs(gap) <= 1e-12) best = 0.0;
            continue;
        }
        const double c = std::abs(gap / mag);
        if (c <= 1.0) best = std::min(best, c);
    }
    return best;
}

// Least-squares p1 for the BE family: the pmf is affine in p1, so the RSS is
// a quadratic with a closed-form minimiser, clamped to [0,1].
inline double beLeastSquares(const std::vector<double>& obs) {
    const int N = static_cast<int>(obs.size()) - 1;
    const double S = N * (N + 1) / 2.0;
    double num = 0.0, den = 0.0;
    for (int n = 0; n <= N; ++n) {
        const double base = (N - n) / S, slope = (2.0 * n - N) / S;
        num += (obs[n] - base) * slope;
        den += slope * slope;
    }
    return std::clamp(num / den, 0.0, 1.0);
}

// Binomial pmf through log-gamma.
inline double binomialPmf(int N, int n, double p) {
    if (p == 0.0) return n == 0 ? 1.0 : 0.0;
    if (p == 1.0) return n == N ? 1.0 : 0.0;
    const double logC = std::lgamma(N + 1.0) - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0);
    return std::exp(logC + n * std::log(p) + (N - n) * std::log1p(-p));
}

inline Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 o{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) o[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
    return o;
}

// Frobenius distance from O to the best X (x) Y, by alternating least squares.
inline double alsNearestProduct(const Mat4& O, std::mt19937_64& rng, int iterations = 2000) {
    std::normal_distribution<double> g;
    Mat2 X{}, Y{};
    for (auto& r : Y)
        for (auto& v : r) v = {g(rng), g(rng)};
    for (int it = 0; it < iterations; ++it) {
        double ny = 0.0;
        for (auto& r : Y)
            for (auto& v : r) ny += std::norm(v);
        for (int a = 0; a < 2; ++a)
            for (int c = 0; c < 2; ++c) {
                Complex s = 0.0;
                for (int b = 0; b < 2; ++b)
                    for (int d = 0; d < 2; ++d) s += O[2 * a + b][2 * c + d] * std::conj(Y[b][d]);
                X[a][c] = s / ny;
            }
        double nx = 0.0;
        for (auto& r : X)
            for (auto& v : r) nx += std::norm(v);
        for (int b = 0; b < 2; ++b)
            for (int d = 0; d < 2; ++d) {
                Complex s = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int c = 0; c < 2; ++c) s += O[2 * a + b][2 * c + d] * std::conj(X[a][c]);
                Y[b][d] = s / nx;
            }
    }
    const Mat4 P = kron(X, Y);
    double err = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) err += std::norm(O[i][j] - P[i][j]);
    return std::sqrt(err);
}

// Random 2x2 Hermitian matrix with Gaussian entries.
inline Mat2 randomHermitian2(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Mat2 m{};
    m[0][0] = g(rng);
    m[1][1] = g(rng);
    m[0][1] = {g(rng), g(rng)};
    m[1][0] = std::conj(m[0][1]);
    return m;
}

inline Mat4 randomHermitian4(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Mat4 m{};
    for (int i = 0; i < 4; ++i) {
        m[i][i] = g(rng);
        for (int j = i + 1; j < 4; ++j) {
            m[i][j] = {g(rng), g(rng)};
            m[j][i] = std::conj(m[i][j]);
        }
    }
    return m;
}

// Uniform point on the Bloch sphere, returned as the +1 eigenvector of n.sigma
// and its orthogonal complement.
struct Qubit {
    std::array<Complex, 2> plus, minus;
};

inline Qubit randomQubitBasis(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double z = 2 * u(rng) - 1, phi = 2 * kPi * u(rng);
    const double t = std::acos(z);
    Qubit q;
    q.plus = {std::cos(t / 2), std::polar(std::sin(t / 2), phi)};
    q.minus = {-std::polar(std::sin(t / 2), -phi), std::cos(t / 2)};
    return q;
}

inline std::array<Complex, 4> randomState(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::array<Complex, 4> s{};
    double n = 0.0;
    for (auto& a : s) {
        a = {g(rng), g(rng)};
        n += std::norm(a);
    }
    for (auto& a : s) a /= std::sqrt(n);
    return s;
}

}  // namespace oracle
