#include "qcm/stats_indist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

void checkParams(const DistParams& params, int n) {
    if (params.N < 1) throw ValidationError(fmt::format("N must be at least 1, got {}", params.N));
    if (!(params.p1 >= 0.0 && params.p1 <= 1.0))
        throw ValidationError(fmt::format("p1 = {} lies outside [0,1]", params.p1));
    if (n < 0 || n > params.N) throw ValidationError(fmt::format("n = {} lies outside [0, {}]", n, params.N));
}

double binomialCoefficient(int N, int n) {
    n = std::min(n, N - n);
    double c = 1.0;
    for (int i = 1; i <= n; ++i) c = c * (N - n + i) / i;
    return std::round(c);
}

constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2
constexpr double kBracketTolerance = 1e-9;

template <class F>
double goldenSection(F&& f, double lo, double hi) {
    double a = lo, b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > kBracketTolerance) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double residualSumOfSquares(const CountDataset& data, Family family, double p1) {
    const DistParams params{family, p1, data.N};
    double rss = 0.0;
    for (int n = 0; n <= data.N; ++n) {
        const double r = pmf(params, n) - data.observed[static_cast<std::size_t>(n)];
        rss += r * r;
    }
    return rss;
}

}  // namespace

std::string_view familyName(Family family) { return family == Family::MB ? "MB" : "BE"; }

double mbPmf(const DistParams& params, int n) {
    checkParams(params, n);
    return binomialCoefficient(params.N, n) * std::pow(params.p1, n) * std::pow(1.0 - params.p1, params.N - n);
}

double bePmf(const DistParams& params, int n) {
    checkParams(params, n);
    const double splits = 0.5 * params.N * (params.N + 1);
    return (n * params.p1 + (params.N - n) * (1.0 - params.p1)) / splits;
}

double pmf(const DistParams& params, int n) {
    return params.family == Family::MB ? mbPmf(params, n) : bePmf(params, n);
}

std::vector<double> pmfVector(const DistParams& params) {
    std::vector<double> out(static_cast<std::size_t>(params.N) + 1);
    for (int n = 0; n <= params.N; ++n) out[static_cast<std::size_t>(n)] = pmf(params, n);
    return out;
}

double leastSquaresBic(double rss, int nobs, int parameters) {
    // RSS below rounding noise counts as an exact fit, so exact fits give a
    // finite BIC that does not depend on the last bits of the residuals.
    const double eps = std::numeric_limits<double>::epsilon();
    const double floored = std::max(rss, nobs * eps * eps);
    return nobs * std::log(floored / nobs) + parameters * std::log(static_cast<double>(nobs));
}

DistFit fitDistribution(const CountDataset& data, Family family) {
    validate(data);
    auto rss = [&](double p) { return residualSumOfSquares(data, family, p); };

    double best = 0.0;
    double bestRss = rss(0.0);
    auto consider = [&](double p) {
        const double r = rss(p);
        if (r < bestRss || (r == bestRss && p < best)) {
            best = p;
            bestRss = r;
        }
    };
    consider(1.0);
    if (family == Family::BE) {
        consider(goldenSection(rss, 0.0, 1.0));
    } else {
        constexpr int kStarts = 16;
        for (int k = 0; k < kStarts; ++k)
            consider(goldenSection(rss, static_cast<double>(k) / kStarts, static_cast<double>(k + 1) / kStarts));
    }

    DistFit fit;
    fit.params = {family, best, data.N};
    fit.category = data.category;
    fit.rss = bestRss;
    fit.fitted = pmfVector(fit.params);
    const double mean =
        std::accumulate(data.observed.begin(), data.observed.end(), 0.0) / static_cast<double>(data.observed.size());
    for (double f : data.observed) fit.tss += (f - mean) * (f - mean);
    if (fit.tss > 1e-24) {
        fit.r2 = 1.0 - fit.rss / fit.tss;
    } else if (fit.rss <= 1e-12) {
        fit.r2 = 1.0;
    }
    fit.bic = leastSquaresBic(fit.rss, data.N + 1);
    return fit;
}

std::string_view strengthName(EvidenceStrength strength) {
    switch (strength) {
        case EvidenceStrength::None: return "none";
        case EvidenceStrength::Weak: return "weak";
        case EvidenceStrength::Positive: return "positive";
        case EvidenceStrength::Strong: return "strong";
    }
    return "?";
}

BicComparison compareBic(const DistFit& first, const DistFit& second) {
    if (first.category != second.category || first.params.N != second.params.N ||
        std::abs(first.tss - second.tss) > 1e-12)
        throw ValidationError(fmt::format("cannot compare fits of different datasets ('{}', N={} vs '{}', N={})",
                                          first.category, first.params.N, second.category, second.params.N));
    BicComparison cmp;
    cmp.deltaBic = first.bic - second.bic;
    cmp.tie = cmp.deltaBic == 0.0;
    cmp.winner = cmp.deltaBic < 0.0 ? Family::MB : Family::BE;
    const double mag = std::abs(cmp.deltaBic);
    if (mag > 6.0) {
        cmp.strength = EvidenceStrength::Strong;
    } else if (mag > 2.0) {
        cmp.strength = EvidenceStrength::Positive;
    } else {
        const bool separated = first.r2 && second.r2 && std::abs(*first.r2 - *second.r2) > 1e-9;
        cmp.strength = separated ? EvidenceStrength::Weak : EvidenceStrength::None;
    }
    return cmp;
}

double studentT975(int dof) {
    if (dof < 1) throw InsufficientDataError("Student-t interval needs at least one degree of freedom");
    const boost::math::students_t dist(static_cast<double>(dof));
    return boost::math::quantile(dist, 0.975);
}

RegressionResult linearRegression(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size())
        throw ValidationError(fmt::format("regression: {} abscissae but {} ordinates", xs.size(), ys.size()));
    if (xs.size() < 3) throw InsufficientDataError(fmt::format("regression needs at least 3 points, got {}", xs.size()));
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw InsufficientDataError("regression: abscissae have zero variance");

    RegressionResult out;
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;
    out.mean = my;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (out.slope * xs[i] + out.intercept);
        rss += r * r;
    }
    out.r2 = syy > 1e-24 ? 1.0 - rss / syy : 1.0;
    out.slopeStdError = std::sqrt(rss / (n - 2.0) / sxx);
    const double halfWidth = studentT975(static_cast<int>(xs.size()) - 1) * std::sqrt(syy / (n - 1.0)) / std::sqrt(n);
    out.ci95 = {my - halfWidth, my + halfWidth};
    return out;
}

ScopModel scopFromDistribution(const DistParams& params, const std::string& context) {
    ScopModel::Spec spec;
    spec.groundState = "ground";
    spec.states.push_back(spec.groundState);
    spec.contexts = {context};
    auto& dist = spec.transitions[{spec.groundState, context}];
    for (int n = params.N; n >= 0; --n) {
        const std::string label = fmt::format("{},{}", n, params.N - n);
        spec.states.push_back(label);
        dist[label] = pmf(params, n);
    }
    return ScopModel(std::move(spec));
}

nlohmann::json toJson(const DistFit& fit) {
    nlohmann::json j{{"family", familyName(fit.params.family)},
                     {"category", fit.category},
                     {"N", fit.params.N},
                     {"p1", fit.params.p1},
                     {"rss", fit.rss},
                     {"tss", fit.tss},
                     {"bic", fit.bic},
                     {"fitted", fit.fitted}};
    j["r2"] = fit.r2 ? nlohmann::json(*fit.r2) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json toJson(const BicComparison& cmp) {
    return {{"deltaBic", cmp.deltaBic},
            {"winner", cmp.tie ? "tie" : familyName(cmp.winner)},
            {"strength", strengthName(cmp.strength)}};
}

nlohmann::json toJson(const RegressionResult& reg) {
    return {{"slope", reg.slope},
            {"intercept", reg.intercept},
            {"r2", reg.r2},
            {"mean", reg.mean},
            {"slopeStdError", reg.slopeStdError},
            {"ci95", {reg.ci95.first, reg.ci95.second}}};
}

}  // namespace qcm
