#include "qcm/fock_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

double degrees(double cosine) { return std::acos(std::clamp(cosine, -1.0, 1.0)) / kDegToRad; }

Prediction predict(double value) { return {value, value >= 0.0 && value <= 1.0}; }

void requireUnit(double v, std::string_view name) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(fmt::format("{} = {} lies outside [0,1]", name, v));
}

// Exact solutions of  m2 * sector2 + (1 - m2) * (average + magnitude * c) = target
// with m2 in [0,1] and c in [-1,1].
struct SectorSolution {
    double m2 = 0.0;
    double cosine = 0.0;
    bool exact = false;
    FeasibleFamily family;
    bool familyEmpty = true;
};

constexpr double kSlack = 1e-12;

// Restricts [lo, hi] by coef * m <= bound.
void restrict(double coef, double bound, double& lo, double& hi) {
    bound += kSlack;
    if (coef > 0.0) {
        hi = std::min(hi, bound / coef);
    } else if (coef < 0.0) {
        lo = std::max(lo, bound / coef);
    } else if (bound < 0.0) {
        lo = 1.0;
        hi = 0.0;
    }
}

double cosineAt(double m2, double a, double b, double magnitude) {
    if (m2 >= 1.0 || magnitude == 0.0) return 0.0;
    return (a - b * m2) / ((1.0 - m2) * magnitude);
}

SectorSolution solveSectors(double sector2, double average, double magnitude, double target, const FitPolicy& policy) {
    SectorSolution s;
    const double a = target - average;
    const double b = sector2 - average;
    double lo = 0.0, hi = 1.0;
    restrict(magnitude - b, magnitude - a, lo, hi);
    restrict(magnitude + b, magnitude + a, lo, hi);
    lo = std::max(lo, 0.0);
    hi = std::min(hi, 1.0);
    s.family = {lo, hi, sector2, average, magnitude, target};
    s.familyEmpty = lo > hi;

    if (policy.kind == FitPolicy::Kind::FixedSectorWeight) {
        s.m2 = policy.fixedM2;
        s.cosine = std::clamp(cosineAt(s.m2, a, b, magnitude), -1.0, 1.0);
        s.exact = !s.familyEmpty && s.m2 >= lo && s.m2 <= hi;
        return s;
    }

    if (s.familyEmpty) {
        const double top = std::max(sector2, average + magnitude);
        if (target > top) {
            s.m2 = sector2 >= average + magnitude ? 1.0 : 0.0;
            s.cosine = s.m2 == 1.0 ? 0.0 : 1.0;
        } else {
            s.m2 = sector2 <= average - magnitude ? 1.0 : 0.0;
            s.cosine = s.m2 == 1.0 ? 0.0 : -1.0;
        }
        return s;
    }

    // |cos| is monotone in m2 between zero crossings, so the minimum over the
    // interval is at an end point or at the crossing m2 = a / b.
    std::array<double, 3> candidates{lo, hi, lo};
    int count = 2;
    if (b != 0.0) {
        double z = a / b;
        if (z > 1.0 - kSlack && z <= 1.0 + kSlack) z = 1.0;
        if (z >= lo && z <= hi) candidates[count++] = z;
    }
    double bestAbs = 0.0;
    bool first = true;
    for (int i = 0; i < count; ++i) {
        const double m = candidates[i];
        const double c = (i == 2) ? 0.0 : cosineAt(m, a, b, magnitude);
        const double absC = std::abs(c);
        if (first || absC < bestAbs || (absC == bestAbs && m < s.m2)) {
            first = false;
            bestAbs = absC;
            s.m2 = m;
            s.cosine = std::clamp(c, -1.0, 1.0);
        }
    }
    s.exact = true;
    return s;
}

// --- general fit helpers -----------------------------------------------------

struct QuadrupleData {
    std::array<CombinationData, 4> combos;
    double muA, muB;
};

struct Evaluation {
    GeneralFockParams params;
    std::array<double, 4> residuals{};
    std::array<FeasibleFamily, 4> families{};
    std::array<double, 2> mismatch{};
    double maxResidual = 0.0;
    double load = 0.0;
    double objective = 0.0;
};

constexpr double kPenaltyWeight = 10.0;
constexpr double kProximityWeight = 1e-3;

Evaluation evaluateAlpha(const std::array<double, 4>& alpha, const QuadrupleData& data, double slack) {
    Evaluation e;
    double proximity = 0.0;
    for (Combination c : kCombinations) {
        const auto i = static_cast<std::size_t>(c);
        const auto& d = data.combos[i];
        const double avg = 0.5 * (d.muX + d.muY);
        const SectorSolution s = solveSectors(alpha[i], avg, 1.0, d.observed, {});
        auto& p = e.params[c];
        p.alpha = alpha[i];
        p.m2 = s.m2;
        p.n2 = 1.0 - s.m2;
        const double interference = s.cosine;  // beta cos(phi), magnitude bound 1
        if (s.m2 >= 1.0) {
            p.beta = 0.0;
            p.phiDeg = 90.0;
        } else {
            const double mag = std::max(interferenceMagnitude(d.muX, d.muY), std::abs(interference));
            if (mag == 0.0) {
                p.beta = 0.0;
                p.phiDeg = 90.0;
            } else {
                p.beta = interference < 0.0 ? -mag : mag;
                p.phiDeg = degrees(std::abs(interference) / mag);
            }
        }
        e.families[i] = s.family;
        const double pred = evalGeneral(d.muX, d.muY, e.params, c).value;
        e.residuals[i] = pred - d.observed;
        e.maxResidual = std::max(e.maxResidual, std::abs(e.residuals[i]));
        e.load += p.n2 * std::abs(p.beta * std::cos(p.phiDeg * kDegToRad));
        proximity += (alpha[i] - d.observed) * (alpha[i] - d.observed);
    }
    e.mismatch = {std::abs(alpha[0] + alpha[1] - data.muA), std::abs(alpha[0] + alpha[2] - data.muB)};
    const double violation = std::max(0.0, e.mismatch[0] - slack) + std::max(0.0, e.mismatch[1] - slack);
    e.objective = e.maxResidual + kPenaltyWeight * violation + e.load + kProximityWeight * proximity;
    return e;
}

using Point = std::array<double, 4>;

template <class F>
Point nelderMead(F&& f, Point start, double step, int maxIterations) {
    constexpr std::size_t n = 4;
    std::array<Point, n + 1> simplex;
    std::array<double, n + 1> values;
    simplex[0] = start;
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1] = start;
        simplex[i + 1][i] += step;
    }
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);

    std::array<std::size_t, n + 1> order;
    for (int iter = 0; iter < maxIterations; ++iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return values[x] < values[y]; });
        const std::size_t best = order[0], worst = order[n], second = order[n - 1];
        double size = 0.0;
        for (std::size_t i = 1; i <= n; ++i)
            for (std::size_t k = 0; k < n; ++k) size = std::max(size, std::abs(simplex[order[i]][k] - simplex[best][k]));
        if (values[worst] - values[best] <= 1e-15 && size <= 1e-11) break;

        Point centroid{};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[order[i]][k] / n;
        auto along = [&](double t) {
            Point p;
            for (std::size_t k = 0; k < n; ++k) p[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            return p;
        };
        const Point reflected = along(-1.0);
        const double fr = f(reflected);
        if (fr < values[best]) {
            const Point expanded = along(-2.0);
            const double fe = f(expanded);
            if (fe < fr) {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if (fr < values[second]) {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            const bool outside = fr < values[worst];
            const Point contracted = along(outside ? -0.5 : 0.5);
            const double fc = f(contracted);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    auto& p = simplex[order[i]];
                    for (std::size_t k = 0; k < n; ++k) p[k] = simplex[best][k] + 0.5 * (p[k] - simplex[best][k]);
                    values[order[i]] = f(p);
                }
            }
        }
    }
    const auto bestIt = std::min_element(values.begin(), values.end());
    return simplex[static_cast<std::size_t>(bestIt - values.begin())];
}

// Uniform in [0,1) from the raw 53 high bits, independent of the standard
// library's distribution implementations.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string_view connectiveName(Connective c) { return c == Connective::And ? "and" : "or"; }

void validate(const FockParams& p) {
    requireUnit(p.m2, "m2");
    requireUnit(p.n2, "n2");
    if (std::abs(p.m2 + p.n2 - 1.0) > 1e-9)
        throw ValidationError(fmt::format("m2 + n2 = {} must equal 1", p.m2 + p.n2));
    if (!(p.thetaDeg >= 0.0 && p.thetaDeg <= 180.0))
        throw ValidationError(fmt::format("theta = {} degrees lies outside [0, 180]", p.thetaDeg));
}

double interferenceMagnitude(double muX, double muY) {
    if (muX + muY > 1.0) return std::sqrt(1.0 - muX) * std::sqrt(1.0 - muY);
    return std::sqrt(muX) * std::sqrt(muY);
}

double logicalSectorWeight(double muA, double muB, Connective connective) {
    return connective == Connective::And ? muA * muB : muA + muB - muA * muB;
}

namespace {
Prediction evalWith(double muA, double muB, const FockParams& p) {
    const double emergent = 0.5 * (muA + muB) + interferenceMagnitude(muA, muB) * std::cos(p.thetaDeg * kDegToRad);
    return predict(p.m2 * logicalSectorWeight(muA, muB, p.connective) + p.n2 * emergent);
}
}  // namespace

Prediction evalConjunction(double muA, double muB, const FockParams& params) {
    if (params.connective != Connective::And) throw ValidationError("evalConjunction needs an 'and' parameter set");
    return evalWith(muA, muB, params);
}

Prediction evalDisjunction(double muA, double muB, const FockParams& params) {
    if (params.connective != Connective::Or) throw ValidationError("evalDisjunction needs an 'or' parameter set");
    return evalWith(muA, muB, params);
}

Prediction evalTwoSector(double muA, double muB, const FockParams& params) { return evalWith(muA, muB, params); }

std::string_view combinationName(Combination c) {
    switch (c) {
        case Combination::AB: return "AB";
        case Combination::ABp: return "AB'";
        case Combination::ApB: return "A'B";
        case Combination::ApBp: return "A'B'";
    }
    return "?";
}

void validate(const GeneralFockParams& params, double alphaSumTolerance, double weightSumTolerance) {
    double alphaSum = 0.0;
    for (Combination c : kCombinations) {
        const auto& p = params[c];
        const std::string name(combinationName(c));
        requireUnit(p.m2, "m2_" + name);
        requireUnit(p.n2, "n2_" + name);
        requireUnit(p.alpha, "alpha_" + name);
        if (!(p.beta >= -1.0 && p.beta <= 1.0))
            throw ValidationError(fmt::format("beta_{} = {} lies outside [-1,1]", name, p.beta));
        if (!(p.phiDeg >= 0.0 && p.phiDeg <= 180.0))
            throw ValidationError(fmt::format("phi_{} = {} degrees lies outside [0, 180]", name, p.phiDeg));
        if (std::abs(p.m2 + p.n2 - 1.0) > weightSumTolerance)
            throw ValidationError(fmt::format("m2 + n2 for {} is {}, not within {} of 1", name, p.m2 + p.n2,
                                              weightSumTolerance));
        alphaSum += p.alpha;
    }
    if (std::abs(alphaSum - 1.0) > alphaSumTolerance)
        throw ValidationError(fmt::format("alpha coefficients sum to {}, not 1", alphaSum));
}

Prediction evalGeneral(double muX, double muY, const GeneralFockParams& params, Combination which) {
    const auto& p = params[which];
    return predict(p.m2 * p.alpha + p.n2 * (0.5 * (muX + muY) + p.beta * std::cos(p.phiDeg * kDegToRad)));
}

CombinationData combinationData(const MembershipRecord& r, Combination which) {
    auto need = [&](const std::optional<double>& v, const char* field) {
        if (!v) throw IncompleteRecordError(r.exemplar, field);
        return *v;
    };
    switch (which) {
        case Combination::AB: return {r.muA, r.muB, need(r.muAandB, "muAandB")};
        case Combination::ABp: return {r.muA, need(r.muBp, "muBp"), need(r.muAandBp, "muAandBp")};
        case Combination::ApB: return {need(r.muAp, "muAp"), r.muB, need(r.muApandB, "muApandB")};
        case Combination::ApBp: return {need(r.muAp, "muAp"), need(r.muBp, "muBp"), need(r.muApandBp, "muApandBp")};
    }
    throw LookupError("unknown combination");
}

std::string FitPolicy::name() const {
    if (kind == Kind::MinimalInterference) return "minimal-interference";
    return fmt::format("fixed-sector-weight(m2={})", fixedM2);
}

std::string FeasibleFamily::describe() const {
    if (m2Min > m2Max) return "empty";
    return fmt::format("m2 in [{:.6f}, {:.6f}]; cos(theta) = ({:.6f} - {:.6f} - m2 * ({:.6f} - {:.6f})) / ((1 - m2) * {:.6f})",
                       m2Min, m2Max, target, average, sector2, average, magnitude);
}

TwoSectorFit fitTwoSector(double muA, double muB, double target, Connective connective, FitPolicy policy) {
    requireUnit(muA, "muA");
    requireUnit(muB, "muB");
    requireUnit(target, "target");
    if (policy.kind == FitPolicy::Kind::FixedSectorWeight) requireUnit(policy.fixedM2, "fixed m2");
    const double magnitude = interferenceMagnitude(muA, muB);
    const SectorSolution s =
        solveSectors(logicalSectorWeight(muA, muB, connective), 0.5 * (muA + muB), magnitude, target, policy);

    TwoSectorFit fit;
    fit.policy = policy.name();
    fit.params.connective = connective;
    fit.params.m2 = s.m2;
    fit.params.n2 = 1.0 - s.m2;
    fit.params.thetaDeg = degrees(s.cosine);
    fit.residual = std::abs(evalTwoSector(muA, muB, fit.params).value - target);
    fit.feasible = fit.residual <= kFitTolerance;
    if (!s.familyEmpty) fit.family = s.family;
    return fit;
}

std::array<double, 4> projectToSimplex(const std::array<double, 4>& v) {
    std::array<double, 4> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumulative = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        cumulative += u[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (u[k] - t > 0.0) tau = t;
    }
    std::array<double, 4> out;
    for (std::size_t i = 0; i < 4; ++i) out[i] = std::max(v[i] - tau, 0.0);
    return out;
}

GeneralFit fitGeneralQuadruple(const MembershipRecord& record, const GeneralFitOptions& options) {
    QuadrupleData data{};
    for (Combination c : kCombinations) data.combos[static_cast<std::size_t>(c)] = combinationData(record, c);
    data.muA = record.muA;
    data.muB = record.muB;
    if (options.starts < 1) throw ValidationError("general fit needs at least one start");

    auto objective = [&](const Point& y) { return evaluateAlpha(projectToSimplex(y), data, options.marginalSlack).objective; };

    std::mt19937_64 rng(options.seed);
    Point bestPoint{};
    double bestValue = 0.0;
    int bestStart = -1;
    for (int start = 0; start < options.starts; ++start) {
        Point init;
        if (start == 0) {
            for (std::size_t i = 0; i < 4; ++i) init[i] = data.combos[i].observed;
        } else {
            double total = 0.0;
            for (auto& x : init) {
                x = -std::log(1.0 - uniform01(rng));
                total += x;
            }
            for (auto& x : init) x /= total;
        }
        init = projectToSimplex(init);
        const Point found = nelderMead(objective, init, 0.05, options.maxIterations);
        const double value = objective(found);
        if (bestStart < 0 || value < bestValue) {
            bestValue = value;
            bestPoint = found;
            bestStart = start;
        }
    }

    const Evaluation e = evaluateAlpha(projectToSimplex(bestPoint), data, options.marginalSlack);
    GeneralFit fit;
    fit.params = e.params;
    fit.residuals = e.residuals;
    fit.residual = e.maxResidual;
    fit.feasible = e.maxResidual <= kFitTolerance;
    fit.interferenceLoad = e.load;
    fit.marginalMismatch = e.mismatch;
    fit.families = e.families;
    fit.seed = options.seed;
    fit.bestStart = bestStart;
    return fit;
}

// ---------------------------------------------------------------------------

nlohmann::json toJson(const FockParams& p) {
    nlohmann::json j{{"connective", connectiveName(p.connective)}, {"m2", p.m2}, {"n2", p.n2}, {"thetaDeg", p.thetaDeg}};
    if (p.lambdaDeg) j["lambdaDeg"] = *p.lambdaDeg;
    if (p.nuDeg) j["nuDeg"] = *p.nuDeg;
    return j;
}

nlohmann::json toJson(const GeneralFockParams& params) {
    nlohmann::json j = nlohmann::json::object();
    for (Combination c : kCombinations) {
        const auto& p = params[c];
        j[std::string(combinationName(c))] = {
            {"m2", p.m2}, {"n2", p.n2}, {"alpha", p.alpha}, {"beta", p.beta}, {"phiDeg", p.phiDeg}};
    }
    return j;
}

nlohmann::json toJson(const FeasibleFamily& f) {
    return {{"m2Min", f.m2Min},     {"m2Max", f.m2Max},         {"sector2", f.sector2},
            {"average", f.average}, {"magnitude", f.magnitude}, {"description", f.describe()}};
}

nlohmann::json toJson(const TwoSectorFit& fit) {
    nlohmann::json j{{"params", toJson(fit.params)},
                     {"residual", fit.residual},
                     {"feasible", fit.feasible},
                     {"policy", fit.policy}};
    j["feasibleSet"] = fit.family ? toJson(*fit.family) : nlohmann::json(nullptr);
    return j;
}

nlohmann::json toJson(const GeneralFit& fit) {
    nlohmann::json residuals = nlohmann::json::object();
    nlohmann::json families = nlohmann::json::object();
    for (Combination c : kCombinations) {
        const auto i = static_cast<std::size_t>(c);
        residuals[std::string(combinationName(c))] = fit.residuals[i];
        families[std::string(combinationName(c))] = toJson(fit.families[i]);
    }
    return {{"params", toJson(fit.params)},
            {"residuals", residuals},
            {"residual", fit.residual},
            {"feasible", fit.feasible},
            {"interferenceLoad", fit.interferenceLoad},
            {"marginalMismatch", fit.marginalMismatch},
            {"feasibleSets", families},
            {"policy", FitPolicy{}.name()},
            {"seed", fit.seed},
            {"bestStart", fit.bestStart}};
}

}  // namespace qcm
