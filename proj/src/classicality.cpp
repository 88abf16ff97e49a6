#include "qcm/classicality.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

void finish(ClassicalityVerdict& v) {
    v.satisfied = std::all_of(v.residuals.begin(), v.residuals.end(), [&](const auto& r) {
        return r.equality ? std::abs(r.value) <= v.tolerance : r.value <= v.tolerance;
    });
}

double require(const MembershipRecord& r, const std::optional<double>& v, std::string_view field) {
    if (!v) throw IncompleteRecordError(r.exemplar, std::string(field));
    return *v;
}

struct NegationWeights {
    double a, b, ap, bp, ab, abp, apb, apbp;
};

NegationWeights negationWeights(const MembershipRecord& r) {
    return {r.muA,
            r.muB,
            require(r, r.muAp, "muAp"),
            require(r, r.muBp, "muBp"),
            require(r, r.muAandB, "muAandB"),
            require(r, r.muAandBp, "muAandBp"),
            require(r, r.muApandB, "muApandB"),
            require(r, r.muApandBp, "muApandBp")};
}

}  // namespace

std::string_view conditionSetName(ConditionSet set) {
    switch (set) {
        case ConditionSet::Conjunction: return "conjunction";
        case ConditionSet::Disjunction: return "disjunction";
        case ConditionSet::Negation: return "negation";
    }
    return "?";
}

double ClassicalityVerdict::residual(std::string_view condition) const {
    for (const auto& r : residuals)
        if (r.condition == condition) return r.value;
    throw LookupError(fmt::format("verdict has no condition '{}'", condition));
}

ClassicalityVerdict checkConjunction(double muA, double muB, double muAandB, double tolerance) {
    ClassicalityVerdict v;
    v.conditionSet = ConditionSet::Conjunction;
    v.tolerance = tolerance;
    v.residuals = {{"min", muAandB - std::min(muA, muB), false}, {"kolmogorov", muA + muB - muAandB - 1.0, false}};
    finish(v);
    return v;
}

ClassicalityVerdict checkDisjunction(double muA, double muB, double muAorB, double tolerance) {
    ClassicalityVerdict v;
    v.conditionSet = ConditionSet::Disjunction;
    v.tolerance = tolerance;
    v.residuals = {{"max", std::max(muA, muB) - muAorB, false}, {"kolmogorov", -(muA + muB - muAorB), false}};
    finish(v);
    return v;
}

ClassicalityVerdict checkNegation(const MembershipRecord& record, double tolerance) {
    const DeviationProfile p = deviationProfile(record);
    ClassicalityVerdict v;
    v.conditionSet = ConditionSet::Negation;
    v.tolerance = tolerance;
    v.residuals = {{"A", p.iA, true}, {"B", p.iB, true}, {"A'", p.iAp, true}, {"B'", p.iBp, true},
                   {"normalization", p.iTotal, true}};
    finish(v);
    return v;
}

DeviationProfile deviationProfile(const MembershipRecord& record) {
    const auto w = negationWeights(record);
    return {w.a - w.ab - w.abp, w.b - w.ab - w.apb, w.ap - w.apbp - w.apb, w.bp - w.apbp - w.abp,
            1.0 - w.ab - w.abp - w.apb - w.apbp};
}

std::array<QuantityStatistics, 5> profileStatistics(std::span<const DeviationProfile> profiles) {
    if (profiles.size() < 3)
        throw InsufficientDataError(
            fmt::format("profile statistics need at least 3 exemplars, got {}", profiles.size()));
    std::vector<double> xs(profiles.size());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i + 1);
    std::array<QuantityStatistics, 5> out;
    for (std::size_t q = 0; q < 5; ++q) {
        std::vector<double> ys;
        ys.reserve(profiles.size());
        for (const auto& p : profiles) ys.push_back(p.values()[q]);
        out[q].name = std::string(kDeviationNames[q]);
        out[q].regression = linearRegression(xs, ys);
        out[q].mean = out[q].regression.mean;
    }
    return out;
}

std::array<BandCheck, 5> checkReferenceBands(const std::array<QuantityStatistics, 5>& stats) {
    std::array<BandCheck, 5> out{};
    for (std::size_t q = 0; q < 5; ++q) {
        const auto it = std::find_if(kReferenceBands.begin(), kReferenceBands.end(),
                                     [&](const ReferenceBand& b) { return b.name == stats[q].name; });
        if (it == kReferenceBands.end()) throw LookupError(fmt::format("no reference band for {}", stats[q].name));
        out[q] = {it->name, stats[q].mean, *it, stats[q].mean > it->lower && stats[q].mean < it->upper};
    }
    return out;
}

MembershipRecord sectorOneLimitRecord(double muA, double muB, std::string exemplar) {
    MembershipRecord r;
    r.exemplar = std::move(exemplar);
    r.muA = muA;
    r.muB = muB;
    r.muAp = 1.0 - muA;
    r.muBp = 1.0 - muB;
    r.muAandB = (muA + muB) / 2.0;
    r.muAandBp = (muA + *r.muBp) / 2.0;
    r.muApandB = (*r.muAp + muB) / 2.0;
    r.muApandBp = (*r.muAp + *r.muBp) / 2.0;
    return r;
}

MembershipRecord recordFromJoint(const std::array<double, 4>& atoms, std::string exemplar) {
    const auto [ab, abp, apb, apbp] = atoms;
    MembershipRecord r;
    r.exemplar = std::move(exemplar);
    r.muA = ab + abp;
    r.muB = ab + apb;
    r.muAp = apb + apbp;
    r.muBp = abp + apbp;
    r.muAandB = ab;
    r.muAandBp = abp;
    r.muApandB = apb;
    r.muApandBp = apbp;
    return r;
}

nlohmann::json toJson(const ClassicalityVerdict& v) {
    nlohmann::json residuals = nlohmann::json::object();
    for (const auto& r : v.residuals) residuals[r.condition] = r.value;
    return {{"conditionSet", conditionSetName(v.conditionSet)},
            {"satisfied", v.satisfied},
            {"tolerance", v.tolerance},
            {"residuals", residuals}};
}

nlohmann::json toJson(const DeviationProfile& p) {
    return {{"iA", p.iA}, {"iB", p.iB}, {"iAp", p.iAp}, {"iBp", p.iBp}, {"iTotal", p.iTotal}};
}

nlohmann::json toJson(const QuantityStatistics& s) {
    return {{"name", s.name}, {"mean", s.mean}, {"regression", toJson(s.regression)}};
}

}  // namespace qcm
