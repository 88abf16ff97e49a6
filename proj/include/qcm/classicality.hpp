#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcm/core_data.hpp"
#include "qcm/stats_indist.hpp"

namespace qcm {

enum class ConditionSet { Conjunction, Disjunction, Negation };

std::string_view conditionSetName(ConditionSet set);

inline constexpr double kDefaultClassicalTolerance = 1e-9;

/// Outcome of a classical-representability test.
///
/// Inequality residuals are written so that a positive value is the amount
/// by which the inequality is violated. Equality residuals are signed and
/// satisfied when |residual| <= tolerance.
struct ClassicalityVerdict {
    struct Residual {
        std::string condition;
        double value = 0.0;
        bool equality = false;
    };

    ConditionSet conditionSet = ConditionSet::Conjunction;
    std::vector<Residual> residuals;
    double tolerance = kDefaultClassicalTolerance;
    bool satisfied = false;

    double residual(std::string_view condition) const;
};

/// mu(A and B) <= min(mu(A), mu(B)) and mu(A) + mu(B) - mu(A and B) <= 1.
ClassicalityVerdict checkConjunction(double muA, double muB, double muAandB,
                                     double tolerance = kDefaultClassicalTolerance);

/// max(mu(A), mu(B)) <= mu(A or B) and mu(A) + mu(B) - mu(A or B) >= 0.
ClassicalityVerdict checkDisjunction(double muA, double muB, double muAorB,
                                     double tolerance = kDefaultClassicalTolerance);

/// The five equalities that make the eight negation/conjunction weights
/// marginals of one joint distribution over four atoms. Residuals coincide
/// with the deviation profile (iA, iB, iAp, iBp, iTotal).
ClassicalityVerdict checkNegation(const MembershipRecord& record, double tolerance = kDefaultClassicalTolerance);

/// Per-exemplar deviation from the negation equalities.
struct DeviationProfile {
    double iA = 0.0;
    double iB = 0.0;
    double iAp = 0.0;
    double iBp = 0.0;
    double iTotal = 0.0;

    std::array<double, 5> values() const { return {iA, iB, iAp, iBp, iTotal}; }
    bool operator==(const DeviationProfile&) const = default;
};

inline constexpr std::array<std::string_view, 5> kDeviationNames = {"I_A", "I_B", "I_A'", "I_B'", "I_ABA'B'"};

DeviationProfile deviationProfile(const MembershipRecord& record);

/// Regression summary of one deviation quantity across a dataset.
struct QuantityStatistics {
    std::string name;
    double mean = 0.0;
    RegressionResult regression;
};

/// Regresses each of the five quantities on the exemplar index 1..n.
/// Throws InsufficientDataError for fewer than three profiles.
std::array<QuantityStatistics, 5> profileStatistics(std::span<const DeviationProfile> profiles);

/// Interval a dataset mean is expected to fall in when it reproduces the
/// negation-experiment pattern; open at both ends.
struct ReferenceBand {
    std::string_view name;
    double lower;
    double upper;
};

/// Bands observed for I_A, I_B, I_A', I_B' and I_ABA'B' in the Fruits/Vegetables
/// negation experiment (95% intervals).
inline constexpr std::array<ReferenceBand, 5> kReferenceBands = {{
    {"I_A", -0.51, -0.33},
    {"I_B", -0.52, -0.34},
    {"I_A'", -0.42, -0.28},
    {"I_B'", -0.40, -0.26},
    {"I_ABA'B'", -0.97, -0.64},
}};

struct BandCheck {
    std::string_view name;
    double mean;
    ReferenceBand band;
    bool pass;
};

std::array<BandCheck, 5> checkReferenceBands(const std::array<QuantityStatistics, 5>& stats);

/// Builds a record every one of whose conjunction weights equals the
/// average of its two marginals, with mu(X') = 1 - mu(X): the value the
/// interference-free emergent sector predicts.
MembershipRecord sectorOneLimitRecord(double muA, double muB, std::string exemplar = "sector-1 limit");

/// Builds the eight weights induced by a joint distribution over the atoms
/// (A and B, A and B', A' and B, A' and B').
MembershipRecord recordFromJoint(const std::array<double, 4>& atoms, std::string exemplar = "joint");

nlohmann::json toJson(const ClassicalityVerdict& verdict);
nlohmann::json toJson(const DeviationProfile& profile);
nlohmann::json toJson(const QuantityStatistics& stats);

}  // namespace qcm
