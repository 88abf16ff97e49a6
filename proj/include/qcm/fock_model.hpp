#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "qcm/core_data.hpp"

namespace qcm {

enum class Connective { And, Or };

std::string_view connectiveName(Connective c);

/// Two-sector weights and interference angle for one conjunction or
/// disjunction. m2 weighs the logical (tensor-product) sector, n2 the
/// emergent (superposition) sector. The phases lambda and nu do not enter
/// any membership weight and are carried as metadata only.
struct FockParams {
    double m2 = 0.0;
    double n2 = 1.0;
    double thetaDeg = 90.0;
    Connective connective = Connective::And;
    std::optional<double> lambdaDeg;
    std::optional<double> nuDeg;
};

void validate(const FockParams& params);

/// A model prediction. Values outside [0,1] are reported, never clamped.
struct Prediction {
    double value = 0.0;
    bool inRange = true;
};

/// Coefficient of cos(theta) in the emergent-sector weight:
/// sqrt(1-x) sqrt(1-y) when x + y > 1, otherwise sqrt(x) sqrt(y).
double interferenceMagnitude(double muX, double muY);

Prediction evalConjunction(double muA, double muB, const FockParams& params);
Prediction evalDisjunction(double muA, double muB, const FockParams& params);
Prediction evalTwoSector(double muA, double muB, const FockParams& params);

/// Sector-2 prediction for the connective: mu(A) mu(B) for "and",
/// mu(A) + mu(B) - mu(A) mu(B) for "or".
double logicalSectorWeight(double muA, double muB, Connective connective);

// ---------------------------------------------------------------------------
// General negation quadruple

enum class Combination { AB = 0, ABp = 1, ApB = 2, ApBp = 3 };

inline constexpr std::array<Combination, 4> kCombinations = {Combination::AB, Combination::ABp, Combination::ApB,
                                                             Combination::ApBp};

std::string_view combinationName(Combination c);

struct CombinationParams {
    double m2 = 0.0;
    double n2 = 1.0;
    double alpha = 0.25;
    double beta = 0.0;
    double phiDeg = 90.0;
};

struct GeneralFockParams {
    std::array<CombinationParams, 4> combos{};

    CombinationParams& operator[](Combination c) { return combos[static_cast<std::size_t>(c)]; }
    const CombinationParams& operator[](Combination c) const { return combos[static_cast<std::size_t>(c)]; }
};

inline constexpr double kWeightSumTolerance = 0.02;

/// Checks ranges, sum(alpha) = 1 within alphaSumTolerance and
/// m2 + n2 = 1 within weightSumTolerance for each combination.
void validate(const GeneralFockParams& params, double alphaSumTolerance = 1e-9,
              double weightSumTolerance = kWeightSumTolerance);

/// m2 alpha + n2 ((muX + muY)/2 + beta cos(phi)) for the chosen combination;
/// muX, muY are that combination's marginals (e.g. mu(A'), mu(B) for A'B).
Prediction evalGeneral(double muX, double muY, const GeneralFockParams& params, Combination which);

/// The marginals and observed weight the record supplies for a combination.
struct CombinationData {
    double muX;
    double muY;
    double observed;
};

/// Throws IncompleteRecordError when a needed weight is absent.
CombinationData combinationData(const MembershipRecord& record, Combination which);

// ---------------------------------------------------------------------------
// Fitting

/// Selection rule for the one-parameter family of exact two-sector fits.
struct FitPolicy {
    enum class Kind {
        /// Smallest |cos theta|; ties go to the smallest m2. m2 = 1 counts as
        /// cos theta = 0 (theta reported as 90 degrees).
        MinimalInterference,
        /// Hold m2 at `fixedM2` and solve for theta.
        FixedSectorWeight,
    };
    Kind kind = Kind::MinimalInterference;
    double fixedM2 = 0.0;

    std::string name() const;
};

inline constexpr double kFitTolerance = 1e-9;

/// The m2 interval over which an exact fit exists; for each m2 in it,
/// cos theta = (target - avg - m2 (sector2 - avg)) / ((1 - m2) magnitude).
struct FeasibleFamily {
    double m2Min = 0.0;
    double m2Max = 0.0;
    double sector2 = 0.0;
    double average = 0.0;
    double magnitude = 0.0;
    double target = 0.0;

    std::string describe() const;
};

struct TwoSectorFit {
    FockParams params;
    double residual = 0.0;
    bool feasible = false;
    std::optional<FeasibleFamily> family;
    std::string policy;
};

/// Inverts the conjunction/disjunction model for (m2, theta). Infeasible
/// targets return the attainable point closest to the target.
TwoSectorFit fitTwoSector(double muA, double muB, double target, Connective connective, FitPolicy policy = {});

struct GeneralFitOptions {
    double marginalSlack = 0.05;  ///< delta in the soft constraints on alpha
    std::uint64_t seed = 0;
    int starts = 16;
    int maxIterations = 4000;
};

struct GeneralFit {
    GeneralFockParams params;
    std::array<double, 4> residuals{};
    double residual = 0.0;  ///< max absolute residual
    bool feasible = false;
    /// sum over combinations of n2 |beta cos phi|
    double interferenceLoad = 0.0;
    /// |alpha_AB + alpha_AB' - mu(A)| and |alpha_AB + alpha_A'B - mu(B)|
    std::array<double, 2> marginalMismatch{};
    std::array<FeasibleFamily, 4> families{};
    std::uint64_t seed = 0;
    int bestStart = 0;
};

/// Fits the four conjunction weights of a negation record.
///
/// alpha is searched on the probability simplex by seeded multi-start
/// Nelder-Mead; for each alpha every combination is solved in closed form
/// with the minimal-interference rule (|beta cos phi| <= 1). The objective is
/// max residual + 10 * soft marginal violation + interference load
/// + 1e-3 * |alpha - observed|^2. Start 0 is the observed conjunction
/// weights, so classical records land exactly on m2 = 1, beta = 0.
GeneralFit fitGeneralQuadruple(const MembershipRecord& record, const GeneralFitOptions& options = {});

/// Euclidean projection onto {x >= 0, sum x = 1}.
std::array<double, 4> projectToSimplex(const std::array<double, 4>& v);

nlohmann::json toJson(const FockParams& params);
nlohmann::json toJson(const GeneralFockParams& params);
nlohmann::json toJson(const FeasibleFamily& family);
nlohmann::json toJson(const TwoSectorFit& fit);
nlohmann::json toJson(const GeneralFit& fit);

}  // namespace qcm
