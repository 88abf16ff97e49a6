#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcm/core_data.hpp"

namespace qcm {

using Complex = std::complex<double>;

/// Amplitudes on C^4 = C^2 (x) C^2 with index 2a + b for factor indices (a, b),
/// the first factor being the A-side concept.
struct ComplexVector4 {
    std::array<Complex, 4> amplitudes{};

    static ComplexVector4 fromPolar(const std::array<double, 4>& moduli, const std::array<double, 4>& argDeg);

    double normSquared() const;
};

/// Row-major 4x4 complex matrix with declared spectrum {+1, +1, -1, -1}.
struct Observable4 {
    std::array<std::array<Complex, 4>, 4> entries{};

    static Observable4 identity();
    static Observable4 diagonal(const std::array<double, 4>& values);
    /// left (x) right for 2x2 factors.
    static Observable4 tensor(const std::array<std::array<Complex, 2>, 2>& left,
                              const std::array<std::array<Complex, 2>, 2>& right);
};

struct HilbertTolerances {
    double hermitian = 1e-3;
    double trace = 0.05;
    double eigenvalue = 0.05;
    double expectation = 0.02;
    double norm = 1e-3;
    double imaginary = 1e-3;
    double schmidt = 1e-6;
    double marginal = 0.01;
};

inline constexpr double kTsirelsonBound = 2.8284271247461903;  // 2 sqrt(2)

struct ChshReport {
    std::array<double, 4> expectations{};  ///< indexed by Block
    double chsh = 0.0;                     ///< E(A',B') + E(A',B) + E(A,B') - E(A,B)
    bool classicalViolated = false;        ///< |chsh| > 2
    bool tsirelsonRespected = true;        ///< |chsh| <= 2 sqrt(2)

    double operator[](Block b) const { return expectations[static_cast<std::size_t>(b)]; }
};

/// CHSH combination with the flags derived from it.
ChshReport chshFromExpectations(const std::array<double, 4>& expectations);

/// E per block = sum of sign * probability.
ChshReport expectationsFromTable(const CoincidenceTable& table);

/// One single-concept outcome compared across the two blocks that contain it.
struct MarginalCheck {
    std::string side;  ///< "A", "A'", "B" or "B'"
    std::string label;
    Block lhsBlock;
    Block rhsBlock;
    double lhs = 0.0;
    double rhs = 0.0;
    bool violated = false;
};

/// Eight comparisons: both outcome labels of each of the four concepts.
/// Throws SchemaError when the two blocks sharing a concept use different labels.
std::vector<MarginalCheck> marginalLawCheck(const CoincidenceTable& table, double tolerance = 0.01);

/// True when any comparison for the given side is violated.
bool sideViolated(const std::vector<MarginalCheck>& checks, std::string_view side);

struct ObservableCheck {
    double hermitianDeviation = 0.0;  ///< max |O - O^dagger| entry
    double trace = 0.0;
    std::array<double, 4> eigenvalues{};  ///< of the Hermitian part, ascending
    bool hermitian = false;
    bool traceless = false;
    bool spectrum = false;

    bool ok() const { return hermitian && traceless && spectrum; }
};

ObservableCheck checkObservable(const Observable4& obs, const HilbertTolerances& tol = {});

struct ExpectationValue {
    double value = 0.0;      ///< Re <p|O|p>
    double imaginary = 0.0;  ///< Im <p|O|p>, a rounding diagnostic
    bool imaginarySmall = true;
};

/// Throws ValidationError when obs is not Hermitian within tol.hermitian.
ExpectationValue expectation(const ComplexVector4& state, const Observable4& obs, const HilbertTolerances& tol = {});

struct StateSchmidt {
    std::pair<double, double> singularValues{};  ///< descending
    int rank = 0;
    double determinant = 0.0;  ///< |det| of the 2x2 amplitude matrix

    bool entangled() const { return rank == 2; }
};

StateSchmidt stateSchmidt(const ComplexVector4& state, double threshold = 1e-6);

struct OperatorProduct {
    std::array<double, 4> schmidtCoefficients{};  ///< descending
    bool product = false;
    double nearestProductError = 0.0;  ///< Frobenius distance to the best X (x) Y
};

/// Operator-Schmidt decomposition through realignment
/// R[(a,c),(b,d)] = O[(a,b),(c,d)] followed by an SVD.
OperatorProduct operatorProductTest(const Observable4& obs, double relativeThreshold = 1e-6);

struct ReferenceModel {
    ComplexVector4 state;
    std::array<Observable4, 4> observables;  ///< indexed by Block
};

/// {"state": [c x4], "observables": {"AB": [[c x4] x4], ...}} where each c is
/// a number, {"re", "im"} or {"mod", "argDeg"}.
ReferenceModel referenceModelFromJson(const nlohmann::json& doc);
ReferenceModel parseReferenceModel(std::string_view text);
nlohmann::json toJson(const ReferenceModel& model);

inline constexpr std::string_view kNonMarginalBoxModel = "nonlocal non-marginal box modeling 1";

struct ModelVerification {
    std::array<ObservableCheck, 4> observables;
    std::array<ExpectationValue, 4> modelExpectations;
    std::array<bool, 4> expectationMatches{};
    ChshReport table;
    std::vector<MarginalCheck> marginals;
    double stateNormSquared = 0.0;
    StateSchmidt state;
    std::array<OperatorProduct, 4> operators;
    std::optional<std::string> classification;
    std::vector<std::string> failures;

    bool passed() const { return failures.empty(); }
};

/// Runs every check on a model against a table; failures are listed, never thrown.
ModelVerification verifyReferenceModel(const ReferenceModel& model, const CoincidenceTable& table,
                                       const HilbertTolerances& tol = {});

nlohmann::json toJson(const ChshReport& report);
nlohmann::json toJson(const MarginalCheck& check);
nlohmann::json toJson(const ObservableCheck& check);
nlohmann::json toJson(const StateSchmidt& schmidt);
nlohmann::json toJson(const OperatorProduct& test);
nlohmann::json toJson(const ModelVerification& report);

}  // namespace qcm
