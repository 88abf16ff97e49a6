#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qcm/core_data.hpp"

namespace qcm {

/// Occupation statistics of N instances split between two states.
enum class Family { MB, BE };

std::string_view familyName(Family family);

struct DistParams {
    Family family = Family::MB;
    double p1 = 0.5;  ///< probability of the first state; the second is 1 - p1
    int N = 1;
};

/// Maxwell-Boltzmann: C(N,n) p1^n (1-p1)^(N-n).
double mbPmf(const DistParams& params, int n);

/// Bose-Einstein over distinguishable splits only: (n p1 + (N-n)(1-p1)) / (N(N+1)/2).
double bePmf(const DistParams& params, int n);

double pmf(const DistParams& params, int n);
std::vector<double> pmfVector(const DistParams& params);

struct DistFit {
    DistParams params;
    std::string category;
    double rss = 0.0;
    double tss = 0.0;
    /// Empty when the observations are constant and the fit is not exact.
    std::optional<double> r2;
    double bic = 0.0;
    std::vector<double> fitted;
};

/// Least-squares fit of p1 in [0,1]. BE uses golden-section search on its
/// convex RSS; MB scans 16 starting brackets before refining.
DistFit fitDistribution(const CountDataset& data, Family family);

/// BIC of a one-parameter least-squares fit over nobs points:
/// nobs * ln(RSS / nobs) + k ln(nobs). RSS is floored at nobs * epsilon^2
/// so exact fits stay finite and reproducible.
double leastSquaresBic(double rss, int nobs, int parameters = 1);

enum class EvidenceStrength { None, Weak, Positive, Strong };

std::string_view strengthName(EvidenceStrength strength);

struct BicComparison {
    double deltaBic = 0.0;  ///< bic(first) - bic(second); positive favours the second
    Family winner = Family::BE;
    bool tie = false;
    EvidenceStrength strength = EvidenceStrength::None;
};

/// Compares an MB fit (first) against a BE fit (second) on the same data.
/// Winner labels are positional: a negative delta selects the first slot,
/// reported as MB, a positive delta the second, reported as BE.
BicComparison compareBic(const DistFit& first, const DistFit& second);

struct RegressionResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 1.0;
    double mean = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
    double slopeStdError = 0.0;
};

/// Ordinary least squares y = slope * x + intercept, plus a Student-t 95%
/// interval on mean(ys).
RegressionResult linearRegression(std::span<const double> xs, std::span<const double> ys);

/// Two-sided 95% Student-t critical value for the given degrees of freedom.
double studentT975(int dof);

/// SCoP view of a count distribution: ground state "ground", one context,
/// and one state per split, labelled "n,N-n".
ScopModel scopFromDistribution(const DistParams& params, const std::string& context = "e");

nlohmann::json toJson(const DistFit& fit);
nlohmann::json toJson(const BicComparison& cmp);
nlohmann::json toJson(const RegressionResult& reg);

}  // namespace qcm
