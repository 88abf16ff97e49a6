#include "qcm/hilbert_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

Eigen::Matrix4cd toEigen(const Observable4& o) {
    Eigen::Matrix4cd m;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m(i, j) = o.entries[i][j];
    return m;
}

Eigen::Vector4cd toEigen(const ComplexVector4& v) {
    Eigen::Vector4cd out;
    for (int i = 0; i < 4; ++i) out(i) = v.amplitudes[i];
    return out;
}

double hermitianDeviation(const Eigen::Matrix4cd& m) { return (m - m.adjoint()).cwiseAbs().maxCoeff(); }

std::vector<std::string> labels(const CoincidenceTable::BlockOutcomes& block, bool left) {
    std::vector<std::string> out;
    for (const auto& o : block) {
        const auto& l = left ? o.left : o.right;
        if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
    }
    return out;
}

double marginal(const CoincidenceTable::BlockOutcomes& block, const std::string& label, bool left) {
    double sum = 0.0;
    for (const auto& o : block)
        if ((left ? o.left : o.right) == label) sum += o.probability;
    return sum;
}

Complex complexFromJson(const nlohmann::json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_object() && j.contains("re")) return {j.at("re").get<double>(), j.value("im", 0.0)};
    if (j.is_object() && j.contains("mod")) {
        const double mod = j.at("mod").get<double>();
        const double arg = j.value("argDeg", 0.0) * std::numbers::pi / 180.0;
        return std::polar(mod, arg);
    }
    throw ParseError(fmt::format("expected a complex number, got {}", j.dump()));
}

nlohmann::json complexToJson(Complex c) { return {{"re", c.real()}, {"im", c.imag()}}; }

}  // namespace

ComplexVector4 ComplexVector4::fromPolar(const std::array<double, 4>& moduli, const std::array<double, 4>& argDeg) {
    ComplexVector4 v;
    for (std::size_t i = 0; i < 4; ++i) v.amplitudes[i] = std::polar(moduli[i], argDeg[i] * std::numbers::pi / 180.0);
    return v;
}

double ComplexVector4::normSquared() const {
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s;
}

Observable4 Observable4::identity() { return diagonal({1.0, 1.0, 1.0, 1.0}); }

Observable4 Observable4::diagonal(const std::array<double, 4>& values) {
    Observable4 o;
    for (std::size_t i = 0; i < 4; ++i) o.entries[i][i] = values[i];
    return o;
}

Observable4 Observable4::tensor(const std::array<std::array<Complex, 2>, 2>& left,
                                const std::array<std::array<Complex, 2>, 2>& right) {
    Observable4 o;
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t d = 0; d < 2; ++d) o.entries[2 * a + b][2 * c + d] = left[a][c] * right[b][d];
    return o;
}

ChshReport chshFromExpectations(const std::array<double, 4>& e) {
    ChshReport r;
    r.expectations = e;
    r.chsh = e[static_cast<std::size_t>(Block::ApBp)] + e[static_cast<std::size_t>(Block::ApB)] +
             e[static_cast<std::size_t>(Block::ABp)] - e[static_cast<std::size_t>(Block::AB)];
    r.classicalViolated = std::abs(r.chsh) > 2.0;
    r.tsirelsonRespected = std::abs(r.chsh) <= kTsirelsonBound;
    return r;
}

ChshReport expectationsFromTable(const CoincidenceTable& table) {
    std::array<double, 4> e{};
    for (Block b : kBlocks)
        for (const auto& o : table.block(b)) e[static_cast<std::size_t>(b)] += o.sign * o.probability;
    return chshFromExpectations(e);
}

std::vector<MarginalCheck> marginalLawCheck(const CoincidenceTable& table, double tolerance) {
    struct Side {
        const char* name;
        Block lhs, rhs;
        bool left;
    };
    constexpr std::array<Side, 4> sides{{{"A", Block::AB, Block::ABp, true},
                                         {"A'", Block::ApB, Block::ApBp, true},
                                         {"B", Block::AB, Block::ApB, false},
                                         {"B'", Block::ABp, Block::ApBp, false}}};
    std::vector<MarginalCheck> out;
    for (const auto& s : sides) {
        auto lhsLabels = labels(table.block(s.lhs), s.left);
        auto rhsLabels = labels(table.block(s.rhs), s.left);
        auto sortedL = lhsLabels, sortedR = rhsLabels;
        std::sort(sortedL.begin(), sortedL.end());
        std::sort(sortedR.begin(), sortedR.end());
        if (sortedL != sortedR)
            throw SchemaError(fmt::format("concept {} uses outcomes {{{}}} in block {} but {{{}}} in block {}", s.name,
                                          fmt::join(lhsLabels, ", "), blockName(s.lhs), fmt::join(rhsLabels, ", "),
                                          blockName(s.rhs)));
        for (const auto& label : lhsLabels) {
            MarginalCheck c{s.name, label, s.lhs, s.rhs, marginal(table.block(s.lhs), label, s.left),
                            marginal(table.block(s.rhs), label, s.left)};
            c.violated = std::abs(c.lhs - c.rhs) > tolerance;
            out.push_back(std::move(c));
        }
    }
    return out;
}

bool sideViolated(const std::vector<MarginalCheck>& checks, std::string_view side) {
    return std::any_of(checks.begin(), checks.end(), [&](const auto& c) { return c.side == side && c.violated; });
}

ObservableCheck checkObservable(const Observable4& obs, const HilbertTolerances& tol) {
    const Eigen::Matrix4cd m = toEigen(obs);
    ObservableCheck c;
    c.hermitianDeviation = hermitianDeviation(m);
    c.trace = m.trace().real();
    const Eigen::Matrix4cd h = 0.5 * (m + m.adjoint());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h, Eigen::EigenvaluesOnly);
    for (int i = 0; i < 4; ++i) c.eigenvalues[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
    c.hermitian = c.hermitianDeviation <= tol.hermitian;
    c.traceless = std::abs(c.trace) <= tol.trace;
    c.spectrum = std::abs(c.eigenvalues[0] + 1.0) <= tol.eigenvalue && std::abs(c.eigenvalues[1] + 1.0) <= tol.eigenvalue &&
                 std::abs(c.eigenvalues[2] - 1.0) <= tol.eigenvalue && std::abs(c.eigenvalues[3] - 1.0) <= tol.eigenvalue;
    return c;
}

ExpectationValue expectation(const ComplexVector4& state, const Observable4& obs, const HilbertTolerances& tol) {
    const Eigen::Matrix4cd m = toEigen(obs);
    const double dev = hermitianDeviation(m);
    if (dev > tol.hermitian)
        throw ValidationError(fmt::format("observable is not Hermitian: max |O - O^dagger| = {}", dev));
    const Eigen::Vector4cd p = toEigen(state);
    const Complex value = p.dot(m * p);  // conjugates the first argument
    return {value.real(), value.imag(), std::abs(value.imag()) <= tol.imaginary};
}

StateSchmidt stateSchmidt(const ComplexVector4& state, double threshold) {
    Eigen::Matrix2cd m;
    m << state.amplitudes[0], state.amplitudes[1], state.amplitudes[2], state.amplitudes[3];
    const Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m);
    StateSchmidt s;
    s.singularValues = {svd.singularValues()(0), svd.singularValues()(1)};
    s.rank = (s.singularValues.first > threshold) + (s.singularValues.second > threshold);
    s.determinant = std::abs(m.determinant());
    return s;
}

OperatorProduct operatorProductTest(const Observable4& obs, double relativeThreshold) {
    Eigen::Matrix4cd r;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) r(2 * a + c, 2 * b + d) = obs.entries[2 * a + b][2 * c + d];
    const Eigen::JacobiSVD<Eigen::Matrix4cd> svd(r);
    OperatorProduct out;
    for (int i = 0; i < 4; ++i) out.schmidtCoefficients[static_cast<std::size_t>(i)] = svd.singularValues()(i);
    const double largest = out.schmidtCoefficients[0];
    int above = 0;
    double tail = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        if (out.schmidtCoefficients[i] > relativeThreshold * largest) ++above;
        if (i > 0) tail += out.schmidtCoefficients[i] * out.schmidtCoefficients[i];
    }
    out.product = largest > 0.0 && above == 1;
    out.nearestProductError = std::sqrt(tail);
    return out;
}

ReferenceModel referenceModelFromJson(const nlohmann::json& doc) {
    try {
        ReferenceModel model;
        const auto& state = doc.at("state");
        if (!state.is_array() || state.size() != 4) throw ParseError("model state must list 4 amplitudes");
        for (std::size_t i = 0; i < 4; ++i) model.state.amplitudes[i] = complexFromJson(state[i]);
        const auto& observables = doc.at("observables");
        for (Block b : kBlocks) {
            const auto& rows = observables.at(std::string(blockName(b)));
            if (!rows.is_array() || rows.size() != 4)
                throw ParseError(fmt::format("observable {} must have 4 rows", blockName(b)));
            auto& o = model.observables[static_cast<std::size_t>(b)];
            for (std::size_t i = 0; i < 4; ++i) {
                if (!rows[i].is_array() || rows[i].size() != 4)
                    throw ParseError(fmt::format("observable {} row {} must have 4 entries", blockName(b), i + 1));
                for (std::size_t j = 0; j < 4; ++j) o.entries[i][j] = complexFromJson(rows[i][j]);
            }
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("model file: {}", e.what()));
    }
}

ReferenceModel parseReferenceModel(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(fmt::format("model file: {}", e.what()));
    }
    return referenceModelFromJson(doc);
}

nlohmann::json toJson(const ReferenceModel& model) {
    nlohmann::json state = nlohmann::json::array();
    for (const auto& a : model.state.amplitudes) state.push_back(complexToJson(a));
    nlohmann::json observables = nlohmann::json::object();
    for (Block b : kBlocks) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : model.observables[static_cast<std::size_t>(b)].entries) {
            nlohmann::json r = nlohmann::json::array();
            for (const auto& c : row) r.push_back(complexToJson(c));
            rows.push_back(r);
        }
        observables[std::string(blockName(b))] = rows;
    }
    return {{"state", state}, {"observables", observables}};
}

ModelVerification verifyReferenceModel(const ReferenceModel& model, const CoincidenceTable& table,
                                       const HilbertTolerances& tol) {
    ModelVerification v;
    auto& failures = v.failures;

    v.stateNormSquared = model.state.normSquared();
    if (std::abs(v.stateNormSquared - 1.0) > tol.norm)
        failures.push_back(fmt::format("state norm squared {:.6f} is not within {} of 1", v.stateNormSquared, tol.norm));

    v.table = expectationsFromTable(table);
    for (Block b : kBlocks) {
        const auto i = static_cast<std::size_t>(b);
        const auto name = blockName(b);
        const auto& obs = model.observables[i];
        v.observables[i] = checkObservable(obs, tol);
        const auto& c = v.observables[i];
        if (!c.hermitian)
            failures.push_back(fmt::format("observable {}: not Hermitian (max deviation {:.6f})", name, c.hermitianDeviation));
        if (!c.traceless) failures.push_back(fmt::format("observable {}: trace {:.6f} is not near 0", name, c.trace));
        if (!c.spectrum)
            failures.push_back(fmt::format("observable {}: eigenvalues ({:.4f}, {:.4f}, {:.4f}, {:.4f}) are not +-1 in pairs",
                                           name, c.eigenvalues[0], c.eigenvalues[1], c.eigenvalues[2], c.eigenvalues[3]));
        try {
            v.modelExpectations[i] = expectation(model.state, obs, tol);
            const double diff = v.modelExpectations[i].value - v.table.expectations[i];
            v.expectationMatches[i] = std::abs(diff) <= tol.expectation;
            if (!v.expectationMatches[i])
                failures.push_back(fmt::format("observable {}: model expectation {:.4f} differs from table value {:.4f}",
                                               name, v.modelExpectations[i].value, v.table.expectations[i]));
            if (!v.modelExpectations[i].imaginarySmall)
                failures.push_back(fmt::format("observable {}: expectation has imaginary part {:.6f}", name,
                                               v.modelExpectations[i].imaginary));
        } catch (const Error& e) {
            failures.push_back(fmt::format("observable {}: {}", name, e.what()));
        }
        v.operators[i] = operatorProductTest(obs, tol.schmidt);
        if (v.operators[i].product) failures.push_back(fmt::format("observable {}: is a product measurement", name));
    }

    v.state = stateSchmidt(model.state, tol.schmidt);
    if (!v.state.entangled()) failures.push_back(fmt::format("state has Schmidt rank {}, not entangled", v.state.rank));

    bool marginalViolated = false;
    try {
        v.marginals = marginalLawCheck(table, tol.marginal);
        marginalViolated = std::any_of(v.marginals.begin(), v.marginals.end(), [](const auto& c) { return c.violated; });
    } catch (const Error& e) {
        failures.push_back(fmt::format("marginal law check: {}", e.what()));
    }

    if (v.table.chsh > 2.0 && marginalViolated && v.table.chsh <= kTsirelsonBound)
        v.classification = std::string(kNonMarginalBoxModel);
    return v;
}

nlohmann::json toJson(const ChshReport& r) {
    nlohmann::json e = nlohmann::json::object();
    for (Block b : kBlocks) e[std::string(blockName(b))] = r[b];
    return {{"expectations", e},
            {"chsh", r.chsh},
            {"classicalViolated", r.classicalViolated},
            {"tsirelsonRespected", r.tsirelsonRespected}};
}

nlohmann::json toJson(const MarginalCheck& c) {
    return {{"side", c.side},
            {"label", c.label},
            {"lhsBlock", blockName(c.lhsBlock)},
            {"rhsBlock", blockName(c.rhsBlock)},
            {"lhs", c.lhs},
            {"rhs", c.rhs},
            {"violated", c.violated}};
}

nlohmann::json toJson(const ObservableCheck& c) {
    return {{"hermitianDeviation", c.hermitianDeviation},
            {"trace", c.trace},
            {"eigenvalues", c.eigenvalues},
            {"hermitian", c.hermitian},
            {"traceless", c.traceless},
            {"spectrum", c.spectrum}};
}

nlohmann::json toJson(const StateSchmidt& s) {
    return {{"singularValues", {s.singularValues.first, s.singularValues.second}},
            {"rank", s.rank},
            {"determinant", s.determinant},
            {"entangled", s.entangled()}};
}

nlohmann::json toJson(const OperatorProduct& t) {
    return {{"schmidtCoefficients", t.schmidtCoefficients},
            {"product", t.product},
            {"nearestProductError", t.nearestProductError}};
}

nlohmann::json toJson(const ModelVerification& v) {
    nlohmann::json observables = nlohmann::json::object();
    for (Block b : kBlocks) {
        const auto i = static_cast<std::size_t>(b);
        auto j = toJson(v.observables[i]);
        j["expectation"] = v.modelExpectations[i].value;
        j["expectationImaginary"] = v.modelExpectations[i].imaginary;
        j["tableExpectation"] = v.table.expectations[i];
        j["expectationMatches"] = v.expectationMatches[i];
        j["operatorSchmidt"] = toJson(v.operators[i]);
        observables[std::string(blockName(b))] = j;
    }
    nlohmann::json marginals = nlohmann::json::array();
    for (const auto& c : v.marginals) marginals.push_back(toJson(c));
    return {{"stateNormSquared", v.stateNormSquared},
            {"state", toJson(v.state)},
            {"observables", observables},
            {"table", toJson(v.table)},
            {"marginals", marginals},
            {"classification", v.classification ? nlohmann::json(*v.classification) : nlohmann::json(nullptr)},
            {"failures", v.failures},
            {"passed", v.passed()}};
}

}  // namespace qcm
