#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "qcm/errors.hpp"
#include "qcm/hilbert_space.hpp"

using namespace qcm;

namespace {

std::string readFile(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CoincidenceTable table1() { return parseCoincidence(readFile(QCM_DATA_DIR "/table1.json")); }
ReferenceModel referenceModel() { return parseReferenceModel(readFile(QCM_DATA_DIR "/animal_acts_model.json")); }

Observable4 fromOracle(const oracle::Mat4& m) {
    Observable4 o;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) o.entries[i][j] = m[i][j];
    return o;
}

ComplexVector4 fromOracle(const std::array<Complex, 4>& s) { return ComplexVector4{s}; }

// Coincidence table from a local hidden-variable model: each variable fixes
// the four +-1 values of A, A', B, B'; the table is a mixture of such points.
CoincidenceTable localTable(const std::vector<std::pair<double, std::array<int, 4>>>& mixture) {
    std::array<CoincidenceTable::BlockOutcomes, 4> blocks;
    const std::array<std::pair<int, int>, 4> sides{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};  // AB, AB', A'B, A'B'
    for (std::size_t k = 0; k < 4; ++k) {
        auto& b = blocks[k];
        const std::array<std::pair<int, int>, 4> outcomes{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};
        for (std::size_t o = 0; o < 4; ++o) {
            b[o].left = outcomes[o].first > 0 ? "l+" : "l-";
            b[o].right = outcomes[o].second > 0 ? "r+" : "r-";
            b[o].sign = outcomes[o].first * outcomes[o].second;
            for (const auto& [w, v] : mixture)
                if (v[sides[k].first] == outcomes[o].first && v[sides[k].second] == outcomes[o].second)
                    b[o].probability += w;
            b[o].probability = std::min(b[o].probability, 1.0);  // normalised weights can round past 1
        }
    }
    return CoincidenceTable(blocks);
}

// Born-rule table for local qubit measurements A, A' (first factor) and B, B'
// (second factor) on a C^4 state.
CoincidenceTable bornTable(const std::array<Complex, 4>& psi, const std::array<oracle::Qubit, 4>& q) {
    std::array<CoincidenceTable::BlockOutcomes, 4> blocks;
    const std::array<std::pair<int, int>, 4> sides{{{0, 2}, {0, 3}, {1, 2}, {1, 3}}};
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& left = q[sides[k].first];
        const auto& right = q[sides[k].second];
        std::size_t o = 0;
        for (int sa : {1, -1})
            for (int sb : {1, -1}) {
                const auto& e = sa > 0 ? left.plus : left.minus;
                const auto& f = sb > 0 ? right.plus : right.minus;
                Complex amp = 0.0;
                for (int a = 0; a < 2; ++a)
                    for (int b = 0; b < 2; ++b) amp += std::conj(e[a] * f[b]) * psi[2 * a + b];
                blocks[k][o++] = {sa > 0 ? "l+" : "l-", sb > 0 ? "r+" : "r-", sa * sb, std::norm(amp)};
            }
    }
    return CoincidenceTable(blocks);
}

}  // namespace

TEST_CASE("expectations from the reference table") {
    const auto r = expectationsFromTable(table1());
    CHECK(r[Block::AB] == doctest::Approx(-0.778).epsilon(1e-9));
    CHECK(r[Block::ApB] == doctest::Approx(0.655).epsilon(1e-9));
    CHECK(r[Block::ABp] == doctest::Approx(0.358).epsilon(1e-9));
    CHECK(r[Block::ApBp] == doctest::Approx(0.630).epsilon(1e-9));
    CHECK(std::abs(r.chsh - 2.4197) <= 0.005);
    CHECK(r.classicalViolated);
    CHECK(r.tsirelsonRespected);
}

TEST_CASE("expectations: uniform and PR-box tables") {
    CoincidenceTable::BlockOutcomes u{{{"x", "u", 1, 0.25}, {"x", "v", -1, 0.25}, {"y", "u", -1, 0.25}, {"y", "v", 1, 0.25}}};
    const auto r = expectationsFromTable(CoincidenceTable({u, u, u, u}));
    for (double e : r.expectations) CHECK(e == 0.0);
    CHECK(r.chsh == 0.0);

    CoincidenceTable::BlockOutcomes corr{{{"x", "u", 1, 0.5}, {"x", "v", -1, 0.0}, {"y", "u", -1, 0.0}, {"y", "v", 1, 0.5}}};
    CoincidenceTable::BlockOutcomes anti{{{"x", "u", 1, 0.0}, {"x", "v", -1, 0.5}, {"y", "u", -1, 0.5}, {"y", "v", 1, 0.0}}};
    const auto pr = expectationsFromTable(CoincidenceTable({anti, corr, corr, corr}));
    CHECK(pr.chsh == 4.0);
    CHECK_FALSE(pr.tsirelsonRespected);
}

TEST_CASE("marginal law on the reference table") {
    const auto checks = marginalLawCheck(table1());
    REQUIRE(checks.size() == 8);
    CHECK(checks[0].label == "Horse");
    CHECK(checks[0].lhs == doctest::Approx(0.679).epsilon(1e-12));
    CHECK(checks[0].rhs == doctest::Approx(0.618).epsilon(1e-12));
    for (const char* side : {"A", "A'", "B", "B'"}) CHECK(sideViolated(checks, side));
    // Hand-summed values for the remaining concepts.
    const std::map<std::string, std::pair<double, double>> expected{
        {"Bear", {0.321, 0.382}},   {"Tiger", {0.864, 0.234}},   {"Cat", {0.135, 0.766}},
        {"Growls", {0.308, 0.864}}, {"Whinnies", {0.692, 0.135}}, {"Snorts", {0.889, 0.247}},
        {"Meows", {0.111, 0.753}}};
    for (const auto& c : checks) {
        const auto it = expected.find(c.label);
        if (it == expected.end()) continue;
        CHECK(c.lhs == doctest::Approx(it->second.first).epsilon(1e-12));
        CHECK(c.rhs == doctest::Approx(it->second.second).epsilon(1e-12));
    }
}

TEST_CASE("marginal law holds for product tables and local models") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<std::pair<double, std::array<int, 4>>> mix;
        double total = 0.0;
        for (int k = 0; k < 5; ++k) {
            std::array<int, 4> v{};
            for (auto& s : v) s = u(rng) < 0.5 ? 1 : -1;
            const double w = u(rng);
            total += w;
            mix.push_back({w, v});
        }
        for (auto& m : mix) m.first /= total;
        for (const auto& c : marginalLawCheck(localTable(mix))) CHECK_FALSE(c.violated);
    }
}

TEST_CASE("marginal law: unpairable labels") {
    CoincidenceTable::BlockOutcomes a{{{"x", "u", 1, 0.25}, {"x", "v", -1, 0.25}, {"y", "u", -1, 0.25}, {"y", "v", 1, 0.25}}};
    CoincidenceTable::BlockOutcomes b{{{"p", "u", 1, 0.25}, {"p", "v", -1, 0.25}, {"q", "u", -1, 0.25}, {"q", "v", 1, 0.25}}};
    CHECK_THROWS_AS(marginalLawCheck(CoincidenceTable({a, b, a, a})), SchemaError);
}

TEST_CASE("local deterministic models never exceed 2") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::pair<double, std::array<int, 4>>> mix;
        double total = 0.0;
        const int k = 1 + t % 6;
        for (int i = 0; i < k; ++i) {
            std::array<int, 4> v{};
            for (auto& s : v) s = u(rng) < 0.5 ? 1 : -1;
            const double w = u(rng);
            total += w;
            mix.push_back({w, v});
        }
        for (auto& m : mix) m.first /= total;
        CHECK(std::abs(expectationsFromTable(localTable(mix)).chsh) <= 2.0 + 1e-12);
    }
}

TEST_CASE("Born-rule tables with local measurements respect the Tsirelson bound") {
    std::mt19937_64 rng(13);
    double largest = 0.0;
    for (int t = 0; t < 1000; ++t) {
        const auto psi = oracle::randomState(rng);
        const std::array<oracle::Qubit, 4> q{oracle::randomQubitBasis(rng), oracle::randomQubitBasis(rng),
                                             oracle::randomQubitBasis(rng), oracle::randomQubitBasis(rng)};
        const double chsh = std::abs(expectationsFromTable(bornTable(psi, q)).chsh);
        CHECK(chsh <= kTsirelsonBound + 1e-9);
        largest = std::max(largest, chsh);
    }
    CHECK(largest > 2.0);  // the sample does include Bell violations
}

TEST_CASE("entangled measurements can exceed the Tsirelson bound") {
    // Four ON-basis +-1 observables, each diagonal in the computational basis,
    // but not built from shared local observables: |00> gives E = -1, 1, 1, 1.
    ComplexVector4 s;
    s.amplitudes = {1.0, 0.0, 0.0, 0.0};
    const auto minus = Observable4::diagonal({-1, 1, 1, -1});
    const auto plus = Observable4::diagonal({1, -1, -1, 1});
    const double chsh = expectation(s, plus).value * 3 - expectation(s, minus).value;
    CHECK(chsh == 4.0);
    CHECK(chshFromExpectations({expectation(s, minus).value, expectation(s, plus).value, expectation(s, plus).value,
                                expectation(s, plus).value})
              .tsirelsonRespected == false);
}

TEST_CASE("expectation values") {
    std::mt19937_64 rng(21);
    SUBCASE("identity and diagonal observables") {
        const auto psi = fromOracle(oracle::randomState(rng));
        CHECK(expectation(psi, Observable4::identity()).value == doctest::Approx(1.0).epsilon(1e-14));
        ComplexVector4 e1;
        e1.amplitudes = {1.0, 0.0, 0.0, 0.0};
        CHECK(expectation(e1, Observable4::diagonal({0.3, -2, 5, 7})).value == 0.3);
    }
    SUBCASE("linearity and global phase invariance") {
        for (int t = 0; t < 200; ++t) {
            const auto s = oracle::randomState(rng);
            const auto a = oracle::randomHermitian4(rng), b = oracle::randomHermitian4(rng);
            oracle::Mat4 sum{};
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) sum[i][j] = 2.0 * a[i][j] - 0.5 * b[i][j];
            HilbertTolerances loose;
            loose.hermitian = 1e-9;
            const double lhs = expectation(fromOracle(s), fromOracle(sum), loose).value;
            const double rhs = 2.0 * expectation(fromOracle(s), fromOracle(a), loose).value -
                               0.5 * expectation(fromOracle(s), fromOracle(b), loose).value;
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
            auto rotated = s;
            for (auto& x : rotated) x *= std::polar(1.0, 1.234);
            CHECK(expectation(fromOracle(rotated), fromOracle(a), loose).value ==
                  doctest::Approx(expectation(fromOracle(s), fromOracle(a), loose).value).epsilon(1e-12));
        }
    }
    SUBCASE("non-Hermitian observable is rejected") {
        auto o = Observable4::identity();
        o.entries[0][1] = 0.5;
        CHECK_THROWS_AS(expectation(fromOracle(oracle::randomState(rng)), o), ValidationError);
    }
}

TEST_CASE("state Schmidt decomposition") {
    SUBCASE("reference state is entangled; determinant oracle") {
        const auto m = referenceModel();
        const auto s = stateSchmidt(m.state);
        CHECK(s.rank == 2);
        const auto& p = m.state.amplitudes;
        const double det = std::abs(p[0] * p[3] - p[1] * p[2]);
        CHECK(det == doctest::Approx(0.465).epsilon(1e-3));
        CHECK(s.determinant == doctest::Approx(det).epsilon(1e-12));
        CHECK(s.singularValues.first * s.singularValues.second == doctest::Approx(det).epsilon(1e-12));
    }
    SUBCASE("Bell state") {
        ComplexVector4 bell;
        bell.amplitudes = {1 / std::sqrt(2.0), 0.0, 0.0, 1 / std::sqrt(2.0)};
        const auto s = stateSchmidt(bell);
        CHECK(s.singularValues.first == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(s.singularValues.second == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-14));
        CHECK(s.rank == 2);
    }
    SUBCASE("random product states have rank 1; local phases keep the rank") {
        std::mt19937_64 rng(6);
        std::uniform_real_distribution<double> u(0.0, 6.28);
        for (int t = 0; t < 500; ++t) {
            const auto a = oracle::randomQubitBasis(rng).plus, b = oracle::randomQubitBasis(rng).plus;
            ComplexVector4 prod;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) prod.amplitudes[2 * i + j] = a[i] * b[j];
            CHECK(stateSchmidt(prod).rank == 1);
            const auto psi = oracle::randomState(rng);
            const double phi = u(rng), chi = u(rng);
            ComplexVector4 s = fromOracle(psi), shifted = s;
            for (int k = 0; k < 2; ++k) shifted.amplitudes[k] *= std::polar(1.0, phi);
            for (int k = 2; k < 4; ++k) shifted.amplitudes[k] *= std::polar(1.0, chi);
            CHECK(stateSchmidt(shifted).rank == stateSchmidt(s).rank);
            CHECK(stateSchmidt(shifted).singularValues.first ==
                  doctest::Approx(stateSchmidt(s).singularValues.first).epsilon(1e-12));
        }
    }
}

TEST_CASE("operator product test") {
    SUBCASE("sigma_z (x) sigma_z") {
        const auto r = operatorProductTest(Observable4::diagonal({1, -1, -1, 1}));
        CHECK(r.product);
        CHECK(r.schmidtCoefficients[1] <= 1e-12);
        CHECK(r.nearestProductError <= 1e-12);
    }
    SUBCASE("random Hermitian products") {
        std::mt19937_64 rng(9);
        for (int t = 0; t < 1000; ++t) {
            const auto o = oracle::kron(oracle::randomHermitian2(rng), oracle::randomHermitian2(rng));
            CHECK(operatorProductTest(fromOracle(o)).product);
        }
    }
    SUBCASE("agreement with alternating least squares") {
        std::mt19937_64 rng(10);
        for (int t = 0; t < 100; ++t) {
            const auto o = oracle::randomHermitian4(rng);
            const auto r = operatorProductTest(fromOracle(o));
            CHECK_FALSE(r.product);
            // ALS from a few starts; the best run finds the global optimum.
            double best = 1e9;
            for (int s = 0; s < 4; ++s) best = std::min(best, oracle::alsNearestProduct(o, rng));
            CHECK(r.nearestProductError == doctest::Approx(best).epsilon(1e-6));
        }
    }
    SUBCASE("reference observables are entangled") {
        const auto m = referenceModel();
        for (const auto& o : m.observables) {
            const auto r = operatorProductTest(o);
            CHECK_FALSE(r.product);
            CHECK(r.schmidtCoefficients[1] > 1e-6 * r.schmidtCoefficients[0]);
        }
    }
}

TEST_CASE("reference model verification") {
    const auto m = referenceModel();
    const auto t = table1();
    SUBCASE("passes every check") {
        const auto v = verifyReferenceModel(m, t);
        for (const auto& f : v.failures) MESSAGE(f);
        CHECK(v.passed());
        REQUIRE(v.classification.has_value());
        CHECK(*v.classification == "nonlocal non-marginal box modeling 1");
        CHECK(v.stateNormSquared == doctest::Approx(0.9998).epsilon(1e-6));
        const std::array<double, 4> expected{-0.778, 0.358, 0.655, 0.630};
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(v.modelExpectations[i].value - expected[i]) <= 0.02);
    }
    SUBCASE("perturbed matrix is named in the report") {
        auto bad = m;
        bad.observables[static_cast<std::size_t>(Block::ABp)].entries[0][1] += 0.5;
        const auto v = verifyReferenceModel(bad, t);
        CHECK_FALSE(v.passed());
        bool named = false;
        for (const auto& f : v.failures) named = named || f.find("AB'") != std::string::npos;
        CHECK(named);
    }
    SUBCASE("product state, product observables and product table") {
        ReferenceModel prod;
        prod.state.amplitudes = {1.0, 0.0, 0.0, 0.0};
        for (auto& o : prod.observables) o = Observable4::diagonal({1, -1, -1, 1});
        const auto local = parseCoincidence(R"({"blocks":{
          "AB":[{"a":"x","b":"u","sign":1,"p":1},{"a":"x","b":"v","sign":-1,"p":0},{"a":"y","b":"u","sign":-1,"p":0},{"a":"y","b":"v","sign":1,"p":0}],
          "AB'":[{"a":"x","b":"s","sign":1,"p":1},{"a":"x","b":"t","sign":-1,"p":0},{"a":"y","b":"s","sign":-1,"p":0},{"a":"y","b":"t","sign":1,"p":0}],
          "A'B":[{"a":"z","b":"u","sign":1,"p":1},{"a":"z","b":"v","sign":-1,"p":0},{"a":"w","b":"u","sign":-1,"p":0},{"a":"w","b":"v","sign":1,"p":0}],
          "A'B'":[{"a":"z","b":"s","sign":1,"p":1},{"a":"z","b":"t","sign":-1,"p":0},{"a":"w","b":"s","sign":-1,"p":0},{"a":"w","b":"t","sign":1,"p":0}]}})");
        const auto v = verifyReferenceModel(prod, local);
        CHECK_FALSE(v.state.entangled());
        for (const auto& op : v.operators) CHECK(op.product);
        CHECK_FALSE(v.classification.has_value());
        CHECK_FALSE(v.passed());
    }
    SUBCASE("model JSON round trip and polar input") {
        const auto again = referenceModelFromJson(toJson(m));
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(std::abs(again.state.amplitudes[i] - m.state.amplitudes[i]) <= 1e-15);
        CHECK(std::abs(m.state.amplitudes[1] - std::polar(0.62, oracle::rad(16.72))) <= 1e-15);
        CHECK_THROWS_AS(parseReferenceModel(R"({"state":[1,0,0]})"), ParseError);
        CHECK_THROWS_AS(parseReferenceModel("{"), ParseError);
    }
}

TEST_CASE("reference observables meet their invariants") {
    const auto m = referenceModel();
    for (const auto& o : m.observables) {
        const auto c = checkObservable(o);
        CHECK(c.hermitian);
        CHECK(c.traceless);
        CHECK(c.spectrum);
        for (double e : c.eigenvalues) CHECK(std::abs(std::abs(e) - 1.0) <= 0.005);
    }
}
