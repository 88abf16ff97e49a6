#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qcm/classicality.hpp"
#include "qcm/core_data.hpp"
#include "qcm/errors.hpp"
#include "qcm/fock_model.hpp"
#include "qcm/hilbert_space.hpp"
#include "qcm/stats_indist.hpp"
#include "svg.hpp"

namespace qcm::cli {

namespace {

using nlohmann::json;

class UsageError : public Error {
public:
    using Error::Error;
};

struct Section {
    std::string text;
    json data = json::object();
    std::optional<Chart> chart;
};

std::string readInput(const std::string& path, std::istream& in) {
    if (path.empty()) throw UsageError("--input is required");
    if (path == "-") return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    std::ifstream file(path, std::ios::binary);
    if (!file) throw IoError(fmt::format("cannot open '{}'", path));
    std::string text{std::istreambuf_iterator<char>(file), std::istreambuf_iterator<char>()};
    if (file.bad()) throw IoError(fmt::format("cannot read '{}'", path));
    return text;
}

std::string extension(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

TableFormat membershipFormat(const RunConfig& config) {
    if (config.format) return *config.format == "json" ? TableFormat::Json : TableFormat::Csv;
    return extension(config.input) == ".json" ? TableFormat::Json : TableFormat::Csv;
}

void requireJsonInput(const RunConfig& config) {
    if (config.format && *config.format != "json")
        throw UsageError(fmt::format("{} reads JSON input only", config.command));
}

double toleranceOr(const RunConfig& config, double fallback) { return config.tolerance.value_or(fallback); }

bool hasNegation(const MembershipRecord& r) {
    return r.muAp && r.muBp && r.muAandB && r.muAandBp && r.muApandB && r.muApandBp;
}

std::string concepts(const MembershipRecord& r) {
    if (r.conceptA.empty() && r.conceptB.empty()) return "";
    return fmt::format("  (A = {}, B = {})", r.conceptA.empty() ? "?" : r.conceptA,
                       r.conceptB.empty() ? "?" : r.conceptB);
}

std::string status(bool ok) { return ok ? "ok" : "violated"; }

// --- classicality ------------------------------------------------------------

void renderVerdict(std::string& out, const ClassicalityVerdict& v) {
    out += fmt::format("  {:<12} classical {}\n", conditionSetName(v.conditionSet), v.satisfied ? "yes" : "no");
    for (const auto& r : v.residuals) {
        const bool ok = r.equality ? std::abs(r.value) <= v.tolerance : r.value <= v.tolerance;
        out += fmt::format("    {:<14}{:>8}  {}\n", r.condition, num(r.value), status(ok));
    }
}

Section runClassicality(const RunConfig& config, std::istream& in) {
    const auto records = parseMembershipTable(readInput(config.input, in), membershipFormat(config));
    const double tol = toleranceOr(config, kDefaultClassicalTolerance);
    Section s;
    s.text = fmt::format("classicality  records {}  tolerance {}\n", records.size(), tol);
    json items = json::array();
    std::vector<DeviationProfile> profiles;
    std::vector<std::string> profileNames;
    std::vector<double> worst;
    for (const auto& r : records) {
        s.text += fmt::format("\n{}{}\n", r.exemplar, concepts(r));
        json item{{"exemplar", r.exemplar}, {"conceptA", r.conceptA}, {"conceptB", r.conceptB}};
        json verdicts = json::object();
        double worstResidual = 0.0;
        auto add = [&](const ClassicalityVerdict& v) {
            renderVerdict(s.text, v);
            verdicts[std::string(conditionSetName(v.conditionSet))] = toJson(v);
            for (const auto& res : v.residuals)
                worstResidual = std::max(worstResidual, res.equality ? std::abs(res.value) : res.value);
        };
        if (r.muAandB) add(checkConjunction(r.muA, r.muB, *r.muAandB, tol));
        if (r.muAorB) add(checkDisjunction(r.muA, r.muB, *r.muAorB, tol));
        if (hasNegation(r)) {
            add(checkNegation(r, tol));
            const auto p = deviationProfile(r);
            s.text += fmt::format("  deviation    I_A {}  I_B {}  I_A' {}  I_B' {}  I_total {}\n", num(p.iA), num(p.iB),
                                  num(p.iAp), num(p.iBp), num(p.iTotal));
            item["deviationProfile"] = toJson(p);
            profiles.push_back(p);
            profileNames.push_back(r.exemplar);
        } else {
            item["deviationProfile"] = nullptr;
        }
        if (verdicts.empty()) s.text += "  no conjunction or disjunction weights to test\n";
        item["verdicts"] = verdicts;
        items.push_back(item);
        worst.push_back(worstResidual);
    }
    s.data["records"] = items;

    if (profiles.size() >= 3) {
        const auto stats = profileStatistics(profiles);
        const auto bands = checkReferenceBands(stats);
        s.text += fmt::format("\nprofile statistics over {} records\n", profiles.size());
        s.text += fmt::format("  {:<10}{:>8}{:>9}{:>11}{:>8}   {:<19}  {:<18}  {}\n", "quantity", "mean", "slope",
                              "intercept", "R2", "95% CI", "reference band", "inside");
        json statsJson = json::array();
        for (std::size_t q = 0; q < 5; ++q) {
            const auto& reg = stats[q].regression;
            s.text += fmt::format("  {:<10}{:>8}{:>9}{:>11}{:>8}   [{}, {}]  ({}, {})  {}\n", stats[q].name,
                                  num(stats[q].mean), num(reg.slope), num(reg.intercept), num(reg.r2),
                                  num(reg.ci95.first), num(reg.ci95.second), num(bands[q].band.lower),
                                  num(bands[q].band.upper), bands[q].pass ? "yes" : "no");
            auto j = toJson(stats[q]);
            j["band"] = {bands[q].band.lower, bands[q].band.upper};
            j["insideBand"] = bands[q].pass;
            statsJson.push_back(j);
        }
        s.data["statistics"] = statsJson;
    } else {
        s.text += fmt::format("\nprofile statistics: skipped (needs 3 records with all negation weights, have {})\n",
                              profiles.size());
        s.data["statistics"] = nullptr;
    }

    Chart chart;
    if (!profiles.empty()) {
        chart.title = "Deviation profiles";
        chart.categories = {"I_A", "I_B", "I_A'", "I_B'", "I_total"};
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            const auto v = profiles[i].values();
            chart.series.push_back({profileNames[i], {v.begin(), v.end()}, false});
        }
    } else {
        chart.title = "Largest classicality residual";
        for (const auto& r : records) chart.categories.push_back(r.exemplar);
        chart.series.push_back({"residual", worst, false});
    }
    s.chart = chart;
    return s;
}

// --- fock-fit ----------------------------------------------------------------

FitPolicy policyFrom(const RunConfig& config) {
    if (config.policy == "minimal") return {};
    if (config.policy == "fixed") return {FitPolicy::Kind::FixedSectorWeight, config.fixedM2};
    throw UsageError(fmt::format("unknown policy '{}' (expected minimal or fixed)", config.policy));
}

Section runFockFit(const RunConfig& config, std::istream& in) {
    if (config.mode != "auto" && config.mode != "two-sector" && config.mode != "general")
        throw UsageError(fmt::format("unknown mode '{}' (expected auto, two-sector or general)", config.mode));
    const auto records = parseMembershipTable(readInput(config.input, in), membershipFormat(config));
    const FitPolicy policy = policyFrom(config);
    const double tol = toleranceOr(config, kFitTolerance);
    GeneralFitOptions options;
    options.seed = config.seed;
    options.starts = config.starts;

    Section s;
    s.text = fmt::format("fock-fit  records {}  mode {}  policy {}  seed {}\n", records.size(), config.mode,
                         policy.name(), config.seed);
    Chart chart{"Observed and fitted weights", {}, {{"observed", {}, false}, {"predicted", {}, false}}};
    json items = json::array();
    for (const auto& r : records) {
        json fits = json::array();
        const bool general = config.mode == "general" || (config.mode == "auto" && hasNegation(r));
        s.text += fmt::format("\n{}{}\n", r.exemplar, concepts(r));
        if (general) {
            const GeneralFit fit = fitGeneralQuadruple(r, options);
            const bool feasible = fit.residual <= tol;
            s.text += fmt::format("  general fit  best start {}\n", fit.bestStart);
            s.text += fmt::format("    {:<6}{:>8}{:>8}{:>8}{:>9}{:>10}{:>11}{:>10}{:>10}\n", "term", "alpha", "m2", "n2",
                                  "beta", "phi", "predicted", "observed", "residual");
            json predicted = json::object(), observed = json::object();
            for (Combination c : kCombinations) {
                const auto i = static_cast<std::size_t>(c);
                const auto d = combinationData(r, c);
                const auto& p = fit.params[c];
                const double pred = evalGeneral(d.muX, d.muY, fit.params, c).value;
                s.text += fmt::format("    {:<6}{:>8}{:>8}{:>8}{:>9}{:>10}{:>11}{:>10}{:>10}\n", combinationName(c),
                                      num(p.alpha), num(p.m2), num(p.n2), num(p.beta), num(p.phiDeg), num(pred),
                                      num(d.observed), num(fit.residuals[i]));
                predicted[std::string(combinationName(c))] = pred;
                observed[std::string(combinationName(c))] = d.observed;
                chart.categories.push_back(fmt::format("{} {}", r.exemplar, combinationName(c)));
                chart.series[0].values.push_back(d.observed);
                chart.series[1].values.push_back(pred);
            }
            s.text += fmt::format("    max residual {}  {}  interference load {}\n", num(fit.residual),
                                  feasible ? "feasible" : "infeasible", num(fit.interferenceLoad));
            s.text += fmt::format("    marginal mismatch  A {}  B {}\n", num(fit.marginalMismatch[0]),
                                  num(fit.marginalMismatch[1]));
            json j = toJson(fit);
            j["feasible"] = feasible;
            fits.push_back({{"kind", "general"}, {"fit", j}, {"predicted", predicted}, {"observed", observed}});
        } else {
            auto fitOne = [&](Connective connective, double target) {
                const TwoSectorFit fit = fitTwoSector(r.muA, r.muB, target, connective, policy);
                const bool feasible = fit.residual <= tol;
                const double pred = evalTwoSector(r.muA, r.muB, fit.params).value;
                s.text += fmt::format("  {:<4} target {}\n", connectiveName(connective), num(target));
                s.text += fmt::format("    m2 {}  n2 {}  theta {} deg  predicted {}  residual {}  {}\n", num(fit.params.m2),
                                      num(fit.params.n2), num(fit.params.thetaDeg), num(pred), num(fit.residual),
                                      feasible ? "feasible" : "infeasible");
                if (fit.family)
                    s.text += fmt::format("    exact fits for m2 in [{}, {}]\n", num(fit.family->m2Min), num(fit.family->m2Max));
                else
                    s.text += "    no exact fit; closest attainable point reported\n";
                json j = toJson(fit);
                j["feasible"] = feasible;
                fits.push_back({{"kind", "two-sector"},
                                {"connective", connectiveName(connective)},
                                {"target", target},
                                {"predicted", pred},
                                {"fit", j}});
                chart.categories.push_back(fmt::format("{} {}", r.exemplar, connectiveName(connective)));
                chart.series[0].values.push_back(target);
                chart.series[1].values.push_back(pred);
            };
            if (r.muAandB) fitOne(Connective::And, *r.muAandB);
            if (r.muAorB) fitOne(Connective::Or, *r.muAorB);
            if (!r.muAandB && !r.muAorB) {
                if (config.mode == "two-sector")
                    throw IncompleteRecordError(r.exemplar, "muAandB or muAorB");
                s.text += "  nothing to fit\n";
            }
        }
        items.push_back({{"exemplar", r.exemplar}, {"fits", fits}});
    }
    s.data["mode"] = config.mode;
    s.data["seed"] = config.seed;
    s.data["tolerance"] = tol;
    s.data["records"] = items;
    s.chart = chart;
    return s;
}

// --- chsh --------------------------------------------------------------------

Section runChsh(const RunConfig& config, std::istream& in) {
    requireJsonInput(config);
    const CoincidenceTable table = parseCoincidence(readInput(config.input, in));
    const double tol = toleranceOr(config, 0.01);
    const ChshReport report = expectationsFromTable(table);
    const auto marginals = marginalLawCheck(table, tol);

    Section s;
    s.text = "chsh\n";
    for (Block b : kBlocks) s.text += fmt::format("  {:<8}{:>8}\n", fmt::format("E({})", blockName(b)), num(report[b]));
    s.text += fmt::format("  CHSH = {}\n", num(report.chsh));
    s.text += report.classicalViolated ? "  classical bound violated (|CHSH| > 2)\n"
                                       : "  classical bound respected (|CHSH| <= 2)\n";
    s.text += report.tsirelsonRespected ? "  Tsirelson bound respected (|CHSH| <= 2.8284)\n"
                                        : "  Tsirelson bound exceeded (|CHSH| > 2.8284)\n";
    s.text += "  note: 3-decimal probabilities carry about 0.005 uncertainty into CHSH\n";

    s.text += fmt::format("\nmarginal law  tolerance {}\n", num(tol));
    s.text += fmt::format("  {:<8}{:<12}{:<14}{:>8}{:>8}{:>8}  {}\n", "concept", "outcome", "blocks", "lhs", "rhs", "diff",
                          "status");
    json marginalJson = json::array();
    for (const auto& m : marginals) {
        s.text += fmt::format("  {:<8}{:<12}{:<14}{:>8}{:>8}{:>8}  {}\n", m.side, m.label,
                              fmt::format("{} vs {}", blockName(m.lhsBlock), blockName(m.rhsBlock)), num(m.lhs),
                              num(m.rhs), num(std::abs(m.lhs - m.rhs)), status(!m.violated));
        marginalJson.push_back(toJson(m));
    }
    const bool anyViolated = std::any_of(marginals.begin(), marginals.end(), [](const auto& m) { return m.violated; });
    s.text += anyViolated ? "  marginal law violated\n" : "  marginal law holds\n";

    s.data["chsh"] = toJson(report);
    s.data["marginals"] = marginalJson;
    s.data["marginalLawViolated"] = anyViolated;
    s.data["tolerance"] = tol;

    if (!config.model.empty()) {
        const ReferenceModel model = parseReferenceModel(readInput(config.model, in));
        const ModelVerification v = verifyReferenceModel(model, table);
        s.text += "\nreference model\n";
        s.text += fmt::format("  state  norm^2 {}  singular values ({}, {})  |det| {}  rank {}  {}\n",
                              num(v.stateNormSquared), num(v.state.singularValues.first),
                              num(v.state.singularValues.second), num(v.state.determinant), v.state.rank,
                              v.state.entangled() ? "entangled" : "product");
        s.text += fmt::format("  {:<6}{:>10}{:>8}{:>30}{:>10}{:>9}  {}\n", "block", "herm dev", "trace", "eigenvalues",
                              "<p|E|p>", "table", "operator Schmidt coefficients");
        for (Block b : kBlocks) {
            const auto i = static_cast<std::size_t>(b);
            const auto& c = v.observables[i];
            const auto& op = v.operators[i];
            s.text += fmt::format("  {:<6}{:>10}{:>8}{:>30}{:>10}{:>9}  {} {} {} {}  {}\n", blockName(b),
                                  num(c.hermitianDeviation), num(c.trace),
                                  fmt::format("{} {} {} {}", num(c.eigenvalues[0]), num(c.eigenvalues[1]),
                                              num(c.eigenvalues[2]), num(c.eigenvalues[3])),
                                  num(v.modelExpectations[i].value), num(v.table.expectations[i]),
                                  num(op.schmidtCoefficients[0]), num(op.schmidtCoefficients[1]),
                                  num(op.schmidtCoefficients[2]), num(op.schmidtCoefficients[3]),
                                  op.product ? "product" : "entangled");
        }
        if (v.failures.empty()) {
            s.text += "  all checks passed\n";
        } else {
            for (const auto& f : v.failures) s.text += fmt::format("  FAILED: {}\n", f);
        }
        s.text += fmt::format("  classification: {}\n", v.classification ? *v.classification : "none");
        s.data["model"] = toJson(v);
    }

    Chart chart{"Expectation values", {}, {{"E", {}, false}}};
    for (Block b : kBlocks) {
        chart.categories.push_back(std::string(blockName(b)));
        chart.series[0].values.push_back(report[b]);
    }
    s.chart = chart;
    return s;
}

// --- stats-fit ---------------------------------------------------------------

std::string optionalNum(const std::optional<double>& v) { return v ? num(*v) : "n/a"; }

Section runStatsFit(const RunConfig& config, std::istream& in) {
    requireJsonInput(config);
    const auto datasets = parseCountDatasets(readInput(config.input, in));
    Section s;
    s.text = fmt::format("stats-fit  datasets {}\n", datasets.size());
    s.text += fmt::format("  {:<16}{:>4}{:>9}{:>9}{:>9}{:>9}{:>12}  {:<5} {}\n", "category", "N", "P_MB", "R2_MB", "P_BE",
                          "R2_BE", "dBIC", "best", "evidence");
    json items = json::array();
    for (const auto& d : datasets) {
        const DistFit mb = fitDistribution(d, Family::MB);
        const DistFit be = fitDistribution(d, Family::BE);
        const BicComparison cmp = compareBic(mb, be);
        s.text += fmt::format("  {:<16}{:>4}{:>9}{:>9}{:>9}{:>9}{:>12}  {:<5} {}\n", d.category, d.N, num(mb.params.p1),
                              optionalNum(mb.r2), num(be.params.p1), optionalNum(be.r2), num(cmp.deltaBic),
                              cmp.tie ? "tie" : familyName(cmp.winner), strengthName(cmp.strength));
        items.push_back({{"category", d.category},
                         {"N", d.N},
                         {"observed", d.observed},
                         {"mb", toJson(mb)},
                         {"be", toJson(be)},
                         {"comparison", toJson(cmp)}});
    }
    s.text += "  dBIC = BIC(MB) - BIC(BE); positive favours BE\n";
    s.data["datasets"] = items;

    if (!datasets.empty()) {
        const auto& d = datasets.front();
        Chart chart{fmt::format("{}: observed and fitted distributions", d.category), {}, {}};
        for (int n = 0; n <= d.N; ++n) chart.categories.push_back(std::to_string(n));
        chart.series.push_back({"observed", d.observed, false});
        chart.series.push_back({"MB", fitDistribution(d, Family::MB).fitted, true});
        chart.series.push_back({"BE", fitDistribution(d, Family::BE).fitted, true});
        s.chart = chart;
    }
    return s;
}

// --- argument parsing --------------------------------------------------------

struct Parsed {
    RunConfig config;
    bool help = false;
    std::string helpText;
};

Parsed parseArgs(const std::vector<std::string>& args, const std::optional<std::string>& envTolerance) {
    Parsed parsed;
    RunConfig& c = parsed.config;
    CLI::App app{"Quantum-cognition analyses of membership, coincidence and count data", "qcm"};
    app.require_subcommand(1, 1);
    std::string format, output = "text";
    std::optional<double> tolerance;

    auto common = [&](CLI::App* sub, bool inputRequired) {
        auto* opt = sub->add_option("--input,-i", c.input, "input file, or - for standard input");
        if (inputRequired) opt->required();
        sub->add_option("--format", format, "input format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--tolerance", tolerance, "tolerance override (also QCM_TOLERANCE)");
        sub->add_option("--seed", c.seed, "random seed")->capture_default_str();
        sub->add_option("--output,-o", output, "report format")->check(CLI::IsMember({"text", "json"}));
        sub->add_option("--plot", c.plot, "write an SVG chart to this file");
    };
    auto* classicality = app.add_subcommand("classicality", "classicality verdicts and deviation profiles");
    common(classicality, true);
    auto* fock = app.add_subcommand("fock-fit", "two-sector and general Fock-space fits");
    common(fock, true);
    fock->add_option("--mode", c.mode, "auto, two-sector or general")
        ->check(CLI::IsMember({"auto", "two-sector", "general"}));
    fock->add_option("--policy", c.policy, "minimal or fixed")->check(CLI::IsMember({"minimal", "fixed"}));
    fock->add_option("--m2", c.fixedM2, "sector-2 weight for --policy fixed")->check(CLI::Range(0.0, 1.0));
    fock->add_option("--starts", c.starts, "multistart count for general fits")->check(CLI::Range(1, 1000));
    auto* chsh = app.add_subcommand("chsh", "CHSH value and marginal law of a coincidence table");
    common(chsh, true);
    chsh->add_option("--model", c.model, "reference model file to verify");
    auto* stats = app.add_subcommand("stats-fit", "MB/BE fits and BIC comparison of count datasets");
    common(stats, true);
    auto* report = app.add_subcommand("report", "run every invocation listed in a manifest");
    common(report, false);
    report->add_option("--manifest", c.manifest, "manifest file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        parsed.help = true;
        parsed.helpText = app.help();
        return parsed;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    c.command = app.get_subcommands().front()->get_name();
    if (!format.empty()) c.format = format;
    c.output = output == "json" ? OutputMode::Json : OutputMode::Text;
    if (tolerance) {
        c.tolerance = tolerance;
    } else if (envTolerance) {
        double v = 0.0;
        std::size_t used = 0;
        try {
            v = std::stod(*envTolerance, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != envTolerance->size())
            throw UsageError(fmt::format("QCM_TOLERANCE='{}' is not a number", *envTolerance));
        c.tolerance = v;
    }
    if (c.tolerance && !(*c.tolerance >= 0.0)) throw UsageError("tolerance must be non-negative");
    if (c.policy == "fixed" && fock->count("--m2") == 0) throw UsageError("--policy fixed needs --m2");
    return parsed;
}

Section dispatch(const RunConfig& config, std::istream& in, const std::optional<std::string>& envTolerance);

Section runReport(const RunConfig& config, std::istream& in, const std::optional<std::string>& envTolerance) {
    const std::string text = readInput(config.manifest, in);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("manifest: {}", e.what()));
    }
    if (!doc.is_object() || !doc.contains("runs") || !doc["runs"].is_array())
        throw ParseError("manifest must be an object with a \"runs\" array");
    const auto base = std::filesystem::path(config.manifest).parent_path();

    Section s;
    json runs = json::array();
    for (const auto& entry : doc["runs"]) {
        if (!entry.is_array() || entry.empty())
            throw ParseError("each manifest run must be a non-empty array of arguments");
        std::vector<std::string> args;
        for (const auto& a : entry) {
            if (!a.is_string()) throw ParseError("manifest arguments must be strings");
            args.push_back(a.get<std::string>());
        }
        std::vector<std::string> resolved = args;
        for (std::size_t i = 0; i + 1 < resolved.size(); ++i) {
            const auto& flag = resolved[i];
            if ((flag == "--input" || flag == "-i" || flag == "--model") && resolved[i + 1] != "-" &&
                std::filesystem::path(resolved[i + 1]).is_relative())
                resolved[i + 1] = (base / resolved[i + 1]).string();
        }
        Parsed parsed = parseArgs(resolved, envTolerance);
        if (parsed.help) throw UsageError("manifest runs cannot ask for help");
        if (parsed.config.command == "report") throw UsageError("manifest runs cannot nest report");
        if (!parsed.config.plot.empty()) throw UsageError("manifest runs cannot write plots");
        if (config.tolerance && !parsed.config.tolerance) parsed.config.tolerance = config.tolerance;
        const Section sub = dispatch(parsed.config, in, envTolerance);
        std::string line = "qcm";
        for (const auto& a : args) line += " " + a;
        s.text += fmt::format("{}== {} ==\n{}", runs.empty() ? "" : "\n", line, sub.text);
        json j = sub.data;
        j["command"] = parsed.config.command;
        runs.push_back({{"args", args}, {"result", j}});
    }
    s.data["runs"] = runs;
    return s;
}

Section dispatch(const RunConfig& config, std::istream& in, const std::optional<std::string>& envTolerance) {
    if (config.command == "classicality") return runClassicality(config, in);
    if (config.command == "fock-fit") return runFockFit(config, in);
    if (config.command == "chsh") return runChsh(config, in);
    if (config.command == "stats-fit") return runStatsFit(config, in);
    if (config.command == "report") return runReport(config, in, envTolerance);
    throw UsageError(fmt::format("unknown subcommand '{}'", config.command));
}

int execute(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err,
            const std::optional<std::string>& envTolerance) {
    try {
        const Section s = dispatch(config, in, envTolerance);
        if (!config.plot.empty()) {
            if (!s.chart) throw UsageError(fmt::format("{} has nothing to plot", config.command));
            std::ofstream file(config.plot, std::ios::binary);
            if (!file) throw IoError(fmt::format("cannot write '{}'", config.plot));
            file << renderSvg(*s.chart);
            if (!file) throw IoError(fmt::format("cannot write '{}'", config.plot));
        }
        if (config.output == OutputMode::Json) {
            json j = s.data;
            j["command"] = config.command;
            out << j.dump(2) << '\n';
        } else {
            out << s.text;
        }
        return kExitOk;
    } catch (const IoError& e) {
        err << "qcm: " << e.what() << '\n';
        return kExitIo;
    } catch (const UsageError& e) {
        err << "qcm: " << e.what() << "\nRun with --help for more information.\n";
        return kExitValidation;
    } catch (const Error& e) {
        err << "qcm: " << e.what() << '\n';
        return kExitValidation;
    } catch (const json::exception& e) {
        err << "qcm: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace

std::string num(double value) {
    std::string s = fmt::format("{:.4f}", value);
    if (s == "-0.0000") s = "0.0000";
    return s;
}

int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err) {
    return execute(config, in, out, err, std::nullopt);
}

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& envTolerance) {
    Parsed parsed;
    try {
        parsed = parseArgs(args, envTolerance);
    } catch (const UsageError& e) {
        err << "qcm: " << e.what() << "\nRun with --help for more information.\n";
        return kExitValidation;
    }
    if (parsed.help) {
        out << parsed.helpText;
        return kExitOk;
    }
    return execute(parsed.config, in, out, err, envTolerance);
}

}  // namespace qcm::cli
