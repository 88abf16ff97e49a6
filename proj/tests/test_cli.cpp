#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

using qcm::cli::run;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args, const std::string& stdinText = "",
              const std::optional<std::string>& env = std::nullopt) {
    std::istringstream in(stdinText);
    std::ostringstream out, err;
    const int code = run(args, in, out, err, env);
    return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(QCM_DATA_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("number rendering") {
    CHECK(qcm::cli::num(2.41966) == "2.4197");
    CHECK(qcm::cli::num(-0.00001) == "0.0000");
    CHECK(qcm::cli::num(-0.95) == "-0.9500");
}

TEST_CASE("chsh on the reference table") {
    const auto r = invoke({"chsh", "--input", data("table1.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("CHSH = 2.421") != std::string::npos);
    CHECK(r.out.find("classical bound violated") != std::string::npos);
}

TEST_CASE("chsh with the reference model") {
    const auto r = invoke({"chsh", "--input", data("table1.json"), "--model", data("animal_acts_model.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("nonlocal non-marginal box modeling 1") != std::string::npos);
}

TEST_CASE("classicality on Goldfish") {
    const auto r = invoke({"classicality", "--input", data("goldfish.csv")});
    CHECK(r.code == 0);
    CHECK(r.out.find("-0.9500") != std::string::npos);
    const auto j = invoke({"classicality", "--input", data("goldfish.csv"), "--output", "json"});
    CHECK(j.code == 0);
    const auto doc = nlohmann::json::parse(j.out);
    CHECK(doc["command"] == "classicality");
}

TEST_CASE("stats-fit on uniform data") {
    const auto r = invoke({"stats-fit", "--input", data("uniform11.json"), "--output", "json"});
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc.dump().find("\"BE\"") != std::string::npos);
    const auto t = invoke({"stats-fit", "--input", data("uniform11.json")});
    CHECK(t.out.find("0.5000") != std::string::npos);
}

TEST_CASE("output is byte-stable across runs") {
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"classicality", "--input", data("negation_mix.csv")},
             {"fock-fit", "--input", data("combinations.csv")},
             {"fock-fit", "--input", data("goldfish.csv"), "--mode", "general"},
             {"stats-fit", "--input", data("planted.json"), "--output", "json"}}) {
        const auto a = invoke(args), b = invoke(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("stdin input") {
    const auto r = invoke({"classicality", "--input", "-", "--format", "csv"}, slurp(data("goldfish.csv")));
    CHECK(r.code == 0);
    CHECK(r.out == invoke({"classicality", "--input", data("goldfish.csv")}).out);
}

TEST_CASE("exit codes") {
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"frobnicate"}).code == 1);
    CHECK(invoke({"chsh", "--bogus"}).code == 1);
    CHECK(invoke({"chsh", "--input", "/nonexistent/table.json"}).code == 2);
    const auto bad = invoke({"classicality", "--input", "-", "--format", "csv"}, "exemplar,muA\nx,banana\n");
    CHECK(bad.code == 1);
    CHECK_FALSE(bad.err.empty());
    CHECK(invoke({"chsh", "--help"}).code == 0);
}

TEST_CASE("tolerance precedence") {
    const auto args = std::vector<std::string>{"chsh", "--input", data("table1.json"), "--output", "json"};
    auto tolOf = [](const Result& r) { return nlohmann::json::parse(r.out)["tolerance"].get<double>(); };
    CHECK(tolOf(invoke(args)) == 0.01);
    CHECK(tolOf(invoke(args, "", "0.5")) == 0.5);
    auto withFlag = args;
    withFlag.insert(withFlag.end(), {"--tolerance", "0.2"});
    CHECK(tolOf(invoke(withFlag, "", "0.5")) == 0.2);
    CHECK(invoke(args, "", "abc").code == 1);
    CHECK(invoke(args, "", "-1").code == 1);
}

TEST_CASE("plot output") {
    const auto path = std::filesystem::temp_directory_path() / "qcm_test_plot.svg";
    std::filesystem::remove(path);
    const auto r = invoke({"stats-fit", "--input", data("uniform11.json"), "--plot", path.string()});
    CHECK(r.code == 0);
    const auto svg = slurp(path.string());
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("report manifest") {
    const auto r = invoke({"report", "--manifest", data("manifest.json")});
    CHECK(r.code == 0);
    CHECK(r.out.find("CHSH = 2.421") != std::string::npos);
    CHECK(r.out.find("-0.9500") != std::string::npos);
    CHECK(invoke({"report", "--manifest", "/nonexistent.json"}).code == 2);
}
