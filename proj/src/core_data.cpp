#include "qcm/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qcm/errors.hpp"

namespace qcm {

namespace {

using nlohmann::json;

bool inUnit(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

using OptionalField = std::optional<double> MembershipRecord::*;

struct NamedOptional {
    std::string_view name;
    OptionalField member;
};

constexpr std::array<NamedOptional, 7> kOptionalFields = {{
    {"muAp", &MembershipRecord::muAp},
    {"muBp", &MembershipRecord::muBp},
    {"muAandB", &MembershipRecord::muAandB},
    {"muAandBp", &MembershipRecord::muAandBp},
    {"muApandB", &MembershipRecord::muApandB},
    {"muApandBp", &MembershipRecord::muApandBp},
    {"muAorB", &MembershipRecord::muAorB},
}};

std::string formatExact(double v) { return fmt::format("{}", v); }

// Splits one CSV line. Quoted fields may contain commas and doubled quotes;
// embedded newlines are not supported.
std::vector<std::string> splitCsvLine(const std::string& line, std::size_t row) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool wasQuoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            if (!current.empty() || wasQuoted)
                throw ParseError(fmt::format("row {}: stray quote in field {}", row, fields.size() + 1));
            quoted = true;
            wasQuoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
            wasQuoted = false;
        } else {
            current.push_back(c);
        }
    }
    if (quoted) throw ParseError(fmt::format("row {}: unterminated quoted field", row));
    fields.push_back(std::move(current));
    return fields;
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

double parseNumber(const std::string& cell, std::size_t row, std::string_view column) {
    const std::string t = trim(cell);
    double value = 0.0;
    const auto* begin = t.data();
    const auto* end = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (t.empty() || ec != std::errc() || ptr != end)
        throw ParseError(fmt::format("row {}, column {}: '{}' is not a number", row, column, t));
    return value;
}

std::string csvQuote(const std::string& s) {
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<MembershipRecord> parseCsv(std::istream& in) {
    std::vector<MembershipRecord> records;
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (header.empty()) {
            if (row == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
            for (auto& h : splitCsvLine(line, row)) header.push_back(trim(h));
            std::set<std::string> seen;
            for (const auto& h : header) {
                if (std::find(kMembershipColumns.begin(), kMembershipColumns.end(), h) == kMembershipColumns.end())
                    throw ParseError(fmt::format("row {}: unknown column '{}'", row, h));
                if (!seen.insert(h).second) throw ParseError(fmt::format("row {}: duplicate column '{}'", row, h));
            }
            for (std::string_view required : {"exemplar", "muA", "muB"})
                if (!seen.count(std::string(required)))
                    throw ParseError(fmt::format("row {}: header lacks required column '{}'", row, required));
            continue;
        }
        const auto fields = splitCsvLine(line, row);
        if (fields.size() != header.size())
            throw ParseError(
                fmt::format("row {}: expected {} fields, found {}", row, header.size(), fields.size()));
        MembershipRecord rec;
        for (std::size_t c = 0; c < header.size(); ++c) {
            const std::string& col = header[c];
            const std::string& cell = fields[c];
            if (col == "exemplar") {
                rec.exemplar = trim(cell);
            } else if (col == "conceptA") {
                rec.conceptA = trim(cell);
            } else if (col == "conceptB") {
                rec.conceptB = trim(cell);
            } else if (col == "muA" || col == "muB") {
                if (trim(cell).empty())
                    throw ParseError(fmt::format("row {}, column {}: value required", row, col));
                (col == "muA" ? rec.muA : rec.muB) = parseNumber(cell, row, col);
            } else {
                if (trim(cell).empty()) continue;
                for (const auto& f : kOptionalFields)
                    if (f.name == col) rec.*(f.member) = parseNumber(cell, row, col);
            }
        }
        validate(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<MembershipRecord> parseJsonRecords(const json& doc) {
    if (!doc.is_array()) throw ParseError("membership JSON must be an array of objects");
    std::vector<MembershipRecord> records;
    std::size_t row = 0;
    for (const auto& obj : doc) {
        ++row;
        if (!obj.is_object()) throw ParseError(fmt::format("row {}: expected an object", row));
        for (const auto& [key, _] : obj.items())
            if (std::find(kMembershipColumns.begin(), kMembershipColumns.end(), key) == kMembershipColumns.end())
                throw ParseError(fmt::format("row {}: unknown column '{}'", row, key));
        MembershipRecord rec;
        auto text = [&](std::string_view key) -> std::string {
            const auto it = obj.find(std::string(key));
            if (it == obj.end() || it->is_null()) return {};
            if (!it->is_string()) throw ParseError(fmt::format("row {}, column {}: expected a string", row, key));
            return it->get<std::string>();
        };
        auto number = [&](std::string_view key) -> std::optional<double> {
            const auto it = obj.find(std::string(key));
            if (it == obj.end() || it->is_null()) return std::nullopt;
            if (!it->is_number()) throw ParseError(fmt::format("row {}, column {}: expected a number", row, key));
            return it->get<double>();
        };
        rec.exemplar = text("exemplar");
        rec.conceptA = text("conceptA");
        rec.conceptB = text("conceptB");
        const auto a = number("muA");
        const auto b = number("muB");
        if (!a) throw ParseError(fmt::format("row {}, column muA: value required", row));
        if (!b) throw ParseError(fmt::format("row {}, column muB: value required", row));
        rec.muA = *a;
        rec.muB = *b;
        for (const auto& f : kOptionalFields) rec.*(f.member) = number(f.name);
        validate(rec);
        records.push_back(std::move(rec));
    }
    return records;
}

json parseJsonText(std::string_view text, std::string_view what) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(fmt::format("{}: {}", what, e.what()));
    }
}

std::string readAll(std::istream& in) {
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

void validate(const MembershipRecord& r) {
    auto check = [&](std::string_view name, double v) {
        if (!inUnit(v))
            throw ValidationError(
                fmt::format("exemplar '{}': {} = {} lies outside [0,1]", r.exemplar, name, formatExact(v)));
    };
    check("muA", r.muA);
    check("muB", r.muB);
    for (const auto& f : kOptionalFields)
        if (const auto& v = r.*(f.member)) check(f.name, *v);
    if (!r.muAandB && !r.muAandBp && !r.muApandB && !r.muApandBp && !r.muAorB)
        throw ValidationError(fmt::format("exemplar '{}': no conjunction or disjunction weight present", r.exemplar));
}

std::vector<MembershipRecord> parseMembershipTable(std::istream& source, TableFormat format) {
    if (format == TableFormat::Csv) return parseCsv(source);
    return parseMembershipTable(readAll(source), TableFormat::Json);
}

std::vector<MembershipRecord> parseMembershipTable(std::string_view text, TableFormat format) {
    if (format == TableFormat::Csv) {
        std::istringstream in{std::string(text)};
        return parseCsv(in);
    }
    if (trim(text).empty()) return {};
    return parseJsonRecords(parseJsonText(text, "membership JSON"));
}

std::string writeMembershipCsv(const std::vector<MembershipRecord>& records) {
    std::string out;
    for (std::size_t i = 0; i < kMembershipColumns.size(); ++i) {
        if (i) out += ',';
        out += kMembershipColumns[i];
    }
    out += '\n';
    for (const auto& r : records) {
        out += csvQuote(r.exemplar) + ',' + csvQuote(r.conceptA) + ',' + csvQuote(r.conceptB) + ',' +
               formatExact(r.muA) + ',' + formatExact(r.muB);
        for (const auto& f : kOptionalFields) {
            out += ',';
            if (const auto& v = r.*(f.member)) out += formatExact(*v);
        }
        out += '\n';
    }
    return out;
}

json toJson(const MembershipRecord& r) {
    json j;
    j["exemplar"] = r.exemplar;
    if (!r.conceptA.empty()) j["conceptA"] = r.conceptA;
    if (!r.conceptB.empty()) j["conceptB"] = r.conceptB;
    j["muA"] = r.muA;
    j["muB"] = r.muB;
    for (const auto& f : kOptionalFields)
        if (const auto& v = r.*(f.member)) j[std::string(f.name)] = *v;
    return j;
}

json toJson(const std::vector<MembershipRecord>& records) {
    json arr = json::array();
    for (const auto& r : records) arr.push_back(toJson(r));
    return arr;
}

// ---------------------------------------------------------------------------

std::string_view blockName(Block block) {
    switch (block) {
        case Block::AB: return "AB";
        case Block::ABp: return "AB'";
        case Block::ApB: return "A'B";
        case Block::ApBp: return "A'B'";
    }
    return "?";
}

Block blockFromName(std::string_view name) {
    for (Block b : kBlocks)
        if (blockName(b) == name) return b;
    throw SchemaError(fmt::format("unknown measurement block '{}'", name));
}

CoincidenceTable::CoincidenceTable(std::array<BlockOutcomes, 4> blocks) : blocks_(std::move(blocks)) {
    for (Block b : kBlocks) {
        const auto& outcomes = block(b);
        const auto name = blockName(b);
        double sum = 0.0;
        int plus = 0;
        std::set<std::string> lefts, rights;
        std::set<std::pair<std::string, std::string>> cells;
        for (const auto& o : outcomes) {
            if (!inUnit(o.probability))
                throw ValidationError(fmt::format("block {}: probability of ({}, {}) = {} lies outside [0,1]", name,
                                                  o.left, o.right, formatExact(o.probability)));
            if (o.sign != 1 && o.sign != -1)
                throw ValidationError(fmt::format("block {}: sign of ({}, {}) must be +1 or -1", name, o.left, o.right));
            sum += o.probability;
            plus += o.sign > 0;
            lefts.insert(o.left);
            rights.insert(o.right);
            cells.emplace(o.left, o.right);
        }
        // The slack absorbs binary rounding of sums of 3-decimal values.
        if (std::abs(sum - 1.0) > kBlockSumTolerance + 1e-12)
            throw ValidationError(fmt::format("block {}: probabilities sum to {:.6f}, not 1", name, sum));
        if (plus != 2)
            throw ValidationError(fmt::format("block {}: expected two +1 and two -1 outcomes, found {} positive", name,
                                              plus));
        if (lefts.size() != 2 || rights.size() != 2 || cells.size() != 4)
            throw SchemaError(fmt::format("block {}: outcomes must pair two left labels with two right labels", name));
    }
}

CoincidenceTable coincidenceFromJson(const json& doc) {
    if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_object())
        throw ParseError("coincidence JSON must be an object with a 'blocks' object");
    const auto& blocks = doc["blocks"];
    std::array<CoincidenceTable::BlockOutcomes, 4> out{};
    std::set<Block> seen;
    for (const auto& [key, entries] : blocks.items()) {
        const Block b = blockFromName(key);
        seen.insert(b);
        if (!entries.is_array() || entries.size() != 4)
            throw ParseError(fmt::format("block {}: expected an array of four outcomes", key));
        for (std::size_t i = 0; i < 4; ++i) {
            const auto& e = entries[i];
            try {
                auto& o = out[static_cast<std::size_t>(b)][i];
                o.left = e.at("a").get<std::string>();
                o.right = e.at("b").get<std::string>();
                o.sign = e.at("sign").get<int>();
                o.probability = e.at("p").get<double>();
            } catch (const json::exception& ex) {
                throw ParseError(fmt::format("block {}, outcome {}: {}", key, i + 1, ex.what()));
            }
        }
    }
    if (seen.size() != 4) throw ParseError("coincidence JSON must contain blocks AB, AB', A'B and A'B'");
    return CoincidenceTable(out);
}

CoincidenceTable parseCoincidence(std::string_view text) {
    return coincidenceFromJson(parseJsonText(text, "coincidence JSON"));
}

CoincidenceTable parseCoincidence(std::istream& source) { return parseCoincidence(readAll(source)); }

json toJson(const CoincidenceTable& table) {
    json blocks = json::object();
    for (Block b : kBlocks) {
        json arr = json::array();
        for (const auto& o : table.block(b))
            arr.push_back({{"a", o.left}, {"b", o.right}, {"sign", o.sign}, {"p", o.probability}});
        blocks[std::string(blockName(b))] = arr;
    }
    return json{{"blocks", blocks}};
}

// ---------------------------------------------------------------------------

ScopModel::ScopModel(Spec spec) : spec_(std::move(spec)) {
    const std::set<std::string> states(spec_.states.begin(), spec_.states.end());
    const std::set<std::string> contexts(spec_.contexts.begin(), spec_.contexts.end());
    const std::set<std::string> properties(spec_.properties.begin(), spec_.properties.end());
    if (states.size() != spec_.states.size()) throw ValidationError("SCoP: duplicate state label");
    if (!states.count(spec_.groundState))
        throw ValidationError(fmt::format("SCoP: ground state '{}' is not a state", spec_.groundState));
    for (const auto& [key, dist] : spec_.transitions) {
        const auto& [from, ctx] = key;
        if (!states.count(from)) throw ValidationError(fmt::format("SCoP: unknown source state '{}'", from));
        if (!contexts.count(ctx)) throw ValidationError(fmt::format("SCoP: unknown context '{}'", ctx));
        double sum = 0.0;
        for (const auto& [to, p] : dist) {
            if (!states.count(to)) throw ValidationError(fmt::format("SCoP: unknown target state '{}'", to));
            if (!inUnit(p))
                throw ValidationError(fmt::format("SCoP: mu({}, {}, {}) = {} lies outside [0,1]", to, ctx, from,
                                                  formatExact(p)));
            sum += p;
        }
        if (std::abs(sum - 1.0) > kScopSumTolerance)
            throw ValidationError(
                fmt::format("SCoP: transitions from '{}' under '{}' sum to {}, not 1", from, ctx, formatExact(sum)));
    }
    for (const auto& [key, w] : spec_.applicability) {
        if (!states.count(key.first)) throw ValidationError(fmt::format("SCoP: unknown state '{}'", key.first));
        if (!properties.count(key.second))
            throw ValidationError(fmt::format("SCoP: unknown property '{}'", key.second));
        if (!inUnit(w)) throw ValidationError(fmt::format("SCoP: nu({}, {}) lies outside [0,1]", key.first, key.second));
    }
}

std::map<std::string, double> ScopModel::transition(const std::string& from, const std::string& context) const {
    if (std::find(spec_.states.begin(), spec_.states.end(), from) == spec_.states.end())
        throw LookupError(fmt::format("SCoP: unknown state '{}'", from));
    if (std::find(spec_.contexts.begin(), spec_.contexts.end(), context) == spec_.contexts.end())
        throw LookupError(fmt::format("SCoP: unknown context '{}'", context));
    const auto it = spec_.transitions.find({from, context});
    if (it == spec_.transitions.end())
        throw LookupError(fmt::format("SCoP: no transitions stored for state '{}' under '{}'", from, context));
    std::map<std::string, double> out;
    for (const auto& s : spec_.states) out[s] = 0.0;
    for (const auto& [to, p] : it->second) out[to] = p;
    return out;
}

double ScopModel::applicability(const std::string& state, const std::string& property) const {
    const auto it = spec_.applicability.find({state, property});
    if (it == spec_.applicability.end())
        throw LookupError(fmt::format("SCoP: no applicability stored for ({}, {})", state, property));
    return it->second;
}

ScopModel scopFromJson(const json& doc) {
    ScopModel::Spec spec;
    try {
        spec.states = doc.at("states").get<std::vector<std::string>>();
        spec.groundState = doc.at("groundState").get<std::string>();
        spec.contexts = doc.at("contexts").get<std::vector<std::string>>();
        spec.properties = doc.value("properties", std::vector<std::string>{});
        for (const auto& t : doc.value("transitions", json::array())) {
            auto& dist = spec.transitions[{t.at("from").get<std::string>(), t.at("context").get<std::string>()}];
            for (const auto& [to, p] : t.at("to").items()) dist[to] = p.get<double>();
        }
        for (const auto& a : doc.value("applicability", json::array()))
            spec.applicability[{a.at("state").get<std::string>(), a.at("property").get<std::string>()}] =
                a.at("weight").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(fmt::format("SCoP JSON: {}", e.what()));
    }
    return ScopModel(std::move(spec));
}

ScopModel parseScop(std::string_view text) { return scopFromJson(parseJsonText(text, "SCoP JSON")); }

json toJson(const ScopModel& model) {
    json j;
    j["states"] = model.states();
    j["groundState"] = model.groundState();
    j["contexts"] = model.contexts();
    j["properties"] = model.properties();
    json transitions = json::array();
    for (const auto& from : model.states())
        for (const auto& ctx : model.contexts()) {
            std::map<std::string, double> dist;
            try {
                dist = model.transition(from, ctx);
            } catch (const LookupError&) {
                continue;
            }
            json to = json::object();
            for (const auto& [q, p] : dist)
                if (p != 0.0) to[q] = p;
            transitions.push_back({{"from", from}, {"context", ctx}, {"to", to}});
        }
    j["transitions"] = transitions;
    json app = json::array();
    for (const auto& s : model.states())
        for (const auto& a : model.properties()) {
            try {
                app.push_back({{"state", s}, {"property", a}, {"weight", model.applicability(s, a)}});
            } catch (const LookupError&) {
            }
        }
    j["applicability"] = app;
    return j;
}

// ---------------------------------------------------------------------------

void validate(const CountDataset& d) {
    if (d.N < 1) throw ValidationError(fmt::format("dataset '{}': N must be at least 1", d.category));
    if (d.observed.size() != static_cast<std::size_t>(d.N) + 1)
        throw ValidationError(fmt::format("dataset '{}': expected {} frequencies for N = {}, found {}", d.category,
                                          d.N + 1, d.N, d.observed.size()));
    double sum = 0.0;
    for (std::size_t n = 0; n < d.observed.size(); ++n) {
        const double f = d.observed[n];
        if (!std::isfinite(f) || f < 0.0)
            throw ValidationError(fmt::format("dataset '{}': frequency at n = {} is negative", d.category, n));
        sum += f;
    }
    if (std::abs(sum - 1.0) > kCountSumTolerance)
        throw ValidationError(fmt::format("dataset '{}': frequencies sum to {}, not 1", d.category, formatExact(sum)));
}

std::vector<CountDataset> parseCountDatasets(std::string_view text) {
    const json doc = parseJsonText(text, "count dataset JSON");
    std::vector<CountDataset> out;
    auto one = [&](const json& j) {
        CountDataset d;
        try {
            d.category = j.at("category").get<std::string>();
            d.N = j.at("N").get<int>();
            const auto labels = j.value("labels", std::vector<std::string>{});
            if (labels.size() == 2) d.stateLabels = {labels[0], labels[1]};
            else if (!labels.empty()) throw ParseError(fmt::format("dataset '{}': labels must be a pair", d.category));
            d.observed = j.at("frequencies").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw ParseError(fmt::format("count dataset JSON: {}", e.what()));
        }
        validate(d);
        out.push_back(std::move(d));
    };
    if (doc.is_array()) {
        for (const auto& j : doc) one(j);
    } else {
        one(doc);
    }
    return out;
}

json toJson(const CountDataset& d) {
    return json{{"category", d.category},
                {"N", d.N},
                {"labels", {d.stateLabels.first, d.stateLabels.second}},
                {"frequencies", d.observed}};
}

}  // namespace qcm
