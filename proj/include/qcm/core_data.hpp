#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qcm {

/// One exemplar's membership weights for two concepts, their negations and
/// their combinations. Absent measurements are empty optionals.
struct MembershipRecord {
    std::string exemplar;
    std::string conceptA;
    std::string conceptB;
    double muA = 0.0;
    double muB = 0.0;
    std::optional<double> muAp;
    std::optional<double> muBp;
    std::optional<double> muAandB;
    std::optional<double> muAandBp;
    std::optional<double> muApandB;
    std::optional<double> muApandBp;
    std::optional<double> muAorB;

    bool operator==(const MembershipRecord&) const = default;
};

/// Throws ValidationError naming the exemplar when an invariant fails.
void validate(const MembershipRecord& record);

enum class TableFormat { Csv, Json };

/// Canonical CSV column order used when writing.
inline constexpr std::array<std::string_view, 12> kMembershipColumns = {
    "exemplar", "conceptA", "conceptB", "muA",      "muB",       "muAp",
    "muBp",     "muAandB",  "muAandBp", "muApandB", "muApandBp", "muAorB"};

std::vector<MembershipRecord> parseMembershipTable(std::istream& source, TableFormat format);
std::vector<MembershipRecord> parseMembershipTable(std::string_view text, TableFormat format);

std::string writeMembershipCsv(const std::vector<MembershipRecord>& records);
nlohmann::json toJson(const MembershipRecord& record);
nlohmann::json toJson(const std::vector<MembershipRecord>& records);

// ---------------------------------------------------------------------------
// Coincidence measurements

/// The four joint measurements of a Bell-type test on a concept combination.
enum class Block { AB = 0, ABp = 1, ApB = 2, ApBp = 3 };

inline constexpr std::array<Block, 4> kBlocks = {Block::AB, Block::ABp, Block::ApB, Block::ApBp};

std::string_view blockName(Block block);  // "AB", "AB'", "A'B", "A'B'"
Block blockFromName(std::string_view name);

/// One joint outcome: the left label belongs to the A/A' concept, the right
/// label to the B/B' concept.
struct Outcome {
    std::string left;
    std::string right;
    int sign = +1;
    double probability = 0.0;

    bool operator==(const Outcome&) const = default;
};

inline constexpr double kBlockSumTolerance = 1e-3;

class CoincidenceTable {
public:
    using BlockOutcomes = std::array<Outcome, 4>;

    /// Validates every block: probabilities in [0,1], sum within
    /// kBlockSumTolerance of 1, two +1 and two -1 signs, and outcomes forming
    /// the product of two left labels with two right labels.
    explicit CoincidenceTable(std::array<BlockOutcomes, 4> blocks);

    const BlockOutcomes& block(Block b) const { return blocks_[static_cast<std::size_t>(b)]; }
    const std::array<BlockOutcomes, 4>& blocks() const { return blocks_; }

    bool operator==(const CoincidenceTable&) const = default;

private:
    std::array<BlockOutcomes, 4> blocks_;
};

CoincidenceTable parseCoincidence(std::istream& source);
CoincidenceTable parseCoincidence(std::string_view text);
CoincidenceTable coincidenceFromJson(const nlohmann::json& doc);
nlohmann::json toJson(const CoincidenceTable& table);

// ---------------------------------------------------------------------------
// State-context-property store

/// Finite SCoP system: states, contexts, properties, transition
/// probabilities mu(q, e, p) and applicability weights nu(p, a).
class ScopModel {
public:
    struct Spec {
        std::vector<std::string> states;
        std::string groundState;
        std::vector<std::string> contexts;
        std::vector<std::string> properties;
        /// (from, context) -> {to -> probability}; targets not listed have probability 0.
        std::map<std::pair<std::string, std::string>, std::map<std::string, double>> transitions;
        /// (state, property) -> weight
        std::map<std::pair<std::string, std::string>, double> applicability;
    };

    explicit ScopModel(Spec spec);

    const std::vector<std::string>& states() const { return spec_.states; }
    const std::vector<std::string>& contexts() const { return spec_.contexts; }
    const std::vector<std::string>& properties() const { return spec_.properties; }
    const std::string& groundState() const { return spec_.groundState; }

    /// Distribution over every state reached from `from` under `context`.
    std::map<std::string, double> transition(const std::string& from, const std::string& context) const;

    double applicability(const std::string& state, const std::string& property) const;

private:
    Spec spec_;
};

inline constexpr double kScopSumTolerance = 1e-9;

ScopModel parseScop(std::string_view text);
ScopModel scopFromJson(const nlohmann::json& doc);
nlohmann::json toJson(const ScopModel& model);

// ---------------------------------------------------------------------------
// Occupation-count datasets

/// Empirical distribution over the N+1 splits of N instances between two
/// states; observed[n] is the relative frequency of "n in the first state".
struct CountDataset {
    std::string category;
    int N = 0;
    std::pair<std::string, std::string> stateLabels;
    std::vector<double> observed;

    bool operator==(const CountDataset&) const = default;
};

inline constexpr double kCountSumTolerance = 1e-6;

void validate(const CountDataset& data);

/// Accepts a single dataset object or an array of them.
std::vector<CountDataset> parseCountDatasets(std::string_view text);
nlohmann::json toJson(const CountDataset& data);

}  // namespace qcm
