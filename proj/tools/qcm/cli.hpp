#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qcm::cli {

enum class OutputMode { Text, Json };

struct RunConfig {
    std::string command;
    std::string input;
    std::string model;
    std::string manifest;
    std::optional<std::string> format;  ///< "csv" or "json"; inferred from the extension otherwise
    std::optional<double> tolerance;
    std::uint64_t seed = 0;
    OutputMode output = OutputMode::Text;
    std::string plot;
    std::string mode = "auto";  ///< fock-fit: auto, two-sector or general
    std::string policy = "minimal";
    double fixedM2 = 0.0;
    int starts = 16;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

/// Parses argv-style arguments (without the program name) and runs one
/// subcommand. `envTolerance` is the QCM_TOLERANCE value, if set.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err,
        const std::optional<std::string>& envTolerance = std::nullopt);

/// Runs an already parsed configuration.
int run(const RunConfig& config, std::istream& in, std::ostream& out, std::ostream& err);

/// Fixed 4-decimal rendering; negative zero prints as 0.0000.
std::string num(double value);

}  // namespace qcm::cli
