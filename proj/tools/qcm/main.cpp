#include <cstdlib>
#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    std::optional<std::string> envTolerance;
    if (const char* v = std::getenv("QCM_TOLERANCE")) envTolerance = v;
    const std::vector<std::string> args(argv + 1, argv + argc);
    return qcm::cli::run(args, std::cin, std::cout, std::cerr, envTolerance);
}
