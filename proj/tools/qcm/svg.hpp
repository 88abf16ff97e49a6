#pragma once

#include <string>
#include <vector>

namespace qcm::cli {

struct Series {
    std::string name;
    std::vector<double> values;
    bool line = false;  ///< polyline instead of bars
};

/// Static grouped bar / line chart over named categories.
struct Chart {
    std::string title;
    std::vector<std::string> categories;
    std::vector<Series> series;
};

std::string renderSvg(const Chart& chart);

}  // namespace qcm::cli
