#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aed {

struct LineSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

// Minimal static line chart; axes span the data range (y from 0).
void write_line_chart(std::ostream& out, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<LineSeries>& series);

}  // namespace aed
