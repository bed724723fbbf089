#pragma once

#include <string>
#include <vector>

namespace ldnn {

struct SvgSeries {
  std::vector<double> t;
  std::vector<double> value;
};

// Self-contained SVG: predicted curve as a line, empirical medians as plus
// markers, interquartile range as a shaded band, log-scale y axis.
std::string render_comparison_svg(const std::string& title, const std::string& y_label,
                                  const SvgSeries& predicted, const SvgSeries& median,
                                  const SvgSeries& p25, const SvgSeries& p75);

void write_comparison_svg(const std::string& path, const std::string& title,
                          const std::string& y_label, const SvgSeries& predicted,
                          const SvgSeries& median, const SvgSeries& p25, const SvgSeries& p75);

}  // namespace ldnn
