#include "ldnn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ldnn/csv.hpp"

namespace ldnn {
namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 48.0, kBottom = 56.0;

struct Axes {
  double t_min, t_max;
  double log_min, log_max;

  double x(double t) const {
    const double span = std::max(t_max - t_min, 1e-12);
    return kLeft + (t - t_min) / span * (kWidth - kLeft - kRight);
  }
  double y(double value) const {
    const double lv = std::log10(std::max(value, 1e-300));
    const double span = std::max(log_max - log_min, 1e-12);
    return kHeight - kBottom - (lv - log_min) / span * (kHeight - kTop - kBottom);
  }
};

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

void collect(const SvgSeries& s, double& t_lo, double& t_hi, double& v_lo, double& v_hi) {
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    t_lo = std::min(t_lo, s.t[i]);
    t_hi = std::max(t_hi, s.t[i]);
    if (s.value[i] > 0.0 && std::isfinite(s.value[i])) {
      v_lo = std::min(v_lo, s.value[i]);
      v_hi = std::max(v_hi, s.value[i]);
    }
  }
}

}  // namespace

std::string render_comparison_svg(const std::string& title, const std::string& y_label,
                                  const SvgSeries& predicted, const SvgSeries& median,
                                  const SvgSeries& p25, const SvgSeries& p75) {
  for (const SvgSeries* s : {&predicted, &median, &p25, &p75}) {
    if (s->t.size() != s->value.size()) throw std::invalid_argument("svg series length mismatch");
  }

  double t_lo = 1e300, t_hi = -1e300, v_lo = 1e300, v_hi = -1e300;
  collect(predicted, t_lo, t_hi, v_lo, v_hi);
  collect(median, t_lo, t_hi, v_lo, v_hi);
  collect(p25, t_lo, t_hi, v_lo, v_hi);
  collect(p75, t_lo, t_hi, v_lo, v_hi);
  if (t_lo > t_hi) {  // nothing to draw; keep a sane frame
    t_lo = 0.0;
    t_hi = 1.0;
  }
  if (v_lo > v_hi) {
    v_lo = 1e-3;
    v_hi = 1.0;
  }

  Axes ax;
  ax.t_min = t_lo;
  ax.t_max = std::max(t_hi, t_lo + 1.0);
  ax.log_min = std::floor(std::log10(v_lo) - 0.05);
  ax.log_max = std::ceil(std::log10(v_hi) + 0.05);

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\""
     << " font-size=\"15\">" << title << "</text>\n";

  // frame and y decade grid
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
     << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int e = static_cast<int>(ax.log_min); e <= static_cast<int>(ax.log_max); ++e) {
    const double yy = ax.y(std::pow(10.0, e));
    os << "<line x1=\"" << kLeft << "\" y1=\"" << yy << "\" x2=\"" << kWidth - kRight << "\" y2=\""
       << yy << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << kLeft - 8 << "\" y=\"" << yy + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e
       << "</text>\n";
  }
  const int t_first = static_cast<int>(std::ceil(ax.t_min));
  const int t_last = static_cast<int>(std::floor(ax.t_max));
  for (int t = t_first; t <= t_last; ++t) {
    const double xx = ax.x(t);
    os << "<line x1=\"" << xx << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << xx << "\" y2=\""
       << kHeight - kBottom + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << xx << "\" y=\"" << kHeight - kBottom + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << t
       << "</text>\n";
  }
  os << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 14
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration</text>\n";
  os << "<text x=\"18\" y=\"" << (kTop + kHeight - kBottom) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 "
     << (kTop + kHeight - kBottom) / 2 << ")\">" << y_label << "</text>\n";

  // interquartile band
  if (!p25.t.empty() && p25.t.size() == p75.t.size()) {
    os << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.45\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < p75.t.size(); ++i) {
      os << fmt(ax.x(p75.t[i])) << "," << fmt(ax.y(p75.value[i])) << " ";
    }
    for (std::size_t i = p25.t.size(); i-- > 0;) {
      os << fmt(ax.x(p25.t[i])) << "," << fmt(ax.y(p25.value[i])) << " ";
    }
    os << "\"/>\n";
  }

  // predicted curve
  if (!predicted.t.empty()) {
    os << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < predicted.t.size(); ++i) {
      os << fmt(ax.x(predicted.t[i])) << "," << fmt(ax.y(predicted.value[i])) << " ";
    }
    os << "\"/>\n";
  }

  // empirical medians as plus markers
  for (std::size_t i = 0; i < median.t.size(); ++i) {
    const double xx = ax.x(median.t[i]);
    const double yy = ax.y(median.value[i]);
    os << "<line x1=\"" << xx - 5 << "\" y1=\"" << yy << "\" x2=\"" << xx + 5 << "\" y2=\"" << yy
       << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    os << "<line x1=\"" << xx << "\" y1=\"" << yy - 5 << "\" x2=\"" << xx << "\" y2=\"" << yy + 5
       << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  }

  // legend
  const double lx = kWidth - kRight - 220, ly = kTop + 10;
  os << "<line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 28 << "\" y2=\"" << ly
     << "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 34 << "\" y=\"" << ly + 4
     << "\" font-family=\"sans-serif\" font-size=\"12\">predicted</text>\n";
  os << "<line x1=\"" << lx + 9 << "\" y1=\"" << ly + 18 << "\" x2=\"" << lx + 19 << "\" y2=\""
     << ly + 18 << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  os << "<line x1=\"" << lx + 14 << "\" y1=\"" << ly + 13 << "\" x2=\"" << lx + 14 << "\" y2=\""
     << ly + 23 << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  os << "<text x=\"" << lx + 34 << "\" y=\"" << ly + 22
     << "\" font-family=\"sans-serif\" font-size=\"12\">simulated median</text>\n";
  os << "<rect x=\"" << lx + 4 << "\" y=\"" << ly + 30 << "\" width=\"20\" height=\"10\""
     << " fill=\"#9ecae1\" fill-opacity=\"0.45\"/>\n";
  os << "<text x=\"" << lx + 34 << "\" y=\"" << ly + 40
     << "\" font-family=\"sans-serif\" font-size=\"12\">interquartile range</text>\n";

  os << "</svg>\n";
  return os.str();
}

void write_comparison_svg(const std::string& path, const std::string& title,
                          const std::string& y_label, const SvgSeries& predicted,
                          const SvgSeries& median, const SvgSeries& p25, const SvgSeries& p75) {
  atomic_write_file(path, render_comparison_svg(title, y_label, predicted, median, p25, p75));
}

}  // namespace ldnn
