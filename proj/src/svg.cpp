#include "kfadmm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace kfadmm {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool ok() const { return lo <= hi; }
};

}  // namespace

const std::vector<std::string>& svg_palette() {
  static const std::vector<std::string> p = {"#1f6fb2", "#d1495b", "#66a182",
                                             "#8d6a9f", "#edae49", "#30638e"};
  return p;
}

std::string SvgChart::render() const {
  const double ml = 70, mr = 20, mt = 36, mb = 48;
  const double pw = width - ml - mr, ph = height - mt - mb;

  Range rx, ry;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("svg: series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double yv = log_y ? (s.y[i] > 0 ? std::log10(s.y[i]) : std::nan("")) : s.y[i];
      if (std::isfinite(s.x[i]) && std::isfinite(yv)) {
        rx.add(s.x[i]);
        ry.add(yv);
      }
    }
  }
  if (!rx.ok()) {
    rx = {0, 1};
    ry = {0, 1};
  }
  if (rx.hi == rx.lo) rx.hi = rx.lo + 1;
  if (ry.hi == ry.lo) {
    ry.lo -= 0.5;
    ry.hi += 0.5;
  }
  const double pad = 0.04 * (ry.hi - ry.lo);
  ry.lo -= pad;
  ry.hi += pad;

  auto px = [&](double v) { return ml + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
  auto py = [&](double v) { return mt + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";

  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / nticks;
    const double fy = ry.lo + (ry.hi - ry.lo) * i / nticks;
    out << "<line x1=\"" << px(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << px(fx) << "\" y2=\""
        << mt + ph + 5 << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << px(fx) << "\" y=\"" << mt + ph + 18
        << "\" text-anchor=\"middle\" font-size=\"11\" font-family=\"sans-serif\">" << fmt(fx)
        << "</text>\n";
    const std::string ylab = log_y ? ("1e" + fmt(fy)) : fmt(fy);
    out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py(fy) << "\" x2=\"" << ml << "\" y2=\""
        << py(fy) << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
        << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << ylab
        << "</text>\n";
  }
  out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << x_label
      << "</text>\n"
      << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
         "transform=\"rotate(-90 16 "
      << mt + ph / 2 << ")\">" << y_label << (log_y ? " (log)" : "") << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    const std::string color =
        s.color.empty() ? svg_palette()[si % svg_palette().size()] : s.color;
    out << "<path fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.4\" d=\"";
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double yv = log_y ? (s.y[i] > 0 ? std::log10(s.y[i]) : std::nan("")) : s.y[i];
      if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) {
        pen_down = false;
        continue;
      }
      out << (pen_down ? "L" : "M") << fmt(px(s.x[i])) << " " << fmt(py(yv));
      pen_down = true;
    }
    out << "\"/>\n";
    const double ly = mt + 16 + 16 * static_cast<double>(si);
    out << "<line x1=\"" << ml + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw - 126
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << ml + pw - 120 << "\" y=\"" << ly + 4
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void SvgChart::write_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("svg: cannot write " + path);
  out << render();
}

}  // namespace kfadmm
