#pragma once

#include <string>
#include <vector>

namespace kfadmm {

/// Minimal polyline chart writer. Each series is an (x, y) sequence drawn
/// as one path; axes get a handful of labeled ticks. log_y switches the
/// y-axis to log10 (nonpositive samples are dropped from the plot).
struct SvgSeries {
  std::string label;
  std::string color = "#1f6fb2";
  std::vector<double> x, y;
};

struct SvgChart {
  std::string title;
  std::string x_label, y_label;
  bool log_y = false;
  int width = 720, height = 440;
  std::vector<SvgSeries> series;

  std::string render() const;
  void write_file(const std::string& path) const;
};

/// Default palette cycled over series added without an explicit color.
const std::vector<std::string>& svg_palette();

}  // namespace kfadmm
