#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace sparsescale::cli {

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  std::string label;
};

/// Axis range covering `values` with a small margin (log axes use positive
/// values only). Falls back to [0, 1] for no finite values.
Axis fit_axis(const std::vector<double>& values, std::string label, bool log = false,
              bool include_zero = false);

/// Minimal static SVG chart: one plotting area with data-space primitives.
class SvgPlot {
 public:
  SvgPlot(std::string title, Axis x, Axis y, int width = 720, int height = 440);

  void points(const std::vector<std::pair<double, double>>& xy, const std::string& color,
              const std::string& legend = "");
  void polyline(const std::vector<std::pair<double, double>>& xy, const std::string& color,
                const std::string& legend = "", bool dashed = false);
  /// Filled data-space rectangle with an optional centred label.
  void rect(double x0, double x1, double y0, double y1, const std::string& color,
            const std::string& label = "");
  /// Replaces the numeric x tick labels with categorical ones.
  void x_categories(std::vector<std::pair<double, std::string>> ticks);
  void y_categories(std::vector<std::pair<double, std::string>> ticks);
  void note(const std::string& text);

  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  double px(double x) const;
  double py(double y) const;

  std::string title_;
  Axis x_, y_;
  int width_, height_;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;  // (color, text)
  std::vector<std::pair<double, std::string>> x_cats_, y_cats_;
  std::vector<std::string> notes_;
};

/// Categorical palette colour for series `i`.
std::string series_color(std::size_t i);

/// Sequential colour for t in [0, 1] (light to dark).
std::string heat_color(double t);

std::string escape_xml(const std::string& s);

}  // namespace sparsescale::cli
