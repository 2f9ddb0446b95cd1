#include "sparsescale/cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sparsescale/core/errors.hpp"

namespace sparsescale::cli {
namespace {

constexpr double kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  if (v != 0.0 && (std::fabs(v) >= 1e5 || std::fabs(v) < 1e-3))
    std::snprintf(buf, sizeof buf, "%.0e", v);
  else
    std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::vector<double> ticks(const Axis& a) {
  std::vector<double> out;
  if (a.log) {
    for (double e = std::ceil(std::log10(a.lo)); e <= std::floor(std::log10(a.hi)); e += 1.0)
      out.push_back(std::pow(10.0, e));
    if (out.size() < 2) out = {a.lo, a.hi};
    return out;
  }
  const double span = a.hi - a.lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  for (double v = std::ceil(a.lo / step) * step; v <= a.hi + 1e-9 * span; v += step)
    out.push_back(std::fabs(v) < 1e-12 * span ? 0.0 : v);
  return out;
}

}  // namespace

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Axis fit_axis(const std::vector<double>& values, std::string label, bool log, bool include_zero) {
  double lo = INFINITY, hi = -INFINITY;
  for (double v : values)
    if (std::isfinite(v) && (!log || v > 0.0)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  Axis a;
  a.label = std::move(label);
  a.log = log;
  if (!std::isfinite(lo)) {
    a.lo = log ? 1.0 : 0.0;
    a.hi = log ? 10.0 : 1.0;
    return a;
  }
  if (log) {
    a.lo = lo / 1.25;
    a.hi = hi * 1.25;
    return a;
  }
  if (include_zero) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1e-9, 0.05 * std::fabs(hi));
  a.lo = (include_zero && lo == 0.0) ? 0.0 : lo - pad;
  a.hi = hi + pad;
  if (a.hi <= a.lo) a.hi = a.lo + 1.0;
  return a;
}

SvgPlot::SvgPlot(std::string title, Axis x, Axis y, int width, int height)
    : title_(std::move(title)), x_(std::move(x)), y_(std::move(y)), width_(width), height_(height) {
  if (!(x_.hi > x_.lo) || !(y_.hi > y_.lo) || (x_.log && x_.lo <= 0) || (y_.log && y_.lo <= 0))
    throw ConfigError("invalid plot axis range");
}

double SvgPlot::px(double x) const {
  const double t = x_.log ? (std::log(x) - std::log(x_.lo)) / (std::log(x_.hi) - std::log(x_.lo))
                          : (x - x_.lo) / (x_.hi - x_.lo);
  return kLeft + t * (width_ - kLeft - kRight);
}

double SvgPlot::py(double y) const {
  const double t = y_.log ? (std::log(y) - std::log(y_.lo)) / (std::log(y_.hi) - std::log(y_.lo))
                          : (y - y_.lo) / (y_.hi - y_.lo);
  return height_ - kBottom - t * (height_ - kTop - kBottom);
}

void SvgPlot::points(const std::vector<std::pair<double, double>>& xy, const std::string& color,
                     const std::string& legend) {
  for (const auto& [x, y] : xy)
    if (std::isfinite(x) && std::isfinite(y))
      body_.push_back("<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
                      "\" r=\"3.5\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>");
  if (!legend.empty()) legend_.emplace_back(color, legend);
}

void SvgPlot::polyline(const std::vector<std::pair<double, double>>& xy, const std::string& color,
                       const std::string& legend, bool dashed) {
  std::string pts;
  for (const auto& [x, y] : xy)
    if (std::isfinite(x) && std::isfinite(y)) pts += fmt(px(x)) + "," + fmt(py(y)) + " ";
  body_.push_back("<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
                  (dashed ? " stroke-dasharray=\"5,4\"" : "") + " points=\"" + pts + "\"/>");
  if (!legend.empty()) legend_.emplace_back(color, legend);
}

void SvgPlot::rect(double x0, double x1, double y0, double y1, const std::string& color,
                   const std::string& label) {
  const double l = std::min(px(x0), px(x1)), r = std::max(px(x0), px(x1));
  const double t = std::min(py(y0), py(y1)), b = std::max(py(y0), py(y1));
  body_.push_back("<rect x=\"" + fmt(l) + "\" y=\"" + fmt(t) + "\" width=\"" + fmt(r - l) +
                  "\" height=\"" + fmt(b - t) + "\" fill=\"" + color + "\"/>");
  if (!label.empty())
    body_.push_back("<text x=\"" + fmt((l + r) / 2) + "\" y=\"" + fmt((t + b) / 2 + 4) +
                    "\" font-size=\"11\" text-anchor=\"middle\">" + escape_xml(label) + "</text>");
}

void SvgPlot::x_categories(std::vector<std::pair<double, std::string>> ticks) {
  x_cats_ = std::move(ticks);
}

void SvgPlot::y_categories(std::vector<std::pair<double, std::string>> ticks) {
  y_cats_ = std::move(ticks);
}

void SvgPlot::note(const std::string& text) { notes_.push_back(text); }

std::string SvgPlot::str() const {
  std::ostringstream o;
  const double x0 = kLeft, x1 = width_ - kRight, y0 = kTop, y1 = height_ - kBottom;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\"" << height_
    << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fmt(width_ / 2.0) << "\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">"
    << escape_xml(title_) << "</text>\n";
  // grid and ticks
  if (x_cats_.empty()) {
    for (double t : ticks(x_)) {
      o << "<line x1=\"" << fmt(px(t)) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(px(t))
        << "\" y2=\"" << fmt(y1) << "\" stroke=\"#e5e5e5\"/>\n";
      o << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(y1 + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
    }
  } else {
    for (const auto& [t, s] : x_cats_)
      o << "<text x=\"" << fmt(px(t)) << "\" y=\"" << fmt(y1 + 16)
        << "\" font-size=\"11\" text-anchor=\"middle\">" << escape_xml(s) << "</text>\n";
  }
  if (y_cats_.empty()) {
    for (double t : ticks(y_)) {
      o << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py(t)) << "\" x2=\"" << fmt(x1)
        << "\" y2=\"" << fmt(py(t)) << "\" stroke=\"#e5e5e5\"/>\n";
      o << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(py(t) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
    }
  } else {
    for (const auto& [t, s] : y_cats_)
      o << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(py(t) + 4)
        << "\" font-size=\"11\" text-anchor=\"end\">" << escape_xml(s) << "</text>\n";
  }
  for (const std::string& b : body_) o << b << '\n';
  o << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0)
    << "\" height=\"" << fmt(y1 - y0) << "\" fill=\"none\" stroke=\"#333\"/>\n";
  o << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(height_ - 18.0)
    << "\" font-size=\"12\" text-anchor=\"middle\">" << escape_xml(x_.label) << "</text>\n";
  o << "<text transform=\"translate(18," << fmt((y0 + y1) / 2)
    << ") rotate(-90)\" font-size=\"12\" text-anchor=\"middle\">" << escape_xml(y_.label)
    << "</text>\n";
  double ly = y0 + 8;
  for (const auto& [color, text] : legend_) {
    o << "<rect x=\"" << fmt(x1 + 12) << "\" y=\"" << fmt(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
      << color << "\"/>";
    o << "<text x=\"" << fmt(x1 + 26) << "\" y=\"" << fmt(ly + 1) << "\" font-size=\"11\">"
      << escape_xml(text) << "</text>\n";
    ly += 16;
  }
  for (const std::string& n : notes_) {
    o << "<text x=\"" << fmt(x1 + 12) << "\" y=\"" << fmt(ly + 1) << "\" font-size=\"10\" fill=\"#555\">"
      << escape_xml(n) << "</text>\n";
    ly += 14;
  }
  o << "</svg>\n";
  return o.str();
}

void SvgPlot::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << str();
}

std::string series_color(std::size_t i) {
  static const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return kPalette[i % 10];
}

std::string heat_color(double t) {
  t = std::clamp(std::isfinite(t) ? t : 1.0, 0.0, 1.0);
  // white-ish yellow (low) to dark blue (high)
  const double r0 = 255, g0 = 247, b0 = 188, r1 = 37, g1 = 52, b1 = 148;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(r0 + t * (r1 - r0)),
                static_cast<int>(g0 + t * (g1 - g0)), static_cast<int>(b0 + t * (b1 - b0)));
  return buf;
}

}  // namespace sparsescale::cli
