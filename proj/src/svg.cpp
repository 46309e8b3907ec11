#include "mixedspec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace mixedspec::svg {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

Frame frame_of(const std::vector<Series>& series) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) return {0, 1, 0, 1};
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

std::string chrome(const Frame& f, const std::string& title,
                   const std::string& xlabel, const std::string& ylabel) {
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
         "\" height=\"" + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
  const double l = kLeft, r = kWidth - kRight, t = kTop, b = kHeight - kBottom;
  out += "<rect x=\"" + num(l) + "\" y=\"" + num(t) + "\" width=\"" + num(r - l) +
         "\" height=\"" + num(b - t) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    out += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(b + 16) +
           "\" text-anchor=\"middle\">" + tick(xv) + "</text>\n";
    out += "<text x=\"" + num(l - 6) + "\" y=\"" + num(f.py(yv) + 4) +
           "\" text-anchor=\"end\">" + tick(yv) + "</text>\n";
  }
  out += "<text x=\"" + num((l + r) / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">" + escape(xlabel) + "</text>\n";
  out += "<text transform=\"translate(16," + num((t + b) / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(ylabel) + "</text>\n";
  return out;
}

std::string legend(const std::vector<Series>& series) {
  std::string out;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 14 + 18.0 * static_cast<double>(i);
    const double x = kWidth - kRight + 12;
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) +
           "\" width=\"10\" height=\"10\" fill=\"" + kColours[i % 8] + "\"/>\n";
    out += "<text x=\"" + num(x + 16) + "\" y=\"" + num(y) + "\">" +
           escape(series[i].label) + "</text>\n";
  }
  return out;
}

}  // namespace

std::string line_plot(const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, const std::vector<Series>& series) {
  const Frame f = frame_of(series);
  std::string out = chrome(f, title, xlabel, ylabel);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    std::string pts;
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
      pts += num(f.px(s.x[j])) + "," + num(f.py(s.y[j])) + " ";
    }
    out += "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" +
           std::string(kColours[i % 8]) + "\" points=\"" + pts + "\"/>\n";
  }
  out += legend(series);
  out += "</svg>\n";
  return out;
}

std::string scatter_plot(const std::string& title, const std::string& xlabel,
                         const std::string& ylabel,
                         const std::vector<Series>& series) {
  const Frame f = frame_of(series);
  std::string out = chrome(f, title, xlabel, ylabel);
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    for (std::size_t j = 0; j < std::min(s.x.size(), s.y.size()); ++j) {
      if (!std::isfinite(s.x[j]) || !std::isfinite(s.y[j])) continue;
      out += "<circle r=\"2\" cx=\"" + num(f.px(s.x[j])) + "\" cy=\"" +
             num(f.py(s.y[j])) + "\" fill=\"" + kColours[i % 8] + "\"/>\n";
    }
  }
  out += legend(series);
  out += "</svg>\n";
  return out;
}

}  // namespace mixedspec::svg
