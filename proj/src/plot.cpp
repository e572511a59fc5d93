#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>

#include "rbftune/bench.hpp"
#include "rbftune/error.hpp"

namespace rbftune {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr TuneMethod kMethodOrder[] = {TuneMethod::GridFull, TuneMethod::GridNystrom,
                                       TuneMethod::GdFull, TuneMethod::GdNystrom};

const char* method_color(TuneMethod m) {
  switch (m) {
    case TuneMethod::GridFull: return "#1f77b4";
    case TuneMethod::GridNystrom: return "#ff7f0e";
    case TuneMethod::GdFull: return "#2ca02c";
    case TuneMethod::GdNystrom: return "#d62728";
  }
  return "#000000";
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

struct Series {
  TuneMethod method;
  std::vector<std::pair<double, double>> points;  // (n, value), sorted by n
};

// Decade-aligned log10 range covering [lo, hi].
std::pair<int, int> decades(double lo, double hi) {
  int a = static_cast<int>(std::floor(std::log10(lo)));
  int b = static_cast<int>(std::ceil(std::log10(hi)));
  if (b <= a) b = a + 1;
  return {a, b};
}

std::string render(const std::string& title, const std::string& y_label,
                   const std::vector<Series>& series) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin <= xmax)) xmin = 1.0, xmax = 10.0;
  if (!(ymin <= ymax)) ymin = 1.0, ymax = 10.0;
  const auto [x0, x1] = decades(xmin, xmax);
  const auto [y0, y1] = decades(ymin, ymax);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (std::log10(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + ph - (std::log10(y) - y0) / (y1 - y0) * ph; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt("%.0f", kWidth) +
         "\" height=\"" + fmt("%.0f", kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         title + "</text>\n";
  svg += "<rect x=\"" + fmt("%.2f", kLeft) + "\" y=\"" + fmt("%.2f", kTop) + "\" width=\"" +
         fmt("%.2f", pw) + "\" height=\"" + fmt("%.2f", ph) + "\" fill=\"none\" stroke=\"#000000\"/>\n";

  for (int k = x0; k <= x1; ++k) {
    const double x = kLeft + static_cast<double>(k - x0) / (x1 - x0) * pw;
    svg += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", kTop) + "\" x2=\"" + fmt("%.2f", x) +
           "\" y2=\"" + fmt("%.2f", kTop + ph) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", kTop + ph + 18) +
           "\" text-anchor=\"middle\">1e" + std::to_string(k) + "</text>\n";
  }
  for (int k = y0; k <= y1; ++k) {
    const double y = kTop + ph - static_cast<double>(k - y0) / (y1 - y0) * ph;
    svg += "<line x1=\"" + fmt("%.2f", kLeft) + "\" y1=\"" + fmt("%.2f", y) + "\" x2=\"" +
           fmt("%.2f", kLeft + pw) + "\" y2=\"" + fmt("%.2f", y) + "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", kLeft - 6) + "\" y=\"" + fmt("%.2f", y + 4) +
           "\" text-anchor=\"end\">1e" + std::to_string(k) + "</text>\n";
  }
  svg += "<text x=\"" + fmt("%.2f", kLeft + pw / 2) + "\" y=\"" + fmt("%.2f", kHeight - 16) +
         "\" text-anchor=\"middle\">N (training nodes)</text>\n";
  svg += "<text x=\"18\" y=\"" + fmt("%.2f", kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fmt("%.2f", kTop + ph / 2) + ")\">" + y_label + "</text>\n";

  double legend_y = kTop + 10;
  for (const auto& s : series) {
    const char* color = method_color(s.method);
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      if (i > 0) svg += ' ';
      svg += fmt("%.2f", px(s.points[i].first)) + ',' + fmt("%.2f", py(s.points[i].second));
    }
    svg += "\"/>\n";
    for (const auto& [x, y] : s.points) {
      svg += "<circle cx=\"" + fmt("%.2f", px(x)) + "\" cy=\"" + fmt("%.2f", py(y)) + "\" r=\"3\" fill=\"" +
             color + "\"/>\n";
    }
    const double lx = kWidth - kRight + 16;
    svg += "<line x1=\"" + fmt("%.2f", lx) + "\" y1=\"" + fmt("%.2f", legend_y) + "\" x2=\"" +
           fmt("%.2f", lx + 24) + "\" y2=\"" + fmt("%.2f", legend_y) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<text x=\"" + fmt("%.2f", lx + 30) + "\" y=\"" + fmt("%.2f", legend_y + 4) + "\">" +
           std::string(tune_method_name(s.method)) + "</text>\n";
    legend_y += 20;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::vector<RunRecord>& records,
                                              const std::filesystem::path& dir) {
  std::vector<std::string> functions;
  for (const auto& r : records) {
    if (r.ok && std::find(functions.begin(), functions.end(), r.function) == functions.end()) {
      functions.push_back(r.function);
    }
  }
  if (functions.empty()) throw Error(Errc::NoValidRecords, "no successful records to plot");

  std::vector<std::filesystem::path> written;
  for (const auto& name : functions) {
    std::vector<Series> accuracy;
    std::vector<Series> timing;
    for (TuneMethod method : kMethodOrder) {
      std::map<Index, const RunRecord*> by_n;
      for (const auto& r : records) {
        if (r.ok && r.function == name && r.method == method) by_n[r.n] = &r;
      }
      if (by_n.empty()) continue;
      Series acc{method, {}};
      Series tim{method, {}};
      for (const auto& [n, r] : by_n) {
        if (r->rmse > 0.0) acc.points.emplace_back(static_cast<double>(n), r->rmse);
        if (r->wall_time_ms > 0.0) tim.points.emplace_back(static_cast<double>(n), r->wall_time_ms);
      }
      accuracy.push_back(std::move(acc));
      timing.push_back(std::move(tim));
    }
    const auto acc_path = dir / (name + "_accuracy.svg");
    const auto time_path = dir / (name + "_time.svg");
    write_text_file(acc_path, render(name + ": RMS error vs N", "RMS error", accuracy));
    write_text_file(time_path, render(name + ": tuning time vs N", "wall time (ms)", timing));
    written.push_back(acc_path);
    written.push_back(time_path);
  }
  return written;
}

}  // namespace rbftune
