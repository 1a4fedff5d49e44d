/* Copyright 2026 The LoadForge Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "loadforge/bench.hpp"
#include "loadforge/error.hpp"

namespace loadforge {

namespace fs = std::filesystem;

namespace {

constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                    "#66a61e", "#e6ab02", "#a6761d", "#666666"};
constexpr const char* kLight = "#b0b0b0";
constexpr const char* kDark = "#404040";

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

class Svg {
 public:
  Svg(int width, int height, const std::string& title) : w_(width), h_(height) {
    body_ << "<rect x=\"0\" y=\"0\" width=\"" << w_ << "\" height=\"" << h_
          << "\" fill=\"white\"/>\n";
    text(w_ / 2.0, 24, title, "middle", 16);
  }

  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& cls = "") {
    body_ << "<rect";
    if (!cls.empty()) body_ << " class=\"" << cls << "\"";
    body_ << " x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(std::max(0.0, w))
          << "\" height=\"" << num(std::max(0.0, h)) << "\" fill=\"" << fill << "\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            const std::string& extra = "") {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body_ << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << stroke << "\" points=\"";
    for (const auto& [x, y] : pts) body_ << num(x) << "," << num(y) << " ";
    body_ << "\"/>\n";
    for (const auto& [x, y] : pts) {
      body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3\" fill=\""
            << stroke << "\"/>\n";
    }
  }

  void text(double x, double y, const std::string& s, const std::string& anchor = "start",
            int size = 11, double rotate = 0.0) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-size=\"" << size
          << "\" font-family=\"sans-serif\" text-anchor=\"" << anchor << "\"";
    if (rotate != 0.0) {
      body_ << " transform=\"rotate(" << num(rotate) << " " << num(x) << " " << num(y) << ")\"";
    }
    body_ << ">" << esc(s) << "</text>\n";
  }

  void raw(const std::string& s) { body_ << s; }

  void save(const fs::path& path) const {
    std::ostringstream doc;
    doc << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w_ << "\" height=\"" << h_
        << "\" viewBox=\"0 0 " << w_ << " " << h_ << "\">\n"
        << body_.str() << "</svg>\n";
    const std::string s = doc.str();
    write_file(path, ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

 private:
  int w_;
  int h_;
  std::ostringstream body_;
};

struct Frame {
  double left = 80, top = 44, right = 620, bottom = 360;
  double width() const { return right - left; }
  double height() const { return bottom - top; }
};

// Linear y axis from 0 to a rounded maximum; returns the maximum.
double linear_axis(Svg& svg, const Frame& f, double max_value, const std::string& label) {
  const double top = max_value > 0 ? max_value * 1.1 : 1.0;
  svg.line(f.left, f.bottom, f.right, f.bottom, "black");
  svg.line(f.left, f.top, f.left, f.bottom, "black");
  for (int i = 0; i <= 5; ++i) {
    const double v = top * i / 5.0;
    const double y = f.bottom - f.height() * i / 5.0;
    svg.line(f.left - 4, y, f.left, y, "black");
    svg.line(f.left, y, f.right, y, "#e0e0e0");
    svg.text(f.left - 6, y + 4, short_num(v), "end", 10);
  }
  svg.text(18, (f.top + f.bottom) / 2, label, "middle", 12, -90);
  return top;
}

void legend(Svg& svg, double x, double y, const std::vector<std::pair<std::string, std::string>>& items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    svg.rect(x, y + 16.0 * i, 10, 10, items[i].second);
    svg.text(x + 14, y + 16.0 * i + 9, items[i].first, "start", 10);
  }
}

void bar_labels(Svg& svg, const Frame& f, const std::vector<std::string>& labels, double slot) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = f.left + slot * (i + 0.5);
    svg.text(x, f.bottom + 14, labels[i], "end", 9, -30);
  }
}

fs::path plot_epoch_lines(const BenchReport& report, const std::vector<CaseSummary>& cases,
                          const fs::path& dir) {
  Svg svg(820, 420, "Epoch time per measured epoch");
  Frame f;
  std::map<std::size_t, std::vector<const EpochRecord*>> by_case;
  double max_v = 0.0;
  std::size_t max_n = 1;
  for (const auto& r : report.records) {
    by_case[r.case_id].push_back(&r);
    max_v = std::max(max_v, r.epoch_time_ms);
  }
  for (auto& [id, recs] : by_case) {
    std::stable_sort(recs.begin(), recs.end(), [](const EpochRecord* a, const EpochRecord* b) {
      return std::pair(a->repeat, a->epoch) < std::pair(b->repeat, b->epoch);
    });
    max_n = std::max(max_n, recs.size());
  }
  const double top = linear_axis(svg, f, max_v, "epoch time (ms)");
  const double dx = max_n > 1 ? f.width() / static_cast<double>(max_n - 1) : 0.0;
  for (std::size_t i = 0; i < max_n; ++i) {
    const double x = max_n > 1 ? f.left + dx * i : f.left + f.width() / 2;
    svg.line(x, f.bottom, x, f.bottom + 4, "black");
    svg.text(x, f.bottom + 16, std::to_string(i + 1), "middle", 10);
  }
  svg.text((f.left + f.right) / 2, f.bottom + 36, "measured epoch (repeat-major)", "middle", 12);
  std::vector<std::pair<std::string, std::string>> items;
  std::size_t k = 0;
  for (const auto& c : cases) {
    const auto& recs = by_case[c.case_id];
    const std::string color = kPalette[k++ % 8];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      const double x = max_n > 1 ? f.left + dx * i : f.left + f.width() / 2;
      pts.emplace_back(x, f.bottom - f.height() * recs[i]->epoch_time_ms / top);
    }
    svg.polyline(pts, color);
    items.emplace_back(std::to_string(c.case_id) + " " + case_label(c.bench_case), color);
  }
  legend(svg, f.right + 16, f.top, items);
  const fs::path out = dir / "epoch_time_lines.svg";
  svg.save(out);
  return out;
}

fs::path plot_load_log(const std::vector<CaseSummary>& cases, const fs::path& dir) {
  Svg svg(820, 440, "Median data-loading time per epoch (log scale)");
  Frame f;
  f.bottom = 330;
  double lo_v = 0.0;
  double hi_v = 0.0;
  for (const auto& c : cases) {
    if (c.median_load_ms <= 0) continue;
    lo_v = lo_v == 0.0 ? c.median_load_ms : std::min(lo_v, c.median_load_ms);
    hi_v = std::max(hi_v, c.median_load_ms);
  }
  if (hi_v <= 0.0) {
    lo_v = 1e-3;
    hi_v = 1.0;
  }
  int lo = static_cast<int>(std::floor(std::log10(lo_v)));
  int hi = static_cast<int>(std::ceil(std::log10(hi_v)));
  if (hi <= lo) hi = lo + 1;
  auto y_of = [&](double v) {
    const double t = (std::log10(v) - lo) / static_cast<double>(hi - lo);
    return f.bottom - f.height() * std::clamp(t, 0.0, 1.0);
  };
  svg.line(f.left, f.bottom, f.right, f.bottom, "black");
  svg.line(f.left, f.top, f.left, f.bottom, "black");
  for (int d = lo; d <= hi; ++d) {
    const double y = y_of(std::pow(10.0, d));
    svg.raw("<line class=\"decade-tick\" data-decade=\"" + std::to_string(d) + "\" x1=\"" +
            num(f.left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.right) + "\" y2=\"" +
            num(y) + "\" stroke=\"#d0d0d0\"/>\n");
    svg.text(f.left - 8, y + 4, "1e" + std::to_string(d), "end", 10);
  }
  svg.text(18, (f.top + f.bottom) / 2, "load time (ms, log10)", "middle", 12, -90);
  const double slot = f.width() / std::max<std::size_t>(1, cases.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const double x = f.left + slot * i + slot * 0.15;
    const double y = c.median_load_ms > 0 ? y_of(c.median_load_ms) : f.bottom;
    svg.rect(x, y, slot * 0.7, f.bottom - y,
             c.bench_case.preset == AugmentPreset::kFew ? kLight : kDark, "bar");
    svg.text(x + slot * 0.35, y - 4, short_num(c.median_load_ms), "middle", 9);
    labels.push_back(case_label(c.bench_case));
  }
  bar_labels(svg, f, labels, slot);
  legend(svg, f.right + 16, f.top, {{"few", kLight}, {"extensive", kDark}});
  const fs::path out = dir / "load_time_log.svg";
  svg.save(out);
  return out;
}

fs::path plot_stacked(const std::vector<CaseSummary>& cases, const fs::path& dir) {
  Svg svg(820, 440, "Data loading (gray) on top of training (dark), median epoch");
  Frame f;
  f.bottom = 330;
  double max_v = 0.0;
  for (const auto& c : cases) max_v = std::max(max_v, c.median_train_ms + c.median_load_ms);
  const double top = linear_axis(svg, f, max_v, "time (ms)");
  const double slot = f.width() / std::max<std::size_t>(1, cases.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const double x = f.left + slot * i + slot * 0.15;
    const double h_train = f.height() * c.median_train_ms / top;
    const double h_load = f.height() * c.median_load_ms / top;
    svg.rect(x, f.bottom - h_train, slot * 0.7, h_train, kDark, "train");
    svg.rect(x, f.bottom - h_train - h_load, slot * 0.7, h_load, kLight, "load");
    const double total = c.median_train_ms + c.median_load_ms;
    const double pct = total > 0 ? 100.0 * c.median_load_ms / total : 0.0;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.0f%%", pct);
    svg.text(x + slot * 0.35, f.bottom - h_train - h_load - 4, buf, "middle", 9);
    labels.push_back(case_label(c.bench_case));
  }
  bar_labels(svg, f, labels, slot);
  legend(svg, f.right + 16, f.top, {{"data loading", kLight}, {"training", kDark}});
  const fs::path out = dir / "load_train_stacked.svg";
  svg.save(out);
  return out;
}

fs::path plot_grouped(const std::vector<CaseSummary>& cases, const fs::path& dir) {
  Svg svg(820, 440, "Median epoch time, few (gray) vs extensive (dark) augmentation");
  Frame f;
  f.bottom = 330;
  // Group by (reader, allocation), first occurrence wins for duplicates.
  std::vector<std::pair<ReaderKind, AllocationKind>> groups;
  std::map<std::tuple<int, int, int>, double> value;
  double max_v = 0.0;
  for (const auto& c : cases) {
    const auto g = std::pair(c.bench_case.reader, c.bench_case.allocation);
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
    value.emplace(std::tuple(static_cast<int>(g.first), static_cast<int>(g.second),
                             static_cast<int>(c.bench_case.preset)),
                  c.median_epoch_ms);
    max_v = std::max(max_v, c.median_epoch_ms);
  }
  const double top = linear_axis(svg, f, max_v, "epoch time (ms)");
  const double slot = f.width() / std::max<std::size_t>(1, groups.size());
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto [reader, alloc] = groups[i];
    int j = 0;
    for (auto preset : {AugmentPreset::kFew, AugmentPreset::kExtensive}) {
      const auto it = value.find(std::tuple(static_cast<int>(reader), static_cast<int>(alloc),
                                            static_cast<int>(preset)));
      const double x = f.left + slot * i + slot * (0.1 + 0.4 * j++);
      if (it == value.end()) continue;
      const double h = f.height() * it->second / top;
      svg.rect(x, f.bottom - h, slot * 0.4, h, preset == AugmentPreset::kFew ? kLight : kDark,
               "bar");
      svg.text(x + slot * 0.2, f.bottom - h - 4, short_num(it->second), "middle", 9);
    }
    labels.push_back(std::string(reader_name(reader)) + "/" + std::string(allocation_name(alloc)));
  }
  bar_labels(svg, f, labels, slot);
  legend(svg, f.right + 16, f.top, {{"few", kLight}, {"extensive", kDark}});
  const fs::path out = dir / "few_extensive_grouped.svg";
  svg.save(out);
  return out;
}

}  // namespace

std::vector<fs::path> emit_plots(const BenchReport& report, const fs::path& out_dir) {
  if (report.records.empty()) fail(ErrorCode::kEmptyReport, "report has no epoch records");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + out_dir.string() + ": " + ec.message());
  const auto cases = summarize(report);
  return {plot_epoch_lines(report, cases, out_dir), plot_load_log(cases, out_dir),
          plot_stacked(cases, out_dir), plot_grouped(cases, out_dir)};
}

}  // namespace loadforge
