#include "msfavar/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace msfavar::figures {

namespace {

const char* kColors[2] = {"#1f5fa8", "#c0392b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
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

void open_svg(std::ostringstream& os, double w, double h) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

}  // namespace

std::string irf_band_svg(const irf::IrfResult& result, std::size_t shock_pos, const std::vector<std::string>& names,
                         const std::string& title) {
  const int k = result.n_vars, hz = result.horizon;
  const int cols = 4;
  const int rows = (k + cols - 1) / cols;
  const double pw = 220, ph = 150, top = 40, margin = 30;
  std::ostringstream os;
  open_svg(os, cols * pw + margin, rows * ph + top + margin);
  os << "<text x=\"10\" y=\"24\" font-size=\"16\">" << escape(title) << "</text>\n";
  for (int i = 0; i < k; ++i) {
    const double x0 = margin + (i % cols) * pw, y0 = top + (i / cols) * ph;
    const double w = pw - 30, h = ph - 40;
    double lo = 0.0, hi = 0.0;
    for (int r = 0; r < result.n_regimes; ++r) {
      const auto& b = result.bands[r][shock_pos];
      lo = std::min(lo, b.p16.row(i).min());
      hi = std::max(hi, b.p84.row(i).max());
    }
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    }
    auto px = [&](int hq) { return x0 + w * hq / std::max(1, hz); };
    auto py = [&](double v) { return y0 + 20 + h * (hi - v) / (hi - lo); };
    os << "<g>\n<text x=\"" << num(x0) << "\" y=\"" << num(y0 + 12) << "\" font-size=\"11\">"
       << escape(i < static_cast<int>(names.size()) ? names[i] : "var" + std::to_string(i)) << "</text>\n";
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y0 + 20) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
       << "\" fill=\"none\" stroke=\"#999\"/>\n";
    os << "<line x1=\"" << num(x0) << "\" x2=\"" << num(x0 + w) << "\" y1=\"" << num(py(0.0)) << "\" y2=\""
       << num(py(0.0)) << "\" stroke=\"#444\" stroke-dasharray=\"3,3\"/>\n";
    for (int r = 0; r < result.n_regimes; ++r) {
      const auto& b = result.bands[r][shock_pos];
      os << "<polygon fill=\"" << kColors[r] << "\" fill-opacity=\"0.2\" points=\"";
      for (int hq = 0; hq <= hz; ++hq) os << num(px(hq)) << "," << num(py(b.p84(i, hq))) << " ";
      for (int hq = hz; hq >= 0; --hq) os << num(px(hq)) << "," << num(py(b.p16(i, hq))) << " ";
      os << "\"/>\n<polyline fill=\"none\" stroke=\"" << kColors[r] << "\" stroke-width=\"1.5\" points=\"";
      for (int hq = 0; hq <= hz; ++hq) os << num(px(hq)) << "," << num(py(b.p50(i, hq))) << " ";
      os << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string peak_heatmap_svg(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                             const std::vector<std::vector<HeatmapCell>>& cells, const std::string& title) {
  const double cw = 90, ch = 24, left = 160, top = 60;
  double vmax = 0.0;
  for (const auto& r : cells)
    for (const auto& c : r)
      if (c.present) vmax = std::max(vmax, std::abs(c.value));
  if (vmax <= 0.0) vmax = 1.0;
  std::ostringstream os;
  open_svg(os, left + cw * cols.size() + 20, top + ch * rows.size() + 20);
  os << "<text x=\"10\" y=\"24\" font-size=\"16\">" << escape(title) << "</text>\n";
  for (std::size_t j = 0; j < cols.size(); ++j) {
    os << "<text x=\"" << num(left + cw * j + cw / 2) << "\" y=\"" << num(top - 8)
       << "\" font-size=\"12\" text-anchor=\"middle\">" << escape(cols[j]) << "</text>\n";
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double y = top + ch * i;
    os << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + ch * 0.7) << "\" font-size=\"12\" text-anchor=\"end\">"
       << escape(rows[i]) << "</text>\n";
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const HeatmapCell& c = cells[i][j];
      const double x = left + cw * j;
      std::string fill = "#ffffff";
      if (c.present) {
        const double a = std::min(1.0, std::abs(c.value) / vmax);
        const int shade = static_cast<int>(std::lround(255 * (1.0 - 0.8 * a)));
        char buf[16];
        if (c.value < 0.0) std::snprintf(buf, sizeof buf, "#%02x%02xff", shade, shade);
        else std::snprintf(buf, sizeof buf, "#ff%02x%02x", shade, shade);
        fill = buf;
      }
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(cw) << "\" height=\"" << num(ch)
         << "\" fill=\"" << fill << "\" stroke=\"#ccc\"/>\n";
      if (c.present) {
        os << "<text x=\"" << num(x + cw / 2) << "\" y=\"" << num(y + ch * 0.7)
           << "\" font-size=\"11\" text-anchor=\"middle\">" << num(c.value) << " (q" << c.quarter << ")</text>\n";
      }
    }
  }
  os << "</svg>\n";
  return os.str();
}

std::string regime_path_svg(const std::vector<std::string>& dates, const std::vector<std::string>& labels,
                            const std::vector<arma::vec>& paths, const std::string& title) {
  const double w = 720, h = 260, left = 50, top = 40;
  const std::size_t n = dates.size();
  static const char* colors[] = {"#222222", "#1f5fa8", "#c0392b", "#27ae60"};
  std::ostringstream os;
  open_svg(os, w + left + 160, h + top + 40);
  os << "<text x=\"10\" y=\"24\" font-size=\"16\">" << escape(title) << "</text>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"none\" stroke=\"#999\"/>\n";
  auto px = [&](std::size_t t) { return left + w * static_cast<double>(t) / std::max<std::size_t>(1, n - 1); };
  auto py = [&](double v) { return top + h * (1.0 - std::clamp(v, 0.0, 1.0)); };
  for (std::size_t t = 0; t < n; t += 8) {
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(top + h + 16) << "\" font-size=\"10\" text-anchor=\"middle\">"
       << escape(dates[t]) << "</text>\n";
  }
  for (std::size_t s = 0; s < paths.size(); ++s) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[s % 4] << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t t = 0; t < n && t < paths[s].n_elem; ++t) os << num(px(t)) << "," << num(py(paths[s](t))) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << num(left + w + 10) << "\" y=\"" << num(top + 14 + 16 * s) << "\" font-size=\"11\" fill=\""
       << colors[s % 4] << "\">" << escape(s < labels.size() ? labels[s] : "") << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace msfavar::figures
