#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "weldbench/report.hpp"

namespace weldbench::plot {

struct Series {
  std::string label;
  std::vector<double> x, y, err;  // err empty or one value per point
  bool line = true;
  bool markers = false;
};

struct Figure {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<Series> series;
};

namespace detail {

inline const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

inline std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(6);
  os << v;
  return os.str();
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

}  // namespace detail

// Renders a static SVG. Points that are non-finite, or nonpositive on a log
// axis, are skipped. A figure without data yields labelled empty axes.
inline std::string render(const Figure& f) {
  const double W = 640, H = 440, ml = 70, mr = 20, mt = 40, mb = 55;
  auto tx = [&](double v) { return f.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return f.logy ? std::log10(v) : v; };
  auto ok = [&](double v, bool lg) { return std::isfinite(v) && (!lg || v > 0.0); };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : f.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!ok(s.x[i], f.logx) || !ok(s.y[i], f.logy)) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      const double e = s.err.empty() ? 0.0 : s.err[i];
      const double lo = s.y[i] - e, hi = s.y[i] + e;
      y0 = std::min(y0, ty(ok(lo, f.logy) ? lo : s.y[i]));
      y1 = std::max(y1, ty(hi));
    }
  }
  if (!(x0 <= x1)) x0 = 0, x1 = 1;
  if (!(y0 <= y1)) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  const double py = 0.05 * (y1 - y0);
  y0 -= py;
  y1 += py;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
  auto pyv = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << detail::escape(f.title) << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
     << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double gx = x0 + (x1 - x0) * k / 4.0;
    const double gy = y0 + (y1 - y0) * k / 4.0;
    const double sx = ml + (W - ml - mr) * k / 4.0;
    const double sy = H - mb - (H - mt - mb) * k / 4.0;
    os << "<text x=\"" << sx << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\">"
       << (f.logx ? "1e" + detail::num(gx) : detail::num(gx)) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
       << (f.logy ? "1e" + detail::num(gy) : detail::num(gy)) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
     << detail::escape(f.xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (mt + H - mb) / 2 << ")\">" << detail::escape(f.ylabel) << "</text>\n";

  for (std::size_t si = 0; si < f.series.size(); ++si) {
    const auto& s = f.series[si];
    const char* color = detail::kColors[si % 8];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (ok(s.x[i], f.logx) && ok(s.y[i], f.logy)) pts.emplace_back(px(s.x[i]), pyv(s.y[i]));
    }
    if (s.line && pts.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [a, b] : pts) os << a << ',' << b << ' ';
      os << "\"/>\n";
    }
    if (s.markers) {
      for (const auto& [a, b] : pts) {
        os << "<circle cx=\"" << a << "\" cy=\"" << b << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    if (!s.err.empty()) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!ok(s.x[i], f.logx) || !ok(s.y[i], f.logy) || !std::isfinite(s.err[i])) continue;
        const double lo = s.y[i] - s.err[i], hi = s.y[i] + s.err[i];
        if (!ok(lo, f.logy)) continue;
        os << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\"" << pyv(lo)
           << "\" y2=\"" << pyv(hi) << "\" stroke=\"" << color << "\"/>\n";
      }
    }
    os << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16 + 15 * si << "\" fill=\"" << color << "\">"
       << detail::escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Exact curve and Monte Carlo points with error bars from a sweep table,
// one pair of series per (kappa, rho_-, rho_+).
inline Figure moment_vs_lambda(const report::Table& t) {
  Figure f;
  f.title = "E[psi'(1)^lambda]";
  f.xlabel = "lambda";
  f.ylabel = "moment";
  const int ck = t.column("kappa"), cm = t.column("rho_minus"), cp = t.column("rho_plus");
  const int cl = t.column("lambda"), ce = t.column("exact_value"), cmc = t.column("mc_mean"),
            cs = t.column("mc_stderr");
  if (t.rows.empty() || cl < 0) return f;
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string key = "kappa=" + detail::num(t.number(r, ck)) + " rho-=" +
                            detail::num(t.number(r, cm)) + " rho+=" + detail::num(t.number(r, cp));
    groups[key].push_back(r);
  }
  for (auto& [key, rows] : groups) {
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return t.number(a, cl) < t.number(b, cl); });
    Series ex{key + " exact", {}, {}, {}, true, false};
    Series mc{key + " mc", {}, {}, {}, false, true};
    for (std::size_t r : rows) {
      ex.x.push_back(t.number(r, cl));
      ex.y.push_back(t.number(r, ce));
      if (cmc >= 0 && std::isfinite(t.number(r, cmc))) {
        mc.x.push_back(t.number(r, cl));
        mc.y.push_back(t.number(r, cmc));
        mc.err.push_back(cs >= 0 ? t.number(r, cs) : 0.0);
      }
    }
    f.series.push_back(std::move(ex));
    if (!mc.x.empty()) f.series.push_back(std::move(mc));
  }
  return f;
}

// Empirical survival function on log-log axes with the fitted line and a
// reference line of slope -lambda0 through the first point.
inline Figure tail_law(const report::Table& t) {
  Figure f;
  f.title = "P[psi'(1) > y]";
  f.xlabel = "y";
  f.ylabel = "survival";
  f.logx = f.logy = true;
  const int cy = t.column("y"), cs = t.column("survival"), cf = t.column("slope"),
            cl = t.column("lambda0");
  if (t.rows.empty() || cy < 0 || cs < 0) return f;
  Series emp{"empirical", {}, {}, {}, false, true};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    emp.x.push_back(t.number(r, cy));
    emp.y.push_back(t.number(r, cs));
  }
  const double x0 = emp.x.front(), y0 = emp.y.front();
  auto through = [&](const std::string& label, double slope) {
    Series s{label, {}, {}, {}, true, false};
    for (double x : emp.x) {
      s.x.push_back(x);
      s.y.push_back(y0 * std::pow(x / x0, slope));
    }
    return s;
  };
  f.series.push_back(emp);
  if (cf >= 0) f.series.push_back(through("fitted slope " + detail::num(t.number(0, cf)), t.number(0, cf)));
  if (cl >= 0) f.series.push_back(through("-lambda0 = " + detail::num(-t.number(0, cl)), -t.number(0, cl)));
  return f;
}

// Empirical CDFs of one functional under each construction.
inline Figure ks_overlay(const report::Table& t, const std::string& functional) {
  Figure f;
  f.title = "empirical CDF: " + functional;
  f.xlabel = functional;
  f.ylabel = "CDF";
  const int cc = t.column("construction"), cf = t.column("functional"), cv = t.column("value");
  if (t.rows.empty() || cc < 0 || cf < 0 || cv < 0) return f;
  std::map<std::string, std::vector<double>> groups;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.rows[r][static_cast<std::size_t>(cf)] != functional) continue;
    groups[t.rows[r][static_cast<std::size_t>(cc)]].push_back(t.number(r, cv));
  }
  for (auto& [name, v] : groups) {
    std::sort(v.begin(), v.end());
    Series s{name, {}, {}, {}, true, false};
    for (std::size_t i = 0; i < v.size(); ++i) {
      s.x.push_back(v[i]);
      s.y.push_back(static_cast<double>(i + 1) / v.size());
    }
    f.series.push_back(std::move(s));
  }
  return f;
}

}  // namespace weldbench::plot
