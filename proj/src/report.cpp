#include "cbdt/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "cbdt/csv.hpp"
#include "cbdt/metrics.hpp"

namespace cbdt {

namespace {

std::string fmt(double v, int prec = 4) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::string pad(const std::string& s, size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

}  // namespace

EvaluationReport assemble_report(const std::vector<MethodResult>& methods,
                                 const std::vector<uint64_t>& seeds, double alpha, bool trimmed,
                                 nlohmann::json config_snapshot) {
  require(!methods.empty(), "report needs at least one method");
  EvaluationReport rep;
  rep.methods = methods;
  rep.seeds = seeds;
  rep.alpha = alpha;
  rep.trimmed = trimmed;
  rep.config_snapshot = std::move(config_snapshot);

  for (const auto& m : methods) {
    MethodSummary s;
    s.name = m.name;
    s.external = m.external;
    s.train_time_s = m.train_time_s;
    s.infer_ms_per_sample = m.infer_ms_per_sample;
    if (!m.pehe_sqrt.empty()) {
      s.pehe_sqrt_mean = trimmed ? trimmed_mean(m.pehe_sqrt) : mean_of(m.pehe_sqrt);
      const MeanCi ci = mean_ci(m.pehe_sqrt, 0.95);
      s.pehe_lo = ci.lo;
      s.pehe_hi = ci.hi;
    }
    if (!m.ate_err.empty()) {
      s.ate_mean = trimmed ? trimmed_mean(m.ate_err) : mean_of(m.ate_err);
      const MeanCi ci = mean_ci(m.ate_err, 0.95);
      s.ate_lo = ci.lo;
      s.ate_hi = ci.hi;
    }
    if (!m.rmse.empty()) s.rmse_mean = trimmed ? trimmed_mean(m.rmse) : mean_of(m.rmse);
    if (s.train_time_s > 0.0 && s.infer_ms_per_sample > 0.0) {
      const double product = s.train_time_s * s.infer_ms_per_sample / 1000.0;
      if (product < 1.0) {
        s.eap = eap(s.pehe_sqrt_mean, s.train_time_s, s.infer_ms_per_sample);
      } else {
        s.eap_note = "undefined (time product " + fmt(product, 3) + " >= 1)";
      }
    }
    rep.summaries.push_back(std::move(s));
  }

  // pairwise tests against the first internal method
  int ref = -1;
  for (size_t i = 0; i < methods.size(); ++i)
    if (!methods[i].external) {
      ref = int(i);
      break;
    }
  if (ref >= 0 && seeds.size() >= 2) {
    for (size_t i = 0; i < methods.size(); ++i) {
      if (int(i) == ref || methods[i].external) continue;
      if (methods[i].pehe_sqrt.size() == methods[ref].pehe_sqrt.size()) {
        const PairedTTest tp = paired_ttest(methods[ref].pehe_sqrt, methods[i].pehe_sqrt);
        rep.tests.push_back(
            {methods[ref].name, methods[i].name, "pehe", tp.t_stat, tp.p_value, false, tp.degenerate});
      }
      if (methods[i].ate_err.size() == methods[ref].ate_err.size()) {
        const PairedTTest ta = paired_ttest(methods[ref].ate_err, methods[i].ate_err);
        rep.tests.push_back(
            {methods[ref].name, methods[i].name, "ate", ta.t_stat, ta.p_value, false, ta.degenerate});
      }
    }
  } else if (seeds.size() < 2) {
    rep.notes = "pairwise t-tests omitted: need at least 2 seeds";
  }

  rep.family_size = int(rep.tests.size());
  if (rep.family_size > 0) {
    rep.bonferroni_threshold = bonferroni_threshold(alpha, rep.family_size);
    for (auto& t : rep.tests) t.significant = !t.degenerate && t.p_value < rep.bonferroni_threshold;
  }
  return rep;
}

std::string render_report_text(const EvaluationReport& rep) {
  std::string out;
  out += "method        sqrt-PEHE [95% CI]        ATE err [95% CI]          RMSE      train(s)  infer(ms)  EAP\n";
  out += std::string(110, '-') + "\n";
  for (const auto& s : rep.summaries) {
    out += pad(s.name + (s.external ? "*" : ""), 14);
    out += pad(fmt(s.pehe_sqrt_mean) + " [" + fmt(s.pehe_lo) + ", " + fmt(s.pehe_hi) + "]", 26);
    out += pad(fmt(s.ate_mean) + " [" + fmt(s.ate_lo) + ", " + fmt(s.ate_hi) + "]", 26);
    out += pad(fmt(s.rmse_mean), 10);
    out += pad(fmt(s.train_time_s), 10);
    out += pad(fmt(s.infer_ms_per_sample), 11);
    out += s.eap ? fmt(*s.eap) : (s.eap_note.empty() ? "-" : s.eap_note);
    out += "\n";
  }
  if (!rep.tests.empty()) {
    out += "\npaired t-tests vs " + rep.tests.front().method_a + " (Bonferroni threshold " +
           fmt(rep.bonferroni_threshold, 6) + ", family " + std::to_string(rep.family_size) +
           ")\n";
    for (const auto& t : rep.tests) {
      out += pad(t.method_b, 14) + pad(t.metric, 6);
      if (t.degenerate)
        out += "degenerate (zero-variance differences)\n";
      else
        out += "t=" + fmt(t.t_stat) + ", p=" + fmt(t.p_value, 6) +
               (t.significant ? "  *" : "") + "\n";
    }
  }
  if (!rep.notes.empty()) out += "\nnote: " + rep.notes + "\n";
  if (std::any_of(rep.summaries.begin(), rep.summaries.end(),
                  [](const MethodSummary& s) { return s.external; }))
    out += "\n* external method: published values supplied for table assembly, not re-run here\n";
  return out;
}

void write_report_text(const EvaluationReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << render_report_text(report);
}

void write_report_csv(const EvaluationReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "method,pehe_sqrt,pehe_lo,pehe_hi,ate_error,ate_lo,ate_hi,rmse,train_s,infer_ms,eap,"
       "external\n";
  for (const auto& s : report.summaries) {
    f << s.name << "," << format_double(s.pehe_sqrt_mean) << "," << format_double(s.pehe_lo) << ","
      << format_double(s.pehe_hi) << "," << format_double(s.ate_mean) << ","
      << format_double(s.ate_lo) << "," << format_double(s.ate_hi) << ","
      << format_double(s.rmse_mean) << "," << format_double(s.train_time_s) << ","
      << format_double(s.infer_ms_per_sample) << ","
      << (s.eap ? format_double(*s.eap) : "nan") << "," << (s.external ? 1 : 0) << "\n";
  }
}

void write_per_seed_csv(const EvaluationReport& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write file: " + path);
  f << "method,seed,pehe_sqrt,pehe_sq,ate_error,rmse\n";
  for (const auto& m : report.methods) {
    if (m.external) continue;
    for (size_t s = 0; s < m.pehe_sqrt.size(); ++s) {
      f << m.name << "," << (s < report.seeds.size() ? report.seeds[s] : s) << ","
        << format_double(m.pehe_sqrt[s]) << "," << format_double(m.pehe_sq[s]) << ","
        << format_double(m.ate_err[s]) << ","
        << format_double(s < m.rmse.size() ? m.rmse[s] : 0.0) << "\n";
    }
  }
}

// ============================================================================
// SVG rendering
// ============================================================================

namespace {

const char* kPalette[] = {"#4477aa", "#ee6677", "#228833", "#ccbb44",
                          "#66ccee", "#aa3377", "#bbbbbb", "#000000"};

struct SvgCanvas {
  std::string body;
  int width, height;

  SvgCanvas(int w, int h) : width(w), height(h) {}

  void line(double x1, double y1, double x2, double y2, const char* color = "#444",
            double w = 1.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<line x1='%.1f' y1='%.1f' x2='%.1f' y2='%.1f' stroke='%s' stroke-width='%.1f'/>\n",
                  x1, y1, x2, y2, color, w);
    body += buf;
  }
  void circle(double x, double y, double r, const char* color, double opacity = 0.8) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "<circle cx='%.1f' cy='%.1f' r='%.1f' fill='%s' fill-opacity='%.2f'/>\n", x, y, r,
                  color, opacity);
    body += buf;
  }
  void rect(double x, double y, double w, double h, const std::string& color) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "<rect x='%.1f' y='%.1f' width='%.1f' height='%.1f' fill='%s'/>\n",
                  x, y, w, h, color.c_str());
    body += buf;
  }
  void text(double x, double y, const std::string& s, int size = 11, const char* anchor = "start") {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "<text x='%.1f' y='%.1f' font-size='%d' font-family='sans-serif' "
                  "text-anchor='%s'>%s</text>\n",
                  x, y, size, anchor, s.c_str());
    body += buf;
  }
  void save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write file: " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << body << "</svg>\n";
  }
};

}  // namespace

void write_scatter_svg(const EvaluationReport& rep, const std::string& path) {
  SvgCanvas svg(640, 480);
  const double x0 = 70, x1 = 600, y0 = 420, y1 = 40;

  std::vector<const MethodSummary*> pts;
  for (const auto& s : rep.summaries)
    if (s.train_time_s > 0.0 && s.pehe_sqrt_mean > 0.0) pts.push_back(&s);
  if (pts.empty()) {
    svg.text(320, 240, "no timed methods to plot", 14, "middle");
    svg.save(path);
    return;
  }
  auto log10v = [](double v) { return std::log10(std::max(v, 1e-12)); };
  double lxmin = 1e300, lxmax = -1e300, lymin = 1e300, lymax = -1e300;
  for (const auto* s : pts) {
    lxmin = std::min(lxmin, log10v(s->train_time_s));
    lxmax = std::max(lxmax, log10v(s->train_time_s));
    lymin = std::min(lymin, log10v(s->pehe_sqrt_mean));
    lymax = std::max(lymax, log10v(s->pehe_sqrt_mean));
  }
  lxmin -= 0.2; lxmax += 0.2; lymin -= 0.2; lymax += 0.2;
  auto sx = [&](double v) { return x0 + (log10v(v) - lxmin) / (lxmax - lxmin) * (x1 - x0); };
  auto sy = [&](double v) { return y0 - (log10v(v) - lymin) / (lymax - lymin) * (y0 - y1); };

  svg.line(x0, y0, x1, y0);
  svg.line(x0, y0, x0, y1);
  svg.text(320, 460, "train time (s, log)", 12, "middle");
  svg.text(15, 230, "sqrt-PEHE (log)", 12, "middle");

  double max_ate = 1e-12;
  for (const auto* s : pts) max_ate = std::max(max_ate, s->ate_mean);
  int ci = 0;
  for (const auto* s : pts) {
    const double r = 4.0 + 16.0 * std::sqrt(std::max(0.0, s->ate_mean) / max_ate);
    svg.circle(sx(s->train_time_s), sy(s->pehe_sqrt_mean), r, kPalette[ci % 8]);
    svg.text(sx(s->train_time_s) + r + 2, sy(s->pehe_sqrt_mean) + 4, s->name);
    ++ci;
  }
  svg.text(x0, 25, "bubble area = ATE error", 11);
  svg.save(path);
}

void write_bars_svg(const EvaluationReport& rep, const std::string& path) {
  SvgCanvas svg(720, 440);
  const double x0 = 60, y0 = 380, y1 = 50;
  const auto& ss = rep.summaries;
  if (ss.empty()) {
    svg.save(path);
    return;
  }
  double max_pehe = 1e-12, max_time = 1e-12, max_eap = 1e-12;
  for (const auto& s : ss) {
    max_pehe = std::max(max_pehe, s.pehe_sqrt_mean);
    max_time = std::max(max_time, s.train_time_s);
    if (s.eap) max_eap = std::max(max_eap, *s.eap);
  }
  const double bw = 24, gap = 70;
  double x = x0 + 20;
  int ci = 0;
  for (const auto& s : ss) {
    const double hp = (y0 - y1) * (s.pehe_sqrt_mean / max_pehe);
    const double ht = (y0 - y1) * (max_time > 0.0 ? s.train_time_s / max_time : 0.0);
    svg.rect(x, y0 - hp, bw, hp, kPalette[0]);
    svg.rect(x + bw + 3, y0 - ht, bw, ht, kPalette[1]);
    if (s.eap) {
      const double he = (y0 - y1) * (*s.eap / max_eap);
      svg.circle(x + bw + 1.5, y0 - he, 5, kPalette[2], 1.0);
    }
    svg.text(x + bw, y0 + 16, s.name, 11, "middle");
    x += 2 * bw + gap;
    ++ci;
  }
  svg.line(x0, y0, x - gap + 20, y0);
  svg.rect(x0, 10, 12, 12, kPalette[0]);
  svg.text(x0 + 16, 20, "sqrt-PEHE (left scale)");
  svg.rect(x0 + 170, 10, 12, 12, kPalette[1]);
  svg.text(x0 + 186, 20, "train time (right scale)");
  svg.circle(x0 + 366, 16, 5, kPalette[2], 1.0);
  svg.text(x0 + 376, 20, "efficiency-adjusted PEHE");
  svg.save(path);
}

// ============================================================================
// Grid outputs
// ============================================================================

void write_grid_csv(const std::vector<GridCell>& cells, const std::string& path) {
  CsvTable t;
  t.columns = {"lambda", "alpha", "eta", "pehe_sqrt", "ate_error", "rmse"};
  for (const auto& c : cells)
    t.rows.push_back({c.lambda, c.alpha, c.eta, c.pehe_sqrt, c.ate_error, c.rmse});
  write_csv(path, t);
}

void write_grid_heatmap_svg(const std::vector<GridCell>& cells, const std::string& path) {
  std::set<double> etas, lambdas, alphas;
  for (const auto& c : cells) {
    etas.insert(c.eta);
    lambdas.insert(c.lambda);
    alphas.insert(c.alpha);
  }
  const int panels = int(etas.size());
  const int cell_px = 46;
  const int panel_w = int(alphas.size()) * cell_px + 90;
  const int panel_h = int(lambdas.size()) * cell_px + 80;
  SvgCanvas svg(panels * panel_w + 20, panel_h + 40);

  double pmin = 1e300, pmax = -1e300;
  for (const auto& c : cells) {
    pmin = std::min(pmin, c.pehe_sqrt);
    pmax = std::max(pmax, c.pehe_sqrt);
  }
  auto color_for = [&](double v) {
    const double t = pmax > pmin ? (v - pmin) / (pmax - pmin) : 0.0;
    const int r = int(40 + 215 * t);
    const int g = int(80 + 60 * (1.0 - t));
    const int b = int(200 * (1.0 - t) + 40);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return std::string(buf);
  };

  int panel = 0;
  for (double eta : etas) {
    const double ox = 20 + panel * panel_w;
    svg.text(ox + 40, 24, "eta = " + fmt(eta, 2), 12);
    int row = 0;
    for (auto it = lambdas.rbegin(); it != lambdas.rend(); ++it, ++row) {
      int col = 0;
      for (double alpha : alphas) {
        for (const auto& c : cells) {
          if (c.eta == eta && c.lambda == *it && c.alpha == alpha) {
            const double x = ox + 50 + col * cell_px;
            const double y = 40 + row * cell_px;
            svg.rect(x, y, cell_px - 2, cell_px - 2, color_for(c.pehe_sqrt));
            svg.text(x + (cell_px - 2) / 2.0, y + cell_px / 2.0 + 4, fmt(c.pehe_sqrt, 2), 10,
                     "middle");
            break;
          }
        }
        ++col;
      }
      svg.text(ox + 44, 40 + row * cell_px + cell_px / 2.0, "l=" + fmt(*it, 2), 10, "end");
    }
    int col = 0;
    for (double alpha : alphas) {
      svg.text(ox + 50 + col * cell_px + cell_px / 2.0, 40 + int(lambdas.size()) * cell_px + 16,
               "a=" + fmt(alpha, 1), 10, "middle");
      ++col;
    }
    ++panel;
  }
  svg.save(path);
}

}  // namespace cbdt
