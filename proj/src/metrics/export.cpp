#include "dbn/metrics/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dbn/error.hpp"

namespace dbn::metrics {

namespace {

std::string printf_str(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string csv_name(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

// Qualitative palette, cycled for K > 8.
constexpr const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::string fmt3(double v) { return std::isnan(v) ? "n/a" : printf_str("%.3f", v); }

std::string report_csv(const Report& r) {
  std::string out = "class,precision,recall,f1,support,auc\n";
  for (std::size_t j = 0; j < r.classes.size(); ++j) {
    const auto& m = r.classes[j];
    const double a = j < r.auc.size() ? r.auc[j] : std::nan("");
    out += csv_name(m.name) + "," + fmt3(m.precision) + "," + fmt3(m.recall) + "," + fmt3(m.f1) + "," +
           std::to_string(m.support) + "," + fmt3(a) + "\n";
  }
  const std::string total = std::to_string(r.total);
  const std::string mauc = r.auc.empty() ? "n/a" : fmt3(r.macro_auc);
  out += "macro avg," + fmt3(r.macro.precision) + "," + fmt3(r.macro.recall) + "," + fmt3(r.macro.f1) + "," + total +
         "," + mauc + "\n";
  out += "weighted avg," + fmt3(r.weighted.precision) + "," + fmt3(r.weighted.recall) + "," + fmt3(r.weighted.f1) +
         "," + total + ",n/a\n";
  out += "accuracy,,," + fmt3(r.accuracy) + "," + total + ",\n";
  return out;
}

std::string report_text(const Report& r) {
  std::size_t w = 12;
  for (const auto& m : r.classes) w = std::max(w, m.name.size());
  const int nw = static_cast<int>(w);
  std::string out = printf_str("%*s %9s %9s %9s %9s %9s\n\n", nw, "", "precision", "recall", "f1-score", "support",
                               "auc");
  for (std::size_t j = 0; j < r.classes.size(); ++j) {
    const auto& m = r.classes[j];
    const double a = j < r.auc.size() ? r.auc[j] : std::nan("");
    out += printf_str("%*s %9s %9s %9s %9llu %9s\n", nw, m.name.c_str(), fmt3(m.precision).c_str(),
                      fmt3(m.recall).c_str(), fmt3(m.f1).c_str(), static_cast<unsigned long long>(m.support),
                      fmt3(a).c_str());
  }
  const auto total = static_cast<unsigned long long>(r.total);
  out += "\n";
  out += printf_str("%*s %9s %9s %9s %9llu\n", nw, "accuracy", "", "", fmt3(r.accuracy).c_str(), total);
  out += printf_str("%*s %9s %9s %9s %9llu %9s\n", nw, "macro avg", fmt3(r.macro.precision).c_str(),
                    fmt3(r.macro.recall).c_str(), fmt3(r.macro.f1).c_str(), total,
                    r.auc.empty() ? "" : fmt3(r.macro_auc).c_str());
  out += printf_str("%*s %9s %9s %9s %9llu\n", nw, "weighted avg", fmt3(r.weighted.precision).c_str(),
                    fmt3(r.weighted.recall).c_str(), fmt3(r.weighted.f1).c_str(), total);
  return out;
}

std::string roc_csv(const RocCurve& c) {
  std::string out = "fpr,tpr\n";
  for (std::size_t i = 0; i < c.size(); ++i) out += printf_str("%.6f,%.6f\n", c.fpr(i), c.tpr(i));
  return out;
}

std::string roc_svg(const Report& r) {
  constexpr double W = 520, H = 440, L = 60, T = 20, S = 360;  // plot square S x S at (L, T)
  std::string out = printf_str(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n",
      W, H);
  out += printf_str("<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"black\"/>\n", L,
                    T, S, S);
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%.2f</text>\n", L + f * S, T + S + 16, f);
    out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%.2f</text>\n", L - 6, T + (1 - f) * S + 4, f);
  }
  out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">False positive rate</text>\n", L + S / 2,
                    T + S + 34);
  out += printf_str(
      "<text x=\"14\" y=\"%.1f\" text-anchor=\"middle\" transform=\"rotate(-90 14 %.1f)\">True positive rate</text>\n",
      T + S / 2, T + S / 2);
  out += printf_str(
      "<line x1=\"%.0f\" y1=\"%.0f\" x2=\"%.0f\" y2=\"%.0f\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n", L, T + S,
      L + S, T);
  std::size_t legend = 0;
  for (std::size_t j = 0; j < r.curves.size(); ++j) {
    if (j >= r.has_curve.size() || !r.has_curve[j]) continue;
    const RocCurve& c = r.curves[j];
    const char* color = palette[j % std::size(palette)];
    out += printf_str("<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"2\" points=\"", color);
    for (std::size_t i = 0; i < c.size(); ++i)
      out += printf_str("%s%.2f,%.2f", i ? " " : "", L + c.fpr(i) * S, T + (1 - c.tpr(i)) * S);
    out += "\"/>\n";
    const double ly = T + S - 12 - 16.0 * static_cast<double>(legend++);
    out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" fill=\"%s\">%s (AUC %s)</text>\n", L + S - 8,
                      ly, color, xml_escape(r.classes[j].name).c_str(), fmt3(r.auc[j]).c_str());
  }
  out += "</svg>\n";
  return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
  std::string out = "true\\pred";
  for (const auto& n : cm.class_names()) out += "," + csv_name(n);
  out += "\n";
  for (std::size_t t = 0; t < cm.classes(); ++t) {
    out += csv_name(cm.class_names()[t]);
    for (std::size_t p = 0; p < cm.classes(); ++p) out += "," + std::to_string(cm(t, p));
    out += "\n";
  }
  return out;
}

std::string confusion_svg(const ConfusionMatrix& cm) {
  const std::size_t K = cm.classes();
  constexpr double cell = 64, L = 120, T = 40;
  std::uint64_t peak = 0;
  for (std::size_t t = 0; t < K; ++t)
    for (std::size_t p = 0; p < K; ++p) peak = std::max(peak, cm(t, p));
  const double W = L + cell * static_cast<double>(K) + 20, H = T + cell * static_cast<double>(K) + 40;
  std::string out = printf_str(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" font-family=\"sans-serif\" "
      "font-size=\"12\">\n",
      W, H);
  out += printf_str("<text x=\"%.1f\" y=\"14\" text-anchor=\"middle\">Predicted</text>\n",
                    L + cell * static_cast<double>(K) / 2);
  for (std::size_t p = 0; p < K; ++p)
    out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">%s</text>\n",
                      L + cell * (static_cast<double>(p) + 0.5), T - 8, xml_escape(cm.class_names()[p]).c_str());
  for (std::size_t t = 0; t < K; ++t) {
    const double y = T + cell * static_cast<double>(t);
    out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\">%s</text>\n", L - 8, y + cell / 2 + 4,
                      xml_escape(cm.class_names()[t]).c_str());
    for (std::size_t p = 0; p < K; ++p) {
      const double x = L + cell * static_cast<double>(p);
      const double shade = peak ? static_cast<double>(cm(t, p)) / static_cast<double>(peak) : 0.0;
      out += printf_str(
          "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.0f\" height=\"%.0f\" fill=\"#08519c\" fill-opacity=\"%.4f\" "
          "stroke=\"#ccc\"/>\n",
          x, y, cell, cell, shade);
      out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" fill=\"%s\">%llu</text>\n", x + cell / 2,
                        y + cell / 2 + 4, shade > 0.5 ? "white" : "black",
                        static_cast<unsigned long long>(cm(t, p)));
    }
  }
  out += printf_str("<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\">True</text>\n", L / 2,
                    T + cell * static_cast<double>(K) + 24);
  out += "</svg>\n";
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw DataError("write failed: " + path.string());
}

}  // namespace dbn::metrics
