/*
 * Copyright 2026 The crashml Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "crashml/explain.hpp"
#include "crashml/metrics.hpp"
#include "crashml/rfecv.hpp"

// Plot emitters. Deliberately dependency-free and fully deterministic: fixed
// canvas sizes, fixed precision, no randomized jitter. The JSON/CSV artifacts
// are the contractual outputs; these exist so results can be eyeballed.

namespace crashml::svg {

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

struct Canvas {
    double width, height;
    std::string body;

    Canvas(double w, double h) : width(w), height(h) {}

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0) {
        body += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) +
                "\" y2=\"" + num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
                num(stroke_width) + "\"/>\n";
    }

    void circle(double cx, double cy, double r, const std::string& fill, double opacity = 1.0) {
        body += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
                "\" fill=\"" + fill + "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const std::string& fill,
              double opacity = 1.0) {
        body += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
                "\" height=\"" + num(h) + "\" fill=\"" + fill + "\" fill-opacity=\"" +
                num(opacity) + "\"/>\n";
    }

    void path(const std::string& d, const std::string& stroke, const std::string& fill,
              double opacity = 1.0) {
        body += "<path d=\"" + d + "\" stroke=\"" + stroke + "\" fill=\"" + fill +
                "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
    }

    void text(double x, double y, const std::string& s, double size = 11.0,
              const std::string& anchor = "start") {
        body += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
                "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + escape(s) +
                "</text>\n";
    }

    std::string finish() const {
        return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
               "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
               num(height) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
               body + "</svg>\n";
    }
};

// Blue (0) to red (1) color ramp.
inline std::string ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lround(30 + 195 * t));
    const int g = static_cast<int>(std::lround(80 * (1.0 - std::abs(2 * t - 1))));
    const int b = static_cast<int>(std::lround(225 - 195 * t));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

}  // namespace detail

// Mean validation AUC (with +-std band) against feature count, counts
// descending left to right.
inline std::string rfecv_curve(const ElimReport& report) {
    const double w = 640, h = 400, ml = 60, mr = 20, mt = 30, mb = 50;
    detail::Canvas canvas(w, h);

    double lo = 1.0, hi = 0.0;
    for (const ElimStep& st : report.steps) {
        lo = std::min(lo, st.mean_auc - st.std_auc);
        hi = std::max(hi, st.mean_auc + st.std_auc);
    }
    const double pad = std::max(0.01, (hi - lo) * 0.1);
    lo -= pad;
    hi += pad;

    const std::size_t n = report.steps.size();
    auto sx = [&](std::size_t i) {
        return n > 1 ? ml + (w - ml - mr) * static_cast<double>(i) / static_cast<double>(n - 1)
                     : (ml + w - mr) / 2;
    };
    auto sy = [&](double v) { return h - mb - (h - mt - mb) * (v - lo) / (hi - lo); };

    canvas.line(ml, h - mb, w - mr, h - mb, "#333");
    canvas.line(ml, mt, ml, h - mb, "#333");

    std::string band = "M";
    for (std::size_t i = 0; i < n; ++i) {
        band += detail::num(sx(i)) + " " +
                detail::num(sy(report.steps[i].mean_auc + report.steps[i].std_auc)) + " L";
    }
    for (std::size_t i = n; i-- > 0;) {
        band += detail::num(sx(i)) + " " +
                detail::num(sy(report.steps[i].mean_auc - report.steps[i].std_auc));
        if (i) band += " L";
    }
    band += " Z";
    canvas.path(band, "none", "#88aadd", 0.35);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        canvas.line(sx(i), sy(report.steps[i].mean_auc), sx(i + 1),
                    sy(report.steps[i + 1].mean_auc), "#2255aa", 2.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const bool best = report.steps[i].feature_count == report.best_count;
        canvas.circle(sx(i), sy(report.steps[i].mean_auc), best ? 5.0 : 3.0,
                      best ? "#cc3333" : "#2255aa");
        canvas.text(sx(i), h - mb + 16, std::to_string(report.steps[i].feature_count), 10,
                    "middle");
    }
    canvas.text(ml - 8, sy(lo + pad) + 4, detail::num(lo + pad), 10, "end");
    canvas.text(ml - 8, sy(hi - pad) + 4, detail::num(hi - pad), 10, "end");
    canvas.text((ml + w - mr) / 2, h - 12, "features retained", 12, "middle");
    canvas.text(14, mt - 10, "validation ROC-AUC (mean +- std), best in red", 12);
    return canvas.finish();
}

inline std::string roc_plot(const RocCurve& curve, double auc) {
    const double w = 420, h = 420, m = 45;
    detail::Canvas canvas(w, h);
    auto sx = [&](double v) { return m + (w - 2 * m) * v; };
    auto sy = [&](double v) { return h - m - (h - 2 * m) * v; };
    canvas.line(sx(0), sy(0), sx(1), sy(0), "#333");
    canvas.line(sx(0), sy(0), sx(0), sy(1), "#333");
    canvas.line(sx(0), sy(0), sx(1), sy(1), "#bbb");
    for (std::size_t i = 1; i < curve.fpr.size(); ++i) {
        canvas.line(sx(curve.fpr[i - 1]), sy(curve.tpr[i - 1]), sx(curve.fpr[i]),
                    sy(curve.tpr[i]), "#2255aa", 2.0);
    }
    canvas.text(w / 2, h - 10, "false positive rate", 12, "middle");
    canvas.text(w / 2, 18, "ROC  AUC=" + detail::num(auc), 12, "middle");
    return canvas.finish();
}

// One row per feature (global-importance order, strongest at the top); each
// instance is a dot placed by its attribution, colored by its feature value.
// Vertical spread is a deterministic function of the point's rank.
inline std::string beeswarm(const Explanation& expl, std::size_t top_k) {
    const auto imp = global_importance(expl);
    const std::size_t k = std::min(top_k, imp.size());
    const double row_h = 34, w = 680, ml = 170, mr = 30, mt = 30;
    const double h = mt + row_h * static_cast<double>(k) + 40;
    detail::Canvas canvas(w, h);

    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < expl.n(); ++i) {
        for (std::size_t j = 0; j < expl.p(); ++j) {
            lo = std::min(lo, expl.shap(i, j));
            hi = std::max(hi, expl.shap(i, j));
        }
    }
    if (hi == lo) hi = lo + 1.0;
    auto sx = [&](double v) { return ml + (w - ml - mr) * (v - lo) / (hi - lo); };

    canvas.line(sx(0), mt - 6, sx(0), h - 34, "#999");
    for (std::size_t r = 0; r < k; ++r) {
        const auto it = std::find(expl.feature_names.begin(), expl.feature_names.end(),
                                  imp[r].first);
        const auto fj = static_cast<std::size_t>(it - expl.feature_names.begin());
        const double cy = mt + row_h * (static_cast<double>(r) + 0.5);
        canvas.text(ml - 8, cy + 4, imp[r].first, 11, "end");

        double vlo = expl.x(0, fj), vhi = expl.x(0, fj);
        for (std::size_t i = 1; i < expl.n(); ++i) {
            vlo = std::min(vlo, expl.x(i, fj));
            vhi = std::max(vhi, expl.x(i, fj));
        }
        for (std::size_t i = 0; i < expl.n(); ++i) {
            const double t = vhi > vlo ? (expl.x(i, fj) - vlo) / (vhi - vlo) : 0.5;
            // deterministic triangular offset keyed to the row index
            const double frac = static_cast<double>((i * 2654435761u) % 1000) / 1000.0;
            const double dy = (frac - 0.5) * row_h * 0.7;
            canvas.circle(sx(expl.shap(i, fj)), cy + dy, 2.2, detail::ramp(t), 0.8);
        }
    }
    canvas.text(w / 2, h - 12, "attribution (log-odds)", 12, "middle");
    canvas.text(14, 16, "blue = low feature value, red = high", 11);
    return canvas.finish();
}

// Attribution matrix, instances ordered by ascending margin along x.
inline std::string heatmap(const Explanation& expl, std::size_t top_k) {
    const auto imp = global_importance(expl);
    const std::size_t k = std::min(top_k, imp.size());
    const double cell_h = 16, ml = 170, mr = 20, mt = 60, w = 720;
    const double plot_w = w - ml - mr;
    const double h = mt + cell_h * static_cast<double>(k) + 30;
    detail::Canvas canvas(w, h);

    std::vector<std::size_t> order(expl.n());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return expl.margins[a] < expl.margins[b];
    });

    double mabs = 0.0;
    for (std::size_t i = 0; i < expl.n(); ++i) {
        for (std::size_t j = 0; j < expl.p(); ++j) mabs = std::max(mabs, std::abs(expl.shap(i, j)));
    }
    if (mabs == 0.0) mabs = 1.0;

    const double cw = plot_w / static_cast<double>(expl.n());
    for (std::size_t r = 0; r < k; ++r) {
        const auto it = std::find(expl.feature_names.begin(), expl.feature_names.end(),
                                  imp[r].first);
        const auto fj = static_cast<std::size_t>(it - expl.feature_names.begin());
        canvas.text(ml - 8, mt + cell_h * (static_cast<double>(r) + 0.7), imp[r].first, 10, "end");
        for (std::size_t c = 0; c < expl.n(); ++c) {
            const double v = expl.shap(order[c], fj);
            canvas.rect(ml + cw * static_cast<double>(c), mt + cell_h * static_cast<double>(r),
                        cw + 0.3, cell_h, detail::ramp(0.5 + 0.5 * v / mabs));
        }
    }

    // margin trace above the matrix
    double mlo = expl.margins[order.front()], mhi = expl.margins[order.back()];
    if (mhi == mlo) mhi = mlo + 1.0;
    for (std::size_t c = 0; c + 1 < expl.n(); ++c) {
        auto ty = [&](std::size_t i) {
            return mt - 10 - 36 * (expl.margins[order[i]] - mlo) / (mhi - mlo);
        };
        canvas.line(ml + cw * (static_cast<double>(c) + 0.5), ty(c),
                    ml + cw * (static_cast<double>(c) + 1.5), ty(c + 1), "#555");
    }
    canvas.text(w / 2, h - 8, "instances (ascending f(x))", 11, "middle");
    return canvas.finish();
}

inline std::string dependence(const DependenceData& dep, const Explanation& expl) {
    const double w = 520, h = 420, m = 55;
    detail::Canvas canvas(w, h);

    double xlo = dep.points[0].x_value, xhi = xlo, ylo = dep.points[0].shap_value, yhi = ylo;
    double ilo = dep.points[0].interaction_value, ihi = ilo;
    for (const DependencePoint& pt : dep.points) {
        xlo = std::min(xlo, pt.x_value);
        xhi = std::max(xhi, pt.x_value);
        ylo = std::min(ylo, pt.shap_value);
        yhi = std::max(yhi, pt.shap_value);
        ilo = std::min(ilo, pt.interaction_value);
        ihi = std::max(ihi, pt.interaction_value);
    }
    if (xhi == xlo) xhi = xlo + 1.0;
    if (yhi == ylo) yhi = ylo + 1.0;
    auto sx = [&](double v) { return m + (w - 2 * m) * (v - xlo) / (xhi - xlo); };
    auto sy = [&](double v) { return h - m - (h - 2 * m) * (v - ylo) / (yhi - ylo); };

    canvas.line(m, h - m, w - m, h - m, "#333");
    canvas.line(m, m, m, h - m, "#333");
    for (const DependencePoint& pt : dep.points) {
        const double t = ihi > ilo ? (pt.interaction_value - ilo) / (ihi - ilo) : 0.5;
        canvas.circle(sx(pt.x_value), sy(pt.shap_value), 3.0, detail::ramp(t), 0.8);
    }
    canvas.text(w / 2, h - 14, expl.feature_names[dep.feature_index], 12, "middle");
    const std::string color_label =
        dep.interaction_feature_index >= 0
            ? "colored by " +
                  expl.feature_names[static_cast<std::size_t>(dep.interaction_feature_index)]
            : "no interaction feature (too few rows)";
    canvas.text(w / 2, 18, color_label, 11, "middle");
    return canvas.finish();
}

// Horizontal waterfall from base value to f(x).
inline std::string force(const ForceDecomposition& fd) {
    const double w = 640, bar_h = 22, ml = 250, mr = 30, mt = 40;
    const std::size_t rows = fd.top.size() + (fd.other_count > 0 ? 1 : 0);
    const double h = mt + bar_h * static_cast<double>(rows) + 60;
    detail::Canvas canvas(w, h);

    double running = fd.base_value, lo = fd.base_value, hi = fd.base_value;
    for (const ForceTerm& t : fd.top) {
        running += t.phi;
        lo = std::min(lo, running);
        hi = std::max(hi, running);
    }
    running += fd.other_phi;
    lo = std::min(lo, running);
    hi = std::max(hi, running);
    if (hi == lo) hi = lo + 1.0;
    const double pad = (hi - lo) * 0.08;
    lo -= pad;
    hi += pad;
    auto sx = [&](double v) { return ml + (w - ml - mr) * (v - lo) / (hi - lo); };

    canvas.text(14, 20, "base " + detail::num(fd.base_value) + "  ->  f(x) " +
                            detail::num(fd.margin),
                12);
    double cursor = fd.base_value;
    double y = mt;
    auto draw = [&](const std::string& label, double phi) {
        const double x0 = sx(cursor), x1 = sx(cursor + phi);
        canvas.rect(std::min(x0, x1), y + 3, std::max(1.0, std::abs(x1 - x0)), bar_h - 6,
                    phi >= 0 ? "#cc3333" : "#2255aa", 0.85);
        canvas.text(ml - 8, y + bar_h - 7, label, 11, "end");
        cursor += phi;
        y += bar_h;
    };
    for (const ForceTerm& t : fd.top) {
        draw(t.feature + " = " + detail::num(t.x_value) + "  (" + detail::num(t.phi) + ")", t.phi);
    }
    if (fd.other_count > 0) {
        draw(std::to_string(fd.other_count) + " other features (" + detail::num(fd.other_phi) +
                 ")",
             fd.other_phi);
    }
    canvas.line(sx(fd.margin), mt - 6, sx(fd.margin), y + 6, "#111");
    return canvas.finish();
}

}  // namespace crashml::svg
