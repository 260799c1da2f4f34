#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rotor/io/csv.hpp"

namespace rotor::io {

// Minimal static vector-graphics plotting: line series and scatter clouds
// on linear or log10 axes. Output is deterministic for identical data.
class SvgPlot {
public:
    SvgPlot(std::string title, std::string x_label, std::string y_label, bool log_x, bool log_y)
        : title_(std::move(title)),
          x_label_(std::move(x_label)),
          y_label_(std::move(y_label)),
          log_x_(log_x),
          log_y_(log_y) {}

    void add_line(const std::vector<std::array<double, 2>>& pts, const std::string& color,
                  const std::string& name) {
        series_.push_back({pts, color, name, false});
    }
    void add_scatter(const std::vector<std::array<double, 2>>& pts, const std::string& color,
                     const std::string& name) {
        series_.push_back({pts, color, name, true});
    }

    // Clamp the plotted y range from below (log plots of probabilities use
    // a fixed floor so the noise floor stays visible but bounded).
    void set_y_floor(double y) { y_floor_ = y; }

    void write(const std::filesystem::path& path) const {
        double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;
        bool first = true;
        for (const auto& s : series_)
            for (const auto& p : s.pts) {
                const double x = tx(p[0]), y = ty(std::max(p[1], y_floor_));
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                if (first) {
                    x_lo = x_hi = x;
                    y_lo = y_hi = y;
                    first = false;
                } else {
                    x_lo = std::min(x_lo, x);
                    x_hi = std::max(x_hi, x);
                    y_lo = std::min(y_lo, y);
                    y_hi = std::max(y_hi, y);
                }
            }
        if (x_hi <= x_lo) x_hi = x_lo + 1;
        if (y_hi <= y_lo) y_hi = y_lo + 1;
        const double xpad = 0.03 * (x_hi - x_lo), ypad = 0.05 * (y_hi - y_lo);
        x_lo -= xpad;
        x_hi += xpad;
        y_lo -= ypad;
        y_hi += ypad;

        std::string body;
        body += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) +
                "\" height=\"" + std::to_string(height_) + "\" viewBox=\"0 0 " +
                std::to_string(width_) + " " + std::to_string(height_) + "\">\n";
        body += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        body += "<text x=\"" + std::to_string(width_ / 2) +
                "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" + title_ + "</text>\n";

        auto px = [&](double x) { return ml_ + (x - x_lo) / (x_hi - x_lo) * (width_ - ml_ - mr_); };
        auto py = [&](double y) {
            return height_ - mb_ - (y - y_lo) / (y_hi - y_lo) * (height_ - mt_ - mb_);
        };

        // frame
        body += "<rect x=\"" + fmt(ml_) + "\" y=\"" + fmt(mt_) + "\" width=\"" +
                fmt(width_ - ml_ - mr_) + "\" height=\"" + fmt(height_ - mt_ - mb_) +
                "\" fill=\"none\" stroke=\"black\"/>\n";

        // ticks
        for (double t : ticks(x_lo, x_hi, log_x_)) {
            const double x = px(t);
            body += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(height_ - mb_) + "\" x2=\"" + fmt(x) +
                    "\" y2=\"" + fmt(height_ - mb_ + 4) + "\" stroke=\"black\"/>\n";
            body += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(height_ - mb_ + 16) +
                    "\" text-anchor=\"middle\" font-size=\"10\">" + tick_label(t, log_x_) +
                    "</text>\n";
        }
        for (double t : ticks(y_lo, y_hi, log_y_)) {
            const double y = py(t);
            body += "<line x1=\"" + fmt(ml_ - 4) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(ml_) +
                    "\" y2=\"" + fmt(y) + "\" stroke=\"black\"/>\n";
            body += "<text x=\"" + fmt(ml_ - 6) + "\" y=\"" + fmt(y + 3) +
                    "\" text-anchor=\"end\" font-size=\"10\">" + tick_label(t, log_y_) + "</text>\n";
        }
        body += "<text x=\"" + std::to_string(width_ / 2) + "\" y=\"" + fmt(height_ - 6) +
                "\" text-anchor=\"middle\" font-size=\"12\">" + x_label_ + "</text>\n";
        body += "<text x=\"14\" y=\"" + std::to_string(height_ / 2) +
                "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
                std::to_string(height_ / 2) + ")\">" + y_label_ + "</text>\n";

        int legend_row = 0;
        for (const auto& s : series_) {
            if (s.scatter) {
                std::string pts;
                for (const auto& p : s.pts) {
                    const double x = tx(p[0]), y = ty(std::max(p[1], y_floor_));
                    if (!std::isfinite(x) || !std::isfinite(y)) continue;
                    pts += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
                           "\" r=\"0.7\" fill=\"" + s.color + "\"/>\n";
                }
                body += pts;
            } else {
                std::string pts = "<polyline fill=\"none\" stroke=\"" + s.color +
                                  "\" stroke-width=\"1.2\" points=\"";
                for (const auto& p : s.pts) {
                    const double x = tx(p[0]), y = ty(std::max(p[1], y_floor_));
                    if (!std::isfinite(x) || !std::isfinite(y)) continue;
                    pts += fmt(px(x)) + "," + fmt(py(y)) + " ";
                }
                pts += "\"/>\n";
                body += pts;
            }
            if (!s.name.empty()) {
                const double lx = width_ - mr_ - 150, ly = mt_ + 14 + 14 * legend_row++;
                body += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
                        fmt(lx + 18) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + s.color +
                        "\" stroke-width=\"2\"/>\n";
                body += "<text x=\"" + fmt(lx + 22) + "\" y=\"" + fmt(ly) + "\" font-size=\"11\">" +
                        s.name + "</text>\n";
            }
        }
        body += "</svg>\n";

        auto out = open_output(path);
        out << body;
        if (!out) throw IoError("write failed: " + path.string());
    }

private:
    struct Entry {
        std::vector<std::array<double, 2>> pts;
        std::string color;
        std::string name;
        bool scatter;
    };

    double tx(double v) const { return log_x_ ? std::log10(v) : v; }
    double ty(double v) const { return log_y_ ? std::log10(v) : v; }

    static std::string fmt(double v) {
        // one decimal of pixel precision keeps files compact and stable
        const double r = std::round(v * 10.0) / 10.0;
        std::string s = format_double(r);
        return s;
    }

    static std::vector<double> ticks(double lo, double hi, bool log_axis) {
        std::vector<double> out;
        if (log_axis) {
            for (double d = std::ceil(lo); d <= std::floor(hi); d += 1.0) out.push_back(d);
            // thin to at most 12 labels
            while (out.size() > 12) {
                std::vector<double> thin;
                for (std::size_t i = 0; i < out.size(); i += 2) thin.push_back(out[i]);
                out = thin;
            }
            return out;
        }
        const double span = hi - lo;
        const double raw = span / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (raw <= m * mag) {
                step = m * mag;
                break;
            }
        for (double t = std::ceil(lo / step) * step; t <= hi; t += step) out.push_back(t);
        return out;
    }

    static std::string tick_label(double t, bool log_axis) {
        if (log_axis) return "1e" + format_double(t);
        const double r = std::round(t * 1e6) / 1e6; // strip tick-step rounding dust
        return format_double(r);
    }

    std::string title_, x_label_, y_label_;
    bool log_x_, log_y_;
    double y_floor_ = -1e308;
    std::vector<Entry> series_;
    int width_ = 720, height_ = 520;
    double ml_ = 64, mr_ = 16, mt_ = 30, mb_ = 44;
};

} // namespace rotor::io
