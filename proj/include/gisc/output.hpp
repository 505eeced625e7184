#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gisc {

/// Full round-trip formatting for data files.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

/// Column-oriented CSV with '.' decimal separator and round-trip doubles.
class CsvBuilder {
  public:
    explicit CsvBuilder(const std::vector<std::string>& header) {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i) text_ += ',';
            text_ += header[i];
        }
        text_ += '\n';
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i) text_ += ',';
            text_ += fmt_double(values[i]);
        }
        text_ += '\n';
    }

    [[nodiscard]] const std::string& str() const { return text_; }

  private:
    std::string text_;
};

/// Minimal deterministic SVG writer: polylines in data coordinates plus a
/// handful of fixed decorations.
class SvgPlot {
  public:
    SvgPlot(double x_min, double x_max, double y_min, double y_max, int width = 640, int height = 640)
        : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), w_(width), h_(height) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w_) +
                 "\" height=\"" + std::to_string(h_) + "\" viewBox=\"0 0 " + std::to_string(w_) + " " +
                 std::to_string(h_) + "\">\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    void axes() {
        line(px(0.0), py(y_min_), px(0.0), py(y_max_), "#bbbbbb");
        line(px(x_min_), py(0.0), px(x_max_), py(0.0), "#bbbbbb");
    }

    void line(double x1, double y1, double x2, double y2, const std::string& color) {
        body_ += "<line x1=\"" + coord(x1) + "\" y1=\"" + coord(y1) + "\" x2=\"" + coord(x2) +
                 "\" y2=\"" + coord(y2) + "\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
        body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\" points=\"";
        for (const auto& [x, y] : pts) {
            double cx = std::clamp(x, x_min_, x_max_);
            double cy = std::clamp(y, y_min_, y_max_);
            body_ += coord(px(cx)) + "," + coord(py(cy)) + " ";
        }
        body_ += "\"/>\n";
    }

    void circle(double x, double y, double r_data, const std::string& color) {
        body_ += "<circle cx=\"" + coord(px(x)) + "\" cy=\"" + coord(py(y)) + "\" r=\"" +
                 coord(r_data * double(w_) / (x_max_ - x_min_)) +
                 "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1\"/>\n";
    }

    /// The single highlighted reference marker.
    void marker(double x, double y, const std::string& id) {
        body_ += "<circle id=\"" + id + "\" cx=\"" + coord(px(x)) + "\" cy=\"" + coord(py(y)) +
                 "\" r=\"4\" fill=\"red\"/>\n";
    }

    [[nodiscard]] std::string finish() const { return body_ + "</svg>\n"; }

  private:
    [[nodiscard]] double px(double x) const { return (x - x_min_) / (x_max_ - x_min_) * w_; }
    [[nodiscard]] double py(double y) const { return (y_max_ - y) / (y_max_ - y_min_) * h_; }
    static std::string coord(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return buf;
    }

    double x_min_, x_max_, y_min_, y_max_;
    int w_, h_;
    std::string body_;
};

}  // namespace gisc
