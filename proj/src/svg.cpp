#include "gfc/svg.hpp"

#include <cstdio>

namespace gfc::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

std::string escape(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (char c : raw) {
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

Document::Document(int width, int height) : width_(width), height_(height) {}

void Document::rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
             "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
}

void Document::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                    double width) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
             num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

namespace {

std::string points_attr(const std::vector<std::pair<double, double>>& pts) {
    std::string s;
    for (const auto& [x, y] : pts) {
        if (!s.empty()) s += ' ';
        s += num(x) + "," + num(y);
    }
    return s;
}

}  // namespace

void Document::polyline(const std::vector<std::pair<double, double>>& pts,
                        const std::string& stroke, double width, const std::string& cls) {
    body_ += "<polyline points=\"" + points_attr(pts) + "\" fill=\"none\" stroke=\"" + stroke +
             "\" stroke-width=\"" + num(width) + "\"";
    if (!cls.empty()) body_ += " class=\"" + cls + "\"";
    body_ += "/>\n";
}

void Document::polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
                       const std::string& cls, double opacity) {
    body_ += "<polygon points=\"" + points_attr(pts) + "\" fill=\"" + fill + "\"";
    if (opacity < 1.0) body_ += " fill-opacity=\"" + num(opacity) + "\"";
    if (!cls.empty()) body_ += " class=\"" + cls + "\"";
    body_ += "/>\n";
}

void Document::circle(double cx, double cy, double r, const std::string& fill,
                      const std::string& cls) {
    body_ += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(r) +
             "\" fill=\"" + fill + "\"";
    if (!cls.empty()) body_ += " class=\"" + cls + "\"";
    body_ += "/>\n";
}

void Document::text(double x, double y, const std::string& content, int size,
                    const std::string& anchor, const std::string& fill) {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" +
             std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
             "\" fill=\"" + fill + "\">" + escape(content) + "</text>\n";
}

std::string Document::str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width_) +
           "\" height=\"" + std::to_string(height_) + "\" viewBox=\"0 0 " +
           std::to_string(width_) + " " + std::to_string(height_) + "\">\n" + body_ + "</svg>\n";
}

}  // namespace gfc::svg
