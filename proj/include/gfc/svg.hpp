#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gfc::svg {

/// Minimal SVG assembler; coordinates are raw pixels, origin top-left.
class Document {
public:
    Document(int width, int height);

    void rect(double x, double y, double w, double h, const std::string& fill);
    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double width = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke,
                  double width, const std::string& cls = {});
    void polygon(const std::vector<std::pair<double, double>>& pts, const std::string& fill,
                 const std::string& cls = {}, double opacity = 1.0);
    void circle(double cx, double cy, double r, const std::string& fill,
                const std::string& cls = {});
    void text(double x, double y, const std::string& content, int size,
              const std::string& anchor = "start", const std::string& fill = "#000000");

    std::string str() const;

private:
    int width_, height_;
    std::string body_;
};

std::string escape(const std::string& raw);

}  // namespace gfc::svg
