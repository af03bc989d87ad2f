#pragma once

#include <stdexcept>
#include <string>

namespace scenebal {

// Axis-aligned box in continuous pixel coordinates, corners (x1,y1)-(x2,y2).
struct Box {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    bool valid() const { return x1 < x2 && y1 < y2; }
    double width() const { return x2 - x1; }
    double height() const { return y2 - y1; }
    double area() const { return width() * height(); }

    void require_valid(const char* what) const {
        if (!valid())
            throw std::invalid_argument(std::string(what) + ": degenerate box (" + std::to_string(x1) + "," +
                                        std::to_string(y1) + "," + std::to_string(x2) + "," + std::to_string(y2) + ")");
    }

    bool operator==(const Box&) const = default;
};

}  // namespace scenebal
