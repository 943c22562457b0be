#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace pulseframe {

/// 8-bit interleaved RGB, row-major, no padding.
struct ImageRgb8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // 3 * width * height

    const std::uint8_t* pixel(int x, int y) const {
        return data.data() + 3 * (static_cast<std::size_t>(y) * width + x);
    }
};

struct ImageGray8 {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data; // width * height

    std::uint8_t at(int x, int y) const {
        return data[static_cast<std::size_t>(y) * width + x];
    }
    std::uint8_t& at(int x, int y) {
        return data[static_cast<std::size_t>(y) * width + x];
    }
};

/// Rec. 601 luma, rounded to the nearest integer.
ImageGray8 to_gray(const ImageRgb8& img);

} // namespace pulseframe
