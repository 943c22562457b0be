#include "pulseframe/image.hpp"

#include <cmath>

namespace pulseframe {

ImageGray8 to_gray(const ImageRgb8& img) {
    ImageGray8 out;
    out.width = img.width;
    out.height = img.height;
    out.data.resize(static_cast<std::size_t>(img.width) * img.height);
    const std::size_t n = out.data.size();
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t* p = img.data.data() + 3 * i;
        const double y = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        out.data[i] = static_cast<std::uint8_t>(std::lround(y));
    }
    return out;
}

} // namespace pulseframe
