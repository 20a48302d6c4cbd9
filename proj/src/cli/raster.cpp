#include "talkface/raster.hpp"

#include <algorithm>
#include <cmath>

#include "talkface/error.hpp"
#include "talkface/hash.hpp"

namespace talkface::raster {

Image::Image(int width, int height, Rgb background)
  : w_(width), h_(height)
{
    require(width > 0 && height > 0, ErrorKind::domain, "image size must be positive");
    px_.resize(static_cast<std::size_t>(w_) * h_ * 3);
    for (std::size_t i = 0; i < px_.size(); i += 3)
        std::copy(background.begin(), background.end(), px_.begin() + static_cast<long>(i));
}

Rgb Image::at(int x, int y) const
{
    require(x >= 0 && y >= 0 && x < w_ && y < h_, ErrorKind::domain, "pixel out of range");
    const auto* p = &px_[(static_cast<std::size_t>(y) * w_ + x) * 3];
    return {p[0], p[1], p[2]};
}

void Image::set(int x, int y, Rgb c)
{
    if (x < 0 || y < 0 || x >= w_ || y >= h_)
        return;
    std::copy(c.begin(), c.end(), px_.begin() + static_cast<long>((static_cast<std::size_t>(y) * w_ + x) * 3));
}

void Image::line(double x0, double y0, double x1, double y1, Rgb c)
{
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(x1) || !std::isfinite(y1))
        return;
    // DDA with one sample per pixel along the major axis.
    const double steps = std::ceil(std::max({std::abs(x1 - x0), std::abs(y1 - y0), 1.0}));
    if (steps > 4.0 * (w_ + h_))
        return;
    for (int i = 0; i <= static_cast<int>(steps); ++i) {
        const double t = i / steps;
        set(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
    }
}

void Image::disc(double cx, double cy, double radius, Rgb c)
{
    if (!std::isfinite(cx) || !std::isfinite(cy))
        return;
    const int r = static_cast<int>(std::ceil(radius));
    const int x = static_cast<int>(std::lround(cx)), y = static_cast<int>(std::lround(cy));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            if (dx * dx + dy * dy <= radius * radius)
                set(x + dx, y + dy, c);
}

void Image::fill_rect(int x0, int y0, int x1, int y1, Rgb c)
{
    for (int y = std::max(0, y0); y < std::min(h_, y1); ++y)
        for (int x = std::max(0, x0); x < std::min(w_, x1); ++x)
            set(x, y, c);
}

std::string Image::ppm() const
{
    std::string out = "P6\n" + std::to_string(w_) + " " + std::to_string(h_) + "\n255\n";
    out.append(reinterpret_cast<const char*>(px_.data()), px_.size());
    return out;
}

void Image::write_ppm(const std::filesystem::path& path) const
{
    write_file(path, ppm());
}

}  // namespace talkface::raster
