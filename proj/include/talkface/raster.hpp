#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace talkface::raster {

using Rgb = std::array<std::uint8_t, 3>;

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kGrey{160, 160, 160};
inline constexpr Rgb kRed{200, 40, 40};
inline constexpr Rgb kGreen{40, 150, 60};
inline constexpr Rgb kBlue{40, 70, 200};

/// 8-bit RGB canvas; drawing outside the bounds is clipped.
class Image {
public:
    Image(int width, int height, Rgb background = kWhite);

    int width() const { return w_; }
    int height() const { return h_; }
    Rgb at(int x, int y) const;

    void set(int x, int y, Rgb c);
    void line(double x0, double y0, double x1, double y1, Rgb c);
    void disc(double cx, double cy, double radius, Rgb c);
    void fill_rect(int x0, int y0, int x1, int y1, Rgb c);

    /// Binary P6.
    std::string ppm() const;
    void write_ppm(const std::filesystem::path& path) const;

private:
    int w_;
    int h_;
    std::vector<std::uint8_t> px_;
};

}  // namespace talkface::raster
