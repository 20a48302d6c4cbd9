#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "talkface/vec3.hpp"

namespace talkface::gaze {

inline constexpr int kRows = 2;
inline constexpr int kCols = 5;
inline constexpr int kZones = kRows * kCols;  // S
inline constexpr int kJointClasses = kZones * kZones;

/// Zone the box center falls into (row 0, col 2 under the lower-index tie-break).
inline constexpr int kCenterZone = 2;

/// Axis-aligned eye box split into 2 rows x 5 columns; zone = row * 5 + col.
/// Rows run along +y, columns along +x.
struct EyeGrid {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;

    double cell_width() const { return (x_max - x_min) / kCols; }
    double cell_height() const { return (y_max - y_min) / kRows; }
};

struct GazeLabel {
    int left = 0;
    int right = 0;
    int joint = 0;  // left + kZones * right

    friend constexpr bool operator==(const GazeLabel&, const GazeLabel&) = default;
};

struct GazeDistribution {
    std::array<long, kZones> counts{};
    std::array<double, kZones> frequencies{};
};

struct EyeDistributions {
    GazeDistribution left;
    GazeDistribution right;
};

/// Bounding box of the eye-ring points. Throws geometry error when the ring
/// has fewer than 4 points or spans zero area.
EyeGrid build_eye_grid(std::span<const Vec2> ring);

/// Containing cell; points outside the box clamp to the nearest cell and
/// interior boundaries belong to the lower-indexed cell.
int assign_zone(Vec2 pupil, const EyeGrid& grid);

Vec2 place_pupil(int zone, const EyeGrid& grid);

int encode_joint(int left, int right);
GazeLabel decode_joint(int joint);
GazeLabel make_label(int left, int right);

/// Checks per-eye ranges and the joint identity.
void validate(const GazeLabel& label);

/// Index of the largest entry, lowest index on ties. Accepts any non-negative
/// finite scores, so it is invariant under positive rescaling.
int argmax_class(std::span<const double> scores);

/// argmax over a 100-class distribution (non-negative, sums to 1 within 1e-6).
GazeLabel classify_gaze(std::span<const double> probabilities);

EyeDistributions gaze_distribution(std::span<const GazeLabel> labels);

}  // namespace talkface::gaze
