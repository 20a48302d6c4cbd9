#include "talkface/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "talkface/error.hpp"

namespace talkface::gaze {

namespace {

int cell_index(double offset, double cell, int count)
{
    // Interior boundaries go to the lower cell: (k*cell, (k+1)*cell] -> k.
    const int k = static_cast<int>(std::ceil(offset / cell)) - 1;
    return std::clamp(k, 0, count - 1);
}

void check_zone(int zone, const char* what)
{
    require(zone >= 0 && zone < kZones, ErrorKind::domain,
            std::string(what) + " zone out of range: " + std::to_string(zone));
}

}  // namespace

EyeGrid build_eye_grid(std::span<const Vec2> ring)
{
    require(ring.size() >= 4, ErrorKind::geometry, "eye ring needs at least 4 points");
    EyeGrid g{ring[0].x, ring[0].x, ring[0].y, ring[0].y};
    for (const Vec2& p : ring) {
        require(std::isfinite(p.x) && std::isfinite(p.y), ErrorKind::numeric, "non-finite eye ring point");
        g.x_min = std::min(g.x_min, p.x);
        g.x_max = std::max(g.x_max, p.x);
        g.y_min = std::min(g.y_min, p.y);
        g.y_max = std::max(g.y_max, p.y);
    }
    const double extent = std::max(g.x_max - g.x_min, g.y_max - g.y_min);
    require(g.x_max - g.x_min > 1e-12 * std::max(1.0, extent) && g.y_max - g.y_min > 1e-12 * std::max(1.0, extent),
            ErrorKind::geometry, "eye ring spans zero area");

    // Collinear rings have a non-degenerate box when the line is slanted.
    std::size_t far = 1;
    double far_d = 0.0;
    for (std::size_t i = 1; i < ring.size(); ++i) {
        const double d = std::hypot(ring[i].x - ring[0].x, ring[i].y - ring[0].y);
        if (d > far_d) {
            far_d = d;
            far = i;
        }
    }
    const double dx = ring[far].x - ring[0].x;
    const double dy = ring[far].y - ring[0].y;
    double max_off = 0.0;
    for (const Vec2& p : ring)
        max_off = std::max(max_off, std::abs(dx * (p.y - ring[0].y) - dy * (p.x - ring[0].x)) / far_d);
    require(max_off > 1e-9 * far_d, ErrorKind::geometry, "eye ring points are collinear");
    return g;
}

int assign_zone(Vec2 pupil, const EyeGrid& grid)
{
    const int col = cell_index(pupil.x - grid.x_min, grid.cell_width(), kCols);
    const int row = cell_index(pupil.y - grid.y_min, grid.cell_height(), kRows);
    return row * kCols + col;
}

Vec2 place_pupil(int zone, const EyeGrid& grid)
{
    check_zone(zone, "pupil");
    const int row = zone / kCols;
    const int col = zone % kCols;
    return {grid.x_min + (col + 0.5) * grid.cell_width(), grid.y_min + (row + 0.5) * grid.cell_height()};
}

int encode_joint(int left, int right)
{
    check_zone(left, "left");
    check_zone(right, "right");
    return left + kZones * right;
}

GazeLabel decode_joint(int joint)
{
    require(joint >= 0 && joint < kJointClasses, ErrorKind::domain,
            "joint gaze index out of range: " + std::to_string(joint));
    return {joint % kZones, joint / kZones, joint};
}

GazeLabel make_label(int left, int right)
{
    return {left, right, encode_joint(left, right)};
}

void validate(const GazeLabel& label)
{
    check_zone(label.left, "left");
    check_zone(label.right, "right");
    require(label.joint == label.left + kZones * label.right, ErrorKind::data,
            "gaze joint index " + std::to_string(label.joint) + " inconsistent with zones (" +
                std::to_string(label.left) + ", " + std::to_string(label.right) + ")");
}

int argmax_class(std::span<const double> scores)
{
    require(!scores.empty(), ErrorKind::domain, "empty score vector");
    int best = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        require(std::isfinite(scores[i]) && scores[i] >= 0.0, ErrorKind::domain, "scores must be finite and non-negative");
        if (scores[i] > scores[static_cast<std::size_t>(best)])
            best = static_cast<int>(i);
    }
    return best;
}

GazeLabel classify_gaze(std::span<const double> probabilities)
{
    require(probabilities.size() == kJointClasses, ErrorKind::domain, "gaze distribution must have 100 entries");
    const int best = argmax_class(probabilities);
    double sum = 0.0;
    for (double p : probabilities)
        sum += p;
    require(std::abs(sum - 1.0) <= 1e-6, ErrorKind::domain, "gaze probabilities do not sum to 1");
    return decode_joint(best);
}

EyeDistributions gaze_distribution(std::span<const GazeLabel> labels)
{
    require(!labels.empty(), ErrorKind::domain, "gaze distribution of an empty sequence");
    EyeDistributions out;
    for (const GazeLabel& l : labels) {
        validate(l);
        ++out.left.counts[static_cast<std::size_t>(l.left)];
        ++out.right.counts[static_cast<std::size_t>(l.right)];
    }
    const double n = static_cast<double>(labels.size());
    for (int z = 0; z < kZones; ++z) {
        out.left.frequencies[z] = static_cast<double>(out.left.counts[z]) / n;
        out.right.frequencies[z] = static_cast<double>(out.right.counts[z]) / n;
    }
    return out;
}

}  // namespace talkface::gaze
