#pragma once

#include <array>
#include <span>
#include <vector>

#include "talkface/gaze.hpp"
#include "talkface/landmark_index.hpp"
#include "talkface/vec3.hpp"

namespace talkface::geometry {

using Landmarks = std::array<Vec3, landmarks::kCount>;

inline constexpr double kDefaultCanonicalWidth = 1.0;
inline constexpr double kDefaultScaleFactor = 128.0;

/// Detector output: 478 points in image space.
struct RawLandmarkFrame {
    std::vector<Vec3> points;
    int frame_index = 0;
};

/// Nose tip at the origin, frontal, inter-cheek distance == canonical_width.
struct NormalizedLandmarkFrame {
    Landmarks points{};
    double canonical_width = kDefaultCanonicalWidth;
};

/// Angles in radians, wrapped to (-pi, pi]. Translation is applied in image
/// space after scaling.
struct HeadPose {
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;
    Vec3 translation{};

    /// [yaw, pitch, roll, dx, dy, dz]
    std::array<double, 6> to_array() const;
    static HeadPose from_array(std::span<const double> v);

    friend bool operator==(const HeadPose&, const HeadPose&) = default;
};

struct RotationMatrix {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major

    double operator()(int r, int c) const { return m[static_cast<std::size_t>(r * 3 + c)]; }
    Vec3 apply(Vec3 v) const;
    RotationMatrix transpose() const;
    double determinant() const;
};

struct RelocatedLandmarkFrame {
    Landmarks points{};
    HeadPose source_pose;
    gaze::GazeLabel source_gaze;
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

Landmarks select_147(const RawLandmarkFrame& raw);
Landmarks select_147(std::span<const Vec3> raw);

/// R = Rz(roll) * Ry(yaw) * Rx(pitch).
RotationMatrix euler_to_rotation(double yaw, double pitch, double roll);
RotationMatrix rotation(const HeadPose& pose);

double face_width(const Landmarks& points);

/// Nose tip to origin, undo the pose rotation, scale to canonical_width.
NormalizedLandmarkFrame normalize_frame(const Landmarks& frame, const HeadPose& pose,
                                        double canonical_width = kDefaultCanonicalWidth);

/// Moves both iris groups so their centers sit at the gaze-zone centers of
/// grids built from the current eye rings. z is untouched.
Landmarks place_pupils(const Landmarks& points, const gaze::GazeLabel& label);

/// R = scale * M(pose) * place_pupils(C) + translation.
RelocatedLandmarkFrame relocate(const NormalizedLandmarkFrame& norm, const HeadPose& pose,
                                const gaze::GazeLabel& label, double scale_factor = kDefaultScaleFactor);

gaze::EyeGrid left_eye_grid(const Landmarks& points);
gaze::EyeGrid right_eye_grid(const Landmarks& points);

/// Gaze label read off the current iris centers.
gaze::GazeLabel measure_gaze(const Landmarks& points);

/// Mean of left and right upper-to-lower lid distances.
double eye_opening(const Landmarks& points);

/// Recenters and rescales an arbitrary (e.g. generated) frame so the
/// normalization invariants hold again; rotation is left alone.
NormalizedLandmarkFrame renormalize(const Landmarks& points, double canonical_width = kDefaultCanonicalWidth);

}  // namespace talkface::geometry
