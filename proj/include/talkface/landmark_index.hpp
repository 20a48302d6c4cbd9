#pragma once

// Frozen 147-point subset of the 478-point face mesh. The same table ships as
// data/landmarks_147.txt; tests pin its digest. Changing the order or content
// is a format break and needs a new version tag.

#include <array>
#include <cstddef>
#include <span>

namespace talkface::landmarks {

inline constexpr std::size_t kRawCount = 478;
inline constexpr std::size_t kCount = 147;
inline constexpr int kTableVersion = 1;

// clang-format off
inline constexpr std::array<int, kCount> kMeshIndex = {
    // face oval, clockwise from the forehead (positions 0..35)
    10, 338, 297, 332, 284, 251, 389, 356, 454, 323, 361, 288, 397, 365, 379, 378, 400, 377,
    152, 148, 176, 149, 150, 136, 172, 58, 132, 93, 234, 127, 162, 21, 54, 103, 67, 109,
    // left brow (36..45), right brow (46..55)
    276, 283, 282, 295, 285, 300, 293, 334, 296, 336,
    46, 53, 52, 65, 55, 70, 63, 105, 66, 107,
    // left eye ring: lower lid outer->inner (56..64), upper lid outer->inner (65..71)
    263, 249, 390, 373, 374, 380, 381, 382, 362, 466, 388, 387, 386, 385, 384, 398,
    // right eye ring: same layout (72..87)
    33, 7, 163, 144, 145, 153, 154, 155, 133, 246, 161, 160, 159, 158, 157, 173,
    // left iris center + ring (88..92), right iris center + ring (93..97)
    473, 474, 475, 476, 477,
    468, 469, 470, 471, 472,
    // nose, tip first (98..106)
    1, 2, 4, 5, 6, 98, 168, 195, 327,
    // lips: outer lower (107..117), outer upper (118..126),
    //       inner lower (127..137), inner upper (138..146)
    61, 146, 91, 181, 84, 17, 314, 405, 321, 375, 291,
    185, 40, 39, 37, 0, 267, 269, 270, 409,
    78, 95, 88, 178, 87, 14, 317, 402, 318, 324, 308,
    191, 80, 81, 82, 13, 312, 311, 310, 415,
};
// clang-format on

struct Range {
    std::size_t first;
    std::size_t count;
};

inline constexpr Range kOval{0, 36};
inline constexpr Range kLeftBrow{36, 10};
inline constexpr Range kRightBrow{46, 10};
inline constexpr Range kLeftEyeRing{56, 16};
inline constexpr Range kRightEyeRing{72, 16};
inline constexpr Range kLeftIris{88, 5};
inline constexpr Range kRightIris{93, 5};
inline constexpr Range kNose{98, 9};
inline constexpr Range kMouth{107, 40};

// Eye ring layout: 9 lower-lid points then 7 upper-lid points.
inline constexpr std::size_t kLowerLidCount = 9;

inline constexpr std::size_t kNoseTip = 98;      // mesh 1
inline constexpr std::size_t kLeftCheek = 8;     // mesh 454
inline constexpr std::size_t kRightCheek = 28;   // mesh 234
inline constexpr std::size_t kLeftIrisCenter = 88;
inline constexpr std::size_t kRightIrisCenter = 93;
inline constexpr std::size_t kLeftUpperLidMid = 68;   // mesh 386
inline constexpr std::size_t kLeftLowerLidMid = 60;   // mesh 374
inline constexpr std::size_t kRightUpperLidMid = 84;  // mesh 159
inline constexpr std::size_t kRightLowerLidMid = 76;  // mesh 145

/// Positions (into the 147 table) of the lip rings; the MLD point set.
std::span<const std::size_t> mouth_positions();

/// True for the ten iris points, which relocation overwrites.
constexpr bool is_pupil_point(std::size_t position)
{
    return position >= kLeftIris.first && position < kRightIris.first + kRightIris.count;
}

}  // namespace talkface::landmarks
