#include "talkface/landmark_index.hpp"

namespace talkface::landmarks {

namespace {

constexpr std::array<std::size_t, kMouth.count> make_mouth()
{
    std::array<std::size_t, kMouth.count> out{};
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = kMouth.first + i;
    return out;
}

constexpr auto kMouthPositions = make_mouth();

}  // namespace

std::span<const std::size_t> mouth_positions()
{
    return kMouthPositions;
}

}  // namespace talkface::landmarks
