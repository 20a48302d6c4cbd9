#pragma once

#include <cstddef>
#include <span>

namespace talkface::nn {

// Graph-free reference forms of the training losses.

/// Mean over every coordinate of |dx|, y_weight*|dy|, |dz|. Inputs are
/// flattened N x P x 3 arrays.
double weighted_l1(std::span<const double> pred, std::span<const double> target, double y_weight);

/// -log p[target] for a probability vector.
double cross_entropy(std::span<const double> probabilities, std::size_t target);

/// Mean of per-row cross-entropies; probabilities is rows x classes.
double cross_entropy(std::span<const double> probabilities, std::span<const std::size_t> targets,
                     std::size_t classes);

}  // namespace talkface::nn
