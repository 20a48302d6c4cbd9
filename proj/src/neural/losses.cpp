#include "talkface/neural/losses.hpp"

#include <cmath>
#include <string>

#include "talkface/error.hpp"

namespace talkface::nn {

double weighted_l1(std::span<const double> pred, std::span<const double> target, double y_weight)
{
    require(pred.size() == target.size(), ErrorKind::structural, "weighted_l1: shape mismatch");
    require(!pred.empty() && pred.size() % 3 == 0, ErrorKind::structural, "weighted_l1 expects xyz triples");
    require(y_weight >= 1.0, ErrorKind::domain, "y_weight must be >= 1");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += (i % 3 == 1 ? y_weight : 1.0) * std::abs(pred[i] - target[i]);
    return acc / static_cast<double>(pred.size());
}

double cross_entropy(std::span<const double> probabilities, std::size_t target)
{
    require(target < probabilities.size(), ErrorKind::domain,
            "cross-entropy target " + std::to_string(target) + " out of range");
    return -std::log(probabilities[target]);
}

double cross_entropy(std::span<const double> probabilities, std::span<const std::size_t> targets,
                     std::size_t classes)
{
    require(classes > 0 && probabilities.size() == targets.size() * classes && !targets.empty(),
            ErrorKind::structural, "cross-entropy batch shape mismatch");
    double acc = 0.0;
    for (std::size_t r = 0; r < targets.size(); ++r)
        acc += cross_entropy(probabilities.subspan(r * classes, classes), targets[r]);
    return acc / static_cast<double>(targets.size());
}

}  // namespace talkface::nn
