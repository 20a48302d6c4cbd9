#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "talkface/neural/graph.hpp"
#include "talkface/neural/tensor.hpp"

namespace talkface::nn {

/// Builds a scalar-valued graph from the current parameter values.
using ScalarGraphFn = std::function<Var(Graph&)>;
/// Builds several scalar terms from one graph.
using TermsGraphFn = std::function<std::vector<Var>(Graph&)>;

struct GradCheckOptions {
    double step = 1e-5;
    /// Entries probed per parameter tensor; 0 checks every entry. Sampled
    /// entries are drawn from a seeded stream.
    std::size_t max_entries_per_param = 0;
    std::uint64_t seed = 7;
    /// Relative error is |a - n| / max(|a|, |n|, floor).
    double denominator_floor = 1e-6;
};

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::size_t entries_checked = 0;
    std::string worst_parameter;
};

/// Compares reverse-mode gradients against central finite differences.
/// Throws a usage error when the graph output is not a scalar.
GradCheckResult grad_check(ParameterSet& params, const ScalarGraphFn& fn, const GradCheckOptions& opts = {});

/// Same check for each term, sharing one forward pass per perturbation.
std::vector<GradCheckResult> grad_check_terms(ParameterSet& params, const TermsGraphFn& fn,
                                              const GradCheckOptions& opts = {});

}  // namespace talkface::nn
