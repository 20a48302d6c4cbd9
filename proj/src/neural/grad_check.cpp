#include "talkface/neural/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "talkface/error.hpp"

namespace talkface::nn {

namespace {

std::vector<double> evaluate(const ParameterSet& params, const TermsGraphFn& fn)
{
    Graph g(params);
    std::vector<double> out;
    for (const Var v : fn(g))
        out.push_back(g.scalar(v));
    return out;
}

}  // namespace

std::vector<GradCheckResult> grad_check_terms(ParameterSet& params, const TermsGraphFn& fn, const GradCheckOptions& opts)
{
    std::vector<Gradients> analytic;
    {
        Graph probe(params);
        const std::size_t terms = fn(probe).size();
        require(terms > 0, ErrorKind::usage, "grad_check needs at least one term");
        // one graph per term so each backward pass starts clean
        for (std::size_t t = 0; t < terms; ++t) {
            Graph g(params);
            const Var root = fn(g)[t];
            require(g.size(root) == 1, ErrorKind::usage, "grad_check needs scalar-valued terms");
            analytic.emplace_back(params);
            g.backward(root, analytic.back());
        }
    }

    std::vector<GradCheckResult> results(analytic.size());
    std::mt19937_64 rng(opts.seed);
    for (ParamId p = 0; p < params.size(); ++p) {
        auto& values = params[p].value.values;
        std::vector<std::size_t> entries(values.size());
        std::iota(entries.begin(), entries.end(), std::size_t{0});
        if (opts.max_entries_per_param > 0 && entries.size() > opts.max_entries_per_param) {
            std::shuffle(entries.begin(), entries.end(), rng);
            entries.resize(opts.max_entries_per_param);
        }
        for (std::size_t i : entries) {
            const double saved = values[i];
            values[i] = saved + opts.step;
            const auto up = evaluate(params, fn);
            values[i] = saved - opts.step;
            const auto down = evaluate(params, fn);
            values[i] = saved;

            for (std::size_t t = 0; t < results.size(); ++t) {
                const double numeric = (up[t] - down[t]) / (2.0 * opts.step);
                const double a = analytic[t][p][i];
                const double denom = std::max({std::abs(a), std::abs(numeric), opts.denominator_floor});
                const double rel = std::abs(a - numeric) / denom;
                GradCheckResult& r = results[t];
                ++r.entries_checked;
                if (rel > r.max_relative_error) {
                    r.max_relative_error = rel;
                    r.worst_parameter = params[p].name + "[" + std::to_string(i) + "]";
                }
            }
        }
    }
    return results;
}

GradCheckResult grad_check(ParameterSet& params, const ScalarGraphFn& fn, const GradCheckOptions& opts)
{
    return grad_check_terms(params, [&](Graph& g) { return std::vector<Var>{fn(g)}; }, opts).front();
}

}  // namespace talkface::nn
