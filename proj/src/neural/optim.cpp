#include "talkface/neural/optim.hpp"

#include <cmath>

#include "talkface/error.hpp"

namespace talkface::nn {

Adam::Adam(const ParameterSet& params, AdamConfig cfg) : cfg_(cfg)
{
    for (const Parameter& p : params.all()) {
        m_.emplace_back(p.value.size(), 0.0);
        v_.emplace_back(p.value.size(), 0.0);
    }
}

void Adam::step(ParameterSet& params, const Gradients& grads)
{
    require(params.size() == m_.size() && grads.size() == m_.size(), ErrorKind::structural,
            "optimizer state does not match parameters");
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& w = params[p].value.values;
        const auto g = grads[p];
        auto& m = m_[p];
        auto& v = v_[p];
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            w[i] -= cfg_.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.epsilon);
        }
    }
}

}  // namespace talkface::nn
