#pragma once

#include <cstdint>
#include <vector>

#include "talkface/neural/tensor.hpp"

namespace talkface::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Adam {
public:
    Adam() = default;
    Adam(const ParameterSet& params, AdamConfig cfg = {});

    void step(ParameterSet& params, const Gradients& grads);

    const AdamConfig& config() const { return cfg_; }
    std::uint64_t steps() const { return t_; }

    // Exposed for checkpointing.
    std::vector<std::vector<double>>& first_moment() { return m_; }
    std::vector<std::vector<double>>& second_moment() { return v_; }
    const std::vector<std::vector<double>>& first_moment() const { return m_; }
    const std::vector<std::vector<double>>& second_moment() const { return v_; }
    void set_steps(std::uint64_t t) { t_ = t; }

private:
    AdamConfig cfg_;
    std::uint64_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace talkface::nn
