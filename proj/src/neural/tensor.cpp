#include "talkface/neural/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "talkface/error.hpp"

namespace talkface::nn {

std::size_t element_count(std::span<const std::size_t> shape)
{
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

Tensor::Tensor(std::vector<std::size_t> dims)
  : shape(std::move(dims)), values(element_count(shape), 0.0)
{ }

ParamId ParameterSet::add(std::string name, std::vector<std::size_t> shape, std::size_t fan_in)
{
    for (const Parameter& p : params_)
        require(p.name != name, ErrorKind::structural, "duplicate parameter name " + name);
    params_.push_back({std::move(name), Tensor(std::move(shape)), std::max<std::size_t>(fan_in, 1)});
    return params_.size() - 1;
}

ParamId ParameterSet::find(const std::string& name) const
{
    for (std::size_t i = 0; i < params_.size(); ++i)
        if (params_[i].name == name)
            return i;
    fail(ErrorKind::structural, "no parameter named " + name);
}

std::size_t ParameterSet::scalar_count() const
{
    std::size_t n = 0;
    for (const Parameter& p : params_)
        n += p.value.size();
    return n;
}

void ParameterSet::initialize(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    for (Parameter& p : params_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(p.fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& v : p.value.values)
            v = dist(rng);
    }
}

void ParameterSet::fill(double value)
{
    for (Parameter& p : params_)
        std::fill(p.value.values.begin(), p.value.values.end(), value);
}

Gradients::Gradients(const ParameterSet& params)
{
    grads_.reserve(params.size());
    for (const Parameter& p : params.all())
        grads_.emplace_back(p.value.size(), 0.0);
}

void Gradients::zero()
{
    for (auto& g : grads_)
        std::fill(g.begin(), g.end(), 0.0);
}

void Gradients::add(const Gradients& other)
{
    require(other.grads_.size() == grads_.size(), ErrorKind::structural, "gradient set mismatch");
    for (std::size_t i = 0; i < grads_.size(); ++i)
        for (std::size_t j = 0; j < grads_[i].size(); ++j)
            grads_[i][j] += other.grads_[i][j];
}

void Gradients::scale(double s)
{
    for (auto& g : grads_)
        for (double& v : g)
            v *= s;
}

double Gradients::squared_norm() const
{
    double s = 0.0;
    for (const auto& g : grads_)
        for (double v : g)
            s += v * v;
    return s;
}

double Gradients::squared_norm(std::span<const ParamId> ids) const
{
    double s = 0.0;
    for (ParamId id : ids)
        for (double v : grads_[id])
            s += v * v;
    return s;
}

}  // namespace talkface::nn
