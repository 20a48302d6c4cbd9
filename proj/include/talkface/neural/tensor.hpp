#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace talkface::nn {

struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> dims);

    std::size_t size() const { return values.size(); }
    std::size_t rank() const { return shape.size(); }

    friend bool operator==(const Tensor&, const Tensor&) = default;
};

std::size_t element_count(std::span<const std::size_t> shape);

using ParamId = std::size_t;

struct Parameter {
    std::string name;
    Tensor value;
    std::size_t fan_in = 1;
};

/// Ordered collection of named trainable tensors. Order is part of the
/// checkpoint format and of seeded initialization.
class ParameterSet {
public:
    ParamId add(std::string name, std::vector<std::size_t> shape, std::size_t fan_in);

    std::size_t size() const { return params_.size(); }
    Parameter& operator[](ParamId id) { return params_[id]; }
    const Parameter& operator[](ParamId id) const { return params_[id]; }
    const std::vector<Parameter>& all() const { return params_; }
    std::vector<Parameter>& all() { return params_; }

    ParamId find(const std::string& name) const;
    std::size_t scalar_count() const;

    /// Uniform in +-1/sqrt(fan_in), drawn from one mt19937_64 stream in
    /// declaration order.
    void initialize(std::uint64_t seed);
    void fill(double value);

private:
    std::vector<Parameter> params_;
};

/// Gradient accumulator shaped like a ParameterSet. One per worker thread
/// during training; reduced in a fixed order.
class Gradients {
public:
    Gradients() = default;
    explicit Gradients(const ParameterSet& params);

    std::span<double> operator[](ParamId id) { return grads_[id]; }
    std::span<const double> operator[](ParamId id) const { return grads_[id]; }
    std::size_t size() const { return grads_.size(); }

    void zero();
    void add(const Gradients& other);
    void scale(double s);
    double squared_norm() const;
    double squared_norm(std::span<const ParamId> ids) const;

private:
    std::vector<std::vector<double>> grads_;
};

}  // namespace talkface::nn
