#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "talkface/neural/graph.hpp"
#include "talkface/neural/tensor.hpp"

namespace talkface::nn {

struct Linear {
    ParamId weight = 0;
    ParamId bias = 0;
    std::size_t in = 0;
    std::size_t out = 0;

    static Linear create(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out);
    Var operator()(Graph& g, Var x) const { return g.linear(weight, bias, x); }
    std::vector<ParamId> params() const { return {weight, bias}; }
};

/// Lookup table stored as a dim x count matrix; entry k is column k.
struct Embedding {
    ParamId table = 0;
    std::size_t dim = 0;
    std::size_t count = 0;

    static Embedding create(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t count);
    Var operator()(Graph& g, std::size_t k) const { return g.column(table, k); }
};

struct LstmState {
    Var h;
    Var c;
};

struct LstmCell {
    ParamId weight = 0;
    ParamId bias = 0;
    std::size_t in = 0;
    std::size_t hidden = 0;

    static LstmCell create(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t hidden);
    LstmState initial(Graph& g) const { return {g.zeros(hidden), g.zeros(hidden)}; }
    LstmState step(Graph& g, Var x, LstmState s) const;
    std::vector<ParamId> params() const { return {weight, bias}; }
};

enum class Direction { causal, bidirectional };

/// Recurrent layer. Causal mode is stepped by the caller (auto-regressive
/// use). Bidirectional mode only encodes a fully known window: it runs a
/// forward and a backward cell over the inputs and returns the two final
/// hidden states concatenated.
class RecurrentLayer {
public:
    RecurrentLayer() = default;
    RecurrentLayer(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t hidden, Direction dir);

    Direction direction() const { return dir_; }
    std::size_t input_size() const { return fwd_.in; }
    std::size_t hidden_size() const { return fwd_.hidden; }
    std::size_t output_size() const { return dir_ == Direction::bidirectional ? 2 * fwd_.hidden : fwd_.hidden; }

    LstmState initial(Graph& g) const { return fwd_.initial(g); }
    LstmState step(Graph& g, Var x, LstmState s) const;
    Var encode(Graph& g, std::span<const Var> window) const;
    std::vector<ParamId> params() const;

private:
    LstmCell fwd_;
    LstmCell bwd_;
    Direction dir_ = Direction::causal;
};

}  // namespace talkface::nn
