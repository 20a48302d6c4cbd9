#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "talkface/neural/tensor.hpp"

namespace talkface::nn {

/// Handle to a node on a Graph tape.
struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over flat double vectors.
///
/// Nodes are appended in evaluation order; backward() walks them in reverse
/// and accumulates parameter gradients into a caller-owned Gradients buffer.
/// Parameters are read in place, never copied onto the tape. Every forward
/// op checks its output for non-finite values and throws a numeric error.
///
/// A Graph is single-threaded; use one per worker. clear() keeps capacity.
class Graph {
public:
    explicit Graph(const ParameterSet& params);

    void clear();
    std::size_t node_count() const { return nodes_.size(); }

    Var input(std::span<const double> values);
    Var zeros(std::size_t n);

    /// y = W x + b, W shaped [out, in]. b may be omitted.
    Var linear(ParamId w, ParamId b, Var x);
    Var linear(ParamId w, Var x);
    /// Column k of a [rows, cols] parameter.
    Var column(ParamId table, std::size_t k);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var scale(Var a, double s);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var concat(std::span<const Var> parts);
    Var slice(Var a, std::size_t offset, std::size_t length);
    Var softmax(Var a);
    Var sum(Var a);
    /// Sum of scalar nodes.
    Var add_n(std::span<const Var> scalars);

    /// Fused LSTM cell: gates = W [x; h] + b in (i, f, g, o) order.
    /// Returns a node holding [h'; c'] (2 * hidden values).
    Var lstm_cell(ParamId w, ParamId b, Var x, Var h, Var c, std::size_t hidden);

    /// -log p[target] for a probability node.
    Var cross_entropy(Var probabilities, std::size_t target);
    /// -log softmax(logits)[target], computed stably.
    Var cross_entropy_logits(Var logits, std::size_t target);
    /// Mean over elements of |d| with every third element (the y
    /// coordinate of xyz triples) scaled by y_weight.
    Var weighted_l1(Var pred, std::span<const double> target, double y_weight);
    /// Mean absolute error against a constant target.
    Var l1(Var pred, std::span<const double> target);

    std::span<const double> value(Var v) const;
    double scalar(Var v) const;
    std::size_t size(Var v) const;
    std::span<const double> grad(Var v) const;

    /// Seeds d(root)/d(root) = 1 and accumulates into grads. Root must be a
    /// scalar node.
    void backward(Var root, Gradients& grads);

private:
    enum class Op {
        input,
        linear,
        column,
        add,
        sub,
        mul,
        scale,
        sigmoid,
        tanh,
        concat,
        slice,
        softmax,
        sum,
        add_n,
        lstm,
        cross_entropy,
        cross_entropy_logits,
        weighted_l1,
        l1,
    };

    struct Node {
        Op op = Op::input;
        std::size_t off = 0;   // value/grad offset
        std::size_t len = 0;
        std::size_t aux = 0;   // offset of cached intermediates or constant data
        int a = -1;
        int b = -1;
        int c = -1;
        ParamId pw = 0;
        ParamId pb = 0;
        bool has_bias = false;
        std::size_t k = 0;     // target / offset / hidden
        double s = 0.0;        // scalar argument
        std::size_t list = 0;  // offset into operand list
    };

    Var push(Op op, std::size_t len, std::size_t aux_len = 0);
    double* val(int id) { return values_.data() + nodes_[static_cast<std::size_t>(id)].off; }
    const double* val(int id) const { return values_.data() + nodes_[static_cast<std::size_t>(id)].off; }
    double* grd(int id) { return grads_.data() + nodes_[static_cast<std::size_t>(id)].off; }
    Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
    const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id)]; }
    void check_var(Var v) const;
    void check_finite(Var v) const;
    Var linear_impl(ParamId w, ParamId b, bool has_bias, Var x);

    const ParameterSet* params_;
    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> grads_;
    std::vector<double> aux_;
    std::vector<int> operands_;
};

}  // namespace talkface::nn
