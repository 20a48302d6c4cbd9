#include "talkface/neural/layers.hpp"

#include "talkface/error.hpp"

namespace talkface::nn {

Linear Linear::create(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t out)
{
    Linear l;
    l.in = in;
    l.out = out;
    l.weight = ps.add(name + ".weight", {out, in}, in);
    l.bias = ps.add(name + ".bias", {out}, in);
    return l;
}

Embedding Embedding::create(ParameterSet& ps, const std::string& name, std::size_t dim, std::size_t count)
{
    Embedding e;
    e.dim = dim;
    e.count = count;
    // fan_in 1: entries start in [-1, 1]
    e.table = ps.add(name + ".table", {dim, count}, 1);
    return e;
}

LstmCell LstmCell::create(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t hidden)
{
    LstmCell c;
    c.in = in;
    c.hidden = hidden;
    c.weight = ps.add(name + ".weight", {4 * hidden, in + hidden}, in + hidden);
    c.bias = ps.add(name + ".bias", {4 * hidden}, in + hidden);
    return c;
}

LstmState LstmCell::step(Graph& g, Var x, LstmState s) const
{
    const Var hc = g.lstm_cell(weight, bias, x, s.h, s.c, hidden);
    return {g.slice(hc, 0, hidden), g.slice(hc, hidden, hidden)};
}

RecurrentLayer::RecurrentLayer(ParameterSet& ps, const std::string& name, std::size_t in, std::size_t hidden,
                               Direction dir)
  : dir_(dir)
{
    fwd_ = LstmCell::create(ps, name + (dir == Direction::bidirectional ? ".fwd" : ""), in, hidden);
    if (dir == Direction::bidirectional)
        bwd_ = LstmCell::create(ps, name + ".bwd", in, hidden);
}

LstmState RecurrentLayer::step(Graph& g, Var x, LstmState s) const
{
    require(dir_ == Direction::causal, ErrorKind::usage, "step() is only defined for causal recurrence");
    return fwd_.step(g, x, s);
}

Var RecurrentLayer::encode(Graph& g, std::span<const Var> window) const
{
    require(dir_ == Direction::bidirectional, ErrorKind::usage, "encode() needs a bidirectional layer");
    require(!window.empty(), ErrorKind::structural, "empty encoder window");
    LstmState f = fwd_.initial(g);
    for (Var x : window)
        f = fwd_.step(g, x, f);
    LstmState b = bwd_.initial(g);
    for (auto it = window.rbegin(); it != window.rend(); ++it)
        b = bwd_.step(g, *it, b);
    const Var parts[] = {f.h, b.h};
    return g.concat(parts);
}

std::vector<ParamId> RecurrentLayer::params() const
{
    std::vector<ParamId> out = fwd_.params();
    if (dir_ == Direction::bidirectional) {
        out.push_back(bwd_.weight);
        out.push_back(bwd_.bias);
    }
    return out;
}

}  // namespace talkface::nn
