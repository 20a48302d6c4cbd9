#include "talkface/neural/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "talkface/error.hpp"

namespace talkface::nn {

namespace {

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sign(double x) { return (x > 0.0) - (x < 0.0); }

// Four independent partial sums: lets the compiler pipeline the loop while
// keeping a fixed, platform-stable summation order.
double dot(const double* a, const double* b, std::size_t n)
{
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    for (; i < n; ++i)
        s0 += a[i] * b[i];
    return (s0 + s1) + (s2 + s3);
}

// grow += g*x and gx += g*row over one weight row; the four ranges never overlap.
void outer_row(double g, const double* __restrict x, const double* __restrict row, double* __restrict grow,
               double* __restrict gx, std::size_t n)
{
    for (std::size_t i = 0; i < n; ++i) {
        grow[i] += g * x[i];
        gx[i] += g * row[i];
    }
}

}  // namespace

Graph::Graph(const ParameterSet& params) : params_(&params) { }

void Graph::clear()
{
    nodes_.clear();
    values_.clear();
    grads_.clear();
    aux_.clear();
    operands_.clear();
}

Var Graph::push(Op op, std::size_t len, std::size_t aux_len)
{
    Node n;
    n.op = op;
    n.off = values_.size();
    n.len = len;
    n.aux = aux_.size();
    values_.resize(values_.size() + len, 0.0);
    aux_.resize(aux_.size() + aux_len, 0.0);
    nodes_.push_back(n);
    return Var{static_cast<int>(nodes_.size() - 1)};
}

void Graph::check_var(Var v) const
{
    require(v.id >= 0 && static_cast<std::size_t>(v.id) < nodes_.size(), ErrorKind::usage, "invalid graph variable");
}

void Graph::check_finite(Var v) const
{
    const Node& n = node(v);
    for (std::size_t i = 0; i < n.len; ++i)
        if (!std::isfinite(values_[n.off + i]))
            fail(ErrorKind::numeric, "non-finite value produced in forward pass");
}

std::span<const double> Graph::value(Var v) const
{
    check_var(v);
    return {values_.data() + node(v).off, node(v).len};
}

double Graph::scalar(Var v) const
{
    check_var(v);
    require(node(v).len == 1, ErrorKind::usage, "node is not a scalar");
    return values_[node(v).off];
}

std::size_t Graph::size(Var v) const
{
    check_var(v);
    return node(v).len;
}

std::span<const double> Graph::grad(Var v) const
{
    check_var(v);
    require(grads_.size() == values_.size(), ErrorKind::usage, "backward() has not run");
    return {grads_.data() + node(v).off, node(v).len};
}

Var Graph::input(std::span<const double> values)
{
    Var v = push(Op::input, values.size());
    std::copy(values.begin(), values.end(), val(v.id));
    check_finite(v);
    return v;
}

Var Graph::zeros(std::size_t n)
{
    return push(Op::input, n);
}

Var Graph::linear_impl(ParamId w, ParamId b, bool has_bias, Var x)
{
    check_var(x);
    const Parameter& W = (*params_)[w];
    require(W.value.rank() == 2 && W.value.shape[1] == node(x).len, ErrorKind::structural,
            "linear: weight " + W.name + " does not match input of size " + std::to_string(node(x).len));
    const std::size_t out = W.value.shape[0];
    const std::size_t in = W.value.shape[1];
    if (has_bias)
        require((*params_)[b].value.size() == out, ErrorKind::structural, "linear: bias size mismatch");

    Var y = push(Op::linear, out);
    Node& n = node(y);
    n.a = x.id;
    n.pw = w;
    n.pb = b;
    n.has_bias = has_bias;

    const double* xv = val(x.id);
    const double* wv = W.value.values.data();
    double* yv = val(y.id);
    for (std::size_t o = 0; o < out; ++o) {
        const double* row = wv + o * in;
        const double bias = has_bias ? (*params_)[b].value.values[o] : 0.0;
        yv[o] = bias + dot(row, xv, in);
    }
    check_finite(y);
    return y;
}

Var Graph::linear(ParamId w, ParamId b, Var x)
{
    return linear_impl(w, b, true, x);
}

Var Graph::linear(ParamId w, Var x)
{
    return linear_impl(w, 0, false, x);
}

Var Graph::column(ParamId table, std::size_t k)
{
    const Parameter& T = (*params_)[table];
    require(T.value.rank() == 2, ErrorKind::structural, "column: table must be a matrix");
    const std::size_t rows = T.value.shape[0];
    const std::size_t cols = T.value.shape[1];
    require(k < cols, ErrorKind::domain,
            "column index " + std::to_string(k) + " out of range for " + std::to_string(cols) + " columns");
    Var y = push(Op::column, rows);
    Node& n = node(y);
    n.pw = table;
    n.k = k;
    double* yv = val(y.id);
    for (std::size_t r = 0; r < rows; ++r)
        yv[r] = T.value.values[r * cols + k];
    check_finite(y);
    return y;
}

Var Graph::add(Var a, Var b)
{
    check_var(a);
    check_var(b);
    require(node(a).len == node(b).len, ErrorKind::structural, "add: size mismatch");
    Var y = push(Op::add, node(a).len);
    node(y).a = a.id;
    node(y).b = b.id;
    for (std::size_t i = 0; i < node(y).len; ++i)
        val(y.id)[i] = val(a.id)[i] + val(b.id)[i];
    check_finite(y);
    return y;
}

Var Graph::sub(Var a, Var b)
{
    check_var(a);
    check_var(b);
    require(node(a).len == node(b).len, ErrorKind::structural, "sub: size mismatch");
    Var y = push(Op::sub, node(a).len);
    node(y).a = a.id;
    node(y).b = b.id;
    for (std::size_t i = 0; i < node(y).len; ++i)
        val(y.id)[i] = val(a.id)[i] - val(b.id)[i];
    check_finite(y);
    return y;
}

Var Graph::mul(Var a, Var b)
{
    check_var(a);
    check_var(b);
    require(node(a).len == node(b).len, ErrorKind::structural, "mul: size mismatch");
    Var y = push(Op::mul, node(a).len);
    node(y).a = a.id;
    node(y).b = b.id;
    for (std::size_t i = 0; i < node(y).len; ++i)
        val(y.id)[i] = val(a.id)[i] * val(b.id)[i];
    check_finite(y);
    return y;
}

Var Graph::scale(Var a, double s)
{
    check_var(a);
    Var y = push(Op::scale, node(a).len);
    node(y).a = a.id;
    node(y).s = s;
    for (std::size_t i = 0; i < node(y).len; ++i)
        val(y.id)[i] = s * val(a.id)[i];
    check_finite(y);
    return y;
}

Var Graph::sigmoid(Var a)
{
    check_var(a);
    Var y = push(Op::sigmoid, node(a).len);
    node(y).a = a.id;
    for (std::size_t i = 0; i < node(y).len; ++i)
        val(y.id)[i] = sigm(val(a.id)[i]);
    check_finite(y);
    return y;
}

Var Graph::tanh(Var a)
{
    check_var(a);
    Var y = push(Op::tanh, node(a).len);
    node(y).a = a.id;
    for (std::size_t i = 0; i < node(y).len; ++i)
        val(y.id)[i] = std::tanh(val(a.id)[i]);
    check_finite(y);
    return y;
}

Var Graph::concat(std::span<const Var> parts)
{
    std::size_t total = 0;
    for (Var p : parts) {
        check_var(p);
        total += node(p).len;
    }
    Var y = push(Op::concat, total);
    node(y).list = operands_.size();
    node(y).k = parts.size();
    std::size_t at = 0;
    for (Var p : parts) {
        operands_.push_back(p.id);
        std::copy(val(p.id), val(p.id) + node(p).len, val(y.id) + at);
        at += node(p).len;
    }
    return y;
}

Var Graph::slice(Var a, std::size_t offset, std::size_t length)
{
    check_var(a);
    require(offset + length <= node(a).len, ErrorKind::structural, "slice out of range");
    Var y = push(Op::slice, length);
    node(y).a = a.id;
    node(y).k = offset;
    std::copy(val(a.id) + offset, val(a.id) + offset + length, val(y.id));
    return y;
}

Var Graph::softmax(Var a)
{
    check_var(a);
    const std::size_t n = node(a).len;
    require(n > 0, ErrorKind::structural, "softmax of empty vector");
    Var y = push(Op::softmax, n);
    node(y).a = a.id;
    const double* x = val(a.id);
    double* p = val(y.id);
    const double m = *std::max_element(x, x + n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(x[i] - m);
        z += p[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        p[i] /= z;
    check_finite(y);
    return y;
}

Var Graph::sum(Var a)
{
    check_var(a);
    Var y = push(Op::sum, 1);
    node(y).a = a.id;
    double s = 0.0;
    for (std::size_t i = 0; i < node(a).len; ++i)
        s += val(a.id)[i];
    val(y.id)[0] = s;
    check_finite(y);
    return y;
}

Var Graph::add_n(std::span<const Var> scalars)
{
    Var y = push(Op::add_n, 1);
    node(y).list = operands_.size();
    node(y).k = scalars.size();
    double s = 0.0;
    for (Var v : scalars) {
        check_var(v);
        require(node(v).len == 1, ErrorKind::structural, "add_n expects scalar nodes");
        operands_.push_back(v.id);
        s += val(v.id)[0];
    }
    val(y.id)[0] = s;
    check_finite(y);
    return y;
}

Var Graph::lstm_cell(ParamId w, ParamId b, Var x, Var h, Var c, std::size_t hidden)
{
    check_var(x);
    check_var(h);
    check_var(c);
    const std::size_t H = hidden;
    const std::size_t nx = node(x).len;
    const Parameter& W = (*params_)[w];
    require(node(h).len == H && node(c).len == H, ErrorKind::structural, "lstm: state size mismatch");
    require(W.value.rank() == 2 && W.value.shape[0] == 4 * H && W.value.shape[1] == nx + H, ErrorKind::structural,
            "lstm: weight " + W.name + " does not match input/hidden sizes");
    require((*params_)[b].value.size() == 4 * H, ErrorKind::structural, "lstm: bias size mismatch");

    // aux: gate activations i, f, g, o then tanh(c')
    Var y = push(Op::lstm, 2 * H, 5 * H);
    Node& n = node(y);
    n.a = x.id;
    n.b = h.id;
    n.c = c.id;
    n.pw = w;
    n.pb = b;
    n.k = H;

    const double* xv = val(x.id);
    const double* hv = val(h.id);
    const double* cv = val(c.id);
    const double* wv = W.value.values.data();
    const double* bv = (*params_)[b].value.values.data();
    double* gates = aux_.data() + n.aux;
    const std::size_t cols = nx + H;
    for (std::size_t r = 0; r < 4 * H; ++r) {
        const double* row = wv + r * cols;
        gates[r] = bv[r] + dot(row, xv, nx) + dot(row + nx, hv, H);
    }
    double* out = val(y.id);
    double* tc = gates + 4 * H;
    for (std::size_t j = 0; j < H; ++j) {
        const double ig = sigm(gates[j]);
        const double fg = sigm(gates[H + j]);
        const double gg = std::tanh(gates[2 * H + j]);
        const double og = sigm(gates[3 * H + j]);
        gates[j] = ig;
        gates[H + j] = fg;
        gates[2 * H + j] = gg;
        gates[3 * H + j] = og;
        const double cn = fg * cv[j] + ig * gg;
        tc[j] = std::tanh(cn);
        out[H + j] = cn;
        out[j] = og * tc[j];
    }
    check_finite(y);
    return y;
}

Var Graph::cross_entropy(Var probabilities, std::size_t target)
{
    check_var(probabilities);
    require(target < node(probabilities).len, ErrorKind::domain,
            "cross-entropy target " + std::to_string(target) + " out of range");
    Var y = push(Op::cross_entropy, 1);
    node(y).a = probabilities.id;
    node(y).k = target;
    val(y.id)[0] = -std::log(val(probabilities.id)[target]);
    check_finite(y);
    return y;
}

Var Graph::cross_entropy_logits(Var logits, std::size_t target)
{
    check_var(logits);
    const std::size_t n = node(logits).len;
    require(target < n, ErrorKind::domain, "cross-entropy target " + std::to_string(target) + " out of range");
    Var y = push(Op::cross_entropy_logits, 1, n);
    node(y).a = logits.id;
    node(y).k = target;
    const double* z = val(logits.id);
    double* p = aux_.data() + node(y).aux;
    const double m = *std::max_element(z, z + n);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = std::exp(z[i] - m);
        s += p[i];
    }
    for (std::size_t i = 0; i < n; ++i)
        p[i] /= s;
    val(y.id)[0] = std::log(s) + m - z[target];
    check_finite(y);
    return y;
}

Var Graph::weighted_l1(Var pred, std::span<const double> target, double y_weight)
{
    check_var(pred);
    const std::size_t n = node(pred).len;
    require(target.size() == n, ErrorKind::structural, "weighted_l1: shape mismatch");
    require(n % 3 == 0 && n > 0, ErrorKind::structural, "weighted_l1 expects xyz triples");
    Var y = push(Op::weighted_l1, 1, n);
    node(y).a = pred.id;
    node(y).s = y_weight;
    std::copy(target.begin(), target.end(), aux_.begin() + static_cast<std::ptrdiff_t>(node(y).aux));
    const double* p = val(pred.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i % 3 == 1) ? y_weight : 1.0;
        acc += w * std::abs(p[i] - target[i]);
    }
    val(y.id)[0] = acc / static_cast<double>(n);
    check_finite(y);
    return y;
}

Var Graph::l1(Var pred, std::span<const double> target)
{
    check_var(pred);
    const std::size_t n = node(pred).len;
    require(target.size() == n && n > 0, ErrorKind::structural, "l1: shape mismatch");
    Var y = push(Op::l1, 1, n);
    node(y).a = pred.id;
    std::copy(target.begin(), target.end(), aux_.begin() + static_cast<std::ptrdiff_t>(node(y).aux));
    const double* p = val(pred.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += std::abs(p[i] - target[i]);
    val(y.id)[0] = acc / static_cast<double>(n);
    check_finite(y);
    return y;
}

void Graph::backward(Var root, Gradients& grads)
{
    check_var(root);
    require(node(root).len == 1, ErrorKind::usage, "backward() needs a scalar root");
    require(grads.size() == params_->size(), ErrorKind::structural, "gradient buffer does not match parameters");
    grads_.assign(values_.size(), 0.0);
    grads_[node(root).off] = 1.0;

    std::vector<double> dz;
    for (int id = root.id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        const double* gy = grads_.data() + n.off;
        const double* yv = values_.data() + n.off;
        switch (n.op) {
        case Op::input:
            break;
        case Op::linear: {
            const Parameter& W = (*params_)[n.pw];
            const std::size_t in = W.value.shape[1];
            const double* x = val(n.a);
            double* gx = grd(n.a);
            const double* wv = W.value.values.data();
            auto gw = grads[n.pw];
            for (std::size_t o = 0; o < n.len; ++o) {
                const double g = gy[o];
                if (g == 0.0)
                    continue;
                outer_row(g, x, wv + o * in, gw.data() + o * in, gx, in);
            }
            if (n.has_bias) {
                auto gb = grads[n.pb];
                for (std::size_t o = 0; o < n.len; ++o)
                    gb[o] += gy[o];
            }
            break;
        }
        case Op::column: {
            const std::size_t cols = (*params_)[n.pw].value.shape[1];
            auto gt = grads[n.pw];
            for (std::size_t r = 0; r < n.len; ++r)
                gt[r * cols + n.k] += gy[r];
            break;
        }
        case Op::add: {
            double* ga = grd(n.a);
            double* gb = grd(n.b);
            for (std::size_t i = 0; i < n.len; ++i) {
                ga[i] += gy[i];
                gb[i] += gy[i];
            }
            break;
        }
        case Op::sub: {
            double* ga = grd(n.a);
            double* gb = grd(n.b);
            for (std::size_t i = 0; i < n.len; ++i) {
                ga[i] += gy[i];
                gb[i] -= gy[i];
            }
            break;
        }
        case Op::mul: {
            const double* av = val(n.a);
            const double* bv = val(n.b);
            double* ga = grd(n.a);
            double* gb = grd(n.b);
            for (std::size_t i = 0; i < n.len; ++i) {
                ga[i] += gy[i] * bv[i];
                gb[i] += gy[i] * av[i];
            }
            break;
        }
        case Op::scale: {
            double* ga = grd(n.a);
            for (std::size_t i = 0; i < n.len; ++i)
                ga[i] += n.s * gy[i];
            break;
        }
        case Op::sigmoid: {
            double* ga = grd(n.a);
            for (std::size_t i = 0; i < n.len; ++i)
                ga[i] += gy[i] * yv[i] * (1.0 - yv[i]);
            break;
        }
        case Op::tanh: {
            double* ga = grd(n.a);
            for (std::size_t i = 0; i < n.len; ++i)
                ga[i] += gy[i] * (1.0 - yv[i] * yv[i]);
            break;
        }
        case Op::concat: {
            std::size_t at = 0;
            for (std::size_t j = 0; j < n.k; ++j) {
                const int part = operands_[n.list + j];
                const std::size_t len = nodes_[static_cast<std::size_t>(part)].len;
                double* gp = grd(part);
                for (std::size_t i = 0; i < len; ++i)
                    gp[i] += gy[at + i];
                at += len;
            }
            break;
        }
        case Op::slice: {
            double* ga = grd(n.a) + n.k;
            for (std::size_t i = 0; i < n.len; ++i)
                ga[i] += gy[i];
            break;
        }
        case Op::softmax: {
            double dot = 0.0;
            for (std::size_t i = 0; i < n.len; ++i)
                dot += gy[i] * yv[i];
            double* ga = grd(n.a);
            for (std::size_t i = 0; i < n.len; ++i)
                ga[i] += yv[i] * (gy[i] - dot);
            break;
        }
        case Op::sum: {
            double* ga = grd(n.a);
            const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].len;
            for (std::size_t i = 0; i < len; ++i)
                ga[i] += gy[0];
            break;
        }
        case Op::add_n: {
            for (std::size_t j = 0; j < n.k; ++j)
                grd(operands_[n.list + j])[0] += gy[0];
            break;
        }
        case Op::lstm: {
            const std::size_t H = n.k;
            const std::size_t nx = nodes_[static_cast<std::size_t>(n.a)].len;
            const std::size_t cols = nx + H;
            const double* gates = aux_.data() + n.aux;
            const double* tc = gates + 4 * H;
            const double* cprev = val(n.c);
            dz.assign(4 * H, 0.0);
            double* gc = grd(n.c);
            for (std::size_t j = 0; j < H; ++j) {
                const double ig = gates[j], fg = gates[H + j], gg = gates[2 * H + j], og = gates[3 * H + j];
                const double dh = gy[j];
                const double dc = gy[H + j] + dh * og * (1.0 - tc[j] * tc[j]);
                dz[j] = dc * gg * ig * (1.0 - ig);
                dz[H + j] = dc * cprev[j] * fg * (1.0 - fg);
                dz[2 * H + j] = dc * ig * (1.0 - gg * gg);
                dz[3 * H + j] = dh * tc[j] * og * (1.0 - og);
                gc[j] += dc * fg;
            }
            const double* x = val(n.a);
            const double* h = val(n.b);
            double* gx = grd(n.a);
            double* gh = grd(n.b);
            const double* wv = (*params_)[n.pw].value.values.data();
            auto gw = grads[n.pw];
            auto gb = grads[n.pb];
            for (std::size_t r = 0; r < 4 * H; ++r) {
                const double g = dz[r];
                gb[r] += g;
                if (g == 0.0)
                    continue;
                const double* row = wv + r * cols;
                double* grow = gw.data() + r * cols;
                outer_row(g, x, row, grow, gx, nx);
                outer_row(g, h, row + nx, grow + nx, gh, H);
            }
            break;
        }
        case Op::cross_entropy: {
            grd(n.a)[n.k] += -gy[0] / val(n.a)[n.k];
            break;
        }
        case Op::cross_entropy_logits: {
            const double* p = aux_.data() + n.aux;
            double* ga = grd(n.a);
            const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].len;
            for (std::size_t i = 0; i < len; ++i)
                ga[i] += gy[0] * (p[i] - (i == n.k ? 1.0 : 0.0));
            break;
        }
        case Op::weighted_l1: {
            const double* t = aux_.data() + n.aux;
            const double* p = val(n.a);
            double* ga = grd(n.a);
            const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].len;
            const double inv = gy[0] / static_cast<double>(len);
            for (std::size_t i = 0; i < len; ++i) {
                const double w = (i % 3 == 1) ? n.s : 1.0;
                ga[i] += inv * w * sign(p[i] - t[i]);
            }
            break;
        }
        case Op::l1: {
            const double* t = aux_.data() + n.aux;
            const double* p = val(n.a);
            double* ga = grd(n.a);
            const std::size_t len = nodes_[static_cast<std::size_t>(n.a)].len;
            const double inv = gy[0] / static_cast<double>(len);
            for (std::size_t i = 0; i < len; ++i)
                ga[i] += inv * sign(p[i] - t[i]);
            break;
        }
        }
    }
}

}  // namespace talkface::nn
