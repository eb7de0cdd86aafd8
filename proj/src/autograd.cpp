#include "spectralseq/autograd.hpp"

#include <cmath>

#include "spectralseq/fft.hpp"

namespace spectralseq {

namespace {

void accumulate(Tensor& dst, const Tensor& src) {
    kernels::axpy(1.0, src.data(), dst.data(), dst.size());
}

void accumulate(Spectrum& dst, const Spectrum& src) {
    kernels::axpy(1.0, reinterpret_cast<const double*>(src.data()),
                  reinterpret_cast<double*>(dst.data()), 2 * dst.size());
}

} // namespace

Graph::Node& Graph::at(int id) {
    if (id < 0 || id >= int(nodes_.size())) throw StateError("invalid node id " + std::to_string(id));
    return nodes_[std::size_t(id)];
}

const Graph::Node& Graph::at(int id) const {
    if (id < 0 || id >= int(nodes_.size())) throw StateError("invalid node id " + std::to_string(id));
    return nodes_[std::size_t(id)];
}

int Graph::push(Node n) {
    nodes_.push_back(std::move(n));
    return int(nodes_.size()) - 1;
}

bool Graph::any_requires_grad(const std::vector<int>& ids) const {
    for (int id : ids)
        if (at(id).requires_grad) return true;
    return false;
}

void Graph::ensure_grad(Node& n) {
    if (n.grad_live) return;
    if (n.is_complex)
        n.cgrad = Spectrum(n.cval.dims());
    else
        n.grad = Tensor(n.val.dims(), 0.0);
    n.grad_live = true;
}

int Graph::input(Tensor v, bool requires_grad) {
    Node n;
    n.op = OpKind::Leaf;
    n.val = std::move(v);
    n.requires_grad = requires_grad;
    return push(std::move(n));
}

int Graph::param(const std::string& name) {
    if (!store_) throw ConfigError("graph has no parameter store");
    auto it = param_nodes_.find(name);
    if (it != param_nodes_.end()) return it->second;
    int pid = store_->require(name);
    Node n;
    n.op = OpKind::Leaf;
    n.val = store_->entry(std::size_t(pid)).value;
    n.requires_grad = true;
    n.param_id = pid;
    int id = push(std::move(n));
    param_nodes_[name] = id;
    return id;
}

int Graph::addn(const std::vector<int>& xs) {
    if (xs.empty()) throw ShapeError("addn: empty operand list");
    const Node& first = at(xs[0]);
    std::vector<const double*> ptrs;
    for (int id : xs) {
        const Node& p = at(id);
        if (p.is_complex) throw ShapeError("addn: complex operand");
        require_same_shape(first.val, p.val, "addn");
        ptrs.push_back(p.val.data());
    }
    Node n;
    n.op = OpKind::AddN;
    n.parents = xs;
    n.requires_grad = any_requires_grad(xs);
    n.val = Tensor(first.val.dims());
    kernels::addn(ptrs.data(), ptrs.size(), n.val.data(), n.val.size());
    return push(std::move(n));
}

int Graph::scale(int x, double a) {
    const Node& p = at(x);
    if (p.is_complex) throw ShapeError("scale: complex operand");
    Node n;
    n.op = OpKind::Scale;
    n.parents = {x};
    n.alpha = a;
    n.requires_grad = p.requires_grad;
    n.val = Tensor(p.val.dims());
    kernels::scale(a, p.val.data(), n.val.data(), n.val.size());
    return push(std::move(n));
}

int Graph::cscale(int s, double a) {
    const Node& p = at(s);
    if (!p.is_complex) throw ShapeError("cscale: real operand");
    Node n;
    n.op = OpKind::CScale;
    n.parents = {s};
    n.alpha = a;
    n.is_complex = true;
    n.requires_grad = p.requires_grad;
    n.cval = Spectrum(p.cval.dims());
    kernels::scale(a, reinterpret_cast<const double*>(p.cval.data()),
                   reinterpret_cast<double*>(n.cval.data()), 2 * n.cval.size());
    return push(std::move(n));
}

int Graph::activation(int x, kernels::Act act) {
    const Node& p = at(x);
    if (p.is_complex) throw ShapeError("activation: complex operand");
    Node n;
    n.op = OpKind::Activation;
    n.parents = {x};
    n.act = act;
    n.requires_grad = p.requires_grad;
    n.val = Tensor(p.val.dims());
    kernels::activation_fw(act, p.val.data(), n.val.data(), n.val.size());
    return push(std::move(n));
}

int Graph::pointwise_linear(int x, int w, int b) {
    const Node& px = at(x);
    const Node& pw = at(w);
    const Node& pb = at(b);
    if (px.is_complex || pw.is_complex || pb.is_complex)
        throw ShapeError("pointwise_linear: complex operand");
    if (px.val.rank() != 4) throw ShapeError("pointwise_linear: x must be rank 4, got " + px.val.shape_str());
    if (pw.val.rank() != 2) throw ShapeError("pointwise_linear: w must be rank 2");
    std::size_t c_in = pw.val.dim(0), c_out = pw.val.dim(1);
    if (px.val.dim(3) != c_in)
        throw ShapeError("pointwise_linear: x channels " + std::to_string(px.val.dim(3)) +
                         " vs w in_channels " + std::to_string(c_in));
    if (pb.val.rank() != 1 || pb.val.dim(0) != c_out) throw ShapeError("pointwise_linear: bad bias shape");
    Node n;
    n.op = OpKind::PointwiseLinear;
    n.parents = {x, w, b};
    n.requires_grad = any_requires_grad(n.parents);
    n.val = Tensor({px.val.dim(0), px.val.dim(1), px.val.dim(2), c_out});
    kernels::pointwise_linear_fw(px.val.data(), pw.val.data(), pb.val.data(), n.val.data(),
                                 px.val.size() / c_in, c_in, c_out);
    return push(std::move(n));
}

int Graph::mode_mul(int xhat, int r, std::size_t m1, std::size_t m2) {
    const Node& px = at(xhat);
    const Node& pr = at(r);
    if (!px.is_complex) throw ShapeError("mode_mul: x must be a spectrum");
    if (px.cval.rank() != 4) throw ShapeError("mode_mul: spectrum must be rank 4");
    std::size_t nx = px.cval.dim(1), kyr = px.cval.dim(2), c_in = px.cval.dim(3);
    if (m1 == 0 || m2 == 0) throw ConfigError("mode_mul: mode counts must be positive");
    if (m1 > nx / 2 || m2 > kyr)
        throw ConfigError("mode_mul: modes (" + std::to_string(m1) + "," + std::to_string(m2) +
                          ") exceed grid Nyquist for spectrum " + px.cval.shape_str());
    if (pr.val.rank() != 6 || pr.val.dim(0) != 2 || pr.val.dim(1) != m1 || pr.val.dim(2) != m2 ||
        pr.val.dim(3) != c_in || pr.val.dim(5) != 2)
        throw ShapeError("mode_mul: weight shape " + pr.val.shape_str() +
                         " inconsistent with (2," + std::to_string(m1) + "," + std::to_string(m2) +
                         "," + std::to_string(c_in) + ",c_out,2)");
    std::size_t c_out = pr.val.dim(4);
    Node n;
    n.op = OpKind::ModeMul;
    n.parents = {xhat, r};
    n.m1 = m1;
    n.m2 = m2;
    n.is_complex = true;
    n.requires_grad = any_requires_grad(n.parents);
    n.cval = Spectrum({px.cval.dim(0), nx, kyr, c_out});
    kernels::mode_mul_fw(px.cval.data(), pr.val.data(), n.cval.data(), px.cval.dim(0), nx, kyr,
                         c_in, c_out, m1, m2);
    return push(std::move(n));
}

int Graph::rfft2(int x) {
    const Node& p = at(x);
    if (p.is_complex) throw ShapeError("rfft2 node: operand already complex");
    if (p.val.rank() != 4) throw ShapeError("rfft2 node: operand must be rank 4");
    Node n;
    n.op = OpKind::Rfft2;
    n.parents = {x};
    n.ny = p.val.dim(2);
    n.is_complex = true;
    n.requires_grad = p.requires_grad;
    n.cval = spectralseq::rfft2(p.val);
    return push(std::move(n));
}

int Graph::irfft2(int s, std::size_t ny) {
    const Node& p = at(s);
    if (!p.is_complex) throw ShapeError("irfft2 node: operand must be a spectrum");
    Node n;
    n.op = OpKind::Irfft2;
    n.parents = {s};
    n.ny = ny;
    n.requires_grad = p.requires_grad;
    n.val = spectralseq::irfft2(p.cval, ny);
    return push(std::move(n));
}

namespace {
kernels::ConvDims make_conv_dims(const Tensor& x, const Tensor& k, const Tensor& b,
                                 std::size_t stride, std::size_t pad, std::size_t outpad,
                                 bool transposed) {
    if (x.rank() != 4) throw ShapeError("conv: x must be rank 4");
    if (k.rank() != 4) throw ShapeError("conv: kernel must be rank 4 (kh, kw, c_in, c_out)");
    if (stride == 0) throw ConfigError("conv: stride must be positive");
    kernels::ConvDims d{};
    d.batch = x.dim(0);
    d.h_in = x.dim(1);
    d.w_in = x.dim(2);
    d.c_in = x.dim(3);
    d.kh = k.dim(0);
    d.kw = k.dim(1);
    d.c_out = k.dim(3);
    d.stride = stride;
    d.pad = pad;
    d.outpad = outpad;
    if (k.dim(2) != d.c_in)
        throw ShapeError("conv: kernel c_in " + std::to_string(k.dim(2)) + " vs input channels " +
                         std::to_string(d.c_in));
    if (b.rank() != 1 || b.dim(0) != d.c_out) throw ShapeError("conv: bad bias shape");
    if (transposed) {
        d.h_out = (d.h_in - 1) * stride + d.kh + outpad - 2 * pad;
        d.w_out = (d.w_in - 1) * stride + d.kw + outpad - 2 * pad;
    } else {
        if (d.h_in + 2 * pad < d.kh || d.w_in + 2 * pad < d.kw)
            throw ShapeError("conv: kernel larger than padded input");
        d.h_out = (d.h_in + 2 * pad - d.kh) / stride + 1;
        d.w_out = (d.w_in + 2 * pad - d.kw) / stride + 1;
    }
    return d;
}
} // namespace

int Graph::conv2d(int x, int k, int b, std::size_t stride, std::size_t pad) {
    const Node& px = at(x);
    const Node& pk = at(k);
    const Node& pb = at(b);
    kernels::ConvDims d = make_conv_dims(px.val, pk.val, pb.val, stride, pad, 0, false);
    Node n;
    n.op = OpKind::Conv2d;
    n.parents = {x, k, b};
    n.conv = d;
    n.requires_grad = any_requires_grad(n.parents);
    n.val = Tensor({d.batch, d.h_out, d.w_out, d.c_out});
    kernels::conv2d_fw(px.val.data(), pk.val.data(), pb.val.data(), n.val.data(), d);
    return push(std::move(n));
}

int Graph::conv_t2d(int x, int k, int b, std::size_t stride, std::size_t pad, std::size_t outpad) {
    const Node& px = at(x);
    const Node& pk = at(k);
    const Node& pb = at(b);
    kernels::ConvDims d = make_conv_dims(px.val, pk.val, pb.val, stride, pad, outpad, true);
    Node n;
    n.op = OpKind::ConvT2d;
    n.parents = {x, k, b};
    n.conv = d;
    n.requires_grad = any_requires_grad(n.parents);
    n.val = Tensor({d.batch, d.h_out, d.w_out, d.c_out});
    kernels::conv_t2d_fw(px.val.data(), pk.val.data(), pb.val.data(), n.val.data(), d);
    return push(std::move(n));
}

int Graph::reshape(int x, std::vector<std::size_t> dims) {
    const Node& p = at(x);
    if (p.is_complex) throw ShapeError("reshape: complex operand");
    Tensor v(dims);
    if (v.size() != p.val.size())
        throw ShapeError("reshape: size mismatch " + p.val.shape_str() + " -> " + v.shape_str());
    std::copy(p.val.data(), p.val.data() + p.val.size(), v.data());
    Node n;
    n.op = OpKind::Reshape;
    n.parents = {x};
    n.requires_grad = p.requires_grad;
    n.val = std::move(v);
    return push(std::move(n));
}

int Graph::concat_c(const std::vector<int>& xs) {
    if (xs.empty()) throw ShapeError("concat_c: empty operand list");
    std::size_t c_total = 0;
    const Node& first = at(xs[0]);
    if (first.val.rank() != 4) throw ShapeError("concat_c: operands must be rank 4");
    for (int id : xs) {
        const Node& p = at(id);
        if (p.is_complex || p.val.rank() != 4 || p.val.dim(0) != first.val.dim(0) ||
            p.val.dim(1) != first.val.dim(1) || p.val.dim(2) != first.val.dim(2))
            throw ShapeError("concat_c: incompatible operand shape");
        c_total += p.val.dim(3);
    }
    Node n;
    n.op = OpKind::ConcatC;
    n.parents = xs;
    n.requires_grad = any_requires_grad(xs);
    n.val = Tensor({first.val.dim(0), first.val.dim(1), first.val.dim(2), c_total});
    std::size_t points = first.val.dim(0) * first.val.dim(1) * first.val.dim(2);
    std::size_t off = 0;
    for (int id : xs) {
        const Node& p = at(id);
        std::size_t ci = p.val.dim(3);
        for (std::size_t pt = 0; pt < points; ++pt)
            for (std::size_t c = 0; c < ci; ++c)
                n.val[pt * c_total + off + c] = p.val[pt * ci + c];
        off += ci;
    }
    return push(std::move(n));
}

int Graph::mse_loss(int pred, Tensor target) {
    const Node& p = at(pred);
    if (p.is_complex) throw ShapeError("mse_loss: complex operand");
    require_same_shape(p.val, target, "mse_loss");
    Node n;
    n.op = OpKind::MseLoss;
    n.parents = {pred};
    n.requires_grad = p.requires_grad;
    n.val = Tensor({1});
    n.val[0] = kernels::sum_sq_diff(p.val.data(), target.data(), target.size()) / double(target.size());
    n.aux = std::move(target);
    return push(std::move(n));
}

const Tensor& Graph::value(int id) const {
    const Node& n = at(id);
    if (n.is_complex) throw StateError("value: node is complex, use cvalue");
    return n.val;
}

const Spectrum& Graph::cvalue(int id) const {
    const Node& n = at(id);
    if (!n.is_complex) throw StateError("cvalue: node is real, use value");
    return n.cval;
}

double Graph::scalar(int id) const {
    const Tensor& v = value(id);
    if (v.size() != 1) throw ShapeError("scalar: node is not a scalar");
    return v[0];
}

const Tensor& Graph::grad(int leaf_id) const {
    const Node& n = at(leaf_id);
    if (n.op != OpKind::Leaf) throw StateError("grad: only input-leaf gradients are retained");
    if (!n.grad_live) throw StateError("grad: no gradient recorded for this leaf (run backward first)");
    return n.grad;
}

void Graph::backward(int loss) {
    if (nodes_.empty()) throw StateError("backward before forward: graph is empty");
    Node& l = at(loss);
    if (l.is_complex || l.val.size() != 1) throw StateError("backward: target must be a real scalar node");
    for (auto& n : nodes_) {
        n.grad = Tensor();
        n.cgrad = Spectrum();
        n.grad_live = false;
    }
    l.grad = Tensor({1}, 1.0);
    l.grad_live = true;
    for (int i = loss; i >= 0; --i) backward_node(i);
}

void Graph::backward_node(int id) {
    Node& n = nodes_[std::size_t(id)];
    if (!n.requires_grad || !n.grad_live) {
        n.grad = Tensor();
        n.cgrad = Spectrum();
        n.grad_live = false;
        return;
    }
    auto parent_grad = [&](int slot) -> Node& {
        Node& p = nodes_[std::size_t(n.parents[std::size_t(slot)])];
        ensure_grad(p);
        return p;
    };
    auto rg = [&](int slot) { return nodes_[std::size_t(n.parents[std::size_t(slot)])].requires_grad; };

    switch (n.op) {
        case OpKind::Leaf:
            if (n.param_id >= 0) {
                Tensor& g = store_->entry(std::size_t(n.param_id)).grad;
                kernels::axpy(1.0, n.grad.data(), g.data(), g.size());
                break;
            }
            // input leaf: retain gradient for inspection
            return;
        case OpKind::AddN:
            for (std::size_t s = 0; s < n.parents.size(); ++s)
                if (rg(int(s))) accumulate(parent_grad(int(s)).grad, n.grad);
            break;
        case OpKind::Scale:
            if (rg(0)) kernels::axpy(n.alpha, n.grad.data(), parent_grad(0).grad.data(), n.grad.size());
            break;
        case OpKind::CScale:
            if (rg(0))
                kernels::axpy(n.alpha, reinterpret_cast<const double*>(n.cgrad.data()),
                              reinterpret_cast<double*>(parent_grad(0).cgrad.data()),
                              2 * n.cgrad.size());
            break;
        case OpKind::Activation:
            if (rg(0))
                kernels::activation_bw(n.act, n.val.data(), n.grad.data(), parent_grad(0).grad.data(),
                                       n.val.size());
            break;
        case OpKind::PointwiseLinear: {
            const Node& x = nodes_[std::size_t(n.parents[0])];
            const Node& w = nodes_[std::size_t(n.parents[1])];
            std::size_t c_in = w.val.dim(0), c_out = w.val.dim(1);
            std::size_t p = x.val.size() / c_in;
            if (rg(0))
                kernels::pointwise_linear_bw_x(n.grad.data(), w.val.data(), parent_grad(0).grad.data(),
                                               p, c_in, c_out);
            if (rg(1) || rg(2)) {
                Tensor dw_scratch, db_scratch;
                double* dw = rg(1) ? parent_grad(1).grad.data()
                                   : (dw_scratch = Tensor({c_in, c_out}), dw_scratch.data());
                double* db = rg(2) ? parent_grad(2).grad.data()
                                   : (db_scratch = Tensor({c_out}), db_scratch.data());
                kernels::pointwise_linear_bw_wb(n.grad.data(), x.val.data(), dw, db, p, c_in, c_out);
            }
            break;
        }
        case OpKind::ModeMul: {
            const Node& x = nodes_[std::size_t(n.parents[0])];
            const Node& r = nodes_[std::size_t(n.parents[1])];
            std::size_t batch = x.cval.dim(0), nx = x.cval.dim(1), kyr = x.cval.dim(2);
            std::size_t c_in = x.cval.dim(3), c_out = r.val.dim(4);
            if (rg(0))
                kernels::mode_mul_bw_x(n.cgrad.data(), r.val.data(), parent_grad(0).cgrad.data(),
                                       batch, nx, kyr, c_in, c_out, n.m1, n.m2);
            if (rg(1))
                kernels::mode_mul_bw_r(n.cgrad.data(), x.cval.data(), parent_grad(1).grad.data(),
                                       batch, nx, kyr, c_in, c_out, n.m1, n.m2);
            break;
        }
        case OpKind::Rfft2:
            if (rg(0)) {
                Tensor adj = rfft2_adjoint(n.cgrad, n.ny);
                accumulate(parent_grad(0).grad, adj);
            }
            break;
        case OpKind::Irfft2:
            if (rg(0)) {
                Spectrum adj = irfft2_adjoint(n.grad);
                accumulate(parent_grad(0).cgrad, adj);
            }
            break;
        case OpKind::Conv2d: {
            const Node& x = nodes_[std::size_t(n.parents[0])];
            const Node& k = nodes_[std::size_t(n.parents[1])];
            if (rg(0)) kernels::conv2d_bw_x(n.grad.data(), k.val.data(), parent_grad(0).grad.data(), n.conv);
            if (rg(1) || rg(2)) {
                Tensor dk_scratch, db_scratch;
                double* dk = rg(1) ? parent_grad(1).grad.data()
                                   : (dk_scratch = Tensor(k.val.dims()), dk_scratch.data());
                double* db = rg(2) ? parent_grad(2).grad.data()
                                   : (db_scratch = Tensor({n.conv.c_out}), db_scratch.data());
                kernels::conv2d_bw_kb(n.grad.data(), x.val.data(), dk, db, n.conv);
            }
            break;
        }
        case OpKind::ConvT2d: {
            const Node& x = nodes_[std::size_t(n.parents[0])];
            const Node& k = nodes_[std::size_t(n.parents[1])];
            if (rg(0)) kernels::conv_t2d_bw_x(n.grad.data(), k.val.data(), parent_grad(0).grad.data(), n.conv);
            if (rg(1) || rg(2)) {
                Tensor dk_scratch, db_scratch;
                double* dk = rg(1) ? parent_grad(1).grad.data()
                                   : (dk_scratch = Tensor(k.val.dims()), dk_scratch.data());
                double* db = rg(2) ? parent_grad(2).grad.data()
                                   : (db_scratch = Tensor({n.conv.c_out}), db_scratch.data());
                kernels::conv_t2d_bw_kb(n.grad.data(), x.val.data(), dk, db, n.conv);
            }
            break;
        }
        case OpKind::Reshape:
            if (rg(0)) kernels::axpy(1.0, n.grad.data(), parent_grad(0).grad.data(), n.grad.size());
            break;
        case OpKind::ConcatC: {
            std::size_t c_total = n.val.dim(3);
            std::size_t points = n.val.size() / c_total;
            std::size_t off = 0;
            for (std::size_t s = 0; s < n.parents.size(); ++s) {
                const Node& p = nodes_[std::size_t(n.parents[s])];
                std::size_t ci = p.val.dim(3);
                if (rg(int(s))) {
                    Tensor& pg = parent_grad(int(s)).grad;
                    for (std::size_t pt = 0; pt < points; ++pt)
                        for (std::size_t c = 0; c < ci; ++c)
                            pg[pt * ci + c] += n.grad[pt * c_total + off + c];
                }
                off += ci;
            }
            break;
        }
        case OpKind::MseLoss:
            if (rg(0)) {
                const Node& p = nodes_[std::size_t(n.parents[0])];
                Tensor& pg = parent_grad(0).grad;
                double s = 2.0 * n.grad[0] / double(n.aux.size());
                for (std::size_t i = 0; i < pg.size(); ++i) pg[i] += s * (p.val[i] - n.aux[i]);
            }
            break;
    }
    n.grad = Tensor();
    n.cgrad = Spectrum();
    n.grad_live = false;
}

double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& point,
                         const Tensor& analytic_grad, double eps) {
    if (eps <= 0.0) throw ConfigError("finite_diff_check: eps must be positive");
    require_same_shape(point, analytic_grad, "finite_diff_check");
    Tensor probe = point;
    double worst = 0.0;
    for (std::size_t i = 0; i < point.size(); ++i) {
        double orig = probe[i];
        probe[i] = orig + eps;
        double up = f(probe);
        probe[i] = orig - eps;
        double down = f(probe);
        probe[i] = orig;
        double central = (up - down) / (2.0 * eps);
        double rel = std::abs(analytic_grad[i] - central) / (std::abs(central) + 1e-12);
        worst = std::max(worst, rel);
    }
    return worst;
}

} // namespace spectralseq
