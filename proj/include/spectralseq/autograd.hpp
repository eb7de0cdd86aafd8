#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spectralseq/kernels.hpp"
#include "spectralseq/params.hpp"
#include "spectralseq/tensor.hpp"

namespace spectralseq {

/// Reverse-mode differentiation over a dynamically recorded tape.
///
/// Node values are computed eagerly at recording time and are immutable
/// afterwards. backward() sweeps the tape in reverse creation order,
/// accumulates cotangents, flushes parameter gradients into the bound
/// ParamStore (+=, so zero_grad() between steps is the caller's job), and
/// frees intermediate gradient buffers as soon as a node has been
/// processed. Gradients of requires-grad input leaves are retained and
/// readable through grad().
///
/// A graph is single-threaded; distinct graphs are independent.
class Graph {
public:
    enum class OpKind {
        Leaf,
        AddN,
        Scale,
        CScale,
        Activation,
        PointwiseLinear,
        ModeMul,
        Rfft2,
        Irfft2,
        Conv2d,
        ConvT2d,
        Reshape,
        ConcatC,
        MseLoss,
    };

    explicit Graph(ParamStore* store = nullptr) : store_(store) {}

    int input(Tensor v, bool requires_grad = false);
    /// Leaf bound to a ParamStore entry; repeated calls with the same name
    /// return the same node, so weight sharing across time steps costs one
    /// node and gradient contributions accumulate on it.
    int param(const std::string& name);

    int addn(const std::vector<int>& xs);
    int scale(int x, double a);
    int cscale(int s, double a);
    int activation(int x, kernels::Act act);
    int pointwise_linear(int x, int w, int b);
    int mode_mul(int xhat, int r, std::size_t m1, std::size_t m2);
    int rfft2(int x);
    int irfft2(int s, std::size_t ny);
    int conv2d(int x, int k, int b, std::size_t stride, std::size_t pad);
    int conv_t2d(int x, int k, int b, std::size_t stride, std::size_t pad, std::size_t outpad);
    int reshape(int x, std::vector<std::size_t> dims);
    int concat_c(const std::vector<int>& xs);
    int mse_loss(int pred, Tensor target);

    std::size_t node_count() const { return nodes_.size(); }
    const Tensor& value(int id) const;
    const Spectrum& cvalue(int id) const;
    double scalar(int id) const;

    void backward(int loss);
    /// Gradient of a requires-grad input leaf, valid after backward().
    const Tensor& grad(int leaf_id) const;

private:
    struct Node {
        OpKind op = OpKind::Leaf;
        bool is_complex = false;
        bool requires_grad = false;
        std::vector<int> parents;
        Tensor val;
        Spectrum cval;
        Tensor grad;
        Spectrum cgrad;
        bool grad_live = false;
        kernels::Act act = kernels::Act::Identity;
        double alpha = 0.0;
        std::size_t m1 = 0, m2 = 0, ny = 0;
        kernels::ConvDims conv{};
        int param_id = -1;
        Tensor aux;
    };

    Node& at(int id);
    const Node& at(int id) const;
    int push(Node n);
    bool any_requires_grad(const std::vector<int>& ids) const;
    void ensure_grad(Node& n);
    void backward_node(int id);

    ParamStore* store_;
    std::vector<Node> nodes_;
    std::unordered_map<std::string, int> param_nodes_;
};

/// Max over coordinates of |analytic - central difference| relative error,
/// the binding check of the gradient contract.
double finite_diff_check(const std::function<double(const Tensor&)>& f, const Tensor& point,
                         const Tensor& analytic_grad, double eps);

} // namespace spectralseq
