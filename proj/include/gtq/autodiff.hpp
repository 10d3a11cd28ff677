#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gtq/tensor.hpp"

namespace gtq::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the dynamic computation graph. Graphs are rebuilt on every
// forward pass on top of persistent leaf nodes (the trainable parameters).
// `backward_rule` maps this node's upstream gradient to one contribution
// per parent, in parent order.
struct Node {
    Tensor value;
    Tensor grad; // same shape, zero-initialized; only filled when requires_grad
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<std::vector<Tensor>(const Node& self, const Tensor& upstream)> backward_rule;

    explicit Node(Tensor v, bool req = false)
        : value(std::move(v)), grad(value.shape), requires_grad(req) {}

    void zero_grad() { grad.fill(0.0); }
};

NodePtr leaf(Tensor v, bool requires_grad = true);
NodePtr constant(Tensor v);

// Elementwise / structural ops. Each is gradient-checked in the tests.
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr add_rowvec(const NodePtr& a, const NodePtr& bias); // bias is 1xN, broadcast over rows
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr scale(const NodePtr& a, double c);
NodePtr matmul(const NodePtr& a, const NodePtr& b);
NodePtr transpose(const NodePtr& a);
NodePtr relu(const NodePtr& a);
NodePtr softmax_rows(const NodePtr& a);
NodePtr mean_rows(const NodePtr& a);                           // MxN -> 1xN
NodePtr sum_all(const NodePtr& a);                             // -> 1x1
NodePtr concat_cols(const std::vector<NodePtr>& parts);
NodePtr slice_cols(const NodePtr& a, std::size_t c0, std::size_t c1); // [c0, c1)
NodePtr gather_rows(const NodePtr& a, std::vector<std::size_t> idx);

// Propagate d(root)/d(node) into `grad` of every requires_grad node reachable
// from `root`, accumulating (+=). `backward` requires a 1x1 root and seeds 1;
// `backward_seeded` seeds an arbitrary upstream gradient (used to inject the
// quantum layer's gradient at the encoder output).
void backward(const NodePtr& root);
void backward_seeded(const NodePtr& root, const Tensor& seed);

void zero_grads(std::span<const NodePtr> params);

// Bias-corrected adaptive-moment update, applied in place to params whose
// grads are already populated. `t` is the 1-based step count.
struct AdamState {
    std::vector<Tensor> m, v;
};

void adam_step(std::span<const NodePtr> params, AdamState& state, double lr,
               double beta1, double beta2, double eps, int t);

class Adam {
public:
    explicit Adam(std::vector<NodePtr> params, double lr = 1e-3, double beta1 = 0.9,
                  double beta2 = 0.999, double eps = 1e-8)
        : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step() { adam_step(params_, state_, lr_, beta1_, beta2_, eps_, ++t_); }
    void zero_grad() { zero_grads(params_); }
    int steps_taken() const { return t_; }

private:
    std::vector<NodePtr> params_;
    AdamState state_;
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
};

} // namespace gtq::ad
