#include "gtq/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace gtq::ad {

namespace {

NodePtr make_node(Tensor value, std::vector<NodePtr> parents,
                  std::function<std::vector<Tensor>(const Node&, const Tensor&)> rule) {
    bool req = false;
    for (const auto& p : parents) req = req || p->requires_grad;
    auto n = std::make_shared<Node>(std::move(value), req);
    if (req) {
        n->parents = std::move(parents);
        n->backward_rule = std::move(rule);
    }
    return n;
}

void require_2d(const NodePtr& a, const char* op) {
    if (a->value.shape.size() != 2)
        throw DimensionError(std::string(op) + ": rank-2 tensor required, got " +
                             a->value.shape_str());
}

} // namespace

NodePtr leaf(Tensor v, bool requires_grad) {
    return std::make_shared<Node>(std::move(v), requires_grad);
}

NodePtr constant(Tensor v) { return std::make_shared<Node>(std::move(v), false); }

NodePtr add(const NodePtr& a, const NodePtr& b) {
    if (!a->value.same_shape(b->value))
        throw DimensionError("add: shape mismatch " + a->value.shape_str() + " vs " +
                             b->value.shape_str());
    Tensor out = a->value;
    out += b->value;
    return make_node(std::move(out), {a, b}, [](const Node&, const Tensor& g) {
        return std::vector<Tensor>{g, g};
    });
}

NodePtr add_rowvec(const NodePtr& a, const NodePtr& bias) {
    require_2d(a, "add_rowvec");
    if (bias->value.rows() != 1 || bias->value.cols() != a->value.cols())
        throw DimensionError("add_rowvec: bias must be 1x" + std::to_string(a->value.cols()));
    const std::size_t m = a->value.rows(), n = a->value.cols();
    Tensor out = a->value;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) out.at(r, c) += bias->value[c];
    return make_node(std::move(out), {a, bias}, [m, n](const Node&, const Tensor& g) {
        Tensor gb({1, n});
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) gb[c] += g.at(r, c);
        return std::vector<Tensor>{g, std::move(gb)};
    });
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
    if (!a->value.same_shape(b->value))
        throw DimensionError("mul: shape mismatch " + a->value.shape_str() + " vs " +
                             b->value.shape_str());
    Tensor out = a->value;
    for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
    return make_node(std::move(out), {a, b}, [](const Node& self, const Tensor& g) {
        const Tensor& av = self.parents[0]->value;
        const Tensor& bv = self.parents[1]->value;
        Tensor ga(av.shape), gb(bv.shape);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga[i] = g[i] * bv[i];
            gb[i] = g[i] * av[i];
        }
        return std::vector<Tensor>{std::move(ga), std::move(gb)};
    });
}

NodePtr scale(const NodePtr& a, double c) {
    Tensor out = a->value;
    for (double& x : out.data) x *= c;
    return make_node(std::move(out), {a}, [c](const Node&, const Tensor& g) {
        Tensor ga = g;
        for (double& x : ga.data) x *= c;
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const std::size_t m = a->value.rows(), k = a->value.cols();
    const std::size_t k2 = b->value.rows(), n = b->value.cols();
    if (k != k2)
        throw DimensionError("matmul: inner dimensions disagree " + a->value.shape_str() +
                             " vs " + b->value.shape_str());
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a->value.at(i, p);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) out.at(i, j) += av * b->value.at(p, j);
        }
    return make_node(std::move(out), {a, b}, [m, k, n](const Node& self, const Tensor& g) {
        const Tensor& av = self.parents[0]->value;
        const Tensor& bv = self.parents[1]->value;
        Tensor ga({m, k}), gb({k, n});
        // ga = g . b^T
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                const double gv = g.at(i, j);
                if (gv == 0.0) continue;
                for (std::size_t p = 0; p < k; ++p) ga.at(i, p) += gv * bv.at(p, j);
            }
        // gb = a^T . g
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
                const double av2 = av.at(i, p);
                if (av2 == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) gb.at(p, j) += av2 * g.at(i, j);
            }
        return std::vector<Tensor>{std::move(ga), std::move(gb)};
    });
}

NodePtr transpose(const NodePtr& a) {
    require_2d(a, "transpose");
    const std::size_t m = a->value.rows(), n = a->value.cols();
    Tensor out({n, m});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) out.at(j, i) = a->value.at(i, j);
    return make_node(std::move(out), {a}, [m, n](const Node&, const Tensor& g) {
        Tensor ga({m, n});
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) ga.at(i, j) = g.at(j, i);
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr relu(const NodePtr& a) {
    Tensor out = a->value;
    for (double& x : out.data) x = x > 0.0 ? x : 0.0;
    return make_node(std::move(out), {a}, [](const Node& self, const Tensor& g) {
        const Tensor& av = self.parents[0]->value;
        Tensor ga(av.shape);
        for (std::size_t i = 0; i < g.numel(); ++i) ga[i] = av[i] > 0.0 ? g[i] : 0.0;
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr softmax_rows(const NodePtr& a) {
    require_2d(a, "softmax_rows");
    const std::size_t m = a->value.rows(), n = a->value.cols();
    Tensor out({m, n});
    for (std::size_t r = 0; r < m; ++r) {
        double mx = a->value.at(r, 0);
        for (std::size_t c = 1; c < n; ++c) mx = std::max(mx, a->value.at(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double e = std::exp(a->value.at(r, c) - mx);
            out.at(r, c) = e;
            sum += e;
        }
        for (std::size_t c = 0; c < n; ++c) out.at(r, c) /= sum;
    }
    return make_node(std::move(out), {a}, [m, n](const Node& self, const Tensor& g) {
        const Tensor& y = self.value;
        Tensor ga({m, n});
        for (std::size_t r = 0; r < m; ++r) {
            double dot = 0.0;
            for (std::size_t c = 0; c < n; ++c) dot += g.at(r, c) * y.at(r, c);
            for (std::size_t c = 0; c < n; ++c)
                ga.at(r, c) = y.at(r, c) * (g.at(r, c) - dot);
        }
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr mean_rows(const NodePtr& a) {
    require_2d(a, "mean_rows");
    const std::size_t m = a->value.rows(), n = a->value.cols();
    if (m == 0) throw DimensionError("mean_rows: empty tensor");
    Tensor out({1, n});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) out[c] += a->value.at(r, c);
    for (std::size_t c = 0; c < n; ++c) out[c] /= static_cast<double>(m);
    return make_node(std::move(out), {a}, [m, n](const Node&, const Tensor& g) {
        Tensor ga({m, n});
        const double inv = 1.0 / static_cast<double>(m);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) ga.at(r, c) = g[c] * inv;
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr sum_all(const NodePtr& a) {
    double s = 0.0;
    for (double v : a->value.data) s += v;
    return make_node(Tensor::scalar(s), {a}, [](const Node& self, const Tensor& g) {
        Tensor ga(self.parents[0]->value.shape);
        ga.fill(g[0]);
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr concat_cols(const std::vector<NodePtr>& parts) {
    if (parts.empty()) throw DimensionError("concat_cols: no parts");
    const std::size_t m = parts[0]->value.rows();
    std::size_t n = 0;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        require_2d(p, "concat_cols");
        if (p->value.rows() != m) throw DimensionError("concat_cols: row count mismatch");
        widths.push_back(p->value.cols());
        n += p->value.cols();
    }
    Tensor out({m, n});
    std::size_t off = 0;
    for (const auto& p : parts) {
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < p->value.cols(); ++c)
                out.at(r, off + c) = p->value.at(r, c);
        off += p->value.cols();
    }
    return make_node(std::move(out), parts, [m, widths](const Node&, const Tensor& g) {
        std::vector<Tensor> grads;
        std::size_t off = 0;
        for (std::size_t w : widths) {
            Tensor gp({m, w});
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < w; ++c) gp.at(r, c) = g.at(r, off + c);
            grads.push_back(std::move(gp));
            off += w;
        }
        return grads;
    });
}

NodePtr slice_cols(const NodePtr& a, std::size_t c0, std::size_t c1) {
    require_2d(a, "slice_cols");
    const std::size_t m = a->value.rows(), n = a->value.cols();
    if (c0 >= c1 || c1 > n) throw DimensionError("slice_cols: bad column range");
    Tensor out({m, c1 - c0});
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = c0; c < c1; ++c) out.at(r, c - c0) = a->value.at(r, c);
    return make_node(std::move(out), {a}, [m, n, c0, c1](const Node&, const Tensor& g) {
        Tensor ga({m, n});
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = c0; c < c1; ++c) ga.at(r, c) = g.at(r, c - c0);
        return std::vector<Tensor>{std::move(ga)};
    });
}

NodePtr gather_rows(const NodePtr& a, std::vector<std::size_t> idx) {
    require_2d(a, "gather_rows");
    const std::size_t m = a->value.rows(), n = a->value.cols();
    for (std::size_t i : idx)
        if (i >= m) throw DimensionError("gather_rows: row index out of range");
    Tensor out({idx.size(), n});
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < n; ++c) out.at(r, c) = a->value.at(idx[r], c);
    return make_node(std::move(out), {a},
                     [m, n, idx = std::move(idx)](const Node&, const Tensor& g) {
                         Tensor ga({m, n});
                         for (std::size_t r = 0; r < idx.size(); ++r)
                             for (std::size_t c = 0; c < n; ++c)
                                 ga.at(idx[r], c) += g.at(r, c);
                         return std::vector<Tensor>{std::move(ga)};
                     });
}

namespace {

// Iterative post-order DFS; returns nodes with parents before children.
std::vector<Node*> topo_order(Node* root) {
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (!visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

} // namespace

void backward_seeded(const NodePtr& root, const Tensor& seed) {
    if (!root->value.same_shape(seed))
        throw DimensionError("backward_seeded: seed shape " + seed.shape_str() +
                             " does not match root " + root->value.shape_str());
    std::vector<Node*> order = topo_order(root.get());
    // Upstream gradients accumulate in scratch storage so repeated backward
    // calls on one graph add cleanly into node.grad (+= semantics).
    std::unordered_map<Node*, Tensor> up;
    up.reserve(order.size());
    up.emplace(root.get(), seed);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        auto found = up.find(node);
        if (found == up.end()) continue; // not on a path from the root
        const Tensor& g = found->second;
        if (node->requires_grad) node->grad += g;
        if (!node->backward_rule) continue;
        std::vector<Tensor> contribs = node->backward_rule(*node, g);
        for (std::size_t i = 0; i < node->parents.size(); ++i) {
            Node* p = node->parents[i].get();
            if (!p->requires_grad && p->parents.empty()) continue;
            auto [slot, inserted] = up.try_emplace(p, std::move(contribs[i]));
            if (!inserted) slot->second += contribs[i];
        }
    }
}

void backward(const NodePtr& root) {
    if (root->value.numel() != 1)
        throw ContractError("backward: root must be scalar, got " + root->value.shape_str());
    backward_seeded(root, Tensor::scalar(1.0));
}

void zero_grads(std::span<const NodePtr> params) {
    for (const auto& p : params) p->zero_grad();
}

void adam_step(std::span<const NodePtr> params, AdamState& state, double lr,
               double beta1, double beta2, double eps, int t) {
    if (t < 1) throw ContractError("adam_step: step count must be >= 1");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.emplace_back(p->value.shape);
            state.v.emplace_back(p->value.shape);
        }
    }
    if (state.m.size() != params.size())
        throw ContractError("adam_step: parameter list changed size");
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        Node& p = *params[i];
        for (std::size_t j = 0; j < p.value.numel(); ++j) {
            const double g = p.grad[j];
            state.m[i][j] = beta1 * state.m[i][j] + (1.0 - beta1) * g;
            state.v[i][j] = beta2 * state.v[i][j] + (1.0 - beta2) * g * g;
            const double mhat = state.m[i][j] / bc1;
            const double vhat = state.v[i][j] / bc2;
            p.value[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

} // namespace gtq::ad
