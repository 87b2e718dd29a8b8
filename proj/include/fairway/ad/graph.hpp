#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "fairway/core/tensor.hpp"

namespace fairway::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// One vertex of the dynamic computation graph. The backprop closure
/// reads this node's grad and accumulates into the parents' grads.
struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_alloc = false;
    std::vector<NodePtr> parents;
    std::function<void(Node&)> backprop;

    void ensure_grad() {
        if (!grad_alloc) {
            grad = Tensor::zeros(value.shape());
            grad_alloc = true;
        }
    }
};

/// Value-semantic handle on a graph node. A fresh graph is built per
/// forward pass; parameters are long-lived leaf nodes.
class Var {
public:
    Var() = default;
    explicit Var(NodePtr n) : node_(std::move(n)) {}

    /// Non-differentiable input.
    static Var constant(Tensor t);
    /// Differentiable leaf (parameter or probed input).
    static Var leaf(Tensor t);

    bool defined() const { return node_ != nullptr; }
    const Tensor& value() const { return node_->value; }
    Tensor& mutable_value() { return node_->value; }
    bool requires_grad() const { return node_->requires_grad; }
    Tensor& grad() {
        node_->ensure_grad();
        return node_->grad;
    }
    void clear_grad() {
        node_->grad_alloc = false;
        node_->grad = Tensor();
    }
    const NodePtr& node() const { return node_; }

private:
    NodePtr node_;
};

/// Reverse-mode sweep from a scalar root; seeds root grad with 1.
void backward(const Var& root);

NodePtr make_node(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> backprop);

} // namespace fairway::ad
