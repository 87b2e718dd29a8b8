#include "fairway/ad/graph.hpp"

#include <unordered_set>

#include "fairway/core/error.hpp"

namespace fairway::ad {

Var Var::constant(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = false;
    return Var(std::move(n));
}

Var Var::leaf(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = true;
    return Var(std::move(n));
}

NodePtr make_node(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    n->parents = std::move(parents);
    for (const auto& p : n->parents)
        if (p->requires_grad) n->requires_grad = true;
    if (n->requires_grad) n->backprop = std::move(backprop);
    return n;
}

void backward(const Var& root) {
    if (!root.defined()) throw ValidationError("backward on undefined Var");
    if (root.value().numel() != 1) throw ValidationError("backward root must be scalar");
    if (!root.requires_grad()) return;

    // Iterative post-order DFS; the reverse of the resulting list is a
    // valid topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    visited.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        bool descended = false;
        while (idx < node->parents.size()) {
            Node* p = node->parents[idx++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
                descended = true;
                break;
            }
        }
        if (descended) continue;
        order.push_back(node);
        stack.pop_back();
    }

    for (Node* n : order) n->ensure_grad();
    root.node()->grad.fill(1.0);

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* n = *it;
        if (n->backprop) n->backprop(*n);
    }
}

} // namespace fairway::ad
