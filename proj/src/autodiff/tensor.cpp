#include "lasted/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "lasted/error.hpp"

namespace lasted::ad {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t extent : shape) {
        n *= extent;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            os << 'x';
        }
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace detail {

std::vector<double>& Node::grad_buffer() {
    if (grad.empty()) {
        grad.assign(value.size(), 0.0);
    }
    return grad;
}

}  // namespace detail

namespace {

void check_shape(const Shape& shape, std::size_t count) {
    for (std::size_t extent : shape) {
        if (extent == 0) {
            throw ShapeError("tensor extents must be positive, got " + shape_str(shape));
        }
    }
    if (shape_numel(shape) != count) {
        throw ShapeError("shape " + shape_str(shape) + " does not match " + std::to_string(count) +
                         " values");
    }
}

void check_finite(std::span<const double> values, const char* op) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NonFiniteError(std::string("non-finite value produced by ") + op);
        }
    }
}

// Post-order DFS without recursion so deep graphs cannot blow the stack.
std::vector<detail::Node*> topological_order(detail::Node* root) {
    std::vector<detail::Node*> order;
    std::unordered_set<detail::Node*> visited;
    std::vector<std::pair<detail::Node*, std::size_t>> stack;
    stack.emplace_back(root, 0);
    visited.insert(root);
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->inputs.size()) {
            detail::Node* child = node->inputs[next++].get();
            if (visited.insert(child).second) {
                stack.emplace_back(child, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    return order;
}

}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return full(std::move(shape), 0.0, requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    const std::size_t n = shape_numel(shape);
    return from(std::move(shape), std::vector<double>(n, value), requires_grad);
}

Tensor Tensor::from(Shape shape, std::vector<double> values, bool requires_grad) {
    check_shape(shape, values.size());
    check_finite(values, "leaf construction");
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    return Tensor(std::move(node));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return from({}, {value}, requires_grad);
}

const Shape& Tensor::shape() const { return node_->shape; }

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= node_->shape.size()) {
        throw ShapeError("axis " + std::to_string(axis) + " out of range for " +
                         shape_str(node_->shape));
    }
    return node_->shape[axis];
}

std::size_t Tensor::numel() const { return node_->value.size(); }

std::span<const double> Tensor::data() const { return node_->value; }

std::span<double> Tensor::mutable_data() { return node_->value; }

double Tensor::item() const {
    if (node_->value.size() != 1) {
        throw ShapeError("item() on tensor of shape " + shape_str(node_->shape));
    }
    return node_->value[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
    node_->requires_grad = flag;
    return *this;
}

bool Tensor::has_grad() const { return !node_->grad.empty(); }

std::span<const double> Tensor::grad() const { return node_->grad; }

void Tensor::zero_grad() {
    std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

const char* Tensor::op_name() const { return node_->op; }

Tensor Tensor::detach() const {
    return from(node_->shape, node_->value, false);
}

Tensor Tensor::make_result(Shape shape, std::vector<double> values, const char* op,
                           std::vector<Tensor> inputs,
                           std::function<void(detail::Node&)> backward) {
    check_shape(shape, values.size());
    check_finite(values, op);
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->op = op;
    bool any_grad = false;
    node->inputs.reserve(inputs.size());
    for (auto& input : inputs) {
        any_grad = any_grad || input.requires_grad();
        node->inputs.push_back(std::move(input.node_));
    }
    node->requires_grad = any_grad;
    if (any_grad) {
        node->backward = std::move(backward);
    } else {
        // Nothing upstream needs gradients; drop the history.
        node->inputs.clear();
    }
    return Tensor(std::move(node));
}

void Tensor::backward() const {
    if (node_->value.size() != 1) {
        throw ShapeError("backward() requires a scalar loss, got shape " +
                         shape_str(node_->shape));
    }
    if (!node_->requires_grad) {
        return;
    }
    const auto order = topological_order(node_.get());
    for (detail::Node* n : order) {
        if (n->backward) {
            std::fill(n->grad.begin(), n->grad.end(), 0.0);
        }
    }
    node_->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        detail::Node* n = *it;
        if (n->backward && !n->grad.empty()) {
            n->backward(*n);
        }
    }
}

std::size_t graph_size(const Tensor& root) {
    return topological_order(&root.node()).size();
}

}  // namespace lasted::ad
