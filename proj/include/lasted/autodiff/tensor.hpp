#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace lasted::ad {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

// One record of the differentiation graph. Inputs are held strongly, so the
// graph stays alive for as long as its output tensor does; leaves never hold
// references to their consumers, which keeps the structure acyclic.
struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until first accumulation
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<Node>> inputs;
    std::function<void(Node&)> backward;

    std::vector<double>& grad_buffer();
};

}  // namespace detail

/// Dense row-major tensor of doubles that can participate in reverse-mode
/// differentiation. Copies share the underlying node (handle semantics).
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const;

    std::span<const double> data() const;
    /// Writable view of the values. Only meaningful for leaves (parameters,
    /// inputs) that are not currently referenced by a live graph.
    std::span<double> mutable_data();
    double item() const;
    double operator[](std::size_t flat_index) const { return data()[flat_index]; }

    bool requires_grad() const;
    Tensor& set_requires_grad(bool flag);
    bool has_grad() const;
    /// Accumulated gradient; empty span when nothing has been accumulated.
    std::span<const double> grad() const;
    void zero_grad();

    /// Reverse pass from a scalar (rank 0 or single element) tensor.
    void backward() const;

    /// Detached copy of the values with no graph history.
    Tensor detach() const;

    const char* op_name() const;

    // Graph construction hook used by the operation implementations.
    static Tensor make_result(Shape shape, std::vector<double> values, const char* op,
                              std::vector<Tensor> inputs,
                              std::function<void(detail::Node&)> backward);

    detail::Node& node() const { return *node_; }

private:
    explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

    std::shared_ptr<detail::Node> node_;
};

/// Number of operation records reachable from `root`, root included.
std::size_t graph_size(const Tensor& root);

}  // namespace lasted::ad
