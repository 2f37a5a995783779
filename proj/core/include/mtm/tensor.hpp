// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace mtm {

/// Dimensions of a tensor. Rank 0 is a scalar, rank 1 a vector and rank 2 a
/// row-major matrix; nothing above rank 2 is needed.
using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;  // allocated lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

}  // namespace detail

/// Handle to a node of a define-by-run computation graph. Copies share the
/// node. Operations on tensors that do not require gradients record nothing.
class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  static Tensor scalar(double v) { return constant({}, {v}); }
  static Tensor vector(std::vector<double> values);
  static Tensor zeros(Shape shape);
  /// Leaf whose gradient is accumulated by backward().
  static Tensor leaf(Shape shape, std::vector<double> values);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t size() const { return node_->value.size(); }
  /// Rows of a matrix; 1 for vectors and scalars.
  std::size_t rows() const { return rank() == 2 ? node_->shape[0] : 1; }
  /// Last dimension; 1 for scalars.
  std::size_t cols() const { return rank() == 0 ? 1 : node_->shape.back(); }

  const std::vector<double>& values() const { return node_->value; }
  double item() const;
  double operator[](std::size_t i) const { return node_->value[i]; }
  double at(std::size_t r, std::size_t c) const { return node_->value[r * cols() + c]; }

  bool requires_grad() const { return node_->requires_grad; }
  /// Empty until backward() reaches this tensor.
  const std::vector<double>& grad() const { return node_->grad; }

  detail::Node* node() const { return node_.get(); }
  const std::shared_ptr<detail::Node>& node_ptr() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  friend Tensor make_result(Shape, std::vector<double>, std::vector<Tensor>,
                            std::function<void(detail::Node&)>);

  std::shared_ptr<detail::Node> node_;
};

/// Creates an op result. The backward rule is attached only if a parent
/// requires gradients; it reads node.grad and accumulates into parents.
Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                   std::function<void(detail::Node&)> backward);

/// Reverse-mode sweep from a scalar. Leaf gradients accumulate.
void backward(const Tensor& loss);

// ---------------------------------------------------------------------------
// Operations. Shape violations raise DimensionError naming the operation.

Tensor matmul(const Tensor& a, const Tensor& b);      // (m,k)x(k,n)
Tensor transpose(const Tensor& a);                    // rank 2
/// Same shape, or a matrix plus a vector broadcast over rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);         // same shape
Tensor mul(const Tensor& a, const Tensor& b);         // elementwise, same shape
Tensor scale(const Tensor& a, double factor);
/// axis 0 stacks matrix rows or joins vectors; axis 1 joins matrix columns.
Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
/// Half-open range [begin, end) along axis (rows or columns for matrices).
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);
Tensor row(const Tensor& a, std::size_t r);           // matrix row as a vector
Tensor reshape(const Tensor& a, Shape shape);
/// Matrix: mean over axis 0 gives a column-mean vector, axis 1 row means.
/// Vector: axis 0 gives a scalar.
Tensor mean(const Tensor& a, std::size_t axis);
/// Mean of the selected rows of a matrix.
Tensor mean_rows(const Tensor& a, const std::vector<std::size_t>& rows);
Tensor sum(const Tensor& a);
Tensor softmax(const Tensor& a);                      // over the last axis
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);
Tensor gelu(const Tensor& a);                         // exact erf form
Tensor sigmoid(const Tensor& a);
Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids);
Tensor l2_norm(const Tensor& a);                      // scalar
Tensor squared_error(const Tensor& a, const Tensor& b);  // scalar sum of squares
/// -w [y ln p + (1-y) ln(1-p)] with p clamped to [1e-7, 1-1e-7]; p scalar.
Tensor binary_cross_entropy(const Tensor& p, double y, double weight = 1.0);

}  // namespace mtm
