#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

// Minimal reverse-mode automatic differentiation over dense row-major double
// tensors of rank 0..2. Operations evaluate eagerly and, when any input
// requires a gradient, record a node for backward().

namespace pickroute::autodiff {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);

namespace detail {
struct Node;
struct Access;
}

class Tensor {
 public:
  Tensor() = default;

  static Tensor constant(Shape shape, std::vector<double> values);
  /// Leaf tensor that accumulates gradients (a trainable parameter).
  static Tensor variable(Shape shape, std::vector<double> values);
  static Tensor zeros(Shape shape);
  static Tensor scalar(double value);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const;
  std::size_t rank() const { return shape().size(); }
  std::size_t size() const;
  /// Leading dimension (1 for scalars).
  std::size_t rows() const;
  /// Trailing dimension for rank 2, 1 otherwise.
  std::size_t cols() const;

  std::span<const double> values() const;
  /// Writable storage; only leaves may be modified in place.
  std::span<double> mutable_values();
  double item() const;
  double at(std::size_t row, std::size_t col) const;

  bool requires_grad() const;
  bool is_leaf() const;
  /// Accumulated gradient; empty when none has been propagated.
  std::span<const double> grad() const;
  void zero_grad();

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::Node> node_;

  friend struct detail::Access;
};

/// Disables graph recording on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_enabled();

// Primitives. Shape mismatches throw ContractViolation naming both shapes.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
/// Elementwise sum; `b` may also be a (1, cols) row broadcast over a's rows.
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor log(const Tensor& a);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

/// Row-wise softmax; entries with mask != 0 are excluded and get probability
/// exactly 0. A fully masked row is a contract violation.
Tensor masked_softmax(const Tensor& a, std::span<const std::uint8_t> mask);

/// Row-wise normalisation to zero mean and unit variance (epsilon inside the
/// square root, so constant rows map to zero), then gain and bias (1, cols).
Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias,
                  double epsilon = 1e-5);

/// Splits the columns into `heads` equal contiguous blocks.
std::vector<Tensor> split_heads(const Tensor& a, std::size_t heads);
/// Inverse of split_heads.
Tensor concat_heads(std::span<const Tensor> parts);

/// Rows of `a` selected by `indices` (repeats allowed).
Tensor gather_rows(const Tensor& a, std::span<const std::size_t> indices);
/// (rows, 1) tensor holding a[r, columns[r]].
Tensor pick(const Tensor& a, std::span<const std::size_t> columns);

/// Reverse-mode sweep from a scalar loss. Gradients accumulate into leaves.
/// Calling it again before the reached leaves are zeroed throws
/// ContractViolation: gradient buffers must be reset explicitly.
void backward(const Tensor& loss);

/// Central finite differences against backward() for every coordinate of
/// `leaves`. Returns max |g_ad - g_fd| / max(1, |g_fd|). Resets the leaves'
/// gradients.
double finite_diff_check(const std::function<Tensor()>& f, std::span<Tensor> leaves,
                         double eps = 1e-5);

}  // namespace pickroute::autodiff
