#include "pickroute/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "pickroute/error.hpp"

namespace pickroute::autodiff {

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool requires_grad = false;
  bool leaf = false;
  bool grad_pending = false;

  std::vector<double>& grad_buffer() {
    if (grad.empty()) grad.assign(value.size(), 0.0);
    return grad;
  }
};

struct Access {
  static const std::shared_ptr<Node>& node(const Tensor& t) { return t.node_; }
  static Tensor wrap(std::shared_ptr<Node> node) { return Tensor(std::move(node)); }
};

}  // namespace detail

namespace {

using detail::Access;
using detail::Node;
using NodePtr = std::shared_ptr<Node>;

thread_local bool g_grad_enabled = true;

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

const NodePtr& node_of(const Tensor& t, const char* op) {
  const auto& node = Access::node(t);
  if (!node) throw ContractViolation(std::string(op) + ": undefined tensor");
  return node;
}

void require_rank2(const Tensor& t, const char* op) {
  if (node_of(t, op)->shape.size() != 2) {
    throw ContractViolation(std::string(op) + ": expected a matrix, got shape " +
                            to_string(t.shape()));
  }
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw ContractViolation(std::string(op) + ": incompatible shapes " + to_string(a.shape()) +
                          " and " + to_string(b.shape()));
}

// Creates an op result; the backward closure is kept only when recording.
Tensor make_result(Shape shape, std::vector<double> value, std::vector<NodePtr> inputs,
                   std::function<void(Node&)> backward) {
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  const bool track = g_grad_enabled &&
                     std::any_of(inputs.begin(), inputs.end(),
                                 [](const NodePtr& p) { return p->requires_grad; });
  if (track) {
    node->requires_grad = true;
    node->parents = std::move(inputs);
    node->backward = std::move(backward);
  }
  return Access::wrap(std::move(node));
}

// C (n x m) += A (n x k) * B (k x m), optionally with A or B transposed in
// storage.
void gemm_accumulate(const double* a, const double* b, double* c, std::size_t n, std::size_t k,
                     std::size_t m, bool a_transposed, bool b_transposed) {
  for (std::size_t i = 0; i < n; ++i) {
    double* c_row = c + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double a_ip = a_transposed ? a[p * n + i] : a[i * k + p];
      if (a_ip == 0.0) continue;
      if (b_transposed) {
        for (std::size_t j = 0; j < m; ++j) c_row[j] += a_ip * b[j * k + p];
      } else {
        const double* b_row = b + p * m;
        for (std::size_t j = 0; j < m; ++j) c_row[j] += a_ip * b_row[j];
      }
    }
  }
}

}  // namespace

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) out << (i ? "," : "") << shape[i];
  out << ')';
  return out.str();
}

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  if (element_count(shape) != values.size()) {
    throw ContractViolation("Tensor: shape " + to_string(shape) + " does not match " +
                            std::to_string(values.size()) + " values");
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  node->leaf = true;
  return Tensor(std::move(node));
}

Tensor Tensor::variable(Shape shape, std::vector<double> values) {
  Tensor t = constant(std::move(shape), std::move(values));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::zeros(Shape shape) {
  const std::size_t count = element_count(shape);
  return constant(std::move(shape), std::vector<double>(count, 0.0));
}

Tensor Tensor::scalar(double value) { return constant({}, {value}); }

const Shape& Tensor::shape() const { return node_of(*this, "shape")->shape; }
std::size_t Tensor::size() const { return node_of(*this, "size")->value.size(); }
std::size_t Tensor::rows() const { return rank() == 0 ? 1 : shape()[0]; }
std::size_t Tensor::cols() const { return rank() == 2 ? shape()[1] : 1; }
std::span<const double> Tensor::values() const { return node_of(*this, "values")->value; }

std::span<double> Tensor::mutable_values() {
  const auto& node = node_of(*this, "mutable_values");
  if (!node->leaf) throw ContractViolation("mutable_values: only leaf tensors are writable");
  return node->value;
}

double Tensor::item() const {
  const auto& node = node_of(*this, "item");
  if (node->value.size() != 1) {
    throw ContractViolation("item: tensor of shape " + to_string(node->shape) + " is not a scalar");
  }
  return node->value[0];
}

double Tensor::at(std::size_t row, std::size_t col) const {
  return values()[row * cols() + col];
}

bool Tensor::requires_grad() const { return node_ && node_->requires_grad; }
bool Tensor::is_leaf() const { return node_ && node_->leaf; }
std::span<const double> Tensor::grad() const { return node_of(*this, "grad")->grad; }

void Tensor::zero_grad() {
  const auto& node = node_of(*this, "zero_grad");
  node->grad.clear();
  node->grad_pending = false;
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_enabled() { return g_grad_enabled; }

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  if (b.shape()[0] != k) shape_error("matmul", a, b);
  std::vector<double> out(n * m, 0.0);
  gemm_accumulate(a.values().data(), b.values().data(), out.data(), n, k, m, false, false);
  NodePtr pa = Access::node(a), pb = Access::node(b);
  return make_result({n, m}, std::move(out), {pa, pb}, [pa, pb, n, k, m](Node& self) {
    if (pa->requires_grad) {  // dA = dC * B^T
      gemm_accumulate(self.grad.data(), pb->value.data(), pa->grad_buffer().data(), n, m, k, false,
                      true);
    }
    if (pb->requires_grad) {  // dB = A^T * dC
      gemm_accumulate(pa->value.data(), self.grad.data(), pb->grad_buffer().data(), k, n, m, true,
                      false);
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  std::vector<double> out(n * m);
  const auto v = a.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j * n + i] = v[i * m + j];
  NodePtr pa = Access::node(a);
  return make_result({m, n}, std::move(out), {pa}, [pa, n, m](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) g[i * m + j] += self.grad[j * n + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  NodePtr pa = node_of(a, "add"), pb = node_of(b, "add");
  if (pa->shape == pb->shape) {
    std::vector<double> out(pa->value);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += pb->value[i];
    return make_result(pa->shape, std::move(out), {pa, pb}, [pa, pb](Node& self) {
      for (const auto& p : {pa, pb}) {
        if (!p->requires_grad) continue;
        auto& g = p->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    });
  }
  const bool row_broadcast = pa->shape.size() == 2 && pb->shape.size() == 2 &&
                             pb->shape[0] == 1 && pb->shape[1] == pa->shape[1];
  if (!row_broadcast) shape_error("add", a, b);
  const std::size_t n = pa->shape[0], m = pa->shape[1];
  std::vector<double> out(pa->value);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += pb->value[j];
  return make_result(pa->shape, std::move(out), {pa, pb}, [pa, pb, n, m](Node& self) {
    if (pa->requires_grad) {
      auto& g = pa->grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (pb->requires_grad) {
      auto& g = pb->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) g[j] += self.grad[i * m + j];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  NodePtr pa = node_of(a, "scale");
  std::vector<double> out(pa->value);
  for (double& v : out) v *= factor;
  return make_result(pa->shape, std::move(out), {pa}, [pa, factor](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor relu(const Tensor& a) {
  NodePtr pa = node_of(a, "relu");
  std::vector<double> out(pa->value);
  for (double& v : out) v = v > 0 ? v : 0.0;
  return make_result(pa->shape, std::move(out), {pa}, [pa](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (pa->value[i] > 0) g[i] += self.grad[i];
    }
  });
}

Tensor tanh(const Tensor& a) {
  NodePtr pa = node_of(a, "tanh");
  std::vector<double> out(pa->value);
  for (double& v : out) v = std::tanh(v);
  return make_result(pa->shape, std::move(out), {pa}, [pa](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[i] * (1.0 - self.value[i] * self.value[i]);
    }
  });
}

Tensor log(const Tensor& a) {
  NodePtr pa = node_of(a, "log");
  std::vector<double> out(pa->value);
  for (double& v : out) v = std::log(v);
  return make_result(pa->shape, std::move(out), {pa}, [pa](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / pa->value[i];
  });
}

Tensor sum(const Tensor& a) {
  NodePtr pa = node_of(a, "sum");
  double total = 0;
  for (double v : pa->value) total += v;
  return make_result({}, {total}, {pa}, [pa](Node& self) {
    auto& g = pa->grad_buffer();
    for (double& x : g) x += self.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  const auto count = static_cast<double>(node_of(a, "mean")->value.size());
  return scale(sum(a), 1.0 / count);
}

Tensor masked_softmax(const Tensor& a, std::span<const std::uint8_t> mask) {
  require_rank2(a, "masked_softmax");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  if (mask.size() != n * m) {
    throw ContractViolation("masked_softmax: mask has " + std::to_string(mask.size()) +
                            " entries for shape " + to_string(a.shape()));
  }
  const auto v = a.values();
  std::vector<double> out(n * m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (!mask[i * m + j]) peak = std::max(peak, v[i * m + j]);
    }
    if (peak == -std::numeric_limits<double>::infinity()) {
      throw ContractViolation("masked_softmax: row " + std::to_string(i) + " is fully masked");
    }
    double total = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask[i * m + j]) continue;
      out[i * m + j] = std::exp(v[i * m + j] - peak);
      total += out[i * m + j];
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= total;
  }
  NodePtr pa = Access::node(a);
  return make_result({n, m}, std::move(out), {pa}, [pa, n, m](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0;
      for (std::size_t j = 0; j < m; ++j) dot += self.value[i * m + j] * self.grad[i * m + j];
      for (std::size_t j = 0; j < m; ++j) {
        g[i * m + j] += self.value[i * m + j] * (self.grad[i * m + j] - dot);
      }
    }
  });
}

Tensor layer_norm(const Tensor& a, const Tensor& gain, const Tensor& bias, double epsilon) {
  require_rank2(a, "layer_norm");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  const Shape row_shape{1, m};
  if (gain.shape() != row_shape) shape_error("layer_norm (gain)", a, gain);
  if (bias.shape() != row_shape) shape_error("layer_norm (bias)", a, bias);
  const auto v = a.values();
  const auto gv = gain.values();
  const auto bv = bias.values();
  std::vector<double> normalized(n * m), inv_std(n), out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0;
    for (std::size_t j = 0; j < m; ++j) mu += v[i * m + j];
    mu /= static_cast<double>(m);
    double var = 0;
    for (std::size_t j = 0; j < m; ++j) var += (v[i * m + j] - mu) * (v[i * m + j] - mu);
    var /= static_cast<double>(m);
    inv_std[i] = 1.0 / std::sqrt(var + epsilon);
    for (std::size_t j = 0; j < m; ++j) {
      normalized[i * m + j] = (v[i * m + j] - mu) * inv_std[i];
      out[i * m + j] = normalized[i * m + j] * gv[j] + bv[j];
    }
  }
  NodePtr pa = Access::node(a), pg = Access::node(gain), pb = Access::node(bias);
  return make_result(
      {n, m}, std::move(out), {pa, pg, pb},
      [pa, pg, pb, n, m, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Node& self) {
        if (pg->requires_grad) {
          auto& g = pg->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) g[j] += self.grad[i * m + j] * normalized[i * m + j];
        }
        if (pb->requires_grad) {
          auto& g = pb->grad_buffer();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) g[j] += self.grad[i * m + j];
        }
        if (pa->requires_grad) {
          auto& g = pa->grad_buffer();
          const double inv_m = 1.0 / static_cast<double>(m);
          for (std::size_t i = 0; i < n; ++i) {
            double sum_d = 0, sum_dx = 0;
            for (std::size_t j = 0; j < m; ++j) {
              const double d = self.grad[i * m + j] * pg->value[j];
              sum_d += d;
              sum_dx += d * normalized[i * m + j];
            }
            for (std::size_t j = 0; j < m; ++j) {
              const double d = self.grad[i * m + j] * pg->value[j];
              g[i * m + j] +=
                  inv_std[i] * (d - inv_m * sum_d - normalized[i * m + j] * inv_m * sum_dx);
            }
          }
        }
      });
}

std::vector<Tensor> split_heads(const Tensor& a, std::size_t heads) {
  require_rank2(a, "split_heads");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  if (heads == 0 || m % heads != 0) {
    throw ContractViolation("split_heads: " + std::to_string(m) + " columns not divisible by " +
                            std::to_string(heads) + " heads");
  }
  const std::size_t width = m / heads;
  NodePtr pa = Access::node(a);
  std::vector<Tensor> parts;
  parts.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    std::vector<double> out(n * width);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < width; ++j) out[i * width + j] = pa->value[i * m + h * width + j];
    parts.push_back(make_result({n, width}, std::move(out), {pa}, [pa, n, m, width, h](Node& self) {
      auto& g = pa->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < width; ++j) g[i * m + h * width + j] += self.grad[i * width + j];
    }));
  }
  return parts;
}

Tensor concat_heads(std::span<const Tensor> parts) {
  if (parts.empty()) throw ContractViolation("concat_heads: no parts");
  std::vector<NodePtr> inputs;
  const std::size_t n = node_of(parts[0], "concat_heads")->shape.at(0);
  std::vector<std::size_t> offsets;
  std::size_t m = 0;
  for (const auto& part : parts) {
    require_rank2(part, "concat_heads");
    if (part.shape()[0] != n) shape_error("concat_heads", parts[0], part);
    inputs.push_back(Access::node(part));
    offsets.push_back(m);
    m += part.shape()[1];
  }
  std::vector<double> out(n * m);
  for (std::size_t p = 0; p < inputs.size(); ++p) {
    const std::size_t w = inputs[p]->shape[1];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < w; ++j) out[i * m + offsets[p] + j] = inputs[p]->value[i * w + j];
  }
  return make_result({n, m}, std::move(out), inputs, [inputs, offsets, n, m](Node& self) {
    for (std::size_t p = 0; p < inputs.size(); ++p) {
      if (!inputs[p]->requires_grad) continue;
      const std::size_t w = inputs[p]->shape[1];
      auto& g = inputs[p]->grad_buffer();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) g[i * w + j] += self.grad[i * m + offsets[p] + j];
    }
  });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> indices) {
  require_rank2(a, "gather_rows");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<double> out(idx.size() * m);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] >= n) throw ContractViolation("gather_rows: row index out of range");
    std::copy_n(a.values().begin() + static_cast<std::ptrdiff_t>(idx[r] * m), m,
                out.begin() + static_cast<std::ptrdiff_t>(r * m));
  }
  NodePtr pa = Access::node(a);
  return make_result({idx.size(), m}, std::move(out), {pa}, [pa, idx, m](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < m; ++j) g[idx[r] * m + j] += self.grad[r * m + j];
  });
}

Tensor pick(const Tensor& a, std::span<const std::size_t> columns) {
  require_rank2(a, "pick");
  const std::size_t n = a.shape()[0], m = a.shape()[1];
  if (columns.size() != n) {
    throw ContractViolation("pick: " + std::to_string(columns.size()) + " column indices for " +
                            std::to_string(n) + " rows");
  }
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    if (cols[r] >= m) throw ContractViolation("pick: column index out of range");
    out[r] = a.values()[r * m + cols[r]];
  }
  NodePtr pa = Access::node(a);
  return make_result({n, 1}, std::move(out), {pa}, [pa, cols, m](Node& self) {
    auto& g = pa->grad_buffer();
    for (std::size_t r = 0; r < cols.size(); ++r) g[r * m + cols[r]] += self.grad[r];
  });
}

void backward(const Tensor& loss) {
  const NodePtr& root = node_of(loss, "backward");
  if (root->value.size() != 1) {
    throw ContractViolation("backward: loss must be a scalar, got shape " + to_string(root->shape));
  }
  if (!root->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    auto& [node, next_parent] = stack.back();
    if (next_parent < node->parents.size()) {
      Node* parent = node->parents[next_parent++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.emplace_back(parent, 0);
      continue;
    }
    order.push_back(node);
    stack.pop_back();
  }

  for (Node* node : order) {
    if (node->leaf && node->grad_pending) {
      throw ContractViolation(
          "backward: gradients from a previous backward() were not reset (call zero_grad)");
    }
  }

  root->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->leaf) {
      node->grad_pending = true;
      continue;
    }
    if (!node->grad.empty() && node->backward) node->backward(*node);
    node->grad.clear();
    node->grad.shrink_to_fit();
  }
}

double finite_diff_check(const std::function<Tensor()>& f, std::span<Tensor> leaves, double eps) {
  for (auto& leaf : leaves) leaf.zero_grad();
  backward(f());
  std::vector<std::vector<double>> analytic;
  for (auto& leaf : leaves) {
    const auto g = leaf.grad();
    analytic.emplace_back(g.begin(), g.end());
    if (analytic.back().empty()) analytic.back().assign(leaf.size(), 0.0);
    leaf.zero_grad();
  }

  NoGradGuard no_grad;
  double worst = 0;
  for (std::size_t p = 0; p < leaves.size(); ++p) {
    auto values = leaves[p].mutable_values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double original = values[i];
      values[i] = original + eps;
      const double up = f().item();
      values[i] = original - eps;
      const double down = f().item();
      values[i] = original;
      const double numeric = (up - down) / (2 * eps);
      worst = std::max(worst, std::abs(analytic[p][i] - numeric) / std::max(1.0, std::abs(numeric)));
    }
  }
  return worst;
}

}  // namespace pickroute::autodiff
