// SPDX-License-Identifier: Apache-2.0
#include "mtm/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include <cblas.h>

#include "mtm/error.hpp"

namespace mtm {

using detail::Node;

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + ")";
}

namespace {

std::shared_ptr<Node> new_node(Shape shape, std::vector<double> values) {
  if (shape.size() > 2) throw DimensionError("tensor", "rank above 2 is unsupported");
  if (shape_size(shape) != values.size()) {
    throw DimensionError("tensor", "shape " + shape_string(shape) + " holds " +
                                       std::to_string(shape_size(shape)) + " values, got " +
                                       std::to_string(values.size()));
  }
  auto node = std::make_shared<Node>();
  node->shape = std::move(shape);
  node->value = std::move(values);
  return node;
}

// The detail message is only built on failure.
#define MTM_REQUIRE(ok, op, detail)                 \
  do {                                              \
    if (!(ok)) throw DimensionError((op), (detail)); \
  } while (0)

std::string shapes(const Tensor& a, const Tensor& b) {
  return shape_string(a.shape()) + " vs " + shape_string(b.shape());
}

// Parent accessors inside backward rules.
Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

template <typename Fn>
Tensor unary(const Tensor& a, Fn&& fn, std::function<void(Node&)> back) {
  std::vector<double> out(a.size());
  const auto& x = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(x[i]);
  return make_result(a.shape(), std::move(out), {a}, std::move(back));
}

}  // namespace

Tensor Tensor::constant(Shape shape, std::vector<double> values) {
  return Tensor(new_node(std::move(shape), std::move(values)));
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return constant({n}, std::move(values));
}

Tensor Tensor::zeros(Shape shape) {
  const std::size_t n = shape_size(shape);
  return constant(std::move(shape), std::vector<double>(n, 0.0));
}

Tensor Tensor::leaf(Shape shape, std::vector<double> values) {
  auto node = new_node(std::move(shape), std::move(values));
  node->requires_grad = true;
  return Tensor(std::move(node));
}

double Tensor::item() const {
  if (size() != 1) throw ContractError("item() on tensor of shape " + shape_string(shape()));
  return node_->value[0];
}

Tensor make_result(Shape shape, std::vector<double> values, std::vector<Tensor> parents,
                   std::function<void(Node&)> backward) {
  auto node = new_node(std::move(shape), std::move(values));
  const bool needs = std::any_of(parents.begin(), parents.end(),
                                 [](const Tensor& p) { return p.requires_grad(); });
  if (needs) {
    node->requires_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_ptr());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

void backward(const Tensor& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw ContractError("backward: loss must be a scalar");
  }
  if (!loss.requires_grad()) return;
  // Iterative post-order DFS gives a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{loss.node(), 0}};
  visited.insert(loss.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss.node()->grad_buffer()[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* node = *it;
    if (node->backward && !node->grad.empty()) node->backward(*node);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  MTM_REQUIRE(a.rank() == 2 && b.rank() == 2 && a.shape()[1] == b.shape()[0], "matmul", shapes(a, b));
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(m * n, 0.0);
  const auto M = static_cast<int>(m), K = static_cast<int>(k), N = static_cast<int>(n);
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, M, N, K, 1.0, a.values().data(), K, b.values().data(), N,
              0.0, out.data(), N);
  return make_result({m, n}, std::move(out), {a, b}, [M, K, N](Node& self) {
    Node& na = parent(self, 0);
    Node& nb = parent(self, 1);
    const double* G = self.grad.data();
    // dA += G B^T, dB += A^T G
    if (na.requires_grad) {
      cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, M, K, N, 1.0, G, N, nb.value.data(), N, 1.0,
                  na.grad_buffer().data(), K);
    }
    if (nb.requires_grad) {
      cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, K, N, M, 1.0, na.value.data(), K, G, N, 1.0,
                  nb.grad_buffer().data(), N);
    }
  });
}

Tensor transpose(const Tensor& a) {
  MTM_REQUIRE(a.rank() == 2, "transpose", "expected a matrix, got " + shape_string(a.shape()));
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.values()[i * n + j];
  return make_result({n, m}, std::move(out), {a}, [m, n](Node& self) {
    auto& ga = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[j * m + i];
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() == b.shape()) {
    std::vector<double> out(a.values());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
    return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
      for (std::size_t p = 0; p < 2; ++p) {
        Node& n = parent(self, p);
        if (!n.requires_grad) continue;
        auto& g = n.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
      }
    });
  }
  MTM_REQUIRE(a.rank() == 2 && b.rank() == 1 && a.shape()[1] == b.shape()[0], "add", shapes(a, b));
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += b.values()[j];
  return make_result(a.shape(), std::move(out), {a, b}, [m, n](Node& self) {
    Node& na = parent(self, 0);
    Node& nb = parent(self, 1);
    if (na.requires_grad) {
      auto& g = na.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
    if (nb.requires_grad) {
      auto& g = nb.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[i * n + j];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  MTM_REQUIRE(a.shape() == b.shape(), "sub", shapes(a, b));
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.values()[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      Node& n = parent(self, p);
      if (!n.requires_grad) continue;
      const double sign = p == 0 ? 1.0 : -1.0;
      auto& g = n.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign * self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  MTM_REQUIRE(a.shape() == b.shape(), "mul", shapes(a, b));
  std::vector<double> out(a.values());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.values()[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](Node& self) {
    Node& na = parent(self, 0);
    Node& nb = parent(self, 1);
    if (na.requires_grad) {
      auto& g = na.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * nb.value[i];
    }
    if (nb.requires_grad) {
      auto& g = nb.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * na.value[i];
    }
  });
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return x * factor; }, [factor](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += factor * self.grad[i];
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  MTM_REQUIRE(!parts.empty(), "concat", "no inputs");
  const std::size_t rank = parts[0].rank();
  MTM_REQUIRE(rank >= 1 && axis < rank, "concat", "axis " + std::to_string(axis) + " invalid for rank " +
                                                  std::to_string(rank));
  for (const auto& p : parts) MTM_REQUIRE(p.rank() == rank, "concat", shapes(parts[0], p));

  if (rank == 1 || axis == 0) {
    // Contiguous blocks appended one after another.
    Shape shape = parts[0].shape();
    shape[0] = 0;
    std::vector<double> out;
    std::vector<std::size_t> offsets;
    for (const auto& p : parts) {
      if (rank == 2) MTM_REQUIRE(p.shape()[1] == parts[0].shape()[1], "concat", shapes(parts[0], p));
      offsets.push_back(out.size());
      shape[0] += p.shape()[0];
      out.insert(out.end(), p.values().begin(), p.values().end());
    }
    return make_result(std::move(shape), std::move(out), parts, [offsets](Node& self) {
      for (std::size_t p = 0; p < self.parents.size(); ++p) {
        Node& n = parent(self, p);
        if (!n.requires_grad) continue;
        auto& g = n.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[offsets[p] + i];
      }
    });
  }
  const std::size_t m = parts[0].shape()[0];
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    MTM_REQUIRE(p.shape()[0] == m, "concat", shapes(parts[0], p));
    widths.push_back(p.shape()[1]);
    total += p.shape()[1];
  }
  std::vector<double> out(m * total);
  std::size_t col = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (std::size_t i = 0; i < m; ++i)
      std::copy_n(parts[p].values().begin() + static_cast<std::ptrdiff_t>(i * widths[p]), widths[p],
                  out.begin() + static_cast<std::ptrdiff_t>(i * total + col));
    col += widths[p];
  }
  return make_result({m, total}, std::move(out), parts, [m, total, widths](Node& self) {
    std::size_t col = 0;
    for (std::size_t p = 0; p < self.parents.size(); ++p) {
      Node& n = parent(self, p);
      if (n.requires_grad) {
        auto& g = n.grad_buffer();
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < widths[p]; ++j) g[i * widths[p] + j] += self.grad[i * total + col + j];
      }
      col += widths[p];
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  MTM_REQUIRE(a.rank() >= 1 && axis < a.rank(), "slice", "axis out of range for " + shape_string(a.shape()));
  MTM_REQUIRE(begin <= end && end <= a.shape()[axis], "slice",
          "range [" + std::to_string(begin) + "," + std::to_string(end) + ") outside " +
              shape_string(a.shape()));
  if (a.rank() == 1 || axis == 0) {
    const std::size_t stride = a.rank() == 2 ? a.shape()[1] : 1;
    Shape shape = a.shape();
    shape[0] = end - begin;
    std::vector<double> out(a.values().begin() + static_cast<std::ptrdiff_t>(begin * stride),
                            a.values().begin() + static_cast<std::ptrdiff_t>(end * stride));
    const std::size_t offset = begin * stride;
    return make_result(std::move(shape), std::move(out), {a}, [offset](Node& self) {
      auto& g = parent(self, 0).grad_buffer();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[offset + i] += self.grad[i];
    });
  }
  const std::size_t m = a.shape()[0], n = a.shape()[1], w = end - begin;
  std::vector<double> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.values()[i * n + begin + j];
  return make_result({m, w}, std::move(out), {a}, [m, n, w, begin](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) g[i * n + begin + j] += self.grad[i * w + j];
  });
}

Tensor row(const Tensor& a, std::size_t r) {
  MTM_REQUIRE(a.rank() == 2, "row", "expected a matrix, got " + shape_string(a.shape()));
  return reshape(slice(a, 0, r, r + 1), {a.shape()[1]});
}

Tensor reshape(const Tensor& a, Shape shape) {
  MTM_REQUIRE(shape_size(shape) == a.size(), "reshape", shape_string(a.shape()) + " to " + shape_string(shape));
  return make_result(std::move(shape), a.values(), {a}, [](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
  });
}

Tensor mean(const Tensor& a, std::size_t axis) {
  MTM_REQUIRE(a.rank() >= 1 && axis < a.rank(), "mean", "axis out of range for " + shape_string(a.shape()));
  if (a.rank() == 1) {
    const double n = static_cast<double>(a.size());
    MTM_REQUIRE(a.size() > 0, "mean", "empty input");
    double s = 0.0;
    for (double v : a.values()) s += v;
    return make_result({}, {s / n}, {a}, [n](Node& self) {
      auto& g = parent(self, 0).grad_buffer();
      for (auto& v : g) v += self.grad[0] / n;
    });
  }
  const std::size_t m = a.shape()[0], n = a.shape()[1];
  MTM_REQUIRE(m > 0 && n > 0, "mean", "empty input");
  if (axis == 0) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) out[j] += a.values()[i * n + j];
    for (auto& v : out) v /= static_cast<double>(m);
    return make_result({n}, std::move(out), {a}, [m, n](Node& self) {
      auto& g = parent(self, 0).grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[j] / static_cast<double>(m);
    });
  }
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[i] += a.values()[i * n + j];
    out[i] /= static_cast<double>(n);
  }
  return make_result({m}, std::move(out), {a}, [m, n](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += self.grad[i] / static_cast<double>(n);
  });
}

Tensor mean_rows(const Tensor& a, const std::vector<std::size_t>& rows) {
  MTM_REQUIRE(a.rank() == 2, "mean_rows", "expected a matrix, got " + shape_string(a.shape()));
  if (rows.empty()) throw ContractError("mean_rows: no rows selected");
  const std::size_t n = a.shape()[1];
  const double count = static_cast<double>(rows.size());
  std::vector<double> out(n, 0.0);
  for (std::size_t r : rows) {
    MTM_REQUIRE(r < a.shape()[0], "mean_rows", "row " + std::to_string(r) + " outside " + shape_string(a.shape()));
    for (std::size_t j = 0; j < n; ++j) out[j] += a.values()[r * n + j];
  }
  for (auto& v : out) v /= count;
  return make_result({n}, std::move(out), {a}, [rows, n, count](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t r : rows)
      for (std::size_t j = 0; j < n; ++j) g[r * n + j] += self.grad[j] / count;
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_result({}, {s}, {a}, [](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (auto& v : g) v += self.grad[0];
  });
}

Tensor softmax(const Tensor& a) {
  MTM_REQUIRE(a.rank() >= 1, "softmax", "scalar input");
  const std::size_t n = a.cols(), m = a.size() / n;
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double* x = a.values().data() + i * n;
    double* y = out.data() + i * n;
    const double mx = *std::max_element(x, x + n);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += (y[j] = std::exp(x[j] - mx));
    for (std::size_t j = 0; j < n; ++j) y[j] /= z;
  }
  return make_result(a.shape(), std::move(out), {a}, [m, n](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < m; ++i) {
      const double* y = self.value.data() + i * n;
      const double* gy = self.grad.data() + i * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += gy[j] * y[j];
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += y[j] * (gy[j] - dot);
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
  MTM_REQUIRE(x.rank() >= 1, "layer_norm", "scalar input");
  const std::size_t n = x.cols(), m = x.size() / n;
  MTM_REQUIRE(gain.rank() == 1 && gain.size() == n && bias.shape() == gain.shape(), "layer_norm",
          "gain/bias " + shape_string(gain.shape()) + " for input " + shape_string(x.shape()));
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(m);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double* xi = x.values().data() + i * n;
    double mu = 0.0;
    for (std::size_t j = 0; j < n; ++j) mu += xi[j];
    mu /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) var += (xi[j] - mu) * (xi[j] - mu);
    var /= static_cast<double>(n);
    const double inv = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = inv;
    for (std::size_t j = 0; j < n; ++j) {
      const double h = (xi[j] - mu) * inv;
      (*xhat)[i * n + j] = h;
      out[i * n + j] = h * gain.values()[j] + bias.values()[j];
    }
  }
  return make_result(x.shape(), std::move(out), {x, gain, bias}, [m, n, xhat, inv_std](Node& self) {
    Node& nx = parent(self, 0);
    Node& ng = parent(self, 1);
    Node& nb = parent(self, 2);
    const double* G = self.grad.data();
    const double* H = xhat->data();
    if (ng.requires_grad) {
      auto& g = ng.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += G[i * n + j] * H[i * n + j];
    }
    if (nb.requires_grad) {
      auto& g = nb.grad_buffer();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) g[j] += G[i * n + j];
    }
    if (nx.requires_grad) {
      auto& g = nx.grad_buffer();
      std::vector<double> dh(n);
      for (std::size_t i = 0; i < m; ++i) {
        double mean_dh = 0.0, mean_dh_h = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          dh[j] = G[i * n + j] * ng.value[j];
          mean_dh += dh[j];
          mean_dh_h += dh[j] * H[i * n + j];
        }
        mean_dh /= static_cast<double>(n);
        mean_dh_h /= static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j)
          g[i * n + j] += (*inv_std)[i] * (dh[j] - mean_dh - H[i * n + j] * mean_dh_h);
      }
    }
  });
}

Tensor gelu(const Tensor& a) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  return unary(a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); }, [](Node& self) {
    Node& na = parent(self, 0);
    auto& g = na.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double x = na.value[i];
      const double d = 0.5 * (1.0 + std::erf(x * kInvSqrt2)) + x * kInvSqrt2Pi * std::exp(-0.5 * x * x);
      g[i] += self.grad[i] * d;
    }
  });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double y = self.value[i];
      g[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids) {
  MTM_REQUIRE(table.rank() == 2, "embedding_lookup", "table must be a matrix, got " + shape_string(table.shape()));
  const std::size_t v = table.shape()[0], d = table.shape()[1];
  std::vector<std::int32_t> rows(ids.begin(), ids.end());
  std::vector<double> out(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || static_cast<std::size_t>(rows[i]) >= v) {
      throw LookupError("embedding_lookup: id " + std::to_string(rows[i]) + " outside table of " +
                        std::to_string(v) + " rows");
    }
    std::copy_n(table.values().begin() + static_cast<std::ptrdiff_t>(rows[i] * d), d,
                out.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  const std::size_t n = rows.size();
  return make_result({n, d}, std::move(out), {table}, [rows = std::move(rows), d](Node& self) {
    auto& g = parent(self, 0).grad_buffer();
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < d; ++j) g[static_cast<std::size_t>(rows[i]) * d + j] += self.grad[i * d + j];
  });
}

Tensor l2_norm(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v * v;
  const double norm = std::sqrt(s);
  return make_result({}, {norm}, {a}, [norm](Node& self) {
    if (norm == 0.0) return;
    Node& na = parent(self, 0);
    auto& g = na.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * na.value[i] / norm;
  });
}

Tensor squared_error(const Tensor& a, const Tensor& b) {
  MTM_REQUIRE(a.shape() == b.shape(), "squared_error", shapes(a, b));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values()[i] - b.values()[i];
    s += d * d;
  }
  return make_result({}, {s}, {a, b}, [](Node& self) {
    Node& na = parent(self, 0);
    Node& nb = parent(self, 1);
    for (std::size_t i = 0; i < na.value.size(); ++i) {
      const double d = 2.0 * self.grad[0] * (na.value[i] - nb.value[i]);
      if (na.requires_grad) na.grad_buffer()[i] += d;
      if (nb.requires_grad) nb.grad_buffer()[i] -= d;
    }
  });
}

Tensor binary_cross_entropy(const Tensor& p, double y, double weight) {
  MTM_REQUIRE(p.size() == 1, "binary_cross_entropy", "prediction must be a scalar, got " + shape_string(p.shape()));
  constexpr double kLo = 1e-7, kHi = 1.0 - 1e-7;
  const double raw = p.values()[0];
  const double pc = std::clamp(raw, kLo, kHi);
  const double loss = -weight * (y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  const bool inside = raw > kLo && raw < kHi;
  return make_result({}, {loss}, {p}, [y, weight, pc, inside](Node& self) {
    if (!inside) return;
    auto& g = parent(self, 0).grad_buffer();
    g[0] += self.grad[0] * -weight * (y / pc - (1.0 - y) / (1.0 - pc));
  });
}

}  // namespace mtm
