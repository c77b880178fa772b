// Copyright 2026 The depner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "depner/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace depner::ad {
namespace {

std::string describe(const Tensor& t) { return shape_to_string(t.shape()); }

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + describe(a) +
                         " vs " + describe(b));
  }
}

void require_matrix_like(const char* op, const Tensor& t) {
  if (t.rank() > 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " +
                         describe(t));
  }
}

// Creates the result tensor; it requires a gradient iff an input does.
Tensor make_output(Shape shape, bool tracked) {
  return Tensor::zeros(std::move(shape), tracked);
}

template <typename Rule>
void record_if(Tape& tape, bool tracked, std::vector<Tensor> inputs,
               const Tensor& output, Rule&& rule) {
  if (tracked) tape.record(std::move(inputs), output, std::forward<Rule>(rule));
}

// Elementwise unary op whose derivative is a function of (input, output).
template <typename Fwd, typename Deriv>
Tensor unary(Tape& tape, const Tensor& x, Fwd fwd, Deriv deriv) {
  const bool tracked = x.requires_grad();
  Tensor out = make_output(x.shape(), tracked);
  auto xs = x.data();
  auto ys = out.data();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = fwd(xs[i]);
  record_if(tape, tracked, {x}, out, [x = Tensor(x), out, deriv]() mutable {
    auto g = std::as_const(out).grad();
    auto xs = std::as_const(x).data();
    auto ys = std::as_const(out).data();
    auto gx = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * deriv(xs[i], ys[i]);
  });
  return out;
}

}  // namespace

void Tape::record(std::vector<Tensor> inputs, Tensor output,
                  BackwardRule rule) {
  records_.push_back({std::move(inputs), std::move(output), std::move(rule)});
}

void Tape::backward(Tensor loss) {
  if (loss.size() != 1) {
    throw DimensionError("backward: loss must be a scalar, got shape " +
                         shape_to_string(loss.shape()));
  }
  for (Record& r : records_) r.output.zero_grad();
  loss.grad()[0] += 1.0;
  for (auto it = records_.rbegin(); it != records_.rend(); ++it) {
    it->backward();
  }
}

bool any_requires_grad(std::span<const Tensor> inputs) {
  return std::any_of(inputs.begin(), inputs.end(),
                     [](const Tensor& t) { return t.requires_grad(); });
}

Tensor matmul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_matrix_like("matmul", a);
  require_matrix_like("matmul", b);
  const std::size_t m = a.rows();
  const std::size_t k = a.cols();
  const std::size_t n = b.cols();
  if (b.rows() != k || (b.rank() < 2 && k != 1)) {
    throw DimensionError("matmul: inner dimensions disagree, " + describe(a) +
                         " x " + describe(b));
  }
  const bool tracked = a.requires_grad() || b.requires_grad();
  Tensor out = make_output({m, n}, tracked);
  {
    auto ad = a.data();
    auto bd = b.data();
    auto od = out.data();
    for (std::size_t i = 0; i < m; ++i) {
      double* orow = od.data() + i * n;
      for (std::size_t p = 0; p < k; ++p) {
        const double av = ad[i * k + p];
        if (av == 0.0) continue;
        const double* brow = bd.data() + p * n;
        for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
      }
    }
  }
  record_if(tape, tracked, {a, b}, out, [a = Tensor(a), b = Tensor(b), out, m, k, n]() mutable {
    auto g = std::as_const(out).grad();
    if (a.requires_grad()) {
      // a.grad += g * b^T
      auto bd = std::as_const(b).data();
      auto ga = a.grad();
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = bd.data() + p * n;
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
          ga[i * k + p] += acc;
        }
      }
    }
    if (b.requires_grad()) {
      // b.grad += a^T * g
      // Summed locally first so each slot receives a single addition.
      auto ad = std::as_const(a).data();
      std::vector<double> local(k * n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double* grow = g.data() + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = ad[i * k + p];
          if (av == 0.0) continue;
          double* lrow = local.data() + p * n;
          for (std::size_t j = 0; j < n; ++j) lrow[j] += av * grow[j];
        }
      }
      auto gb = b.grad();
      for (std::size_t i = 0; i < local.size(); ++i) gb[i] += local[i];
    }
  });
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("add", a, b);
  const bool tracked = a.requires_grad() || b.requires_grad();
  Tensor out = make_output(a.shape(), tracked);
  auto ad = a.data();
  auto bd = b.data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] + bd[i];
  record_if(tape, tracked, {a, b}, out, [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto g = std::as_const(out).grad();
    for (Tensor* t : {&a, &b}) {
      if (!t->requires_grad()) continue;
      auto gt = t->grad();
      for (std::size_t i = 0; i < g.size(); ++i) gt[i] += g[i];
    }
  });
  return out;
}

Tensor sub(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("sub", a, b);
  const bool tracked = a.requires_grad() || b.requires_grad();
  Tensor out = make_output(a.shape(), tracked);
  auto ad = a.data();
  auto bd = b.data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] - bd[i];
  record_if(tape, tracked, {a, b}, out, [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto g = std::as_const(out).grad();
    if (a.requires_grad()) {
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (b.requires_grad()) {
      auto gb = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
  return out;
}

Tensor mul(Tape& tape, const Tensor& a, const Tensor& b) {
  require_same_shape("mul", a, b);
  const bool tracked = a.requires_grad() || b.requires_grad();
  Tensor out = make_output(a.shape(), tracked);
  auto ad = a.data();
  auto bd = b.data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = ad[i] * bd[i];
  record_if(tape, tracked, {a, b}, out, [a = Tensor(a), b = Tensor(b), out]() mutable {
    auto g = std::as_const(out).grad();
    auto ad = std::as_const(a).data();
    auto bd = std::as_const(b).data();
    if (a.requires_grad()) {
      auto ga = a.grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bd[i];
    }
    if (b.requires_grad()) {
      auto gb = b.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * ad[i];
    }
  });
  return out;
}

Tensor scale(Tape& tape, const Tensor& x, double factor) {
  return unary(
      tape, x, [factor](double v) { return v * factor; },
      [factor](double, double) { return factor; });
}

Tensor add_bias(Tape& tape, const Tensor& x, const Tensor& bias) {
  require_matrix_like("add_bias", x);
  if (bias.rank() != 1 || bias.size() != x.cols()) {
    throw DimensionError("add_bias: bias " + describe(bias) +
                         " does not match rows of " + describe(x));
  }
  const bool tracked = x.requires_grad() || bias.requires_grad();
  Tensor out = make_output(x.shape(), tracked);
  const std::size_t n = x.rows();
  const std::size_t m = x.cols();
  auto xd = x.data();
  auto bd = bias.data();
  auto od = out.data();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < m; ++c) od[r * m + c] = xd[r * m + c] + bd[c];
  }
  record_if(tape, tracked, {x, bias}, out, [x = Tensor(x), bias = Tensor(bias), out, n, m]() mutable {
    auto g = std::as_const(out).grad();
    if (x.requires_grad()) {
      auto gx = x.grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    }
    if (bias.requires_grad()) {
      std::vector<double> local(m, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < m; ++c) local[c] += g[r * m + c];
      }
      auto gb = bias.grad();
      for (std::size_t c = 0; c < m; ++c) gb[c] += local[c];
    }
  });
  return out;
}

Tensor relu(Tape& tape, const Tensor& x) {
  // Subgradient at exactly zero is zero.
  return unary(
      tape, x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v, double) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  return unary(
      tape, x,
      [](double v) {
        if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
      },
      [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(Tape& tape, const Tensor& x) {
  return unary(
      tape, x, [](double v) { return std::tanh(v); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor concat(Tape& tape, std::span<const Tensor> parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no parts");
  const std::size_t rank = parts.front().rank();
  if (rank == 0 || rank > 2) {
    throw DimensionError("concat: unsupported rank " + std::to_string(rank));
  }
  if (axis >= rank) {
    throw DimensionError("concat: axis " + std::to_string(axis) +
                         " out of range for rank " + std::to_string(rank));
  }
  for (const Tensor& p : parts) {
    if (p.rank() != rank) {
      throw DimensionError("concat: mixed ranks " + describe(parts.front()) +
                           " and " + describe(p));
    }
  }
  // Work in (rows, cols) terms; a rank-1 join is a single-row column join.
  const bool join_cols = rank == 1 || axis == 1;
  const std::size_t rows = parts.front().rows();
  const std::size_t cols = parts.front().cols();
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (join_cols ? p.rows() != rows : p.cols() != cols) {
      throw DimensionError("concat: non-conforming parts " +
                           describe(parts.front()) + " and " + describe(p) +
                           " on axis " + std::to_string(axis));
    }
    total += join_cols ? p.cols() : p.rows();
  }
  Shape shape;
  if (rank == 1) {
    shape = {total};
  } else if (join_cols) {
    shape = {rows, total};
  } else {
    shape = {total, cols};
  }
  const bool tracked = any_requires_grad(parts);
  Tensor out = make_output(shape, tracked);
  auto od = out.data();
  const std::size_t out_cols = out.cols();
  std::size_t offset = 0;
  for (const Tensor& p : parts) {
    auto pd = p.data();
    if (join_cols) {
      const std::size_t pc = p.cols();
      for (std::size_t r = 0; r < rows; ++r) {
        std::copy_n(pd.data() + r * pc, pc, od.data() + r * out_cols + offset);
      }
      offset += pc;
    } else {
      std::copy(pd.begin(), pd.end(), od.data() + offset * cols);
      offset += p.rows();
    }
  }
  std::vector<Tensor> inputs(parts.begin(), parts.end());
  record_if(tape, tracked, inputs, out,
            [inputs, out, join_cols, rows, cols, out_cols]() mutable {
              auto g = std::as_const(out).grad();
              std::size_t offset = 0;
              for (Tensor& p : inputs) {
                const std::size_t extent = join_cols ? p.cols() : p.rows();
                if (p.requires_grad()) {
                  auto gp = p.grad();
                  if (join_cols) {
                    for (std::size_t r = 0; r < rows; ++r) {
                      for (std::size_t c = 0; c < extent; ++c) {
                        gp[r * extent + c] += g[r * out_cols + offset + c];
                      }
                    }
                  } else {
                    const double* src = g.data() + offset * cols;
                    for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
                  }
                }
                offset += extent;
              }
            });
  return out;
}

Tensor concat(Tape& tape, std::initializer_list<Tensor> parts,
              std::size_t axis) {
  return concat(tape, std::span<const Tensor>(parts.begin(), parts.size()),
                axis);
}

Tensor slice_cols(Tape& tape, const Tensor& x, std::size_t begin,
                  std::size_t end) {
  require_matrix_like("slice_cols", x);
  if (begin > end || end > x.cols()) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside " + describe(x));
  }
  const std::size_t rows = x.rows();
  const std::size_t cols = x.cols();
  const std::size_t width = end - begin;
  Shape shape = x.rank() == 2 ? Shape{rows, width} : Shape{width};
  const bool tracked = x.requires_grad();
  Tensor out = make_output(shape, tracked);
  auto xd = x.data();
  auto od = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(xd.data() + r * cols + begin, width, od.data() + r * width);
  }
  record_if(tape, tracked, {x}, out,
            [x = Tensor(x), out, rows, cols, begin, width]() mutable {
              auto g = std::as_const(out).grad();
              auto gx = x.grad();
              for (std::size_t r = 0; r < rows; ++r) {
                for (std::size_t c = 0; c < width; ++c) {
                  gx[r * cols + begin + c] += g[r * width + c];
                }
              }
            });
  return out;
}

Tensor slice_rows(Tape& tape, const Tensor& x, std::size_t begin,
                  std::size_t end) {
  if (x.rank() != 2 || begin > end || end > x.rows()) {
    throw DimensionError("slice_rows: range [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") outside " + describe(x));
  }
  const std::size_t cols = x.cols();
  const bool tracked = x.requires_grad();
  Tensor out = make_output({end - begin, cols}, tracked);
  auto xd = x.data();
  std::copy(xd.begin() + begin * cols, xd.begin() + end * cols,
            out.data().begin());
  record_if(tape, tracked, {x}, out, [x = Tensor(x), out, begin, cols]() mutable {
    auto g = std::as_const(out).grad();
    auto gx = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[begin * cols + i] += g[i];
  });
  return out;
}

Tensor gather_rows(Tape& tape, const Tensor& table,
                   std::span<const std::size_t> indices) {
  if (table.rank() != 2) {
    throw DimensionError("gather_rows: table must be a matrix, got " +
                         describe(table));
  }
  const std::size_t vocab = table.rows();
  const std::size_t dim = table.cols();
  for (std::size_t idx : indices) {
    if (idx >= vocab) {
      throw std::out_of_range("gather_rows: row " + std::to_string(idx) +
                              " outside table of " + std::to_string(vocab) +
                              " rows");
    }
  }
  const bool tracked = table.requires_grad();
  Tensor out = make_output({indices.size(), dim}, tracked);
  auto td = table.data();
  auto od = out.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(td.data() + indices[i] * dim, dim, od.data() + i * dim);
  }
  std::vector<std::size_t> rows(indices.begin(), indices.end());
  record_if(tape, tracked, {table}, out,
            [table = Tensor(table), out, rows = std::move(rows), dim]() mutable {
              auto g = std::as_const(out).grad();
              std::vector<double> local(table.size(), 0.0);
              for (std::size_t i = 0; i < rows.size(); ++i) {
                for (std::size_t c = 0; c < dim; ++c) {
                  local[rows[i] * dim + c] += g[i * dim + c];
                }
              }
              auto gt = table.grad();
              for (std::size_t i = 0; i < local.size(); ++i) gt[i] += local[i];
            });
  return out;
}

Tensor row(Tape& tape, const Tensor& x, std::size_t index) {
  const std::size_t idx[] = {index};
  return gather_rows(tape, x, idx);
}

Tensor sum(Tape& tape, const Tensor& x) {
  const bool tracked = x.requires_grad();
  Tensor out = make_output({}, tracked);
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  out.data()[0] = acc;
  record_if(tape, tracked, {x}, out, [x = Tensor(x), out]() mutable {
    const double g = std::as_const(out).grad()[0];
    for (double& gx : x.grad()) gx += g;
  });
  return out;
}

Tensor logsumexp(Tape& tape, const Tensor& x) {
  const bool tracked = x.requires_grad();
  Tensor out = make_output({}, tracked);
  auto xd = x.data();
  double value = -std::numeric_limits<double>::infinity();
  if (!xd.empty()) {
    const double peak = *std::max_element(xd.begin(), xd.end());
    if (std::isinf(peak)) {
      value = peak;
    } else {
      double acc = 0.0;
      for (double v : xd) acc += std::exp(v - peak);
      value = peak + std::log(acc);
    }
  }
  out.data()[0] = value;
  record_if(tape, tracked, {x}, out, [x = Tensor(x), out]() mutable {
    const double g = std::as_const(out).grad()[0];
    const double lse = std::as_const(out).data()[0];
    auto xd = std::as_const(x).data();
    auto gx = x.grad();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += g * std::exp(xd[i] - lse);
    }
  });
  return out;
}

Tensor apply_mask(Tape& tape, const Tensor& x, const Tensor& mask) {
  require_same_shape("apply_mask", x, mask);
  const bool tracked = x.requires_grad();
  Tensor out = make_output(x.shape(), tracked);
  auto xd = x.data();
  auto md = mask.data();
  auto od = out.data();
  for (std::size_t i = 0; i < od.size(); ++i) od[i] = xd[i] * md[i];
  record_if(tape, tracked, {x}, out, [x = Tensor(x), mask = Tensor(mask), out]() mutable {
    auto g = std::as_const(out).grad();
    auto md = mask.data();
    auto gx = x.grad();
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * md[i];
  });
  return out;
}

}  // namespace depner::ad
