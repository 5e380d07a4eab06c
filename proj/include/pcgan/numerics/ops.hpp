// Copyright 2026 The pcgan Authors
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

#ifndef PCGAN__NUMERICS__OPS_HPP_
#define PCGAN__NUMERICS__OPS_HPP_

#include "pcgan/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

// Differentiable primitives. Every op reads its input values, builds the output
// tensor, and records a closure that maps the output gradient back onto the
// inputs. Ops view tensors as rows x cols (see Tensor::rows/cols).

namespace pcgan::numerics
{

namespace detail
{

inline void require_same_tape(const Var & a, const Var & b)
{
  if (&a.tape() != &b.tape()) {
    throw UsageError("operands recorded on different tapes");
  }
}

inline void require_same_shape(const Tensor & a, const Tensor & b, const char * op)
{
  if (a.shape() != b.shape()) {
    throw DimensionError(
      std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
      shape_string(b.shape()));
  }
}

inline Shape without_last(const Shape & s)
{
  if (s.empty()) {
    return {};
  }
  return Shape(s.begin(), s.end() - 1);
}

inline Shape with_last(const Shape & s, std::size_t last)
{
  Shape out = s.empty() ? Shape{1} : s;
  out.back() = last;
  return out;
}

// y = f(x) element-wise; dfdx(x, y) gives the local derivative.
template <class F, class D>
Var unary(const Var & a, F f, D dfdx, const char * name)
{
  const Tensor & x = a.value();
  Tensor y = Tensor::zeros(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = f(x[i]);
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(y), {ia},
    [ia, dfdx](Tape & t, const Tensor & g, std::size_t self) {
      if (Tensor * ga = t.input_grad(ia)) {
        const Tensor & x = t.value(ia);
        const Tensor & y = t.value(self);
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*ga)[i] += g[i] * dfdx(x[i], y[i]);
        }
      }
    },
    name);
}

}  // namespace detail

/// [n x k] . [k x m] -> [n x m]
inline Var matmul(const Var & a, const Var & b)
{
  detail::require_same_tape(a, b);
  const Tensor & A = a.value();
  const Tensor & B = b.value();
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(0)) {
    throw DimensionError(
      "matmul: incompatible shapes " + shape_string(A.shape()) + " and " +
      shape_string(B.shape()));
  }
  const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(1);
  Tensor C = Tensor::zeros({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    double * c = &C[i * m];
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A[i * k + p];
      if (aip == 0.0) {
        continue;
      }
      const double * brow = &B.values()[p * m];
      for (std::size_t j = 0; j < m; ++j) {
        c[j] += aip * brow[j];
      }
    }
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
    std::move(C), {ia, ib},
    [ia, ib, n, k, m](Tape & t, const Tensor & g, std::size_t) {
      const Tensor & A = t.value(ia);
      const Tensor & B = t.value(ib);
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < n; ++i) {
          const double * grow = &g.values()[i * m];
          for (std::size_t p = 0; p < k; ++p) {
            const double * brow = &B.values()[p * m];
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
              acc += grow[j] * brow[j];
            }
            (*ga)[i * k + p] += acc;
          }
        }
      }
      if (Tensor * gb = t.input_grad(ib)) {
        for (std::size_t i = 0; i < n; ++i) {
          const double * grow = &g.values()[i * m];
          for (std::size_t p = 0; p < k; ++p) {
            const double aip = A[i * k + p];
            if (aip == 0.0) {
              continue;
            }
            double * gbrow = &gb->values()[p * m];
            for (std::size_t j = 0; j < m; ++j) {
              gbrow[j] += aip * grow[j];
            }
          }
        }
      }
    },
    "matmul");
}

/**
 * @brief Element-wise sum.
 *
 * `b` may match `a` exactly, be a rank-1 row of length `a.cols()` (bias
 * broadcast over rows), or be a single-element tensor.
 */
inline Var add(const Var & a, const Var & b)
{
  detail::require_same_tape(a, b);
  const Tensor & A = a.value();
  const Tensor & B = b.value();
  enum class Mode { same, row, scalar } mode;
  if (A.shape() == B.shape()) {
    mode = Mode::same;
  } else if (B.rank() == 1 && B.size() == A.cols() && A.rank() >= 1) {
    mode = Mode::row;
  } else if (B.size() == 1) {
    mode = Mode::scalar;
  } else {
    throw DimensionError(
      "add: cannot broadcast " + shape_string(B.shape()) + " onto " + shape_string(A.shape()));
  }
  Tensor C = A;
  const std::size_t cols = A.cols();
  for (std::size_t i = 0; i < C.size(); ++i) {
    C[i] += mode == Mode::same ? B[i] : (mode == Mode::row ? B[i % cols] : B[0]);
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
    std::move(C), {ia, ib},
    [ia, ib, mode, cols](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*ga)[i] += g[i];
        }
      }
      if (Tensor * gb = t.input_grad(ib)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*gb)[mode == Mode::same ? i : (mode == Mode::row ? i % cols : 0)] += g[i];
        }
      }
    },
    "add");
}

inline Var sub(const Var & a, const Var & b)
{
  detail::require_same_tape(a, b);
  const Tensor & A = a.value();
  const Tensor & B = b.value();
  detail::require_same_shape(A, B, "sub");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) {
    C[i] -= B[i];
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
    std::move(C), {ia, ib},
    [ia, ib](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*ga)[i] += g[i];
        }
      }
      if (Tensor * gb = t.input_grad(ib)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*gb)[i] -= g[i];
        }
      }
    },
    "sub");
}

/// Element-wise product of equally shaped tensors.
inline Var mul(const Var & a, const Var & b)
{
  detail::require_same_tape(a, b);
  const Tensor & A = a.value();
  const Tensor & B = b.value();
  detail::require_same_shape(A, B, "mul");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) {
    C[i] *= B[i];
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
    std::move(C), {ia, ib},
    [ia, ib](Tape & t, const Tensor & g, std::size_t) {
      const Tensor & A = t.value(ia);
      const Tensor & B = t.value(ib);
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*ga)[i] += g[i] * B[i];
        }
      }
      if (Tensor * gb = t.input_grad(ib)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*gb)[i] += g[i] * A[i];
        }
      }
    },
    "mul");
}

/// Element-wise quotient; a zero divisor is a domain error.
inline Var div(const Var & a, const Var & b)
{
  detail::require_same_tape(a, b);
  const Tensor & A = a.value();
  const Tensor & B = b.value();
  detail::require_same_shape(A, B, "div");
  Tensor C = A;
  for (std::size_t i = 0; i < C.size(); ++i) {
    if (B[i] == 0.0) {
      throw DomainError("div: division by zero");
    }
    C[i] /= B[i];
  }
  const auto ia = a.id(), ib = b.id();
  return a.tape().record(
    std::move(C), {ia, ib},
    [ia, ib](Tape & t, const Tensor & g, std::size_t self) {
      const Tensor & B = t.value(ib);
      const Tensor & C = t.value(self);
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*ga)[i] += g[i] / B[i];
        }
      }
      if (Tensor * gb = t.input_grad(ib)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*gb)[i] -= g[i] * C[i] / B[i];
        }
      }
    },
    "div");
}

/// Scale each row of `a` by the matching entry of `s` (shape [rows] or [rows x 1]).
inline Var mul_rows(const Var & a, const Var & s)
{
  detail::require_same_tape(a, s);
  const Tensor & A = a.value();
  const Tensor & S = s.value();
  const std::size_t rows = A.rows(), cols = A.cols();
  if (S.size() != rows || S.cols() != (S.rank() == 2 ? 1u : rows)) {
    throw DimensionError(
      "mul_rows: scale " + shape_string(S.shape()) + " vs rows of " + shape_string(A.shape()));
  }
  Tensor C = A;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      C[r * cols + c] *= S[r];
    }
  }
  const auto ia = a.id(), is = s.id();
  return a.tape().record(
    std::move(C), {ia, is},
    [ia, is, rows, cols](Tape & t, const Tensor & g, std::size_t) {
      const Tensor & A = t.value(ia);
      const Tensor & S = t.value(is);
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            (*ga)[r * cols + c] += g[r * cols + c] * S[r];
          }
        }
      }
      if (Tensor * gs = t.input_grad(is)) {
        for (std::size_t r = 0; r < rows; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            acc += g[r * cols + c] * A[r * cols + c];
          }
          (*gs)[r] += acc;
        }
      }
    },
    "mul_rows");
}

inline Var scale(const Var & a, double factor)
{
  return detail::unary(
    a, [factor](double x) { return factor * x; }, [factor](double, double) { return factor; },
    "scale");
}

inline Var add_scalar(const Var & a, double offset)
{
  return detail::unary(
    a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; },
    "add_scalar");
}

inline Var neg(const Var & a) { return scale(a, -1.0); }

inline Var tanh(const Var & a)
{
  return detail::unary(
    a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; },
    "tanh");
}

inline Var sigmoid(const Var & a)
{
  return detail::unary(
    a,
    [](double x) {
      // split on sign so exp never overflows
      if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
      }
      const double e = std::exp(x);
      return e / (1.0 + e);
    },
    [](double, double y) { return y * (1.0 - y); }, "sigmoid");
}

inline Var relu(const Var & a)
{
  return detail::unary(
    a, [](double x) { return x > 0.0 ? x : 0.0; },
    [](double x, double) { return x > 0.0 ? 1.0 : 0.0; }, "relu");
}

inline Var exp(const Var & a)
{
  return detail::unary(
    a, [](double x) { return std::exp(x); }, [](double, double y) { return y; }, "exp");
}

inline Var log(const Var & a)
{
  for (double v : a.value().values()) {
    if (!(v > 0.0)) {
      throw DomainError("log of non-positive value " + std::to_string(v));
    }
  }
  return detail::unary(
    a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; }, "log");
}

inline Var square(const Var & a)
{
  return detail::unary(
    a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; }, "square");
}

/// Clamp into [lo, hi]; the gradient is zero wherever the clamp is active.
inline Var clamp(const Var & a, double lo, double hi)
{
  return detail::unary(
    a, [lo, hi](double x) { return std::clamp(x, lo, hi); },
    [lo, hi](double x, double) { return (x >= lo && x <= hi) ? 1.0 : 0.0; }, "clamp");
}

/// Concatenate along the last axis. All inputs share their leading shape.
inline Var concat(const std::vector<Var> & parts)
{
  if (parts.empty()) {
    throw UsageError("concat: no inputs");
  }
  Tape & tape = parts.front().tape();
  const Shape lead = detail::without_last(parts.front().shape());
  const std::size_t rows = parts.front().value().rows();
  std::vector<std::size_t> widths, ids;
  std::size_t total = 0;
  for (const auto & p : parts) {
    detail::require_same_tape(parts.front(), p);
    if (detail::without_last(p.shape()) != lead || p.value().rank() == 0) {
      throw DimensionError("concat: leading shapes differ");
    }
    widths.push_back(p.value().cols());
    ids.push_back(p.id());
    total += widths.back();
  }
  Shape out_shape = lead;
  out_shape.push_back(total);
  Tensor C = Tensor::zeros(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor & P = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) {
      std::copy_n(&P.values()[r * widths[k]], widths[k], &C[r * total + offset]);
    }
    offset += widths[k];
  }
  return tape.record(
    std::move(C), ids,
    [ids, widths, rows, total](Tape & t, const Tensor & g, std::size_t) {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        if (Tensor * gp = t.input_grad(ids[k])) {
          for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < widths[k]; ++c) {
              (*gp)[r * widths[k] + c] += g[r * total + offset + c];
            }
          }
        }
        offset += widths[k];
      }
    },
    "concat");
}

/// Columns [begin, end) of the last axis.
inline Var slice(const Var & a, std::size_t begin, std::size_t end)
{
  const Tensor & A = a.value();
  const std::size_t cols = A.cols(), rows = A.rows();
  if (A.rank() == 0 || begin >= end || end > cols) {
    throw DimensionError(
      "slice: range [" + std::to_string(begin) + ", " + std::to_string(end) + ") outside " +
      shape_string(A.shape()));
  }
  const std::size_t width = end - begin;
  Tensor C = Tensor::zeros(detail::with_last(A.shape(), width));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(&A.values()[r * cols + begin], width, &C[r * width]);
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, rows, cols, begin, width](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < width; ++c) {
            (*ga)[r * cols + begin + c] += g[r * width + c];
          }
        }
      }
    },
    "slice");
}

/// Concatenate rank-2 tensors along the first axis.
inline Var stack_rows(const std::vector<Var> & parts)
{
  if (parts.empty()) {
    throw UsageError("stack_rows: no inputs");
  }
  Tape & tape = parts.front().tape();
  const std::size_t cols = parts.front().value().cols();
  std::vector<std::size_t> ids, counts;
  std::size_t rows = 0;
  for (const auto & p : parts) {
    detail::require_same_tape(parts.front(), p);
    if (p.value().rank() != 2 || p.value().cols() != cols) {
      throw DimensionError("stack_rows: inputs must be rank 2 with equal column count");
    }
    ids.push_back(p.id());
    counts.push_back(p.value().rows());
    rows += counts.back();
  }
  std::vector<double> values;
  values.reserve(rows * cols);
  for (const auto & p : parts) {
    const auto v = p.value().values();
    values.insert(values.end(), v.begin(), v.end());
  }
  return tape.record(
    Tensor({rows, cols}, std::move(values)), ids,
    [ids, counts, cols](Tape & t, const Tensor & g, std::size_t) {
      std::size_t offset = 0;
      for (std::size_t k = 0; k < ids.size(); ++k) {
        const std::size_t n = counts[k] * cols;
        if (Tensor * gp = t.input_grad(ids[k])) {
          for (std::size_t i = 0; i < n; ++i) {
            (*gp)[i] += g[offset + i];
          }
        }
        offset += n;
      }
    },
    "stack_rows");
}

/// Rows selected by index (repeats allowed) from a rank-2 tensor.
inline Var gather_rows(const Var & a, const std::vector<std::size_t> & index)
{
  const Tensor & A = a.value();
  if (A.rank() != 2) {
    throw DimensionError("gather_rows: expected rank 2, got " + shape_string(A.shape()));
  }
  const std::size_t cols = A.cols();
  Tensor C = Tensor::zeros({index.size(), cols});
  for (std::size_t r = 0; r < index.size(); ++r) {
    if (index[r] >= A.rows()) {
      throw DimensionError("gather_rows: index out of range");
    }
    std::copy_n(&A.values()[index[r] * cols], cols, &C[r * cols]);
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, index, cols](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t r = 0; r < index.size(); ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            (*ga)[index[r] * cols + c] += g[r * cols + c];
          }
        }
      }
    },
    "gather_rows");
}

inline Var reshape(const Var & a, Shape shape)
{
  if (shape_size(shape) != a.value().size()) {
    throw DimensionError(
      "reshape: " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  Tensor C(std::move(shape), a.value().storage());
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < g.size(); ++i) {
          (*ga)[i] += g[i];
        }
      }
    },
    "reshape");
}

/// Softmax over the last axis.
inline Var softmax(const Var & a)
{
  const Tensor & A = a.value();
  const std::size_t rows = A.rows(), cols = A.cols();
  Tensor C = A;
  for (std::size_t r = 0; r < rows; ++r) {
    double * row = &C[r * cols];
    const double m = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] = std::exp(row[c] - m);
      z += row[c];
    }
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] /= z;
    }
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, rows, cols](Tape & t, const Tensor & g, std::size_t self) {
      if (Tensor * ga = t.input_grad(ia)) {
        const Tensor & y = t.value(self);
        for (std::size_t r = 0; r < rows; ++r) {
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            dot += g[r * cols + c] * y[r * cols + c];
          }
          for (std::size_t c = 0; c < cols; ++c) {
            (*ga)[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
          }
        }
      }
    },
    "softmax");
}

/// log(softmax(a)) over the last axis, computed without forming the softmax.
inline Var log_softmax(const Var & a)
{
  const Tensor & A = a.value();
  const std::size_t rows = A.rows(), cols = A.cols();
  Tensor C = A;
  for (std::size_t r = 0; r < rows; ++r) {
    double * row = &C[r * cols];
    const double m = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      z += std::exp(row[c] - m);
    }
    const double lse = m + std::log(z);
    for (std::size_t c = 0; c < cols; ++c) {
      row[c] -= lse;
    }
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, rows, cols](Tape & t, const Tensor & g, std::size_t self) {
      if (Tensor * ga = t.input_grad(ia)) {
        const Tensor & y = t.value(self);
        for (std::size_t r = 0; r < rows; ++r) {
          double gsum = 0.0;
          for (std::size_t c = 0; c < cols; ++c) {
            gsum += g[r * cols + c];
          }
          for (std::size_t c = 0; c < cols; ++c) {
            (*ga)[r * cols + c] += g[r * cols + c] - std::exp(y[r * cols + c]) * gsum;
          }
        }
      }
    },
    "log_softmax");
}

/// log(sum(exp(a))) over the last axis; the last dimension is dropped.
inline Var logsumexp(const Var & a)
{
  const Tensor & A = a.value();
  const std::size_t rows = A.rows(), cols = A.cols();
  Tensor C = Tensor::zeros(detail::without_last(A.shape()));
  for (std::size_t r = 0; r < rows; ++r) {
    const double * row = &A.values()[r * cols];
    const double m = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      z += std::exp(row[c] - m);
    }
    C[r] = m + std::log(z);
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, rows, cols](Tape & t, const Tensor & g, std::size_t self) {
      if (Tensor * ga = t.input_grad(ia)) {
        const Tensor & A = t.value(ia);
        const Tensor & y = t.value(self);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < cols; ++c) {
            (*ga)[r * cols + c] += g[r] * std::exp(A[r * cols + c] - y[r]);
          }
        }
      }
    },
    "logsumexp");
}

/// Sum of all elements, as a scalar.
inline Var sum(const Var & a)
{
  const Tensor & A = a.value();
  double s = 0.0;
  for (double v : A.values()) {
    s += v;
  }
  const auto ia = a.id();
  return a.tape().record(
    Tensor::scalar(s), {ia},
    [ia](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t i = 0; i < ga->size(); ++i) {
          (*ga)[i] += g[0];
        }
      }
    },
    "sum");
}

inline Var mean(const Var & a)
{
  const auto n = a.value().size();
  if (n == 0) {
    throw DimensionError("mean of empty tensor");
  }
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

/**
 * @brief Softmax over contiguous row segments of a column vector.
 *
 * @p offsets has one entry per segment plus a terminal entry equal to the row
 * count; segment s covers rows [offsets[s], offsets[s+1]).
 */
inline Var segment_softmax(const Var & a, const std::vector<std::size_t> & offsets)
{
  const Tensor & A = a.value();
  if (A.cols() != 1 && A.rank() != 1) {
    throw DimensionError("segment_softmax: expected a column, got " + shape_string(A.shape()));
  }
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != A.size()) {
    throw DimensionError("segment_softmax: offsets do not cover the input");
  }
  Tensor C = A;
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    const std::size_t b = offsets[s], e = offsets[s + 1];
    if (b == e) {
      continue;
    }
    const double m = *std::max_element(&C[b], &C[b] + (e - b));
    double z = 0.0;
    for (std::size_t i = b; i < e; ++i) {
      C[i] = std::exp(C[i] - m);
      z += C[i];
    }
    for (std::size_t i = b; i < e; ++i) {
      C[i] /= z;
    }
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, offsets](Tape & t, const Tensor & g, std::size_t self) {
      if (Tensor * ga = t.input_grad(ia)) {
        const Tensor & y = t.value(self);
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
          double dot = 0.0;
          for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) {
            dot += g[i] * y[i];
          }
          for (std::size_t i = offsets[s]; i < offsets[s + 1]; ++i) {
            (*ga)[i] += y[i] * (g[i] - dot);
          }
        }
      }
    },
    "segment_softmax");
}

/// Sum rows within each segment: [rows x cols] -> [segments x cols].
inline Var segment_sum_rows(const Var & a, const std::vector<std::size_t> & offsets)
{
  const Tensor & A = a.value();
  if (A.rank() != 2) {
    throw DimensionError("segment_sum_rows: expected rank 2, got " + shape_string(A.shape()));
  }
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != A.rows()) {
    throw DimensionError("segment_sum_rows: offsets do not cover the input");
  }
  const std::size_t cols = A.cols(), segments = offsets.size() - 1;
  Tensor C = Tensor::zeros({segments, cols});
  for (std::size_t s = 0; s < segments; ++s) {
    for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        C[s * cols + c] += A[r * cols + c];
      }
    }
  }
  const auto ia = a.id();
  return a.tape().record(
    std::move(C), {ia},
    [ia, offsets, cols](Tape & t, const Tensor & g, std::size_t) {
      if (Tensor * ga = t.input_grad(ia)) {
        for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
          for (std::size_t r = offsets[s]; r < offsets[s + 1]; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
              (*ga)[r * cols + c] += g[s * cols + c];
            }
          }
        }
      }
    },
    "segment_sum_rows");
}

inline Var operator+(const Var & a, const Var & b) { return add(a, b); }
inline Var operator-(const Var & a, const Var & b) { return sub(a, b); }
inline Var operator*(const Var & a, const Var & b) { return mul(a, b); }
inline Var operator/(const Var & a, const Var & b) { return div(a, b); }
inline Var operator-(const Var & a) { return neg(a); }
inline Var operator*(double s, const Var & a) { return scale(a, s); }
inline Var operator*(const Var & a, double s) { return scale(a, s); }
inline Var operator+(const Var & a, double s) { return add_scalar(a, s); }

}  // namespace pcgan::numerics

#endif  // PCGAN__NUMERICS__OPS_HPP_
