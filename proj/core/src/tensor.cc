// Copyright 2026 The tweetlm Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tweetlm/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "tweetlm/rng.h"

namespace tweetlm {
namespace {

size_t Product(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

void CheckShape(const std::vector<size_t>& shape) {
  for (size_t d : shape) {
    if (d == 0) throw std::invalid_argument("tensor extents must be positive");
  }
}

[[noreturn]] void ShapeMismatch(const char* op, const std::vector<size_t>& a,
                                const std::vector<size_t>& b) {
  throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                              ShapeString(a) + " vs " + ShapeString(b));
}

template <typename T>
void RequireRank2(const char* op, const Tensor<T>& t) {
  if (t.rank() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a rank-2 tensor, got " +
                                ShapeString(t.shape()));
  }
}

// C[m,n] += A[m,k] B[k,n]
template <typename T>
void GemmNN(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    const T* arow = a + i * k;
    for (size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      const T* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,n] += A[m,k] B[n,k]^T
template <typename T>
void GemmNT(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    for (size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = 0;
      for (size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      c[i * n + j] += acc;
    }
  }
}

// C[k,n] += A[m,k]^T B[m,n]
template <typename T>
void GemmTN(const T* a, const T* b, T* c, size_t m, size_t k, size_t n) {
  for (size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      T* crow = c + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

constexpr double kInvSqrt2 = 0.70710678118654752440;

template <typename T>
T GeluValue(T x) {
  return T(0.5) * x * (T(1) + std::erf(x * T(kInvSqrt2)));
}

template <typename T>
T GeluGrad(T x) {
  const T cdf = T(0.5) * (T(1) + std::erf(x * T(kInvSqrt2)));
  const T pdf = std::exp(T(-0.5) * x * x) *
                T(std::numbers::inv_sqrtpi * kInvSqrt2);
  return cdf + x * pdf;
}

}  // namespace

std::string ShapeString(std::span<const size_t> shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

template <typename T>
Tensor<T>::Tensor(std::vector<size_t> shape, T fill)
    : shape_(std::move(shape)) {
  CheckShape(shape_);
  data_.assign(Product(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(std::vector<size_t> shape, std::vector<T> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CheckShape(shape_);
  if (Product(shape_) != data_.size()) {
    throw std::invalid_argument("tensor data length " +
                                std::to_string(data_.size()) +
                                " does not match shape " + ShapeString(shape_));
  }
}

template <typename T>
void Tensor<T>::Fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
bool Tensor<T>::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](T x) { return std::isfinite(x); });
}

// --- Tape ------------------------------------------------------------------

template <typename T>
void Tape<T>::Check(Var<T> v) const {
  if (v.tape != this || v.index >= nodes_.size()) {
    throw std::invalid_argument("variable does not belong to this tape");
  }
}

template <typename T>
Var<T> Tape<T>::Push(Node node) {
  nodes_.push_back(std::move(node));
  return Var<T>{this, static_cast<uint32_t>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Tape<T>::Constant(Tensor<T> value) {
  Node node;
  node.owned = std::move(value);
  return Push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::Variable(Tensor<T> value) {
  Node node;
  node.owned = std::move(value);
  node.requires_grad = true;
  return Push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::Parameter(const Tensor<T>& value, bool requires_grad) {
  Node node;
  node.external = &value;
  node.requires_grad = requires_grad;
  return Push(std::move(node));
}

template <typename T>
Var<T> Tape<T>::Record(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                       BackwardFn backward) {
  return Record(std::move(value),
                std::span<const Var<T>>(inputs.begin(), inputs.size()),
                std::move(backward));
}

template <typename T>
Var<T> Tape<T>::Record(Tensor<T> value, std::span<const Var<T>> inputs,
                       BackwardFn backward) {
  bool any_grad = false;
  bool inputs_finite = true;
  for (Var<T> in : inputs) {
    Check(in);
    any_grad = any_grad || nodes_[in.index].requires_grad;
#ifndef NDEBUG
    inputs_finite = inputs_finite && nodes_[in.index].value().AllFinite();
#endif
  }
#ifndef NDEBUG
  if (inputs_finite && !value.AllFinite()) {
    throw std::runtime_error("non-finite output from finite inputs");
  }
#else
  (void)inputs_finite;
#endif
  Node node;
  node.owned = std::move(value);
  node.requires_grad = any_grad;
  if (any_grad) node.backward = std::move(backward);
  return Push(std::move(node));
}

template <typename T>
const Tensor<T>& Tape<T>::value(Var<T> v) const {
  Check(v);
  return nodes_[v.index].value();
}

template <typename T>
bool Tape<T>::requires_grad(Var<T> v) const {
  Check(v);
  return nodes_[v.index].requires_grad;
}

template <typename T>
Tensor<T> Tape<T>::Grad(Var<T> v) const {
  Check(v);
  const Node& node = nodes_[v.index];
  if (!node.grad.empty()) return node.grad;
  return Tensor<T>(node.value().shape());
}

template <typename T>
const Tensor<T>* Tape<T>::FindGrad(Var<T> v) const {
  Check(v);
  const Node& node = nodes_[v.index];
  return node.grad.empty() ? nullptr : &node.grad;
}

template <typename T>
Tensor<T>& Tape<T>::MutableGrad(Var<T> v) {
  Check(v);
  Node& node = nodes_[v.index];
  if (node.grad.empty()) node.grad = Tensor<T>(node.value().shape());
  return node.grad;
}

template <typename T>
void Tape<T>::Backward(Var<T> loss) {
  Check(loss);
  if (value(loss).size() != 1) {
    throw std::invalid_argument("backward needs a scalar loss, got " +
                                ShapeString(value(loss).shape()));
  }
  for (Node& node : nodes_) {
    if (!node.grad.empty()) node.grad.Fill(T(0));
  }
  MutableGrad(loss)[0] = T(1);
  for (size_t i = loss.index + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    node.backward(*this, node.grad);
  }
}

// --- Primitives --------------------------------------------------------------

template <typename T>
Var<T> MatMul(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  RequireRank2("matmul", av);
  RequireRank2("matmul", bv);
  if (av.shape()[1] != bv.shape()[0]) ShapeMismatch("matmul", av.shape(), bv.shape());
  const size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[1];
  Tensor<T> out({m, n});
  GemmNN(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  return a.tape->Record(std::move(out), {a, b},
                        [a, b, m, k, n](Tape<T>& tape, const Tensor<T>& g) {
                          if (tape.requires_grad(a)) {
                            GemmNT(g.data().data(), b.value().data().data(),
                                   tape.MutableGrad(a).data().data(), m, n, k);
                          }
                          if (tape.requires_grad(b)) {
                            GemmTN(a.value().data().data(), g.data().data(),
                                   tape.MutableGrad(b).data().data(), m, k, n);
                          }
                        });
}

template <typename T>
Var<T> MatMulTransB(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  RequireRank2("matmul_transb", av);
  RequireRank2("matmul_transb", bv);
  if (av.shape()[1] != bv.shape()[1]) {
    ShapeMismatch("matmul_transb", av.shape(), bv.shape());
  }
  const size_t m = av.shape()[0], k = av.shape()[1], n = bv.shape()[0];
  Tensor<T> out({m, n});
  GemmNT(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  return a.tape->Record(std::move(out), {a, b},
                        [a, b, m, k, n](Tape<T>& tape, const Tensor<T>& g) {
                          if (tape.requires_grad(a)) {
                            GemmNN(g.data().data(), b.value().data().data(),
                                   tape.MutableGrad(a).data().data(), m, n, k);
                          }
                          if (tape.requires_grad(b)) {
                            GemmTN(g.data().data(), a.value().data().data(),
                                   tape.MutableGrad(b).data().data(), m, n, k);
                          }
                        });
}

template <typename T>
Var<T> Transpose(Var<T> a) {
  const Tensor<T>& av = a.value();
  RequireRank2("transpose", av);
  const size_t m = av.shape()[0], n = av.shape()[1];
  Tensor<T> out({n, m});
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j) out.at(j, i) = av.at(i, j);
  return a.tape->Record(std::move(out), {a},
                        [a, m, n](Tape<T>& tape, const Tensor<T>& g) {
                          Tensor<T>& ga = tape.MutableGrad(a);
                          for (size_t i = 0; i < m; ++i)
                            for (size_t j = 0; j < n; ++j) ga.at(i, j) += g.at(j, i);
                        });
}

template <typename T>
Var<T> Add(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (av.shape() != bv.shape()) ShapeMismatch("add", av.shape(), bv.shape());
  Tensor<T> out = av;
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape->Record(std::move(out), {a, b},
                        [a, b](Tape<T>& tape, const Tensor<T>& g) {
                          for (Var<T> v : {a, b}) {
                            if (!tape.requires_grad(v)) continue;
                            Tensor<T>& gv = tape.MutableGrad(v);
                            for (size_t i = 0; i < g.size(); ++i) gv[i] += g[i];
                          }
                        });
}

template <typename T>
Var<T> Mul(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  if (av.shape() != bv.shape()) ShapeMismatch("mul", av.shape(), bv.shape());
  Tensor<T> out = av;
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape->Record(std::move(out), {a, b},
                        [a, b](Tape<T>& tape, const Tensor<T>& g) {
                          if (tape.requires_grad(a)) {
                            Tensor<T>& ga = tape.MutableGrad(a);
                            const Tensor<T>& bv = b.value();
                            for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
                          }
                          if (tape.requires_grad(b)) {
                            Tensor<T>& gb = tape.MutableGrad(b);
                            const Tensor<T>& av = a.value();
                            for (size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
                          }
                        });
}

template <typename T>
Var<T> AddBias(Var<T> x, Var<T> bias) {
  const Tensor<T>& xv = x.value();
  const Tensor<T>& bv = bias.value();
  if (bv.rank() != 1 || bv.size() != xv.cols()) {
    ShapeMismatch("add_bias", xv.shape(), bv.shape());
  }
  const size_t rows = xv.rows(), cols = xv.cols();
  Tensor<T> out = xv;
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < cols; ++c) out[r * cols + c] += bv[c];
  return x.tape->Record(std::move(out), {x, bias},
                        [x, bias, rows, cols](Tape<T>& tape, const Tensor<T>& g) {
                          if (tape.requires_grad(x)) {
                            Tensor<T>& gx = tape.MutableGrad(x);
                            for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
                          }
                          if (tape.requires_grad(bias)) {
                            Tensor<T>& gb = tape.MutableGrad(bias);
                            for (size_t r = 0; r < rows; ++r)
                              for (size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
                          }
                        });
}

template <typename T>
Var<T> Scale(Var<T> x, T factor) {
  Tensor<T> out = x.value();
  for (T& v : out.data()) v *= factor;
  return x.tape->Record(std::move(out), {x},
                        [x, factor](Tape<T>& tape, const Tensor<T>& g) {
                          Tensor<T>& gx = tape.MutableGrad(x);
                          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
                        });
}

template <typename T>
Var<T> Gelu(Var<T> x) {
  Tensor<T> out = x.value();
  for (T& v : out.data()) v = GeluValue(v);
  return x.tape->Record(std::move(out), {x},
                        [x](Tape<T>& tape, const Tensor<T>& g) {
                          const Tensor<T>& xv = x.value();
                          Tensor<T>& gx = tape.MutableGrad(x);
                          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * GeluGrad(xv[i]);
                        });
}

template <typename T>
Var<T> Tanh(Var<T> x) {
  Tensor<T> out = x.value();
  for (T& v : out.data()) v = std::tanh(v);
  const uint32_t self = static_cast<uint32_t>(x.tape->size());
  return x.tape->Record(std::move(out), {x},
                        [x, self](Tape<T>& tape, const Tensor<T>& g) {
                          const Tensor<T>& y = tape.value(Var<T>{&tape, self});
                          Tensor<T>& gx = tape.MutableGrad(x);
                          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (T(1) - y[i] * y[i]);
                        });
}

template <typename T>
Var<T> Softmax(Var<T> x, int axis) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() < 1 || xv.rank() > 2) {
    throw std::invalid_argument("softmax supports rank 1 or 2, got " +
                                ShapeString(xv.shape()));
  }
  const int last = static_cast<int>(xv.rank()) - 1;
  if (axis < 0) axis = last;
  if (axis > last) throw std::invalid_argument("softmax axis out of range");
  // Lay the tensor out as `lines` vectors of length `len` at stride `stride`.
  const size_t rows = xv.rank() == 2 ? xv.shape()[0] : 1;
  const size_t cols = xv.cols();
  const bool along_rows = axis == last;
  const size_t lines = along_rows ? rows : cols;
  const size_t len = along_rows ? cols : rows;
  const size_t stride = along_rows ? 1 : cols;
  auto offset = [=](size_t line) { return along_rows ? line * cols : line; };

  Tensor<T> out(xv.shape());
  for (size_t l = 0; l < lines; ++l) {
    const size_t o = offset(l);
    T mx = xv[o];
    for (size_t i = 1; i < len; ++i) mx = std::max(mx, xv[o + i * stride]);
    T sum = 0;
    for (size_t i = 0; i < len; ++i) {
      const T e = std::exp(xv[o + i * stride] - mx);
      out[o + i * stride] = e;
      sum += e;
    }
    for (size_t i = 0; i < len; ++i) out[o + i * stride] /= sum;
  }
  const uint32_t self = static_cast<uint32_t>(x.tape->size());
  return x.tape->Record(
      std::move(out), {x},
      [x, self, lines, len, stride, offset](Tape<T>& tape, const Tensor<T>& g) {
        const Tensor<T>& y = tape.value(Var<T>{&tape, self});
        Tensor<T>& gx = tape.MutableGrad(x);
        for (size_t l = 0; l < lines; ++l) {
          const size_t o = offset(l);
          T dot = 0;
          for (size_t i = 0; i < len; ++i) dot += g[o + i * stride] * y[o + i * stride];
          for (size_t i = 0; i < len; ++i) {
            const size_t k = o + i * stride;
            gx[k] += y[k] * (g[k] - dot);
          }
        }
      });
}

template <typename T>
Var<T> LayerNorm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  if (!(eps > T(0))) throw std::invalid_argument("layer_norm eps must be positive");
  const Tensor<T>& xv = x.value();
  const Tensor<T>& gv = gain.value();
  const Tensor<T>& bv = bias.value();
  const size_t rows = xv.rows(), cols = xv.cols();
  if (gv.rank() != 1 || gv.size() != cols) ShapeMismatch("layer_norm", xv.shape(), gv.shape());
  if (bv.rank() != 1 || bv.size() != cols) ShapeMismatch("layer_norm", xv.shape(), bv.shape());

  Tensor<T> out(xv.shape());
  Tensor<T> xhat(xv.shape());
  std::vector<T> rstd(rows);
  for (size_t r = 0; r < rows; ++r) {
    const T* row = xv.data().data() + r * cols;
    T mean = 0;
    for (size_t c = 0; c < cols; ++c) mean += row[c];
    mean /= T(cols);
    T var = 0;
    for (size_t c = 0; c < cols; ++c) var += (row[c] - mean) * (row[c] - mean);
    var /= T(cols);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (size_t c = 0; c < cols; ++c) {
      const T h = (row[c] - mean) * rstd[r];
      xhat[r * cols + c] = h;
      out[r * cols + c] = h * gv[c] + bv[c];
    }
  }
  return x.tape->Record(
      std::move(out), {x, gain, bias},
      [x, gain, bias, rows, cols, xhat = std::move(xhat),
       rstd = std::move(rstd)](Tape<T>& tape, const Tensor<T>& g) {
        if (tape.requires_grad(gain)) {
          Tensor<T>& gg = tape.MutableGrad(gain);
          for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c) gg[c] += g[r * cols + c] * xhat[r * cols + c];
        }
        if (tape.requires_grad(bias)) {
          Tensor<T>& gb = tape.MutableGrad(bias);
          for (size_t r = 0; r < rows; ++r)
            for (size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
        }
        if (tape.requires_grad(x)) {
          const Tensor<T>& gv = gain.value();
          Tensor<T>& gx = tape.MutableGrad(x);
          for (size_t r = 0; r < rows; ++r) {
            T mean_d = 0, mean_dx = 0;
            for (size_t c = 0; c < cols; ++c) {
              const T d = g[r * cols + c] * gv[c];
              mean_d += d;
              mean_dx += d * xhat[r * cols + c];
            }
            mean_d /= T(cols);
            mean_dx /= T(cols);
            for (size_t c = 0; c < cols; ++c) {
              const T d = g[r * cols + c] * gv[c];
              gx[r * cols + c] +=
                  rstd[r] * (d - mean_d - xhat[r * cols + c] * mean_dx);
            }
          }
        }
      });
}

template <typename T>
Var<T> GatherRows(Var<T> table, std::span<const int32_t> ids) {
  const Tensor<T>& tv = table.value();
  RequireRank2("gather_rows", tv);
  const size_t vocab = tv.shape()[0], width = tv.shape()[1];
  if (ids.empty()) throw std::invalid_argument("gather_rows: no ids");
  Tensor<T> out({ids.size(), width});
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<size_t>(ids[i]) >= vocab) {
      throw std::out_of_range("gather_rows: id " + std::to_string(ids[i]) +
                              " at position " + std::to_string(i) +
                              " outside table of " + std::to_string(vocab) + " rows");
    }
    std::copy_n(tv.data().data() + ids[i] * width, width,
                out.data().data() + i * width);
  }
  return table.tape->Record(
      std::move(out), {table},
      [table, width, ids = std::vector<int32_t>(ids.begin(), ids.end())](
          Tape<T>& tape, const Tensor<T>& g) {
        Tensor<T>& gt = tape.MutableGrad(table);
        for (size_t i = 0; i < ids.size(); ++i) {
          T* dst = gt.data().data() + ids[i] * width;
          const T* src = g.data().data() + i * width;
          for (size_t c = 0; c < width; ++c) dst[c] += src[c];
        }
      });
}

template <typename T>
Var<T> SliceCols(Var<T> x, size_t start, size_t width) {
  const Tensor<T>& xv = x.value();
  RequireRank2("slice_cols", xv);
  const size_t rows = xv.shape()[0], cols = xv.shape()[1];
  if (width == 0 || start + width > cols) {
    throw std::invalid_argument("slice_cols: columns [" + std::to_string(start) +
                                "," + std::to_string(start + width) +
                                ") outside " + ShapeString(xv.shape()));
  }
  Tensor<T> out({rows, width});
  for (size_t r = 0; r < rows; ++r)
    for (size_t c = 0; c < width; ++c) out.at(r, c) = xv.at(r, start + c);
  return x.tape->Record(std::move(out), {x},
                        [x, rows, start, width](Tape<T>& tape, const Tensor<T>& g) {
                          Tensor<T>& gx = tape.MutableGrad(x);
                          for (size_t r = 0; r < rows; ++r)
                            for (size_t c = 0; c < width; ++c) gx.at(r, start + c) += g.at(r, c);
                        });
}

template <typename T>
Var<T> ConcatCols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const size_t rows = parts[0].value().shape()[0];
  size_t total = 0;
  for (Var<T> p : parts) {
    RequireRank2("concat_cols", p.value());
    if (p.value().shape()[0] != rows) {
      ShapeMismatch("concat_cols", parts[0].value().shape(), p.value().shape());
    }
    total += p.value().shape()[1];
  }
  Tensor<T> out({rows, total});
  size_t offset = 0;
  for (Var<T> p : parts) {
    const Tensor<T>& pv = p.value();
    for (size_t r = 0; r < rows; ++r)
      for (size_t c = 0; c < pv.shape()[1]; ++c) out.at(r, offset + c) = pv.at(r, c);
    offset += pv.shape()[1];
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  Tape<T>* tape = parts[0].tape;
  return tape->Record(std::move(out), std::span<const Var<T>>(inputs),
                      [inputs, rows](Tape<T>& tape, const Tensor<T>& g) {
                        size_t offset = 0;
                        for (Var<T> p : inputs) {
                          const size_t w = p.value().shape()[1];
                          if (tape.requires_grad(p)) {
                            Tensor<T>& gp = tape.MutableGrad(p);
                            for (size_t r = 0; r < rows; ++r)
                              for (size_t c = 0; c < w; ++c) gp.at(r, c) += g.at(r, offset + c);
                          }
                          offset += w;
                        }
                      });
}

template <typename T>
Var<T> Dropout(Var<T> x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (rate == 0.0) return x;
  const T keep_scale = T(1.0 / (1.0 - rate));
  Tensor<T> mask(x.value().shape());
  for (T& m : mask.data()) m = rng.Uniform() < rate ? T(0) : keep_scale;
  Tensor<T> out = x.value();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return x.tape->Record(std::move(out), {x},
                        [x, mask = std::move(mask)](Tape<T>& tape, const Tensor<T>& g) {
                          Tensor<T>& gx = tape.MutableGrad(x);
                          for (size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
                        });
}

template <typename T>
Var<T> CrossEntropyMasked(Var<T> logits, std::span<const int32_t> labels,
                          int32_t ignore_label) {
  const Tensor<T>& lv = logits.value();
  const size_t rows = lv.rows(), classes = lv.cols();
  if (labels.size() != rows) {
    throw std::invalid_argument("cross_entropy: " + std::to_string(labels.size()) +
                                " labels for logits " + ShapeString(lv.shape()));
  }
  Tensor<T> probs(lv.shape());
  size_t count = 0;
  T total = 0;
  for (size_t r = 0; r < rows; ++r) {
    if (labels[r] == ignore_label) continue;
    if (labels[r] < 0 || static_cast<size_t>(labels[r]) >= classes) {
      throw std::out_of_range("cross_entropy: label " + std::to_string(labels[r]) +
                              " at row " + std::to_string(r) + " outside " +
                              std::to_string(classes) + " classes");
    }
    const T* row = lv.data().data() + r * classes;
    T mx = row[0];
    for (size_t c = 1; c < classes; ++c) mx = std::max(mx, row[c]);
    T sum = 0;
    for (size_t c = 0; c < classes; ++c) {
      const T e = std::exp(row[c] - mx);
      probs[r * classes + c] = e;
      sum += e;
    }
    for (size_t c = 0; c < classes; ++c) probs[r * classes + c] /= sum;
    total += std::log(sum) + mx - row[labels[r]];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("cross_entropy: every label is ignored");
  const T inv = T(1) / T(count);
  return logits.tape->Record(
      Tensor<T>::Scalar(total * inv), {logits},
      [logits, classes, inv, ignore_label, probs = std::move(probs),
       labels = std::vector<int32_t>(labels.begin(), labels.end())](
          Tape<T>& tape, const Tensor<T>& g) {
        Tensor<T>& gl = tape.MutableGrad(logits);
        const T scale = g[0] * inv;
        for (size_t r = 0; r < labels.size(); ++r) {
          if (labels[r] == ignore_label) continue;
          for (size_t c = 0; c < classes; ++c) {
            gl[r * classes + c] += scale * probs[r * classes + c];
          }
          gl[r * classes + labels[r]] -= scale;
        }
      });
}

template <typename T>
Var<T> Sum(Var<T> x) {
  T total = 0;
  for (T v : x.value().data()) total += v;
  return x.tape->Record(Tensor<T>::Scalar(total), {x},
                        [x](Tape<T>& tape, const Tensor<T>& g) {
                          Tensor<T>& gx = tape.MutableGrad(x);
                          for (T& v : gx.data()) v += g[0];
                        });
}

// --- Gradient checking -------------------------------------------------------

std::vector<Tensor<double>> AnalyticGradient(
    const GradCheckFn& f, std::span<Tensor<double>* const> points) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  for (Tensor<double>* p : points) vars.push_back(tape.Parameter(*p));
  const Var<double> loss = f(tape, vars);
  tape.Backward(loss);
  std::vector<Tensor<double>> grads;
  for (Var<double> v : vars) grads.push_back(tape.Grad(v));
  return grads;
}

std::vector<Tensor<double>> NumericGradient(
    const GradCheckFn& f, std::span<Tensor<double>* const> points, double eps) {
  auto evaluate = [&]() {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (Tensor<double>* p : points) vars.push_back(tape.Parameter(*p, false));
    return f(tape, vars).value()[0];
  };
  std::vector<Tensor<double>> grads;
  for (Tensor<double>* p : points) {
    Tensor<double> g(p->shape());
    for (size_t i = 0; i < p->size(); ++i) {
      const double x0 = (*p)[i];
      (*p)[i] = x0 + eps;
      const double up = evaluate();
      (*p)[i] = x0 - eps;
      const double down = evaluate();
      (*p)[i] = x0;
      g[i] = (up - down) / (2.0 * eps);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double MaxRelativeError(std::span<const Tensor<double>> analytic,
                        std::span<const Tensor<double>> numeric) {
  if (analytic.size() != numeric.size()) {
    throw std::invalid_argument("gradient lists differ in length");
  }
  double worst = 0.0;
  for (size_t t = 0; t < analytic.size(); ++t) {
    if (analytic[t].shape() != numeric[t].shape()) {
      ShapeMismatch("grad_check", analytic[t].shape(), numeric[t].shape());
    }
    for (size_t i = 0; i < analytic[t].size(); ++i) {
      const double a = analytic[t][i];
      const double n = numeric[t][i];
      const double denom = std::max({std::abs(a), std::abs(n), 1e-8});
      worst = std::max(worst, std::abs(a - n) / denom);
    }
  }
  return worst;
}

double GradCheck(const GradCheckFn& f, std::span<Tensor<double>* const> points,
                 double eps) {
  const auto analytic = AnalyticGradient(f, points);
  const auto numeric = NumericGradient(f, points, eps);
  return MaxRelativeError(analytic, numeric);
}

double GradCheck(const std::function<Var<double>(Tape<double>&, Var<double>)>& f,
                 const Tensor<double>& point, double eps) {
  Tensor<double> x = point;
  Tensor<double>* points[] = {&x};
  return GradCheck(
      [&f](Tape<double>& tape, std::span<const Var<double>> vars) {
        return f(tape, vars[0]);
      },
      points, eps);
}

#define TWEETLM_INSTANTIATE(T)                                                 \
  template class Tensor<T>;                                                    \
  template class Tape<T>;                                                      \
  template Var<T> MatMul(Var<T>, Var<T>);                                      \
  template Var<T> MatMulTransB(Var<T>, Var<T>);                                \
  template Var<T> Transpose(Var<T>);                                           \
  template Var<T> Add(Var<T>, Var<T>);                                         \
  template Var<T> Mul(Var<T>, Var<T>);                                         \
  template Var<T> AddBias(Var<T>, Var<T>);                                     \
  template Var<T> Scale(Var<T>, T);                                            \
  template Var<T> Gelu(Var<T>);                                                \
  template Var<T> Tanh(Var<T>);                                                \
  template Var<T> Softmax(Var<T>, int);                                        \
  template Var<T> LayerNorm(Var<T>, Var<T>, Var<T>, T);                        \
  template Var<T> GatherRows(Var<T>, std::span<const int32_t>);                \
  template Var<T> SliceCols(Var<T>, size_t, size_t);                           \
  template Var<T> ConcatCols(std::span<const Var<T>>);                         \
  template Var<T> Dropout(Var<T>, double, Rng&);                               \
  template Var<T> CrossEntropyMasked(Var<T>, std::span<const int32_t>, int32_t); \
  template Var<T> Sum(Var<T>);

TWEETLM_INSTANTIATE(float)
TWEETLM_INSTANTIATE(double)

#undef TWEETLM_INSTANTIATE

}  // namespace tweetlm
