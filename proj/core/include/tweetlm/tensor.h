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

#ifndef TWEETLM_TENSOR_H_
#define TWEETLM_TENSOR_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tweetlm {

class Rng;

// Dense row-major tensor. Row-wise operations treat the last extent as the
// row length, so a rank-1 tensor is a single row.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape, T fill = T(0));
  Tensor(std::vector<size_t> shape, std::vector<T> data);

  static Tensor Scalar(T value) { return Tensor({1}, std::vector<T>{value}); }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  size_t cols() const { return shape_.empty() ? 0 : shape_.back(); }
  size_t rows() const { return cols() == 0 ? 0 : data_.size() / cols(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }
  T& at(size_t r, size_t c) { return data_[r * cols() + c]; }
  const T& at(size_t r, size_t c) const { return data_[r * cols() + c]; }

  void Fill(T value);
  bool AllFinite() const;

  template <typename U>
  Tensor<U> Cast() const {
    return Tensor<U>(shape_, std::vector<U>(data_.begin(), data_.end()));
  }

  bool operator==(const Tensor&) const = default;

 private:
  std::vector<size_t> shape_;
  std::vector<T> data_;
};

std::string ShapeString(std::span<const size_t> shape);

template <typename T>
class Tape;

// Handle to a node on a Tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  uint32_t index = 0;

  const Tensor<T>& value() const;
};

// Linear record of primitive applications for reverse-mode
// differentiation. Nodes are appended in evaluation order, which is a
// topological order; Backward walks it once in reverse.
template <typename T>
class Tape {
 public:
  // Receives the gradient flowing into the node's output.
  using BackwardFn = std::function<void(Tape&, const Tensor<T>& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> Constant(Tensor<T> value);
  // Leaf that owns its value and accumulates a gradient.
  Var<T> Variable(Tensor<T> value);
  // Leaf that refers to `value` without copying; `value` must outlive the
  // tape.
  Var<T> Parameter(const Tensor<T>& value, bool requires_grad = true);

  // Appends a primitive. `backward` runs only if some input requires a
  // gradient.
  Var<T> Record(Tensor<T> value, std::initializer_list<Var<T>> inputs,
                BackwardFn backward);
  Var<T> Record(Tensor<T> value, std::span<const Var<T>> inputs,
                BackwardFn backward);

  const Tensor<T>& value(Var<T> v) const;
  bool requires_grad(Var<T> v) const;

  // Gradient accumulated for `v`; zeros if nothing reached it.
  Tensor<T> Grad(Var<T> v) const;
  // Null if nothing reached `v`.
  const Tensor<T>* FindGrad(Var<T> v) const;
  // Zero-initialised on first access. For use inside BackwardFn.
  Tensor<T>& MutableGrad(Var<T> v);

  // Seeds d(loss)/d(loss) = 1 and propagates. Throws std::invalid_argument if
  // `loss` belongs to another tape or is not a single element.
  void Backward(Var<T> loss);

  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<T> owned;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    bool requires_grad = false;
    BackwardFn backward;

    const Tensor<T>& value() const { return external ? *external : owned; }
  };

  void Check(Var<T> v) const;
  Var<T> Push(Node node);

  std::vector<Node> nodes_;
};

template <typename T>
const Tensor<T>& Var<T>::value() const {
  return tape->value(*this);
}

// Primitive operations. Shapes are explicit: the only broadcast is the
// row-wise bias add. Shape errors throw std::invalid_argument naming both
// shapes.

// [m,k] x [k,n] -> [m,n]
template <typename T>
Var<T> MatMul(Var<T> a, Var<T> b);
// [m,k] x [n,k]^T -> [m,n]
template <typename T>
Var<T> MatMulTransB(Var<T> a, Var<T> b);
template <typename T>
Var<T> Transpose(Var<T> a);
template <typename T>
Var<T> Add(Var<T> a, Var<T> b);
template <typename T>
Var<T> Mul(Var<T> a, Var<T> b);
// x[m,n] + bias[n] on every row.
template <typename T>
Var<T> AddBias(Var<T> x, Var<T> bias);
template <typename T>
Var<T> Scale(Var<T> x, T factor);
// Exact (erf) GELU.
template <typename T>
Var<T> Gelu(Var<T> x);
template <typename T>
Var<T> Tanh(Var<T> x);
// axis 1 normalises each row, axis 0 each column (rank-2 input). Rank-1
// inputs only accept axis 0.
template <typename T>
Var<T> Softmax(Var<T> x, int axis = -1);
// Per row: (x - mean) / sqrt(var + eps) * gain + bias.
template <typename T>
Var<T> LayerNorm(Var<T> x, Var<T> gain, Var<T> bias, T eps);
// Rows of table[V,h] at `ids`; gradient scatter-adds back.
template <typename T>
Var<T> GatherRows(Var<T> table, std::span<const int32_t> ids);
template <typename T>
Var<T> SliceCols(Var<T> x, size_t start, size_t width);
template <typename T>
Var<T> ConcatCols(std::span<const Var<T>> parts);
// Inverted dropout; identity when rate == 0.
template <typename T>
Var<T> Dropout(Var<T> x, double rate, Rng& rng);
// Mean over non-ignored rows of -log softmax(logits[row])[label].
// Throws std::invalid_argument if every label equals ignore_label.
template <typename T>
Var<T> CrossEntropyMasked(Var<T> logits, std::span<const int32_t> labels,
                          int32_t ignore_label = -100);
template <typename T>
Var<T> Sum(Var<T> x);

// Central-difference gradient check over every coordinate of `points`.
// `f` builds a scalar on the given tape from one Var per point.
using GradCheckFn = std::function<Var<double>(Tape<double>&,
                                              std::span<const Var<double>>)>;

std::vector<Tensor<double>> AnalyticGradient(
    const GradCheckFn& f, std::span<Tensor<double>* const> points);
std::vector<Tensor<double>> NumericGradient(
    const GradCheckFn& f, std::span<Tensor<double>* const> points, double eps);

// max |a - n| / max(|a|, |n|, 1e-8) over all coordinates.
double MaxRelativeError(std::span<const Tensor<double>> analytic,
                        std::span<const Tensor<double>> numeric);

double GradCheck(const GradCheckFn& f, std::span<Tensor<double>* const> points,
                 double eps = 1e-5);
double GradCheck(const std::function<Var<double>(Tape<double>&, Var<double>)>& f,
                 const Tensor<double>& point, double eps = 1e-5);

}  // namespace tweetlm

#endif  // TWEETLM_TENSOR_H_
