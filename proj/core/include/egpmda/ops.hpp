#pragma once
// Differentiable primitives recorded on the tape. Every op validates shapes,
// computes the forward value with a fixed summation order, and registers the
// matching backward rule. Index arrays and masks are shared so the backward
// closures stay cheap to copy.

#include <memory>
#include <vector>

#include "egpmda/tape.hpp"

namespace egpmda::ops {

using IndexArray = std::shared_ptr<const std::vector<int32_t>>;
using ByteMask = std::shared_ptr<const std::vector<uint8_t>>;
using LabelArray = std::shared_ptr<const std::vector<int>>;

inline IndexArray make_index(std::vector<int32_t> v) {
  return std::make_shared<const std::vector<int32_t>>(std::move(v));
}

// (m×k)·(k×n) -> (m×n)
Var matmul(Tape& t, Var a, Var b);

// Elementwise, identical shapes.
Var add(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);

// (m×n) + row-broadcast bias (n)
Var add_bias(Tape& t, Var a, Var bias);

// add_bias(matmul(x, w), b): the xW + b linear layer.
Var linear(Tape& t, Var x, Var w, Var b);

Var sum_all(Tape& t, Var a);  // -> scalar

// GELU, tanh approximation: 0.5x(1 + tanh(sqrt(2/pi)(x + 0.044715 x^3)))
Var gelu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);

// Single-filter valid convolution: x (l×w), kernel (k×w), bias (1) -> (l-k+1)
Var conv1d_single_filter(Tape& t, Var x, Var kernel, Var bias);

// Batched variant: each row of x is one flattened (len×w) signal.
// x (n × len·w) -> (n × (len-k+1))
Var conv1d_rows(Tape& t, Var x, Var kernel, Var bias, int64_t len, int64_t width);

// Softmax within runs of equal, ascending segment ids. values (n), ids (n).
// Max-subtraction per segment keeps the exponentials in range.
Var segmented_softmax(Tape& t, Var values, IndexArray segment_ids);

// out[i] = a[rows[i]]; a (m×d) -> (|rows|×d)
Var gather_rows(Tape& t, Var a, IndexArray rows);

// out[rows[i]] += a[i]; a (e×d) -> (out_rows×d)
Var scatter_add_rows(Tape& t, Var a, IndexArray rows, int64_t out_rows);

// out[i] = dot(a[i], b[i]); (e×d),(e×d) -> (e)
Var rowwise_dot(Tape& t, Var a, Var b);

// out[i] = a[i] * s[i]; (e×d),(e) -> (e×d)
Var scale_rows(Tape& t, Var a, Var s);

// out = a * s[0] * factor, with s a learnable 1-element tensor.
Var scale_by_scalar(Tape& t, Var a, Var s, double factor);

// Horizontal concatenation of matrices with equal row counts.
Var concat_cols(Tape& t, const std::vector<Var>& parts);

// Residual gate, g = sigmoid(alpha[0]):
//   out[r] = g·agg[r] + (1-g)·prev[r]   where mask[r] != 0
//   out[r] = prev[r]                    where mask[r] == 0 (no incoming edges)
Var masked_residual_blend(Tape& t, Var agg, Var prev, Var alpha, ByteMask mask);

// Summed binary cross entropy: -sum(y_hat·log y + (1-y_hat)·log(1-y)),
// scores clamped to [1e-12, 1-1e-12] before the logs. labels must be 0/1.
Var bce_sum(Tape& t, Var scores, LabelArray labels);

}  // namespace egpmda::ops
