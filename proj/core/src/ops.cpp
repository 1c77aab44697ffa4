#include "egpmda/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace egpmda::ops {

namespace {

constexpr double kGeluCoef = 0.044715;
const double kSqrt2OverPi = std::sqrt(2.0 / M_PI);

[[noreturn]] void shape_error(const std::string& op, const std::string& detail) {
  throw std::invalid_argument(op + ": " + detail);
}

void require_matrix(const std::string& op, const Tensor& t, const char* name) {
  if (t.shape().size() != 2) shape_error(op, std::string(name) + " must be a matrix, got " + t.shape_str());
}

void require_vector(const std::string& op, const Tensor& t, const char* name) {
  if (t.shape().size() != 1) shape_error(op, std::string(name) + " must be a vector, got " + t.shape_str());
}

double sigmoid_scalar(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Var matmul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_matrix("matmul", av, "lhs");
  require_matrix("matmul", bv, "rhs");
  if (av.cols() != bv.rows())
    shape_error("matmul", "inner dimensions disagree: " + av.shape_str() + " vs " + bv.shape_str());
  const int64_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out = Tensor::zeros({m, n});
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t p = 0; p < k; ++p) {
      const double aip = av.at(i, p);
      if (aip == 0.0) continue;
      for (int64_t j = 0; j < n; ++j) out.at(i, j) += aip * bv.at(p, j);
    }
  }
  return t.record(std::move(out), {a, b}, [a, b, m, k, n](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(a);
    const Tensor& bv2 = tp.value(b);
    if (tp.tracks_grad(a)) {
      Tensor& ga = tp.grad_mut(a);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) {
          const double gij = g.at(i, j);
          if (gij == 0.0) continue;
          for (int64_t p = 0; p < k; ++p) ga.at(i, p) += gij * bv2.at(p, j);
        }
    }
    if (tp.tracks_grad(b)) {
      Tensor& gb = tp.grad_mut(b);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t p = 0; p < k; ++p) {
          const double aip = av2.at(i, p);
          if (aip == 0.0) continue;
          for (int64_t j = 0; j < n; ++j) gb.at(p, j) += aip * g.at(i, j);
        }
    }
  });
}

Var add(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (!av.same_shape(bv)) shape_error("add", av.shape_str() + " vs " + bv.shape_str());
  Tensor out = av;
  for (int64_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    for (Var v : {a, b}) {
      if (!tp.tracks_grad(v)) continue;
      Tensor& gv = tp.grad_mut(v);
      for (int64_t i = 0; i < g.size(); ++i) gv[i] += g[i];
    }
  });
}

Var mul(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  if (!av.same_shape(bv)) shape_error("mul", av.shape_str() + " vs " + bv.shape_str());
  Tensor out = av;
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(a);
    const Tensor& bv2 = tp.value(b);
    if (tp.tracks_grad(a)) {
      Tensor& ga = tp.grad_mut(a);
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv2[i];
    }
    if (tp.tracks_grad(b)) {
      Tensor& gb = tp.grad_mut(b);
      for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av2[i];
    }
  });
}

Var add_bias(Tape& t, Var a, Var bias) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(bias);
  require_matrix("add_bias", av, "input");
  require_vector("add_bias", bv, "bias");
  if (av.cols() != bv.size())
    shape_error("add_bias", "bias length " + bv.shape_str() + " vs input " + av.shape_str());
  Tensor out = av;
  const int64_t m = av.rows(), n = av.cols();
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out.at(i, j) += bv[j];
  return t.record(std::move(out), {a, bias}, [a, bias, m, n](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    if (tp.tracks_grad(a)) {
      Tensor& ga = tp.grad_mut(a);
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.tracks_grad(bias)) {
      Tensor& gb = tp.grad_mut(bias);
      for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) gb[j] += g.at(i, j);
    }
  });
}

Var linear(Tape& t, Var x, Var w, Var b) { return add_bias(t, matmul(t, x, w), b); }

Var sum_all(Tape& t, Var a) {
  const Tensor& av = t.value(a);
  double s = 0.0;
  for (int64_t i = 0; i < av.size(); ++i) s += av[i];
  return t.record(Tensor::scalar(s), {a}, [a](Tape& tp, int32_t self) {
    const double g = tp.grad(Var{self})[0];
    if (!tp.tracks_grad(a)) return;
    Tensor& ga = tp.grad_mut(a);
    for (int64_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

Var gelu(Tape& t, Var a) {
  const Tensor& av = t.value(a);
  Tensor out = av;
  for (int64_t i = 0; i < out.size(); ++i) {
    const double x = av[i];
    const double u = kSqrt2OverPi * (x + kGeluCoef * x * x * x);
    out[i] = 0.5 * x * (1.0 + std::tanh(u));
  }
  return t.record(std::move(out), {a}, [a](Tape& tp, int32_t self) {
    if (!tp.tracks_grad(a)) return;
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(a);
    Tensor& ga = tp.grad_mut(a);
    for (int64_t i = 0; i < g.size(); ++i) {
      const double x = av2[i];
      const double u = kSqrt2OverPi * (x + kGeluCoef * x * x * x);
      const double th = std::tanh(u);
      const double du = kSqrt2OverPi * (1.0 + 3.0 * kGeluCoef * x * x);
      ga[i] += g[i] * (0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du);
    }
  });
}

Var sigmoid(Tape& t, Var a) {
  const Tensor& av = t.value(a);
  Tensor out = av;
  for (int64_t i = 0; i < out.size(); ++i) out[i] = sigmoid_scalar(av[i]);
  return t.record(std::move(out), {a}, [a](Tape& tp, int32_t self) {
    if (!tp.tracks_grad(a)) return;
    const Tensor& g = tp.grad(Var{self});
    const Tensor& ov = tp.value(Var{self});
    Tensor& ga = tp.grad_mut(a);
    for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * ov[i] * (1.0 - ov[i]);
  });
}

namespace {
// Shared implementation: rows of `x` hold flattened (len×width) signals.
Var conv1d_impl(Tape& t, Var x, Var kernel, Var bias, int64_t n, int64_t len, int64_t width,
                bool matrix_input) {
  const Tensor& kv = t.value(kernel);
  const Tensor& bv = t.value(bias);
  require_matrix("conv1d", kv, "kernel");
  if (kv.cols() != width)
    shape_error("conv1d", "kernel width " + kv.shape_str() + " vs signal width " + std::to_string(width));
  if (bv.size() != 1) shape_error("conv1d", "bias must be a single value");
  const int64_t k = kv.rows();
  if (len < k) shape_error("conv1d", "signal length " + std::to_string(len) + " shorter than kernel " + std::to_string(k));
  const int64_t out_len = len - k + 1;
  const Tensor& xv = t.value(x);
  Tensor out = matrix_input ? Tensor::zeros({out_len}) : Tensor::zeros({n, out_len});
  for (int64_t r = 0; r < n; ++r) {
    const double* row = xv.data() + r * len * width;
    double* orow = out.data() + r * out_len;
    for (int64_t i = 0; i < out_len; ++i) {
      double acc = bv[0];
      for (int64_t a = 0; a < k; ++a)
        for (int64_t b = 0; b < width; ++b) acc += row[(i + a) * width + b] * kv.at(a, b);
      orow[i] = acc;
    }
  }
  return t.record(std::move(out), {x, kernel, bias},
                  [x, kernel, bias, n, len, width, k, out_len](Tape& tp, int32_t self) {
                    const Tensor& g = tp.grad(Var{self});
                    const Tensor& xv2 = tp.value(x);
                    const Tensor& kv2 = tp.value(kernel);
                    if (tp.tracks_grad(x)) {
                      Tensor& gx = tp.grad_mut(x);
                      for (int64_t r = 0; r < n; ++r) {
                        double* grow = gx.data() + r * len * width;
                        const double* go = g.data() + r * out_len;
                        for (int64_t i = 0; i < out_len; ++i) {
                          const double gi = go[i];
                          if (gi == 0.0) continue;
                          for (int64_t a = 0; a < k; ++a)
                            for (int64_t b = 0; b < width; ++b) grow[(i + a) * width + b] += gi * kv2.at(a, b);
                        }
                      }
                    }
                    if (tp.tracks_grad(kernel)) {
                      Tensor& gk = tp.grad_mut(kernel);
                      for (int64_t r = 0; r < n; ++r) {
                        const double* row = xv2.data() + r * len * width;
                        const double* go = g.data() + r * out_len;
                        for (int64_t i = 0; i < out_len; ++i) {
                          const double gi = go[i];
                          if (gi == 0.0) continue;
                          for (int64_t a = 0; a < k; ++a)
                            for (int64_t b = 0; b < width; ++b) gk.at(a, b) += gi * row[(i + a) * width + b];
                        }
                      }
                    }
                    if (tp.tracks_grad(bias)) {
                      double acc = 0.0;
                      for (int64_t i = 0; i < g.size(); ++i) acc += g[i];
                      tp.grad_mut(bias)[0] += acc;
                    }
                  });
}
}  // namespace

Var conv1d_single_filter(Tape& t, Var x, Var kernel, Var bias) {
  const Tensor& xv = t.value(x);
  require_matrix("conv1d_single_filter", xv, "input");
  return conv1d_impl(t, x, kernel, bias, 1, xv.rows(), xv.cols(), true);
}

Var conv1d_rows(Tape& t, Var x, Var kernel, Var bias, int64_t len, int64_t width) {
  const Tensor& xv = t.value(x);
  require_matrix("conv1d_rows", xv, "input");
  if (xv.cols() != len * width)
    shape_error("conv1d_rows", "row length " + std::to_string(xv.cols()) + " != len*width " +
                                   std::to_string(len * width));
  return conv1d_impl(t, x, kernel, bias, xv.rows(), len, width, false);
}

Var segmented_softmax(Tape& t, Var values, IndexArray segment_ids) {
  const Tensor& v = t.value(values);
  require_vector("segmented_softmax", v, "values");
  const auto& ids = *segment_ids;
  if (static_cast<int64_t>(ids.size()) != v.size())
    shape_error("segmented_softmax", "segment ids length does not match values");
  for (size_t i = 1; i < ids.size(); ++i)
    if (ids[i] < ids[i - 1]) throw std::invalid_argument("segmented_softmax: segment ids must be sorted");
  Tensor out = v;
  const int64_t n = v.size();
  int64_t start = 0;
  while (start < n) {
    int64_t end = start + 1;
    while (end < n && ids[end] == ids[start]) ++end;
    double mx = v[start];
    for (int64_t i = start + 1; i < end; ++i) mx = std::max(mx, v[i]);
    double denom = 0.0;
    for (int64_t i = start; i < end; ++i) {
      out[i] = std::exp(v[i] - mx);
      denom += out[i];
    }
    for (int64_t i = start; i < end; ++i) out[i] /= denom;
    start = end;
  }
  return t.record(std::move(out), {values}, [values, segment_ids, n](Tape& tp, int32_t self) {
    if (!tp.tracks_grad(values)) return;
    const Tensor& g = tp.grad(Var{self});
    const Tensor& y = tp.value(Var{self});
    Tensor& gv = tp.grad_mut(values);
    const auto& ids2 = *segment_ids;
    int64_t start2 = 0;
    while (start2 < n) {
      int64_t end2 = start2 + 1;
      while (end2 < n && ids2[end2] == ids2[start2]) ++end2;
      double dot = 0.0;
      for (int64_t i = start2; i < end2; ++i) dot += y[i] * g[i];
      for (int64_t i = start2; i < end2; ++i) gv[i] += y[i] * (g[i] - dot);
      start2 = end2;
    }
  });
}

Var gather_rows(Tape& t, Var a, IndexArray rows) {
  const Tensor& av = t.value(a);
  require_matrix("gather_rows", av, "input");
  const auto& idx = *rows;
  const int64_t d = av.cols();
  Tensor out = Tensor::zeros({static_cast<int64_t>(idx.size()), d});
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= av.rows()) shape_error("gather_rows", "row index out of range");
    const double* src = av.data() + static_cast<int64_t>(idx[i]) * d;
    double* dst = out.data() + static_cast<int64_t>(i) * d;
    for (int64_t j = 0; j < d; ++j) dst[j] = src[j];
  }
  return t.record(std::move(out), {a}, [a, rows, d](Tape& tp, int32_t self) {
    if (!tp.tracks_grad(a)) return;
    const Tensor& g = tp.grad(Var{self});
    Tensor& ga = tp.grad_mut(a);
    const auto& idx2 = *rows;
    for (size_t i = 0; i < idx2.size(); ++i) {
      double* dst = ga.data() + static_cast<int64_t>(idx2[i]) * d;
      const double* src = g.data() + static_cast<int64_t>(i) * d;
      for (int64_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Var scatter_add_rows(Tape& t, Var a, IndexArray rows, int64_t out_rows) {
  const Tensor& av = t.value(a);
  require_matrix("scatter_add_rows", av, "input");
  const auto& idx = *rows;
  if (static_cast<int64_t>(idx.size()) != av.rows())
    shape_error("scatter_add_rows", "index length does not match input rows");
  const int64_t d = av.cols();
  Tensor out = Tensor::zeros({out_rows, d});
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= out_rows) shape_error("scatter_add_rows", "row index out of range");
    double* dst = out.data() + static_cast<int64_t>(idx[i]) * d;
    const double* src = av.data() + static_cast<int64_t>(i) * d;
    for (int64_t j = 0; j < d; ++j) dst[j] += src[j];
  }
  return t.record(std::move(out), {a}, [a, rows, d](Tape& tp, int32_t self) {
    if (!tp.tracks_grad(a)) return;
    const Tensor& g = tp.grad(Var{self});
    Tensor& ga = tp.grad_mut(a);
    const auto& idx2 = *rows;
    for (size_t i = 0; i < idx2.size(); ++i) {
      const double* src = g.data() + static_cast<int64_t>(idx2[i]) * d;
      double* dst = ga.data() + static_cast<int64_t>(i) * d;
      for (int64_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  });
}

Var rowwise_dot(Tape& t, Var a, Var b) {
  const Tensor& av = t.value(a);
  const Tensor& bv = t.value(b);
  require_matrix("rowwise_dot", av, "lhs");
  if (!av.same_shape(bv)) shape_error("rowwise_dot", av.shape_str() + " vs " + bv.shape_str());
  const int64_t e = av.rows(), d = av.cols();
  Tensor out = Tensor::zeros({e});
  for (int64_t i = 0; i < e; ++i) {
    double acc = 0.0;
    for (int64_t j = 0; j < d; ++j) acc += av.at(i, j) * bv.at(i, j);
    out[i] = acc;
  }
  return t.record(std::move(out), {a, b}, [a, b, e, d](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(a);
    const Tensor& bv2 = tp.value(b);
    if (tp.tracks_grad(a)) {
      Tensor& ga = tp.grad_mut(a);
      for (int64_t i = 0; i < e; ++i)
        for (int64_t j = 0; j < d; ++j) ga.at(i, j) += g[i] * bv2.at(i, j);
    }
    if (tp.tracks_grad(b)) {
      Tensor& gb = tp.grad_mut(b);
      for (int64_t i = 0; i < e; ++i)
        for (int64_t j = 0; j < d; ++j) gb.at(i, j) += g[i] * av2.at(i, j);
    }
  });
}

Var scale_rows(Tape& t, Var a, Var s) {
  const Tensor& av = t.value(a);
  const Tensor& sv = t.value(s);
  require_matrix("scale_rows", av, "input");
  require_vector("scale_rows", sv, "scales");
  if (sv.size() != av.rows()) shape_error("scale_rows", "scale length does not match rows");
  const int64_t e = av.rows(), d = av.cols();
  Tensor out = av;
  for (int64_t i = 0; i < e; ++i)
    for (int64_t j = 0; j < d; ++j) out.at(i, j) *= sv[i];
  return t.record(std::move(out), {a, s}, [a, s, e, d](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(a);
    const Tensor& sv2 = tp.value(s);
    if (tp.tracks_grad(a)) {
      Tensor& ga = tp.grad_mut(a);
      for (int64_t i = 0; i < e; ++i)
        for (int64_t j = 0; j < d; ++j) ga.at(i, j) += g.at(i, j) * sv2[i];
    }
    if (tp.tracks_grad(s)) {
      Tensor& gs = tp.grad_mut(s);
      for (int64_t i = 0; i < e; ++i) {
        double acc = 0.0;
        for (int64_t j = 0; j < d; ++j) acc += g.at(i, j) * av2.at(i, j);
        gs[i] += acc;
      }
    }
  });
}

Var scale_by_scalar(Tape& t, Var a, Var s, double factor) {
  const Tensor& av = t.value(a);
  const Tensor& sv = t.value(s);
  if (sv.size() != 1) shape_error("scale_by_scalar", "scale must be a single value");
  Tensor out = av;
  const double c = sv[0] * factor;
  for (int64_t i = 0; i < out.size(); ++i) out[i] *= c;
  return t.record(std::move(out), {a, s}, [a, s, factor](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(a);
    const Tensor& sv2 = tp.value(s);
    if (tp.tracks_grad(a)) {
      Tensor& ga = tp.grad_mut(a);
      const double c = sv2[0] * factor;
      for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
    }
    if (tp.tracks_grad(s)) {
      double acc = 0.0;
      for (int64_t i = 0; i < g.size(); ++i) acc += g[i] * av2[i];
      tp.grad_mut(s)[0] += acc * factor;
    }
  });
}

Var concat_cols(Tape& t, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const int64_t m = t.value(parts[0]).rows();
  int64_t total = 0;
  for (Var p : parts) {
    const Tensor& pv = t.value(p);
    require_matrix("concat_cols", pv, "part");
    if (pv.rows() != m) shape_error("concat_cols", "row counts differ");
    total += pv.cols();
  }
  Tensor out = Tensor::zeros({m, total});
  int64_t off = 0;
  for (Var p : parts) {
    const Tensor& pv = t.value(p);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < pv.cols(); ++j) out.at(i, off + j) = pv.at(i, j);
    off += pv.cols();
  }
  return t.record(std::move(out), parts, [parts, m](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    int64_t off2 = 0;
    for (Var p : parts) {
      const int64_t c = tp.value(p).cols();
      if (tp.tracks_grad(p)) {
        Tensor& gp = tp.grad_mut(p);
        for (int64_t i = 0; i < m; ++i)
          for (int64_t j = 0; j < c; ++j) gp.at(i, j) += g.at(i, off2 + j);
      }
      off2 += c;
    }
  });
}

Var masked_residual_blend(Tape& t, Var agg, Var prev, Var alpha, ByteMask mask) {
  const Tensor& av = t.value(agg);
  const Tensor& pv = t.value(prev);
  const Tensor& al = t.value(alpha);
  require_matrix("masked_residual_blend", av, "agg");
  if (!av.same_shape(pv)) shape_error("masked_residual_blend", av.shape_str() + " vs " + pv.shape_str());
  if (al.size() != 1) shape_error("masked_residual_blend", "alpha must be a single value");
  if (static_cast<int64_t>(mask->size()) != av.rows())
    shape_error("masked_residual_blend", "mask length does not match rows");
  const double g0 = sigmoid_scalar(al[0]);
  const int64_t m = av.rows(), d = av.cols();
  Tensor out = pv;
  for (int64_t i = 0; i < m; ++i) {
    if (!(*mask)[static_cast<size_t>(i)]) continue;
    for (int64_t j = 0; j < d; ++j) out.at(i, j) = g0 * av.at(i, j) + (1.0 - g0) * pv.at(i, j);
  }
  return t.record(std::move(out), {agg, prev, alpha}, [agg, prev, alpha, mask, m, d](Tape& tp, int32_t self) {
    const Tensor& g = tp.grad(Var{self});
    const Tensor& av2 = tp.value(agg);
    const Tensor& pv2 = tp.value(prev);
    const double a0 = tp.value(alpha)[0];
    const double gate = sigmoid_scalar(a0);
    if (tp.tracks_grad(agg)) {
      Tensor& ga = tp.grad_mut(agg);
      for (int64_t i = 0; i < m; ++i) {
        if (!(*mask)[static_cast<size_t>(i)]) continue;
        for (int64_t j = 0; j < d; ++j) ga.at(i, j) += gate * g.at(i, j);
      }
    }
    if (tp.tracks_grad(prev)) {
      Tensor& gp = tp.grad_mut(prev);
      for (int64_t i = 0; i < m; ++i) {
        const double w = (*mask)[static_cast<size_t>(i)] ? (1.0 - gate) : 1.0;
        for (int64_t j = 0; j < d; ++j) gp.at(i, j) += w * g.at(i, j);
      }
    }
    if (tp.tracks_grad(alpha)) {
      double acc = 0.0;
      for (int64_t i = 0; i < m; ++i) {
        if (!(*mask)[static_cast<size_t>(i)]) continue;
        for (int64_t j = 0; j < d; ++j) acc += g.at(i, j) * (av2.at(i, j) - pv2.at(i, j));
      }
      tp.grad_mut(alpha)[0] += acc * gate * (1.0 - gate);
    }
  });
}

Var bce_sum(Tape& t, Var scores, LabelArray labels) {
  const Tensor& sv = t.value(scores);
  if (static_cast<int64_t>(labels->size()) != sv.size())
    shape_error("bce_sum", "label count does not match scores");
  for (int lab : *labels)
    if (lab != 0 && lab != 1) throw std::invalid_argument("bce_sum: labels must be 0 or 1");
  constexpr double kEps = 1e-12;
  double loss = 0.0;
  for (int64_t i = 0; i < sv.size(); ++i) {
    const double y = std::clamp(sv[i], kEps, 1.0 - kEps);
    const double yh = static_cast<double>((*labels)[static_cast<size_t>(i)]);
    loss -= yh * std::log(y) + (1.0 - yh) * std::log(1.0 - y);
  }
  return t.record(Tensor::scalar(loss), {scores}, [scores, labels](Tape& tp, int32_t self) {
    if (!tp.tracks_grad(scores)) return;
    const double g = tp.grad(Var{self})[0];
    const Tensor& sv2 = tp.value(scores);
    Tensor& gs = tp.grad_mut(scores);
    for (int64_t i = 0; i < sv2.size(); ++i) {
      const double raw = sv2[i];
      if (raw <= kEps || raw >= 1.0 - kEps) continue;  // clamp region: flat
      const double yh = static_cast<double>((*labels)[static_cast<size_t>(i)]);
      gs[i] += g * (-yh / raw + (1.0 - yh) / (1.0 - raw));
    }
  });
}

}  // namespace egpmda::ops
