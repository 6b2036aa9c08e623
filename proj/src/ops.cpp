#include "mem2seq/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace m2s {

namespace {

void softmax_into(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - peak);
    total += out[i];
  }
  for (double& v : out) v /= total;
}

void check_index(std::size_t id, std::size_t rows, const char* what) {
  if (id >= rows) {
    throw std::out_of_range(std::string(what) + ": id " + std::to_string(id) + " outside table of " +
                            std::to_string(rows) + " rows");
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericError("softmax input is not finite");
  }
  std::vector<double> out(logits.size());
  softmax_into(logits, out);
  return out;
}

double cross_entropy(std::span<const double> dist, std::size_t target) {
  if (target >= dist.size()) {
    throw std::out_of_range("cross_entropy target " + std::to_string(target) + " out of range");
  }
  return -std::log(std::max(dist[target], kProbabilityFloor));
}

std::vector<double> sum_embeddings(std::span<const std::size_t> ids, const Tensor& table) {
  if (ids.empty()) throw std::invalid_argument("sum_embeddings of empty id list");
  std::vector<double> out(table.cols(), 0.0);
  for (std::size_t id : ids) {
    check_index(id, table.rows(), "sum_embeddings");
    auto row = table.row(id);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
  return out;
}

Tensor dropout_mask(std::size_t n, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must lie in [0, 1)");
  Tensor mask({n});
  const double keep = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < n; ++i) mask[i] = rng.bernoulli(rate) ? 0.0 : keep;
  return mask;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

namespace ops {

Var add(Graph& g, Var a, Var b) {
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  require_same_shape(x, y, "add");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
  return g.record("add", std::move(out), [a, b](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += gs[i];
    Tensor& gb = g.grad(b);
    for (std::size_t i = 0; i < gs.size(); ++i) gb[i] += gs[i];
  });
}

Var sub(Graph& g, Var a, Var b) {
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  require_same_shape(x, y, "sub");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
  return g.record("sub", std::move(out), [a, b](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += gs[i];
    Tensor& gb = g.grad(b);
    for (std::size_t i = 0; i < gs.size(); ++i) gb[i] -= gs[i];
  });
}

Var mul(Graph& g, Var a, Var b) {
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  require_same_shape(x, y, "mul");
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
  return g.record("mul", std::move(out), [a, b](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    const Tensor& x = g.value(a);
    const Tensor& y = g.value(b);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += gs[i] * y[i];
    Tensor& gb = g.grad(b);
    for (std::size_t i = 0; i < gs.size(); ++i) gb[i] += gs[i] * x[i];
  });
}

Var scale(Graph& g, Var a, double factor) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v *= factor;
  return g.record("scale", std::move(out), [a, factor](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += factor * gs[i];
  });
}

Var one_minus(Graph& g, Var a) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v = 1.0 - v;
  return g.record("one_minus", std::move(out), [a](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] -= gs[i];
  });
}

Var sigmoid(Graph& g, Var a) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v = 1.0 / (1.0 + std::exp(-v));
  return g.record("sigmoid", std::move(out), [a](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    const Tensor& y = g.value(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += gs[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Graph& g, Var a) {
  Tensor out = g.value(a);
  for (double& v : out.values()) v = std::tanh(v);
  return g.record("tanh", std::move(out), [a](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    const Tensor& y = g.value(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += gs[i] * (1.0 - y[i] * y[i]);
  });
}

Var matvec(Graph& g, Var a, Var x) {
  const Tensor& m = g.value(a);
  const Tensor& v = g.value(x);
  if (m.rank() != 2 || v.size() != m.cols()) {
    throw ShapeError("matvec: " + m.shape_string() + " times " + v.shape_string());
  }
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Tensor out({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    const double* mr = m.values().data() + r * cols;
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * v[c];
    out[r] = acc;
  }
  return g.record("matvec", std::move(out), [a, x, rows, cols](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    const Tensor& m = g.value(a);
    const Tensor& v = g.value(x);
    Tensor& gm = g.grad(a);
    for (std::size_t r = 0; r < rows; ++r) {
      const double s = gs[r];
      if (s == 0.0) continue;
      double* gr = gm.values().data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gr[c] += s * v[c];
    }
    Tensor& gv = g.grad(x);
    for (std::size_t r = 0; r < rows; ++r) {
      const double s = gs[r];
      const double* mr = m.values().data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gv[c] += s * mr[c];
    }
  });
}

Var matvec_t(Graph& g, Var a, Var x) {
  const Tensor& m = g.value(a);
  const Tensor& v = g.value(x);
  if (m.rank() != 2 || v.size() != m.rows()) {
    throw ShapeError("matvec_t: " + m.shape_string() + " transposed times " + v.shape_string());
  }
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  Tensor out({cols});
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = v[r];
    const double* mr = m.values().data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += s * mr[c];
  }
  return g.record("matvec_t", std::move(out), [a, x, rows, cols](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    const Tensor& m = g.value(a);
    const Tensor& v = g.value(x);
    Tensor& gm = g.grad(a);
    for (std::size_t r = 0; r < rows; ++r) {
      const double s = v[r];
      double* gr = gm.values().data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) gr[c] += s * gs[c];
    }
    Tensor& gv = g.grad(x);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* mr = m.values().data() + r * cols;
      double acc = 0.0;
      for (std::size_t c = 0; c < cols; ++c) acc += mr[c] * gs[c];
      gv[r] += acc;
    }
  });
}

Var concat(Graph& g, Var a, Var b) {
  const Tensor& x = g.value(a);
  const Tensor& y = g.value(b);
  std::vector<double> joined(x.values().begin(), x.values().end());
  joined.insert(joined.end(), y.values().begin(), y.values().end());
  const std::size_t split = x.size();
  return g.record("concat", Tensor::vector(std::move(joined)), [a, b, split](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < split; ++i) ga[i] += gs[i];
    Tensor& gb = g.grad(b);
    for (std::size_t i = split; i < gs.size(); ++i) gb[i - split] += gs[i];
  });
}

Var softmax(Graph& g, Var logits, std::size_t valid) {
  const Tensor& z = g.value(logits);
  if (z.empty()) throw std::invalid_argument("softmax of empty vector");
  valid = std::min(valid, z.size());
  if (valid == 0) throw std::invalid_argument("softmax with no valid positions");
  Tensor out({z.size()});
  softmax_into(z.values().first(valid), out.values().first(valid));
  return g.record("softmax", std::move(out), [logits, valid](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    const Tensor& y = g.value(self);
    double dot = 0.0;
    for (std::size_t i = 0; i < valid; ++i) dot += gs[i] * y[i];
    Tensor& gz = g.grad(logits);
    for (std::size_t i = 0; i < valid; ++i) gz[i] += y[i] * (gs[i] - dot);
  });
}

Var cross_entropy(Graph& g, Var probs, std::size_t target) {
  const Tensor& p = g.value(probs);
  const double loss = m2s::cross_entropy(p.values(), target);
  return g.record("cross_entropy", Tensor::vector({loss}), [probs, target](Graph& g, Var self) {
    const double gs = g.grad(self)[0];
    const double pt = g.value(probs)[target];
    if (pt <= kProbabilityFloor) return;
    g.grad(probs)[target] -= gs / pt;
  });
}

Var sum_embeddings(Graph& g, Var table, std::vector<std::size_t> ids) {
  const Tensor& t = g.value(table);
  std::vector<double> out = m2s::sum_embeddings(ids, t);
  return g.record("sum_embeddings", Tensor::vector(std::move(out)),
                  [table, ids = std::move(ids)](Graph& g, Var self) {
                    const Tensor& gs = g.grad(self);
                    Tensor& gt = g.grad(table);
                    for (std::size_t id : ids) {
                      auto row = gt.row(id);
                      for (std::size_t j = 0; j < row.size(); ++j) row[j] += gs[j];
                    }
                  });
}

Var embed_cells(Graph& g, Var table, std::vector<std::vector<std::size_t>> cells) {
  const Tensor& t = g.value(table);
  if (cells.empty()) throw std::invalid_argument("embed_cells of empty memory");
  const std::size_t d = t.cols();
  Tensor out({cells.size(), d});
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].empty()) throw std::invalid_argument("memory cell without symbols");
    auto dst = out.row(i);
    for (std::size_t id : cells[i]) {
      check_index(id, t.rows(), "embed_cells");
      auto row = t.row(id);
      for (std::size_t j = 0; j < d; ++j) dst[j] += row[j];
    }
  }
  return g.record("embed_cells", std::move(out),
                  [table, cells = std::move(cells)](Graph& g, Var self) {
                    const Tensor& gs = g.grad(self);
                    Tensor& gt = g.grad(table);
                    for (std::size_t i = 0; i < cells.size(); ++i) {
                      auto src = gs.row(i);
                      for (std::size_t id : cells[i]) {
                        auto row = gt.row(id);
                        for (std::size_t j = 0; j < row.size(); ++j) row[j] += src[j];
                      }
                    }
                  });
}

Var mean(Graph& g, std::span<const Var> scalars) {
  if (scalars.empty()) throw std::invalid_argument("mean of no terms");
  double total = 0.0;
  for (Var s : scalars) total += g.value(s)[0];
  const double inv = 1.0 / static_cast<double>(scalars.size());
  std::vector<Var> terms(scalars.begin(), scalars.end());
  return g.record("mean", Tensor::vector({total * inv}),
                  [terms = std::move(terms), inv](Graph& g, Var self) {
                    const double gs = g.grad(self)[0];
                    for (Var s : terms) g.grad(s)[0] += gs * inv;
                  });
}

Var mul_const(Graph& g, Var a, Tensor mask) {
  Tensor out = g.value(a);
  require_same_shape(out, mask, "mul_const");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return g.record("mul_const", std::move(out), [a, mask = std::move(mask)](Graph& g, Var self) {
    const Tensor& gs = g.grad(self);
    Tensor& ga = g.grad(a);
    for (std::size_t i = 0; i < gs.size(); ++i) ga[i] += gs[i] * mask[i];
  });
}

}  // namespace ops
}  // namespace m2s
