#pragma once

// Straight-line reference evaluations used as test oracles. They share no
// code with the library beyond the parameter containers they read.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mem2seq/decoder.hpp"
#include "mem2seq/encoder.hpp"
#include "mem2seq/gru.hpp"

namespace m2s::oracle {

using Vec = std::vector<double>;

inline Vec softmax(const Vec& z, std::size_t valid = static_cast<std::size_t>(-1)) {
  const std::size_t n = std::min(valid, z.size());
  Vec out(z.size(), 0.0);
  long double total = 0;
  std::vector<long double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = expl(static_cast<long double>(z[i]));
    total += e[i];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(e[i] / total);
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Vec row_sum(const Tensor& table, const std::vector<std::size_t>& ids) {
  Vec out(table.cols(), 0.0);
  for (std::size_t id : ids) {
    for (std::size_t c = 0; c < table.cols(); ++c) out[c] += table.at(id, c);
  }
  return out;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline Vec gru(const Vec& x, const Vec& h, const GruParams& p) {
  const std::size_t d = h.size();
  auto lin = [&](const Parameter* w, const Parameter* u, const Parameter* b, const Vec& hin, std::size_t i) {
    double acc = b->value[i];
    for (std::size_t j = 0; j < x.size(); ++j) acc += w->value.at(i, j) * x[j];
    for (std::size_t j = 0; j < d; ++j) acc += u->value.at(i, j) * hin[j];
    return acc;
  };
  Vec z(d), r(d), rh(d), out(d);
  for (std::size_t i = 0; i < d; ++i) {
    z[i] = sigmoid(lin(p.w_z, p.u_z, p.b_z, h, i));
    r[i] = sigmoid(lin(p.w_r, p.u_r, p.b_r, h, i));
    rh[i] = r[i] * h[i];
  }
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = (1.0 - z[i]) * h[i] + z[i] * std::tanh(lin(p.w_h, p.u_h, p.b_h, rh, i));
  }
  return out;
}

struct HopTrace {
  std::vector<Vec> attention;
  Vec first_readout;
  Vec last_readout;
};

/// Attention hops over memory cells starting from query q, reading with
/// matrices[k] and writing with matrices[k+1].
inline HopTrace hops(const std::vector<const Tensor*>& matrices, const MemorySequence& memory, Vec q) {
  HopTrace trace;
  const std::size_t valid = memory.valid_length();
  for (std::size_t k = 0; k + 1 < matrices.size(); ++k) {
    Vec logits(memory.size(), 0.0);
    for (std::size_t i = 0; i < memory.size(); ++i) logits[i] = dot(q, row_sum(*matrices[k], memory.cells[i].symbols));
    Vec p = softmax(logits, valid);
    Vec o(q.size(), 0.0);
    for (std::size_t i = 0; i < memory.size(); ++i) {
      Vec c = row_sum(*matrices[k + 1], memory.cells[i].symbols);
      for (std::size_t j = 0; j < o.size(); ++j) o[j] += p[i] * c[j];
    }
    if (k == 0) trace.first_readout = o;
    trace.last_readout = o;
    for (std::size_t j = 0; j < q.size(); ++j) q[j] += o[j];
    trace.attention.push_back(p);
  }
  return trace;
}

inline std::vector<const Tensor*> bank_values(const EmbeddingBank& bank) {
  std::vector<const Tensor*> out;
  for (const Parameter* p : bank.matrices) out.push_back(&p->value);
  return out;
}

struct EncoderOut {
  Vec output;
  std::vector<Vec> attention;
};

inline EncoderOut encode(const MemorySequence& memory, const EncoderParams& params) {
  const Tensor& q = params.query->value;
  HopTrace t = hops(bank_values(params.bank), memory, Vec(q.values().begin(), q.values().end()));
  return {t.last_readout, t.attention};
}

struct StepOut {
  Vec h;
  Vec p_vocab;
  Vec p_ptr;
};

inline StepOut decode_step(std::size_t prev, const Vec& h_prev, const MemorySequence& memory,
                           const DecoderParams& params) {
  StepOut out;
  const Tensor& c1 = params.bank.matrices.front()->value;
  out.h = gru(row_sum(c1, {prev}), h_prev, params.gru);
  HopTrace t = hops(bank_values(params.bank), memory, out.h);
  out.p_ptr = t.attention.back();
  Vec features = out.h;
  features.insert(features.end(), t.first_readout.begin(), t.first_readout.end());
  const Tensor& w1 = params.w1->value;
  Vec logits(w1.rows(), 0.0);
  for (std::size_t r = 0; r < w1.rows(); ++r) {
    for (std::size_t c = 0; c < w1.cols(); ++c) logits[r] += w1.at(r, c) * features[c];
  }
  out.p_vocab = softmax(logits);
  return out;
}

/// Teacher-forced mean of per-step cross-entropies.
inline double sequence_loss(const Example& ex, const EncoderParams& enc, const DecoderParams& dec) {
  Vec h = oracle::encode(ex.memory, enc).output;
  std::size_t prev = Vocab::kSos;
  double total = 0.0;
  std::size_t steps = 0;
  for (std::size_t t = 0; t < ex.targets.size(); ++t) {
    if (ex.targets[t] == Vocab::kPad) break;
    StepOut s = decode_step(prev, h, ex.memory, dec);
    total += -std::log(s.p_vocab[ex.targets[t]]) - std::log(s.p_ptr[ex.pointers[t]]);
    ++steps;
    h = s.h;
    prev = ex.targets[t];
  }
  return total / static_cast<double>(steps);
}

struct EigenPairs {
  Vec values;
  /// vectors[k] belongs to values[k].
  std::vector<Vec> vectors;
};

/// Cyclic Jacobi rotations on a symmetric matrix until the off-diagonal
/// mass is below 1e-22; pairs are sorted by descending eigenvalue.
inline EigenPairs jacobi_eigen(std::vector<Vec> a) {
  const std::size_t n = a.size();
  std::vector<Vec> v(n, Vec(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    }
    if (off < 1e-22) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p];
          const double vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (std::size_t k : order) {
    out.values.push_back(a[k][k]);
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v[i][k];
    out.vectors.push_back(col);
  }
  return out;
}

}  // namespace m2s::oracle
