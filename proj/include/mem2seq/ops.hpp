#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "mem2seq/graph.hpp"
#include "mem2seq/rng.hpp"
#include "mem2seq/tensor.hpp"

namespace m2s {

/// Lower bound applied to the target probability inside cross_entropy.
inline constexpr double kProbabilityFloor = 1e-12;

/// Max-subtracted softmax. Throws on empty or non-finite input.
std::vector<double> softmax(std::span<const double> logits);

/// -ln(max(dist[target], kProbabilityFloor)).
double cross_entropy(std::span<const double> dist, std::size_t target);

/// Row-sum of the selected embedding rows.
std::vector<double> sum_embeddings(std::span<const std::size_t> ids, const Tensor& table);

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// 1/(1-rate).
Tensor dropout_mask(std::size_t n, double rate, Rng& rng);

/// Lowest index of the maximum entry.
std::size_t argmax(std::span<const double> values);

/// Differentiable operations recorded on a Graph. Vectors are rank-1
/// tensors, matrices rank-2.
namespace ops {

inline constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

Var add(Graph& g, Var a, Var b);
Var sub(Graph& g, Var a, Var b);
Var mul(Graph& g, Var a, Var b);
Var scale(Graph& g, Var a, double factor);
/// 1 - a, elementwise.
Var one_minus(Graph& g, Var a);
Var sigmoid(Graph& g, Var a);
Var tanh(Graph& g, Var a);

/// A[m×n] · x[n] -> [m].
Var matvec(Graph& g, Var a, Var x);
/// A[m×n]ᵀ · x[m] -> [n].
Var matvec_t(Graph& g, Var a, Var x);

Var concat(Graph& g, Var a, Var b);

/// Softmax over the first `valid` entries; the remainder receive exactly
/// zero probability (an implicit -inf logit).
Var softmax(Graph& g, Var logits, std::size_t valid = kAll);
Var cross_entropy(Graph& g, Var probs, std::size_t target);

/// Sum of table rows `ids` as a [d] vector.
Var sum_embeddings(Graph& g, Var table, std::vector<std::size_t> ids);
/// One summed embedding per cell, stacked into a [cells×d] matrix.
Var embed_cells(Graph& g, Var table, std::vector<std::vector<std::size_t>> cells);

/// Arithmetic mean of scalar nodes.
Var mean(Graph& g, std::span<const Var> scalars);
/// Elementwise product with a constant tensor (dropout masks).
Var mul_const(Graph& g, Var a, Tensor mask);

}  // namespace ops
}  // namespace m2s
