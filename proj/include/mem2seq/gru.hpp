#pragma once

#include <cstddef>
#include <string>

#include "mem2seq/graph.hpp"
#include "mem2seq/rng.hpp"

namespace m2s {

/// Views into a ParameterStore for one GRU cell:
///   z  = σ(W_z x + U_z h + b_z)
///   r  = σ(W_r x + U_r h + b_r)
///   h~ = tanh(W_h x + U_h (r ⊙ h) + b_h)
///   h' = (1 - z) ⊙ h + z ⊙ h~
struct GruParams {
  Parameter* w_z = nullptr;
  Parameter* u_z = nullptr;
  Parameter* b_z = nullptr;
  Parameter* w_r = nullptr;
  Parameter* u_r = nullptr;
  Parameter* b_r = nullptr;
  Parameter* w_h = nullptr;
  Parameter* u_h = nullptr;
  Parameter* b_h = nullptr;

  std::size_t input_dim() const { return w_z->value.cols(); }
  std::size_t hidden_dim() const { return u_z->value.rows(); }

  /// Registers `<prefix>.W_z` ... `<prefix>.b_h` in `store`, initialised
  /// uniformly in (-1/sqrt(hidden), 1/sqrt(hidden)).
  static GruParams create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                          std::size_t hidden_dim, Rng& rng);
  static GruParams bind(ParameterStore& store, const std::string& prefix);
};

Var gru_cell(Graph& g, Var x, Var h_prev, const GruParams& params);

}  // namespace m2s
