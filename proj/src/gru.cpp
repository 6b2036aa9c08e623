#include "mem2seq/gru.hpp"

#include <cmath>

#include "mem2seq/init.hpp"
#include "mem2seq/ops.hpp"

namespace m2s {

GruParams GruParams::create(ParameterStore& store, const std::string& prefix, std::size_t input_dim,
                            std::size_t hidden_dim, Rng& rng) {
  const std::size_t fan_in = hidden_dim;
  for (const char* gate : {"z", "r", "h"}) {
    store.add(prefix + ".W_" + gate, uniform_init({hidden_dim, input_dim}, fan_in, rng));
    store.add(prefix + ".U_" + gate, uniform_init({hidden_dim, hidden_dim}, fan_in, rng));
    store.add(prefix + ".b_" + gate, uniform_init({hidden_dim}, fan_in, rng));
  }
  return bind(store, prefix);
}

GruParams GruParams::bind(ParameterStore& store, const std::string& prefix) {
  GruParams p;
  p.w_z = &store.get(prefix + ".W_z");
  p.u_z = &store.get(prefix + ".U_z");
  p.b_z = &store.get(prefix + ".b_z");
  p.w_r = &store.get(prefix + ".W_r");
  p.u_r = &store.get(prefix + ".U_r");
  p.b_r = &store.get(prefix + ".b_r");
  p.w_h = &store.get(prefix + ".W_h");
  p.u_h = &store.get(prefix + ".U_h");
  p.b_h = &store.get(prefix + ".b_h");
  return p;
}

Var gru_cell(Graph& g, Var x, Var h_prev, const GruParams& p) {
  if (g.value(x).size() != p.input_dim() || g.value(h_prev).size() != p.hidden_dim()) {
    throw ShapeError("gru_cell: input " + g.value(x).shape_string() + ", state " +
                     g.value(h_prev).shape_string() + " do not match parameters");
  }
  auto affine = [&](Parameter* w, Parameter* u, Parameter* b, Var input, Var state) {
    Var wx = ops::matvec(g, g.param(*w), input);
    Var uh = ops::matvec(g, g.param(*u), state);
    return ops::add(g, ops::add(g, wx, uh), g.param(*b));
  };
  Var z = ops::sigmoid(g, affine(p.w_z, p.u_z, p.b_z, x, h_prev));
  Var r = ops::sigmoid(g, affine(p.w_r, p.u_r, p.b_r, x, h_prev));
  Var candidate = ops::tanh(g, affine(p.w_h, p.u_h, p.b_h, x, ops::mul(g, r, h_prev)));
  return ops::add(g, ops::mul(g, ops::one_minus(g, z), h_prev), ops::mul(g, z, candidate));
}

}  // namespace m2s
