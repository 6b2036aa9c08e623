#include "mem2seq/graph.hpp"

#include <stdexcept>

namespace m2s {

Parameter& ParameterStore::add(std::string name, Tensor init) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_.emplace(name, params_.size());
  Tensor grad = Tensor::zeros_like(init);
  params_.push_back(Parameter{std::move(name), std::move(init), std::move(grad)});
  return params_.back();
}

Parameter& ParameterStore::get(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + std::string(name));
  return params_[it->second];
}

const Parameter& ParameterStore::get(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + std::string(name));
  return params_[it->second];
}

bool ParameterStore::contains(std::string_view name) const { return index_.find(name) != index_.end(); }

void ParameterStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

Var Graph::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, {}});
  return Var{nodes_.size() - 1};
}

Var Graph::param(Parameter& p) {
  nodes_.push_back(Node{{}, {}, &p, {}});
  return Var{nodes_.size() - 1};
}

Var Graph::record(const char* op, Tensor value, BackwardFn backward) {
  if (!value.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
  if (!tracking()) backward = nullptr;
  nodes_.push_back(Node{std::move(value), {}, nullptr, std::move(backward)});
  return Var{nodes_.size() - 1};
}

Tensor& Graph::grad(Var v) {
  if (!tracking()) throw std::logic_error("gradients requested from an inference graph");
  Node& node = nodes_.at(v.id);
  if (node.param) return node.param->grad;
  if (node.grad.empty()) node.grad = Tensor::zeros_like(node.value);
  return node.grad;
}

bool Graph::has_grad(Var v) const {
  const Node& node = nodes_.at(v.id);
  return node.param ? true : !node.grad.empty();
}

void Graph::backward(Var loss) {
  if (value(loss).size() != 1) throw ShapeError("backward requires a scalar loss");
  grad(loss)[0] += 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.backward || node.grad.empty()) continue;
    node.backward(*this, Var{i});
  }
}

}  // namespace m2s
