#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mem2seq/tensor.hpp"

namespace m2s {

/// A named trainable tensor together with its gradient accumulator.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Ordered registry of parameters. Element addresses are stable under add().
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor init);
  Parameter& get(std::string_view name);
  const Parameter& get(std::string_view name) const;
  bool contains(std::string_view name) const;

  void zero_grad();
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::deque<Parameter> params_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

/// Handle to a node in a Graph.
struct Var {
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
  std::size_t id = npos;
  bool valid() const { return id != npos; }
};

/// Tape for reverse-mode differentiation. Nodes are appended in evaluation
/// order, so walking the tape backwards is a reverse topological order and
/// each node's backward rule runs exactly once.
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, Var self)>;

  enum class Mode {
    Train,
    /// Forward only: backward rules are dropped and parameter gradients are
    /// never touched, so parameters may be shared read-only across threads.
    Inference,
  };

  explicit Graph(Mode mode = Mode::Train) : mode_(mode) {}
  bool tracking() const { return mode_ == Mode::Train; }

  Var constant(Tensor value);
  /// Leaf bound to a parameter; gradients accumulate into Parameter::grad.
  Var param(Parameter& p);

  /// Appends a computed node. Throws NumericError if `value` is not finite.
  Var record(const char* op, Tensor value, BackwardFn backward);

  const Tensor& value(Var v) const {
    const Node& node = nodes_.at(v.id);
    return node.param ? node.param->value : node.value;
  }
  /// Gradient buffer of a node, allocated as zeros on first access.
  Tensor& grad(Var v);
  bool has_grad(Var v) const;

  /// Seeds d(loss)/d(loss) = 1 and propagates to every reachable node.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  Mode mode_;
  std::vector<Node> nodes_;
};

}  // namespace m2s
