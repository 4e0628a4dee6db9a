#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace realign::ad {

using Mat = Eigen::MatrixXd;

class Graph;

// Lightweight handle into a Graph's tape.
class Value {
 public:
  Value() = default;

  const Mat& val() const;
  const Mat& grad() const;
  double scalar() const;
  Eigen::Index rows() const;
  Eigen::Index cols() const;
  bool defined() const { return graph_ != nullptr; }

 private:
  friend class Graph;
  Value(Graph* g, std::size_t idx) : graph_(g), index_(idx) {}
  Graph* graph_ = nullptr;
  std::size_t index_ = 0;
};

// Reverse-mode tape over dense matrices. Vectors are column matrices.
// Nodes are appended in construction order, which is a valid topological
// order for the backward sweep. One Graph per forward/backward cycle.
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Value constant(Mat v);
  Value scalar_constant(double v);
  Value leaf(Mat v);  // differentiable input

  // elementwise
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value hadamard(Value a, Value b);
  Value scale(Value a, double c);
  Value neg(Value a) { return scale(a, -1.0); }
  Value add_scalar(Value a, double c);
  Value sigmoid(Value a);
  Value tanh(Value a);
  Value relu(Value a);
  Value log(Value a);
  Value exp(Value a);
  Value sqrt(Value a);
  Value softplus(Value a);
  Value abs(Value a);
  // Identity inside [lo, hi], constant outside (gradient blocked there).
  Value clamp(Value a, double lo, double hi);

  // linear algebra
  Value matmul(Value a, Value b);
  Value transpose(Value a);
  Value dot(Value a, Value b);     // -> 1x1
  Value sum(Value a);              // -> 1x1
  Value sqnorm(Value a);           // -> 1x1
  Value concat_rows(Value a, Value b);
  Value column(Value a, Eigen::Index j);
  Value entry(Value a, Eigen::Index i, Eigen::Index j);  // -> 1x1
  Value concat_cols(std::span<const Value> cols);

  // scalar (1x1) helpers
  Value smul(Value s, Value a);    // broadcast multiply by 1x1 scalar
  Value sdiv(Value a, Value b);    // 1x1 / 1x1
  Value vmin(Value a, Value b);    // 1x1, gradient follows the chosen side
  Value vmax(Value a, Value b);
  Value mean(std::span<const Value> items);
  // Median of a list of 1x1 values; even count averages the two middle
  // elements, so gradient flows into the selected entries only.
  Value median(std::span<const Value> items);

  void backward(Value root);

  std::size_t size() const { return nodes_.size(); }
  const Mat& value_of(std::size_t idx) const { return nodes_[idx].value; }
  const Mat& grad_of(std::size_t idx) const { return nodes_[idx].grad; }

 private:
  friend class Value;

  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    // Adds this node's grad contribution into its parents' grads.
    std::function<void(Graph&, const Mat& g)> backprop;
  };

  Value push(Mat v, bool needs_grad, std::function<void(Graph&, const Mat&)> back);
  Node& node(Value v) { return nodes_[v.index_]; }
  const Node& node(Value v) const { return nodes_[v.index_]; }
  void accumulate(std::size_t idx, const Mat& g);
  bool tracked(Value v) const { return nodes_[v.index_].needs_grad; }

  std::vector<Node> nodes_;
};

}  // namespace realign::ad
