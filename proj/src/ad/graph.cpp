#include "realign/ad/graph.hpp"

#include <algorithm>
#include <cmath>

#include "realign/core/error.hpp"

namespace realign::ad {

const Mat& Value::val() const { return graph_->value_of(index_); }
const Mat& Value::grad() const { return graph_->grad_of(index_); }
double Value::scalar() const {
  const Mat& m = val();
  if (m.rows() != 1 || m.cols() != 1) throw NumericError("scalar() on non-1x1 value");
  return m(0, 0);
}
Eigen::Index Value::rows() const { return val().rows(); }
Eigen::Index Value::cols() const { return val().cols(); }

Value Graph::push(Mat v, bool needs_grad, std::function<void(Graph&, const Mat&)> back) {
  Node n;
  n.value = std::move(v);
  n.needs_grad = needs_grad;
  n.backprop = std::move(back);
  nodes_.push_back(std::move(n));
  return Value(this, nodes_.size() - 1);
}

void Graph::accumulate(std::size_t idx, const Mat& g) {
  Node& n = nodes_[idx];
  if (!n.needs_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Value Graph::constant(Mat v) { return push(std::move(v), false, nullptr); }

Value Graph::scalar_constant(double v) {
  Mat m(1, 1);
  m(0, 0) = v;
  return constant(std::move(m));
}

Value Graph::leaf(Mat v) { return push(std::move(v), true, nullptr); }

Value Graph::add(Value a, Value b) {
  if (a.val().rows() != b.val().rows() || a.val().cols() != b.val().cols())
    throw NumericError("add: shape mismatch");
  std::size_t ia = a.index_, ib = b.index_;
  bool ng = tracked(a) || tracked(b);
  return push(a.val() + b.val(), ng, [ia, ib](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr);
    g.accumulate(ib, gr);
  });
}

Value Graph::sub(Value a, Value b) {
  if (a.val().rows() != b.val().rows() || a.val().cols() != b.val().cols())
    throw NumericError("sub: shape mismatch");
  std::size_t ia = a.index_, ib = b.index_;
  bool ng = tracked(a) || tracked(b);
  return push(a.val() - b.val(), ng, [ia, ib](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr);
    g.accumulate(ib, Mat(-gr));
  });
}

Value Graph::hadamard(Value a, Value b) {
  if (a.val().rows() != b.val().rows() || a.val().cols() != b.val().cols())
    throw NumericError("hadamard: shape mismatch");
  std::size_t ia = a.index_, ib = b.index_;
  bool ng = tracked(a) || tracked(b);
  return push(a.val().cwiseProduct(b.val()), ng, [ia, ib](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr.cwiseProduct(g.nodes_[ib].value));
    g.accumulate(ib, gr.cwiseProduct(g.nodes_[ia].value));
  });
}

Value Graph::scale(Value a, double c) {
  std::size_t ia = a.index_;
  return push(a.val() * c, tracked(a), [ia, c](Graph& g, const Mat& gr) {
    g.accumulate(ia, Mat(gr * c));
  });
}

Value Graph::add_scalar(Value a, double c) {
  std::size_t ia = a.index_;
  Mat out = (a.val().array() + c).matrix();
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr);
  });
}

Value Graph::sigmoid(Value a) {
  Mat out = a.val().unaryExpr([](double x) {
    // numerically symmetric logistic
    if (x >= 0) {
      double e = std::exp(-x);
      return 1.0 / (1.0 + e);
    }
    double e = std::exp(x);
    return e / (1.0 + e);
  });
  std::size_t ia = a.index_, io = nodes_.size();
  return push(std::move(out), tracked(a), [ia, io](Graph& g, const Mat& gr) {
    const Mat& s = g.nodes_[io].value;
    g.accumulate(ia, gr.cwiseProduct(s.cwiseProduct(Mat(Mat::Ones(s.rows(), s.cols()) - s))));
  });
}

Value Graph::tanh(Value a) {
  Mat out = a.val().array().tanh().matrix();
  std::size_t ia = a.index_, io = nodes_.size();
  return push(std::move(out), tracked(a), [ia, io](Graph& g, const Mat& gr) {
    const Mat& t = g.nodes_[io].value;
    g.accumulate(ia, gr.cwiseProduct(Mat(Mat::Ones(t.rows(), t.cols()) - t.cwiseProduct(t))));
  });
}

Value Graph::relu(Value a) {
  Mat out = a.val().cwiseMax(0.0);
  std::size_t ia = a.index_;
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    const Mat& x = g.nodes_[ia].value;
    g.accumulate(ia, gr.cwiseProduct(Mat((x.array() > 0.0).cast<double>().matrix())));
  });
}

Value Graph::log(Value a) {
  Mat out = a.val().array().log().matrix();
  std::size_t ia = a.index_;
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr.cwiseQuotient(g.nodes_[ia].value));
  });
}

Value Graph::exp(Value a) {
  Mat out = a.val().array().exp().matrix();
  std::size_t ia = a.index_, io = nodes_.size();
  return push(std::move(out), tracked(a), [ia, io](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr.cwiseProduct(g.nodes_[io].value));
  });
}

Value Graph::sqrt(Value a) {
  Mat out = a.val().array().sqrt().matrix();
  std::size_t ia = a.index_, io = nodes_.size();
  return push(std::move(out), tracked(a), [ia, io](Graph& g, const Mat& gr) {
    g.accumulate(ia, Mat((gr.array() / (2.0 * g.nodes_[io].value.array())).matrix()));
  });
}

Value Graph::softplus(Value a) {
  Mat out = a.val().unaryExpr([](double x) {
    // log(1 + e^x) without overflow
    return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  });
  std::size_t ia = a.index_;
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    Mat s = g.nodes_[ia].value.unaryExpr([](double x) {
      if (x >= 0) {
        double e = std::exp(-x);
        return 1.0 / (1.0 + e);
      }
      double e = std::exp(x);
      return e / (1.0 + e);
    });
    g.accumulate(ia, gr.cwiseProduct(s));
  });
}

Value Graph::abs(Value a) {
  Mat out = a.val().cwiseAbs();
  std::size_t ia = a.index_;
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    Mat sign = g.nodes_[ia].value.unaryExpr([](double x) {
      return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
    });
    g.accumulate(ia, gr.cwiseProduct(sign));
  });
}

Value Graph::clamp(Value a, double lo, double hi) {
  Mat out = a.val().cwiseMax(lo).cwiseMin(hi);
  std::size_t ia = a.index_;
  return push(std::move(out), tracked(a), [ia, lo, hi](Graph& g, const Mat& gr) {
    const Mat& x = g.nodes_[ia].value;
    Mat mask = x.unaryExpr([lo, hi](double v) { return (v > lo && v < hi) ? 1.0 : 0.0; });
    g.accumulate(ia, gr.cwiseProduct(mask));
  });
}

Value Graph::matmul(Value a, Value b) {
  if (a.val().cols() != b.val().rows()) throw NumericError("matmul: shape mismatch");
  std::size_t ia = a.index_, ib = b.index_;
  bool ng = tracked(a) || tracked(b);
  return push(a.val() * b.val(), ng, [ia, ib](Graph& g, const Mat& gr) {
    g.accumulate(ia, Mat(gr * g.nodes_[ib].value.transpose()));
    g.accumulate(ib, Mat(g.nodes_[ia].value.transpose() * gr));
  });
}

Value Graph::transpose(Value a) {
  std::size_t ia = a.index_;
  return push(a.val().transpose(), tracked(a), [ia](Graph& g, const Mat& gr) {
    g.accumulate(ia, gr.transpose());
  });
}

Value Graph::dot(Value a, Value b) {
  if (a.val().size() != b.val().size()) throw NumericError("dot: size mismatch");
  std::size_t ia = a.index_, ib = b.index_;
  bool ng = tracked(a) || tracked(b);
  Mat out(1, 1);
  out(0, 0) = (a.val().array() * b.val().array()).sum();
  return push(std::move(out), ng, [ia, ib](Graph& g, const Mat& gr) {
    double s = gr(0, 0);
    g.accumulate(ia, Mat(g.nodes_[ib].value * s));
    g.accumulate(ib, Mat(g.nodes_[ia].value * s));
  });
}

Value Graph::sum(Value a) {
  std::size_t ia = a.index_;
  Mat out(1, 1);
  out(0, 0) = a.val().sum();
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    const Mat& x = g.nodes_[ia].value;
    g.accumulate(ia, Mat(Mat::Constant(x.rows(), x.cols(), gr(0, 0))));
  });
}

Value Graph::sqnorm(Value a) {
  std::size_t ia = a.index_;
  Mat out(1, 1);
  out(0, 0) = a.val().squaredNorm();
  return push(std::move(out), tracked(a), [ia](Graph& g, const Mat& gr) {
    g.accumulate(ia, Mat(2.0 * gr(0, 0) * g.nodes_[ia].value));
  });
}

Value Graph::concat_rows(Value a, Value b) {
  if (a.val().cols() != b.val().cols()) throw NumericError("concat_rows: column mismatch");
  Mat out(a.val().rows() + b.val().rows(), a.val().cols());
  out << a.val(), b.val();
  std::size_t ia = a.index_, ib = b.index_;
  Eigen::Index ra = a.val().rows();
  bool ng = tracked(a) || tracked(b);
  return push(std::move(out), ng, [ia, ib, ra](Graph& g, const Mat& gr) {
    g.accumulate(ia, Mat(gr.topRows(ra)));
    g.accumulate(ib, Mat(gr.bottomRows(gr.rows() - ra)));
  });
}

Value Graph::column(Value a, Eigen::Index j) {
  std::size_t ia = a.index_;
  return push(a.val().col(j), tracked(a), [ia, j](Graph& g, const Mat& gr) {
    const Mat& x = g.nodes_[ia].value;
    Mat full = Mat::Zero(x.rows(), x.cols());
    full.col(j) = gr;
    g.accumulate(ia, full);
  });
}

Value Graph::entry(Value a, Eigen::Index i, Eigen::Index j) {
  std::size_t ia = a.index_;
  Mat out(1, 1);
  out(0, 0) = a.val()(i, j);
  return push(std::move(out), tracked(a), [ia, i, j](Graph& g, const Mat& gr) {
    const Mat& x = g.nodes_[ia].value;
    Mat full = Mat::Zero(x.rows(), x.cols());
    full(i, j) = gr(0, 0);
    g.accumulate(ia, full);
  });
}

Value Graph::concat_cols(std::span<const Value> cols) {
  if (cols.empty()) throw NumericError("concat_cols: empty input");
  Eigen::Index r = cols[0].val().rows();
  Mat out(r, static_cast<Eigen::Index>(cols.size()));
  bool ng = false;
  std::vector<std::size_t> idx(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].val().rows() != r || cols[j].val().cols() != 1)
      throw NumericError("concat_cols: inputs must be column vectors of equal length");
    out.col(static_cast<Eigen::Index>(j)) = cols[j].val();
    idx[j] = cols[j].index_;
    ng = ng || tracked(cols[j]);
  }
  return push(std::move(out), ng, [idx](Graph& g, const Mat& gr) {
    for (std::size_t j = 0; j < idx.size(); ++j)
      g.accumulate(idx[j], Mat(gr.col(static_cast<Eigen::Index>(j))));
  });
}

Value Graph::smul(Value s, Value a) {
  if (s.val().rows() != 1 || s.val().cols() != 1) throw NumericError("smul: scalar must be 1x1");
  std::size_t is = s.index_, ia = a.index_;
  bool ng = tracked(s) || tracked(a);
  return push(a.val() * s.val()(0, 0), ng, [is, ia](Graph& g, const Mat& gr) {
    Mat gs(1, 1);
    gs(0, 0) = (gr.array() * g.nodes_[ia].value.array()).sum();
    g.accumulate(is, gs);
    g.accumulate(ia, Mat(gr * g.nodes_[is].value(0, 0)));
  });
}

Value Graph::sdiv(Value a, Value b) {
  if (a.val().size() != 1 || b.val().size() != 1) throw NumericError("sdiv: 1x1 operands required");
  std::size_t ia = a.index_, ib = b.index_;
  bool ng = tracked(a) || tracked(b);
  Mat out(1, 1);
  out(0, 0) = a.val()(0, 0) / b.val()(0, 0);
  return push(std::move(out), ng, [ia, ib](Graph& g, const Mat& gr) {
    double av = g.nodes_[ia].value(0, 0), bv = g.nodes_[ib].value(0, 0);
    Mat ga(1, 1), gb(1, 1);
    ga(0, 0) = gr(0, 0) / bv;
    gb(0, 0) = -gr(0, 0) * av / (bv * bv);
    g.accumulate(ia, ga);
    g.accumulate(ib, gb);
  });
}

Value Graph::vmin(Value a, Value b) {
  if (a.val().size() != 1 || b.val().size() != 1) throw NumericError("vmin: 1x1 operands required");
  bool take_a = a.val()(0, 0) <= b.val()(0, 0);
  std::size_t chosen = take_a ? a.index_ : b.index_;
  Mat out = take_a ? a.val() : b.val();
  bool ng = tracked(a) || tracked(b);
  return push(std::move(out), ng, [chosen](Graph& g, const Mat& gr) {
    g.accumulate(chosen, gr);
  });
}

Value Graph::vmax(Value a, Value b) {
  if (a.val().size() != 1 || b.val().size() != 1) throw NumericError("vmax: 1x1 operands required");
  bool take_a = a.val()(0, 0) >= b.val()(0, 0);
  std::size_t chosen = take_a ? a.index_ : b.index_;
  Mat out = take_a ? a.val() : b.val();
  bool ng = tracked(a) || tracked(b);
  return push(std::move(out), ng, [chosen](Graph& g, const Mat& gr) {
    g.accumulate(chosen, gr);
  });
}

Value Graph::mean(std::span<const Value> items) {
  if (items.empty()) throw NumericError("mean: empty input");
  Value acc = items[0];
  for (std::size_t i = 1; i < items.size(); ++i) acc = add(acc, items[i]);
  return scale(acc, 1.0 / static_cast<double>(items.size()));
}

Value Graph::median(std::span<const Value> items) {
  if (items.empty()) throw NumericError("median: empty input");
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return items[l].val()(0, 0) < items[r].val()(0, 0);
  });
  std::size_t n = items.size();
  if (n % 2 == 1) return items[order[n / 2]];
  Value lo = items[order[n / 2 - 1]];
  Value hi = items[order[n / 2]];
  return scale(add(lo, hi), 0.5);
}

void Graph::backward(Value root) {
  Node& r = node(root);
  if (r.value.rows() != 1 || r.value.cols() != 1)
    throw NumericError("backward: root must be 1x1");
  if (!r.needs_grad) return;
  r.grad = Mat::Ones(1, 1);
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0 || !n.backprop) continue;
    n.backprop(*this, n.grad);
  }
}

}  // namespace realign::ad
