#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "realign/ad/graph.hpp"
#include "realign/core/rng.hpp"

using realign::ad::Graph;
using realign::ad::Mat;
using realign::ad::Value;

namespace {

Mat random_mat(realign::RngStream& rng, int r, int c) {
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rng.next_normal() * 0.7;
  return m;
}

// Central finite-difference check of d(scalar expr)/d(leaf) against the
// tape gradient, for an arbitrary expression builder.
void check_gradient(const std::vector<Mat>& leaves,
                    const std::function<Value(Graph&, std::vector<Value>&)>& build,
                    double tol = 1e-6) {
  Graph g;
  std::vector<Value> vals;
  vals.reserve(leaves.size());
  for (const Mat& m : leaves) vals.push_back(g.leaf(m));
  Value out = build(g, vals);
  g.backward(out);

  const double step = 1e-6;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    Mat analytic = vals[li].grad().size() ? vals[li].grad()
                                          : Mat::Zero(leaves[li].rows(), leaves[li].cols());
    for (int i = 0; i < leaves[li].rows(); ++i) {
      for (int j = 0; j < leaves[li].cols(); ++j) {
        auto eval = [&](double delta) {
          Graph g2;
          std::vector<Value> vals2;
          for (std::size_t k = 0; k < leaves.size(); ++k) {
            Mat m = leaves[k];
            if (k == li) m(i, j) += delta;
            vals2.push_back(g2.leaf(m));
          }
          return build(g2, vals2).scalar();
        };
        double fd = (eval(step) - eval(-step)) / (2 * step);
        double a = analytic(i, j);
        double denom = std::max({1.0, std::fabs(fd), std::fabs(a)});
        CHECK(std::fabs(fd - a) / denom < tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("ad: elementwise and reduction gradients") {
  realign::RngStream rng(42, "ad-test");
  std::vector<Mat> leaves = {random_mat(rng, 3, 2), random_mat(rng, 3, 2)};
  check_gradient(leaves, [](Graph& g, std::vector<Value>& v) {
    Value a = g.sigmoid(v[0]);
    Value b = g.tanh(v[1]);
    Value c = g.hadamard(a, b);
    Value d = g.add(c, g.scale(v[0], 0.3));
    return g.sum(g.softplus(d));
  });
}

TEST_CASE("ad: matmul / dot / norms") {
  realign::RngStream rng(7, "ad-test");
  std::vector<Mat> leaves = {random_mat(rng, 3, 4), random_mat(rng, 4, 1), random_mat(rng, 3, 1)};
  check_gradient(leaves, [](Graph& g, std::vector<Value>& v) {
    Value h = g.matmul(v[0], v[1]);
    Value d = g.dot(h, v[2]);
    Value n = g.sqnorm(g.sub(h, v[2]));
    return g.add(d, g.sqrt(g.add_scalar(n, 1.0)));
  });
}

TEST_CASE("ad: log/exp/sdiv/smul chain") {
  realign::RngStream rng(3, "ad-test");
  Mat a(2, 1);
  a << 0.4, 1.3;
  Mat b(1, 1);
  b << 0.8;
  check_gradient({a, b}, [](Graph& g, std::vector<Value>& v) {
    Value e = g.exp(g.neg(v[0]));
    Value lg = g.log(g.add_scalar(e, 1.0));
    Value s = g.sdiv(g.sum(lg), v[1]);
    return g.smul(s, v[1]);
  });
}

TEST_CASE("ad: concat, column, entry, transpose") {
  realign::RngStream rng(11, "ad-test");
  std::vector<Mat> leaves = {random_mat(rng, 2, 3), random_mat(rng, 2, 1)};
  check_gradient(leaves, [](Graph& g, std::vector<Value>& v) {
    Value c0 = g.column(v[0], 0);
    Value c2 = g.column(v[0], 2);
    Value cat = g.concat_rows(c0, v[1]);
    Value t = g.transpose(cat);
    Value e = g.entry(v[0], 1, 1);
    std::vector<Value> cols = {c0, c2, v[1]};
    Value m = g.concat_cols(cols);
    return g.add(g.sum(g.matmul(t, cat)), g.add(e, g.sqnorm(m)));
  });
}

TEST_CASE("ad: min/max/median/mean/abs/clamp") {
  Mat a(1, 1), b(1, 1), c(1, 1), d(2, 1);
  a << 0.9;
  b << 0.3;
  c << 1.7;
  d << -0.25, 0.6;
  check_gradient({a, b, c, d}, [](Graph& g, std::vector<Value>& v) {
    std::vector<Value> xs = {v[0], v[1], v[2]};
    Value med = g.median(xs);                       // odd count: picks v[0]
    std::vector<Value> xs4 = {v[0], v[1], v[2], g.sum(v[3])};
    Value med4 = g.median(xs4);                     // even count: averages middles
    Value mn = g.vmin(v[0], v[1]);
    Value mx = g.vmax(v[0], v[2]);
    Value ab = g.sum(g.abs(v[3]));
    Value cl = g.sum(g.clamp(v[3], -0.2, 1.0));     // lower clamp active on d(0)
    std::vector<Value> items = {med, med4, mn, mx, ab, cl};
    return g.mean(items);
  });
}

TEST_CASE("ad: constants block gradients") {
  Graph g;
  Value c = g.constant(Mat::Ones(2, 1));
  Value l = g.leaf(Mat::Ones(2, 1));
  Value out = g.sum(g.hadamard(c, l));
  g.backward(out);
  CHECK(l.grad()(0, 0) == doctest::Approx(1.0));
  CHECK(out.scalar() == doctest::Approx(2.0));
}

TEST_CASE("ad: median of even list splits gradient") {
  Mat a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << 1.0;
  b << 2.0;
  c << 3.0;
  d << 4.0;
  Graph g;
  std::vector<Value> xs = {g.leaf(a), g.leaf(b), g.leaf(c), g.leaf(d)};
  Value med = g.median(xs);
  CHECK(med.scalar() == doctest::Approx(2.5));
  g.backward(med);
  CHECK(xs[1].grad()(0, 0) == doctest::Approx(0.5));
  CHECK(xs[2].grad()(0, 0) == doctest::Approx(0.5));
  CHECK(xs[0].grad().size() == 0);
}
