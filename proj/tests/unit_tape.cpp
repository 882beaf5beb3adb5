#include <doctest.h>

#include <cmath>
#include <random>

#include "definf/nn.hpp"
#include "definf/rng.hpp"
#include "definf/tape.hpp"

using namespace definf;

TEST_SUITE("tape") {

TEST_CASE("registry tracks names, order and counts") {
  ParamRegistry reg;
  reg.add("w", Mat::vec({1.0, 2.0}));
  reg.add("b", Mat(2, 3));
  CHECK(reg.contains("w"));
  CHECK(!reg.contains("q"));
  CHECK(reg.scalar_count() == 8);
  CHECK(reg.tensors()[0].name == "w");
  CHECK(reg.tensors()[1].name == "b");
  CHECK_THROWS_AS(reg.add("w", Mat(1, 1)), Error);
  CHECK_THROWS_AS(reg.at("missing"), Error);
}

TEST_CASE("gradient norms and clipping") {
  ParamRegistry reg;
  reg.add("w", Mat::vec({0.0, 0.0}));
  reg.at("w").grad = Mat::vec({3.0, 4.0});
  CHECK(reg.grad_norm() == doctest::Approx(5.0).epsilon(1e-12));
  double post = reg.clip_grad_norm(1.0);
  CHECK(post == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(reg.at("w").grad[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(reg.at("w").grad[1] == doctest::Approx(0.8).epsilon(1e-12));
  // Below the cap, gradients are untouched.
  reg.at("w").grad = Mat::vec({0.3, 0.4});
  CHECK(reg.clip_grad_norm(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(reg.at("w").grad[0] == 0.3);
  reg.zero_grad();
  CHECK(reg.grad_norm() == 0.0);
}

TEST_CASE("forward values of the core ops") {
  Tape t;
  auto x = t.input(Mat::vec({1.0, -2.0}));
  auto y = t.input(Mat::vec({0.5, 3.0}));
  CHECK(t.value(t.add(x, y)).a == std::vector<double>{1.5, 1.0});
  CHECK(t.value(t.scale(x, -2.0)).a == std::vector<double>{-2.0, 4.0});
  CHECK(t.value(t.relu(x)).a == std::vector<double>{1.0, 0.0});

  Mat W(2, 2);
  W(0, 0) = 1.0; W(0, 1) = 2.0; W(1, 0) = 3.0; W(1, 1) = 4.0;
  auto w = t.input(W);
  // [1 2; 3 4] * [1, -2] = [-3, -5]
  CHECK(t.value(t.matvec(w, x)).a == std::vector<double>{-3.0, -5.0});

  CHECK(t.value(t.concat({x, y})).a == std::vector<double>{1.0, -2.0, 0.5, 3.0});
  CHECK(t.value(t.mean({x, y})).a == std::vector<double>{0.75, 0.5});

  auto wts = t.input(Mat::vec({0.25, 0.75}));
  // 0.25*[1,-2] + 0.75*[0.5,3] = [0.625, 1.75]
  CHECK(t.value(t.mix(wts, {x, y})).a == std::vector<double>{0.625, 1.75});

  auto q = t.input(Mat::vec({1.0, 1.0}));
  auto scores = t.dot_scores(q, {x, y}, 0.5);
  // 0.5 * [1-2, 0.5+3] = [-0.5, 1.75]
  CHECK(t.value(scores).a == std::vector<double>{-0.5, 1.75});
}

TEST_CASE("softmax is exact on a solvable case") {
  Tape t;
  auto z = t.input(Mat::vec({0.0, std::log(3.0)}));
  auto p = t.softmax(z);
  CHECK(t.value(p)[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t.value(p)[1] == doctest::Approx(0.75).epsilon(1e-12));

  auto big = t.input(Mat::vec({1000.0, 1000.0 + std::log(3.0)}));
  auto pb = t.softmax(big);  // max subtraction keeps this finite
  CHECK(t.value(pb)[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(t.value(pb)[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("cross entropy and the fused op agree") {
  Tape t;
  auto z = t.input(Mat::vec({0.3, -1.2, 2.0}));
  auto fused = t.softmax_xent(z, 2);
  auto chained = t.cross_entropy(t.softmax(z), 2);
  CHECK(t.value(fused)[0] == doctest::Approx(t.value(chained)[0]).epsilon(1e-12));
  CHECK_THROWS_AS(t.softmax_xent(z, 3), ShapeError);
  CHECK_THROWS_AS(t.cross_entropy(t.softmax(z), -1), ShapeError);
}

TEST_CASE("fused softmax cross entropy backward is p minus onehot") {
  ParamRegistry reg;
  reg.add("z", Mat::vec({0.3, -1.2, 2.0}));
  Tape t;
  auto z = t.param(reg.at("z"));
  auto p = t.softmax(z);
  auto loss = t.softmax_xent(z, 1);
  t.backward(loss);
  const Mat& pv = t.value(p);
  CHECK(reg.at("z").grad[0] == doctest::Approx(pv[0]).epsilon(1e-12));
  CHECK(reg.at("z").grad[1] == doctest::Approx(pv[1] - 1.0).epsilon(1e-12));
  CHECK(reg.at("z").grad[2] == doctest::Approx(pv[2]).epsilon(1e-12));
}

TEST_CASE("matvec backward matches hand derivation") {
  // loss = sum of the components of (W x).
  ParamRegistry reg;
  Mat W(2, 2);
  W(0, 0) = 1.0; W(0, 1) = 2.0; W(1, 0) = 3.0; W(1, 1) = 4.0;
  reg.add("W", W);
  reg.add("x", Mat::vec({5.0, -1.0}));
  Tape t;
  auto y = t.matvec(t.param(reg.at("W")), t.param(reg.at("x")));
  auto one = t.input(Mat::vec({1.0, 1.0}));
  auto s = t.dot_scores(one, {y}, 1.0);
  t.backward(s);
  // d sum(Wx) / dW = [x^T; x^T], d/dx = column sums of W.
  CHECK(reg.at("W").grad(0, 0) == 5.0);
  CHECK(reg.at("W").grad(0, 1) == -1.0);
  CHECK(reg.at("W").grad(1, 0) == 5.0);
  CHECK(reg.at("W").grad(1, 1) == -1.0);
  CHECK(reg.at("x").grad[0] == 4.0);
  CHECK(reg.at("x").grad[1] == 6.0);
}

TEST_CASE("relu derivative is zero at zero") {
  ParamRegistry reg;
  reg.add("x", Mat::vec({0.0, -1.0, 2.0}));
  Tape t;
  auto r = t.relu(t.param(reg.at("x")));
  auto one = t.input(Mat::vec({1.0, 1.0, 1.0}));
  auto s = t.dot_scores(one, {r}, 1.0);
  t.backward(s);
  CHECK(reg.at("x").grad[0] == 0.0);
  CHECK(reg.at("x").grad[1] == 0.0);
  CHECK(reg.at("x").grad[2] == 1.0);
}

TEST_CASE("gradients accumulate across backward calls until zeroed") {
  ParamRegistry reg;
  reg.add("x", Mat::vec({2.0}));
  for (int rep = 0; rep < 2; ++rep) {
    Tape t;
    auto x = t.param(reg.at("x"));
    t.backward(t.scale(x, 3.0));
  }
  CHECK(reg.at("x").grad[0] == 6.0);
  reg.zero_grad();
  CHECK(reg.at("x").grad[0] == 0.0);
}

TEST_CASE("dropout at rate zero is the identity") {
  Tape t;
  auto x = t.input(Mat::vec({1.0, 2.0}));
  std::mt19937_64 g(1);
  CHECK(t.dropout(x, 0.0, g) == x);
}

TEST_CASE("dropout masks and rescales deterministically") {
  std::mt19937_64 g1(42), g2(42);
  Tape t1, t2;
  auto x1 = t1.dropout(t1.input(Mat::vec(std::vector<double>(64, 1.0))), 0.5, g1);
  auto x2 = t2.dropout(t2.input(Mat::vec(std::vector<double>(64, 1.0))), 0.5, g2);
  CHECK(t1.value(x1).a == t2.value(x2).a);
  int kept = 0;
  for (double v : t1.value(x1).a) {
    CHECK((v == 0.0 || v == doctest::Approx(2.0).epsilon(1e-12)));
    if (v != 0.0) ++kept;
  }
  CHECK(kept > 10);
  CHECK(kept < 54);
}

TEST_CASE("backward demands a finite scalar loss") {
  Tape t;
  auto v = t.input(Mat::vec({1.0, 2.0}));
  CHECK_THROWS_AS(t.backward(v), ShapeError);
  Tape t2;
  auto inf = t2.input(Mat::vec({std::numeric_limits<double>::infinity()}));
  CHECK_THROWS_AS(t2.backward(inf), NonFiniteError);
}

TEST_CASE("shape violations are rejected") {
  Tape t;
  auto a = t.input(Mat::vec({1.0, 2.0}));
  auto b = t.input(Mat::vec({1.0, 2.0, 3.0}));
  CHECK_THROWS_AS(t.add(a, b), ShapeError);
  CHECK_THROWS_AS(t.mean({a, b}), ShapeError);
  CHECK_THROWS_AS(t.concat({}), ShapeError);
  CHECK_THROWS_AS(t.mix(a, {a, b, b}), ShapeError);
  Mat W(2, 3);
  auto w = t.input(W);
  CHECK_THROWS_AS(t.matvec(w, a), ShapeError);
}

TEST_CASE("grad_check certifies a small composite network") {
  std::mt19937_64 g(7);
  ParamRegistry reg;
  Mat W1(3, 4), W2(2, 3);
  for (double& v : W1.a) v = rng::uniform(g, -0.8, 0.8);
  for (double& v : W2.a) v = rng::uniform(g, -0.8, 0.8);
  Mat b1(3, 1), gate(2, 1);
  for (double& v : b1.a) v = rng::uniform(g, -0.2, 0.2);
  for (double& v : gate.a) v = rng::uniform(g, -0.5, 0.5);
  reg.add("W1", W1);
  reg.add("b1", b1);
  reg.add("W2", W2);
  reg.add("gate", gate);

  std::vector<double> xv(4), yv(4);
  for (double& v : xv) v = rng::uniform(g, -1.0, 1.0);
  for (double& v : yv) v = rng::uniform(g, -1.0, 1.0);

  LossBuilder build = [&](Tape& t) {
    auto x = t.input(Mat::vec(xv));
    auto y = t.input(Mat::vec(yv));
    auto h1 = t.relu(t.linear(t.param(reg.at("W1")), x, t.param(reg.at("b1"))));
    auto h2 = t.relu(t.linear(t.param(reg.at("W1")), y, t.param(reg.at("b1"))));
    auto p = t.softmax(t.param(reg.at("gate")));
    auto mixed = t.mix(p, {h1, h2});
    auto logits = t.matvec(t.param(reg.at("W2")), mixed);
    return t.softmax_xent(logits, 1);
  };

  GradCheckReport report = grad_check(build, reg, 1e-5, 1e-5);
  CHECK(report.checked == reg.scalar_count());
  CHECK_MESSAGE(report.ok(), "worst ", report.worst_param, "[", report.worst_index,
                "] rel err ", report.max_rel_err);
}

TEST_CASE("grad_check flags a corrupted gradient") {
  ParamRegistry reg;
  reg.add("w", Mat::vec({0.7}));
  // The forward uses w^2 but the tape sees only a linear term, so the
  // analytic gradient disagrees with the numeric one.
  LossBuilder build = [&](Tape& t) {
    auto w = t.param(reg.at("w"));
    const double wv = reg.at("w").value[0];
    auto skewed = t.scale(w, wv);  // value w^2, recorded derivative wv only
    return t.dot_scores(t.input(Mat::vec({1.0})), {skewed}, 1.0);
  };
  GradCheckReport report = grad_check(build, reg, 1e-5, 1e-5);
  CHECK(!report.ok());
  CHECK(report.worst_param == "w");
}

TEST_CASE("closed-form mixture gradients match the tape") {
  std::mt19937_64 g(13);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + static_cast<int>(rng::below(g, 4));  // experts
    const int k = 2 + static_cast<int>(rng::below(g, 3));  // classes
    const int gold = static_cast<int>(rng::below(g, static_cast<std::uint64_t>(k)));

    std::vector<double> raw(static_cast<std::size_t>(m));
    double sum = 0.0;
    for (double& v : raw) {
      v = rng::uniform(g, 0.05, 1.0);
      sum += v;
    }
    for (double& v : raw) v /= sum;
    Mat E(m, k);
    for (double& v : E.a) v = rng::uniform(g, -2.0, 2.0);

    MoeClosedForm cf = closed_form_moe_grads(raw, E, gold);

    ParamRegistry reg;
    reg.add("p", Mat::vec(raw));
    reg.add("E", E);
    Tape t;
    auto p = t.param(reg.at("p"));
    auto Et = t.param(reg.at("E"));
    // logits_j = sum_m p_m E_mj  ==  E^T p; build it per class with dot_scores.
    std::vector<Tape::Id> cols;
    for (int j = 0; j < k; ++j) {
      Mat sel(k, 1);
      sel[static_cast<std::size_t>(j)] = 1.0;
      cols.push_back(t.matvec(Et, t.input(sel)));  // column j of E
    }
    auto logits = t.dot_scores(p, cols, 1.0);
    t.backward(t.softmax_xent(logits, gold));

    for (int i = 0; i < m; ++i) {
      CHECK(reg.at("p").grad[static_cast<std::size_t>(i)] ==
            doctest::Approx(cf.dL_dp[static_cast<std::size_t>(i)]).epsilon(1e-9));
      CHECK(reg.at("E").grad(i, gold) ==
            doctest::Approx(cf.dL_dEc[static_cast<std::size_t>(i)]).epsilon(1e-9));
    }
    const Mat& pv = t.value(t.softmax(logits));
    for (int j = 0; j < k; ++j) {
      CHECK(pv[static_cast<std::size_t>(j)] ==
            doctest::Approx(cf.yhat[static_cast<std::size_t>(j)]).epsilon(1e-9));
    }
  }
}

TEST_CASE("closed-form gradients vanish when the prediction saturates") {
  std::vector<double> p = {0.4, 0.3, 0.3};
  Mat E(3, 2);
  for (int i = 0; i < 3; ++i) E(i, 0) = 60.0;  // gold class dominates
  MoeClosedForm cf = closed_form_moe_grads(p, E, 0);
  CHECK(cf.yhat[0] > 1.0 - 1e-12);
  for (double v : cf.dL_dp) CHECK(std::fabs(v) <= 1e-6);
  for (double v : cf.dL_dEc) CHECK(std::fabs(v) <= 1e-6);
}

TEST_CASE("closed-form rejects invalid gates") {
  Mat E(2, 2);
  CHECK_THROWS_AS(closed_form_moe_grads({0.7, 0.7}, E, 0), NotNormalized);
  CHECK_THROWS_AS(closed_form_moe_grads({1.5, -0.5}, E, 0), NotNormalized);
  CHECK_THROWS_AS(closed_form_moe_grads({0.5, 0.5}, E, 2), ShapeError);
  CHECK_THROWS_AS(closed_form_moe_grads({1.0}, E, 0), ShapeError);
}

}  // TEST_SUITE
