#include "definf/nn.hpp"

#include <algorithm>
#include <cmath>

namespace definf {

namespace {

double forward_loss(const LossBuilder& build) {
  Tape t;
  Tape::Id loss = build(t);
  return t.value(loss)[0];
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& build, ParamRegistry& reg,
                           double eps, double tol) {
  GradCheckReport report;
  report.tol = tol;

  reg.zero_grad();
  {
    Tape t;
    t.backward(build(t));
  }

  for (auto& p : reg.tensors()) {
    for (std::size_t i = 0; i < p.value.a.size(); ++i) {
      const double saved = p.value.a[i];
      p.value.a[i] = saved + eps;
      const double up = forward_loss(build);
      p.value.a[i] = saved - eps;
      const double down = forward_loss(build);
      p.value.a[i] = saved;

      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad.a[i];
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-12});
      const double rel = std::fabs(analytic - numeric) / denom;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = p.name;
        report.worst_index = i;
      }
      ++report.checked;
    }
  }
  return report;
}

MoeClosedForm closed_form_moe_grads(const std::vector<double>& p, const Mat& E, int gold) {
  const int m = E.rows;
  const int K = E.cols;
  if (static_cast<int>(p.size()) != m) {
    throw ShapeError("closed_form_moe_grads: gate length " + std::to_string(p.size()) +
                     " vs " + std::to_string(m) + " experts");
  }
  if (gold < 0 || gold >= K) {
    throw ShapeError("closed_form_moe_grads: bad gold index " + std::to_string(gold));
  }
  double sum = 0.0;
  for (double v : p) {
    if (v < -1e-12) throw NotNormalized("gate weight below zero");
    sum += v;
  }
  if (std::fabs(sum - 1.0) > 1e-9) throw NotNormalized("gate weights do not sum to 1");

  MoeClosedForm out;
  std::vector<double> z(static_cast<std::size_t>(K), 0.0);
  for (int j = 0; j < K; ++j) {
    for (int i = 0; i < m; ++i) z[static_cast<std::size_t>(j)] += p[static_cast<std::size_t>(i)] * E(i, j);
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  double zsum = 0.0;
  out.yhat.resize(static_cast<std::size_t>(K));
  for (int j = 0; j < K; ++j) {
    out.yhat[static_cast<std::size_t>(j)] = std::exp(z[static_cast<std::size_t>(j)] - zmax);
    zsum += out.yhat[static_cast<std::size_t>(j)];
  }
  for (double& v : out.yhat) v /= zsum;

  const double yc = out.yhat[static_cast<std::size_t>(gold)];
  out.dL_dp.resize(static_cast<std::size_t>(m));
  out.dL_dEc.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    double acc = -E(i, gold) * (1.0 - yc);
    for (int j = 0; j < K; ++j) {
      if (j == gold) continue;
      acc += out.yhat[static_cast<std::size_t>(j)] * E(i, j);
    }
    out.dL_dp[static_cast<std::size_t>(i)] = acc;
    out.dL_dEc[static_cast<std::size_t>(i)] = -p[static_cast<std::size_t>(i)] * (1.0 - yc);
  }
  return out;
}

}  // namespace definf
