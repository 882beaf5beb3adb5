#pragma once

#include <functional>
#include <string>
#include <vector>

#include "definf/tape.hpp"

namespace definf {

// Builds the loss node for one forward pass on a fresh tape.  Must be
// deterministic: grad_check calls it repeatedly while nudging parameters.
using LossBuilder = std::function<Tape::Id(Tape&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  double tol = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool ok() const { return max_rel_err <= tol; }
};

// Central-difference check of every registered parameter scalar against the
// tape's reverse pass.  Relative error |a-n| / max(|a|,|n|,1e-12).
GradCheckReport grad_check(const LossBuilder& build, ParamRegistry& reg,
                           double eps = 1e-5, double tol = 1e-5);

// Analytic gradients of L = -log softmax(p^T E)_gold for a mixture whose
// logits are a gate-weighted sum of per-expert class scores.  E is m x K
// (expert rows, class columns); p is a point on the m-simplex.
struct MoeClosedForm {
  std::vector<double> yhat;    // K, softmax of mixed logits
  std::vector<double> dL_dp;   // m, gradient w.r.t. the gate weights
  std::vector<double> dL_dEc;  // m, gradient w.r.t. E[:, gold]
};

MoeClosedForm closed_form_moe_grads(const std::vector<double>& p, const Mat& E, int gold);

}  // namespace definf
