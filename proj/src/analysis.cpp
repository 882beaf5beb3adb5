#include "definf/analysis.hpp"

#include <cstdio>
#include <span>

#include <json.hpp>

namespace definf {

GateReport gate_report(const std::vector<GateTrace>& traces, const std::vector<Label>& gold,
                       const std::vector<int>& preds) {
  if (traces.size() != gold.size() || traces.size() != preds.size()) {
    throw AlignmentError("LengthMismatch(traces=" + std::to_string(traces.size()) +
                         ", gold=" + std::to_string(gold.size()) +
                         ", preds=" + std::to_string(preds.size()) + ")");
  }
  if (traces.empty()) throw InsufficientData("gate_report needs at least one trace");

  GateReport r;
  r.count = traces.size();
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const GateTrace& t = traces[i];
    for (std::size_t k = 0; k < 5; ++k) r.mean_moe_v[k] += t.moe_v[k];
    for (std::size_t k = 0; k < 2; ++k) r.mean_gx[k] += t.moe_gx[k];
    r.mean_moe_v_entropy += entropy(t.moe_v);
    r.mean_gx_entropy += entropy(t.moe_gx);
    if (gold[i] == Label::strengthens) {
      ++r.n_strengthens;
      for (std::size_t k = 0; k < 2; ++k) r.mean_gx_gold_strengthens[k] += t.moe_gx[k];
    } else {
      ++r.n_weakens;
      for (std::size_t k = 0; k < 2; ++k) r.mean_gx_gold_weakens[k] += t.moe_gx[k];
    }
  }
  const double inv = 1.0 / static_cast<double>(r.count);
  for (auto& v : r.mean_moe_v) v *= inv;
  for (auto& v : r.mean_gx) v *= inv;
  r.mean_moe_v_entropy *= inv;
  r.mean_gx_entropy *= inv;
  if (r.n_strengthens > 0) {
    for (auto& v : r.mean_gx_gold_strengthens) v /= static_cast<double>(r.n_strengthens);
  }
  if (r.n_weakens > 0) {
    for (auto& v : r.mean_gx_gold_weakens) v /= static_cast<double>(r.n_weakens);
  }
  if (r.count >= 2) {
    r.correlation = gate_correlation(traces);
  } else {
    for (std::size_t k = 0; k < 5; ++k) r.correlation[k][k] = 1.0;
  }
  return r;
}

namespace {

nlohmann::json named_vec(const std::vector<std::string>& names, std::span<const double> v) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < names.size() && i < v.size(); ++i) j[names[i]] = v[i];
  return j;
}

}  // namespace

std::string gate_report_json(const GateReport& r, const std::vector<std::string>& role_names) {
  nlohmann::json j;
  j["count"] = r.count;
  j["mean_moe_v"] = named_vec(role_names, r.mean_moe_v);
  j["mean_gx"] = {{"graph", r.mean_gx[0]}, {"question", r.mean_gx[1]}};
  j["mean_gx_gold_strengthens"] = {{"graph", r.mean_gx_gold_strengthens[0]},
                                   {"question", r.mean_gx_gold_strengthens[1]}};
  j["mean_gx_gold_weakens"] = {{"graph", r.mean_gx_gold_weakens[0]},
                               {"question", r.mean_gx_gold_weakens[1]}};
  j["n_strengthens"] = r.n_strengthens;
  j["n_weakens"] = r.n_weakens;
  j["mean_moe_v_entropy_nats"] = r.mean_moe_v_entropy;
  j["mean_gx_entropy_nats"] = r.mean_gx_entropy;
  nlohmann::json corr = nlohmann::json::array();
  for (const auto& row : r.correlation) {
    corr.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["gate_correlation"] = corr;
  return j.dump(2);
}

std::string gate_report_table(const GateReport& r, const std::vector<std::string>& role_names) {
  std::string out;
  char buf[160];
  out += "gate means over " + std::to_string(r.count) + " examples\n";
  for (std::size_t i = 0; i < role_names.size() && i < 5; ++i) {
    std::snprintf(buf, sizeof(buf), "  %-4s %.4f\n", role_names[i].c_str(), r.mean_moe_v[i]);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "  graph/question gate: %.4f / %.4f\n", r.mean_gx[0], r.mean_gx[1]);
  out += buf;
  std::snprintf(buf, sizeof(buf), "  entropies (nats): moe_v %.4f, gx %.4f\n",
                r.mean_moe_v_entropy, r.mean_gx_entropy);
  out += buf;
  return out;
}

CompareReport compare_models(const std::vector<int>& preds_a, const std::vector<int>& preds_b,
                             const std::vector<int>& gold) {
  if (preds_a.size() != preds_b.size() || preds_a.size() != gold.size()) {
    throw AlignmentError("LengthMismatch(a=" + std::to_string(preds_a.size()) +
                         ", b=" + std::to_string(preds_b.size()) +
                         ", gold=" + std::to_string(gold.size()) + ")");
  }
  auto as_label = [](int v) { return v == 0 ? Label::strengthens : Label::weakens; };
  std::vector<Label> la, lb, lg;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    la.push_back(as_label(preds_a[i]));
    lb.push_back(as_label(preds_b[i]));
    lg.push_back(as_label(gold[i]));
  }
  CompareReport r;
  r.cells = paired_confusion(la, lb, lg);
  r.mcnemar_p = mcnemar_exact(r.cells.n01, r.cells.n10);
  r.sign_p = micro_sign_test(r.cells.n10, r.cells.n01);
  return r;
}

std::string compare_report_json(const CompareReport& r) {
  nlohmann::json j;
  j["cells"] = {{"both_wrong", r.cells.n00},
                {"a_wrong_b_right", r.cells.n01},
                {"a_right_b_wrong", r.cells.n10},
                {"both_right", r.cells.n11}};
  j["mcnemar_p"] = r.mcnemar_p;
  j["sign_p"] = r.sign_p;
  return j.dump(2);
}

}  // namespace definf
