#pragma once

#include <array>
#include <string>
#include <vector>

#include "definf/graph.hpp"
#include "definf/stats.hpp"
#include "definf/trace.hpp"

namespace definf {

// Aggregate view of per-example gate traces.  Gate order follows the
// encoder's moe_roles; the two-way gate is (graph, question).
struct GateReport {
  std::size_t count = 0;
  std::array<double, 5> mean_moe_v{};
  std::array<double, 2> mean_gx{};
  // Partitions by gold label and by prediction.
  std::size_t n_strengthens = 0;
  std::size_t n_weakens = 0;
  std::array<double, 2> mean_gx_gold_strengthens{};
  std::array<double, 2> mean_gx_gold_weakens{};
  double mean_moe_v_entropy = 0.0;  // nats
  double mean_gx_entropy = 0.0;     // nats
  std::array<std::array<double, 5>, 5> correlation{};
};

GateReport gate_report(const std::vector<GateTrace>& traces, const std::vector<Label>& gold,
                       const std::vector<int>& preds);

std::string gate_report_json(const GateReport& r, const std::vector<std::string>& role_names);
std::string gate_report_table(const GateReport& r, const std::vector<std::string>& role_names);

struct CompareReport {
  PairedOutcomes cells;
  double mcnemar_p = 1.0;
  double sign_p = 1.0;
};

CompareReport compare_models(const std::vector<int>& preds_a, const std::vector<int>& preds_b,
                             const std::vector<int>& gold);

std::string compare_report_json(const CompareReport& r);

}  // namespace definf
