#include "definf/stats.hpp"

#include <algorithm>
#include <cmath>

#include "definf/errors.hpp"

namespace definf {

RepetitionMetrics repetition_metrics(const std::vector<OverlapReport>& reports,
                                     RepeatCountMode mode) {
  if (reports.empty()) throw InsufficientData("repetition_metrics over empty corpus");
  RepetitionMetrics m;
  m.n_graphs = static_cast<int>(reports.size());
  long total = 0;
  int with_rep = 0;
  for (const auto& r : reports) {
    total += mode == RepeatCountMode::participants ? r.repeated_node_count()
                                                   : r.extra_node_count();
    if (!r.clean()) with_rep += 1;
  }
  m.per_graph = static_cast<double>(total) / m.n_graphs;
  m.pct_with_repetition = 100.0 * with_rep / m.n_graphs;
  return m;
}

double mcnemar_exact(long n01, long n10) {
  if (n01 < 0 || n10 < 0) throw Error("negative discordant count");
  const long n = n01 + n10;
  if (n == 0) return 1.0;
  const long k = std::min(n01, n10);
  double tail;
  if (n <= 60) {
    // Exact integer tail: sum stays below 2^60 and the running coefficient
    // update divides evenly, so small inputs give exact p-values.
    unsigned long long sum = 0, coeff = 1;
    for (long i = 0; i <= k; ++i) {
      sum += coeff;
      coeff = coeff * static_cast<unsigned long long>(n - i) /
              static_cast<unsigned long long>(i + 1);
    }
    tail = std::ldexp(static_cast<double>(sum), static_cast<int>(-n));
  } else {
    tail = 0.0;
    const double log_half_n = static_cast<double>(n) * std::log(2.0);
    for (long i = 0; i <= k; ++i) {
      double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                        std::lgamma(static_cast<double>(i) + 1.0) -
                        std::lgamma(static_cast<double>(n - i) + 1.0) - log_half_n;
      tail += std::exp(log_term);
    }
  }
  return std::min(1.0, 2.0 * tail);
}

double micro_sign_test(long wins_a, long wins_b) {
  return mcnemar_exact(wins_a, wins_b);
}

PairedOutcomes paired_confusion(const std::vector<Label>& preds_a,
                                const std::vector<Label>& preds_b,
                                const std::vector<Label>& gold) {
  if (preds_a.size() != gold.size() || preds_b.size() != gold.size()) {
    throw AlignmentError("prediction lists not aligned with gold: " +
                         std::to_string(preds_a.size()) + ", " +
                         std::to_string(preds_b.size()) + " vs " +
                         std::to_string(gold.size()));
  }
  if (gold.empty()) throw AlignmentError("empty prediction lists");
  PairedOutcomes out;
  for (size_t i = 0; i < gold.size(); ++i) {
    bool a_right = preds_a[i] == gold[i];
    bool b_right = preds_b[i] == gold[i];
    if (a_right && b_right) out.n11 += 1;
    else if (a_right) out.n10 += 1;
    else if (b_right) out.n01 += 1;
    else out.n00 += 1;
  }
  return out;
}

namespace {

double entropy_impl(std::span<const double> p, double log_base_factor) {
  double sum = 0.0;
  for (double x : p) {
    if (x < 0.0) throw NotNormalized("negative probability component");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw NotNormalized("probabilities sum to " + std::to_string(sum));
  }
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h * log_base_factor;
}

}  // namespace

double entropy(std::span<const double> p) { return entropy_impl(p, 1.0); }

double entropy_bits(std::span<const double> p) {
  return entropy_impl(p, 1.0 / std::log(2.0));
}

std::array<std::array<double, 5>, 5> gate_correlation(const std::vector<GateTrace>& traces) {
  if (traces.size() < 2) {
    throw InsufficientData("gate_correlation needs at least 2 traces");
  }
  const double n = static_cast<double>(traces.size());
  std::array<double, 5> mean{};
  for (const auto& t : traces) {
    for (size_t i = 0; i < 5; ++i) mean[i] += t.moe_v[i];
  }
  for (auto& m : mean) m /= n;

  std::array<std::array<double, 5>, 5> cov{};
  for (const auto& t : traces) {
    for (size_t i = 0; i < 5; ++i) {
      for (size_t j = 0; j < 5; ++j) {
        cov[i][j] += (t.moe_v[i] - mean[i]) * (t.moe_v[j] - mean[j]);
      }
    }
  }

  // Columns whose spread is at rounding-dust level count as constant;
  // without the threshold the dust itself correlates to exactly +/-1.
  const double var_floor = n * 1e-24;
  std::array<std::array<double, 5>, 5> corr{};
  for (size_t i = 0; i < 5; ++i) {
    for (size_t j = 0; j < 5; ++j) {
      if (i == j) {
        corr[i][j] = 1.0;
      } else if (cov[i][i] <= var_floor || cov[j][j] <= var_floor) {
        corr[i][j] = 0.0;
      } else {
        corr[i][j] = cov[i][j] / std::sqrt(cov[i][i] * cov[j][j]);
        corr[i][j] = std::clamp(corr[i][j], -1.0, 1.0);
      }
    }
  }
  return corr;
}

}  // namespace definf
