#pragma once

#include <array>
#include <span>
#include <vector>

#include "definf/feedback.hpp"
#include "definf/graph.hpp"
#include "definf/trace.hpp"

namespace definf {

// How the repeated-node count of one graph is taken: every participant of
// an overlap group (a pair counts 2), or only the duplicates beyond the
// first member (a pair counts 1).
enum class RepeatCountMode { participants, extras };

struct RepetitionMetrics {
  double per_graph = 0.0;            // mean repeated-node count
  double pct_with_repetition = 0.0;  // in [0, 100]
  int n_graphs = 0;
};

// Corpus-level repetition statistics. Throws InsufficientData on an empty
// corpus.
RepetitionMetrics repetition_metrics(const std::vector<OverlapReport>& reports,
                                     RepeatCountMode mode = RepeatCountMode::participants);

// Exact two-sided McNemar test on the discordant counts: p = min(1,
// 2 P(X <= min(n01, n10))) with X ~ Binomial(n01 + n10, 1/2); p = 1 when
// both counts are zero.
double mcnemar_exact(long n01, long n10);

// Micro-sign test over per-example win/loss counts between two paired
// systems; the same exact binomial machinery as mcnemar_exact.
double micro_sign_test(long wins_a, long wins_b);

// Paired right/wrong cells for two prediction lists against gold.
struct PairedOutcomes {
  long n00 = 0;  // both wrong
  long n01 = 0;  // a wrong, b right
  long n10 = 0;  // a right, b wrong
  long n11 = 0;  // both right

  long total() const { return n00 + n01 + n10 + n11; }
};

// Throws AlignmentError on length mismatch or empty input.
PairedOutcomes paired_confusion(const std::vector<Label>& preds_a,
                                const std::vector<Label>& preds_b,
                                const std::vector<Label>& gold);

// Shannon entropy in nats, -sum p ln p with 0 ln 0 = 0. Components must be
// nonnegative and sum to 1 within 1e-9 (NotNormalized otherwise).
double entropy(std::span<const double> p);

// Same in bits (log base 2).
double entropy_bits(std::span<const double> p);

// 5x5 Pearson correlation matrix over the node-gate weights of a trace
// list. Unit diagonal; zero-variance coordinates give 0 off-diagonal.
// Throws InsufficientData for fewer than 2 traces.
std::array<std::array<double, 5>, 5> gate_correlation(const std::vector<GateTrace>& traces);

}  // namespace definf
