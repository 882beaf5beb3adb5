#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "definf/graph.hpp"

namespace definf {

// Token multiset: token -> count.
using TokenCounts = std::map<std::string, int>;

// Configuration of the repetition detector. Lexicon and stopword entries
// must be lowercase.
struct OverlapConfig {
  double jaccard_threshold = 0.8;
  std::set<std::string> polarity_lexicon;
  std::set<std::string> stopwords;

  // Threshold 0.8 plus the default lexicons below.
  static OverlapConfig defaults();
};

// Direction-of-influence words routed into the polarity signature instead
// of the content multiset.
const std::set<std::string>& default_polarity_lexicon();

// Closed-class words (articles, copulas, prepositions) dropped from the
// content multiset so that function words do not dominate short labels.
const std::set<std::string>& default_stopwords();

// Lowercases and splits on whitespace and punctuation.
std::vector<std::string> tokenize(std::string_view text);

struct NodeSignature {
  TokenCounts content;
  TokenCounts polarity;
};

// Lowercase, split on whitespace/punctuation; polarity-lexicon tokens go
// to the polarity signature, stopwords are dropped, the rest is content.
NodeSignature normalize_node(std::string_view label, const OverlapConfig& cfg);

// Multiset Jaccard |intersection| / |union|; 1.0 when both are empty.
double multiset_jaccard(const TokenCounts& a, const TokenCounts& b);

// Disjoint groups of roles flagged as repetitions. Groups are sorted in
// feedback role order and ordered by their earliest member; message is
// exactly render_feedback(groups).
struct OverlapReport {
  std::vector<std::vector<NodeRole>> groups;
  std::string message;

  bool clean() const { return groups.empty(); }
  // Total nodes participating in groups (a pair contributes 2).
  int repeated_node_count() const;
  // Duplicates beyond the first member of each group (a pair contributes 1).
  int extra_node_count() const;
};

// Flags a node pair iff the normalized full texts are identical, or the
// content Jaccard reaches the threshold with equal polarity signatures.
// Groups are the connected components of the flagged-pair graph.
// Throws DegenerateLabels when every node has empty content.
OverlapReport detect_overlaps(const InferenceGraph& g, const OverlapConfig& cfg);

// "C-, C+ are overlapping, and S, S- are overlapping" style text;
// "No issues, looks good" for no groups.
std::string render_feedback(const std::vector<std::vector<NodeRole>>& groups);

// Deterministic rule-based corrector: every group member except the first
// keeps its content and gains a role-specific disambiguating suffix chosen
// by (role, salt). The result is always detector-clean under `cfg`.
InferenceGraph reference_correct(const InferenceGraph& g, const OverlapReport& report,
                                 const OverlapConfig& cfg, std::uint64_t salt);

using Corrector = std::function<InferenceGraph(const InferenceGraph&, const OverlapReport&)>;

struct CorrectionTrace {
  InferenceGraph graph;
  OverlapReport report;
};

struct CorrectionResult {
  InferenceGraph final_graph;
  std::vector<CorrectionTrace> trace;  // iterations performed + 1 entries
  bool converged = false;
  int iterations = 0;
};

// Applies `corrector` while feedback is non-empty, up to max_iters times.
// Corrector exceptions propagate as CorrectorFailure.
CorrectionResult iterative_correct(const InferenceGraph& g, const Corrector& corrector,
                                   const OverlapConfig& cfg, int max_iters);

}  // namespace definf
