#pragma once

#include <string>
#include <vector>

#include "definf/feedback.hpp"
#include "definf/graph.hpp"

namespace definf {

// One corrector training example: a possibly-dirty input graph, the
// feedback rendered for it, and the clean target graph.
struct CorrectionExample {
  InferenceGraph input_graph;
  std::string feedback;
  InferenceGraph target_graph;
};

struct AssembleSummary {
  int emitted_with_feedback = 0;  // input dirty, target clean
  int emitted_clean = 0;          // both clean
  int dropped_target_dirty = 0;   // input clean, target dirty
  int dropped_both_dirty = 0;     // both dirty

  int emitted() const { return emitted_with_feedback + emitted_clean; }
  int dropped() const { return dropped_target_dirty + dropped_both_dirty; }
};

struct AssembleResult {
  std::vector<CorrectionExample> examples;
  // Index pairs of dropped inputs, aligned with the input list.
  std::vector<int> dropped_indices;
  AssembleSummary summary;
};

// Builds corrector training data from aligned generator outputs: emit
// (g, feedback(g), g*) when g is dirty and g* clean, emit
// (g, "No issues, looks good", g*) when both are clean, drop otherwise.
// Throws AlignmentError when list lengths differ.
AssembleResult assemble_correction_dataset(const std::vector<InferenceGraph>& from_m,
                                           const std::vector<InferenceGraph>& from_mstar,
                                           const OverlapConfig& cfg);

}  // namespace definf
