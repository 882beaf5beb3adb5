#include "definf/corrdata.hpp"

#include "definf/errors.hpp"

namespace definf {

AssembleResult assemble_correction_dataset(const std::vector<InferenceGraph>& from_m,
                                           const std::vector<InferenceGraph>& from_mstar,
                                           const OverlapConfig& cfg) {
  if (from_m.size() != from_mstar.size()) {
    throw AlignmentError("graph lists are not aligned: " +
                         std::to_string(from_m.size()) + " vs " +
                         std::to_string(from_mstar.size()));
  }
  AssembleResult result;
  for (size_t i = 0; i < from_m.size(); ++i) {
    OverlapReport fg = detect_overlaps(from_m[i], cfg);
    OverlapReport fg_star = detect_overlaps(from_mstar[i], cfg);
    if (!fg.clean() && fg_star.clean()) {
      result.examples.push_back({from_m[i], fg.message, from_mstar[i]});
      result.summary.emitted_with_feedback += 1;
    } else if (fg.clean() && fg_star.clean()) {
      result.examples.push_back({from_m[i], fg.message, from_mstar[i]});
      result.summary.emitted_clean += 1;
    } else if (fg.clean()) {
      result.dropped_indices.push_back(static_cast<int>(i));
      result.summary.dropped_target_dirty += 1;
    } else {
      result.dropped_indices.push_back(static_cast<int>(i));
      result.summary.dropped_both_dirty += 1;
    }
  }
  return result;
}

}  // namespace definf
