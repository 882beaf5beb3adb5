#pragma once

#include <array>

namespace definf {

// Per-example gate distributions of the hierarchical mixture model: the
// five node-level gate weights and the two graph-vs-question weights
// (graph first, question second). Each vector sums to one.
struct GateTrace {
  std::array<double, 5> moe_v{};
  std::array<double, 2> moe_gx{};
};

}  // namespace definf
