#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "definf/dataset.hpp"

namespace definf {

// Deterministic generator of defeasible examples with a planted node-level
// cue.  The cue token appears only inside the signal_role node, never in the
// query text, so query-only models cannot recover the label.
struct SynthConfig {
  int n_examples = 512;
  NodeRole signal_role = NodeRole::Sminus;
  double signal_strength = 1.0;  // P(cue agrees with the label), in [0.5, 1]
  double duplicate_rate = 0.0;   // P(one node pair is overwritten verbatim)
  int vocab_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
};

inline constexpr const char* kCueToken = "cueplus";
inline constexpr const char* kPhraseBankVersion = "v1";

// Role-keyed template phrases; the same content ships as
// assets/phrase_bank_v1.txt so corpora stay stable across releases.
const std::map<NodeRole, std::vector<std::string>>& phrase_bank();

// Renders the bank in the asset-file format (version header plus
// "TAG<TAB>phrase" lines in canonical role order).
std::string phrase_bank_asset_text();

Corpus generate(const SynthConfig& cfg);

}  // namespace definf
