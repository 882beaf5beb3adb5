#include "definf/synth.hpp"

#include "definf/embed.hpp"
#include "definf/rng.hpp"

namespace definf {

void SynthConfig::validate() const {
  if (n_examples < 1) throw DataError("n_examples must be >= 1");
  if (signal_strength < 0.5 || signal_strength > 1.0) {
    throw DataError("signal_strength must be in [0.5, 1]");
  }
  if (duplicate_rate < 0.0 || duplicate_rate > 1.0) {
    throw DataError("duplicate_rate must be in [0, 1]");
  }
  if (vocab_size < 1) throw DataError("vocab_size must be >= 1");
}

const std::map<NodeRole, std::vector<std::string>>& phrase_bank() {
  static const std::map<NodeRole, std::vector<std::string>> bank = {
      {NodeRole::Cplus,
       {"favorable context surrounds the claim", "helpful background conditions hold",
        "supportive circumstances apply here", "friendly setting frames the events"}},
      {NodeRole::Cminus,
       {"adverse context surrounds the claim", "hostile background conditions hold",
        "contrary circumstances apply here", "awkward setting frames the events"}},
      {NodeRole::S,
       {"the stated situation unfolds", "the described update occurs",
        "the new information arrives", "the reported event takes place"}},
      {NodeRole::Sminus,
       {"the stated situation fails to unfold", "the described update stays absent",
        "the new information stays missing", "the reported event fails to occur"}},
      {NodeRole::Mplus,
       {"a driving mechanism pushes the outcome", "an enabling factor operates",
        "a catalyst accelerates the process", "a causal pathway activates"}},
      {NodeRole::Mminus,
       {"a blocking mechanism stalls the outcome", "a disabling factor operates",
        "an inhibitor slows the process", "a causal pathway shuts down"}},
      {NodeRole::Hplus,
       {"the hypothesis gains credibility", "the conclusion becomes likely",
        "the claim stands firm", "the hypothesis earns trust"}},
      {NodeRole::Hminus,
       {"the hypothesis suffers doubt", "the conclusion becomes unlikely",
        "the claim falls apart", "the hypothesis faces rejection"}},
  };
  return bank;
}

std::string phrase_bank_asset_text() {
  std::string out = "# phrase bank ";
  out += kPhraseBankVersion;
  out += "\n";
  for (NodeRole r : kAllRoles) {
    for (const std::string& p : phrase_bank().at(r)) {
      out += role_tag(r);
      out += "\t";
      out += p;
      out += "\n";
    }
  }
  return out;
}

namespace {

std::string vocab_token(std::mt19937_64& g, int vocab_size) {
  return "tok" + std::to_string(rng::below(g, static_cast<std::uint64_t>(vocab_size)));
}

}  // namespace

Corpus generate(const SynthConfig& cfg) {
  cfg.validate();
  Corpus corpus;
  corpus.reserve(static_cast<std::size_t>(cfg.n_examples));
  for (int i = 0; i < cfg.n_examples; ++i) {
    // Independent per-example stream so generation order (or sharding)
    // cannot change the corpus.
    std::mt19937_64 g(splitmix64(cfg.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)));

    Example ex;
    const Label gold = rng::bernoulli(g, 0.5) ? Label::strengthens : Label::weakens;
    bool has_cue = gold == Label::strengthens;
    if (!rng::bernoulli(g, cfg.signal_strength)) has_cue = !has_cue;

    std::map<NodeRole, std::string> nodes;
    for (NodeRole r : kAllRoles) {
      const auto& phrases = phrase_bank().at(r);
      std::string label = phrases[rng::below(g, phrases.size())];
      label += " " + vocab_token(g, cfg.vocab_size);
      label += " " + vocab_token(g, cfg.vocab_size);
      if (r == cfg.signal_role && has_cue) label += std::string(" ") + kCueToken;
      nodes[r] = label;
    }
    ex.graph = InferenceGraph::with_default_edges(std::move(nodes));

    ex.query.premise = "agent " + vocab_token(g, cfg.vocab_size) + " handles the " +
                       vocab_token(g, cfg.vocab_size) + " case";
    ex.query.hypothesis = "the outcome favors side " + vocab_token(g, cfg.vocab_size);
    ex.query.update = "later reports mention " + vocab_token(g, cfg.vocab_size);
    ex.query.label = gold;

    if (rng::bernoulli(g, cfg.duplicate_rate)) {
      const auto a = rng::below(g, kAllRoles.size());
      auto b = rng::below(g, kAllRoles.size() - 1);
      if (b >= a) ++b;
      ex.graph.nodes[kAllRoles[b]] = ex.graph.nodes[kAllRoles[a]];
    }
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

}  // namespace definf
