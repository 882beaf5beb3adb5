#include "definf/feedback.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

#include "definf/errors.hpp"

namespace definf {

const std::set<std::string>& default_polarity_lexicon() {
  static const std::set<std::string> lex = {
      "no",        "not",       "never",    "less",      "fewer",
      "lower",     "decrease",  "decreased", "decreases", "weaker",
      "more",      "greater",   "higher",   "increase",  "increased",
      "increases", "stronger"};
  return lex;
}

const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> sw = {
      // articles
      "a", "an", "the",
      // copulas
      "am", "is", "are", "was", "were", "be", "been", "being",
      // prepositions
      "of", "in", "on", "at", "to", "for", "with", "by", "from", "as",
      "into", "onto", "over", "under", "near", "through", "during",
      "between", "about", "after", "before", "against"};
  return sw;
}

OverlapConfig OverlapConfig::defaults() {
  OverlapConfig cfg;
  cfg.jaccard_threshold = 0.8;
  cfg.polarity_lexicon = default_polarity_lexicon();
  cfg.stopwords = default_stopwords();
  return cfg;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    unsigned char u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

NodeSignature normalize_node(std::string_view label, const OverlapConfig& cfg) {
  NodeSignature sig;
  for (auto& tok : tokenize(label)) {
    if (cfg.polarity_lexicon.contains(tok)) {
      sig.polarity[tok] += 1;
    } else if (!cfg.stopwords.contains(tok)) {
      sig.content[tok] += 1;
    }
  }
  return sig;
}

double multiset_jaccard(const TokenCounts& a, const TokenCounts& b) {
  long inter = 0, uni = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      uni += ia->second;
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      uni += ib->second;
      ++ib;
    } else {
      inter += std::min(ia->second, ib->second);
      uni += std::max(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
  if (uni == 0) return 1.0;  // two empty multisets are identical
  return static_cast<double>(inter) / static_cast<double>(uni);
}

int OverlapReport::repeated_node_count() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size());
  return n;
}

int OverlapReport::extra_node_count() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size()) - 1;
  return n;
}

namespace {

// Union-find over the 8 role indices.
struct RoleUnion {
  std::array<int, 8> parent;
  RoleUnion() { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      x = parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
    }
    return x;
  }
  void unite(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

std::string normalized_text(std::string_view label) {
  std::string out;
  for (auto& tok : tokenize(label)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace

OverlapReport detect_overlaps(const InferenceGraph& g, const OverlapConfig& cfg) {
  std::array<NodeSignature, 8> sigs;
  std::array<std::string, 8> norms;
  bool any_content = false;
  for (size_t i = 0; i < 8; ++i) {
    const std::string& label = g.label(kAllRoles[i]);
    sigs[i] = normalize_node(label, cfg);
    norms[i] = normalized_text(label);
    if (!sigs[i].content.empty()) any_content = true;
  }
  if (!any_content) {
    throw DegenerateLabels("every node label normalizes to an empty content multiset");
  }

  RoleUnion uf;
  std::array<bool, 8> flagged{};
  for (size_t i = 0; i < 8; ++i) {
    for (size_t j = i + 1; j < 8; ++j) {
      bool exact = norms[i] == norms[j];
      bool fuzzy = sigs[i].polarity == sigs[j].polarity &&
                   multiset_jaccard(sigs[i].content, sigs[j].content) >=
                       cfg.jaccard_threshold;
      if (exact || fuzzy) {
        uf.unite(static_cast<int>(i), static_cast<int>(j));
        flagged[i] = flagged[j] = true;
      }
    }
  }

  std::map<int, std::vector<NodeRole>> components;
  for (size_t i = 0; i < 8; ++i) {
    if (flagged[i]) components[uf.find(static_cast<int>(i))].push_back(kAllRoles[i]);
  }

  OverlapReport report;
  for (auto& [root, members] : components) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end(), [](NodeRole a, NodeRole b) {
      return feedback_rank(a) < feedback_rank(b);
    });
    report.groups.push_back(std::move(members));
  }
  std::sort(report.groups.begin(), report.groups.end(),
            [](const auto& a, const auto& b) {
              return feedback_rank(a.front()) < feedback_rank(b.front());
            });
  report.message = render_feedback(report.groups);
  return report;
}

std::string render_feedback(const std::vector<std::vector<NodeRole>>& groups) {
  if (groups.empty()) return "No issues, looks good";
  std::string out;
  for (size_t gi = 0; gi < groups.size(); ++gi) {
    if (gi > 0) out += ", and ";
    for (size_t ri = 0; ri < groups[gi].size(); ++ri) {
      if (ri > 0) out += ", ";
      out += role_tag(groups[gi][ri]);
    }
    out += " are overlapping";
  }
  return out;
}

namespace {

// Disambiguating suffixes per role. Content words are unique across the
// whole table and absent from the polarity lexicon, so a suffixed label
// cannot collide with another role's suffix.
const std::array<std::vector<std::string>, 8>& phrase_table() {
  static const std::array<std::vector<std::string>, 8> table = {{
      // C+
      {"given a welcoming environment", "granted favorable grounding",
       "paired with an enabling setting"},
      // C-
      {"amid hostile surroundings", "facing an adverse landscape",
       "hampered by unfriendly terrain"},
      // S
      {"reflecting the current situation", "matching the unfolding events",
       "anchored in the present case"},
      // S-
      {"assuming the opposite premise", "positing a reversed state",
       "imagining the contrary turn"},
      // M+
      {"boosted along the causal chain", "amplified at the middle link",
       "reinforced while propagating"},
      // M-
      {"dampened midway instead", "attenuated across the bridge",
       "muted before arriving"},
      // H+
      {"supporting the final outcome", "upholding the expected verdict",
       "confirming the projected result"},
      // H-
      {"blocking the eventual conclusion", "contradicting the anticipated ending",
       "denying the foreseen claim"},
  }};
  return table;
}

std::string role_word(NodeRole r) {
  switch (r) {
    case NodeRole::Cplus: return "cplus";
    case NodeRole::Cminus: return "cminus";
    case NodeRole::S: return "snode";
    case NodeRole::Sminus: return "sminus";
    case NodeRole::Mplus: return "mplus";
    case NodeRole::Mminus: return "mminus";
    case NodeRole::Hplus: return "hplus";
    case NodeRole::Hminus: return "hminus";
  }
  return "role";
}

}  // namespace

InferenceGraph reference_correct(const InferenceGraph& g, const OverlapReport& report,
                                 const OverlapConfig& cfg, std::uint64_t salt) {
  if (report.clean()) return g;

  InferenceGraph out = g;
  auto apply_suffix = [&](NodeRole role, int round) {
    const auto& phrases = phrase_table()[static_cast<size_t>(role)];
    std::string& label = out.nodes.at(role);
    if (round == 0) {
      label += ", " + phrases[static_cast<size_t>(salt % phrases.size())];
    } else {
      // Escape hatch for pathological labels: unique per (role, round).
      label += " " + role_word(role) + "fix" + std::to_string(round);
    }
  };

  for (const auto& group : report.groups) {
    for (size_t i = 1; i < group.size(); ++i) apply_suffix(group[i], 0);
  }

  // Appending unique tokens strictly lowers every flagged pair's Jaccard,
  // so this terminates; in practice one pass suffices.
  for (int round = 1; round <= 1000; ++round) {
    OverlapReport check = detect_overlaps(out, cfg);
    if (check.clean()) return out;
    for (const auto& group : check.groups) {
      for (size_t i = 1; i < group.size(); ++i) apply_suffix(group[i], round);
    }
  }
  throw Error("reference_correct failed to converge");
}

CorrectionResult iterative_correct(const InferenceGraph& g, const Corrector& corrector,
                                   const OverlapConfig& cfg, int max_iters) {
  if (max_iters < 1) throw Error("max_iters must be >= 1");
  CorrectionResult result;
  result.trace.push_back({g, detect_overlaps(g, cfg)});
  while (!result.trace.back().report.clean() && result.iterations < max_iters) {
    const CorrectionTrace& last = result.trace.back();
    InferenceGraph next;
    try {
      next = corrector(last.graph, last.report);
    } catch (const std::exception& e) {
      throw CorrectorFailure(std::string("corrector failed: ") + e.what());
    }
    result.iterations += 1;
    result.trace.push_back({next, detect_overlaps(next, cfg)});
  }
  result.final_graph = result.trace.back().graph;
  result.converged = result.trace.back().report.clean();
  return result;
}

}  // namespace definf
