#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "definf/errors.hpp"

namespace definf {

// The eight node roles of an inference graph, in canonical serialization
// order. Contextualizers C+/C-, situations S/S-, mediators M+/M-,
// hypotheses H+/H-.
enum class NodeRole { Cplus, Cminus, S, Sminus, Mplus, Mminus, Hplus, Hminus };

inline constexpr std::array<NodeRole, 8> kAllRoles = {
    NodeRole::Cplus, NodeRole::Cminus, NodeRole::S,     NodeRole::Sminus,
    NodeRole::Mplus, NodeRole::Mminus, NodeRole::Hplus, NodeRole::Hminus};

// Role order used when rendering feedback messages. Differs from the
// serialization order: minus-signed roles precede plus-signed ones, with
// the base situation S ahead of its inverse S-.
inline constexpr std::array<NodeRole, 8> kFeedbackRoleOrder = {
    NodeRole::Cminus, NodeRole::Cplus, NodeRole::S,     NodeRole::Sminus,
    NodeRole::Mminus, NodeRole::Mplus, NodeRole::Hminus, NodeRole::Hplus};

std::string role_tag(NodeRole r);                       // "C+", "S-", ...
std::optional<NodeRole> parse_role(std::string_view tag);
int feedback_rank(NodeRole r);  // position in kFeedbackRoleOrder

enum class Polarity { helps, hurts };

std::string polarity_name(Polarity p);

struct Edge {
  NodeRole src;
  NodeRole dst;
  Polarity pol;
  bool operator==(const Edge&) const = default;
};

// The fixed edge topology attached to every graph built through the
// default schema.
const std::vector<Edge>& default_edge_template();

// An 8-node role-tagged inference graph. Nodes map each role to a
// non-empty trimmed label; an invalid (partial) graph is representable
// so that validate() can report what is wrong with it.
struct InferenceGraph {
  std::map<NodeRole, std::string> nodes;
  std::vector<Edge> edges;

  bool operator==(const InferenceGraph&) const = default;

  const std::string& label(NodeRole r) const;

  // Builds a graph with the default edge template attached.
  static InferenceGraph with_default_edges(std::map<NodeRole, std::string> nodes);
};

enum class Label { strengthens, weakens };

std::string label_name(Label l);
// Accepts "strengthens"/"strengthener" and "weakens"/"weakener".
std::optional<Label> parse_label(std::string_view text);

// A defeasible query: does update S strengthen or weaken the conclusion
// that H follows from P?
struct DefeasibleQuery {
  std::string premise;
  std::string hypothesis;
  std::string update;
  std::optional<Label> label;

  bool operator==(const DefeasibleQuery&) const = default;
};

// One violated graph invariant; `render()` gives "MissingRole(M+)" style text.
struct Violation {
  enum class Kind { MissingRole, EmptyLabel, SelfEdge, DuplicateEdge };
  Kind kind;
  std::string detail;

  std::string render() const;
  bool operator==(const Violation&) const = default;
};

// Parses the linearized format: space-separated "[ROLE] label" segments,
// labels extending to the next '[' or end of string. Attaches the default
// edge template. Throws ParseError naming the offending role or token.
InferenceGraph parse_graph(std::string_view text);

// Emits roles in canonical order C+ C- S S- M+ M- H+ H-, one space
// between tag and label. Deterministic.
std::string serialize_graph(const InferenceGraph& g);

// Reports every violated invariant; empty result means the graph is valid.
std::vector<Violation> validate_graph(const InferenceGraph& g);

// Trims and collapses internal whitespace runs to single spaces. Case is
// preserved.
std::string normalize_whitespace(std::string_view text);

}  // namespace definf
