#include "definf/graph.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace definf {

std::string role_tag(NodeRole r) {
  switch (r) {
    case NodeRole::Cplus: return "C+";
    case NodeRole::Cminus: return "C-";
    case NodeRole::S: return "S";
    case NodeRole::Sminus: return "S-";
    case NodeRole::Mplus: return "M+";
    case NodeRole::Mminus: return "M-";
    case NodeRole::Hplus: return "H+";
    case NodeRole::Hminus: return "H-";
  }
  return "?";
}

std::optional<NodeRole> parse_role(std::string_view tag) {
  for (NodeRole r : kAllRoles) {
    if (role_tag(r) == tag) return r;
  }
  return std::nullopt;
}

int feedback_rank(NodeRole r) {
  for (int i = 0; i < 8; ++i) {
    if (kFeedbackRoleOrder[static_cast<size_t>(i)] == r) return i;
  }
  return 8;
}

std::string polarity_name(Polarity p) {
  return p == Polarity::helps ? "helps" : "hurts";
}

const std::vector<Edge>& default_edge_template() {
  static const std::vector<Edge> t = {
      {NodeRole::Cplus, NodeRole::S, Polarity::helps},
      {NodeRole::Cminus, NodeRole::S, Polarity::hurts},
      {NodeRole::S, NodeRole::Mplus, Polarity::helps},
      {NodeRole::S, NodeRole::Mminus, Polarity::hurts},
      {NodeRole::Sminus, NodeRole::Mplus, Polarity::hurts},
      {NodeRole::Sminus, NodeRole::Mminus, Polarity::helps},
      {NodeRole::Mplus, NodeRole::Hplus, Polarity::helps},
      {NodeRole::Mplus, NodeRole::Hminus, Polarity::hurts},
      {NodeRole::Mminus, NodeRole::Hminus, Polarity::helps},
      {NodeRole::Mminus, NodeRole::Hplus, Polarity::hurts},
  };
  return t;
}

const std::string& InferenceGraph::label(NodeRole r) const {
  auto it = nodes.find(r);
  if (it == nodes.end()) {
    throw Error("graph has no node for role " + role_tag(r));
  }
  return it->second;
}

InferenceGraph InferenceGraph::with_default_edges(std::map<NodeRole, std::string> nodes) {
  InferenceGraph g;
  g.nodes = std::move(nodes);
  g.edges = default_edge_template();
  return g;
}

std::string label_name(Label l) {
  return l == Label::strengthens ? "strengthens" : "weakens";
}

std::optional<Label> parse_label(std::string_view text) {
  if (text == "strengthens" || text == "strengthener") return Label::strengthens;
  if (text == "weakens" || text == "weakener") return Label::weakens;
  return std::nullopt;
}

std::string Violation::render() const {
  switch (kind) {
    case Kind::MissingRole: return "MissingRole(" + detail + ")";
    case Kind::EmptyLabel: return "EmptyLabel(" + detail + ")";
    case Kind::SelfEdge: return "SelfEdge(" + detail + ")";
    case Kind::DuplicateEdge: return "DuplicateEdge(" + detail + ")";
  }
  return detail;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_space = true;  // drops leading whitespace
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space) out.push_back(' ');
      in_space = true;
    } else {
      out.push_back(c);
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

InferenceGraph parse_graph(std::string_view text) {
  std::map<NodeRole, std::string> nodes;
  size_t i = 0;
  const size_t n = text.size();

  auto skip_ws = [&] {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };

  skip_ws();
  while (i < n) {
    if (text[i] != '[') {
      // Text outside any [ROLE] segment.
      size_t end = i;
      while (end < n && !std::isspace(static_cast<unsigned char>(text[end])) &&
             text[end] != '[') {
        ++end;
      }
      throw ParseError("UnknownTag(" + std::string(text.substr(i, end - i)) + ")");
    }
    size_t close = text.find(']', i);
    if (close == std::string_view::npos) {
      throw ParseError("UnknownTag(" + std::string(text.substr(i)) + ")");
    }
    std::string_view tag = text.substr(i + 1, close - i - 1);
    auto role = parse_role(tag);
    if (!role) {
      throw ParseError("UnknownTag([" + std::string(tag) + "])");
    }
    i = close + 1;
    size_t label_start = i;
    while (i < n && text[i] != '[') ++i;
    std::string label = normalize_whitespace(text.substr(label_start, i - label_start));
    if (label.empty()) {
      throw ParseError("EmptyLabel(" + role_tag(*role) + ")");
    }
    if (nodes.contains(*role)) {
      throw ParseError("DuplicateRole(" + role_tag(*role) + ")");
    }
    nodes.emplace(*role, std::move(label));
  }

  for (NodeRole r : kAllRoles) {
    if (!nodes.contains(r)) {
      throw ParseError("MissingRole(" + role_tag(r) + ")");
    }
  }
  return InferenceGraph::with_default_edges(std::move(nodes));
}

std::string serialize_graph(const InferenceGraph& g) {
  std::string out;
  for (NodeRole r : kAllRoles) {
    if (!out.empty()) out.push_back(' ');
    out += "[" + role_tag(r) + "] " + g.label(r);
  }
  return out;
}

std::vector<Violation> validate_graph(const InferenceGraph& g) {
  std::vector<Violation> out;
  for (NodeRole r : kAllRoles) {
    auto it = g.nodes.find(r);
    if (it == g.nodes.end()) {
      out.push_back({Violation::Kind::MissingRole, role_tag(r)});
    } else if (normalize_whitespace(it->second).empty()) {
      out.push_back({Violation::Kind::EmptyLabel, role_tag(r)});
    }
  }
  std::set<std::pair<NodeRole, NodeRole>> seen;
  for (const Edge& e : g.edges) {
    if (e.src == e.dst) {
      out.push_back({Violation::Kind::SelfEdge, role_tag(e.src)});
    }
    auto key = std::make_pair(e.src, e.dst);
    if (seen.contains(key)) {
      out.push_back({Violation::Kind::DuplicateEdge,
                     role_tag(e.src) + "," + role_tag(e.dst)});
    }
    seen.insert(key);
  }
  return out;
}

}  // namespace definf
