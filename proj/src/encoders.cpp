#include "definf/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "definf/rng.hpp"

namespace definf {

std::string encoder_kind_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::moe: return "moe";
    case EncoderKind::gcn: return "gcn";
    case EncoderKind::str: return "str";
    case EncoderKind::baseline: return "baseline";
  }
  throw Error("unreachable encoder kind");
}

EncoderKind parse_encoder_kind(const std::string& s) {
  if (s == "moe") return EncoderKind::moe;
  if (s == "gcn") return EncoderKind::gcn;
  if (s == "str") return EncoderKind::str;
  if (s == "baseline") return EncoderKind::baseline;
  throw Error("unknown encoder kind: " + s);
}

std::string str_layout_name(StrLayout l) {
  return l == StrLayout::PH_G_S ? "PH_G_S" : "nodes_only";
}

StrLayout parse_str_layout(const std::string& s) {
  if (s == "PH_G_S") return StrLayout::PH_G_S;
  if (s == "nodes_only") return StrLayout::nodes_only;
  throw Error("unknown str layout: " + s);
}

void EncoderConfig::validate() const {
  if (d < 1) throw Error("encoder d must be >= 1");
  if (gcn_layers < 1) throw Error("gcn_layers must be >= 1");
  if (attn_heads < 1) throw Error("attn_heads must be >= 1");
  if (attn_dim < 1) throw Error("attn_dim must be >= 1");
  if (attention_dim() % attn_heads != 0) {
    throw Error("attention dim " + std::to_string(attention_dim()) +
                " not divisible by " + std::to_string(attn_heads) + " heads");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw Error("dropout must be in [0,1)");
  if (kind == EncoderKind::moe) {
    if (moe_roles.size() != 5) throw Error("moe_roles must list exactly 5 roles");
    std::set<NodeRole> seen(moe_roles.begin(), moe_roles.end());
    if (seen.size() != moe_roles.size()) throw Error("moe_roles must be distinct");
  }
}

namespace {

Mat xavier(int rows, int cols, std::mt19937_64& g) {
  Mat m(rows, cols);
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.a) v = rng::uniform(g, -a, a);
  return m;
}

void add_linear(ParamRegistry& reg, const std::string& prefix, int out, int in,
                std::mt19937_64& g, bool bias = true) {
  reg.add(prefix + ".W", xavier(out, in, g));
  if (bias) reg.add(prefix + ".b", Mat(out, 1));
}

bool want_dropout(const EncoderConfig& cfg, bool training, std::mt19937_64* rng) {
  return training && rng != nullptr && cfg.dropout > 0.0;
}

}  // namespace

ParamRegistry init_params(const EncoderConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamRegistry reg;
  std::mt19937_64 g(seed);
  const int d = cfg.d;
  switch (cfg.kind) {
    case EncoderKind::moe: {
      add_linear(reg, "moe.gate_v", 5, 5 * d, g);
      for (NodeRole r : cfg.moe_roles) {
        add_linear(reg, "moe.expert." + std::string(role_tag(r)), d, d, g);
      }
      add_linear(reg, "moe.expert_G", d, d, g);
      add_linear(reg, "moe.expert_Q", d, d, g);
      add_linear(reg, "moe.gate_gx", 2, 2 * d, g);
      add_linear(reg, "moe.cls", 2, d, g);
      break;
    }
    case EncoderKind::gcn: {
      const int k = cfg.hidden();
      const int a = cfg.head_dim();
      reg.add("gcn.proj", xavier(k, d, g));
      for (int l = 0; l < cfg.gcn_layers; ++l) {
        reg.add("gcn.layer" + std::to_string(l) + ".W", xavier(k, k, g));
      }
      for (int h = 0; h < cfg.attn_heads; ++h) {
        const std::string p = "gcn.attn.head" + std::to_string(h);
        reg.add(p + ".Wq", xavier(a, d, g));
        reg.add(p + ".Wk", xavier(a, k, g));
        reg.add(p + ".Wv", xavier(a, k, g));
      }
      reg.add("gcn.attn.Wo", xavier(k, cfg.attn_heads * a, g));
      reg.add("gcn.out.W", xavier(2, k + d, g));
      break;
    }
    case EncoderKind::str:
      add_linear(reg, "str.cls", 2, d, g);
      break;
    case EncoderKind::baseline:
      add_linear(reg, "baseline.cls", 2, d, g);
      break;
  }
  return reg;
}

namespace {

Tape::Id linear_node(Tape& t, ParamRegistry& reg, const std::string& prefix, Tape::Id x) {
  Tape::Id W = t.param(reg.at(prefix + ".W"));
  Tape::Id b = t.param(reg.at(prefix + ".b"));
  return t.linear(W, x, b);
}

}  // namespace

MoeOut moe_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                        const std::vector<Vec>& node_embeds, const Vec& query_embed,
                        bool training, std::mt19937_64* dropout_rng) {
  if (node_embeds.size() != cfg.moe_roles.size()) {
    throw ShapeError("moe_forward: got " + std::to_string(node_embeds.size()) +
                     " node embeddings, expected " + std::to_string(cfg.moe_roles.size()));
  }
  std::vector<Tape::Id> xs;
  for (const Vec& v : node_embeds) {
    if (static_cast<int>(v.size()) != cfg.d) throw ShapeError("moe_forward: node embedding dim mismatch");
    xs.push_back(t.input(Mat::vec(v)));
  }
  if (static_cast<int>(query_embed.size()) != cfg.d) throw ShapeError("moe_forward: query embedding dim mismatch");
  Tape::Id xq = t.input(Mat::vec(query_embed));

  Tape::Id p_v = t.softmax(linear_node(t, reg, "moe.gate_v", t.concat(xs)));
  std::vector<Tape::Id> experts;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    experts.push_back(linear_node(t, reg, "moe.expert." + std::string(role_tag(cfg.moe_roles[i])), xs[i]));
  }
  Tape::Id h_G = t.mix(p_v, experts);

  Tape::Id e_G = linear_node(t, reg, "moe.expert_G", h_G);
  Tape::Id e_Q = linear_node(t, reg, "moe.expert_Q", xq);
  Tape::Id p_gx = t.softmax(linear_node(t, reg, "moe.gate_gx", t.concat({h_G, xq})));
  Tape::Id h_y = t.mix(p_gx, {e_G, e_Q});
  if (want_dropout(cfg, training, dropout_rng)) h_y = t.dropout(h_y, cfg.dropout, *dropout_rng);

  MoeOut out;
  out.logits = linear_node(t, reg, "moe.cls", h_y);
  const Mat& pv = t.value(p_v);
  const Mat& pg = t.value(p_gx);
  for (int i = 0; i < 5; ++i) out.trace.moe_v[static_cast<std::size_t>(i)] = pv[static_cast<std::size_t>(i)];
  out.trace.moe_gx = {pg[0], pg[1]};
  return out;
}

std::pair<Mat, GateTrace> moe_forward(const EncoderConfig& cfg, ParamRegistry& reg,
                                      const std::vector<Vec>& node_embeds,
                                      const Vec& query_embed) {
  Tape t;
  MoeOut out = moe_forward_tape(t, cfg, reg, node_embeds, query_embed);
  return {t.value(out.logits), out.trace};
}

GcnOut gcn_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                        const std::vector<Vec>& node_embeds,
                        const std::vector<std::vector<int>>& adjacency, const Vec& query_embed,
                        bool training, std::mt19937_64* dropout_rng) {
  const int n = static_cast<int>(node_embeds.size());
  if (n < 1) throw ShapeError("gcn_forward: empty graph");
  if (adjacency.size() != node_embeds.size()) {
    throw ShapeError("gcn_forward: adjacency size " + std::to_string(adjacency.size()) +
                     " vs " + std::to_string(n) + " nodes");
  }
  for (const auto& nb : adjacency) {
    for (int w : nb) {
      if (w < 0 || w >= n) throw ShapeError("gcn_forward: neighbor index out of range");
    }
  }
  if (static_cast<int>(query_embed.size()) != cfg.d) throw ShapeError("gcn_forward: query embedding dim mismatch");

  Tape::Id proj = t.param(reg.at("gcn.proj"));
  std::vector<Tape::Id> h;
  for (const Vec& v : node_embeds) {
    if (static_cast<int>(v.size()) != cfg.d) throw ShapeError("gcn_forward: node embedding dim mismatch");
    h.push_back(t.matvec(proj, t.input(Mat::vec(v))));
  }
  for (int l = 0; l < cfg.gcn_layers; ++l) {
    Tape::Id W = t.param(reg.at("gcn.layer" + std::to_string(l) + ".W"));
    std::vector<Tape::Id> next;
    for (int v = 0; v < n; ++v) {
      Tape::Id self = t.matvec(W, h[static_cast<std::size_t>(v)]);
      if (adjacency[static_cast<std::size_t>(v)].empty()) {
        next.push_back(t.relu(self));
      } else {
        std::vector<Tape::Id> nb;
        for (int w : adjacency[static_cast<std::size_t>(v)]) nb.push_back(h[static_cast<std::size_t>(w)]);
        Tape::Id agg = t.matvec(W, t.mean(nb));
        next.push_back(t.relu(t.add(agg, self)));
      }
    }
    h = std::move(next);
  }

  Tape::Id xq = t.input(Mat::vec(query_embed));
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d));
  std::vector<Tape::Id> heads;
  GcnOut out;
  out.attention = Mat(cfg.attn_heads, n);
  for (int i = 0; i < cfg.attn_heads; ++i) {
    const std::string p = "gcn.attn.head" + std::to_string(i);
    Tape::Id q = t.matvec(t.param(reg.at(p + ".Wq")), xq);
    std::vector<Tape::Id> keys, vals;
    for (int v = 0; v < n; ++v) {
      keys.push_back(t.matvec(t.param(reg.at(p + ".Wk")), h[static_cast<std::size_t>(v)]));
      vals.push_back(t.matvec(t.param(reg.at(p + ".Wv")), h[static_cast<std::size_t>(v)]));
    }
    Tape::Id a = t.softmax(t.dot_scores(q, keys, scale));
    heads.push_back(t.mix(a, vals));
    const Mat& av = t.value(a);
    for (int v = 0; v < n; ++v) out.attention(i, v) = av[static_cast<std::size_t>(v)];
  }
  Tape::Id h_G = t.matvec(t.param(reg.at("gcn.attn.Wo")), t.concat(heads));
  Tape::Id joint = t.concat({h_G, xq});
  if (want_dropout(cfg, training, dropout_rng)) joint = t.dropout(joint, cfg.dropout, *dropout_rng);
  out.logits = t.matvec(t.param(reg.at("gcn.out.W")), joint);
  return out;
}

std::pair<Mat, Mat> gcn_forward(const EncoderConfig& cfg, ParamRegistry& reg,
                                const std::vector<Vec>& node_embeds,
                                const std::vector<std::vector<int>>& adjacency,
                                const Vec& query_embed) {
  Tape t;
  GcnOut out = gcn_forward_tape(t, cfg, reg, node_embeds, adjacency, query_embed);
  return {t.value(out.logits), out.attention};
}

std::vector<std::vector<int>> adjacency_from_graph(const InferenceGraph& g) {
  std::vector<std::set<int>> nb(kAllRoles.size());
  auto index_of = [](NodeRole r) {
    for (std::size_t i = 0; i < kAllRoles.size(); ++i) {
      if (kAllRoles[i] == r) return static_cast<int>(i);
    }
    throw Error("unreachable role");
  };
  for (const Edge& e : g.edges) {
    const int a = index_of(e.src);
    const int b = index_of(e.dst);
    if (a == b) continue;
    nb[static_cast<std::size_t>(a)].insert(b);
    nb[static_cast<std::size_t>(b)].insert(a);
  }
  std::vector<std::vector<int>> out(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) out[i].assign(nb[i].begin(), nb[i].end());
  return out;
}

std::string str_encoding_text(const EncoderConfig& cfg, const DefeasibleQuery& q,
                              const InferenceGraph& g) {
  std::string nodes;
  for (NodeRole r : kAllRoles) {
    if (!nodes.empty()) nodes += " | ";
    nodes += g.label(r);
  }
  if (cfg.str_layout == StrLayout::nodes_only) return nodes;
  return q.premise + " | " + q.hypothesis + " | " + nodes + " | " + q.update;
}

Tape::Id str_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                          const DefeasibleQuery& q, const InferenceGraph& g,
                          const EmbedderConfig& emb, bool training, std::mt19937_64* dropout_rng) {
  auto violations = validate_graph(g);
  if (!violations.empty()) throw DataError("InvalidGraph: " + violations.front().render());
  Tape::Id x = t.input(Mat::vec(embed_text(str_encoding_text(cfg, q, g), emb)));
  if (want_dropout(cfg, training, dropout_rng)) x = t.dropout(x, cfg.dropout, *dropout_rng);
  return linear_node(t, reg, "str.cls", x);
}

Mat str_forward(const EncoderConfig& cfg, ParamRegistry& reg, const DefeasibleQuery& q,
                const InferenceGraph& g, const EmbedderConfig& emb) {
  Tape t;
  return t.value(str_forward_tape(t, cfg, reg, q, g, emb));
}

Tape::Id baseline_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                               const DefeasibleQuery& q, const EmbedderConfig& emb,
                               bool training, std::mt19937_64* dropout_rng) {
  Tape::Id x = t.input(Mat::vec(embed_query(q, emb)));
  if (want_dropout(cfg, training, dropout_rng)) x = t.dropout(x, cfg.dropout, *dropout_rng);
  return linear_node(t, reg, "baseline.cls", x);
}

Mat baseline_forward(const EncoderConfig& cfg, ParamRegistry& reg, const DefeasibleQuery& q,
                     const EmbedderConfig& emb) {
  Tape t;
  return t.value(baseline_forward_tape(t, cfg, reg, q, emb));
}

EncoderModel make_model(const EncoderConfig& cfg, const EmbedderConfig& emb, std::uint64_t seed) {
  EncoderModel m;
  m.cfg = cfg;
  m.embedder = emb;
  m.seed = seed;
  m.params = init_params(cfg, seed);
  return m;
}

ForwardResult model_forward(Tape& t, EncoderModel& m, const DefeasibleQuery& q,
                            const InferenceGraph& g, bool training,
                            std::mt19937_64* dropout_rng) {
  ForwardResult r;
  switch (m.cfg.kind) {
    case EncoderKind::moe: {
      auto nodes = embed_nodes(g, m.cfg.moe_roles, m.embedder);
      MoeOut out = moe_forward_tape(t, m.cfg, m.params, nodes, embed_query(q, m.embedder),
                                    training, dropout_rng);
      r.logits = out.logits;
      r.trace = out.trace;
      break;
    }
    case EncoderKind::gcn: {
      auto nodes = embed_nodes(g, kAllRoles, m.embedder);
      GcnOut out = gcn_forward_tape(t, m.cfg, m.params, nodes, adjacency_from_graph(g),
                                    embed_query(q, m.embedder), training, dropout_rng);
      r.logits = out.logits;
      r.attention = out.attention;
      break;
    }
    case EncoderKind::str:
      r.logits = str_forward_tape(t, m.cfg, m.params, q, g, m.embedder, training, dropout_rng);
      break;
    case EncoderKind::baseline:
      r.logits = baseline_forward_tape(t, m.cfg, m.params, q, m.embedder, training, dropout_rng);
      break;
  }
  return r;
}

}  // namespace definf
