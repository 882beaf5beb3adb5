#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "definf/embed.hpp"
#include "definf/graph.hpp"
#include "definf/tape.hpp"
#include "definf/trace.hpp"

namespace definf {

enum class EncoderKind { moe, gcn, str, baseline };

std::string encoder_kind_name(EncoderKind k);
EncoderKind parse_encoder_kind(const std::string& s);

// Layout of the text fed to the string encoder: premise | hypothesis |
// node labels | update, or the node labels alone.
enum class StrLayout { PH_G_S, nodes_only };

std::string str_layout_name(StrLayout l);
StrLayout parse_str_layout(const std::string& s);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::moe;
  int d = 64;
  std::vector<NodeRole> moe_roles = {NodeRole::Cplus, NodeRole::Cminus, NodeRole::Sminus,
                                     NodeRole::Mplus, NodeRole::Mminus};
  int gcn_layers = 2;
  int gcn_hidden = 0;  // 0 means d
  int attn_heads = 1;
  int attn_dim = 256;  // clamped to <= 8*d
  double dropout = 0.1;
  StrLayout str_layout = StrLayout::PH_G_S;

  int hidden() const { return gcn_hidden > 0 ? gcn_hidden : d; }
  int attention_dim() const { return attn_dim <= 8 * d ? attn_dim : 8 * d; }
  int head_dim() const { return attention_dim() / attn_heads; }
  void validate() const;  // throws Error on an invariant breach
};

// Xavier-uniform weights, zero biases; deterministic in the seed.
ParamRegistry init_params(const EncoderConfig& cfg, std::uint64_t seed);

struct MoeOut {
  Tape::Id logits;  // 2-vector
  GateTrace trace;
};

// node_embeds follow cfg.moe_roles order, each a d-vector.
MoeOut moe_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                        const std::vector<Vec>& node_embeds, const Vec& query_embed,
                        bool training = false, std::mt19937_64* dropout_rng = nullptr);
std::pair<Mat, GateTrace> moe_forward(const EncoderConfig& cfg, ParamRegistry& reg,
                                      const std::vector<Vec>& node_embeds,
                                      const Vec& query_embed);

struct GcnOut {
  Tape::Id logits;    // 2-vector
  Mat attention;      // heads x n
};

// Neighbor lists must be symmetric; any node count n >= 1 is accepted.
GcnOut gcn_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                        const std::vector<Vec>& node_embeds,
                        const std::vector<std::vector<int>>& adjacency, const Vec& query_embed,
                        bool training = false, std::mt19937_64* dropout_rng = nullptr);
std::pair<Mat, Mat> gcn_forward(const EncoderConfig& cfg, ParamRegistry& reg,
                                const std::vector<Vec>& node_embeds,
                                const std::vector<std::vector<int>>& adjacency,
                                const Vec& query_embed);

// Undirected, deduplicated neighbor lists over the 8 template roles in
// canonical order; edge polarity is dropped.
std::vector<std::vector<int>> adjacency_from_graph(const InferenceGraph& g);

Tape::Id str_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                          const DefeasibleQuery& q, const InferenceGraph& g,
                          const EmbedderConfig& emb, bool training = false,
                          std::mt19937_64* dropout_rng = nullptr);
Mat str_forward(const EncoderConfig& cfg, ParamRegistry& reg, const DefeasibleQuery& q,
                const InferenceGraph& g, const EmbedderConfig& emb);
std::string str_encoding_text(const EncoderConfig& cfg, const DefeasibleQuery& q,
                              const InferenceGraph& g);

Tape::Id baseline_forward_tape(Tape& t, const EncoderConfig& cfg, ParamRegistry& reg,
                               const DefeasibleQuery& q, const EmbedderConfig& emb,
                               bool training = false, std::mt19937_64* dropout_rng = nullptr);
Mat baseline_forward(const EncoderConfig& cfg, ParamRegistry& reg, const DefeasibleQuery& q,
                     const EmbedderConfig& emb);

struct EncoderModel {
  EncoderConfig cfg;
  EmbedderConfig embedder;
  std::uint64_t seed = 0;
  ParamRegistry params;
};

EncoderModel make_model(const EncoderConfig& cfg, const EmbedderConfig& emb, std::uint64_t seed);

struct ForwardResult {
  Tape::Id logits;
  std::optional<GateTrace> trace;  // moe only
  std::optional<Mat> attention;    // gcn only
};

// Embeds the query/graph with the model's frozen embedder and dispatches on
// the configured encoder kind.
ForwardResult model_forward(Tape& t, EncoderModel& m, const DefeasibleQuery& q,
                            const InferenceGraph& g, bool training = false,
                            std::mt19937_64* dropout_rng = nullptr);

}  // namespace definf
