#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "definf/graph.hpp"

namespace definf {

using Vec = std::vector<double>;

// 64-bit FNV-1a over the bytes of `data`.
std::uint64_t fnv1a64(std::string_view data);

// splitmix64 finalizer; used to derive per-hash-function seeds.
std::uint64_t splitmix64(std::uint64_t x);

// Frozen feature-hashing text embedder. scale <= 0 means 1/sqrt(d).
struct EmbedderConfig {
  int d = 64;
  int n_hash = 2;
  std::uint64_t seed = 0;
  double scale = 0.0;

  double effective_scale() const;
};

// Hashes each lowercase token into n_hash signed buckets and L2-normalizes
// the sum. Empty text gives the zero vector. Deterministic in (text, cfg):
// bucket and sign come from FNV-1a mixed with splitmix64 per hash index.
Vec embed_text(std::string_view text, const EmbedderConfig& cfg);

// Embeds "P | H | S".
Vec embed_query(const DefeasibleQuery& q, const EmbedderConfig& cfg);

// One row per requested role, in the given order.
std::vector<Vec> embed_nodes(const InferenceGraph& g, std::span<const NodeRole> roles,
                             const EmbedderConfig& cfg);

// Exact-match lookup table loaded from the external embedding format:
// first line "d=<int>", then "text<TAB>v1 v2 ... vd" rows.
class EmbeddingTable {
 public:
  static EmbeddingTable load(const std::string& path);

  int dim() const { return d_; }
  std::size_t size() const { return table_.size(); }
  // Throws EmbeddingError("MissingKey(...)") on a lookup miss.
  const Vec& lookup(const std::string& text) const;

 private:
  int d_ = 0;
  std::unordered_map<std::string, Vec> table_;
};

}  // namespace definf
