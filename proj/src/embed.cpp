#include "definf/embed.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "definf/errors.hpp"
#include "definf/feedback.hpp"

namespace definf {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

double EmbedderConfig::effective_scale() const {
  return scale > 0.0 ? scale : 1.0 / std::sqrt(static_cast<double>(d));
}

Vec embed_text(std::string_view text, const EmbedderConfig& cfg) {
  if (cfg.d < 2) throw Error("embedding dimension must be >= 2");
  if (cfg.n_hash < 1) throw Error("n_hash must be >= 1");
  Vec v(static_cast<size_t>(cfg.d), 0.0);
  const double s = cfg.effective_scale();
  bool any = false;
  for (const auto& tok : tokenize(text)) {
    any = true;
    const std::uint64_t th = fnv1a64(tok);
    for (int j = 0; j < cfg.n_hash; ++j) {
      std::uint64_t idx_h = splitmix64(th ^ splitmix64(cfg.seed + 2 * static_cast<std::uint64_t>(j)));
      std::uint64_t sign_h = splitmix64(th ^ splitmix64(cfg.seed + 2 * static_cast<std::uint64_t>(j) + 1));
      size_t idx = static_cast<size_t>(idx_h % static_cast<std::uint64_t>(cfg.d));
      v[idx] += (sign_h & 1) ? s : -s;
    }
  }
  if (!any) return v;  // zero vector for empty text
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0.0) {
    for (double& x : v) x /= norm;
  }
  return v;
}

Vec embed_query(const DefeasibleQuery& q, const EmbedderConfig& cfg) {
  return embed_text(q.premise + " | " + q.hypothesis + " | " + q.update, cfg);
}

std::vector<Vec> embed_nodes(const InferenceGraph& g, std::span<const NodeRole> roles,
                             const EmbedderConfig& cfg) {
  std::vector<Vec> rows;
  rows.reserve(roles.size());
  for (NodeRole r : roles) rows.push_back(embed_text(g.label(r), cfg));
  return rows;
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingError("cannot open embedding file: " + path);
  std::string header;
  if (!std::getline(in, header) || header.rfind("d=", 0) != 0) {
    throw EmbeddingError("embedding file must start with d=<int>: " + path);
  }
  EmbeddingTable t;
  try {
    t.d_ = std::stoi(header.substr(2));
  } catch (const std::exception&) {
    throw EmbeddingError("bad dimension header: " + header);
  }
  if (t.d_ < 1) throw EmbeddingError("bad dimension header: " + header);

  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw EmbeddingError("line " + std::to_string(line_no) + ": missing tab separator");
    }
    std::string key = line.substr(0, tab);
    Vec values;
    std::istringstream vs(line.substr(tab + 1));
    double x;
    while (vs >> x) values.push_back(x);
    if (static_cast<int>(values.size()) != t.d_) {
      throw EmbeddingError("DimensionMismatch(line " + std::to_string(line_no) + ": got " +
                           std::to_string(values.size()) + ", header d=" +
                           std::to_string(t.d_) + ")");
    }
    t.table_[std::move(key)] = std::move(values);
  }
  return t;
}

const Vec& EmbeddingTable::lookup(const std::string& text) const {
  auto it = table_.find(text);
  if (it == table_.end()) throw EmbeddingError("MissingKey(" + text + ")");
  return it->second;
}

}  // namespace definf
