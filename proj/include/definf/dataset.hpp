#pragma once

#include <string>
#include <vector>

#include "definf/graph.hpp"

namespace definf {

// One classification instance: a defeasible query (with gold label when
// known) aligned with its inference graph.
struct Example {
  DefeasibleQuery query;
  InferenceGraph graph;
};

using Corpus = std::vector<Example>;

// Reads a JSONL query file ({"premise","hypothesis","update","label"}) and a
// parallel file of linearized graphs, one per line.  Every graph is parsed
// and validated; errors cite the 1-based line number.  Unequal line counts
// raise DataError("LineCountMismatch(...)").
Corpus load_dataset(const std::string& queries_path, const std::string& graphs_path);

// Writes <prefix>.queries.jsonl and <prefix>.graphs.txt.
void save_dataset(const Corpus& corpus, const std::string& prefix);

std::string query_to_json(const DefeasibleQuery& q);
DefeasibleQuery query_from_json(const std::string& line);

// Deterministic split: shuffles indices with the seed, then takes
// round(dev_frac * n) examples for dev (at least 1 when 0 < dev_frac < 1).
struct SplitResult {
  Corpus train;
  Corpus dev;
};
SplitResult split_dataset(const Corpus& corpus, double dev_frac, std::uint64_t seed);

}  // namespace definf
