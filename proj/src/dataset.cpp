#include "definf/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "definf/rng.hpp"

namespace definf {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  // A trailing newline is not an extra record.
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string query_to_json(const DefeasibleQuery& q) {
  nlohmann::json j;
  j["premise"] = q.premise;
  j["hypothesis"] = q.hypothesis;
  j["update"] = q.update;
  if (q.label) j["label"] = label_name(*q.label);
  return j.dump();
}

DefeasibleQuery query_from_json(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("bad query JSON: ") + e.what());
  }
  DefeasibleQuery q;
  try {
    q.premise = j.at("premise").get<std::string>();
    q.hypothesis = j.at("hypothesis").get<std::string>();
    q.update = j.at("update").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("query JSON missing field: ") + e.what());
  }
  if (j.contains("label")) {
    const std::string raw = j.at("label").get<std::string>();
    q.label = parse_label(raw);
    if (!q.label) throw DataError("unknown label: " + raw);
  }
  return q;
}

Corpus load_dataset(const std::string& queries_path, const std::string& graphs_path) {
  auto qlines = read_lines(queries_path);
  auto glines = read_lines(graphs_path);
  if (qlines.size() != glines.size()) {
    throw DataError("LineCountMismatch(queries=" + std::to_string(qlines.size()) +
                    ", graphs=" + std::to_string(glines.size()) + ")");
  }
  Corpus corpus;
  corpus.reserve(qlines.size());
  for (std::size_t i = 0; i < qlines.size(); ++i) {
    const std::string where = "line " + std::to_string(i + 1) + ": ";
    Example ex;
    try {
      ex.query = query_from_json(qlines[i]);
      ex.graph = parse_graph(glines[i]);
    } catch (const Error& e) {
      throw DataError(where + e.what());
    }
    auto violations = validate_graph(ex.graph);
    if (!violations.empty()) throw DataError(where + violations.front().render());
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

void save_dataset(const Corpus& corpus, const std::string& prefix) {
  std::ofstream qout(prefix + ".queries.jsonl");
  std::ofstream gout(prefix + ".graphs.txt");
  if (!qout || !gout) throw DataError("cannot write dataset files with prefix " + prefix);
  for (const Example& ex : corpus) {
    qout << query_to_json(ex.query) << "\n";
    gout << serialize_graph(ex.graph) << "\n";
  }
}

SplitResult split_dataset(const Corpus& corpus, double dev_frac, std::uint64_t seed) {
  if (dev_frac < 0.0 || dev_frac >= 1.0) throw DataError("dev_frac must be in [0,1)");
  std::vector<std::size_t> idx(corpus.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 g(seed);
  rng::shuffle(idx, g);
  std::size_t n_dev = static_cast<std::size_t>(std::lround(dev_frac * static_cast<double>(corpus.size())));
  if (dev_frac > 0.0 && n_dev == 0 && !corpus.empty()) n_dev = 1;
  SplitResult out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_dev ? out.dev : out.train).push_back(corpus[idx[i]]);
  }
  return out;
}

}  // namespace definf
