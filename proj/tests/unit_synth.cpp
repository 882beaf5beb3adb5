#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "definf/feedback.hpp"
#include "definf/stats.hpp"
#include "definf/synth.hpp"

using namespace definf;

namespace {

bool contains_token(const std::string& text, const std::string& tok) {
  for (const std::string& t : tokenize(text)) {
    if (t == tok) return true;
  }
  return false;
}

std::string corpus_fingerprint(const Corpus& c) {
  std::ostringstream out;
  for (const Example& ex : c) {
    out << query_to_json(ex.query) << "\n" << serialize_graph(ex.graph) << "\n";
  }
  return out.str();
}

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/definf_synth_XXXXXX";
    path = mkdtemp(tmpl);
  }
  ~TempDir() {
    if (std::system(("rm -rf " + path).c_str()) != 0) path.clear();
  }
};

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("config validation") {
  SynthConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  SynthConfig bad = cfg;
  bad.n_examples = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = cfg;
  bad.signal_strength = 0.4;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = cfg;
  bad.signal_strength = 1.01;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = cfg;
  bad.duplicate_rate = -0.1;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = cfg;
  bad.duplicate_rate = 1.5;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad = cfg;
  bad.vocab_size = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("generation is deterministic and prefix-stable") {
  SynthConfig cfg;
  cfg.n_examples = 40;
  cfg.seed = 7;
  cfg.duplicate_rate = 0.3;
  Corpus a = generate(cfg);
  Corpus b = generate(cfg);
  CHECK(corpus_fingerprint(a) == corpus_fingerprint(b));

  // Each example draws from its own stream, so a longer run shares its
  // prefix with a shorter one.
  cfg.n_examples = 60;
  Corpus c = generate(cfg);
  c.resize(40);
  CHECK(corpus_fingerprint(a) == corpus_fingerprint(c));

  cfg.seed = 8;
  cfg.n_examples = 40;
  Corpus d = generate(cfg);
  CHECK(corpus_fingerprint(a) != corpus_fingerprint(d));
}

TEST_CASE("every generated graph is structurally valid and labeled") {
  SynthConfig cfg;
  cfg.n_examples = 128;
  cfg.seed = 3;
  cfg.duplicate_rate = 0.5;
  for (const Example& ex : generate(cfg)) {
    CHECK(validate_graph(ex.graph).empty());
    CHECK(ex.graph.edges.size() == 10);
    REQUIRE(ex.query.label.has_value());
  }
}

TEST_CASE("labels are roughly balanced") {
  SynthConfig cfg;
  cfg.n_examples = 512;
  cfg.seed = 11;
  int strengthens = 0;
  for (const Example& ex : generate(cfg)) {
    if (ex.query.label == Label::strengthens) ++strengthens;
  }
  CHECK(strengthens >= 512 * 45 / 100);
  CHECK(strengthens <= 512 * 55 / 100);
}

TEST_CASE("at full strength the cue token encodes the label exactly") {
  SynthConfig cfg;
  cfg.n_examples = 256;
  cfg.seed = 5;
  cfg.signal_strength = 1.0;
  cfg.duplicate_rate = 0.0;
  for (const Example& ex : generate(cfg)) {
    const bool cue = contains_token(ex.graph.label(cfg.signal_role), kCueToken);
    CHECK(cue == (ex.query.label == Label::strengthens));
    // The cue never leaks into the query or the other roles.
    CHECK(!contains_token(ex.query.premise, kCueToken));
    CHECK(!contains_token(ex.query.hypothesis, kCueToken));
    CHECK(!contains_token(ex.query.update, kCueToken));
    for (NodeRole r : kAllRoles) {
      if (r != cfg.signal_role) CHECK(!contains_token(ex.graph.label(r), kCueToken));
    }
  }
}

TEST_CASE("a weaker signal still predicts the label most of the time") {
  SynthConfig cfg;
  cfg.n_examples = 512;
  cfg.seed = 13;
  cfg.signal_strength = 0.9;
  int agree = 0;
  Corpus corpus = generate(cfg);
  for (const Example& ex : corpus) {
    const bool cue = contains_token(ex.graph.label(cfg.signal_role), kCueToken);
    if (cue == (ex.query.label == Label::strengthens)) ++agree;
  }
  const double acc = static_cast<double>(agree) / static_cast<double>(corpus.size());
  CHECK(acc > 0.85);
  CHECK(acc < 0.95);
}

TEST_CASE("duplicate rate drives the repetition percentage") {
  SynthConfig cfg;
  cfg.n_examples = 64;
  cfg.seed = 17;
  OverlapConfig ocfg = OverlapConfig::defaults();

  cfg.duplicate_rate = 1.0;
  std::vector<OverlapReport> dirty;
  for (const Example& ex : generate(cfg)) dirty.push_back(detect_overlaps(ex.graph, ocfg));
  RepetitionMetrics m1 = repetition_metrics(dirty);
  CHECK(m1.pct_with_repetition == 100.0);
  CHECK(m1.per_graph >= 2.0);  // every flagged graph has at least one pair

  cfg.duplicate_rate = 0.0;
  std::vector<OverlapReport> clean;
  for (const Example& ex : generate(cfg)) clean.push_back(detect_overlaps(ex.graph, ocfg));
  RepetitionMetrics m0 = repetition_metrics(clean);
  CHECK(m0.pct_with_repetition == 0.0);
  CHECK(m0.per_graph == 0.0);
}

TEST_CASE("the compiled-in phrase bank matches the shipped asset") {
  std::ifstream in(std::string(DEFINF_SOURCE_DIR) + "/assets/phrase_bank_v1.txt");
  REQUIRE(in.good());
  std::ostringstream buf;
  buf << in.rdbuf();
  CHECK(phrase_bank_asset_text() == buf.str());
}

TEST_CASE("phrase bank phrases avoid the polarity lexicon") {
  OverlapConfig ocfg = OverlapConfig::defaults();
  for (const auto& [role, phrases] : phrase_bank()) {
    CHECK(phrases.size() == 4);
    for (const std::string& p : phrases) {
      NodeSignature sig = normalize_node(p, ocfg);
      CHECK(sig.polarity.empty());
      CHECK(!sig.content.empty());
    }
  }
}

TEST_CASE("cross-role phrases stay below the overlap threshold") {
  OverlapConfig ocfg = OverlapConfig::defaults();
  std::vector<NodeRole> roles;
  for (const auto& [role, phrases] : phrase_bank()) roles.push_back(role);
  for (std::size_t i = 0; i < roles.size(); ++i) {
    for (std::size_t j = i + 1; j < roles.size(); ++j) {
      for (const std::string& a : phrase_bank().at(roles[i])) {
        for (const std::string& b : phrase_bank().at(roles[j])) {
          // Jaccard headroom: even two shared filler tokens added to each
          // side must not push a pair over the 0.8 threshold.
          NodeSignature sa = normalize_node(a + " tok1 tok2", ocfg);
          NodeSignature sb = normalize_node(b + " tok1 tok2", ocfg);
          CHECK(multiset_jaccard(sa.content, sb.content) < ocfg.jaccard_threshold);
        }
      }
    }
  }
}

TEST_CASE("dataset files round-trip") {
  TempDir dir;
  SynthConfig cfg;
  cfg.n_examples = 12;
  cfg.seed = 23;
  cfg.duplicate_rate = 0.25;
  Corpus corpus = generate(cfg);
  save_dataset(corpus, dir.path + "/sample");
  Corpus loaded = load_dataset(dir.path + "/sample.queries.jsonl", dir.path + "/sample.graphs.txt");
  REQUIRE(loaded.size() == corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(loaded[i].query == corpus[i].query);
    CHECK(serialize_graph(loaded[i].graph) == serialize_graph(corpus[i].graph));
  }
}

TEST_CASE("dataset loading reports aligned line numbers") {
  TempDir dir;
  const std::string q = dir.path + "/bad.queries.jsonl";
  const std::string g = dir.path + "/bad.graphs.txt";
  SynthConfig cfg;
  cfg.n_examples = 3;
  Corpus corpus = generate(cfg);
  save_dataset(corpus, dir.path + "/bad");

  // Corrupt the second graph line.
  {
    std::ifstream in(g);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    std::istringstream lines(text);
    std::string l1, l2, l3;
    std::getline(lines, l1);
    std::getline(lines, l2);
    std::getline(lines, l3);
    std::ofstream out(g);
    out << l1 << "\n[C+] broken only\n" << l3 << "\n";
  }
  try {
    load_dataset(q, g);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }

  // Drop one query line entirely.
  save_dataset(corpus, dir.path + "/bad");
  {
    std::ifstream in(q);
    std::string l1;
    std::getline(in, l1);
    std::string rest;
    std::getline(in, rest);
    std::ofstream out(q);
    out << l1 << "\n" << rest << "\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset(q, g), "LineCountMismatch(queries=2, graphs=3)", DataError);
}

TEST_CASE("query json round-trip and label handling") {
  DefeasibleQuery q = {"a premise", "a \"quoted\" hypothesis", "an update", Label::weakens};
  CHECK(query_from_json(query_to_json(q)) == q);
  DefeasibleQuery unlabeled = {"p", "h", "u", std::nullopt};
  CHECK(query_from_json(query_to_json(unlabeled)) == unlabeled);
  CHECK_THROWS_AS(query_from_json("{\"premise\":\"p\",\"hypothesis\":\"h\",\"update\":\"u\","
                                  "\"label\":\"perhaps\"}"),
                  DataError);
  CHECK_THROWS_AS(query_from_json("not json"), DataError);
}

TEST_CASE("splitting is deterministic and exhaustive") {
  SynthConfig cfg;
  cfg.n_examples = 20;
  cfg.seed = 29;
  Corpus corpus = generate(cfg);
  SplitResult s1 = split_dataset(corpus, 0.25, 31);
  SplitResult s2 = split_dataset(corpus, 0.25, 31);
  CHECK(s1.dev.size() == 5);
  CHECK(s1.train.size() == 15);
  CHECK(corpus_fingerprint(s1.train) == corpus_fingerprint(s2.train));
  CHECK(corpus_fingerprint(s1.dev) == corpus_fingerprint(s2.dev));

  // Every example lands in exactly one side.
  std::multiset<std::string> all;
  for (const Example& ex : corpus) all.insert(query_to_json(ex.query));
  std::multiset<std::string> seen;
  for (const Example& ex : s1.train) seen.insert(query_to_json(ex.query));
  for (const Example& ex : s1.dev) seen.insert(query_to_json(ex.query));
  CHECK(all == seen);

  SplitResult s3 = split_dataset(corpus, 0.25, 32);
  CHECK(corpus_fingerprint(s3.dev) != corpus_fingerprint(s1.dev));

  // A tiny fraction still yields one dev example.
  SplitResult s4 = split_dataset(corpus, 0.01, 31);
  CHECK(s4.dev.size() == 1);
}

}  // TEST_SUITE
