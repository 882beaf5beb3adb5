#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "definf/embed.hpp"

using namespace definf;

namespace {

double l2(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("embed") {

TEST_CASE("fnv1a64 matches published vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("splitmix64 matches the reference sequence") {
  // First three outputs of the reference generator seeded with 0.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafull);
  CHECK(splitmix64(0x9e3779b97f4a7c15ull) == 0x6e789e6aa1b965f4ull);
  CHECK(splitmix64(2 * 0x9e3779b97f4a7c15ull) == 0x06c45d188009454full);
}

TEST_CASE("embedding is deterministic and unit length") {
  EmbedderConfig cfg;
  cfg.d = 32;
  cfg.seed = 11;
  Vec a = embed_text("the cat sat on the mat", cfg);
  Vec b = embed_text("the cat sat on the mat", cfg);
  REQUIRE(a.size() == 32);
  CHECK(a == b);
  CHECK(l2(a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("different seeds give different embeddings") {
  EmbedderConfig c1;
  c1.d = 32;
  c1.seed = 1;
  EmbedderConfig c2 = c1;
  c2.seed = 2;
  CHECK(embed_text("a bird in the hand", c1) != embed_text("a bird in the hand", c2));
}

TEST_CASE("different texts give different embeddings") {
  EmbedderConfig cfg;
  cfg.d = 64;
  CHECK(embed_text("rivers run north", cfg) != embed_text("rivers run south", cfg));
}

TEST_CASE("empty text embeds to the zero vector") {
  EmbedderConfig cfg;
  cfg.d = 16;
  Vec z = embed_text("", cfg);
  REQUIRE(z.size() == 16);
  for (double x : z) CHECK(x == 0.0);
  CHECK(embed_text("  \t ", cfg) == z);
}

TEST_CASE("token multiset determines the embedding") {
  EmbedderConfig cfg;
  cfg.d = 48;
  CHECK(embed_text("alpha beta gamma", cfg) == embed_text("gamma BETA alpha", cfg));
}

TEST_CASE("effective scale defaults to 1/sqrt(d)") {
  EmbedderConfig cfg;
  cfg.d = 25;
  CHECK(cfg.effective_scale() == doctest::Approx(0.2).epsilon(1e-12));
  cfg.scale = 0.75;
  CHECK(cfg.effective_scale() == 0.75);
}

TEST_CASE("embed_query concatenates premise, hypothesis and update") {
  EmbedderConfig cfg;
  cfg.d = 32;
  DefeasibleQuery q{"a dog barks", "the owner wakes", "earplugs are in", std::nullopt};
  CHECK(embed_query(q, cfg) == embed_text("a dog barks | the owner wakes | earplugs are in", cfg));
}

TEST_CASE("embed_nodes follows the requested role order") {
  EmbedderConfig cfg;
  cfg.d = 16;
  auto g = InferenceGraph::with_default_edges({
      {NodeRole::Cplus, "apples"}, {NodeRole::Cminus, "pears"},
      {NodeRole::S, "plums"}, {NodeRole::Sminus, "figs"},
      {NodeRole::Mplus, "grapes"}, {NodeRole::Mminus, "dates"},
      {NodeRole::Hplus, "mangos"}, {NodeRole::Hminus, "kiwis"},
  });
  std::vector<NodeRole> roles = {NodeRole::Sminus, NodeRole::Cplus};
  auto rows = embed_nodes(g, roles, cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == embed_text("figs", cfg));
  CHECK(rows[1] == embed_text("apples", cfg));
}

TEST_CASE("embedding table round-trips and reports misses") {
  auto path = temp_file("definf_embed_table.txt");
  {
    std::ofstream out(path);
    out << "d=3\n";
    out << "alpha\t1 0 0\n";
    out << "beta\t0 0.5 0.5\n";
  }
  EmbeddingTable table = EmbeddingTable::load(path.string());
  CHECK(table.dim() == 3);
  CHECK(table.size() == 2);
  CHECK(table.lookup("alpha") == Vec{1.0, 0.0, 0.0});
  CHECK(table.lookup("beta") == Vec{0.0, 0.5, 0.5});
  CHECK_THROWS_AS(table.lookup("gamma"), EmbeddingError);
  std::filesystem::remove(path);
}

TEST_CASE("embedding table rejects dimension mismatches") {
  auto path = temp_file("definf_embed_bad.txt");
  {
    std::ofstream out(path);
    out << "d=3\n";
    out << "alpha\t1 0\n";
  }
  try {
    EmbeddingTable::load(path.string());
    FAIL("expected EmbeddingError");
  } catch (const EmbeddingError& e) {
    CHECK(std::string(e.what()).find("DimensionMismatch") != std::string::npos);
  }
  std::filesystem::remove(path);
}

}  // TEST_SUITE
