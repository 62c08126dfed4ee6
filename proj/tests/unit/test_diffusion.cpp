#include <doctest.h>

#include <sstream>

#include "msnlab/diffusion.hpp"
#include "msnlab/rng.hpp"
#include "msnlab/synth.hpp"

using namespace msnlab;
using records::PostViewRecord;

namespace {

PostViewRecord rec(const std::string& u1, const std::string& u2,
                   const std::string& pid, std::int64_t t) {
  return {u1, u2, pid, 0x01020304u, t};
}

}  // namespace

TEST_CASE("classify_users applies the seed rule") {
  std::vector<PostViewRecord> recs{rec("a", "b", "p", 1), rec("b", "c", "p", 2)};
  const auto roles = diffusion::classify_users(recs, "p");
  CHECK(roles.page_known);
  CHECK(roles.infected == std::set<std::string>{"b", "c"});
  CHECK(roles.infectious == std::set<std::string>{"a", "b"});
  CHECK(roles.roots == std::set<std::string>{"a"});
}

TEST_CASE("classify_users on an unknown page returns empty roles") {
  std::vector<PostViewRecord> recs{rec("a", "b", "p", 1)};
  const auto roles = diffusion::classify_users(recs, "q");
  CHECK_FALSE(roles.page_known);
  CHECK(roles.infected.empty());
  CHECK(roles.infectious.empty());
}

TEST_CASE("classify_users keeps non-reposting viewers out of infectious") {
  std::vector<PostViewRecord> recs{rec("a", "b", "p", 1), rec("a", "c", "p", 2)};
  const auto roles = diffusion::classify_users(recs, "p");
  CHECK(roles.infected == std::set<std::string>{"b", "c"});
  CHECK(roles.infectious == std::set<std::string>{"a"});
}

TEST_CASE("build_forest chains earliest views") {
  std::vector<PostViewRecord> recs{rec("a", "b", "p", 1), rec("b", "c", "p", 2)};
  const auto f = diffusion::build_forest(recs, "p");
  CHECK(f.parent.at("b") == "a");
  CHECK(f.parent.at("c") == "b");
  CHECK(f.roots == std::set<std::string>{"a"});
  CHECK(f.view_time.at("b") == 1);
  CHECK(f.view_time.at("c") == 2);
}

TEST_CASE("build_forest earliest view wins") {
  std::vector<PostViewRecord> recs{rec("a", "b", "p", 5), rec("d", "b", "p", 3)};
  const auto f = diffusion::build_forest(recs, "p");
  CHECK(f.parent.at("b") == "d");
}

TEST_CASE("build_forest breaks timestamp ties lexicographically") {
  std::vector<PostViewRecord> recs{rec("d", "b", "p", 3), rec("a", "b", "p", 3)};
  const auto f = diffusion::build_forest(recs, "p");
  CHECK(f.parent.at("b") == "a");
}

TEST_CASE("build_forest ignores self views for edges") {
  std::vector<PostViewRecord> recs{rec("a", "a", "p", 1), rec("a", "b", "p", 2)};
  const auto f = diffusion::build_forest(recs, "p");
  CHECK(f.roots == std::set<std::string>{"a"});
  CHECK(f.parent.at("b") == "a");
  CHECK(f.view_time.at("a") == 1);  // the self view is still a view
}

TEST_CASE("build_forest breaks mutual-attribution cycles") {
  // a's earliest view is from b and vice versa; the larger id is promoted.
  std::vector<PostViewRecord> recs{rec("b", "a", "p", 1), rec("a", "b", "p", 1)};
  const auto f = diffusion::build_forest(recs, "p");
  CHECK(f.roots.count("b") == 1);
  CHECK(f.parent.at("a") == "b");
  CHECK(f.parent.count("b") == 0);

  // Same with distinct timestamps that still loop.
  std::vector<PostViewRecord> loop{rec("b", "a", "p", 1), rec("a", "b", "p", 2)};
  const auto f2 = diffusion::build_forest(loop, "p");
  CHECK(f2.roots.count("b") == 1);
  CHECK(f2.parent.at("a") == "b");
}

TEST_CASE("build_forest is permutation invariant and spans classify_users") {
  records::SynthConfig cfg;
  cfg.n_users = 80;
  cfg.n_pages = 12;
  cfg.n_regions = 4;
  cfg.seed = 31;
  auto recs = records::generate_synthetic(cfg);

  const auto baseline = diffusion::build_forest(recs, "p003");
  auto rng = make_rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    for (std::size_t i = recs.size(); i > 1; --i) {
      std::swap(recs[i - 1], recs[uniform_below(rng, i)]);
    }
    const auto f = diffusion::build_forest(recs, "p003");
    CHECK(f.parent == baseline.parent);
    CHECK(f.roots == baseline.roots);
    CHECK(f.view_time == baseline.view_time);
  }

  const auto roles = diffusion::classify_users(recs, "p003");
  std::set<std::string> span;
  for (const auto& r : baseline.roots) span.insert(r);
  for (const auto& [child, unused] : baseline.parent) span.insert(child);
  std::set<std::string> classified = roles.infected;
  classified.insert(roles.infectious.begin(), roles.infectious.end());
  CHECK(span == classified);
  CHECK(baseline.size() == span.size());
}

TEST_CASE("forest depth is bounded by the viewer count") {
  records::SynthConfig cfg;
  cfg.n_users = 60;
  cfg.n_pages = 8;
  cfg.n_regions = 3;
  cfg.seed = 87;
  const auto recs = records::generate_synthetic(cfg);
  for (int p = 0; p < cfg.n_pages; ++p) {
    char pid[8];
    std::snprintf(pid, sizeof(pid), "p%03d", p);
    const auto f = diffusion::build_forest(recs, pid);
    for (const auto& [child, unused] : f.parent) {
      std::size_t depth = 0;
      std::string cur = child;
      while (f.parent.count(cur) && depth <= f.size()) {
        cur = f.parent.at(cur);
        ++depth;
      }
      CHECK(depth <= f.size());
    }
  }
}

TEST_CASE("forest export format") {
  std::vector<PostViewRecord> recs{rec("a", "b", "p", 1)};
  const auto f = diffusion::build_forest(recs, "p");
  std::ostringstream out;
  diffusion::write_forest(out, f);
  CHECK(out.str() == "p\ta\t-\t1\np\tb\ta\t1\n");
}
