#include "euclid2/detectors.hpp"

#include <doctest.h>

#include <random>
#include <set>

#include "support/fixtures.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace euclid2;

TEST_CASE("pattern scan certifies the canonical 8-candidate instance") {
  Election e = fixtures::load("pattern38.soc");
  auto cert = find_38(e);
  REQUIRE(cert.has_value());
  CHECK(cert->voters == std::array<int, 3>{0, 1, 2});
  CHECK(cert->center == 8);  // cE
  // Each voter-subset mask is realized by exactly one candidate here.
  CHECK(cert->witness[1] == 1);  // c1
  CHECK(cert->witness[2] == 2);  // c2
  CHECK(cert->witness[3] == 4);  // c12
  CHECK(cert->witness[4] == 3);  // c3
  CHECK(cert->witness[5] == 5);  // c13
  CHECK(cert->witness[6] == 6);  // c23
  CHECK(cert->witness[7] == 7);  // c123
  CHECK(verify_38(e, *cert));
  // The center is fifth in every listed vote: four witnesses above, three below.
  for (int t = 0; t < 3; ++t) CHECK(e.votes[cert->voters[t]].pos[cert->center] == 4);
}

TEST_CASE("pattern scan finds the embedded pattern in the 14-candidate tail-block instance") {
  Election e = fixtures::load("tail_block14.soc");
  auto cert = find_38(e);
  REQUIRE(cert.has_value());
  CHECK(cert->center == 8);  // c0p
  CHECK(cert->witness[1] == 9);   // c1p
  CHECK(cert->witness[2] == 10);  // c2p
  CHECK(cert->witness[3] == 12);  // c4p
  CHECK(cert->witness[4] == 11);  // c3p
  CHECK(cert->witness[5] == 14);  // c6p
  CHECK(cert->witness[6] == 13);  // c5p
  CHECK(cert->witness[7] == 1);   // c0, smallest of the seven candidates above c0p everywhere
  CHECK(verify_38(e, *cert));
}

TEST_CASE("pattern scan is vacuous below 8 candidates") {
  Election e = fixtures::load("pattern38_minus_c123.soc");
  CHECK_FALSE(find_38(e).has_value());
}

TEST_CASE("tampered pattern certificates are rejected") {
  Election e = fixtures::load("pattern38.soc");
  auto cert = *find_38(e);
  auto bad = cert;
  bad.witness[3] = cert.witness[5];  // duplicate witness
  CHECK_FALSE(verify_38(e, bad));
  bad = cert;
  bad.witness[1] = cert.center;
  CHECK_FALSE(verify_38(e, bad));
  bad = cert;
  std::swap(bad.witness[1], bad.witness[2]);  // wrong voter subsets
  CHECK_FALSE(verify_38(e, bad));
  bad = cert;
  bad.voters = {0, 0, 1};
  CHECK_FALSE(verify_38(e, bad));
}

TEST_CASE("controversity graph of the degree-three instance") {
  Election e = fixtures::load("deg3_graph7.soc");
  ControversityGraph g = build_controversity_graph(e);
  CHECK(g.vertices == std::vector<int>{0, 1, 2, 3});
  // lexicographically first witness pairs, ids a=1..g=7
  CHECK(g.vertex_witness[0] == std::make_pair(1, 2));  // v1: a over b
  CHECK(g.vertex_witness[1] == std::make_pair(5, 4));  // v2: e over d
  CHECK(g.vertex_witness[2] == std::make_pair(3, 7));  // v3: c over g
  CHECK(g.vertex_witness[3] == std::make_pair(1, 3));  // v4: a over c
  // every pair of voters is controversial here
  REQUIRE(g.edges.size() == 6);
  CHECK(g.degree(0) == 3);
  CHECK(g.degree(1) == 3);
  CHECK(g.degree(2) == 3);
  CHECK(g.degree(3) == 3);

  auto viol = check_controversity(g);
  REQUIRE(viol.has_value());
  CHECK(viol->kind == Violation::Kind::MaxDegree);
  CHECK(viol->vertex == 0);
  CHECK(viol->neighbors == std::vector<int>{1, 2, 3});
}

TEST_CASE("controversity graph of the 7-voter extension is compliant as a whole") {
  Election e = fixtures::load("hull_quad7.soc");
  ControversityGraph g = build_controversity_graph(e);
  CHECK(g.vertices == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(g.vertex_witness[0] == std::make_pair(5, 2));  // e over b
  CHECK(g.vertex_witness[1] == std::make_pair(5, 4));  // e over d
  CHECK(g.vertex_witness[2] == std::make_pair(6, 7));  // f over g
  CHECK(g.vertex_witness[3] == std::make_pair(1, 3));  // a over c
  CHECK(g.vertex_witness[4] == std::make_pair(5, 1));  // e over a
  REQUIRE(g.edges.size() == 2);
  CHECK(g.edges[0] == std::make_pair(0, 4));
  CHECK(g.edge_witness[0] == std::make_pair(6, 1));  // f over a
  CHECK(g.edges[1] == std::make_pair(1, 2));
  CHECK(g.edge_witness[1] == std::make_pair(1, 4));  // a over d
  CHECK_FALSE(check_controversity(g).has_value());
}

TEST_CASE("controversity graph of the 14-candidate no-copy instance is complete on 4 voters") {
  Election e = fixtures::load("no_copy14.soc");
  ControversityGraph g = build_controversity_graph(e);
  CHECK(g.vertices == std::vector<int>{0, 1, 2, 3});
  CHECK(g.vertex_witness[0] == std::make_pair(2, 1));
  CHECK(g.vertex_witness[1] == std::make_pair(4, 3));
  CHECK(g.vertex_witness[2] == std::make_pair(6, 5));
  CHECK(g.vertex_witness[3] == std::make_pair(14, 13));
  CHECK(g.edges.size() == 6);
  auto viol = check_controversity(g);
  REQUIRE(viol.has_value());
  CHECK(viol->kind == Violation::Kind::MaxDegree);
}

TEST_CASE("synthetic violation shapes for the pure graph check") {
  // triangle plus isolated vertex: cycle in a disconnected graph
  ControversityGraph g;
  g.vertices = {0, 1, 2, 5};
  g.vertex_witness.assign(4, {1, 2});
  g.edges = {{0, 1}, {0, 2}, {1, 2}};
  g.edge_witness.assign(3, {1, 2});
  auto viol = check_controversity(g);
  REQUIRE(viol.has_value());
  CHECK(viol->kind == Violation::Kind::DisconnectedCycle);
  CHECK(viol->cycle == std::vector<int>{0, 1, 2});
  CHECK(viol->vertex == 5);

  // a single 4-cycle is fine
  ControversityGraph c4;
  c4.vertices = {0, 1, 2, 3};
  c4.vertex_witness.assign(4, {1, 2});
  c4.edges = {{0, 1}, {0, 3}, {1, 2}, {2, 3}};
  c4.edge_witness.assign(4, {1, 2});
  CHECK_FALSE(check_controversity(c4).has_value());

  // two disjoint paths are fine
  ControversityGraph paths;
  paths.vertices = {0, 1, 2, 3};
  paths.vertex_witness.assign(4, {1, 2});
  paths.edges = {{0, 1}, {2, 3}};
  paths.edge_witness.assign(2, {1, 2});
  CHECK_FALSE(check_controversity(paths).has_value());

  // degree check wins over the cycle check and names the smallest vertex
  ControversityGraph star;
  star.vertices = {1, 2, 3, 4, 7};
  star.vertex_witness.assign(5, {1, 2});
  star.edges = {{1, 2}, {1, 3}, {1, 7}, {2, 3}, {2, 4}, {2, 7}};
  star.edge_witness.assign(6, {1, 2});
  auto deg = check_controversity(star);
  REQUIRE(deg.has_value());
  CHECK(deg->kind == Violation::Kind::MaxDegree);
  CHECK(deg->vertex == 1);
  CHECK(deg->neighbors == std::vector<int>{2, 3, 7});
}

TEST_CASE("hull search refutes the degree-three instance with all four voters") {
  Election e = fixtures::load("deg3_graph7.soc");
  auto cert = hull_refute(e, HullMode::Quad);
  REQUIRE(cert.has_value());
  CHECK(cert->voter_subset == std::vector<int>{0, 1, 2, 3});
  CHECK(cert->violation.kind == Violation::Kind::MaxDegree);
  CHECK(cert->violation.vertex == 0);
  CHECK(verify_hull(e, *cert));
}

TEST_CASE("hull search refutes the 7-voter extension through its first quad") {
  Election e = fixtures::load("hull_quad7.soc");
  auto cert = hull_refute(e, HullMode::Quad);
  REQUIRE(cert.has_value());
  CHECK(cert->voter_subset == std::vector<int>{0, 1, 2, 3});
  CHECK(cert->violation.kind == Violation::Kind::MaxDegree);
  CHECK(cert->violation.vertex == 0);
  CHECK(cert->violation.neighbors == std::vector<int>{1, 2, 3});
  CHECK(verify_hull(e, *cert));

  // Full mode enumerates size 4 first, so it lands on the same certificate.
  auto full = hull_refute(e, HullMode::Full, 6);
  REQUIRE(full.has_value());
  CHECK(full->voter_subset == cert->voter_subset);

  // tampering is caught
  auto bad = *cert;
  bad.violation.vertex = 1;
  CHECK_FALSE(verify_hull(e, bad));
  bad = *cert;
  bad.voter_subset = {0, 1, 2, 4};
  CHECK_FALSE(verify_hull(e, bad));
}

TEST_CASE("hull search precondition errors") {
  Election e = fixtures::load("pattern38.soc");  // 3 distinct votes
  CHECK_THROWS_AS(hull_refute(e, HullMode::Quad), Error);
  Election e2 = fixtures::load("deg3_graph7.soc");
  CHECK_THROWS_AS(hull_refute(e2, HullMode::Full, 3), Error);
}

TEST_CASE("hull stop flag aborts the enumeration") {
  Election e = fixtures::load("hull_quad7.soc");
  std::atomic<bool> stop{true};
  CHECK_FALSE(hull_refute(e, HullMode::Quad, 6, &stop).has_value());
}

TEST_CASE("detectors stay silent on synthetically Euclidean elections") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    auto inst = synthetic::generate_planar(seed, 4 + static_cast<int>(seed % 5),
                                           4 + static_cast<int>(seed % 5));
    CHECK_FALSE(find_38(inst.e).has_value());
    CHECK_FALSE(check_controversity(build_controversity_graph(inst.e)).has_value());
    if (inst.e.n_distinct() >= 4) {
      CHECK_FALSE(hull_refute(inst.e, HullMode::Full, 6).has_value());
    }
  }
}

TEST_CASE("candidate restriction only removes controversity structure") {
  std::mt19937_64 rng(21);
  int tested = 0;
  for (uint64_t seed = 100; tested < 30; ++seed) {
    int m = 5 + static_cast<int>(seed % 3);
    std::vector<std::vector<int>> rankings;
    for (int i = 0; i < 5; ++i) rankings.push_back(oracles::random_vote(m, rng).order);
    Election e = make_election(m, rankings);
    std::vector<int> keep;
    for (int c = 1; c <= m; ++c) {
      if (rng() % 3) keep.push_back(c);
    }
    if (static_cast<int>(keep.size()) < 2) continue;
    auto [r, map] = restrict_candidates(e, keep);
    if (r.n_distinct() != e.n_distinct()) continue;  // collapse would shift voter identity
    ++tested;
    ControversityGraph big = build_controversity_graph(e);
    ControversityGraph small = build_controversity_graph(r);
    for (int v : small.vertices) CHECK(big.is_vertex(v));
    std::set<std::pair<int, int>> big_edges(big.edges.begin(), big.edges.end());
    for (auto& edge : small.edges) CHECK(big_edges.count(edge) == 1);
  }
}
