#include <doctest.h>

#include <array>
#include <chrono>
#include <set>
#include <vector>

#include "euclid2/ilp.hpp"
#include "support/arrangement.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace euclid2;

namespace {

template <size_t N>
std::vector<arrangement::Pt> to_pts(const std::array<euclid2::fixtures::Point, N>& pts) {
  std::vector<arrangement::Pt> out;
  for (const auto& p : pts) out.push_back({p.x, p.y});
  return out;
}

bool holds(const Row& row, const std::vector<signed char>& a) {
  long long lhs = 0;
  for (const LinTerm& t : row.terms) {
    lhs += t.coef * (t.var < static_cast<int>(a.size()) ? a[t.var] : 0);
  }
  switch (row.sense) {
    case RowSense::Le: return lhs <= row.rhs;
    case RowSense::Ge: return lhs >= row.rhs;
    case RowSense::Eq: return lhs == row.rhs;
  }
  return false;
}

// All rankings one adjacent swap away.
std::vector<std::vector<int>> swap_neighbors(const std::vector<int>& order) {
  std::vector<std::vector<int>> out;
  for (size_t i = 0; i + 1 < order.size(); ++i) {
    std::vector<int> o = order;
    std::swap(o[i], o[i + 1]);
    out.push_back(o);
  }
  return out;
}

}  // namespace

TEST_CASE("the cell oracle reproduces the stored embeddable instance") {
  arrangement::Cells cells = arrangement::cells_of(to_pts(fixtures::kEmbeddable4x7Candidates));
  CHECK(static_cast<long long>(cells.outer.size()) == 2 * binom2(4));
  CHECK(static_cast<long long>(cells.realized.size()) <= ub(4));
  for (const auto& o : cells.outer) CHECK(cells.realized.count(o) == 1);

  Election e = fixtures::load("embeddable4x7.soc");
  REQUIRE(static_cast<int>(fixtures::kEmbeddable4x7Voters.size()) == e.n_distinct());
  for (int i = 0; i < e.n_distinct(); ++i) {
    double x = fixtures::kEmbeddable4x7Voters[i].x;
    double y = fixtures::kEmbeddable4x7Voters[i].y;
    CHECK(arrangement::ranking_at(x, y, to_pts(fixtures::kEmbeddable4x7Candidates)) == e.votes[i].order);
    CHECK(cells.realized.count(e.votes[i].order) == 1);
  }
}

TEST_CASE("oracle cells satisfy the geometric degree and rim facts") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    int m = 4 + trial % 2;
    synthetic::PlanarInstance inst = synthetic::generate_planar(rng(), m, 3);
    arrangement::Cells cells = arrangement::cells_of(inst.cand_pts);
    REQUIRE(static_cast<long long>(cells.outer.size()) == 2 * binom2(m));
    CHECK(static_cast<long long>(cells.realized.size()) <= ub(m));
    CHECK(static_cast<long long>(cells.realized.size()) >= 2 * binom2(m));

    for (const auto& o : cells.outer) {
      CHECK(cells.realized.count(o) == 1);
      std::vector<int> rev(o.rbegin(), o.rend());
      CHECK(cells.outer.count(rev) == 1);
      int outer_nbrs = 0;
      for (const auto& w : swap_neighbors(o)) outer_nbrs += cells.outer.count(w);
      CHECK(outer_nbrs == 2);
    }
    for (const auto& o : cells.realized) {
      int realized_nbrs = 0;
      for (const auto& w : swap_neighbors(o)) realized_nbrs += cells.realized.count(w);
      CHECK(realized_nbrs >= (cells.outer.count(o) ? 2 : 3));
    }
  }
}

TEST_CASE("every generated row holds under the geometric truth assignment") {
  for (int trial = 0; trial < 50; ++trial) {
    int m = 4 + trial % 2;
    int n = 3 + trial % 5;
    synthetic::PlanarInstance inst = synthetic::generate_planar(1000 + trial, m, n);
    arrangement::Cells cells = arrangement::cells_of(inst.cand_pts);
    REQUIRE(static_cast<long long>(cells.outer.size()) == 2 * binom2(m));
    for (const Vote& v : inst.e.votes) REQUIRE(cells.realized.count(v.order) == 1);

    RegionModel model = build_base_model(inst.e);
    for (int round = 0; round < 5; ++round) {
      SolveResult res = solve_01(model, "builtin", std::chrono::milliseconds(2000));
      if (res.status == SolveStatus::Timeout) break;
      REQUIRE(res.status == SolveStatus::Feasible);
      int added = generate_violated(inst.e, model, res.values);
      bool changed = model.refresh_aggregates();
      if (added == 0 && !changed) break;
    }

    std::vector<signed char> truth(model.vars.size(), 0);
    for (int i = 0; i < static_cast<int>(model.vars.size()); ++i) {
      const RegionModel::Var& var = model.vars[i];
      bool bit = true;
      switch (var.kind) {
        case VarKind::X:
          bit = cells.realized.count(model.rankings[var.votes[0]].order);
          break;
        case VarKind::Inner:
          bit = cells.realized.count(model.rankings[var.votes[0]].order) &&
                !cells.outer.count(model.rankings[var.votes[0]].order);
          break;
        case VarKind::Rim:
          bit = cells.outer.count(model.rankings[var.votes[0]].order);
          break;
        case VarKind::PairAnd:
        case VarKind::CycleAnd:
          for (int r : var.votes) bit = bit && cells.realized.count(model.rankings[r].order);
          break;
      }
      truth[i] = bit ? 1 : 0;
    }
    for (const Row& row : model.rows) {
      CHECK(holds(row, truth));
    }
  }
}
