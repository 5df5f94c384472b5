#include <algorithm>
#include <cassert>
#include <set>

#include "euclid2/ilp.hpp"

namespace euclid2 {

namespace {

long long factorial(int n) {
  long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

long long evaluate_terms(const Row& row, const std::vector<signed char>& assignment) {
  long long lhs = 0;
  for (const LinTerm& t : row.terms) {
    int v = t.var < static_cast<int>(assignment.size()) ? assignment[t.var] : 0;
    lhs += t.coef * v;
  }
  return lhs;
}

bool row_holds(const Row& row, const std::vector<signed char>& assignment) {
  long long lhs = evaluate_terms(row, assignment);
  switch (row.sense) {
    case RowSense::Le: return lhs <= row.rhs;
    case RowSense::Ge: return lhs >= row.rhs;
    case RowSense::Eq: return lhs == row.rhs;
  }
  return false;
}

// Capacity of one swap line: how many realized adjacent-swap pairs can face
// each other across the bisector of a fixed candidate pair.
long long swap_line_cap(int m) { return binom2(m - 2) + m - 1; }

std::vector<int> swapped_order(const std::vector<int>& order, int a, int b) {
  std::vector<int> out = order;
  for (int& c : out) {
    if (c == a) {
      c = b;
    } else if (c == b) {
      c = a;
    }
  }
  return out;
}

bool pair_adjacent(const Vote& v, int a, int b) {
  return v.pos[a] + 1 == v.pos[b] || v.pos[b] + 1 == v.pos[a];
}

// The four orderings around the crossing point of the {a,b} and {c,d} swap
// lines, starting from one ordering that has both pairs adjacent.
std::vector<std::vector<int>> wheel_orders(const Vote& u, int a, int b, int c, int d) {
  return {u.order, swapped_order(u.order, a, b), swapped_order(u.order, c, d),
          swapped_order(swapped_order(u.order, a, b), c, d)};
}

}  // namespace

const char* var_kind_name(VarKind kind) {
  switch (kind) {
    case VarKind::X: return "x";
    case VarKind::Inner: return "inner";
    case VarKind::Rim: return "rim";
    case VarKind::PairAnd: return "pair_and";
    case VarKind::CycleAnd: return "cycle_and";
  }
  return "?";
}

std::optional<VarKind> var_kind_from_name(const std::string& name) {
  for (VarKind k : {VarKind::X, VarKind::Inner, VarKind::Rim, VarKind::PairAnd, VarKind::CycleAnd}) {
    if (name == var_kind_name(k)) return k;
  }
  return std::nullopt;
}

int RegionModel::intern(Vote v) {
  auto it = ranking_id.find(v.order);
  if (it != ranking_id.end()) return it->second;
  int id = static_cast<int>(rankings.size());
  ranking_id.emplace(v.order, id);
  rankings.push_back(std::move(v));
  return id;
}

std::optional<int> RegionModel::find_single(VarKind kind, const Vote& v) const {
  auto rit = ranking_id.find(v.order);
  if (rit == ranking_id.end()) return std::nullopt;
  auto it = single_var.find({static_cast<int>(kind), rit->second});
  if (it == single_var.end()) return std::nullopt;
  return it->second;
}

int RegionModel::ensure_x(Vote v) {
  int r = intern(v);
  auto key = std::make_pair(static_cast<int>(VarKind::X), r);
  auto it = single_var.find(key);
  if (it != single_var.end()) return it->second;

  // Realized and bounded indicators are created in reverse pairs so that the
  // reverse-ranking rows always have their variables at hand.
  int rr = intern(reverse_vote(v));
  assert(single_var.find({static_cast<int>(VarKind::X), rr}) == single_var.end());
  auto new_single = [&](VarKind kind, int ranking) {
    int id = static_cast<int>(vars.size());
    vars.push_back({kind, {ranking}});
    single_var[{static_cast<int>(kind), ranking}] = id;
    return id;
  };
  int xv = new_single(VarKind::X, r);
  int iv = new_single(VarKind::Inner, r);
  int xr = new_single(VarKind::X, rr);
  int ir = new_single(VarKind::Inner, rr);

  rows.push_back({"C5", {{iv, 1}, {xv, -1}}, RowSense::Le, 0});
  rows.push_back({"C5", {{ir, 1}, {xr, -1}}, RowSense::Le, 0});
  rows.push_back({"C7", {{iv, 1}, {ir, 1}}, RowSense::Le, 1});
  // A realized unbounded region forces its reverse to be realized and
  // unbounded too: the antipodal direction orders candidates the other way.
  rows.push_back({"C8", {{xv, -1}, {iv, 1}, {xr, 1}}, RowSense::Ge, 0});
  rows.push_back({"C8", {{xr, -1}, {ir, 1}, {xv, 1}}, RowSense::Ge, 0});
  rows.push_back({"C9", {{xv, -1}, {iv, 1}, {ir, -1}}, RowSense::Ge, -1});
  rows.push_back({"C9", {{xr, -1}, {ir, 1}, {iv, -1}}, RowSense::Ge, -1});
  return xv;
}

int RegionModel::ensure_rim(Vote v) {
  ensure_x(v);
  int r = intern(v);
  auto key = std::make_pair(static_cast<int>(VarKind::Rim), r);
  auto it = single_var.find(key);
  if (it != single_var.end()) return it->second;

  std::vector<std::pair<int, int>> nbr;  // (x, inner) variable ids
  for (const Vote& w : adjacent_votes(v)) {
    int xw = ensure_x(w);
    nbr.push_back({xw, *find_single(VarKind::Inner, w)});
  }
  int y = static_cast<int>(vars.size());
  vars.push_back({VarKind::Rim, {r}});
  single_var[key] = y;

  int xv = *find_single(VarKind::X, v);
  int iv = *find_single(VarKind::Inner, v);
  rows.push_back({"C11", {{xv, -1}, {iv, 1}, {y, 1}}, RowSense::Ge, 0});
  // An unbounded realized region has exactly two unbounded swap-neighbors.
  Row low{"C11", {{y, 2}}, RowSense::Le, 0};
  Row high{"C11", {{y, m - 3}}, RowSense::Le, m - 1};
  for (auto [xw, iw] : nbr) {
    low.terms.push_back({xw, -1});
    low.terms.push_back({iw, 1});
    high.terms.push_back({xw, 1});
    high.terms.push_back({iw, -1});
  }
  rows.push_back(std::move(low));
  rows.push_back(std::move(high));
  return y;
}

int RegionModel::ensure_pair(Vote u, Vote w) {
  int xu = ensure_x(u);
  int xw = ensure_x(w);
  std::vector<int> key = {intern(u), intern(w)};
  std::sort(key.begin(), key.end());
  auto it = group_var.find(key);
  if (it != group_var.end()) return it->second;
  int p = static_cast<int>(vars.size());
  vars.push_back({VarKind::PairAnd, key});
  group_var[key] = p;
  rows.push_back({"H1", {{p, 1}, {xu, -1}}, RowSense::Le, 0});
  rows.push_back({"H1", {{p, 1}, {xw, -1}}, RowSense::Le, 0});
  rows.push_back({"H1", {{p, 1}, {xu, -1}, {xw, -1}}, RowSense::Ge, -1});
  return p;
}

int RegionModel::ensure_cycle(std::vector<Vote> cycle) {
  std::vector<int> xs;
  std::vector<int> key;
  for (const Vote& v : cycle) {
    xs.push_back(ensure_x(v));
    key.push_back(intern(v));
  }
  std::sort(key.begin(), key.end());
  auto it = group_var.find(key);
  if (it != group_var.end()) return it->second;
  int p = static_cast<int>(vars.size());
  vars.push_back({VarKind::CycleAnd, key});
  group_var[key] = p;
  Row all{"H3", {{p, 1}}, RowSense::Ge, -static_cast<long long>(cycle.size()) + 1};
  for (int x : xs) {
    rows.push_back({"H2", {{p, 1}, {x, -1}}, RowSense::Le, 0});
    all.terms.push_back({x, -1});
  }
  rows.push_back(std::move(all));
  return p;
}

bool RegionModel::refresh_aggregates() {
  bool changed = false;
  if (c2_row >= 0) {
    std::vector<LinTerm> terms;
    for (int i = 0; i < static_cast<int>(vars.size()); ++i) {
      if (vars[i].kind == VarKind::X) terms.push_back({i, 1});
    }
    if (terms.size() != rows[c2_row].terms.size()) {
      rows[c2_row].terms = std::move(terms);
      changed = true;
    }
  }
  if (c6_row >= 0) {
    std::vector<LinTerm> terms;
    for (int i = 0; i < static_cast<int>(vars.size()); ++i) {
      if (vars[i].kind != VarKind::X) continue;
      terms.push_back({i, 1});
      terms.push_back({single_var.at({static_cast<int>(VarKind::Inner), vars[i].votes[0]}), -1});
    }
    if (terms.size() != rows[c6_row].terms.size()) {
      rows[c6_row].terms = std::move(terms);
      changed = true;
    }
  }
  return changed;
}

RegionModel build_base_model(const Election& e, const IlpOptions& opt) {
  if (e.m < 4) {
    throw Error(ErrorCode::TooFewCandidates, "region model needs at least 4 candidates");
  }
  RegionModel model;
  model.m = e.m;

  for (const Vote& v : e.votes) {
    int xv = model.ensure_x(v);
    model.rows.push_back({"C1", {{xv, 1}}, RowSense::Eq, 1});
  }
  model.rows.push_back({"C2", {}, RowSense::Le, ub(e.m)});
  model.c2_row = static_cast<int>(model.rows.size()) - 1;

  for (const Vote& v : e.votes) {
    int r = model.intern(v);
    int xv = *model.find_single(VarKind::X, v);
    int iv = *model.find_single(VarKind::Inner, v);
    // Degree row: a realized region has two realized swap-neighbors, three
    // when bounded.
    Row degree{"C10", {{xv, -2}, {iv, -1}}, RowSense::Ge, 0};
    for (const Vote& w : adjacent_votes(v)) degree.terms.push_back({model.ensure_x(w), 1});
    model.rows.push_back(std::move(degree));
    model.c10_done[r] = true;
    model.ensure_rim(v);
    model.c11_done[r] = true;
  }

  // Swap-line capacity rows over the variables created so far.
  for (int a = 1; a <= e.m; ++a) {
    for (int b = a + 1; b <= e.m; ++b) {
      Row cap{"C12", {}, RowSense::Le, swap_line_cap(e.m)};
      for (int r = 0; r < static_cast<int>(model.rankings.size()); ++r) {
        const Vote& u = model.rankings[r];
        if (!pair_adjacent(u, a, b)) continue;
        auto pit = model.ranking_id.find(swapped_order(u.order, a, b));
        if (pit == model.ranking_id.end() || pit->second < r) continue;
        if (!model.find_single(VarKind::X, model.rankings[pit->second])) continue;
        cap.terms.push_back({model.ensure_pair(u, model.rankings[pit->second]), 1});
      }
      if (!cap.terms.empty()) model.rows.push_back(std::move(cap));
    }
  }

  // Two crossing swap lines support at most one full wheel of four regions.
  for (int a = 1; a <= e.m; ++a) {
    for (int b = a + 1; b <= e.m; ++b) {
      for (int c = a + 1; c <= e.m; ++c) {
        if (c == b) continue;
        for (int d = c + 1; d <= e.m; ++d) {
          if (d == b) continue;
          Row cap{"C13", {}, RowSense::Le, 1};
          std::set<std::vector<int>> seen;
          for (int r = 0; r < static_cast<int>(model.rankings.size()); ++r) {
            const Vote& u = model.rankings[r];
            if (!pair_adjacent(u, a, b) || !pair_adjacent(u, c, d)) continue;
            bool all = true;
            std::vector<int> ids;
            for (const auto& o : wheel_orders(u, a, b, c, d)) {
              auto oit = model.ranking_id.find(o);
              if (oit == model.ranking_id.end() ||
                  !model.find_single(VarKind::X, model.rankings[oit->second])) {
                all = false;
                break;
              }
              ids.push_back(oit->second);
            }
            if (!all) continue;
            std::sort(ids.begin(), ids.end());
            if (!seen.insert(ids).second) continue;
            std::vector<Vote> cycle;
            for (const auto& o : wheel_orders(u, a, b, c, d)) cycle.push_back(Vote(o));
            cap.terms.push_back({model.ensure_cycle(cycle), 1});
          }
          if (!cap.terms.empty()) model.rows.push_back(std::move(cap));
        }
      }
    }
  }

  (void)opt;
  model.refresh_aggregates();
  return model;
}

namespace {

// Around the circumcenter of three candidates the six orderings of the triple
// form a wheel; only one such wheel per triple fits in the plane.
void audit_six_cycles(RegionModel& model, const std::vector<signed char>& assignment,
                      const std::vector<int>& support, std::vector<Row>& fresh) {
  auto val = [&](int var) -> int {
    return var < static_cast<int>(assignment.size()) ? assignment[var] : 0;
  };
  int m = model.m;
  for (int a = 1; a <= m; ++a) {
    for (int b = a + 1; b <= m; ++b) {
      for (int c = b + 1; c <= m; ++c) {
        std::set<std::vector<int>> complete;
        std::vector<std::vector<Vote>> cycles;
        for (int r : support) {
          const Vote& u = model.rankings[r];
          int lo = std::min({u.pos[a], u.pos[b], u.pos[c]});
          int hi = std::max({u.pos[a], u.pos[b], u.pos[c]});
          if (hi - lo != 2) continue;
          std::vector<int> perm = {a, b, c};
          std::vector<std::vector<int>> orders;
          do {
            std::vector<int> o = u.order;
            for (int t = 0; t < 3; ++t) o[lo + t] = perm[t];
            orders.push_back(o);
          } while (std::next_permutation(perm.begin(), perm.end()));
          bool all = true;
          std::vector<int> ids;
          for (const auto& o : orders) {
            auto oit = model.ranking_id.find(o);
            bool realized = false;
            if (oit != model.ranking_id.end()) {
              auto x = model.find_single(VarKind::X, model.rankings[oit->second]);
              realized = x && val(*x);
            }
            if (!realized) {
              all = false;
              break;
            }
            ids.push_back(oit->second);
          }
          if (!all) continue;
          std::sort(ids.begin(), ids.end());
          if (!complete.insert(ids).second) continue;
          std::vector<Vote> cycle;
          for (const auto& o : orders) cycle.push_back(Vote(o));
          cycles.push_back(std::move(cycle));
        }
        if (cycles.size() <= 1) continue;
        Row cap{"C13", {}, RowSense::Le, 1};
        for (const auto& cycle : cycles) cap.terms.push_back({model.ensure_cycle(cycle), 1});
        fresh.push_back(std::move(cap));
      }
    }
  }
}

}  // namespace

int generate_violated(const Election& e, RegionModel& model,
                      const std::vector<signed char>& assignment, const IlpOptions& opt) {
  (void)e;
  for (const Row& row : model.rows) {
    if (!row_holds(row, assignment)) {
      throw Error(ErrorCode::InfeasibleAssignment,
                  "assignment violates an existing " + row.tag + " row");
    }
  }
  auto val = [&](int var) -> int {
    return var < static_cast<int>(assignment.size()) ? assignment[var] : 0;
  };

  std::vector<int> support;  // ranking ids whose realized indicator is set
  for (int i = 0; i < static_cast<int>(assignment.size()); ++i) {
    if (model.vars[i].kind == VarKind::X && assignment[i]) support.push_back(model.vars[i].votes[0]);
  }
  std::sort(support.begin(), support.end());

  int added = 0;
  std::vector<Row> fresh;

  // Forced-step rows: between two realized regions some adjacent step toward
  // the second must also be realized.
  for (int ur : support) {
    for (int vr : support) {
      if (ur == vr || model.c3_done.count({ur, vr})) continue;
      const Vote& u = model.rankings[ur];
      const Vote& v = model.rankings[vr];
      std::vector<Vote> implied = implied_neighbor_step(u, v);
      bool satisfied = false;
      for (const Vote& w : implied) {
        auto xw = model.find_single(VarKind::X, w);
        if (xw && val(*xw)) {
          satisfied = true;
          break;
        }
      }
      if (satisfied) continue;
      Row row{"C3", {}, RowSense::Ge, -1};
      row.terms.push_back({*model.find_single(VarKind::X, u), -1});
      row.terms.push_back({*model.find_single(VarKind::X, v), -1});
      for (const Vote& w : implied) row.terms.push_back({model.ensure_x(w), 1});
      fresh.push_back(std::move(row));
      model.c3_done[{ur, vr}] = true;
    }
  }

  // First-place cover: some region ranking each candidate first is realized.
  // Writable only once every ranking placing the candidate first has a
  // variable, so that the full disjunction can be spelled out.
  long long full_count = factorial(model.m - 1);
  for (int c = 1; c <= model.m; ++c) {
    if (model.c4_done.count(c)) continue;
    std::vector<int> first_vars;
    bool any_support = false;
    for (int r = 0; r < static_cast<int>(model.rankings.size()); ++r) {
      if (model.rankings[r].pos[c] != 0) continue;
      auto x = model.find_single(VarKind::X, model.rankings[r]);
      if (!x) continue;
      first_vars.push_back(*x);
      if (val(*x)) any_support = true;
    }
    if (static_cast<long long>(first_vars.size()) != full_count || any_support) continue;
    Row row{"C4", {}, RowSense::Ge, 1};
    for (int x : first_vars) row.terms.push_back({x, 1});
    fresh.push_back(std::move(row));
    model.c4_done[c] = true;
  }

  // Unbounded-count cap, created on first violation; refresh_aggregates keeps
  // it covering later variables.
  if (model.c6_row < 0) {
    long long outer = 0;
    for (int i = 0; i < static_cast<int>(model.vars.size()); ++i) {
      if (model.vars[i].kind != VarKind::X) continue;
      int iv = model.single_var.at({static_cast<int>(VarKind::Inner), model.vars[i].votes[0]});
      outer += val(i) - val(iv);
    }
    if (outer > 2 * binom2(model.m)) {
      model.rows.push_back({"C6", {}, RowSense::Le, 2 * binom2(model.m)});
      model.c6_row = static_cast<int>(model.rows.size()) - 1;
      model.refresh_aggregates();
      ++added;
    }
  }

  // Degree rows for support regions that do not have one yet.
  for (int r : support) {
    if (model.c10_done.count(r)) continue;
    const Vote& v = model.rankings[r];
    int deg = 0;
    for (const Vote& w : adjacent_votes(v)) {
      auto xw = model.find_single(VarKind::X, w);
      if (xw && val(*xw)) ++deg;
    }
    int iv = *model.find_single(VarKind::Inner, v);
    if (deg >= 2 + val(iv)) continue;
    Row row{"C10", {{*model.find_single(VarKind::X, v), -2}, {iv, -1}}, RowSense::Ge, 0};
    for (const Vote& w : adjacent_votes(v)) row.terms.push_back({model.ensure_x(w), 1});
    fresh.push_back(std::move(row));
    model.c10_done[r] = true;
  }

  // Rim rows for support regions claiming to be unbounded.
  for (int r : support) {
    if (model.c11_done.count(r)) continue;
    if (val(*model.find_single(VarKind::Inner, model.rankings[r]))) continue;
    model.ensure_rim(model.rankings[r]);
    model.c11_done[r] = true;
    ++added;  // ensure_rim appends its rows directly
  }

  // Swap-line capacity.
  for (int a = 1; a <= model.m; ++a) {
    for (int b = a + 1; b <= model.m; ++b) {
      std::vector<std::pair<int, int>> realized;
      for (int r : support) {
        const Vote& u = model.rankings[r];
        if (!pair_adjacent(u, a, b)) continue;
        auto pit = model.ranking_id.find(swapped_order(u.order, a, b));
        if (pit == model.ranking_id.end() || pit->second < r) continue;
        auto xw = model.find_single(VarKind::X, model.rankings[pit->second]);
        if (!xw || !val(*xw)) continue;
        realized.push_back({r, pit->second});
      }
      if (static_cast<long long>(realized.size()) <= swap_line_cap(model.m)) continue;
      Row cap{"C12", {}, RowSense::Le, swap_line_cap(model.m)};
      std::set<int> included;
      for (auto [ur, wr] : realized) {
        int p = model.ensure_pair(model.rankings[ur], model.rankings[wr]);
        if (included.insert(p).second) cap.terms.push_back({p, 1});
      }
      for (const auto& [key, p] : model.group_var) {
        if (model.vars[p].kind != VarKind::PairAnd || included.count(p)) continue;
        const Vote& u = model.rankings[key[0]];
        if (pair_adjacent(u, a, b) && swapped_order(u.order, a, b) == model.rankings[key[1]].order) {
          cap.terms.push_back({p, 1});
          included.insert(p);
        }
      }
      fresh.push_back(std::move(cap));
    }
  }

  // Crossing-pair wheels among support regions.
  for (int a = 1; a <= model.m; ++a) {
    for (int b = a + 1; b <= model.m; ++b) {
      for (int c = a + 1; c <= model.m; ++c) {
        if (c == b) continue;
        for (int d = c + 1; d <= model.m; ++d) {
          if (d == b) continue;
          std::set<std::vector<int>> complete;
          std::vector<std::vector<Vote>> cycles;
          for (int r : support) {
            const Vote& u = model.rankings[r];
            if (!pair_adjacent(u, a, b) || !pair_adjacent(u, c, d)) continue;
            bool all = true;
            std::vector<int> ids;
            for (const auto& o : wheel_orders(u, a, b, c, d)) {
              auto oit = model.ranking_id.find(o);
              bool realized = false;
              if (oit != model.ranking_id.end()) {
                auto xi = model.find_single(VarKind::X, model.rankings[oit->second]);
                realized = xi && val(*xi);
              }
              if (!realized) {
                all = false;
                break;
              }
              ids.push_back(oit->second);
            }
            if (!all) continue;
            std::sort(ids.begin(), ids.end());
            if (!complete.insert(ids).second) continue;
            std::vector<Vote> cycle;
            for (const auto& o : wheel_orders(u, a, b, c, d)) cycle.push_back(Vote(o));
            cycles.push_back(std::move(cycle));
          }
          if (cycles.size() <= 1) continue;
          Row cap{"C13", {}, RowSense::Le, 1};
          for (const auto& cycle : cycles) cap.terms.push_back({model.ensure_cycle(cycle), 1});
          fresh.push_back(std::move(cap));
        }
      }
    }
  }

  if (opt.enable_six_cycles) audit_six_cycles(model, assignment, support, fresh);

  added += static_cast<int>(fresh.size());
  for (Row& row : fresh) model.rows.push_back(std::move(row));
  return added;
}

}  // namespace euclid2
