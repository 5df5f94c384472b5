#include <algorithm>
#include <chrono>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "euclid2/portfolio.hpp"

namespace euclid2 {

namespace {

// Orders differing by exactly one swap of adjacent positions; reports the
// swapped candidate pair, smaller id first.
std::optional<std::pair<int, int>> adjacent_swap_diff(const std::vector<int>& a,
                                                      const std::vector<int>& b) {
  if (a.size() != b.size()) return std::nullopt;
  size_t i = 0;
  while (i < a.size() && a[i] == b[i]) ++i;
  if (i + 1 >= a.size()) return std::nullopt;
  if (a[i] != b[i + 1] || a[i + 1] != b[i]) return std::nullopt;
  for (size_t k = i + 2; k < a.size(); ++k)
    if (a[k] != b[k]) return std::nullopt;
  return std::make_pair(std::min(a[i], a[i + 1]), std::max(a[i], a[i + 1]));
}

using Pairing = std::set<std::pair<int, int>>;

// A four-ranking wheel: two disjoint adjacent transpositions applied to a base
// ranking in every combination. Reports the two swapped pairs.
std::optional<Pairing> wheel4_pairing(const std::vector<std::vector<int>>& orders) {
  if (orders.size() != 4) return std::nullopt;
  const std::vector<int>& base = orders[0];
  std::vector<size_t> near;
  std::vector<std::pair<int, int>> swaps;
  size_t far = 0;
  for (size_t k = 1; k < 4; ++k) {
    if (auto p = adjacent_swap_diff(base, orders[k])) {
      near.push_back(k);
      swaps.push_back(*p);
    } else {
      far = k;
    }
  }
  if (near.size() != 2 || far == 0) return std::nullopt;
  const auto& [a, b] = swaps[0];
  const auto& [c, d] = swaps[1];
  if (a == c || a == d || b == c || b == d) return std::nullopt;
  std::vector<int> both = base;
  auto apply = [&](int x, int y) {
    for (size_t i = 0; i + 1 < both.size(); ++i) {
      if ((both[i] == x && both[i + 1] == y) || (both[i] == y && both[i + 1] == x)) {
        std::swap(both[i], both[i + 1]);
        return true;
      }
    }
    return false;
  };
  if (!apply(a, b) || !apply(c, d)) return std::nullopt;
  if (both != orders[far]) return std::nullopt;
  return Pairing{swaps[0], swaps[1]};
}

// A six-ranking wheel: all arrangements of one candidate triple across three
// consecutive positions, identical elsewhere. Reports the triple.
std::optional<std::set<int>> wheel6_triple(const std::vector<std::vector<int>>& orders) {
  if (orders.size() != 6) return std::nullopt;
  const std::vector<int>& base = orders[0];
  size_t lo = base.size(), hi = 0;
  bool any = false;
  for (size_t k = 1; k < 6; ++k) {
    if (orders[k].size() != base.size()) return std::nullopt;
    for (size_t i = 0; i < base.size(); ++i) {
      if (orders[k][i] != base[i]) {
        lo = std::min(lo, i);
        hi = std::max(hi, i);
        any = true;
      }
    }
  }
  // Six distinct arrangements cannot fit in fewer than three positions.
  if (!any || hi - lo + 1 != 3) return std::nullopt;
  std::set<int> triple{base[lo], base[lo + 1], base[lo + 2]};
  for (const auto& ord : orders) {
    for (size_t i = 0; i < base.size(); ++i) {
      bool inside = i >= lo && i <= hi;
      if (inside && triple.count(ord[i]) == 0) return std::nullopt;
      if (!inside && ord[i] != base[i]) return std::nullopt;
    }
  }
  std::set<std::vector<int>> distinct(orders.begin(), orders.end());
  if (distinct.size() != 6) return std::nullopt;
  return triple;
}

// Audits an infeasibility certificate: structural sanity, then a sound-shape
// check for every row, then a fresh solve of the recorded system. Empty
// string means the certificate stands.
std::string audit_ilp_certificate(const Election& reduced, const IlpCertificate& cert) {
  if (cert.status != "infeasible") return "status is not infeasible";
  const std::vector<int>& cs = cert.candidate_subset;
  if (cs.size() < 4) return "candidate subset has fewer than four candidates";
  for (size_t i = 0; i < cs.size(); ++i) {
    if (cs[i] < 1 || cs[i] > reduced.m) return "candidate subset id out of range";
    if (i > 0 && cs[i] <= cs[i - 1]) return "candidate subset is not strictly ascending";
  }
  Election sub = restrict_candidates(reduced, cs).first;
  int m = sub.m;

  if (cert.rankings.empty()) return "certificate has no rankings";
  std::set<std::vector<int>> distinct_rankings;
  for (const Vote& r : cert.rankings) {
    if (r.m() != m) return "ranking length disagrees with the candidate subset";
    std::vector<char> seen(m + 1, 0);
    for (int c : r.order) {
      if (c < 1 || c > m || seen[c]) return "ranking is not a permutation";
      seen[c] = 1;
    }
    if (!distinct_rankings.insert(r.order).second) return "duplicate ranking";
  }

  int nvars = static_cast<int>(cert.vars.size());
  for (const auto& var : cert.vars) {
    size_t want = 1;
    if (var.kind == VarKind::PairAnd) want = 2;
    if (var.kind == VarKind::CycleAnd) want = var.votes.size() == 6 ? 6 : 4;
    if (var.votes.size() != want) return "variable member count is wrong for its kind";
    for (size_t i = 0; i < var.votes.size(); ++i) {
      if (var.votes[i] < 0 || var.votes[i] >= static_cast<int>(cert.rankings.size()))
        return "variable references a missing ranking";
      if (i > 0 && var.votes[i] <= var.votes[i - 1])
        return "group variable members are not strictly ascending";
    }
  }

  std::set<std::vector<int>> sub_orders;
  for (const Vote& v : sub.votes) sub_orders.insert(v.order);

  auto order_of = [&](int var) -> const std::vector<int>& {
    return cert.rankings[cert.vars[var].votes[0]].order;
  };
  auto member_orders = [&](int var) {
    std::vector<std::vector<int>> out;
    for (int r : cert.vars[var].votes) out.push_back(cert.rankings[r].order);
    return out;
  };
  auto order_set = [&](const std::vector<int>& vars) {
    std::set<std::vector<int>> out;
    for (int v : vars) out.insert(order_of(v));
    return out;
  };
  auto vote_orders = [&](const std::vector<Vote>& vs) {
    std::set<std::vector<int>> out;
    for (const Vote& v : vs) out.insert(v.order);
    return out;
  };
  auto subset_of = [](const std::set<std::vector<int>>& inner,
                      const std::set<std::vector<int>>& outer) {
    return std::all_of(inner.begin(), inner.end(),
                       [&](const std::vector<int>& o) { return outer.count(o) > 0; });
  };

  // Per row: every referenced variable exists exactly once, then the tag's
  // shape must hold. Weaker-by-relaxation right-hand sides are accepted.
  for (const Row& row : cert.rows) {
    if (row.terms.empty()) return "row has no terms";
    std::set<int> used;
    std::map<std::pair<VarKind, long long>, std::vector<int>> groups;
    for (const LinTerm& t : row.terms) {
      if (t.var < 0 || t.var >= nvars) return "row references a missing variable";
      if (t.coef == 0) return "row has a zero coefficient";
      if (!used.insert(t.var).second) return "row repeats a variable";
      groups[{cert.vars[t.var].kind, t.coef}].push_back(t.var);
    }
    auto take = [&](VarKind k, long long c) -> const std::vector<int>& {
      static const std::vector<int> empty;
      auto it = groups.find({k, c});
      return it == groups.end() ? empty : it->second;
    };
    auto only = [&](std::initializer_list<std::pair<VarKind, long long>> allowed) {
      for (const auto& g : groups)
        if (std::find(allowed.begin(), allowed.end(), g.first) == allowed.end()) return false;
      return true;
    };
    const std::string& tag = row.tag;
    std::string why;

    if (tag == "C1") {
      const auto& xs = take(VarKind::X, 1);
      if (row.sense != RowSense::Eq || row.rhs != 1 || row.terms.size() != 1 || xs.size() != 1)
        why = "input rows pin one realized variable to one";
      else if (sub_orders.count(order_of(xs[0])) == 0)
        why = "input row ranking is not a vote of the subelection";
    } else if (tag == "C2") {
      const auto& xs = take(VarKind::X, 1);
      if (row.sense != RowSense::Le || row.rhs < ub(m) || xs.size() != row.terms.size() ||
          order_set(xs).size() != xs.size())
        why = "realized-count cap must be a plain sum bounded by the region limit";
    } else if (tag == "C3") {
      const auto& mins = take(VarKind::X, -1);
      const auto& plus = take(VarKind::X, 1);
      if (row.sense != RowSense::Ge || row.rhs > -1 || mins.size() != 2 ||
          !only({{VarKind::X, -1}, {VarKind::X, 1}}))
        why = "support rows relate two rankings to their step set";
      else if (order_of(mins[0]) == order_of(mins[1]))
        why = "support row uses one ranking twice";
      else {
        Vote u(order_of(mins[0]));
        Vote v(order_of(mins[1]));
        auto have = order_set(plus);
        bool fwd = subset_of(vote_orders(implied_neighbor_step(u, v)), have);
        bool bwd = subset_of(vote_orders(implied_neighbor_step(v, u)), have);
        if (!fwd && !bwd) why = "support row omits part of the step set";
      }
    } else if (tag == "C4") {
      const auto& xs = take(VarKind::X, 1);
      if (row.sense != RowSense::Ge || row.rhs > 1 || xs.size() != row.terms.size())
        why = "first-place rows are plain sums with a one lower bound";
      else {
        int first = order_of(xs[0])[0];
        std::set<std::vector<int>> seen;
        bool ok = true;
        for (int v : xs) {
          if (order_of(v)[0] != first || !seen.insert(order_of(v)).second) ok = false;
        }
        unsigned long long want = 1;
        for (int k = 2; k <= m - 1 && want < (1ull << 62); ++k) want *= k;
        if (!ok || seen.size() != want) why = "first-place row must cover every such ranking";
      }
    } else if (tag == "C5") {
      const auto& in = take(VarKind::Inner, 1);
      const auto& xs = take(VarKind::X, -1);
      if (row.sense != RowSense::Le || row.rhs < 0 || row.terms.size() != 2 || in.size() != 1 ||
          xs.size() != 1 || order_of(in[0]) != order_of(xs[0]))
        why = "bounded implies realized, one ranking at a time";
    } else if (tag == "C6") {
      const auto& xs = take(VarKind::X, 1);
      const auto& in = take(VarKind::Inner, -1);
      if (row.sense != RowSense::Le || row.rhs < static_cast<long long>(m) * (m - 1) ||
          !only({{VarKind::X, 1}, {VarKind::Inner, -1}}) || xs.size() != in.size())
        why = "unbounded-count cap pairs realized against bounded";
      else if (order_set(xs) != order_set(in) || order_set(xs).size() != xs.size())
        why = "unbounded-count cap must pair both variables of each ranking";
    } else if (tag == "C7") {
      const auto& in = take(VarKind::Inner, 1);
      if (row.sense != RowSense::Le || row.rhs < 1 || row.terms.size() != 2 || in.size() != 2)
        why = "opposite bounded regions exclude each other";
      else {
        Vote t(order_of(in[0]));
        if (order_of(in[1]) != reverse_vote(t).order) why = "rankings are not reverses";
      }
    } else if (tag == "C8") {
      const auto& xm = take(VarKind::X, -1);
      const auto& in = take(VarKind::Inner, 1);
      const auto& xp = take(VarKind::X, 1);
      if (row.sense != RowSense::Ge || row.rhs > 0 || row.terms.size() != 3 || xm.size() != 1 ||
          in.size() != 1 || xp.size() != 1 || order_of(xm[0]) != order_of(in[0]) ||
          order_of(xp[0]) != reverse_vote(Vote(order_of(xm[0]))).order)
        why = "an unbounded region forces its reverse to be realized";
    } else if (tag == "C9") {
      const auto& xm = take(VarKind::X, -1);
      const auto& ip = take(VarKind::Inner, 1);
      const auto& im = take(VarKind::Inner, -1);
      if (row.sense != RowSense::Ge || row.rhs > -1 || row.terms.size() != 3 || xm.size() != 1 ||
          ip.size() != 1 || im.size() != 1 || order_of(xm[0]) != order_of(ip[0]) ||
          order_of(im[0]) != reverse_vote(Vote(order_of(xm[0]))).order)
        why = "an unbounded region forces its reverse to be unbounded";
    } else if (tag == "C10") {
      const auto& anchor = take(VarKind::X, -2);
      const auto& in = take(VarKind::Inner, -1);
      const auto& nb = take(VarKind::X, 1);
      if (row.sense != RowSense::Ge || row.rhs > 0 || anchor.size() != 1 || in.size() != 1 ||
          !only({{VarKind::X, -2}, {VarKind::Inner, -1}, {VarKind::X, 1}}) ||
          order_of(anchor[0]) != order_of(in[0]))
        why = "degree rows anchor one ranking against its swap neighbors";
      else if (!subset_of(vote_orders(adjacent_votes(Vote(order_of(anchor[0])))), order_set(nb)))
        why = "degree row omits a swap neighbor";
    } else if (tag == "C11") {
      bool ok = false;
      do {
        const auto& xm = take(VarKind::X, -1);
        const auto& ip = take(VarKind::Inner, 1);
        const auto& rim = take(VarKind::Rim, 1);
        if (row.sense == RowSense::Ge && row.rhs <= 0 && row.terms.size() == 3 &&
            xm.size() == 1 && ip.size() == 1 && rim.size() == 1 &&
            order_of(xm[0]) == order_of(ip[0]) && order_of(ip[0]) == order_of(rim[0])) {
          ok = true;
          break;
        }
        const auto& rim2 = take(VarKind::Rim, 2);
        if (row.sense == RowSense::Le && row.rhs >= 0 && rim2.size() == 1 &&
            only({{VarKind::Rim, 2}, {VarKind::X, -1}, {VarKind::Inner, 1}}) &&
            order_set(xm) == order_set(ip) && order_set(xm).size() == xm.size() &&
            subset_of(vote_orders(adjacent_votes(Vote(order_of(rim2[0])))), order_set(xm))) {
          ok = true;
          break;
        }
        const auto& rimc = take(VarKind::Rim, m - 3);
        const auto& xp = take(VarKind::X, 1);
        const auto& im = take(VarKind::Inner, -1);
        if (row.sense == RowSense::Le && row.rhs >= m - 1 && rimc.size() == 1 &&
            only({{VarKind::Rim, m - 3}, {VarKind::X, 1}, {VarKind::Inner, -1}}) &&
            order_set(xp) == order_set(im) && order_set(xp).size() == xp.size() &&
            subset_of(order_set(xp), vote_orders(adjacent_votes(Vote(order_of(rimc[0])))))) {
          ok = true;
          break;
        }
      } while (false);
      if (!ok) why = "rim row matches none of the three admitted shapes";
    } else if (tag == "C12") {
      const auto& ps = take(VarKind::PairAnd, 1);
      if (row.sense != RowSense::Le ||
          row.rhs < binom2(m - 2) + (m - 1) || ps.size() != row.terms.size())
        why = "swap-pair cap must be a plain sum with the arrangement bound";
      else {
        std::optional<std::pair<int, int>> common;
        std::set<std::vector<int>> member_sets;
        for (int v : ps) {
          auto mo = member_orders(v);
          auto p = adjacent_swap_diff(mo[0], mo[1]);
          if (!p || (common && *common != *p) ||
              !member_sets.insert(cert.vars[v].votes).second) {
            why = "swap-pair cap mixes candidate pairs";
            break;
          }
          common = *p;
        }
      }
    } else if (tag == "C13") {
      const auto& ws = take(VarKind::CycleAnd, 1);
      if (row.sense != RowSense::Le || row.rhs < 1 || ws.size() != row.terms.size())
        why = "wheel cap must be a plain sum bounded by one";
      else {
        std::optional<Pairing> pairing;
        std::optional<std::set<int>> triple;
        bool four = false, six = false;
        std::set<std::vector<int>> member_sets;
        for (int v : ws) {
          if (!member_sets.insert(cert.vars[v].votes).second) {
            why = "wheel cap repeats a wheel";
            break;
          }
          auto mo = member_orders(v);
          if (mo.size() == 4) {
            auto p = wheel4_pairing(mo);
            if (!p || (pairing && *pairing != *p)) {
              why = "wheel cap member is not a wheel over one swapped pairing";
              break;
            }
            pairing = *p;
            four = true;
          } else {
            auto t = wheel6_triple(mo);
            if (!t || (triple && *triple != *t)) {
              why = "wheel cap member is not a wheel over one triple";
              break;
            }
            triple = *t;
            six = true;
          }
        }
        if (why.empty() && four && six) why = "wheel cap mixes wheel sizes";
      }
    } else if (tag == "H1" || tag == "H2") {
      VarKind and_kind = tag == "H1" ? VarKind::PairAnd : VarKind::CycleAnd;
      const auto& ap = take(and_kind, 1);
      const auto& xm = take(VarKind::X, -1);
      bool upper = row.sense == RowSense::Le && row.rhs >= 0 && row.terms.size() == 2 &&
                   ap.size() == 1 && xm.size() == 1;
      if (upper) {
        auto mo = member_orders(ap[0]);
        if (std::find(mo.begin(), mo.end(), order_of(xm[0])) == mo.end())
          why = "conjunction is capped by a non-member";
      } else if (tag == "H1" && row.sense == RowSense::Ge && row.rhs <= -1 &&
                 row.terms.size() == 3 && ap.size() == 1 && xm.size() == 2) {
        if (order_set(xm) != vote_orders({Vote(member_orders(ap[0])[0]),
                                          Vote(member_orders(ap[0])[1])}))
          why = "conjunction lower bound must range over its members";
      } else {
        why = "linearization row shape not recognized";
      }
    } else if (tag == "H3") {
      const auto& ap = take(VarKind::CycleAnd, 1);
      const auto& xm = take(VarKind::X, -1);
      long long k = ap.size() == 1 ? static_cast<long long>(cert.vars[ap[0]].votes.size()) : 0;
      if (row.sense != RowSense::Ge || ap.size() != 1 || row.rhs > -(k - 1) ||
          row.terms.size() != static_cast<size_t>(k) + 1 ||
          static_cast<long long>(xm.size()) != k)
        why = "conjunction lower bound must range over its members";
      else {
        std::set<std::vector<int>> members;
        for (const auto& o : member_orders(ap[0])) members.insert(o);
        if (order_set(xm) != members) why = "conjunction lower bound must range over its members";
      }
    } else {
      why = "unknown row family";
    }
    if (!why.empty()) return "row " + tag + ": " + why;
  }

  // The recorded system must still be infeasible on its own.
  RegionModel model;
  model.m = m;
  model.rankings = cert.rankings;
  for (size_t i = 0; i < cert.rankings.size(); ++i)
    model.ranking_id[cert.rankings[i].order] = static_cast<int>(i);
  for (size_t i = 0; i < cert.vars.size(); ++i) {
    model.vars.push_back({cert.vars[i].kind, cert.vars[i].votes});
    if (cert.vars[i].votes.size() == 1)
      model.single_var[{static_cast<int>(cert.vars[i].kind), cert.vars[i].votes[0]}] =
          static_cast<int>(i);
    else
      model.group_var[cert.vars[i].votes] = static_cast<int>(i);
  }
  model.rows = cert.rows;
  SolveResult res = solve_01(model, "builtin", std::chrono::milliseconds(10000));
  if (res.status == SolveStatus::Feasible) return "recorded row system is satisfiable";
  if (res.status == SolveStatus::Timeout) return "re-solving the row system timed out";
  return "";
}

}  // namespace

CheckResult verify_certificate(const Election& e, const Verdict& v) {
  if (v.status == Status::Unknown)
    return {false, "unknown verdicts carry no certificate"};
  Election reduced;
  try {
    reduced = replay_trace(e, v.trace);
  } catch (const Error& err) {
    return {false, std::string("trace replay failed: ") + err.what()};
  }

  if (const auto* t = std::get_if<TrivialCertificate>(&v.certificate)) {
    if (v.status != Status::Euclidean) return {false, "screen certificates assert embeddability"};
    bool holds = false;
    if (t->rule == kRuleFewCandidates) holds = reduced.m <= 3;
    else if (t->rule == kRuleTwoVotes) holds = reduced.n_distinct() <= 2;
    else if (t->rule == kRuleThreeVotesSevenCandidates)
      holds = reduced.n_distinct() <= 3 && reduced.m <= 7;
    else return {false, "unknown screen rule: " + t->rule};
    if (!holds) return {false, "screen rule does not hold for the reduced election"};
    return {true, ""};
  }
  if (const auto* c = std::get_if<Pattern38Certificate>(&v.certificate)) {
    if (v.status != Status::NotEuclidean) return {false, "refutations must claim not-euclidean"};
    if (!verify_38(reduced, *c)) return {false, "pattern witness does not check out"};
    return {true, ""};
  }
  if (const auto* c = std::get_if<HullCertificate>(&v.certificate)) {
    if (v.status != Status::NotEuclidean) return {false, "refutations must claim not-euclidean"};
    if (!verify_hull(reduced, *c)) return {false, "hull witness does not check out"};
    return {true, ""};
  }
  if (const auto* c = std::get_if<ClosureWitness>(&v.certificate)) {
    if (v.status != Status::NotEuclidean) return {false, "refutations must claim not-euclidean"};
    if (!verify_closure(reduced, *c)) return {false, "closure witness does not check out"};
    return {true, ""};
  }
  if (const auto* c = std::get_if<IlpCertificate>(&v.certificate)) {
    if (v.status != Status::NotEuclidean) return {false, "refutations must claim not-euclidean"};
    try {
      std::string why = audit_ilp_certificate(reduced, *c);
      if (!why.empty()) return {false, why};
    } catch (const Error& err) {
      return {false, std::string("infeasibility audit failed: ") + err.what()};
    }
    return {true, ""};
  }
  if (const auto* c = std::get_if<Embedding>(&v.certificate)) {
    if (v.status != Status::Euclidean) return {false, "embeddings assert embeddability"};
    VerifyReport rep;
    try {
      rep = verify_embedding(reduced, *c, 0.0);
    } catch (const Error& err) {
      return {false, std::string("embedding check failed: ") + err.what()};
    }
    if (!rep.accepted) {
      if (!rep.coincident.empty()) return {false, "embedding places two points together"};
      return {false, "embedding breaks a preference at zero tolerance"};
    }
    return {true, ""};
  }
  return {false, "verdict carries no certificate"};
}

}  // namespace euclid2
