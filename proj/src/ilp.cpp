#include "euclid2/ilp.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace euclid2 {

long long ub(int m) {
  assert(m >= 1);
  long long mm = m;
  return mm * (3 * mm - 10) * (mm + 1) * (mm - 1) / 24 + mm * (mm - 1) + 1;
}

std::vector<Vote> implied_neighbor_step(const Vote& u, const Vote& v) {
  if (u == v) throw Error(ErrorCode::EqualVotes, "implied_neighbor_step: votes are equal");
  assert(u.m() == v.m());
  std::vector<Vote> out;
  for (int i = 0; i + 1 < u.m(); ++i) {
    int a = u.order[i];
    int b = u.order[i + 1];
    // Swapping a discordant adjacent pair is the only way to get closer to v.
    if (v.prefers(b, a)) {
      std::vector<int> w = u.order;
      std::swap(w[i], w[i + 1]);
      out.emplace_back(Vote(std::move(w)));
    }
  }
  return out;
}

ClosureRun run_closure(const Election& e, const std::atomic<bool>* stop) {
  ClosureRun run;
  run.bound = ub(std::max(e.m, 1));
  std::set<std::vector<int>> seen;
  for (const Vote& v : e.votes) {
    run.votes.push_back(v);
    seen.insert(v.order);
  }
  long long hard_cap = 3 * run.bound + 8;

  bool changed = true;
  while (changed) {
    changed = false;
    // Live bounds: votes appended mid-scan take part in the same scan.
    for (size_t i = 0; i < run.votes.size(); ++i) {
      if (stop && stop->load()) return run;
      for (size_t j = 0; j < run.votes.size(); ++j) {
        if (i == j) continue;
        std::vector<Vote> step = implied_neighbor_step(run.votes[i], run.votes[j]);
        if (step.size() != 1) continue;
        if (!seen.insert(step[0].order).second) continue;
        run.steps.push_back({static_cast<int>(i), static_cast<int>(j), step[0]});
        run.votes.push_back(std::move(step[0]));
        changed = true;
        if (static_cast<long long>(run.votes.size()) > hard_cap) {
          run.exceeded = true;
          return run;
        }
      }
    }
    if (static_cast<long long>(run.votes.size()) > run.bound) {
      run.exceeded = true;
      return run;
    }
  }
  return run;
}

std::optional<ClosureWitness> closure_refute(const Election& e, const std::atomic<bool>* stop) {
  ClosureRun run = run_closure(e, stop);
  if (!run.exceeded) return std::nullopt;
  return ClosureWitness{std::move(run.votes), std::move(run.steps), run.bound};
}

bool verify_closure(const Election& e, const ClosureWitness& w) {
  if (e.m < 1) return false;
  if (w.bound != ub(e.m)) return false;
  size_t n0 = e.votes.size();
  if (w.closure.size() < n0) return false;
  if (w.steps.size() != w.closure.size() - n0) return false;
  std::set<std::vector<int>> seen;
  for (size_t i = 0; i < n0; ++i) {
    if (!(w.closure[i] == e.votes[i])) return false;
    if (!seen.insert(w.closure[i].order).second) return false;
  }
  for (size_t k = 0; k < w.steps.size(); ++k) {
    const ClosureStep& s = w.steps[k];
    size_t at = n0 + k;
    const Vote& added = w.closure[at];
    if (added.m() != e.m) return false;
    if (s.u_index < 0 || s.v_index < 0) return false;
    // Only votes already present may force the next one.
    if (static_cast<size_t>(s.u_index) >= at || static_cast<size_t>(s.v_index) >= at) return false;
    if (s.u_index == s.v_index) return false;
    if (!(s.added == added)) return false;
    std::vector<Vote> step =
        implied_neighbor_step(w.closure[s.u_index], w.closure[s.v_index]);
    if (step.size() != 1) return false;
    if (!(step[0] == added)) return false;
    if (!seen.insert(added.order).second) return false;
  }
  return static_cast<long long>(w.closure.size()) > w.bound;
}

}  // namespace euclid2
