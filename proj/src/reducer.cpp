#include "euclid2/reducer.hpp"

#include <algorithm>
#include <cassert>

namespace euclid2 {

BlockDecomposition maximal_block_decomposition(const Election& e, int k) {
  assert(k >= 1);
  BlockDecomposition dec;
  if (e.m == 0 || e.n_distinct() == 0) return dec;
  int m = e.m;

  std::vector<int> min_pos(m + 1, m), max_pos(m + 1, -1);
  for (const Vote& v : e.votes) {
    for (int c = 1; c <= m; ++c) {
      min_pos[c] = std::min(min_pos[c], v.pos[c]);
      max_pos[c] = std::max(max_pos[c], v.pos[c]);
    }
  }

  // Boundary p splits positions 1..p from p+1..m (1-based). It is usable
  // exactly when no candidate occurs on both sides across the votes.
  std::vector<char> is_boundary(m + 1, 1);
  for (int c = 1; c <= m; ++c) {
    for (int p = min_pos[c] + 1; p <= max_pos[c]; ++p) is_boundary[p] = 0;
  }
  std::vector<int> boundaries;
  for (int p = 0; p <= m; ++p) {
    if (is_boundary[p]) boundaries.push_back(p);
  }

  size_t idx = boundaries.size() - 1;
  std::vector<int> taken = {boundaries[idx]};
  while (idx > 0 && boundaries[idx] - boundaries[idx - 1] <= k) {
    --idx;
    taken.push_back(boundaries[idx]);
  }

  for (size_t i = taken.size() - 1; i > 0; --i) {
    Block b;
    b.lo = taken[i] + 1;
    b.hi = taken[i - 1];
    for (int p = b.lo; p <= b.hi; ++p) b.candidates.push_back(e.votes[0].order[p - 1]);
    std::sort(b.candidates.begin(), b.candidates.end());
    dec.blocks.push_back(std::move(b));
  }
  return dec;
}

std::optional<std::vector<std::pair<int, int>>> find_copy(const Election& e,
                                                          const std::vector<int>& subset) {
  if (subset.empty()) throw Error(ErrorCode::EmptySubset, "find_copy: empty subset");
  if (subset.size() > 3) throw Error(ErrorCode::SubsetTooLarge, "find_copy: subset larger than 3");
  std::vector<int> s = subset;
  std::sort(s.begin(), s.end());
  std::vector<char> in(e.m + 1, 0);
  for (int c : s) {
    if (c < 1 || c > e.m) throw Error(ErrorCode::MismatchedUniverse, "find_copy: candidate id out of range");
    if (in[c]) throw Error(ErrorCode::MismatchedUniverse, "find_copy: duplicate candidate id");
    in[c] = 1;
  }
  std::vector<int> outside;
  for (int c = 1; c <= e.m; ++c) {
    if (!in[c]) outside.push_back(c);
  }

  auto agree = [&](int a, int b, int fa, int fb) {
    for (const Vote& v : e.votes) {
      if (v.prefers(a, b) != v.prefers(fa, fb)) return false;
    }
    return true;
  };

  if (s.size() == 1) {
    if (outside.empty()) return std::nullopt;
    return std::vector<std::pair<int, int>>{{s[0], outside[0]}};
  }
  if (s.size() == 2) {
    for (int fa : outside) {
      for (int fb : outside) {
        if (fb == fa || !agree(s[0], s[1], fa, fb)) continue;
        return std::vector<std::pair<int, int>>{{s[0], fa}, {s[1], fb}};
      }
    }
    return std::nullopt;
  }
  for (int fa : outside) {
    for (int fb : outside) {
      if (fb == fa || !agree(s[0], s[1], fa, fb)) continue;
      for (int fc : outside) {
        if (fc == fa || fc == fb) continue;
        if (agree(s[0], s[2], fa, fc) && agree(s[1], s[2], fb, fc)) {
          return std::vector<std::pair<int, int>>{{s[0], fa}, {s[1], fb}, {s[2], fc}};
        }
      }
    }
  }
  return std::nullopt;
}

const char* reduction_rule_name(ReductionRule rule) {
  switch (rule) {
    case ReductionRule::CopiedBlock: return "copied-block";
    case ReductionRule::SandwichedCandidate: return "sandwiched-candidate";
  }
  return "?";
}

std::optional<StepResult> remove_copied_block(const Election& e) {
  if (e.m < 2 || e.n_distinct() == 0) return std::nullopt;
  BlockDecomposition dec = maximal_block_decomposition(e, 3);
  for (size_t i = dec.blocks.size(); i-- > 0;) {
    const Block& blk = dec.blocks[i];
    auto copy = find_copy(e, blk.candidates);
    if (!copy) continue;
    std::vector<char> drop(e.m + 1, 0);
    for (int c : blk.candidates) drop[c] = 1;
    std::vector<int> keep;
    for (int c = 1; c <= e.m; ++c) {
      if (!drop[c]) keep.push_back(c);
    }
    auto [sub, map] = restrict_candidates(e, keep);
    ReductionStep step;
    step.rule = ReductionRule::CopiedBlock;
    step.removed = blk.candidates;
    step.copy_map = std::move(*copy);
    return StepResult{std::move(sub), std::move(map), std::move(step)};
  }
  return std::nullopt;
}

std::optional<StepResult> remove_sandwiched_candidate(const Election& e) {
  if (e.m < 3 || e.n_distinct() == 0) return std::nullopt;
  for (int b = 1; b <= e.m; ++b) {
    for (int c = 1; c <= e.m; ++c) {
      if (c == b) continue;
      bool adjacent = true;
      for (const Vote& v : e.votes) {
        if (v.pos[c] != v.pos[b] + 1) {
          adjacent = false;
          break;
        }
      }
      if (!adjacent) continue;
      int dominator = 0;
      for (int a = 1; a <= e.m && dominator == 0; ++a) {
        if (a == b) continue;
        bool beats = true;
        for (const Vote& v : e.votes) {
          if (!v.prefers(a, b)) {
            beats = false;
            break;
          }
        }
        if (beats) dominator = a;
      }
      if (dominator == 0) continue;
      std::vector<int> keep;
      for (int x = 1; x <= e.m; ++x) {
        if (x != b) keep.push_back(x);
      }
      auto [sub, map] = restrict_candidates(e, keep);
      ReductionStep step;
      step.rule = ReductionRule::SandwichedCandidate;
      step.removed = {b};
      step.dominator = dominator;
      step.successor = c;
      return StepResult{std::move(sub), std::move(map), std::move(step)};
    }
  }
  return std::nullopt;
}

std::pair<Election, ReductionTrace> reduce_fixpoint(const Election& e) {
  Election cur = e;
  ReductionTrace trace;
  std::vector<int> to_original(cur.m + 1, 0);
  for (int c = 1; c <= cur.m; ++c) to_original[c] = c;

  for (;;) {
    std::optional<StepResult> r = remove_copied_block(cur);
    if (!r) r = remove_sandwiched_candidate(cur);
    if (!r) break;

    ReductionStep step = std::move(r->step);
    for (int& c : step.removed) c = to_original[c];
    for (auto& [a, fa] : step.copy_map) {
      a = to_original[a];
      fa = to_original[fa];
    }
    if (step.dominator > 0) step.dominator = to_original[step.dominator];
    if (step.successor > 0) step.successor = to_original[step.successor];
    trace.steps.push_back(std::move(step));

    std::vector<int> next_map(r->election.m + 1, 0);
    for (int c = 1; c <= r->election.m; ++c) next_map[c] = to_original[r->map.to_original[c]];
    to_original = std::move(next_map);
    cur = std::move(r->election);
  }
  trace.reduced_to_original = std::move(to_original);
  return {std::move(cur), std::move(trace)};
}

Election replay_trace(const Election& e, const ReductionTrace& trace) {
  Election cur = e;
  std::vector<int> to_original(e.m + 1, 0), from_original(e.m + 1, 0);
  for (int c = 1; c <= e.m; ++c) to_original[c] = from_original[c] = c;

  auto fail = [](const char* what) -> int {
    throw Error(ErrorCode::CorruptCertificate, std::string("replay_trace: ") + what);
  };
  auto cur_id = [&](int original) {
    if (original < 1 || original > e.m) fail("candidate id out of range");
    int c = from_original[original];
    if (c == 0) fail("step references an already removed candidate");
    return c;
  };

  for (const ReductionStep& step : trace.steps) {
    std::vector<int> removed;
    for (int original : step.removed) removed.push_back(cur_id(original));
    std::sort(removed.begin(), removed.end());
    if (std::adjacent_find(removed.begin(), removed.end()) != removed.end()) {
      fail("duplicate candidate in removed set");
    }

    if (step.rule == ReductionRule::CopiedBlock) {
      if (removed.empty() || removed.size() > 3) fail("copied-block removal of bad size");
      BlockDecomposition dec = maximal_block_decomposition(cur, 3);
      bool is_block = false;
      for (const Block& b : dec.blocks) {
        if (b.candidates == removed) {
          is_block = true;
          break;
        }
      }
      if (!is_block) fail("removed set is not a block of the maximal decomposition");
      if (step.copy_map.size() != removed.size()) fail("copy map size mismatch");
      std::vector<char> in(cur.m + 1, 0), used(cur.m + 1, 0), covered(cur.m + 1, 0);
      for (int c : removed) in[c] = 1;
      std::vector<std::pair<int, int>> local;
      for (auto [oa, ofa] : step.copy_map) {
        int a = cur_id(oa), fa = cur_id(ofa);
        if (!in[a]) fail("copy map domain outside the removed block");
        if (covered[a]) fail("copy map repeats a domain candidate");
        covered[a] = 1;
        if (in[fa]) fail("copy image inside the removed block");
        if (used[fa]) fail("copy map repeats an image candidate");
        used[fa] = 1;
        local.emplace_back(a, fa);
      }
      for (size_t i = 0; i < local.size(); ++i) {
        for (size_t j = i + 1; j < local.size(); ++j) {
          for (const Vote& v : cur.votes) {
            if (v.prefers(local[i].first, local[j].first) !=
                v.prefers(local[i].second, local[j].second)) {
              fail("copy map does not preserve vote order");
            }
          }
        }
      }
    } else {
      if (removed.size() != 1) fail("sandwiched-candidate removal of bad size");
      if (cur.m < 3) fail("sandwiched-candidate rule needs at least 3 candidates");
      int b = removed[0];
      int c = cur_id(step.successor);
      int a = cur_id(step.dominator);
      if (c == b || a == b) fail("degenerate sandwiched-candidate witness");
      for (const Vote& v : cur.votes) {
        if (v.pos[c] != v.pos[b] + 1) fail("successor is not adjacent in every vote");
        if (!v.prefers(a, b)) fail("dominator does not beat the candidate in every vote");
      }
    }

    std::vector<char> drop(cur.m + 1, 0);
    for (int c : removed) drop[c] = 1;
    std::vector<int> keep;
    for (int c = 1; c <= cur.m; ++c) {
      if (!drop[c]) keep.push_back(c);
    }
    auto [sub, map] = restrict_candidates(cur, keep);
    std::vector<int> next_to(sub.m + 1, 0);
    std::fill(from_original.begin(), from_original.end(), 0);
    for (int c = 1; c <= sub.m; ++c) {
      next_to[c] = to_original[map.to_original[c]];
      from_original[next_to[c]] = c;
    }
    to_original = std::move(next_to);
    cur = std::move(sub);
  }

  if (to_original != trace.reduced_to_original) fail("final candidate map disagrees with trace");
  return cur;
}

}  // namespace euclid2
