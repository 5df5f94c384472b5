#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "euclid2/election.hpp"

namespace euclid2 {

// A run of consecutive positions holding the same candidate set in every vote.
// Positions are 1-based and the interval is closed; candidates are sorted.
struct Block {
  int lo = 0;
  int hi = 0;
  std::vector<int> candidates;

  bool operator==(const Block&) const = default;
};

// Consecutive blocks covering a suffix of the position range, last block ending
// at position m. May be empty when no block of size <= k ends at m.
struct BlockDecomposition {
  std::vector<Block> blocks;
};

// The unique decomposition with the maximum number of blocks of size <= k.
// Block boundaries can only sit at positions where the tail candidate set is
// the same in every vote; taking every such boundary from the right until the
// first gap wider than k maximizes the count.
BlockDecomposition maximal_block_decomposition(const Election& e, int k);

// Searches for an order-preserving injection f of subset into the remaining
// candidates: a beats b exactly when f(a) beats f(b), in every vote. Returns
// the (a, f(a)) pairs for the first such tuple in ascending id order, or
// nullopt. Throws EmptySubset, SubsetTooLarge (|subset| > 3) or
// MismatchedUniverse.
std::optional<std::vector<std::pair<int, int>>> find_copy(const Election& e,
                                                          const std::vector<int>& subset);

enum class ReductionRule {
  CopiedBlock,
  SandwichedCandidate,
};

const char* reduction_rule_name(ReductionRule rule);

struct ReductionStep {
  ReductionRule rule = ReductionRule::CopiedBlock;
  std::vector<int> removed;
  // CopiedBlock only: the order-preserving injection that justifies removal.
  std::vector<std::pair<int, int>> copy_map;
  // SandwichedCandidate only: a candidate beating the removed one in every
  // vote, and the candidate placed directly after it in every vote.
  int dominator = 0;
  int successor = 0;

  bool operator==(const ReductionStep&) const = default;
};

struct StepResult {
  Election election;
  SubelectionMap map;
  ReductionStep step;  // ids local to the input election
};

// Removes the last block of the maximal 3-block decomposition that has a copy
// among the remaining candidates. Equivalence rests on re-embedding the block
// next to its copy, which is established for blocks of size up to 3 only.
std::optional<StepResult> remove_copied_block(const Election& e);

// Removes the first candidate b (ascending id, then ascending successor id)
// that is directly followed by the same candidate c in every vote and beaten
// by some common candidate a in every vote. The smallest such a is recorded.
std::optional<StepResult> remove_sandwiched_candidate(const Election& e);

struct ReductionTrace {
  std::vector<ReductionStep> steps;     // ids refer to the original election
  std::vector<int> reduced_to_original; // size m'+1, entry 0 unused
};

// Applies the two rules until neither fires, preferring the copied-block rule
// in each round. The trace records every step in original candidate ids; the
// result always keeps at least one candidate.
std::pair<Election, ReductionTrace> reduce_fixpoint(const Election& e);

// Re-applies a recorded trace to the election it was produced from, verifying
// each step's rule conditions before restricting. Any valid application is
// accepted. Throws CorruptCertificate when a step does not check out or the
// final id map disagrees with the trace.
Election replay_trace(const Election& e, const ReductionTrace& trace);

}  // namespace euclid2
