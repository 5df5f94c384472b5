#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace euclid2 {

enum class ErrorCode {
  TieOrIncomplete,
  Malformed,
  EmptyKeep,
  MismatchedUniverse,
  EmptySubset,
  TooFewVoters,
  SubsetTooLarge,
  EqualVotes,
  TooFewCandidates,
  SolverFailure,
  InfeasibleAssignment,
  MissingPoint,
  CorruptCertificate,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// A strict ranking of candidates 1..m. order[p] is the candidate at 0-based
// position p, position 0 being the most preferred. pos is the inverse table,
// indexed by candidate id (entry 0 unused).
struct Vote {
  std::vector<int> order;
  std::vector<int> pos;

  Vote() = default;
  explicit Vote(std::vector<int> order_in);

  int m() const { return static_cast<int>(order.size()); }
  bool prefers(int a, int b) const { return pos[a] < pos[b]; }

  bool operator==(const Vote& o) const { return order == o.order; }
  bool operator!=(const Vote& o) const { return order != o.order; }
  bool operator<(const Vote& o) const { return order < o.order; }
};

struct VoteHash {
  size_t operator()(const Vote& v) const;
};

// An election over candidates 1..m. Duplicate rankings are collapsed: votes
// holds distinct rankings in first-appearance order and multiplicity counts
// how many voters submitted each. Display names live in a side table sized
// m+1 (entry 0 unused).
struct Election {
  int m = 0;
  std::vector<Vote> votes;
  std::vector<long long> multiplicity;
  std::vector<std::string> names;

  int n_distinct() const { return static_cast<int>(votes.size()); }
  long long n_total() const;
  const std::string& display(int c) const { return names[c]; }
};

// Builds an election from raw rankings with multiplicity 1 each, collapsing
// duplicates. Throws TieOrIncomplete if a ranking is not a permutation of 1..m.
Election make_election(int m, const std::vector<std::vector<int>>& rankings);

struct SubelectionMap {
  std::vector<int> to_original;    // size m'+1, new id -> original id
  std::vector<int> from_original;  // size m+1, original id -> new id, 0 if dropped
};

// Accepts the strict-order subset of the PrefLib format: "#" metadata lines
// (NUMBER ALTERNATIVES, NUMBER VOTERS and ALTERNATIVE NAME are honored, the
// rest ignored) followed by "<count>: <id>,<id>,..." data lines. Ties and
// incomplete rankings are rejected.
Election parse_soc(const std::string& text);

// Renders the election back to .soc text, with name metadata when any
// candidate carries a non-default display name.
std::string to_soc(const Election& e);

// Name-independent canonical text form: universe size plus the distinct
// rankings with multiplicities in stored order. Input to election_digest.
std::string canonical_text(const Election& e);

uint64_t fnv1a64(const std::string& data);

// FNV-1a 64 digest of canonical_text, as fixed-width hex.
std::string election_digest(const Election& e);

// Candidate-induced subelection: keeps exactly the candidates in keep,
// re-densifies ids to 1..|keep| in ascending original order, projects every
// ranking and re-collapses duplicates. Throws EmptyKeep or MismatchedUniverse.
std::pair<Election, SubelectionMap> restrict_candidates(const Election& e,
                                                        const std::vector<int>& keep);

// Voter-induced subelection over the full candidate set. Indices refer to
// distinct rankings; order and multiplicities are preserved.
Election select_voters(const Election& e, const std::vector<int>& voter_indices);

// Kendall tau distance: the number of discordant candidate pairs, which equals
// the minimum number of adjacent transpositions turning u into v.
int swap_distance(const Vote& u, const Vote& v);

// The m-1 rankings reachable from u by one adjacent transposition, in
// ascending position of the swapped pair.
std::vector<Vote> adjacent_votes(const Vote& u);

Vote reverse_vote(const Vote& u);

// Lexicographically first pair (a, b) such that every voter in subset prefers
// a over b and every voter outside prefers b over a. subset holds distinct
// ranking indices. The empty set and the full voter set are never
// controversial and yield nullopt.
std::optional<std::pair<int, int>> controversial_witness(const Election& e,
                                                         const std::vector<int>& subset);

inline long long binom2(long long x) { return x * (x - 1) / 2; }

}  // namespace euclid2
