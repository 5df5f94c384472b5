#pragma once

#include <atomic>
#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "euclid2/election.hpp"

namespace euclid2 {

// One squared-distance comparison: the voter's point must be closer to
// better than to worse with slack margin, i.e.
//   sd(voter, better) + margin <= sd(voter, worse).
// voter indexes the system's distinct rankings, better/worse are candidate ids.
struct QcpRow {
  int voter = 0;
  int better = 0;
  int worse = 0;
};

// Feasibility program over one planar point per candidate and one per
// distinct ranking. Every coordinate is bounded by the box:
// |x| <= box.first, |y| <= box.second, two bound rows per point.
struct QcpSystem {
  int m = 0;
  std::vector<Vote> votes;  // distinct rankings, row.voter indexes this
  double margin = 1.0;
  std::pair<double, double> box{100.0, 100.0};
  std::vector<QcpRow> rows;

  int n() const { return static_cast<int>(votes.size()); }
  int point_count() const { return m + n(); }
  int box_row_count() const { return 2 * point_count(); }
};

// Candidate and voter points of a claimed realization. cand[c-1] is the
// point of candidate c, voter[i] the point of distinct ranking i.
// achieved_margin is the smallest squared-distance gap over every ordered
// candidate pair of every ranking, +infinity when there are no pairs.
struct Embedding {
  std::vector<std::pair<double, double>> cand;
  std::vector<std::pair<double, double>> voter;
  double achieved_margin = 0.0;
};

struct PointRef {
  bool is_voter = false;
  int id = 0;  // candidate id, or distinct-ranking index when is_voter
};

struct OrderViolation {
  int voter = 0;  // distinct-ranking index
  int better = 0;
  int worse = 0;
  double gap = 0.0;  // sd(voter, worse) - sd(voter, better)
};

struct VerifyReport {
  bool accepted = false;
  std::vector<OrderViolation> order_violations;
  std::vector<std::pair<PointRef, PointRef>> coincident;
};

struct QcpOptions {
  double eps_star = 1.0;
  double box_init = 100.0;
  double slice_init_secs = 10.0;
  double box_factor = 10.0;
  double slice_factor = 2.0;
  int restarts = 200;  // per slice
  bool full_pairs = false;
  std::string solver = "builtin";  // or "external:<command>"
};

// One row per consecutive pair of each distinct ranking; with full_pairs one
// row per ordered pair instead. Rows are emitted ranking-major in position
// order, so the consecutive rows chain into every full comparison.
QcpSystem build_qcp(const Election& e, double eps_star, std::pair<double, double> box,
                    bool full_pairs = false);

// Searches for coordinates satisfying every row of sys. The builtin solver
// minimizes the hinge penalty sum max(0, violation)^2 by multi-start
// gradient descent, restart points uniform in the box, sequential restarts
// with seeds derived from seed; a restart succeeds only at penalty exactly
// zero, which makes every row hold with slack margin, and the embedding is
// then re-verified over all pairs at tolerance zero before it is returned.
// External solvers get the system as a text file and must print one
// "candidate <id> <x> <y>" or "voter <index> <x> <y>" line per point; their
// answer is re-verified and a failing or partial answer throws
// SolverFailure. Finding nothing is reported as absent, never as a verdict:
// the search is incomplete and says nothing about infeasibility.
std::optional<Embedding> solve_feasibility(const QcpSystem& sys, std::chrono::milliseconds budget,
                                           uint64_t seed, const QcpOptions& opt = {},
                                           const std::atomic<bool>* stop = nullptr);

// Escalation ladder: rounds with box (box_init, box_init*box_factor, ...)
// capped at 1e7 and per-round time slices (slice_init_secs, *slice_factor,
// ...), each round a fresh solve_feasibility call with a derived seed, until
// an embedding is found or the global budget runs out.
std::optional<Embedding> escalate_embed(const Election& e, std::chrono::milliseconds budget,
                                        const QcpOptions& opt = {}, uint64_t seed = 1,
                                        const std::atomic<bool>* stop = nullptr);

// Checks emb against every ordered candidate pair of every distinct ranking,
// requiring sd(voter, better) + tolerance <= sd(voter, worse), plus exact
// pairwise distinctness of all points. Throws MissingPoint when emb does not
// cover all candidates and rankings.
VerifyReport verify_embedding(const Election& e, const Embedding& emb, double tolerance);

// Smallest squared-distance gap over all ordered pairs of all distinct
// rankings, +infinity when there are no pairs. Negative iff some pair is
// inverted.
double embedding_margin(const Election& e, const Embedding& emb);

// Coordinates scaled by lambda; squared-distance gaps and achieved_margin
// scale by lambda^2.
Embedding scale_embedding(const Embedding& emb, double lambda);

// Nearest double to v's decimal rendering with the given significant digits.
// 17 digits reproduces v exactly.
double round_significant(double v, int digits);

}  // namespace euclid2
