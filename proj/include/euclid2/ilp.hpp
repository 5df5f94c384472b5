#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "euclid2/election.hpp"

namespace euclid2 {

// Largest number of rankings realizable as nearest-candidate regions of a
// planar arrangement over m candidates. Exact integer evaluation.
long long ub(int m);

// All rankings one adjacent swap away from u that are one swap closer to v:
// swapping u's pair at position i qualifies exactly when v orders that pair
// the other way. Ascending swap position. Throws EqualVotes when u == v.
std::vector<Vote> implied_neighbor_step(const Vote& u, const Vote& v);

struct ClosureStep {
  // Indices into the closure sequence of the ordered pair whose single
  // admissible step produced the added vote.
  int u_index = 0;
  int v_index = 0;
  Vote added;
};

// Closure sequence: the distinct input rankings in stored order, then every
// forced vote in derivation order. exceeded is set when the size passed
// ub(m) at a scan boundary, or the in-scan runaway cap 3*ub(m)+8.
struct ClosureRun {
  std::vector<Vote> votes;
  std::vector<ClosureStep> steps;
  bool exceeded = false;
  long long bound = 0;
};

// A raised stop flag abandons the scan; the partial run is returned with
// exceeded left as-is.
ClosureRun run_closure(const Election& e, const std::atomic<bool>* stop = nullptr);

struct ClosureWitness {
  std::vector<Vote> closure;
  std::vector<ClosureStep> steps;
  long long bound = 0;
};

// Grows the vote set by single-option implied-neighbor steps until closed.
// A closure larger than ub(|C|) is impossible for a planar instance, so it
// comes back as a refutation witness; otherwise nullopt.
std::optional<ClosureWitness> closure_refute(const Election& e,
                                             const std::atomic<bool>* stop = nullptr);

// Replays a closure witness against the election it claims to refute: the
// sequence must start with the election's distinct rankings, every appended
// vote must be the unique admissible step of its recorded pair, no ranking
// may repeat, and the final count must pass the stored bound, which itself
// must match ub(|C|).
bool verify_closure(const Election& e, const ClosureWitness& w);

// 0/1 feasibility model over region-status variables.
//   X        ranking realized as a region
//   Inner    region is bounded
//   Rim      region is unbounded with exactly two unbounded swap-neighbors
//   PairAnd  both rankings of a swap pair realized
//   CycleAnd all rankings of a 4- or 6-cycle realized
enum class VarKind { X, Inner, Rim, PairAnd, CycleAnd };

const char* var_kind_name(VarKind kind);
std::optional<VarKind> var_kind_from_name(const std::string& name);

struct LinTerm {
  int var = 0;
  long long coef = 0;
};

enum class RowSense { Le, Ge, Eq };

struct Row {
  std::string tag;
  std::vector<LinTerm> terms;
  RowSense sense = RowSense::Le;
  long long rhs = 0;
};

struct RegionModel {
  int m = 0;

  std::vector<Vote> rankings;
  std::map<std::vector<int>, int> ranking_id;

  struct Var {
    VarKind kind = VarKind::X;
    std::vector<int> votes;  // ranking ids; 1 entry for X/Inner/Rim, sorted otherwise
  };
  std::vector<Var> vars;
  std::map<std::pair<int, int>, int> single_var;  // (kind, ranking id) -> var
  std::map<std::vector<int>, int> group_var;      // sorted ranking ids -> PairAnd/CycleAnd var

  std::vector<Row> rows;
  int c2_row = -1;
  int c6_row = -1;

  // Bookkeeping so each lazily written family is emitted at most once.
  std::map<std::pair<int, int>, bool> c3_done;  // ordered support pair
  std::map<int, bool> c10_done;                 // ranking id
  std::map<int, bool> c11_done;                 // ranking id
  std::map<int, bool> c4_done;                  // candidate

  // Votes are taken by value: interning can grow rankings, which would leave
  // a caller's reference into it dangling mid-call.
  int intern(Vote v);
  int ensure_x(Vote v);              // also creates Inner and the reverse pair rows
  int ensure_rim(Vote v);            // also creates all swap-neighbor variables
  int ensure_pair(Vote u, Vote w);
  int ensure_cycle(std::vector<Vote> cycle);
  std::optional<int> find_single(VarKind kind, const Vote& v) const;

  // Rewrites the realized-count cap and, once present, the unbounded-count cap
  // over all current variables. Returns whether anything changed.
  bool refresh_aggregates();
};

struct IlpOptions {
  int max_iterations = 20;
  int subset_min = 5;
  bool enable_six_cycles = false;
  std::string solver = "builtin";  // or "external:<command>"
};

// Model over the election's distinct rankings: realized/bounded/rim variables
// with their structural rows, the realized-count cap, degree rows, rim rows,
// and the swap-pair and cycle capacity rows over variables created so far.
// Throws TooFewCandidates below 4 candidates.
RegionModel build_base_model(const Election& e, const IlpOptions& opt = {});

// Audits a feasible assignment of the current model semantically and appends
// every violated row family, creating the variables those rows need. Returns
// the number of violated families written; zero means the assignment is
// fully compliant. Throws InfeasibleAssignment when the assignment breaks a
// row the model already has.
int generate_violated(const Election& e, RegionModel& model,
                      const std::vector<signed char>& assignment, const IlpOptions& opt = {});

enum class SolveStatus { Feasible, Infeasible, Timeout };

struct SolveResult {
  SolveStatus status = SolveStatus::Timeout;
  std::vector<signed char> values;
};

// Feasibility check for the model within the slice. solver is "builtin" for
// the exact branch-and-bound search or "external:<command>" for the text
// bridge. Throws SolverFailure on adapter breakage.
SolveResult solve_01(const RegionModel& model, const std::string& solver,
                     std::chrono::milliseconds slice);

struct IlpCertificate {
  std::vector<int> candidate_subset;  // ids of the election the model was built on
  std::vector<Vote> rankings;
  struct VarDecl {
    VarKind kind = VarKind::X;
    std::vector<int> votes;
  };
  std::vector<VarDecl> vars;
  std::vector<Row> rows;
  std::string solver_id;
  std::string status;
};

struct RefuteOutcome {
  bool refuted = false;
  std::optional<IlpCertificate> certificate;
  std::string note;  // diagnostic for the Unknown side
};

// Solve / audit / extend loop. Refuted only on a proof of infeasibility;
// Unknown on the iteration cap, budget exhaustion, a fully compliant
// assignment, or an external stop. Throws TooFewCandidates, SolverFailure.
RefuteOutcome lazy_refute(const Election& e, std::chrono::milliseconds budget,
                          const IlpOptions& opt = {}, const std::atomic<bool>* stop = nullptr);

// Runs the lazy refuter over candidate-induced subelections of growing size,
// smallest size first, subsets in ascending id order within a size, the full
// set included. A screen callback may certify a subelection embeddable and
// skip it. Certificate subsets use the ids of e. Nullopt under 5 candidates
// or when the budget runs out.
std::optional<IlpCertificate> subset_sweep(
    const Election& e, std::chrono::milliseconds budget, const IlpOptions& opt = {},
    const std::function<bool(const Election&)>& screen = {},
    const std::atomic<bool>* stop = nullptr);

}  // namespace euclid2
