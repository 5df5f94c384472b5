#pragma once

#include <array>
#include <atomic>
#include <optional>
#include <utility>
#include <vector>

#include "euclid2/election.hpp"

namespace euclid2 {

// Witness for the forbidden 3-voter 8-candidate subelection: three voters, a
// center candidate, and for every nonempty subset of the three voters a
// distinct candidate that exactly those voters prefer over the center.
// witness[mask] holds the candidate for the voter subset encoded by mask
// (bit t set means voters[t] prefers it over the center); entry 0 is unused.
struct Pattern38Certificate {
  std::array<int, 3> voters;
  int center = 0;
  std::array<int, 8> witness{};
};

// Scans centers in candidate order and voter triples lexicographically,
// recording the smallest-id candidate per voter subset, so the first complete
// family wins deterministically. Runs in O(|V|^3 |C|^2).
std::optional<Pattern38Certificate> find_38(const Election& e);

// Re-checks a certificate against the election alone.
bool verify_38(const Election& e, const Pattern38Certificate& cert);

// Vertices are the controversial single voters, edges the controversial pairs
// whose endpoints are both vertices. All voter references are distinct-ranking
// indices; witness tags are the lexicographically first pairs.
struct ControversityGraph {
  std::vector<int> vertices;
  std::vector<std::pair<int, int>> vertex_witness;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::pair<int, int>> edge_witness;

  bool is_vertex(int voter) const;
  int degree(int voter) const;
};

ControversityGraph build_controversity_graph(const Election& e);

// A structural impossibility in a controversity graph: either some vertex has
// three or more neighbors, or the graph has a cycle yet is disconnected.
struct Violation {
  enum class Kind { MaxDegree, DisconnectedCycle };
  Kind kind = Kind::MaxDegree;
  int vertex = -1;             // MaxDegree: the overloaded voter.
                               // DisconnectedCycle: a voter outside the cycle's component.
  std::vector<int> neighbors;  // MaxDegree only, ascending
  std::vector<int> cycle;      // DisconnectedCycle only, starting at its smallest voter
};

// MaxDegree is preferred and reported for the smallest-index vertex; the
// disconnected-cycle check then assumes maximum degree 2, under which every
// component is a path or a cycle.
std::optional<Violation> check_controversity(const ControversityGraph& g);

enum class HullMode { Quad, Full };

struct HullCertificate {
  std::vector<int> voter_subset;  // ranking indices, ascending
  Violation violation;            // stated in the original ranking indices
};

// Searches voter subsets (size exactly 4 in Quad mode, sizes 4..cap ascending
// in Full mode, lexicographic within a size) for one whose controversity
// graph over the full candidate set violates the degree or connectivity
// property. Subsets of three or fewer voters can never violate it and are
// skipped. An optional stop flag aborts the enumeration early.
std::optional<HullCertificate> hull_refute(const Election& e, HullMode mode, int cap = 6,
                                           const std::atomic<bool>* stop = nullptr);

bool verify_hull(const Election& e, const HullCertificate& cert);

}  // namespace euclid2
