#include "euclid2/detectors.hpp"

#include <algorithm>
#include <cassert>

namespace euclid2 {

std::optional<Pattern38Certificate> find_38(const Election& e) {
  int n = e.n_distinct();
  if (e.m < 8 || n < 3) return std::nullopt;
  for (int center = 1; center <= e.m; ++center) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
          std::array<int, 8> slot{};
          slot.fill(0);
          int filled = 0;
          for (int d = 1; d <= e.m && filled < 7; ++d) {
            if (d == center) continue;
            int mask = (e.votes[i].prefers(d, center) ? 1 : 0) |
                       (e.votes[j].prefers(d, center) ? 2 : 0) |
                       (e.votes[k].prefers(d, center) ? 4 : 0);
            if (mask != 0 && slot[mask] == 0) {
              slot[mask] = d;
              ++filled;
            }
          }
          if (filled == 7) {
            Pattern38Certificate cert;
            cert.voters = {i, j, k};
            cert.center = center;
            cert.witness = slot;
            return cert;
          }
        }
      }
    }
  }
  return std::nullopt;
}

bool verify_38(const Election& e, const Pattern38Certificate& cert) {
  int n = e.n_distinct();
  for (int t = 0; t < 3; ++t) {
    if (cert.voters[t] < 0 || cert.voters[t] >= n) return false;
    if (t > 0 && cert.voters[t] <= cert.voters[t - 1]) return false;
  }
  if (cert.center < 1 || cert.center > e.m) return false;
  std::vector<char> used(e.m + 1, 0);
  used[cert.center] = 1;
  for (int mask = 1; mask <= 7; ++mask) {
    int w = cert.witness[mask];
    if (w < 1 || w > e.m || used[w]) return false;
    used[w] = 1;
    for (int t = 0; t < 3; ++t) {
      bool should_prefer = (mask >> t) & 1;
      if (e.votes[cert.voters[t]].prefers(w, cert.center) != should_prefer) return false;
    }
  }
  return true;
}

bool ControversityGraph::is_vertex(int voter) const {
  return std::binary_search(vertices.begin(), vertices.end(), voter);
}

int ControversityGraph::degree(int voter) const {
  int d = 0;
  for (const auto& [a, b] : edges) {
    if (a == voter || b == voter) ++d;
  }
  return d;
}

ControversityGraph build_controversity_graph(const Election& e) {
  ControversityGraph g;
  int n = e.n_distinct();
  for (int i = 0; i < n; ++i) {
    if (auto w = controversial_witness(e, {i})) {
      g.vertices.push_back(i);
      g.vertex_witness.push_back(*w);
    }
  }
  for (size_t a = 0; a < g.vertices.size(); ++a) {
    for (size_t b = a + 1; b < g.vertices.size(); ++b) {
      if (auto w = controversial_witness(e, {g.vertices[a], g.vertices[b]})) {
        g.edges.emplace_back(g.vertices[a], g.vertices[b]);
        g.edge_witness.push_back(*w);
      }
    }
  }
  return g;
}

std::optional<Violation> check_controversity(const ControversityGraph& g) {
  for (int v : g.vertices) {
    std::vector<int> nbrs;
    for (const auto& [a, b] : g.edges) {
      if (a == v) nbrs.push_back(b);
      else if (b == v) nbrs.push_back(a);
    }
    if (nbrs.size() >= 3) {
      std::sort(nbrs.begin(), nbrs.end());
      Violation viol;
      viol.kind = Violation::Kind::MaxDegree;
      viol.vertex = v;
      viol.neighbors = std::move(nbrs);
      return viol;
    }
  }

  // Degree is at most 2 from here on, so components are paths or cycles.
  std::vector<int> component(g.vertices.size(), -1);
  auto index_of = [&](int voter) {
    return static_cast<int>(std::lower_bound(g.vertices.begin(), g.vertices.end(), voter) -
                            g.vertices.begin());
  };
  std::vector<std::vector<int>> adj(g.vertices.size());
  for (const auto& [a, b] : g.edges) {
    adj[index_of(a)].push_back(index_of(b));
    adj[index_of(b)].push_back(index_of(a));
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());

  int comp_count = 0;
  std::vector<int> comp_sizes, comp_edges;
  for (size_t s = 0; s < g.vertices.size(); ++s) {
    if (component[s] != -1) continue;
    int id = comp_count++;
    int nodes = 0, half_edges = 0;
    std::vector<size_t> stack = {s};
    component[s] = id;
    while (!stack.empty()) {
      size_t cur = stack.back();
      stack.pop_back();
      ++nodes;
      half_edges += static_cast<int>(adj[cur].size());
      for (int nxt : adj[cur]) {
        if (component[nxt] == -1) {
          component[nxt] = id;
          stack.push_back(static_cast<size_t>(nxt));
        }
      }
    }
    comp_sizes.push_back(nodes);
    comp_edges.push_back(half_edges / 2);
  }

  int cycle_comp = -1;
  for (int id = 0; id < comp_count; ++id) {
    if (comp_edges[id] == comp_sizes[id] && comp_sizes[id] >= 3) {
      cycle_comp = id;
      break;
    }
  }
  if (cycle_comp == -1 || comp_count < 2) return std::nullopt;

  Violation viol;
  viol.kind = Violation::Kind::DisconnectedCycle;
  int start = -1;
  for (size_t s = 0; s < g.vertices.size(); ++s) {
    if (component[s] == cycle_comp) {
      start = static_cast<int>(s);
      break;
    }
  }
  assert(start >= 0);
  // Every vertex in a cycle component has exactly two neighbors; walk the
  // cycle starting toward the smaller one.
  int prev = start;
  int cur = adj[start][0];
  viol.cycle.push_back(g.vertices[start]);
  while (cur != start) {
    viol.cycle.push_back(g.vertices[cur]);
    int nxt = (adj[cur][0] == prev) ? adj[cur][1] : adj[cur][0];
    prev = cur;
    cur = nxt;
  }
  for (size_t s = 0; s < g.vertices.size(); ++s) {
    if (component[s] != cycle_comp) {
      viol.vertex = g.vertices[s];
      break;
    }
  }
  return viol;
}

namespace {

std::optional<Violation> subset_violation(const Election& e, const std::vector<int>& subset) {
  Election sub = select_voters(e, subset);
  auto viol = check_controversity(build_controversity_graph(sub));
  if (!viol) return std::nullopt;
  // Map local ranking indices back to the caller's.
  Violation mapped = *viol;
  mapped.vertex = subset[viol->vertex];
  for (size_t i = 0; i < viol->neighbors.size(); ++i) mapped.neighbors[i] = subset[viol->neighbors[i]];
  for (size_t i = 0; i < viol->cycle.size(); ++i) mapped.cycle[i] = subset[viol->cycle[i]];
  return mapped;
}

}  // namespace

std::optional<HullCertificate> hull_refute(const Election& e, HullMode mode, int cap,
                                           const std::atomic<bool>* stop) {
  int n = e.n_distinct();
  if (mode == HullMode::Quad) {
    if (n < 4) throw Error(ErrorCode::TooFewVoters, "Quad mode needs at least 4 distinct votes");
  } else if (cap < 4) {
    throw Error(ErrorCode::TooFewVoters, "Full mode needs a subset cap of at least 4");
  }
  int lo = 4;
  int hi = (mode == HullMode::Quad) ? 4 : std::min(cap, n);
  for (int size = lo; size <= hi; ++size) {
    std::vector<int> subset(size);
    for (int i = 0; i < size; ++i) subset[i] = i;
    while (true) {
      if (stop && stop->load(std::memory_order_relaxed)) return std::nullopt;
      if (auto viol = subset_violation(e, subset)) {
        return HullCertificate{subset, std::move(*viol)};
      }
      // next combination in lexicographic order
      int i = size - 1;
      while (i >= 0 && subset[i] == n - size + i) --i;
      if (i < 0) break;
      ++subset[i];
      for (int j = i + 1; j < size; ++j) subset[j] = subset[j - 1] + 1;
    }
  }
  return std::nullopt;
}

bool verify_hull(const Election& e, const HullCertificate& cert) {
  int n = e.n_distinct();
  const auto& subset = cert.voter_subset;
  if (subset.size() < 4) return false;
  for (size_t i = 0; i < subset.size(); ++i) {
    if (subset[i] < 0 || subset[i] >= n) return false;
    if (i > 0 && subset[i] <= subset[i - 1]) return false;
  }
  auto derived = subset_violation(e, subset);
  if (!derived) return false;
  return derived->kind == cert.violation.kind && derived->vertex == cert.violation.vertex &&
         derived->neighbors == cert.violation.neighbors && derived->cycle == cert.violation.cycle;
}

}  // namespace euclid2
