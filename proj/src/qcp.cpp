#include "euclid2/qcp.hpp"

#include <unistd.h>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace euclid2 {

namespace {

// Verification tolerance applied to externally produced embeddings. The unit
// margin design leaves four orders of magnitude between a genuine gap and
// this slack.
constexpr double kExternalTolerance = 1e-6;

// Escalation stops growing the box here: squared distances stay below 2^53,
// so adding the unit margin still changes the value and feasible rows stay
// strict.
constexpr double kBoxCap = 1e7;

double sq(double v) { return v * v; }

double sq_dist(const std::pair<double, double>& p, const std::pair<double, double>& q) {
  return sq(p.first - q.first) + sq(p.second - q.second);
}

double margin_impl(int m, const std::vector<Vote>& votes, const Embedding& emb) {
  double least = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(votes.size()); ++i) {
    const Vote& v = votes[i];
    for (int p = 0; p + 1 < m; ++p) {
      double sda = sq_dist(emb.voter[i], emb.cand[v.order[p] - 1]);
      for (int q = p + 1; q < m; ++q) {
        double sdb = sq_dist(emb.voter[i], emb.cand[v.order[q] - 1]);
        least = std::min(least, sdb - sda);
      }
    }
  }
  return least;
}

VerifyReport verify_impl(int m, const std::vector<Vote>& votes, const Embedding& emb,
                         double tolerance) {
  int n = static_cast<int>(votes.size());
  VerifyReport rep;

  std::vector<std::pair<PointRef, std::pair<double, double>>> pts;
  for (int c = 1; c <= m; ++c) pts.push_back({{false, c}, emb.cand[c - 1]});
  for (int i = 0; i < n; ++i) pts.push_back({{true, i}, emb.voter[i]});
  for (size_t a = 0; a < pts.size(); ++a) {
    for (size_t b = a + 1; b < pts.size(); ++b) {
      if (pts[a].second == pts[b].second) rep.coincident.push_back({pts[a].first, pts[b].first});
    }
  }

  for (int i = 0; i < n; ++i) {
    const Vote& v = votes[i];
    for (int p = 0; p + 1 < m; ++p) {
      double sda = sq_dist(emb.voter[i], emb.cand[v.order[p] - 1]);
      for (int q = p + 1; q < m; ++q) {
        double sdb = sq_dist(emb.voter[i], emb.cand[v.order[q] - 1]);
        if (!(sda + tolerance <= sdb)) {
          rep.order_violations.push_back({i, v.order[p], v.order[q], sdb - sda});
        }
      }
    }
  }

  rep.accepted = rep.order_violations.empty() && rep.coincident.empty();
  return rep;
}

// Hinge penalty over one flat coordinate array laid out candidate points
// first, then ranking points, x before y.
struct PenaltyEngine {
  const QcpSystem& sys;
  std::vector<double> grad;

  explicit PenaltyEngine(const QcpSystem& s) : sys(s), grad(2 * s.point_count()) {}

  double value(const std::vector<double>& pts, bool with_grad) {
    if (with_grad) std::fill(grad.begin(), grad.end(), 0.0);
    double f = 0.0;
    for (const QcpRow& row : sys.rows) {
      int v = 2 * (sys.m + row.voter);
      int a = 2 * (row.better - 1);
      int b = 2 * (row.worse - 1);
      double dax = pts[v] - pts[a], day = pts[v + 1] - pts[a + 1];
      double dbx = pts[v] - pts[b], dby = pts[v + 1] - pts[b + 1];
      double t = dax * dax + day * day + sys.margin - dbx * dbx - dby * dby;
      if (t > 0) {
        f += t * t;
        if (with_grad) {
          double g = 4 * t;
          grad[v] += g * (dax - dbx);
          grad[v + 1] += g * (day - dby);
          grad[a] -= g * dax;
          grad[a + 1] -= g * day;
          grad[b] += g * dbx;
          grad[b + 1] += g * dby;
        }
      }
    }
    for (int i = 0; i < 2 * sys.point_count(); ++i) {
      double bound = (i % 2 == 0) ? sys.box.first : sys.box.second;
      double over = std::abs(pts[i]) - bound;
      if (over > 0) {
        f += over * over;
        if (with_grad) grad[i] += (pts[i] > 0 ? 2 : -2) * over;
      }
    }
    return f;
  }
};

Embedding embedding_from_flat(const QcpSystem& sys, const std::vector<double>& pts) {
  Embedding emb;
  for (int c = 0; c < sys.m; ++c) emb.cand.push_back({pts[2 * c], pts[2 * c + 1]});
  for (int i = 0; i < sys.n(); ++i) {
    emb.voter.push_back({pts[2 * (sys.m + i)], pts[2 * (sys.m + i) + 1]});
  }
  return emb;
}

// One gradient descent run from pts: normalized direction, backtracking step
// length, done when the penalty hits exact zero.
bool descend(PenaltyEngine& eng, std::vector<double>& pts, int iters) {
  double span = std::max(eng.sys.box.first, eng.sys.box.second);
  double step = span / 8;
  std::vector<double> trial(pts.size());
  for (int it = 0; it < iters; ++it) {
    double f = eng.value(pts, true);
    if (f == 0.0) return true;
    double gn = 0.0;
    for (double g : eng.grad) gn += g * g;
    gn = std::sqrt(gn);
    if (gn < 1e-15) return false;
    bool moved = false;
    while (step > span * 1e-14) {
      for (size_t i = 0; i < pts.size(); ++i) trial[i] = pts[i] - (step / gn) * eng.grad[i];
      if (eng.value(trial, false) < f) {
        pts.swap(trial);
        step = std::min(step * 1.5, 4 * span);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) return false;
  }
  return eng.value(pts, false) == 0.0;
}

std::optional<Embedding> solve_builtin(const QcpSystem& sys, std::chrono::milliseconds budget,
                                       uint64_t seed, const QcpOptions& opt,
                                       const std::atomic<bool>* stop) {
  PenaltyEngine eng(sys);
  std::vector<double> pts(2 * sys.point_count());
  auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < opt.restarts; ++r) {
    if (stop && stop->load()) return std::nullopt;
    if (std::chrono::steady_clock::now() - t0 >= budget) return std::nullopt;
    std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(r + 1)));
    std::uniform_real_distribution<double> ux(-sys.box.first, sys.box.first);
    std::uniform_real_distribution<double> uy(-sys.box.second, sys.box.second);
    for (size_t i = 0; i < pts.size(); i += 2) {
      pts[i] = ux(rng);
      pts[i + 1] = uy(rng);
    }
    if (!descend(eng, pts, 400)) continue;
    Embedding emb = embedding_from_flat(sys, pts);
    VerifyReport rep = verify_impl(sys.m, sys.votes, emb, 0.0);
    // Zero penalty makes every comparison chain strictly, so only exact
    // point coincidence can reject here; resample when it does.
    assert(rep.order_violations.empty());
    if (!rep.accepted) continue;
    emb.achieved_margin = margin_impl(sys.m, sys.votes, emb);
    return emb;
  }
  return std::nullopt;
}

std::string system_text(const QcpSystem& sys) {
  std::ostringstream out;
  out.precision(17);
  out << "points " << sys.m << " " << sys.n() << "\n";
  out << "margin " << sys.margin << "\n";
  out << "box " << sys.box.first << " " << sys.box.second << "\n";
  out << "rows " << sys.rows.size() << "\n";
  for (const QcpRow& r : sys.rows) {
    out << "row " << r.voter << " " << r.better << " " << r.worse << "\n";
  }
  return out.str();
}

std::optional<Embedding> solve_external(const QcpSystem& sys, const std::string& command,
                                        std::chrono::milliseconds slice) {
  static std::atomic<unsigned> counter{0};
  std::filesystem::path path =
      std::filesystem::temp_directory_path() /
      ("euclid2_" + std::to_string(getpid()) + "_" + std::to_string(counter++) + ".qcp");
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::SolverFailure, "cannot write " + path.string());
    out << system_text(sys);
  }

  long long secs = std::max<long long>(1, (slice.count() + 999) / 1000);
  std::string cmdline = command + " " + path.string() + " " + std::to_string(secs);
  FILE* pipe = popen(cmdline.c_str(), "r");
  if (!pipe) {
    std::filesystem::remove(path);
    throw Error(ErrorCode::SolverFailure, "cannot run " + command);
  }
  std::string output;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  pclose(pipe);
  std::error_code ec;
  std::filesystem::remove(path, ec);

  Embedding emb;
  emb.cand.assign(sys.m, {0, 0});
  emb.voter.assign(sys.n(), {0, 0});
  std::vector<char> cand_seen(sys.m, 0), voter_seen(sys.n(), 0);
  int seen = 0;
  std::istringstream lines(output);
  std::string line;
  while (std::getline(lines, line)) {
    std::istringstream words(line);
    std::string kind;
    int id;
    double x, y;
    if (!(words >> kind >> id >> x >> y)) continue;
    if (kind == "candidate") {
      if (id < 1 || id > sys.m) {
        throw Error(ErrorCode::SolverFailure, "candidate id out of range from " + command);
      }
      if (!cand_seen[id - 1]) ++seen;
      cand_seen[id - 1] = 1;
      emb.cand[id - 1] = {x, y};
    } else if (kind == "voter") {
      if (id < 0 || id >= sys.n()) {
        throw Error(ErrorCode::SolverFailure, "voter index out of range from " + command);
      }
      if (!voter_seen[id]) ++seen;
      voter_seen[id] = 1;
      emb.voter[id] = {x, y};
    }
  }
  if (seen == 0) return std::nullopt;
  if (seen < sys.point_count()) {
    throw Error(ErrorCode::SolverFailure, "incomplete point set from " + command);
  }
  VerifyReport rep = verify_impl(sys.m, sys.votes, emb, kExternalTolerance);
  if (!rep.accepted) {
    throw Error(ErrorCode::SolverFailure, "embedding from " + command + " failed verification");
  }
  emb.achieved_margin = margin_impl(sys.m, sys.votes, emb);
  return emb;
}

}  // namespace

QcpSystem build_qcp(const Election& e, double eps_star, std::pair<double, double> box,
                    bool full_pairs) {
  QcpSystem sys;
  sys.m = e.m;
  sys.votes = e.votes;
  sys.margin = eps_star;
  sys.box = box;
  for (int i = 0; i < e.n_distinct(); ++i) {
    const Vote& v = e.votes[i];
    for (int p = 0; p + 1 < e.m; ++p) {
      int last = full_pairs ? e.m : p + 2;
      for (int q = p + 1; q < last; ++q) sys.rows.push_back({i, v.order[p], v.order[q]});
    }
  }
  return sys;
}

std::optional<Embedding> solve_feasibility(const QcpSystem& sys, std::chrono::milliseconds budget,
                                           uint64_t seed, const QcpOptions& opt,
                                           const std::atomic<bool>* stop) {
  if (opt.solver == "builtin") return solve_builtin(sys, budget, seed, opt, stop);
  if (opt.solver.rfind("external:", 0) == 0) {
    return solve_external(sys, opt.solver.substr(9), budget);
  }
  throw Error(ErrorCode::SolverFailure, "unknown qcp solver: " + opt.solver);
}

std::optional<Embedding> escalate_embed(const Election& e, std::chrono::milliseconds budget,
                                        const QcpOptions& opt, uint64_t seed,
                                        const std::atomic<bool>* stop) {
  auto t0 = std::chrono::steady_clock::now();
  double box = opt.box_init;
  double slice_s = opt.slice_init_secs;
  for (uint64_t round = 0;; ++round) {
    if (stop && stop->load()) return std::nullopt;
    auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    if (elapsed >= budget) return std::nullopt;
    auto slice = std::min(std::chrono::milliseconds(static_cast<long long>(slice_s * 1000)),
                          budget - elapsed);
    if (slice < std::chrono::milliseconds(1)) slice = std::chrono::milliseconds(1);
    QcpSystem sys = build_qcp(e, opt.eps_star, {box, box}, opt.full_pairs);
    auto found = solve_feasibility(sys, slice, seed + round, opt, stop);
    if (found) return found;
    box = std::min(box * opt.box_factor, kBoxCap);
    slice_s *= opt.slice_factor;
  }
}

VerifyReport verify_embedding(const Election& e, const Embedding& emb, double tolerance) {
  if (static_cast<int>(emb.cand.size()) != e.m ||
      static_cast<int>(emb.voter.size()) != e.n_distinct()) {
    throw Error(ErrorCode::MissingPoint, "embedding does not cover every candidate and ranking");
  }
  return verify_impl(e.m, e.votes, emb, tolerance);
}

double embedding_margin(const Election& e, const Embedding& emb) {
  if (static_cast<int>(emb.cand.size()) != e.m ||
      static_cast<int>(emb.voter.size()) != e.n_distinct()) {
    throw Error(ErrorCode::MissingPoint, "embedding does not cover every candidate and ranking");
  }
  return margin_impl(e.m, e.votes, emb);
}

Embedding scale_embedding(const Embedding& emb, double lambda) {
  Embedding out = emb;
  for (auto& p : out.cand) p = {p.first * lambda, p.second * lambda};
  for (auto& p : out.voter) p = {p.first * lambda, p.second * lambda};
  out.achieved_margin = emb.achieved_margin * lambda * lambda;
  return out;
}

double round_significant(double v, int digits) {
  assert(digits >= 1 && digits <= 17);
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*e", digits - 1, v);
  return std::strtod(buf, nullptr);
}

}  // namespace euclid2
