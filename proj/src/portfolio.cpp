#include "euclid2/portfolio.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <utility>

namespace euclid2 {

namespace {

using Clock = std::chrono::steady_clock;

double secs_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::chrono::milliseconds remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() > 0 ? left : std::chrono::milliseconds(0);
}

long long parse_ll(const std::string& key, const std::string& value) {
  char* end = nullptr;
  long long v = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw Error(ErrorCode::Malformed, "bad integer for " + key + ": " + value);
  return v;
}

double parse_dbl(const std::string& key, const std::string& value) {
  char* end = nullptr;
  double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw Error(ErrorCode::Malformed, "bad number for " + key + ": " + value);
  return v;
}

bool parse_flag(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw Error(ErrorCode::Malformed, "bad flag for " + key + ": " + value);
}

}  // namespace

const char* status_name(Status s) {
  switch (s) {
    case Status::Euclidean: return "euclidean";
    case Status::NotEuclidean: return "not-euclidean";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

const char* certificate_kind(const Certificate& c) {
  switch (c.index()) {
    case 0: return "none";
    case 1: return "trivial";
    case 2: return "pattern38";
    case 3: return "hull";
    case 4: return "closure";
    case 5: return "ilp";
    case 6: return "embedding";
  }
  return "?";
}

bool apply_config(PortfolioConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "portfolio.budget_secs") cfg.budget_secs = parse_dbl(key, value);
  else if (key == "portfolio.seed") cfg.seed = static_cast<std::uint64_t>(parse_ll(key, value));
  else if (key == "ilp.max_iterations") cfg.ilp.max_iterations = static_cast<int>(parse_ll(key, value));
  else if (key == "ilp.subset_min") cfg.ilp.subset_min = static_cast<int>(parse_ll(key, value));
  else if (key == "ilp.enable_six_cycles") cfg.ilp.enable_six_cycles = parse_flag(key, value);
  else if (key == "ilp.solver") cfg.ilp.solver = value;
  else if (key == "qcp.eps_star") cfg.qcp.eps_star = parse_dbl(key, value);
  else if (key == "qcp.box_init") cfg.qcp.box_init = parse_dbl(key, value);
  else if (key == "qcp.slice_init_secs") cfg.qcp.slice_init_secs = parse_dbl(key, value);
  else if (key == "qcp.box_factor") cfg.qcp.box_factor = parse_dbl(key, value);
  else if (key == "qcp.slice_factor") cfg.qcp.slice_factor = parse_dbl(key, value);
  else if (key == "qcp.restarts") cfg.qcp.restarts = static_cast<int>(parse_ll(key, value));
  else if (key == "qcp.full_pairs") cfg.qcp.full_pairs = parse_flag(key, value);
  else if (key == "qcp.solver") cfg.qcp.solver = value;
  else return false;
  return true;
}

std::optional<Verdict> triviality_screen(const Election& e) {
  const char* rule = nullptr;
  if (e.m <= 3) rule = kRuleFewCandidates;
  else if (e.n_distinct() <= 2) rule = kRuleTwoVotes;
  else if (e.n_distinct() <= 3 && e.m <= 7) rule = kRuleThreeVotesSevenCandidates;
  if (!rule) return std::nullopt;
  Verdict v;
  v.status = Status::Euclidean;
  v.certificate = TrivialCertificate{rule};
  // Identity trace, so the verdict replays against the election as-is.
  v.trace.reduced_to_original.resize(e.m + 1);
  for (int c = 0; c <= e.m; ++c) v.trace.reduced_to_original[c] = c;
  return v;
}

namespace {

// Shrinks the margin to at least one by rescaling, then rounds every
// coordinate to twelve significant digits. The rounded embedding is kept only
// if it still passes exact verification; otherwise the unrounded one stands.
Embedding polish_embedding(const Election& reduced, Embedding emb) {
  double margin = embedding_margin(reduced, emb);
  if (std::isfinite(margin) && margin > 0.0 && margin < 1.0)
    emb = scale_embedding(emb, std::sqrt(1.0 / margin));
  emb.achieved_margin = embedding_margin(reduced, emb);
  Embedding rounded = emb;
  for (auto& p : rounded.cand) {
    p.first = round_significant(p.first, 12);
    p.second = round_significant(p.second, 12);
  }
  for (auto& p : rounded.voter) {
    p.first = round_significant(p.first, 12);
    p.second = round_significant(p.second, 12);
  }
  rounded.achieved_margin = embedding_margin(reduced, rounded);
  if (verify_embedding(reduced, rounded, 0.0).accepted) return rounded;
  return emb;
}

struct LaneHit {
  Status status = Status::Unknown;
  Certificate certificate;
};

struct LaneBoard {
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<bool> stop{false};
  std::vector<std::pair<int, LaneHit>> found;  // (priority, hit), arrival order
  std::vector<StageTiming> timings;
  std::vector<std::string> notes;
  int quick_running = 0;
  int running = 0;
};

const char* const kLaneNames[] = {"find38", "hull-quad", "closure", "embed", "hull-full", "sweep"};

}  // namespace

Verdict run_portfolio(const Election& e, const PortfolioConfig& cfg) {
  for (const std::string& lane : cfg.lanes) {
    if (std::find(std::begin(kLaneNames), std::end(kLaneNames), lane) == std::end(kLaneNames))
      throw Error(ErrorCode::Malformed, "unknown lane: " + lane);
  }
  auto enabled = [&](const char* name) {
    return cfg.lanes.empty() ||
           std::find(cfg.lanes.begin(), cfg.lanes.end(), name) != cfg.lanes.end();
  };

  auto t0 = Clock::now();
  auto deadline = t0 + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(std::max(0.0, cfg.budget_secs)));
  Verdict out;
  if (auto v = triviality_screen(e)) {
    out = std::move(*v);
    out.timings.push_back({"screen", secs_since(t0)});
    out.timings.push_back({"total", secs_since(t0)});
    return out;
  }
  out.timings.push_back({"screen", secs_since(t0)});

  auto tr = Clock::now();
  auto [reduced, trace] = reduce_fixpoint(e);
  out.trace = std::move(trace);
  out.timings.push_back({"reduce", secs_since(tr)});
  if (auto v = triviality_screen(reduced)) {
    out.status = v->status;
    out.certificate = std::move(v->certificate);
    out.timings.push_back({"total", secs_since(t0)});
    return out;
  }

  LaneBoard board;
  std::vector<std::thread> threads;
  auto launch = [&](const char* name, int priority, bool quick,
                    std::function<std::optional<LaneHit>(std::string&)> body) {
    {
      std::lock_guard<std::mutex> lk(board.mu);
      ++board.running;
      if (quick) ++board.quick_running;
    }
    threads.emplace_back([&board, name, priority, quick, body = std::move(body)]() {
      auto lane_t0 = Clock::now();
      std::optional<LaneHit> hit;
      std::string note;
      try {
        hit = body(note);
      } catch (const std::exception& ex) {
        note = ex.what();
      }
      std::lock_guard<std::mutex> lk(board.mu);
      board.timings.push_back({name, secs_since(lane_t0)});
      if (!note.empty()) board.notes.push_back(std::string(name) + ": " + note);
      if (hit) {
        board.found.emplace_back(priority, std::move(*hit));
        board.stop.store(true);
      }
      if (quick) --board.quick_running;
      --board.running;
      board.cv.notify_all();
    });
  };

  // Quick refuters and the embedding search go first. The exhaustive hull
  // scan and the subset sweep are held back until the quick refuters miss.
  if (enabled("find38"))
    launch("find38", 0, true, [&](std::string&) -> std::optional<LaneHit> {
      auto c = find_38(reduced);
      if (!c) return std::nullopt;
      return LaneHit{Status::NotEuclidean, Certificate{*c}};
    });
  if (enabled("hull-quad"))
    launch("hull-quad", 1, true, [&](std::string&) -> std::optional<LaneHit> {
      if (reduced.n_distinct() < 4) return std::nullopt;
      auto c = hull_refute(reduced, HullMode::Quad, 6, &board.stop);
      if (!c) return std::nullopt;
      return LaneHit{Status::NotEuclidean, Certificate{*c}};
    });
  if (enabled("closure"))
    launch("closure", 2, true, [&](std::string&) -> std::optional<LaneHit> {
      auto c = closure_refute(reduced, &board.stop);
      if (!c) return std::nullopt;
      return LaneHit{Status::NotEuclidean, Certificate{std::move(*c)}};
    });
  if (enabled("embed"))
    launch("embed", 4, false, [&](std::string& note) -> std::optional<LaneHit> {
      auto budget = remaining_ms(deadline);
      if (budget.count() <= 0) return std::nullopt;
      auto emb = escalate_embed(reduced, budget, cfg.qcp, cfg.seed, &board.stop);
      if (!emb) return std::nullopt;
      Embedding polished = polish_embedding(reduced, std::move(*emb));
      if (!verify_embedding(reduced, polished, 0.0).accepted) {
        note = "solution failed exact re-verification";
        return std::nullopt;
      }
      return LaneHit{Status::Euclidean, Certificate{std::move(polished)}};
    });

  bool phase2 = false;
  {
    std::unique_lock<std::mutex> lk(board.mu);
    for (;;) {
      board.cv.wait_until(lk, deadline, [&] {
        return !board.found.empty() || board.running == 0 ||
               (!phase2 && board.quick_running == 0);
      });
      if (!board.found.empty()) break;
      if (!phase2 && board.quick_running == 0 && Clock::now() < deadline) {
        phase2 = true;
        lk.unlock();
        if (enabled("hull-full"))
          launch("hull-full", 1, false, [&](std::string&) -> std::optional<LaneHit> {
            if (reduced.n_distinct() < 4) return std::nullopt;
            auto c = hull_refute(reduced, HullMode::Full, 6, &board.stop);
            if (!c) return std::nullopt;
            return LaneHit{Status::NotEuclidean, Certificate{*c}};
          });
        if (enabled("sweep"))
          launch("sweep", 3, false, [&](std::string&) -> std::optional<LaneHit> {
            auto budget = remaining_ms(deadline);
            if (budget.count() <= 0) return std::nullopt;
            auto c = subset_sweep(reduced, budget, cfg.ilp, {}, &board.stop);
            if (!c) return std::nullopt;
            return LaneHit{Status::NotEuclidean, Certificate{std::move(*c)}};
          });
        lk.lock();
        continue;
      }
      if (board.running == 0) break;
      if (Clock::now() >= deadline) break;
    }
  }
  board.stop.store(true);
  for (auto& t : threads) t.join();

  out.timings.insert(out.timings.end(), board.timings.begin(), board.timings.end());
  if (!board.found.empty()) {
    size_t best = 0;
    for (size_t i = 1; i < board.found.size(); ++i)
      if (board.found[i].first < board.found[best].first) best = i;
    out.status = board.found[best].second.status;
    out.certificate = std::move(board.found[best].second.certificate);
  } else {
    out.status = Status::Unknown;
    out.note = Clock::now() >= deadline ? "global budget exhausted"
                                        : "no lane produced a definitive answer";
  }
  for (const std::string& n : board.notes) {
    if (!out.note.empty()) out.note += "; ";
    out.note += n;
  }
  out.timings.push_back({"total", secs_since(t0)});
  return out;
}

}  // namespace euclid2
