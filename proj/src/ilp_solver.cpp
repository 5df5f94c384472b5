#include <unistd.h>

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "euclid2/ilp.hpp"
#include "euclid2/reducer.hpp"

namespace euclid2 {

namespace {

// Exact depth-first feasibility search with interval propagation. Branches on
// the variable that appears in the most rows still able to go either way,
// value 0 first, and accepts the first full assignment that satisfies every
// row.
class BranchSearch {
 public:
  BranchSearch(const RegionModel& model, std::chrono::steady_clock::time_point deadline)
      : model_(model), deadline_(deadline) {
    int nvars = static_cast<int>(model.vars.size());
    int nrows = static_cast<int>(model.rows.size());
    value_.assign(nvars, -1);
    var_rows_.assign(nvars, {});
    row_min_.assign(nrows, 0);
    row_max_.assign(nrows, 0);
    in_queue_.assign(nrows, 0);
    for (int ri = 0; ri < nrows; ++ri) {
      for (const LinTerm& t : model.rows[ri].terms) {
        var_rows_[t.var].push_back({ri, t.coef});
        row_min_[ri] += std::min(t.coef, 0LL);
        row_max_[ri] += std::max(t.coef, 0LL);
      }
    }
    tie_rank_.assign(nvars, 0);
    std::vector<int> order(nvars);
    std::iota(order.begin(), order.end(), 0);
    std::vector<std::vector<int>> key(nvars);
    for (int i = 0; i < nvars; ++i) {
      key[i].push_back(static_cast<int>(model.vars[i].kind));
      for (int r : model.vars[i].votes) {
        for (int c : model.rankings[r].order) key[i].push_back(c);
      }
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
    for (int rank = 0; rank < nvars; ++rank) tie_rank_[order[rank]] = rank;
  }

  SolveResult run() {
    for (int ri = 0; ri < static_cast<int>(model_.rows.size()); ++ri) enqueue(ri);
    SolveResult out;
    if (!dfs()) {
      out.status = timed_out_ ? SolveStatus::Timeout : SolveStatus::Infeasible;
      return out;
    }
    out.status = SolveStatus::Feasible;
    out.values.assign(value_.size(), 0);
    for (size_t i = 0; i < value_.size(); ++i) out.values[i] = value_[i] == 1 ? 1 : 0;
    return out;
  }

 private:
  void enqueue(int row) {
    if (!in_queue_[row]) {
      in_queue_[row] = 1;
      queue_.push_back(row);
    }
  }

  void set_value(int var, int v) {
    value_[var] = static_cast<signed char>(v);
    trail_.push_back(var);
    for (auto [ri, coef] : var_rows_[var]) {
      row_min_[ri] += coef * v - std::min(coef, 0LL);
      row_max_[ri] += coef * v - std::max(coef, 0LL);
      enqueue(ri);
    }
  }

  void undo_to(size_t mark) {
    while (trail_.size() > mark) {
      int var = trail_.back();
      trail_.pop_back();
      int v = value_[var];
      value_[var] = -1;
      for (auto [ri, coef] : var_rows_[var]) {
        row_min_[ri] -= coef * v - std::min(coef, 0LL);
        row_max_[ri] -= coef * v - std::max(coef, 0LL);
      }
    }
  }

  void clear_queue() {
    for (int ri : queue_) in_queue_[ri] = 0;
    queue_.clear();
  }

  // Drains the dirty-row queue, forcing every variable whose other value
  // would make some row unsatisfiable. False on a wipeout.
  bool propagate() {
    while (!queue_.empty()) {
      int ri = queue_.front();
      queue_.pop_front();
      in_queue_[ri] = 0;
      const Row& row = model_.rows[ri];
      bool need_le = row.sense != RowSense::Ge;
      bool need_ge = row.sense != RowSense::Le;
      if ((need_le && row_min_[ri] > row.rhs) || (need_ge && row_max_[ri] < row.rhs)) {
        clear_queue();
        return false;
      }
      for (const LinTerm& t : row.terms) {
        if (value_[t.var] != -1) continue;
        bool bad0 = false;
        bool bad1 = false;
        if (need_le) {
          long long base = row_min_[ri] - std::min(t.coef, 0LL);
          bad0 |= base > row.rhs;
          bad1 |= base + t.coef > row.rhs;
        }
        if (need_ge) {
          long long base = row_max_[ri] - std::max(t.coef, 0LL);
          bad0 |= base < row.rhs;
          bad1 |= base + t.coef < row.rhs;
        }
        if (bad0 && bad1) {
          clear_queue();
          return false;
        }
        if (bad0) set_value(t.var, 1);
        if (bad1) set_value(t.var, 0);
      }
    }
    return true;
  }

  // A row is settled once no completion of the partial assignment can break
  // it; when every row is settled the zeros-completion is feasible.
  bool settled(int ri) const {
    const Row& row = model_.rows[ri];
    switch (row.sense) {
      case RowSense::Le: return row_max_[ri] <= row.rhs;
      case RowSense::Ge: return row_min_[ri] >= row.rhs;
      case RowSense::Eq: return row_min_[ri] == row.rhs && row_max_[ri] == row.rhs;
    }
    return false;
  }

  bool dfs() {
    if (timed_out_) return false;
    if ((++nodes_ & 255) == 0 && std::chrono::steady_clock::now() >= deadline_) {
      timed_out_ = true;
      return false;
    }
    if (!propagate()) return false;

    std::vector<int> score(value_.size(), 0);
    bool any_open = false;
    for (int ri = 0; ri < static_cast<int>(model_.rows.size()); ++ri) {
      if (settled(ri)) continue;
      any_open = true;
      for (const LinTerm& t : model_.rows[ri].terms) {
        if (value_[t.var] == -1) ++score[t.var];
      }
    }
    if (!any_open) {
      for (size_t i = 0; i < value_.size(); ++i) {
        if (value_[i] == -1) value_[i] = 0;
      }
      return true;
    }
    int pick = -1;
    for (int i = 0; i < static_cast<int>(value_.size()); ++i) {
      if (value_[i] != -1 || score[i] == 0) continue;
      if (pick < 0 || score[i] > score[pick] ||
          (score[i] == score[pick] && tie_rank_[i] < tie_rank_[pick])) {
        pick = i;
      }
    }
    assert(pick >= 0);

    for (int v : {0, 1}) {
      size_t mark = trail_.size();
      set_value(pick, v);
      if (dfs()) return true;
      undo_to(mark);
      if (timed_out_) return false;
    }
    return false;
  }

  const RegionModel& model_;
  std::chrono::steady_clock::time_point deadline_;
  std::vector<signed char> value_;
  std::vector<std::vector<std::pair<int, long long>>> var_rows_;
  std::vector<long long> row_min_, row_max_;
  std::vector<int> tie_rank_;
  std::deque<int> queue_;
  std::vector<char> in_queue_;
  std::vector<int> trail_;
  long long nodes_ = 0;
  bool timed_out_ = false;
};

std::string var_token(const RegionModel& model, int var) {
  std::string desc = var_kind_name(model.vars[var].kind);
  for (int r : model.vars[var].votes) {
    desc += ':';
    for (int c : model.rankings[r].order) {
      desc += std::to_string(c);
      desc += ',';
    }
  }
  std::ostringstream out;
  out << "x_" << std::hex << fnv1a64(desc);
  return out.str();
}

std::string lp_text(const RegionModel& model, const std::vector<std::string>& tokens) {
  std::ostringstream lp;
  lp << "Minimize\n obj:";
  bool first = true;
  for (int i = 0; i < static_cast<int>(model.vars.size()); ++i) {
    if (model.vars[i].kind != VarKind::X) continue;
    lp << (first ? " " : " + ") << tokens[i];
    first = false;
  }
  lp << "\nSubject To\n";
  for (int ri = 0; ri < static_cast<int>(model.rows.size()); ++ri) {
    const Row& row = model.rows[ri];
    lp << " r" << ri << ":";
    bool lead = true;
    for (const LinTerm& t : row.terms) {
      long long a = t.coef;
      if (a < 0) {
        lp << " - " << -a << ' ' << tokens[t.var];
      } else {
        lp << (lead ? " " : " + ") << a << ' ' << tokens[t.var];
      }
      lead = false;
    }
    const char* op = row.sense == RowSense::Le ? "<=" : row.sense == RowSense::Ge ? ">=" : "=";
    lp << ' ' << op << ' ' << row.rhs << '\n';
  }
  lp << "Binary\n";
  for (const std::string& tok : tokens) lp << ' ' << tok << '\n';
  lp << "End\n";
  return lp.str();
}

// Protocol: the command is run as `cmd <lp-file> <seconds>` and must print one
// of INFEASIBLE, OPTIMAL, or TIME_LIMIT on stdout; after OPTIMAL each line
// `<token> <value>` assigns a variable, unlisted tokens default to 0.
SolveResult solve_external(const RegionModel& model, const std::string& command,
                           std::chrono::milliseconds slice) {
  std::vector<std::string> tokens(model.vars.size());
  std::map<std::string, int> token_var;
  for (int i = 0; i < static_cast<int>(model.vars.size()); ++i) {
    tokens[i] = var_token(model, i);
    token_var[tokens[i]] = i;
  }

  static std::atomic<unsigned> counter{0};
  std::filesystem::path path =
      std::filesystem::temp_directory_path() /
      ("euclid2_" + std::to_string(getpid()) + "_" + std::to_string(counter++) + ".lp");
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::SolverFailure, "cannot write " + path.string());
    out << lp_text(model, tokens);
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

  SolveResult out;
  std::istringstream lines(output);
  std::string line;
  bool has_status = false;
  bool has_assignment = false;
  while (std::getline(lines, line)) {
    std::istringstream words(line);
    std::string word;
    while (words >> word) {
      if (!has_status) {
        if (word == "INFEASIBLE") {
          out.status = SolveStatus::Infeasible;
          has_status = true;
        } else if (word == "TIME_LIMIT") {
          out.status = SolveStatus::Timeout;
          has_status = true;
        } else if (word == "OPTIMAL") {
          out.status = SolveStatus::Feasible;
          out.values.assign(model.vars.size(), 0);
          has_status = true;
        }
      } else if (out.status == SolveStatus::Feasible) {
        auto it = token_var.find(word);
        double value;
        if (it != token_var.end() && words >> value) {
          out.values[it->second] = value > 0.5 ? 1 : 0;
          has_assignment = true;
        }
      }
    }
  }
  if (!has_status) {
    throw Error(ErrorCode::SolverFailure, "no status keyword in output of " + command);
  }
  if (out.status == SolveStatus::Feasible && !has_assignment) {
    throw Error(ErrorCode::SolverFailure, "OPTIMAL without a parseable assignment from " + command);
  }
  return out;
}

IlpCertificate make_certificate(const Election& e, const RegionModel& model,
                                const IlpOptions& opt) {
  IlpCertificate cert;
  for (int c = 1; c <= e.m; ++c) cert.candidate_subset.push_back(c);
  cert.rankings = model.rankings;
  for (const RegionModel::Var& v : model.vars) cert.vars.push_back({v.kind, v.votes});
  cert.rows = model.rows;
  cert.solver_id = opt.solver;
  cert.status = "infeasible";
  return cert;
}

}  // namespace

SolveResult solve_01(const RegionModel& model, const std::string& solver,
                     std::chrono::milliseconds slice) {
  if (solver == "builtin") {
    return BranchSearch(model, std::chrono::steady_clock::now() + slice).run();
  }
  const std::string prefix = "external:";
  if (solver.rfind(prefix, 0) == 0) {
    return solve_external(model, solver.substr(prefix.size()), slice);
  }
  throw Error(ErrorCode::SolverFailure, "unknown solver " + solver);
}

RefuteOutcome lazy_refute(const Election& e, std::chrono::milliseconds budget,
                          const IlpOptions& opt, const std::atomic<bool>* stop) {
  RegionModel model = build_base_model(e, opt);
  auto deadline = std::chrono::steady_clock::now() + budget;

  for (int it = 0; it < opt.max_iterations; ++it) {
    if (stop && stop->load()) return {false, std::nullopt, "stopped"};
    auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return {false, std::nullopt, "budget exhausted"};
    auto slice = std::chrono::duration_cast<std::chrono::milliseconds>(
        (deadline - now) / (opt.max_iterations - it));
    if (slice.count() < 1) slice = std::chrono::milliseconds(1);

    SolveResult res = solve_01(model, opt.solver, slice);
    if (res.status == SolveStatus::Infeasible) {
      return {true, make_certificate(e, model, opt), ""};
    }
    if (res.status == SolveStatus::Timeout) return {false, std::nullopt, "solver timeout"};

    int added = 0;
    try {
      added = generate_violated(e, model, res.values, opt);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::InfeasibleAssignment && opt.solver != "builtin") {
        throw Error(ErrorCode::SolverFailure,
                    std::string("external solver assignment rejected: ") + err.what());
      }
      throw;
    }
    bool repaired = model.refresh_aggregates();
    if (added == 0 && !repaired) return {false, std::nullopt, "assignment compliant"};
  }
  return {false, std::nullopt, "iteration cap reached"};
}

std::optional<IlpCertificate> subset_sweep(const Election& e, std::chrono::milliseconds budget,
                                           const IlpOptions& opt,
                                           const std::function<bool(const Election&)>& screen,
                                           const std::atomic<bool>* stop) {
  if (e.m < 5) return std::nullopt;
  auto deadline = std::chrono::steady_clock::now() + budget;
  int lo = std::max(4, opt.subset_min);
  if (lo > e.m) return std::nullopt;

  long long subsets_left = 0;
  {
    // C(m, s) summed over the sweep sizes.
    std::vector<long long> binom(e.m + 1, 1);
    for (int i = 1; i <= e.m; ++i) {
      for (int j = i - 1; j > 0; --j) binom[j] += binom[j - 1];
      binom[i] = 1;
    }
    for (int s = lo; s <= e.m; ++s) subsets_left += binom[s];
  }

  for (int size = lo; size <= e.m; ++size) {
    std::vector<int> keep(size);
    std::iota(keep.begin(), keep.end(), 1);
    while (true) {
      if (stop && stop->load()) return std::nullopt;
      auto now = std::chrono::steady_clock::now();
      if (now >= deadline) return std::nullopt;
      auto slice = std::chrono::duration_cast<std::chrono::milliseconds>(
          (deadline - now) / std::max(1LL, subsets_left));
      --subsets_left;

      Election sub = restrict_candidates(e, keep).first;
      Election reduced = reduce_fixpoint(sub).first;
      bool embeddable = reduced.m <= 3 || reduced.n_distinct() <= 2 ||
                        (reduced.n_distinct() <= 3 && reduced.m <= 7);
      if (!embeddable && screen) embeddable = screen(reduced);
      if (!embeddable) {
        RefuteOutcome out = lazy_refute(sub, slice, opt, stop);
        if (out.refuted) {
          // Certificate ids refer to the restricted election; publish the
          // subset in the ids of e.
          out.certificate->candidate_subset.clear();
          for (int c : keep) out.certificate->candidate_subset.push_back(c);
          return out.certificate;
        }
      }

      // Next lexicographic combination of {1..m}.
      int i = size - 1;
      while (i >= 0 && keep[i] == e.m - (size - 1 - i)) --i;
      if (i < 0) break;
      ++keep[i];
      for (int j = i + 1; j < size; ++j) keep[j] = keep[j - 1] + 1;
    }
  }
  return std::nullopt;
}

}  // namespace euclid2
