#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "euclid2/portfolio.hpp"

namespace euclid2 {

namespace {

using nlohmann::json;

json vote_json(const Vote& v) { return json(v.order); }

// Every ranking is validated before a Vote is built from it; the Vote
// constructor itself assumes a permutation.
Vote vote_from(const json& j, int expect_m) {
  if (!j.is_array()) throw Error(ErrorCode::CorruptCertificate, "ranking is not an array");
  std::vector<int> order;
  order.reserve(j.size());
  for (const auto& entry : j) {
    if (!entry.is_number_integer())
      throw Error(ErrorCode::CorruptCertificate, "ranking entry is not an integer");
    order.push_back(entry.get<int>());
  }
  int m = static_cast<int>(order.size());
  if (m < 1 || (expect_m >= 0 && m != expect_m))
    throw Error(ErrorCode::CorruptCertificate, "ranking has the wrong length");
  std::vector<char> seen(m + 1, 0);
  for (int c : order) {
    if (c < 1 || c > m || seen[c])
      throw Error(ErrorCode::CorruptCertificate, "ranking is not a permutation");
    seen[c] = 1;
  }
  return Vote(std::move(order));
}

const char* sense_name(RowSense s) {
  switch (s) {
    case RowSense::Le: return "<=";
    case RowSense::Ge: return ">=";
    case RowSense::Eq: return "==";
  }
  return "?";
}

RowSense sense_from(const std::string& s) {
  if (s == "<=") return RowSense::Le;
  if (s == ">=") return RowSense::Ge;
  if (s == "==") return RowSense::Eq;
  throw Error(ErrorCode::CorruptCertificate, "unknown row sense: " + s);
}

json trace_json(const ReductionTrace& t) {
  json steps = json::array();
  for (const ReductionStep& s : t.steps) {
    json js;
    js["rule"] = reduction_rule_name(s.rule);
    js["removed"] = s.removed;
    json cm = json::array();
    for (const auto& [from, to] : s.copy_map) cm.push_back(json::array({from, to}));
    js["copy_map"] = std::move(cm);
    js["dominator"] = s.dominator;
    js["successor"] = s.successor;
    steps.push_back(std::move(js));
  }
  return json{{"steps", std::move(steps)}, {"reduced_to_original", t.reduced_to_original}};
}

int int_from(const json& j, const char* what) {
  if (!j.is_number_integer())
    throw Error(ErrorCode::CorruptCertificate, std::string(what) + " is not an integer");
  return j.get<int>();
}

std::vector<int> int_list_from(const json& j, const char* what) {
  if (!j.is_array())
    throw Error(ErrorCode::CorruptCertificate, std::string(what) + " is not an array");
  std::vector<int> out;
  out.reserve(j.size());
  for (const auto& entry : j) out.push_back(int_from(entry, what));
  return out;
}

const json& field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end())
    throw Error(ErrorCode::CorruptCertificate, std::string("missing field: ") + key);
  return *it;
}

ReductionTrace trace_from(const json& j) {
  ReductionTrace t;
  for (const auto& js : field(j, "steps")) {
    ReductionStep s;
    std::string rule = field(js, "rule").get<std::string>();
    if (rule == reduction_rule_name(ReductionRule::CopiedBlock))
      s.rule = ReductionRule::CopiedBlock;
    else if (rule == reduction_rule_name(ReductionRule::SandwichedCandidate))
      s.rule = ReductionRule::SandwichedCandidate;
    else
      throw Error(ErrorCode::CorruptCertificate, "unknown reduction rule: " + rule);
    s.removed = int_list_from(field(js, "removed"), "removed");
    for (const auto& pair : field(js, "copy_map")) {
      if (!pair.is_array() || pair.size() != 2)
        throw Error(ErrorCode::CorruptCertificate, "copy_map entry is not a pair");
      s.copy_map.emplace_back(int_from(pair[0], "copy_map"), int_from(pair[1], "copy_map"));
    }
    s.dominator = int_from(field(js, "dominator"), "dominator");
    s.successor = int_from(field(js, "successor"), "successor");
    t.steps.push_back(std::move(s));
  }
  t.reduced_to_original = int_list_from(field(j, "reduced_to_original"), "reduced_to_original");
  return t;
}

json point_list_json(const std::vector<std::pair<double, double>>& pts) {
  json out = json::array();
  for (const auto& [x, y] : pts) out.push_back(json::array({x, y}));
  return out;
}

std::vector<std::pair<double, double>> point_list_from(const json& j, const char* what) {
  if (!j.is_array())
    throw Error(ErrorCode::CorruptCertificate, std::string(what) + " is not an array");
  std::vector<std::pair<double, double>> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw Error(ErrorCode::CorruptCertificate, std::string(what) + " entry is not a point");
    out.emplace_back(p[0].get<double>(), p[1].get<double>());
  }
  return out;
}

json payload_json(const Certificate& c) {
  json p;
  if (const auto* t = std::get_if<TrivialCertificate>(&c)) {
    p["rule"] = t->rule;
  } else if (const auto* t = std::get_if<Pattern38Certificate>(&c)) {
    p["voters"] = json::array({t->voters[0], t->voters[1], t->voters[2]});
    p["center"] = t->center;
    json w = json::array();
    for (int i = 1; i <= 7; ++i) w.push_back(t->witness[i]);
    p["witness"] = std::move(w);
  } else if (const auto* t = std::get_if<HullCertificate>(&c)) {
    p["voter_subset"] = t->voter_subset;
    json v;
    v["kind"] = t->violation.kind == Violation::Kind::MaxDegree ? "max-degree"
                                                                : "disconnected-cycle";
    v["vertex"] = t->violation.vertex;
    v["neighbors"] = t->violation.neighbors;
    v["cycle"] = t->violation.cycle;
    p["violation"] = std::move(v);
  } else if (const auto* t = std::get_if<ClosureWitness>(&c)) {
    json votes = json::array();
    for (const Vote& v : t->closure) votes.push_back(vote_json(v));
    p["closure"] = std::move(votes);
    json steps = json::array();
    for (const ClosureStep& s : t->steps)
      steps.push_back(json{{"u", s.u_index}, {"v", s.v_index}, {"added", vote_json(s.added)}});
    p["steps"] = std::move(steps);
    p["bound"] = t->bound;
  } else if (const auto* t = std::get_if<IlpCertificate>(&c)) {
    p["candidate_subset"] = t->candidate_subset;
    json rankings = json::array();
    for (const Vote& v : t->rankings) rankings.push_back(vote_json(v));
    p["rankings"] = std::move(rankings);
    json vars = json::array();
    for (const auto& var : t->vars)
      vars.push_back(json{{"kind", var_kind_name(var.kind)}, {"votes", var.votes}});
    p["vars"] = std::move(vars);
    json rows = json::array();
    for (const Row& r : t->rows) {
      json terms = json::array();
      for (const LinTerm& term : r.terms) terms.push_back(json::array({term.var, term.coef}));
      rows.push_back(json{{"tag", r.tag},
                          {"terms", std::move(terms)},
                          {"sense", sense_name(r.sense)},
                          {"rhs", r.rhs}});
    }
    p["rows"] = std::move(rows);
    p["solver_id"] = t->solver_id;
    p["status"] = t->status;
  } else if (const auto* t = std::get_if<Embedding>(&c)) {
    p["candidates"] = point_list_json(t->cand);
    p["voters"] = point_list_json(t->voter);
    p["margin"] = t->achieved_margin;
  }
  return p;
}

Certificate payload_from(const std::string& kind, const json& p) {
  if (kind == "trivial") {
    TrivialCertificate t;
    t.rule = field(p, "rule").get<std::string>();
    return t;
  }
  if (kind == "pattern38") {
    Pattern38Certificate t;
    std::vector<int> voters = int_list_from(field(p, "voters"), "voters");
    if (voters.size() != 3)
      throw Error(ErrorCode::CorruptCertificate, "pattern witness needs three voters");
    std::copy(voters.begin(), voters.end(), t.voters.begin());
    t.center = int_from(field(p, "center"), "center");
    std::vector<int> w = int_list_from(field(p, "witness"), "witness");
    if (w.size() != 7)
      throw Error(ErrorCode::CorruptCertificate, "pattern witness needs seven candidates");
    t.witness[0] = 0;
    std::copy(w.begin(), w.end(), t.witness.begin() + 1);
    return t;
  }
  if (kind == "hull") {
    HullCertificate t;
    t.voter_subset = int_list_from(field(p, "voter_subset"), "voter_subset");
    const json& v = field(p, "violation");
    std::string vk = field(v, "kind").get<std::string>();
    if (vk == "max-degree") t.violation.kind = Violation::Kind::MaxDegree;
    else if (vk == "disconnected-cycle") t.violation.kind = Violation::Kind::DisconnectedCycle;
    else throw Error(ErrorCode::CorruptCertificate, "unknown violation kind: " + vk);
    t.violation.vertex = int_from(field(v, "vertex"), "vertex");
    t.violation.neighbors = int_list_from(field(v, "neighbors"), "neighbors");
    t.violation.cycle = int_list_from(field(v, "cycle"), "cycle");
    return t;
  }
  if (kind == "closure") {
    ClosureWitness t;
    const json& votes = field(p, "closure");
    if (!votes.is_array())
      throw Error(ErrorCode::CorruptCertificate, "closure is not an array");
    int m = -1;
    for (const auto& jv : votes) {
      Vote v = vote_from(jv, m);
      m = v.m();
      t.closure.push_back(std::move(v));
    }
    for (const auto& js : field(p, "steps")) {
      ClosureStep s;
      s.u_index = int_from(field(js, "u"), "step index");
      s.v_index = int_from(field(js, "v"), "step index");
      s.added = vote_from(field(js, "added"), m);
      t.steps.push_back(std::move(s));
    }
    const json& b = field(p, "bound");
    if (!b.is_number_integer())
      throw Error(ErrorCode::CorruptCertificate, "bound is not an integer");
    t.bound = b.get<long long>();
    return t;
  }
  if (kind == "ilp") {
    IlpCertificate t;
    t.candidate_subset = int_list_from(field(p, "candidate_subset"), "candidate_subset");
    int m = -1;
    for (const auto& jv : field(p, "rankings")) {
      Vote v = vote_from(jv, m);
      m = v.m();
      t.rankings.push_back(std::move(v));
    }
    for (const auto& jv : field(p, "vars")) {
      IlpCertificate::VarDecl var;
      std::string kn = field(jv, "kind").get<std::string>();
      auto vk = var_kind_from_name(kn);
      if (!vk) throw Error(ErrorCode::CorruptCertificate, "unknown variable kind: " + kn);
      var.kind = *vk;
      var.votes = int_list_from(field(jv, "votes"), "votes");
      t.vars.push_back(std::move(var));
    }
    for (const auto& jr : field(p, "rows")) {
      Row r;
      r.tag = field(jr, "tag").get<std::string>();
      for (const auto& jt : field(jr, "terms")) {
        if (!jt.is_array() || jt.size() != 2 || !jt[0].is_number_integer() ||
            !jt[1].is_number_integer())
          throw Error(ErrorCode::CorruptCertificate, "row term is not a pair");
        r.terms.push_back({jt[0].get<int>(), jt[1].get<long long>()});
      }
      r.sense = sense_from(field(jr, "sense").get<std::string>());
      const json& rhs = field(jr, "rhs");
      if (!rhs.is_number_integer())
        throw Error(ErrorCode::CorruptCertificate, "row rhs is not an integer");
      r.rhs = rhs.get<long long>();
      t.rows.push_back(std::move(r));
    }
    t.solver_id = field(p, "solver_id").get<std::string>();
    t.status = field(p, "status").get<std::string>();
    return t;
  }
  if (kind == "embedding") {
    Embedding t;
    t.cand = point_list_from(field(p, "candidates"), "candidates");
    t.voter = point_list_from(field(p, "voters"), "voters");
    const json& margin = field(p, "margin");
    if (!margin.is_number())
      throw Error(ErrorCode::CorruptCertificate, "margin is not a number");
    t.achieved_margin = margin.get<double>();
    return t;
  }
  throw Error(ErrorCode::CorruptCertificate, "unknown certificate kind: " + kind);
}

}  // namespace

std::string verdict_to_json(const Election& e, const Verdict& v, bool include_report) {
  json j;
  j["tool"] = "euclid2";
  j["version"] = kToolVersion;
  j["kind"] = certificate_kind(v.certificate);
  j["status"] = status_name(v.status);
  j["election_digest"] = election_digest(e);
  j["reduced_digest"] = election_digest(replay_trace(e, v.trace));
  j["trace"] = trace_json(v.trace);
  j["payload"] = payload_json(v.certificate);
  if (include_report) {
    json ts = json::array();
    for (const StageTiming& t : v.timings)
      ts.push_back(json{{"stage", t.stage}, {"seconds", t.seconds}});
    j["timings"] = std::move(ts);
    j["note"] = v.note;
  }
  return j.dump(2) + "\n";
}

Verdict verdict_from_json(const std::string& text, std::string* digest,
                          std::string* reduced_digest) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw Error(ErrorCode::CorruptCertificate, "certificate file is not valid json");
  }
  try {
    Verdict v;
    std::string status = field(j, "status").get<std::string>();
    if (status == status_name(Status::Euclidean)) v.status = Status::Euclidean;
    else if (status == status_name(Status::NotEuclidean)) v.status = Status::NotEuclidean;
    else throw Error(ErrorCode::CorruptCertificate, "certificate status must be definitive");
    std::string kind = field(j, "kind").get<std::string>();
    v.certificate = payload_from(kind, field(j, "payload"));
    v.trace = trace_from(field(j, "trace"));
    if (digest) *digest = field(j, "election_digest").get<std::string>();
    if (reduced_digest) *reduced_digest = field(j, "reduced_digest").get<std::string>();
    return v;
  } catch (const json::exception&) {
    throw Error(ErrorCode::CorruptCertificate, "certificate field has the wrong type");
  }
}

}  // namespace euclid2
