#include "euclid2/portfolio.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace euclid2;
using std::chrono::milliseconds;

namespace {

namespace fs = std::filesystem;

// A five candidate election whose tail block {4,5} copies the head pair
// {2,3}, so one reduction step drops to three candidates.
Election reducible_demo() {
  return make_election(5, {{1, 2, 3, 4, 5}, {3, 1, 2, 5, 4}, {1, 3, 2, 5, 4}, {2, 3, 1, 4, 5}});
}

Verdict refutation_verdict(const Election& e, Certificate cert) {
  Verdict v;
  v.status = Status::NotEuclidean;
  v.certificate = std::move(cert);
  v.trace = reduce_fixpoint(e).second;
  return v;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string(EUCLID2_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch_dir() {
  fs::path dir = fs::temp_directory_path() / "euclid2_portfolio_tests";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("the triviality screen applies its three rules in order") {
  Election three = make_election(
      3, {{1, 2, 3}, {2, 1, 3}, {3, 2, 1}, {1, 3, 2}});
  auto v = triviality_screen(three);
  REQUIRE(v.has_value());
  CHECK(v->status == Status::Euclidean);
  CHECK(std::get<TrivialCertificate>(v->certificate).rule == kRuleFewCandidates);
  CHECK(v->trace.steps.empty());

  Election two_votes = make_election(8, {{1, 2, 3, 4, 5, 6, 7, 8}, {8, 7, 6, 5, 4, 3, 2, 1}});
  v = triviality_screen(two_votes);
  REQUIRE(v.has_value());
  CHECK(std::get<TrivialCertificate>(v->certificate).rule == kRuleTwoVotes);

  Election three_votes7 = make_election(
      7, {{1, 2, 3, 4, 5, 6, 7}, {7, 6, 5, 4, 3, 2, 1}, {4, 2, 6, 1, 7, 3, 5}});
  v = triviality_screen(three_votes7);
  REQUIRE(v.has_value());
  CHECK(std::get<TrivialCertificate>(v->certificate).rule == kRuleThreeVotesSevenCandidates);

  // Three distinct votes over eight candidates match no rule.
  Election three_votes8 = make_election(
      8, {{1, 2, 3, 4, 5, 6, 7, 8}, {8, 7, 6, 5, 4, 3, 2, 1}, {4, 2, 6, 1, 7, 3, 5, 8}});
  CHECK_FALSE(triviality_screen(three_votes8).has_value());
  CHECK_FALSE(triviality_screen(fixtures::load("embeddable4x7.soc")).has_value());
}

TEST_CASE("reduction can settle an instance before any lane starts") {
  Election e = reducible_demo();
  REQUIRE_FALSE(triviality_screen(e).has_value());
  Verdict v = run_portfolio(e);
  CHECK(v.status == Status::Euclidean);
  REQUIRE(std::holds_alternative<TrivialCertificate>(v.certificate));
  CHECK(std::get<TrivialCertificate>(v.certificate).rule == kRuleFewCandidates);
  REQUIRE(v.trace.steps.size() == 1);
  CHECK(v.trace.steps[0].rule == ReductionRule::CopiedBlock);
  CHECK(verify_certificate(e, v).accepted);

  // The recorded rule must actually hold for the replayed election.
  Verdict forged = v;
  std::get<TrivialCertificate>(forged.certificate).rule = kRuleTwoVotes;
  CheckResult res = verify_certificate(e, forged);
  CHECK_FALSE(res.accepted);
  CHECK(contains(res.reason, "does not hold"));

  forged = v;
  std::get<TrivialCertificate>(forged.certificate).rule = "|C| <= 99";
  CHECK_FALSE(verify_certificate(e, forged).accepted);
}

TEST_CASE("the portfolio refutes the eight candidate pattern through its scanner") {
  Election e = fixtures::load("pattern38.soc");
  Verdict v = run_portfolio(e);
  CHECK(v.status == Status::NotEuclidean);
  REQUIRE(std::holds_alternative<Pattern38Certificate>(v.certificate));
  CHECK(verify_certificate(e, v).accepted);

  // The winning certificate equals a standalone scan of the reduced election.
  auto standalone = find_38(reduce_fixpoint(e).first);
  REQUIRE(standalone.has_value());
  const auto& cert = std::get<Pattern38Certificate>(v.certificate);
  CHECK(cert.voters == standalone->voters);
  CHECK(cert.center == standalone->center);
  CHECK(cert.witness == standalone->witness);

  // The same certificate is meaningless for a different election.
  Election other = fixtures::load("hull_quad7.soc");
  CHECK_FALSE(verify_certificate(other, v).accepted);
}

TEST_CASE("the portfolio refutes the closure blowup through the closure lane") {
  Election e = fixtures::load("closure_blowup4.soc");
  Verdict v = run_portfolio(e);
  CHECK(v.status == Status::NotEuclidean);
  REQUIRE(std::holds_alternative<ClosureWitness>(v.certificate));
  const auto& w = std::get<ClosureWitness>(v.certificate);
  CHECK(w.bound == 18);
  CHECK(static_cast<long long>(w.closure.size()) > w.bound);
  CHECK(verify_certificate(e, v).accepted);

  Verdict forged = v;
  auto& fw = std::get<ClosureWitness>(forged.certificate);
  fw.closure.push_back(fw.closure.back());
  CHECK_FALSE(verify_certificate(e, forged).accepted);
}

TEST_CASE("the portfolio embeds the realizable instance and rounds its certificate") {
  Election e = fixtures::load("embeddable4x7.soc");
  Verdict v = run_portfolio(e);
  CHECK(v.status == Status::Euclidean);
  REQUIRE(std::holds_alternative<Embedding>(v.certificate));
  const auto& emb = std::get<Embedding>(v.certificate);
  CHECK(emb.achieved_margin >= 0.999);
  CHECK(verify_embedding(e, emb, 0.0).accepted);
  CHECK(verify_certificate(e, v).accepted);
  for (const StageTiming& t : v.timings)
    CHECK(t.seconds >= 0.0);
  CHECK(v.timings.front().stage == "screen");
  CHECK(v.timings.back().stage == "total");

  Verdict forged = v;
  std::get<Embedding>(forged.certificate).voter[0].first += 25.0;
  CHECK_FALSE(verify_certificate(e, forged).accepted);
}

TEST_CASE("hull refutations survive the certificate pipeline") {
  Election e = fixtures::load("hull_quad7.soc");
  auto [reduced, trace] = reduce_fixpoint(e);
  auto cert = hull_refute(reduced, HullMode::Quad);
  REQUIRE(cert.has_value());
  Verdict v;
  v.status = Status::NotEuclidean;
  v.certificate = *cert;
  v.trace = trace;
  CHECK(verify_certificate(e, v).accepted);

  std::string text = verdict_to_json(e, v);
  std::string digest, reduced_digest;
  Verdict back = verdict_from_json(text, &digest, &reduced_digest);
  CHECK(digest == election_digest(e));
  CHECK(reduced_digest == election_digest(reduced));
  CHECK(back.status == Status::NotEuclidean);
  REQUIRE(std::holds_alternative<HullCertificate>(back.certificate));
  CHECK(std::get<HullCertificate>(back.certificate).voter_subset ==
        std::get<HullCertificate>(v.certificate).voter_subset);
  CHECK(verify_certificate(e, back).accepted);

  Verdict forged = back;
  std::get<HullCertificate>(forged.certificate).voter_subset[0] += 1;
  CHECK_FALSE(verify_certificate(e, forged).accepted);
}

TEST_CASE("certificate json round trips every kind it can carry") {
  Election cb = fixtures::load("closure_blowup4.soc");

  SUBCASE("closure witnesses") {
    auto w = closure_refute(cb);
    REQUIRE(w.has_value());
    Verdict v = refutation_verdict(cb, Certificate{*w});
    Verdict back = verdict_from_json(verdict_to_json(cb, v));
    REQUIRE(std::holds_alternative<ClosureWitness>(back.certificate));
    CHECK(std::get<ClosureWitness>(back.certificate).closure.size() ==
          w->closure.size());
    CHECK(verify_certificate(cb, back).accepted);
  }

  SUBCASE("infeasibility certificates") {
    RefuteOutcome ro = lazy_refute(cb, milliseconds(10000));
    REQUIRE(ro.refuted);
    REQUIRE(ro.certificate.has_value());
    Verdict v = refutation_verdict(cb, Certificate{*ro.certificate});
    CHECK(verify_certificate(cb, v).accepted);
    Verdict back = verdict_from_json(verdict_to_json(cb, v));
    REQUIRE(std::holds_alternative<IlpCertificate>(back.certificate));
    const auto& a = std::get<IlpCertificate>(v.certificate);
    const auto& b = std::get<IlpCertificate>(back.certificate);
    CHECK(a.candidate_subset == b.candidate_subset);
    CHECK(a.rankings.size() == b.rankings.size());
    CHECK(a.rows.size() == b.rows.size());
    CHECK(verify_certificate(cb, back).accepted);
  }

  SUBCASE("pattern witnesses with a coordinate perfect round trip") {
    Election e = fixtures::load("pattern38.soc");
    auto cert = find_38(e);
    REQUIRE(cert.has_value());
    Verdict v = refutation_verdict(e, Certificate{*cert});
    Verdict back = verdict_from_json(verdict_to_json(e, v));
    REQUIRE(std::holds_alternative<Pattern38Certificate>(back.certificate));
    CHECK(std::get<Pattern38Certificate>(back.certificate).witness == cert->witness);
    CHECK(verify_certificate(e, back).accepted);

    // Damaging one witness entry leaves only six distinct subsets covered.
    Verdict forged = back;
    auto& fw = std::get<Pattern38Certificate>(forged.certificate);
    fw.witness[3] = fw.witness[5];
    CHECK_FALSE(verify_certificate(e, forged).accepted);
  }

  SUBCASE("embeddings keep their coordinates bit for bit") {
    Election e = fixtures::load("embeddable4x7.soc");
    Verdict v = run_portfolio(e);
    REQUIRE(std::holds_alternative<Embedding>(v.certificate));
    Verdict back = verdict_from_json(verdict_to_json(e, v));
    REQUIRE(std::holds_alternative<Embedding>(back.certificate));
    const auto& a = std::get<Embedding>(v.certificate);
    const auto& b = std::get<Embedding>(back.certificate);
    CHECK(a.cand == b.cand);
    CHECK(a.voter == b.voter);
    CHECK(verify_certificate(e, back).accepted);
  }

  SUBCASE("unknown verdicts serialize as reports but never as certificates") {
    Verdict u;
    u.status = Status::Unknown;
    u.trace = reduce_fixpoint(cb).second;
    u.note = "ran out of budget";
    std::string report = verdict_to_json(cb, u, true);
    CHECK(contains(report, "\"unknown\""));
    CHECK_THROWS_AS(verdict_from_json(report), Error);
  }
}

TEST_CASE("malformed certificate files are rejected as corrupt") {
  CHECK_THROWS_AS(verdict_from_json("{not json"), Error);
  CHECK_THROWS_AS(verdict_from_json("{}"), Error);
  CHECK_THROWS_AS(verdict_from_json(
                      R"({"status":"not-euclidean","kind":"banana","payload":{},
                          "trace":{"steps":[],"reduced_to_original":[0,1]}})"),
                  Error);
  // A ranking that is not a permutation must not survive parsing.
  CHECK_THROWS_AS(
      verdict_from_json(
          R"({"status":"not-euclidean","kind":"closure",
              "payload":{"closure":[[1,1,2,3]],"steps":[],"bound":18},
              "trace":{"steps":[],"reduced_to_original":[0,1,2,3,4]},
              "election_digest":"x","reduced_digest":"x"})"),
      Error);
  try {
    verdict_from_json("[]");
    CHECK(false);
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::CorruptCertificate);
  }
}

TEST_CASE("the infeasibility audit rejects weakened or padded row systems") {
  Election cb = fixtures::load("closure_blowup4.soc");
  RefuteOutcome ro = lazy_refute(cb, milliseconds(10000));
  REQUIRE(ro.refuted);
  Verdict good = refutation_verdict(cb, Certificate{*ro.certificate});
  REQUIRE(verify_certificate(cb, good).accepted);

  SUBCASE("a loosened region cap is not a sound row") {
    Verdict v = good;
    auto& cert = std::get<IlpCertificate>(v.certificate);
    bool touched = false;
    for (Row& r : cert.rows)
      if (r.tag == "C2") {
        r.rhs = 17;  // one below the real bound for four candidates
        touched = true;
      }
    REQUIRE(touched);
    CheckResult res = verify_certificate(cb, v);
    CHECK_FALSE(res.accepted);
    CHECK(contains(res.reason, "C2"));
  }

  SUBCASE("an empty row system is satisfiable") {
    Verdict v = good;
    std::get<IlpCertificate>(v.certificate).rows.clear();
    // Keep only the input rows so the solver has something satisfiable.
    CheckResult res = verify_certificate(cb, v);
    CHECK_FALSE(res.accepted);
    CHECK(contains(res.reason, "satisfiable"));
  }

  SUBCASE("only a proof of infeasibility counts") {
    Verdict v = good;
    std::get<IlpCertificate>(v.certificate).status = "timeout";
    CHECK_FALSE(verify_certificate(cb, v).accepted);
  }

  SUBCASE("an input row must quote a real vote") {
    Verdict v = good;
    auto& cert = std::get<IlpCertificate>(v.certificate);
    bool touched = false;
    for (Row& r : cert.rows)
      if (r.tag == "C1" && !touched) {
        r.rhs = 0;
        touched = true;
      }
    REQUIRE(touched);
    CHECK_FALSE(verify_certificate(cb, v).accepted);
  }

  SUBCASE("unknown row families are refused") {
    Verdict v = good;
    auto& cert = std::get<IlpCertificate>(v.certificate);
    cert.rows.push_back(Row{"Z9", {{0, 1}}, RowSense::Le, 1});
    CheckResult res = verify_certificate(cb, v);
    CHECK_FALSE(res.accepted);
    CHECK(contains(res.reason, "unknown row family"));
  }

  SUBCASE("the candidate subset must stay within the election") {
    Verdict v = good;
    std::get<IlpCertificate>(v.certificate).candidate_subset = {1, 2, 3};
    CHECK_FALSE(verify_certificate(cb, v).accepted);
    std::get<IlpCertificate>(v.certificate).candidate_subset = {1, 2, 3, 5};
    CHECK_FALSE(verify_certificate(cb, v).accepted);
  }

  SUBCASE("duplicate rankings are refused") {
    Verdict v = good;
    auto& cert = std::get<IlpCertificate>(v.certificate);
    REQUIRE(cert.rankings.size() >= 2);
    cert.rankings[1] = cert.rankings[0];
    CHECK_FALSE(verify_certificate(cb, v).accepted);
  }
}

TEST_CASE("config overrides parse and reject garbage") {
  PortfolioConfig cfg;
  CHECK(apply_config(cfg, "portfolio.budget_secs", "12.5"));
  CHECK(cfg.budget_secs == 12.5);
  CHECK(apply_config(cfg, "portfolio.seed", "99"));
  CHECK(cfg.seed == 99);
  CHECK(apply_config(cfg, "ilp.max_iterations", "7"));
  CHECK(cfg.ilp.max_iterations == 7);
  CHECK(apply_config(cfg, "ilp.subset_min", "6"));
  CHECK(apply_config(cfg, "ilp.enable_six_cycles", "true"));
  CHECK(cfg.ilp.enable_six_cycles);
  CHECK(apply_config(cfg, "ilp.solver", "external:cat"));
  CHECK(apply_config(cfg, "qcp.eps_star", "2.0"));
  CHECK(apply_config(cfg, "qcp.box_init", "50"));
  CHECK(apply_config(cfg, "qcp.slice_init_secs", "1.5"));
  CHECK(apply_config(cfg, "qcp.box_factor", "4"));
  CHECK(apply_config(cfg, "qcp.slice_factor", "3"));
  CHECK(apply_config(cfg, "qcp.restarts", "10"));
  CHECK(cfg.qcp.restarts == 10);
  CHECK(apply_config(cfg, "qcp.full_pairs", "1"));
  CHECK(cfg.qcp.full_pairs);
  CHECK(apply_config(cfg, "qcp.solver", "builtin"));
  CHECK_FALSE(apply_config(cfg, "qcp.bogus", "1"));
  CHECK_THROWS_AS(apply_config(cfg, "qcp.restarts", "many"), Error);
  CHECK_THROWS_AS(apply_config(cfg, "qcp.full_pairs", "maybe"), Error);
}

TEST_CASE("lane filters narrow the race and unknown verdicts stay bare") {
  Election e = fixtures::load("pattern38.soc");
  PortfolioConfig cfg;
  cfg.lanes = {"embed"};
  cfg.budget_secs = 0.5;
  Verdict v = run_portfolio(e, cfg);
  CHECK(v.status == Status::Unknown);
  CHECK(std::holds_alternative<std::monostate>(v.certificate));
  CHECK_FALSE(v.note.empty());
  CHECK_FALSE(verify_certificate(e, v).accepted);

  cfg.lanes = {"warp"};
  CHECK_THROWS_AS(run_portfolio(e, cfg), Error);
}

TEST_CASE("refuter lanes never tag a planar instance") {
  PortfolioConfig cfg;
  cfg.lanes = {"find38", "hull-quad", "closure"};
  cfg.budget_secs = 5.0;
  std::mt19937_64 seeds(4242);
  for (int i = 0; i < 60; ++i) {
    int m = 4 + static_cast<int>(seeds() % 4);
    int n = 4 + static_cast<int>(seeds() % 5);
    auto inst = synthetic::generate_planar(seeds(), m, n);
    Verdict v = run_portfolio(inst.e, cfg);
    CHECK(v.status != Status::NotEuclidean);
  }
}

TEST_CASE("the command line recognizes, emits, and re-verifies") {
  fs::path dir = scratch_dir();
  fs::path cert_path = dir / "embed_cert.json";
  std::error_code ec;
  fs::remove(cert_path, ec);

  CliResult refute = run_cli("recognize " + fixtures::fixture_path("pattern38.soc"));
  CHECK(refute.exit_code == 0);
  CHECK(contains(refute.output, "verdict: not-euclidean"));
  CHECK(contains(refute.output, "certificate: pattern38"));

  CliResult embed = run_cli("recognize " + fixtures::fixture_path("embeddable4x7.soc") +
                            " --json --emit-cert " + cert_path.string());
  CHECK(embed.exit_code == 0);
  auto report = nlohmann::json::parse(embed.output);
  CHECK(report["status"] == "euclidean");
  CHECK(report["kind"] == "embedding");
  CHECK(report["version"] == kToolVersion);
  REQUIRE(fs::exists(cert_path));

  CliResult ok = run_cli("verify " + fixtures::fixture_path("embeddable4x7.soc") + " " +
                         cert_path.string());
  CHECK(ok.exit_code == 0);
  CHECK(contains(ok.output, "accepted"));

  // The same certificate against another election is refused up front.
  CliResult cross = run_cli("verify " + fixtures::fixture_path("pattern38.soc") + " " +
                            cert_path.string());
  CHECK(cross.exit_code == 1);
  CHECK(contains(cross.output, "different election"));

  // A perturbed coordinate breaks a preference and must be caught.
  auto cert = nlohmann::json::parse(fixtures::read_file(cert_path.string()));
  cert["payload"]["voters"][0][0] = cert["payload"]["voters"][0][0].get<double>() + 30.0;
  fs::path bad_path = dir / "embed_cert_bad.json";
  write_file(bad_path, cert.dump());
  CliResult bad = run_cli("verify " + fixtures::fixture_path("embeddable4x7.soc") + " " +
                          bad_path.string());
  CHECK(bad.exit_code == 1);
  CHECK(contains(bad.output, "rejected"));

  CliResult garbage = run_cli("verify " + fixtures::fixture_path("embeddable4x7.soc") + " " +
                              fixtures::fixture_path("embeddable4x7.soc"));
  CHECK(garbage.exit_code == 1);

  CliResult missing = run_cli("recognize " + (dir / "nope.soc").string());
  CHECK(missing.exit_code == 1);
}

TEST_CASE("the command line reports unknown runs without inventing certificates") {
  fs::path dir = scratch_dir();
  fs::path cert_path = dir / "never_written.json";
  std::error_code ec;
  fs::remove(cert_path, ec);
  CliResult r = run_cli("recognize " + fixtures::fixture_path("pattern38.soc") +
                        " --lanes embed --budget 0.5 --emit-cert " + cert_path.string());
  CHECK(r.exit_code == 2);
  CHECK(contains(r.output, "verdict: unknown"));
  CHECK_FALSE(fs::exists(cert_path));

  CliResult bad_lane = run_cli("recognize " + fixtures::fixture_path("pattern38.soc") +
                               " --lanes warp");
  CHECK(bad_lane.exit_code == 1);

  CliResult bad_set = run_cli("recognize " + fixtures::fixture_path("pattern38.soc") +
                              " --set qcp.restarts=many");
  CHECK(bad_set.exit_code == 1);
}

TEST_CASE("batch mode tabulates a directory and totals the definitive runs") {
  fs::path dir = scratch_dir() / "batch_corpus";
  fs::create_directories(dir);
  for (const char* name : {"pattern38.soc", "embeddable4x7.soc", "closure_blowup4.soc"})
    fs::copy_file(fixtures::fixture_path(name), dir / name,
                  fs::copy_options::overwrite_existing);
  fs::path summary = scratch_dir() / "batch_summary.txt";
  std::error_code ec;
  fs::remove(summary, ec);

  CliResult r = run_cli("batch " + dir.string() + " --summary " + summary.string());
  CHECK(r.exit_code == 0);
  CHECK(contains(r.output, "pattern38.soc"));
  CHECK(contains(r.output, "embeddable4x7.soc"));
  CHECK(contains(r.output, "closure_blowup4.soc"));
  CHECK(contains(r.output, "definitive 3/3"));
  REQUIRE(fs::exists(summary));
  CHECK(contains(fixtures::read_file(summary.string()), "definitive 3/3"));

  // A zero budget leaves the planar instance unsolved and flips the exit code.
  fs::path solo = scratch_dir() / "batch_solo";
  fs::create_directories(solo);
  fs::copy_file(fixtures::fixture_path("embeddable4x7.soc"), solo / "embeddable4x7.soc",
                fs::copy_options::overwrite_existing);
  CliResult unsolved = run_cli("batch " + solo.string() + " --budget 0");
  CHECK(unsolved.exit_code == 2);
  CHECK(contains(unsolved.output, "definitive 0/1"));

  CliResult empty = run_cli("batch " + (scratch_dir() / "no_such_dir").string());
  CHECK(empty.exit_code == 1);
}
