#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "euclid2/detectors.hpp"
#include "euclid2/election.hpp"
#include "euclid2/ilp.hpp"
#include "euclid2/qcp.hpp"
#include "euclid2/reducer.hpp"

namespace euclid2 {

inline constexpr const char* kToolVersion = "0.1.0";

enum class Status { Euclidean, NotEuclidean, Unknown };

const char* status_name(Status s);  // "euclidean" / "not-euclidean" / "unknown"

// Screen rule ids, stored verbatim in trivial certificates.
inline constexpr const char* kRuleFewCandidates = "|C| <= 3";
inline constexpr const char* kRuleTwoVotes = "|V| <= 2";
inline constexpr const char* kRuleThreeVotesSevenCandidates = "|V| <= 3 and |C| <= 7";

struct TrivialCertificate {
  std::string rule;
};

using Certificate = std::variant<std::monostate, TrivialCertificate, Pattern38Certificate,
                                 HullCertificate, ClosureWitness, IlpCertificate, Embedding>;

// "none", "trivial", "pattern38", "hull", "closure", "ilp", "embedding".
const char* certificate_kind(const Certificate& c);

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

// Every certificate, embeddings included, refers to the reduced election the
// trace leads to. An Unknown verdict carries no certificate.
struct Verdict {
  Status status = Status::Unknown;
  Certificate certificate;
  ReductionTrace trace;
  std::vector<StageTiming> timings;
  std::string note;
};

// Lane names: find38, hull-quad, closure, embed, hull-full, sweep.
// An empty lane list enables all of them.
struct PortfolioConfig {
  double budget_secs = 60.0;
  std::vector<std::string> lanes;
  IlpOptions ilp;
  QcpOptions qcp;
  std::uint64_t seed = 1;
};

// Dotted runtime overrides (ilp.subset_min, qcp.restarts, portfolio.seed, ...).
// Returns false for an unknown key; throws Malformed for an unparsable value.
bool apply_config(PortfolioConfig& cfg, const std::string& key, const std::string& value);

// The three always-embeddable shapes, tested in the order listed above.
// Counts are over distinct rankings.
std::optional<Verdict> triviality_screen(const Election& e);

// Screen, reduce to a fixpoint, re-screen, then race detector lanes over the
// reduced election. Quick refuters and the embedding search start first; the
// exhaustive hull scan and the subset sweep join once the quick refuters come
// up empty. The first definitive answer cancels the rest; ties go to the
// cheapest-to-check certificate kind. A lane failure is demoted to a note,
// never to a wrong verdict.
Verdict run_portfolio(const Election& e, const PortfolioConfig& cfg = {});

struct CheckResult {
  bool accepted = false;
  std::string reason;
};

// Replays the trace and re-verifies the certificate against the reduced
// election using the checkers alone; no search is re-run. Infeasibility
// certificates additionally get their row set audited for sound shapes and
// re-solved.
CheckResult verify_certificate(const Election& e, const Verdict& v);

// Certificate file serialization. The JSON carries the tool version, both
// election digests, the reduction trace, and a per-kind payload; coordinates
// survive the round trip exactly. include_report adds timings and the note.
std::string verdict_to_json(const Election& e, const Verdict& v, bool include_report = false);

// Throws CorruptCertificate on malformed input. The stored digests are
// reported through the out parameters for the caller to compare.
Verdict verdict_from_json(const std::string& text, std::string* digest = nullptr,
                          std::string* reduced_digest = nullptr);

}  // namespace euclid2
