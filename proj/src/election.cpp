#include "euclid2/election.hpp"

#include <algorithm>
#include <cassert>
#include <sstream>
#include <unordered_map>

namespace euclid2 {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::TieOrIncomplete: return "TieOrIncomplete";
    case ErrorCode::Malformed: return "Malformed";
    case ErrorCode::EmptyKeep: return "EmptyKeep";
    case ErrorCode::MismatchedUniverse: return "MismatchedUniverse";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::TooFewVoters: return "TooFewVoters";
    case ErrorCode::SubsetTooLarge: return "SubsetTooLarge";
    case ErrorCode::EqualVotes: return "EqualVotes";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::InfeasibleAssignment: return "InfeasibleAssignment";
    case ErrorCode::MissingPoint: return "MissingPoint";
    case ErrorCode::CorruptCertificate: return "CorruptCertificate";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

Vote::Vote(std::vector<int> order_in) : order(std::move(order_in)) {
  pos.assign(order.size() + 1, -1);
  for (int p = 0; p < static_cast<int>(order.size()); ++p) {
    int c = order[p];
    assert(c >= 1 && c <= static_cast<int>(order.size()) && pos[c] == -1);
    pos[c] = p;
  }
}

size_t VoteHash::operator()(const Vote& v) const {
  uint64_t h = 1469598103934665603ull;
  for (int c : v.order) {
    h ^= static_cast<uint64_t>(c);
    h *= 1099511628211ull;
  }
  return static_cast<size_t>(h);
}

long long Election::n_total() const {
  long long t = 0;
  for (long long k : multiplicity) t += k;
  return t;
}

namespace {

bool is_permutation_1_to_m(const std::vector<int>& r, int m) {
  if (static_cast<int>(r.size()) != m) return false;
  std::vector<char> seen(m + 1, 0);
  for (int c : r) {
    if (c < 1 || c > m || seen[c]) return false;
    seen[c] = 1;
  }
  return true;
}

std::vector<std::string> default_names(int m) {
  std::vector<std::string> names(m + 1);
  for (int c = 1; c <= m; ++c) names[c] = std::to_string(c);
  return names;
}

void append_ranking(Election& e, const std::vector<int>& r, long long count,
                    std::unordered_map<Vote, int, VoteHash>& index) {
  Vote v(r);
  auto it = index.find(v);
  if (it != index.end()) {
    e.multiplicity[it->second] += count;
  } else {
    index.emplace(v, e.n_distinct());
    e.votes.push_back(std::move(v));
    e.multiplicity.push_back(count);
  }
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Election make_election(int m, const std::vector<std::vector<int>>& rankings) {
  Election e;
  e.m = m;
  e.names = default_names(m);
  std::unordered_map<Vote, int, VoteHash> index;
  for (const auto& r : rankings) {
    if (!is_permutation_1_to_m(r, m))
      throw Error(ErrorCode::TieOrIncomplete, "ranking is not a permutation of 1.." + std::to_string(m));
    append_ranking(e, r, 1, index);
  }
  return e;
}

Election parse_soc(const std::string& text) {
  int declared_m = -1;
  long long declared_voters = -1;
  std::vector<std::pair<int, std::string>> name_entries;
  std::vector<std::pair<long long, std::vector<int>>> rankings;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    const std::string where = "line " + std::to_string(lineno);
    if (t[0] == '#') {
      std::string meta = trim(t.substr(1));
      auto colon = meta.find(':');
      if (colon == std::string::npos) continue;
      std::string key = trim(meta.substr(0, colon));
      std::string value = trim(meta.substr(colon + 1));
      if (key == "NUMBER ALTERNATIVES") {
        try {
          declared_m = std::stoi(value);
        } catch (const std::exception&) {
          throw Error(ErrorCode::Malformed, "bad NUMBER ALTERNATIVES at " + where);
        }
        if (declared_m < 0) throw Error(ErrorCode::Malformed, "negative NUMBER ALTERNATIVES at " + where);
      } else if (key == "NUMBER VOTERS") {
        try {
          declared_voters = std::stoll(value);
        } catch (const std::exception&) {
          throw Error(ErrorCode::Malformed, "bad NUMBER VOTERS at " + where);
        }
      } else if (key.rfind("ALTERNATIVE NAME ", 0) == 0) {
        int k = 0;
        try {
          k = std::stoi(key.substr(17));
        } catch (const std::exception&) {
          throw Error(ErrorCode::Malformed, "bad ALTERNATIVE NAME index at " + where);
        }
        name_entries.emplace_back(k, value);
      }
      continue;
    }
    if (t.find('{') != std::string::npos || t.find('}') != std::string::npos)
      throw Error(ErrorCode::TieOrIncomplete, "tie braces at " + where);
    auto colon = t.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::Malformed, "missing count separator at " + where);
    long long count = 0;
    try {
      size_t used = 0;
      count = std::stoll(trim(t.substr(0, colon)), &used);
      if (used != trim(t.substr(0, colon)).size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::Malformed, "bad multiplicity at " + where);
    }
    if (count <= 0) throw Error(ErrorCode::Malformed, "nonpositive multiplicity at " + where);
    std::vector<int> r;
    std::string rest = t.substr(colon + 1);
    std::string tok;
    std::istringstream toks(rest);
    while (std::getline(toks, tok, ',')) {
      tok = trim(tok);
      if (tok.empty()) throw Error(ErrorCode::Malformed, "empty candidate token at " + where);
      int id = 0;
      try {
        size_t used = 0;
        id = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw Error(ErrorCode::Malformed, "bad candidate token at " + where);
      }
      r.push_back(id);
    }
    if (r.empty()) throw Error(ErrorCode::Malformed, "empty ranking at " + where);
    rankings.emplace_back(count, std::move(r));
  }

  int m = declared_m;
  if (m < 0) {
    if (rankings.empty())
      throw Error(ErrorCode::Malformed, "cannot infer candidate count from an empty profile");
    m = static_cast<int>(rankings.front().second.size());
  }

  Election e;
  e.m = m;
  e.names = default_names(m);
  for (const auto& [k, name] : name_entries) {
    if (k < 1 || k > m) throw Error(ErrorCode::Malformed, "ALTERNATIVE NAME index out of range");
    e.names[k] = name;
  }
  std::unordered_map<Vote, int, VoteHash> index;
  long long total = 0;
  for (const auto& [count, r] : rankings) {
    if (!is_permutation_1_to_m(r, m))
      throw Error(ErrorCode::TieOrIncomplete, "ranking is not a permutation of 1.." + std::to_string(m));
    append_ranking(e, r, count, index);
    total += count;
  }
  if (declared_voters >= 0 && declared_voters != total)
    throw Error(ErrorCode::Malformed, "NUMBER VOTERS disagrees with multiplicity total");
  return e;
}

std::string to_soc(const Election& e) {
  std::ostringstream out;
  out << "# NUMBER ALTERNATIVES: " << e.m << "\n";
  out << "# NUMBER VOTERS: " << e.n_total() << "\n";
  for (int c = 1; c <= e.m; ++c) {
    if (e.names[c] != std::to_string(c)) out << "# ALTERNATIVE NAME " << c << ": " << e.names[c] << "\n";
  }
  for (int i = 0; i < e.n_distinct(); ++i) {
    out << e.multiplicity[i] << ": ";
    for (int p = 0; p < e.m; ++p) {
      if (p) out << ",";
      out << e.votes[i].order[p];
    }
    out << "\n";
  }
  return out.str();
}

std::string canonical_text(const Election& e) {
  std::ostringstream out;
  out << "m " << e.m << "\n";
  for (int i = 0; i < e.n_distinct(); ++i) {
    out << e.multiplicity[i] << ":";
    for (int c : e.votes[i].order) out << " " << c;
    out << "\n";
  }
  return out.str();
}

uint64_t fnv1a64(const std::string& data) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char b : data) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

std::string election_digest(const Election& e) {
  uint64_t h = fnv1a64(canonical_text(e));
  static const char* hex = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = hex[h & 0xf];
    h >>= 4;
  }
  return s;
}

std::pair<Election, SubelectionMap> restrict_candidates(const Election& e,
                                                        const std::vector<int>& keep) {
  if (keep.empty()) throw Error(ErrorCode::EmptyKeep, "empty candidate keep set");
  std::vector<int> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.size() != keep.size())
    throw Error(ErrorCode::MismatchedUniverse, "duplicate candidate in keep set");
  if (sorted.front() < 1 || sorted.back() > e.m)
    throw Error(ErrorCode::MismatchedUniverse, "keep set outside candidate universe");

  SubelectionMap map;
  int mm = static_cast<int>(sorted.size());
  map.to_original.assign(mm + 1, 0);
  map.from_original.assign(e.m + 1, 0);
  for (int i = 0; i < mm; ++i) {
    map.to_original[i + 1] = sorted[i];
    map.from_original[sorted[i]] = i + 1;
  }

  Election r;
  r.m = mm;
  r.names.assign(mm + 1, "");
  for (int c = 1; c <= mm; ++c) r.names[c] = e.names[map.to_original[c]];
  std::unordered_map<Vote, int, VoteHash> index;
  for (int i = 0; i < e.n_distinct(); ++i) {
    std::vector<int> projected;
    projected.reserve(mm);
    for (int c : e.votes[i].order) {
      if (map.from_original[c]) projected.push_back(map.from_original[c]);
    }
    append_ranking(r, projected, e.multiplicity[i], index);
  }
  return {std::move(r), std::move(map)};
}

Election select_voters(const Election& e, const std::vector<int>& voter_indices) {
  Election r;
  r.m = e.m;
  r.names = e.names;
  for (int i : voter_indices) {
    if (i < 0 || i >= e.n_distinct())
      throw Error(ErrorCode::MismatchedUniverse, "voter index out of range");
    r.votes.push_back(e.votes[i]);
    r.multiplicity.push_back(e.multiplicity[i]);
  }
  return r;
}

int swap_distance(const Vote& u, const Vote& v) {
  if (u.m() != v.m()) throw Error(ErrorCode::MismatchedUniverse, "votes over different universes");
  int m = u.m();
  int d = 0;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      int a = u.order[i], b = u.order[j];
      if (v.pos[a] > v.pos[b]) ++d;
    }
  }
  return d;
}

std::vector<Vote> adjacent_votes(const Vote& u) {
  std::vector<Vote> out;
  int m = u.m();
  out.reserve(m > 0 ? m - 1 : 0);
  for (int i = 0; i + 1 < m; ++i) {
    std::vector<int> w = u.order;
    std::swap(w[i], w[i + 1]);
    out.emplace_back(std::move(w));
  }
  return out;
}

Vote reverse_vote(const Vote& u) {
  std::vector<int> w(u.order.rbegin(), u.order.rend());
  return Vote(std::move(w));
}

std::optional<std::pair<int, int>> controversial_witness(const Election& e,
                                                         const std::vector<int>& subset) {
  int n = e.n_distinct();
  std::vector<char> in(n, 0);
  for (int i : subset) {
    if (i < 0 || i >= n) throw Error(ErrorCode::MismatchedUniverse, "voter index out of range");
    in[i] = 1;
  }
  int size = 0;
  for (int i = 0; i < n; ++i) size += in[i];
  if (size == 0 || size == n) return std::nullopt;

  for (int a = 1; a <= e.m; ++a) {
    for (int b = 1; b <= e.m; ++b) {
      if (a == b) continue;
      bool ok = true;
      for (int i = 0; i < n && ok; ++i) {
        bool want = in[i];
        if (e.votes[i].prefers(a, b) != want) ok = false;
      }
      if (ok) return std::make_pair(a, b);
    }
  }
  return std::nullopt;
}

}  // namespace euclid2
