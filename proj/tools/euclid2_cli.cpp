#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "euclid2/portfolio.hpp"

namespace {

using namespace euclid2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Malformed, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void apply_overrides(PortfolioConfig& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Malformed, "expected key=value, got: " + kv);
    std::string key = kv.substr(0, eq);
    std::string value = kv.substr(eq + 1);
    if (!apply_config(cfg, key, value))
      throw Error(ErrorCode::Malformed, "unknown config key: " + key);
  }
}

double total_seconds(const Verdict& v) {
  for (auto it = v.timings.rbegin(); it != v.timings.rend(); ++it)
    if (it->stage == "total") return it->seconds;
  return 0.0;
}

int do_recognize(const std::string& file, double budget, const std::string& lanes_csv,
                 const std::string& emit, bool as_json, const std::vector<std::string>& sets) {
  Election e = parse_soc(slurp(file));
  PortfolioConfig cfg;
  cfg.budget_secs = budget;
  cfg.lanes = split_csv(lanes_csv);
  apply_overrides(cfg, sets);
  Verdict v = run_portfolio(e, cfg);

  if (as_json) {
    std::cout << verdict_to_json(e, v, true);
  } else {
    std::cout << "verdict: " << status_name(v.status) << "\n";
    std::cout << "certificate: " << certificate_kind(v.certificate) << "\n";
    if (!v.note.empty()) std::cout << "note: " << v.note << "\n";
    std::cout << std::fixed << std::setprecision(3);
    for (const StageTiming& t : v.timings)
      std::cout << "  " << std::left << std::setw(10) << t.stage << " " << t.seconds << "s\n";
  }
  if (!emit.empty()) {
    if (v.status == Status::Unknown) {
      std::cerr << "no certificate to emit: the verdict is unknown\n";
    } else {
      std::ofstream out(emit, std::ios::binary);
      if (!out) throw Error(ErrorCode::Malformed, "cannot write " + emit);
      out << verdict_to_json(e, v, false);
    }
  }
  return v.status == Status::Unknown ? 2 : 0;
}

int do_verify(const std::string& file, const std::string& cert_path) {
  Election e = parse_soc(slurp(file));
  std::string stored_digest, stored_reduced;
  Verdict v = verdict_from_json(slurp(cert_path), &stored_digest, &stored_reduced);
  if (stored_digest != election_digest(e)) {
    std::cout << "rejected: certificate was issued for a different election\n";
    return 1;
  }
  CheckResult res = verify_certificate(e, v);
  if (!res.accepted) {
    std::cout << "rejected: " << res.reason << "\n";
    return 1;
  }
  if (stored_reduced != election_digest(replay_trace(e, v.trace))) {
    std::cout << "rejected: reduced election digest does not match\n";
    return 1;
  }
  std::cout << "accepted: " << certificate_kind(v.certificate) << " certificate, verdict "
            << status_name(v.status) << "\n";
  return 0;
}

int do_batch(const std::string& dir, double budget, const std::string& summary,
             const std::vector<std::string>& sets) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".soc")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error(ErrorCode::Malformed, "no .soc files in " + dir);

  PortfolioConfig cfg;
  cfg.budget_secs = budget;
  apply_overrides(cfg, sets);

  size_t width = 8;
  for (const auto& f : files) width = std::max(width, f.filename().string().size());
  std::ostringstream table;
  table << std::left << std::setw(static_cast<int>(width) + 2) << "instance"
        << std::setw(15) << "verdict" << std::setw(13) << "certificate"
        << "seconds\n";
  int solved = 0;
  bool failed = false;
  for (const auto& f : files) {
    std::string verdict = "error";
    std::string kind = "-";
    double secs = 0.0;
    try {
      Election e = parse_soc(slurp(f.string()));
      Verdict v = run_portfolio(e, cfg);
      verdict = status_name(v.status);
      kind = certificate_kind(v.certificate);
      secs = total_seconds(v);
      if (v.status != Status::Unknown) ++solved;
    } catch (const std::exception& ex) {
      failed = true;
      std::cerr << f.filename().string() << ": " << ex.what() << "\n";
    }
    table << std::left << std::setw(static_cast<int>(width) + 2) << f.filename().string()
          << std::setw(15) << verdict << std::setw(13) << kind << std::fixed
          << std::setprecision(3) << secs << "\n";
  }
  table << "definitive " << solved << "/" << files.size() << "\n";
  std::cout << table.str();
  if (!summary.empty()) {
    std::ofstream out(summary, std::ios::binary);
    if (!out) throw Error(ErrorCode::Malformed, "cannot write " + summary);
    out << table.str();
  }
  if (failed) return 1;
  return solved == static_cast<int>(files.size()) ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recognition portfolio for planar preference embeddings"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  std::string rec_file, rec_lanes, rec_emit;
  double rec_budget = 60.0;
  bool rec_json = false;
  std::vector<std::string> rec_sets;
  CLI::App* rec = app.add_subcommand("recognize", "Decide one election");
  rec->add_option("file", rec_file, "election in .soc format")->required();
  rec->add_option("--budget", rec_budget, "time budget in seconds");
  rec->add_option("--lanes", rec_lanes,
                  "comma list of find38,hull-quad,closure,embed,hull-full,sweep");
  rec->add_option("--emit-cert", rec_emit, "write the certificate to this path");
  rec->add_flag("--json", rec_json, "print the full report as json");
  rec->add_option("--set", rec_sets, "config override key=value, repeatable")->type_size(1);

  std::string ver_file, ver_cert;
  CLI::App* ver = app.add_subcommand("verify", "Check a certificate against an election");
  ver->add_option("file", ver_file, "election in .soc format")->required();
  ver->add_option("cert", ver_cert, "certificate json")->required();

  std::string bat_dir, bat_summary;
  double bat_budget = 60.0;
  std::vector<std::string> bat_sets;
  CLI::App* bat = app.add_subcommand("batch", "Recognize every .soc election in a directory");
  bat->add_option("dir", bat_dir, "directory to scan")->required();
  bat->add_option("--budget", bat_budget, "per-instance budget in seconds");
  bat->add_option("--summary", bat_summary, "also write the table to this path");
  bat->add_option("--set", bat_sets, "config override key=value, repeatable")->type_size(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (rec->parsed())
      return do_recognize(rec_file, rec_budget, rec_lanes, rec_emit, rec_json, rec_sets);
    if (ver->parsed()) return do_verify(ver_file, ver_cert);
    if (bat->parsed()) return do_batch(bat_dir, bat_budget, bat_summary, bat_sets);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
