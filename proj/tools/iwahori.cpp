#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <iomanip>
#include <mutex>

#include <CLI11.hpp>

#include "iwahori/verify.hpp"

namespace {

void print_summary(std::ostream& os, const std::vector<iwahori::RunReport>& runs) {
  for (const auto& r : runs) {
    const auto& c = r.config;
    os << c.label << "  (p, f, e, r) = (" << c.p << ", " << c.f << ", " << c.e << ", " << c.r << ")  depth " << c.depth
       << "  horizon " << c.horizon_or_depth() << (r.within_hypotheses ? "" : "  [outside hypotheses]") << '\n';
    for (const auto& s : r.suites) {
      char time[32];
      std::snprintf(time, sizeof time, "%8.2fs", s.wall_time_s);
      os << "  " << std::left << std::setw(22) << s.id << std::setw(8) << s.status << time;
      if (s.status == "flagged") os << "  outcome " << s.outcome;
      if (!s.note.empty()) os << "  " << s.note;
      os << '\n';
      for (const auto& ch : s.checks)
        if (!ch.pass) os << "      failed: " << ch.name << '\n';
    }
  }
}

int run_verify(const std::string& config_path, const std::vector<std::string>& suites, std::optional<std::uint32_t> depth,
               std::optional<std::uint32_t> horizon, std::string out, const std::string& dump_dir) {
  auto configs = iwahori::load_config(config_path);
  for (auto& c : configs) {
    if (!suites.empty()) c.suites = suites;
    if (depth) c.depth = *depth;
    if (horizon) c.horizon = *horizon;
    if (depth && !horizon && c.horizon && *c.horizon < *depth) c.horizon = *depth;
    c.validate();
    if (out.empty()) out = c.out;
  }
  const bool json_to_stdout = out.empty();
  std::ostream& human = json_to_stdout ? std::cerr : std::cout;

  std::mutex log_mu;
  iwahori::RunOptions opts;
  if (!dump_dir.empty()) opts.dump_dir = dump_dir;
  opts.log = [&](const std::string& msg) {
    std::lock_guard lock(log_mu);
    std::cerr << "running " << msg << std::endl;
  };
  std::vector<std::future<iwahori::RunReport>> jobs;
  for (const auto& c : configs) jobs.push_back(std::async(std::launch::async, [&, c] { return iwahori::run_config(c, opts); }));
  std::vector<iwahori::RunReport> runs;
  for (auto& j : jobs) runs.push_back(j.get());

  const std::string text = iwahori::make_report(runs).dump(2) + "\n";
  if (json_to_stdout) {
    std::cout << text;
  } else {
    std::ofstream os(out);
    if (!os) throw iwahori::ConfigError("cannot write report to " + out);
    os << text;
  }
  print_summary(human, runs);
  const std::size_t failures = iwahori::count_failures(runs);
  human << (failures == 0 ? "all non-flagged suites passed" : std::to_string(failures) + " suite(s) failed") << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hecke kernels and pro-p Iwahori invariants on the Bruhat-Tits tree at finite depth"};
  app.require_subcommand(1);

  auto* verify = app.add_subcommand("verify", "Run verification suites from a config file");
  std::string config_path, out, dump_dir;
  std::vector<std::string> suites;
  std::optional<std::uint32_t> depth, horizon;
  verify->add_option("--config", config_path, "Key-value config file")->required()->check(CLI::ExistingFile);
  verify->add_option("--suite", suites, "Suite id to run (repeatable); overrides the config")
      ->check(CLI::IsMember(iwahori::suite_ids()));
  verify->add_option("--depth", depth, "Ball radius t");
  verify->add_option("--horizon", horizon, "Kernel horizon m >= t");
  verify->add_option("--out", out, "Write the JSON report here instead of stdout");
  verify->add_option("--dump-matrices", dump_dir, "Write operator matrices and kernel bases as CSV");

  auto* suites_cmd = app.add_subcommand("suites", "List suite ids");

  CLI11_PARSE(app, argc, argv);
  if (suites_cmd->parsed()) {
    for (const auto& id : iwahori::suite_ids()) std::cout << id << '\n';
    return 0;
  }
  try {
    return run_verify(config_path, suites, depth, horizon, out, dump_dir);
  } catch (const iwahori::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
}
