// Command-line harness around the library: execute configured experiments,
// audit logged traces, and aggregate run directories into regret-curve CSVs.
// Diagnostic verbosity is controlled by the CFB_LOG environment variable.

#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfb/audit/audit.hpp"
#include "cfb/harness/config.hpp"
#include "cfb/harness/runner.hpp"
#include "cfb/harness/trace.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            int seeds, int parallel) {
  const cfb::ExperimentConfig cfg = cfb::load_config(config_path);
  const cfb::RunSummary summary = cfb::run(cfg, out_dir, parallel, seeds);

  std::cout << summary.runs.size() << " run(s) written to " << out_dir << "\n";
  if (!std::isnan(summary.bound_at_horizon)) {
    std::cout << summary.within_bound << "/" << summary.runs.size()
              << " run(s) within the " << cfg.bound_kind << " bound "
              << summary.bound_at_horizon << " at T=" << cfg.horizon << "\n";
  }
  if (cfg.audit.enabled) {
    std::cout << (summary.all_audits_pass ? "all audits passed"
                                          : "AUDIT FAILURES (see bound_report.json)")
              << "\n";
  }
  return summary.all_audits_pass ? 0 : 1;
}

int cmd_audit(const std::string& trace_path,
              const std::vector<std::string>& checks) {
  const cfb::ParsedTrace trace = cfb::parse_trace(trace_path);
  const cfb::AuditReport report = cfb::audit_trace(trace, checks);
  if (report.outcomes.empty()) {
    std::cout << "no checks apply to agent '" << trace.meta.agent << "'\n";
    return 0;
  }
  for (const cfb::AuditOutcome& o : report.outcomes) {
    std::cout << o.check << ": " << (o.pass ? "pass" : "FAIL");
    if (!o.applicable) std::cout << " (not applicable)";
    std::cout << " - " << o.detail << "\n";
  }
  return report.all_pass() ? 0 : 1;
}

int cmd_report(const std::string& runs_dir, const std::string& out_csv) {
  cfb::report(runs_dir, out_csv);
  std::cout << "wrote " << out_csv << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contextual-bandit experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int seeds = 0;
  int parallel = 1;
  CLI::App* run = app.add_subcommand("run", "execute a configured experiment");
  run->add_option("--config", config_path, "experiment configuration (JSON)")
      ->required();
  run->add_option("--out", out_dir, "output directory for traces and reports")
      ->required();
  run->add_option("--seeds", seeds, "override the replication count");
  run->add_option("--parallel", parallel, "worker threads across seeds");

  std::string trace_path;
  std::vector<std::string> checks;
  CLI::App* audit = app.add_subcommand("audit", "replay checks on a trace file");
  audit->add_option("--trace", trace_path, "trace file (JSONL)")->required();
  audit
      ->add_option("--checks", checks,
                   "comma-separated subset of lemma2,elliptical,replay,prop1")
      ->delimiter(',');

  std::string runs_dir;
  std::string report_csv;
  CLI::App* report = app.add_subcommand("report", "aggregate a run directory");
  report->add_option("--runs", runs_dir, "directory produced by `run`")
      ->required();
  report->add_option("--out", report_csv, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seeds, parallel);
    if (audit->parsed()) return cmd_audit(trace_path, checks);
    if (report->parsed()) return cmd_report(runs_dir, report_csv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
