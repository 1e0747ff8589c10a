#include <iostream>

#include <CLI11.hpp>

#include "synpatch/pipeline.hpp"

using namespace synpatch;

namespace {

void add_config_flags(CLI::App* cmd, pipeline::RunConfig& cfg, bool grammar) {
  cmd->add_option("-m,--manifest", cfg.manifest, "Project manifest (one source path per line)")->required();
  cmd->add_option("-w,--warnings", cfg.warnings, "Warning file (JSON)")->required();
  if (grammar) cmd->add_option("-g,--grammar", cfg.grammar, "BNF grammar; sources are then split on whitespace");
  cmd->add_option("-o,--out", cfg.out_dir, "Output directory");
  cmd->add_option("-n,--inputs", cfg.inputs, "Input vectors per warning")->capture_default_str();
  cmd->add_option("-s,--seed", cfg.seed, "Random seed")->capture_default_str();
  cmd->add_option("-k,--bound", cfg.bound, "Loop unrolling bound for path checks")->capture_default_str();
  cmd->add_option("--oracle-bound", cfg.oracle_bound, "Brute-force cross-check size limit")->capture_default_str();
  cmd->add_option("-j,--workers", cfg.workers, "Worker threads")->capture_default_str();
  cmd->add_option("--line-tolerance", cfg.line_tolerance, "Accepted failure line distance")->capture_default_str();
  cmd->add_option("--step-budget", cfg.step_budget, "Interpreter steps per run")->capture_default_str();
}

void print_patches(const pipeline::BatchReport& r) {
  for (const auto& rec : r.records) {
    std::cout << rec.warning.id << ":";
    for (const auto& s : rec.stages) {
      if (s.status == pipeline::StageStatus::Failed) std::cout << " " << s.error;
    }
    std::cout << "\n";
    for (const auto& f : rec.files) {
      std::cout << "  " << f.file << ": " << join_lexemes(f.patched) << "\n";
      if (!f.added.empty()) {
        std::cout << "    added:";
        for (const auto& a : f.added) std::cout << " " << a;
        std::cout << "\n";
      }
      for (const auto& l : f.lca_log) std::cout << "    lca " << l << "\n";
      if (f.fallback) std::cout << "    search budget exhausted, kept the whole file\n";
      if (f.oracle_agrees) std::cout << "    brute force " << (*f.oracle_agrees ? "agrees" : "DISAGREES") << "\n";
      if (!f.semantics.empty()) {
        std::cout << "    semantics " << f.semantics;
        if (!f.counterexample.empty()) std::cout << ": " << f.counterexample;
        std::cout << "\n";
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turns static-analysis warning paths into small executable MiniC tests"};
  app.require_subcommand(1);
  pipeline::RunConfig cfg;
  bool json = false;

  auto* patch = app.add_subcommand("patch", "Patch each warning's fragment into a parsable program");
  add_config_flags(patch, cfg, true);
  auto* verify = app.add_subcommand("verify", "Patch and check that control-flow order is preserved");
  add_config_flags(verify, cfg, false);
  auto* validate = app.add_subcommand("validate", "Full pipeline: patch, resolve, test, classify");
  add_config_flags(validate, cfg, false);
  for (auto* c : {patch, verify, validate}) c->add_flag("--json", json, "Print the machine report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    pipeline::BatchReport r;
    if (patch->parsed()) {
      r = pipeline::cmd_patch(cfg);
    } else if (verify->parsed()) {
      r = pipeline::cmd_verify(cfg);
    } else {
      r = pipeline::cmd_validate(cfg);
    }
    if (json) {
      std::cout << pipeline::render_json(r);
    } else if (validate->parsed()) {
      std::cout << pipeline::render_table(pipeline::to_json(r, false));
    } else {
      print_patches(r);
    }
    return r.totals.failed > 0 ? 1 : 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::ConfigError || e.code() == Errc::IoError ? 2 : 1;
  }
}
