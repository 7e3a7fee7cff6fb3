#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "authmine/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitAnalysisError = 2;

struct CommonOptions {
  std::string config_path;
  std::optional<std::string> minconf;
  std::optional<std::string> minsup;
  std::optional<unsigned> workers;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("config", opts.config_path, "run-config file")->required();
  cmd->add_option("--minconf", opts.minconf, "minimum confidence override (e.g. 0.85 or 17/20)");
  cmd->add_option("--minsup", opts.minsup, "minimum support override (e.g. 2/E or 1/4)");
  cmd->add_option("--workers", opts.workers, "worker threads for per-entry-point stages");
  cmd->add_option("--format", opts.format, "report format: json or html");
}

authmine::pipeline::RunConfig load_config(const CommonOptions& opts) {
  auto config = authmine::pipeline::parse_run_config(opts.config_path);
  authmine::pipeline::apply_overrides(config, opts.minconf, opts.minsup, opts.workers,
                                      opts.format);
  return config;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw authmine::pipeline::PipelineError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"authorization-check consistency analyzer"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string checksets_path;

  CLI::App* cmd_callgraph =
      app.add_subcommand("callgraph", "build and dump per-entry-point call graphs");
  add_common(cmd_callgraph, opts);
  CLI::App* cmd_explore =
      app.add_subcommand("explore", "dump strings/fields/methods of candidate conditionals");
  add_common(cmd_explore, opts);
  CLI::App* cmd_checks =
      app.add_subcommand("mine-checks", "mine per-entry-point authorization check sets");
  add_common(cmd_checks, opts);
  CLI::App* cmd_rules =
      app.add_subcommand("mine-rules", "mine association rules from a checksets file");
  add_common(cmd_rules, opts);
  cmd_rules->add_option("--checksets", checksets_path,
                        "checksets.json to mine (default: <out_dir>/checksets.json)");
  CLI::App* cmd_analyze = app.add_subcommand("analyze", "run the full pipeline");
  add_common(cmd_analyze, opts);
  CLI::App* cmd_report = app.add_subcommand("report", "render rule reports from artifacts");
  add_common(cmd_report, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  namespace pl = authmine::pipeline;
  namespace fs = std::filesystem;

  try {
    pl::RunConfig config = load_config(opts);
    fs::path out_dir(config.out_dir);

    if (cmd_callgraph->parsed() || cmd_explore->parsed() || cmd_checks->parsed() ||
        cmd_analyze->parsed()) {
      try {
        pl::AnalysisResult result = pl::analyze(config);
        fs::create_directories(out_dir);
        if (cmd_callgraph->parsed()) {
          write_json_file(out_dir / "callgraphs.json", pl::call_graphs_json(result));
          std::cout << "wrote " << (out_dir / "callgraphs.json").string() << "\n";
        } else if (cmd_explore->parsed()) {
          std::vector<authmine::cpfilter::ConditionalCandidate> candidates;
          for (const auto& analysis : result.per_entry)
            for (const auto& c : analysis.candidates) candidates.push_back(c);
          authmine::report::emit_exploration_dump(result.program, candidates,
                                                  out_dir.string());
          std::cout << "wrote " << (out_dir / "exploration.json").string() << "\n";
        } else if (cmd_checks->parsed()) {
          write_json_file(out_dir / "checksets.json", pl::check_sets_json(result.check_sets));
          std::cout << "wrote " << (out_dir / "checksets.json").string() << "\n";
        } else {
          pl::write_artifacts(config, result);
          std::cout << "entry points: " << result.summary.entry_points
                    << ", with checks: " << result.summary.with_checks
                    << ", with rules: " << result.summary.with_rules << "\n"
                    << "rules: " << result.rules.size() << " -> " << out_dir.string() << "\n";
        }
      } catch (const authmine::ir::ParseError& e) {
        std::cerr << "analysis error: " << e.what() << "\n";
        return kExitAnalysisError;
      }
      return kExitOk;
    }

    if (cmd_rules->parsed()) {
      std::string path = checksets_path.empty() ? (out_dir / "checksets.json").string()
                                                : checksets_path;
      authmine::rulemine::TransactionDB db;
      auto rules = pl::mine_rules_from_file(config, path, db);
      write_json_file(out_dir / "rules.json", pl::rules_json(db, rules));
      std::cout << "wrote " << (out_dir / "rules.json").string() << " (" << rules.size()
                << " rules)\n";
      return kExitOk;
    }

    if (cmd_report->parsed()) {
      std::string checksets = (out_dir / "checksets.json").string();
      auto sets = pl::check_sets_from_json(
          nlohmann::json::parse(pl::read_text_file(checksets)));
      authmine::rulemine::TransactionDB db;
      auto rules = pl::mine_rules_from_file(config, checksets, db);
      authmine::report::emit_rule_reports(db, rules, sets, config.format,
                                          (out_dir / "reports").string());
      std::cout << "wrote " << (out_dir / "reports").string() << "\n";
      return kExitOk;
    }
  } catch (const authmine::pipeline::PipelineError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const authmine::callgraph::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const authmine::matchlang::MatchError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const authmine::cpfilter::FilterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const authmine::ir::ParseError& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitAnalysisError;
  } catch (const std::exception& e) {
    std::cerr << "analysis error: " << e.what() << "\n";
    return kExitAnalysisError;
  }
  return kExitOk;
}
