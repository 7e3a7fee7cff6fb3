#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "authmine/callgraph.hpp"
#include "authmine/checkmining.hpp"
#include "authmine/cpfilter.hpp"
#include "authmine/matchlang.hpp"
#include "authmine/report.hpp"
#include "authmine/rulemine.hpp"

#include "json.hpp"

/// End-to-end orchestration: run configuration, stage execution over a
/// bounded worker pool, and deterministic artifact serialization.
namespace authmine::pipeline {

class PipelineError : public std::runtime_error {
 public:
  explicit PipelineError(const std::string& message) : std::runtime_error(message) {}
};

struct RunConfig {
  std::vector<std::string> ir_paths;
  std::string exclude_list;
  std::string cq_exprs;
  std::string cq_seeds;
  std::string cp_filter;
  std::string security_exception_type = "java.lang.SecurityException";

  rulemine::Rational minconf{85, 100};
  // minsup defaults to the dynamic 2/|E| form
  bool minsup_per_entry = true;
  long long minsup_numerator = 2;
  rulemine::Rational minsup_fixed{1, 1};

  unsigned workers = 0;  // 0: hardware concurrency
  std::string out_dir = "out";
  std::string format = "json";

  callgraph::EntryPointConfig entry_points;
  std::set<std::string> value_opaque_classes = {"android.os.Bundle"};

  /// Effective minsup for a database of `total` transactions.
  rulemine::Rational minsup_for(std::size_t total) const;
};

/// Key-value run-config file (`key: value`, `#` comments). Relative paths
/// resolve against the config file's directory. Throws PipelineError with
/// file/line context.
RunConfig parse_run_config(const std::string& path);

/// Applies `--minconf`, `--minsup`, `--workers`, `--format` style overrides.
void apply_overrides(RunConfig& config, const std::optional<std::string>& minconf,
                     const std::optional<std::string>& minsup,
                     const std::optional<unsigned>& workers,
                     const std::optional<std::string>& format);

/// Runs `fn(0..count)` on a pool of `workers` threads. Results must be
/// written to per-index slots; the call returns when all indices finished.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

struct LoadedInputs {
  ir::Program program;
  callgraph::ExcludeList exclude;
  std::vector<matchlang::MatcherPtr> cq_exprs;
  std::vector<ir::MethodRef> cq_seeds;
  cpfilter::FilterSpec filter;
  checkmining::MinerConfig miner;
  std::vector<ir::MethodRef> entry_points;
  std::set<ir::MethodRef> context_queries;
};

LoadedInputs load_inputs(const RunConfig& config);

struct AnalysisResult {
  ir::Program program;
  std::vector<ir::MethodRef> entry_points;
  std::vector<checkmining::EntryPointAnalysis> per_entry;  // same order as entry_points
  std::vector<checkmining::CheckSet> check_sets;
  rulemine::TransactionDB db;
  std::vector<rulemine::AssociationRule> rules;
  report::RunSummary summary;
};

/// Full pipeline over the worker pool; artifacts are deterministic for any
/// worker count.
AnalysisResult analyze(const RunConfig& config);

// --- per-stage serialization -------------------------------------------------

nlohmann::json call_graphs_json(const AnalysisResult& result);
nlohmann::json check_sets_json(const std::vector<checkmining::CheckSet>& check_sets);
std::vector<checkmining::CheckSet> check_sets_from_json(const nlohmann::json& j);
nlohmann::json rules_json(const rulemine::TransactionDB& db,
                          const std::vector<rulemine::AssociationRule>& rules);

/// Writes callgraphs.json, exploration.json, checksets.json, rules.json,
/// summary.json and the reports directory under config.out_dir.
void write_artifacts(const RunConfig& config, const AnalysisResult& result);

/// Rule mining from a previously written checksets.json (no IR needed).
std::vector<rulemine::AssociationRule> mine_rules_from_file(const RunConfig& config,
                                                            const std::string& checksets_path,
                                                            rulemine::TransactionDB& db_out);

std::string read_text_file(const std::string& path);

}  // namespace authmine::pipeline
