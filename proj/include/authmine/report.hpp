#pragma once

#include <map>
#include <string>
#include <vector>

#include "authmine/checks.hpp"
#include "authmine/cpfilter.hpp"
#include "authmine/rulemine.hpp"

#include "json.hpp"

/// Rendering of per-rule reports for triage and of exploration dumps feeding
/// the expression-refinement workflow.
namespace authmine::report {

class ReportError : public std::runtime_error {
 public:
  explicit ReportError(const std::string& message) : std::runtime_error(message) {}
};

struct RuleReport {
  std::string target;
  std::vector<std::string> supporters;
  std::vector<std::string> antecedent;
  std::vector<std::string> consequent;
  std::vector<std::string> extra_checks;  // target-only: A_target \ X
  std::string support;
  std::string confidence;
  int support_count = 0;
  std::map<std::string, std::vector<std::string>> check_locations;  // check -> declaring sites
};

RuleReport build_rule_report(const rulemine::TransactionDB& db,
                             const rulemine::AssociationRule& rule,
                             const std::vector<checkmining::CheckSet>& check_sets);

nlohmann::json rule_report_json(const RuleReport& report);
std::string rule_report_html(const RuleReport& report, std::size_t index);

/// Writes one document per rule plus an index grouped by target. `format`
/// is "json" or "html". Throws ReportError when the output path cannot be
/// written.
void emit_rule_reports(const rulemine::TransactionDB& db,
                       const std::vector<rulemine::AssociationRule>& rules,
                       const std::vector<checkmining::CheckSet>& check_sets,
                       const std::string& format, const std::string& out_dir);

struct DumpEntry {
  std::string value;
  int count = 0;
  std::vector<std::string> sites;  // sample conditional sites, sorted, capped
};

/// The four exploration lists, derived from candidate conditionals before
/// filtering: strings, fields, methods whose returns feed conditionals, and
/// methods containing conditionals.
struct ExplorationDump {
  std::vector<DumpEntry> strings;
  std::vector<DumpEntry> fields;
  std::vector<DumpEntry> methods_in_conditionals;
  std::vector<DumpEntry> methods_containing_conditionals;
};

ExplorationDump build_exploration_dump(
    const ir::Program& program, const std::vector<cpfilter::ConditionalCandidate>& candidates);

nlohmann::json exploration_json(const ExplorationDump& dump);

/// Builds the dump and writes it as exploration.json under out_dir.
void emit_exploration_dump(const ir::Program& program,
                           const std::vector<cpfilter::ConditionalCandidate>& candidates,
                           const std::string& out_dir);

struct RunSummary {
  std::size_t entry_points = 0;
  std::size_t with_checks = 0;
  std::size_t with_rules = 0;
};

RunSummary summarize_run(const std::vector<checkmining::CheckSet>& check_sets,
                         const rulemine::TransactionDB& db,
                         const std::vector<rulemine::AssociationRule>& rules);

nlohmann::json summary_json(const RunSummary& summary);

}  // namespace authmine::report
