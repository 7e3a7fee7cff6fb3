#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "authmine/callgraph.hpp"
#include "authmine/checks.hpp"
#include "authmine/cpfilter.hpp"
#include "authmine/ir.hpp"
#include "authmine/matchlang.hpp"

/// Per-entry-point identification of control predicates and context-query
/// invocations, inter-procedural value expansion, and canonical check sets.
namespace authmine::checkmining {

using cpfilter::ConditionalCandidate;
using cpfilter::StmtRef;

struct MinerConfig {
  std::string security_exception_type = "java.lang.SecurityException";
  /// Classes whose method returns carry no analyzable value (parcel-style
  /// data carriers); their returns expand to ALL.
  std::set<std::string> value_opaque_classes = {"android.os.Bundle"};
};

/// Throw statements in graph nodes whose exception type is the configured
/// security-exception type or a declared subtype of it.
std::set<StmtRef> find_security_throws(const callgraph::CallGraph& graph,
                                       const ir::Program& program, const MinerConfig& config);

/// Conditionals reachable from the entry point from which some target
/// statement is still reachable through at least one branch successor.
/// Call edges follow the graph; returns continue at call sites.
std::set<StmtRef> mark_backward_cps(const callgraph::CallGraph& graph, const ir::Program& program,
                                    const std::set<StmtRef>& targets);

/// All conditionals inside context-query methods of the graph and inside
/// their transitive callees.
std::set<StmtRef> mark_cq_internal_cps(const callgraph::CallGraph& graph,
                                       const ir::Program& program,
                                       const std::set<ir::MethodRef>& context_queries);

/// Conditionals whose condition transitively uses a context-query call's
/// result through assignments, arithmetic, array assignments or parameter
/// passing. Field stores are not tracked.
std::set<StmtRef> forward_defuse_cq_returns(const callgraph::CallGraph& graph,
                                            const ir::Program& program,
                                            const std::set<ir::MethodRef>& context_queries);

/// Same taint walk seeded from one call site only.
std::set<StmtRef> forward_defuse_from_site(const callgraph::CallGraph& graph,
                                           const ir::Program& program, const StmtRef& site);

/// Inter-procedural, flow-insensitive possible-value analysis over one
/// entry-point graph. Memoized per (method, variable); cycles collapse to
/// ALL, entry-point parameters are ALL.
class ValueAnalysis {
 public:
  ValueAnalysis(const ir::Program& program, const callgraph::CallGraph& graph,
                const MinerConfig& config);

  ValueSet local_values(const ir::MethodRef& method, const std::string& local);
  ValueSet operand_values(const ir::MethodRef& method, const ir::Operand& operand);

 private:
  ValueSet compute_local(const ir::MethodRef& method, const std::string& local);
  ValueSet invoke_values(const ir::MethodRef& method, const ir::Statement& invoke);

  const ir::Program& program_;
  const callgraph::CallGraph& graph_;
  const MinerConfig& config_;
  std::map<std::string, ir::MethodRef> node_by_signature_;
  // callee signature -> call sites (caller ref, stmt index)
  std::map<std::string, std::vector<StmtRef>> call_sites_of_;
  std::map<std::pair<std::string, std::string>, ValueSet> memo_;
  std::set<std::pair<std::string, std::string>> in_progress_;
};

/// Pair checks for a conditional statement; unary conditions and pairs
/// removed by canonicalization produce none.
std::vector<AuthorizationCheck> expand_conditional(ValueAnalysis& values,
                                                   const ir::Program& program,
                                                   const StmtRef& conditional);

/// Invocation check for a call site; argument value sets expanded when
/// `expand_args` is set, declared parameter types otherwise.
AuthorizationCheck expand_invocation(ValueAnalysis& values, const ir::Program& program,
                                     const callgraph::CallGraph& graph, const StmtRef& site,
                                     bool expand_args);

/// Is a call site an invocation of a context query (by declared target or
/// any resolved target)?
bool is_context_query_site(const ir::Program& program, const callgraph::CallGraph& graph,
                           const StmtRef& site, const std::set<ir::MethodRef>& context_queries);

struct EntryPointAnalysis {
  checkmining::CheckSet check_set;
  callgraph::CallGraph graph;
  std::vector<ConditionalCandidate> candidates;  // all marked conditionals, pre-filter
  std::set<StmtRef> kept_conditionals;           // post-filter
};

/// Full per-entry-point composition: graph, marking passes, filter, value
/// expansion, context-query invocations, canonical check set.
EntryPointAnalysis mine_entry_point(const ir::Program& program, const ir::MethodRef& entry,
                                    const std::set<ir::MethodRef>& context_queries,
                                    const cpfilter::FilterSpec& filter,
                                    const callgraph::ExcludeList& exclude,
                                    const std::set<ir::MethodRef>& all_entry_points,
                                    const MinerConfig& config);

inline CheckSet mine_entrypoint_checks(const ir::Program& program, const ir::MethodRef& entry,
                                       const std::set<ir::MethodRef>& context_queries,
                                       const cpfilter::FilterSpec& filter,
                                       const callgraph::ExcludeList& exclude,
                                       const std::set<ir::MethodRef>& all_entry_points,
                                       const MinerConfig& config) {
  return mine_entry_point(program, entry, context_queries, filter, exclude, all_entry_points,
                          config)
      .check_set;
}

}  // namespace authmine::checkmining
