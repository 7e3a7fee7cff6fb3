#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "authmine/callgraph.hpp"
#include "authmine/checkmining.hpp"
#include "authmine/ir.hpp"
#include "authmine/rulemine.hpp"

// Independent test oracles and seeded random generators. Everything here is
// deliberately brute force and must stay decoupled from the implementation
// paths it checks.
namespace oracles {

/// Deterministic xorshift generator so property tests are reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}

  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }

  int below(int n) { return n <= 0 ? 0 : int(next() % std::uint64_t(n)); }
  bool chance(int percent) { return below(100) < percent; }

 private:
  std::uint64_t state_;
};

// --- subtype closure ---------------------------------------------------------

/// Warshall-style reflexive-transitive closure over declared subtype edges.
std::set<std::string> closure_subtypes(const authmine::ir::Program& program,
                                       const std::string& type_name);

/// Random class hierarchy (classes + interfaces, bounded depth).
authmine::ir::Program random_hierarchy(Rng& rng, int classes);

// --- CHA dispatch -------------------------------------------------------------

/// For every concrete receiver subtype of the call's declared class, the
/// method actually dispatched (nearest declaration walking up). The set of
/// those methods is what any sound CHA resolution must contain.
std::set<authmine::ir::MethodRef> dispatch_targets(const authmine::ir::Program& program,
                                                   const authmine::ir::Statement& invoke);

/// Random program with a class hierarchy, method bodies and virtual calls.
authmine::ir::Program random_call_program(Rng& rng, int max_methods);

// --- interprocedural path enumeration ------------------------------------------

/// Conditionals lying on some interprocedurally valid path (explicit call
/// stack, matched call/return) from the entry point that later reaches a
/// target statement. Bounded enumeration for small fixtures.
std::set<authmine::checkmining::StmtRef> path_enumeration_marked(
    const authmine::callgraph::CallGraph& graph, const authmine::ir::Program& program,
    const std::set<authmine::checkmining::StmtRef>& targets);

// --- loop detection -------------------------------------------------------------

/// Per-conditional DFS: is there a successor path returning to it?
std::set<int> dfs_loop_conditionals(const authmine::ir::ControlFlowGraph& cfg,
                                    const authmine::ir::MethodDecl& method);

// --- itemset mining --------------------------------------------------------------

/// Random transaction database over at most `max_items` items.
authmine::rulemine::TransactionDB random_db(Rng& rng, int max_items, int max_transactions);

}  // namespace oracles
