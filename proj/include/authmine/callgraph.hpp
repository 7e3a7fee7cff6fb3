#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "authmine/ir.hpp"

/// Entry-point detection, exclude-list procedures and per-entry-point CHA
/// call graphs with other entry points as cut points.
namespace authmine::callgraph {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// Call-graph exclusions. Patterns in class_path are exact names, or
/// prefixes when ending in `.*` or `$*` (`$*` also matches the outer class
/// itself). The overrides list exempts individual signatures from every
/// procedure.
struct ExcludeList {
  std::vector<std::string> class_path;
  std::vector<std::string> interface;
  std::vector<std::string> interface_all;
  std::vector<std::string> superclass;
  std::vector<std::string> superclass_all;
  std::vector<std::string> method_signature;  // full signatures a.b.C.m(t1,t2)
  std::vector<std::string> overrides;         // exempted signatures

  bool empty() const {
    return class_path.empty() && interface.empty() && interface_all.empty() &&
           superclass.empty() && superclass_all.empty() && method_signature.empty();
  }
};

/// Line-oriented `<procedure>: <pattern>` file with procedures class_path,
/// interface, interface_all, superclass, superclass_all, method_signature
/// and override. Throws ConfigError on unknown procedures or empty patterns.
ExcludeList parse_exclude_list(std::string_view text);

bool is_excluded(const ExcludeList& x, const ir::MethodRef& m, const ir::Program& program);

struct EntryPointConfig {
  std::string explicit_attribute = "entrypoint";
  std::vector<std::string> stub_bases;
  std::string dispatch_method = "onTransact";
};

/// Union of explicitly attributed methods and, for every class that
/// transitively extends a stub base and declares the dispatch method, the
/// concrete methods the dispatch body invokes on `this` plus
/// matching-signature overrides in subclasses. Sorted.
std::vector<ir::MethodRef> detect_entry_points(const ir::Program& program,
                                               const EntryPointConfig& cfg);

enum class CutReason { Excluded, OtherEntrypoint, External };

std::string cut_reason_name(CutReason r);

struct CallSite {
  std::string method_signature;  // containing method
  int stmt_index = 0;

  std::string render() const { return method_signature + "@" + std::to_string(stmt_index); }
  auto operator<=>(const CallSite&) const = default;
};

/// Per-entry-point call graph. Nodes are expanded methods (bodies analyzed);
/// every edge target is either a node or a recorded cut. Iteration order of
/// all containers is sorted, so serialization is deterministic.
struct CallGraph {
  ir::MethodRef root;
  std::set<ir::MethodRef> nodes;
  std::map<CallSite, std::set<ir::MethodRef>> edges;
  std::map<ir::MethodRef, CutReason> cut_reasons;

  bool is_node(const ir::MethodRef& m) const { return nodes.count(m) > 0; }
  bool is_cut(const ir::MethodRef& m) const { return cut_reasons.count(m) > 0; }

  /// Targets of a site that are expanded nodes (cuts filtered out).
  std::vector<ir::MethodRef> expanded_targets(const CallSite& site) const;
};

/// Worklist CHA expansion from the root. Static/special invokes resolve to
/// the single declared target (searching up the superclass chain); virtual
/// invokes resolve to every concrete implementation declared in subtypes of
/// the call's declared class plus the nearest inherited implementation.
/// Excluded targets, bodiless targets and entry points (including the root
/// itself) are recorded as cuts and not expanded. Unresolvable targets
/// become external cuts.
CallGraph build_cha_callgraph(const ir::Program& program, const ir::MethodRef& root,
                              const ExcludeList& exclude,
                              const std::set<ir::MethodRef>& all_entry_points);

/// All targets a call site can dispatch to, cuts included; used by the
/// graph builder and by value expansion.
std::vector<ir::MethodRef> resolve_call_targets(const ir::Program& program,
                                                const ir::Statement& invoke);

/// The invoke's declared target, normalized to the nearest declaring class
/// when resolvable; otherwise the syntactic reference with `?` parameter
/// placeholders.
ir::MethodRef declared_target(const ir::Program& program, const ir::Statement& invoke);

}  // namespace authmine::callgraph
