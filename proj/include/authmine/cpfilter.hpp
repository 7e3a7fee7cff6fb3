#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "authmine/ir.hpp"
#include "authmine/matchlang.hpp"

/// Control-predicate filter: nested keep/restriction rules deciding whether a
/// candidate conditional is a genuine authorization check, plus loop-
/// conditional rejection.
namespace authmine::cpfilter {

class FilterError : public std::runtime_error {
 public:
  explicit FilterError(const std::string& message) : std::runtime_error(message) {}
};

struct StmtRef {
  ir::MethodRef method;
  int stmt_index = 0;

  std::string render() const { return method.signature() + "@" + std::to_string(stmt_index); }
  auto operator<=>(const StmtRef&) const = default;
};

/// A value contributing to a conditional: a field read, a method return, or
/// a string constant, together with whether some use-chain from it to the
/// condition consists solely of assignments and arithmetic operators.
struct Element {
  enum class Kind { Field, MethodReturn, StringConst };

  Kind kind = Kind::Field;
  ir::FieldRef field;
  ir::MethodRef method;  // MethodReturn: declared target
  StmtRef call_site;     // MethodReturn: the invoke statement
  std::string str_value;
  bool pure_chain = false;
};

/// True when some use-chain from the element to the conditional is free of
/// interposed method calls and array steps.
inline bool is_in_arithmetic_chain(const Element& e) { return e.pure_chain; }

struct ConditionalCandidate {
  StmtRef stmt;
  std::vector<Element> elements;
  bool in_context_query = false;      // conditional sits in a context query or its callees
  bool cq_return_in_chain = false;    // a context-query return feeds the condition arithmetically
};

struct Restriction;

struct RestrictionGroup {
  bool use_union = false;  // false: all restrictions must hold; true: any
  std::vector<Restriction> items;
};

struct Restriction {
  enum class Kind { InArithmeticChain, ValueUsedInMethodCall, Group };

  Kind kind = Kind::InArithmeticChain;
  bool handle_constants = false;  // InArithmeticChain
  // ValueUsedInMethodCall: operand position of the element's call, -1 for
  // the receiver, >= 0 for an argument index
  int position = -1;
  bool matcher_is_string = false;
  matchlang::MatcherPtr method_matcher;
  matchlang::StringMatcherPtr string_matcher;
  std::shared_ptr<RestrictionGroup> nested;  // ValueUsedInMethodCall / Group
};

struct FilterNode;
using FilterNodePtr = std::shared_ptr<const FilterNode>;

struct FilterNode {
  enum class Kind {
    And,
    Or,
    Not,
    KeepFieldValueUse,
    KeepMethodReturnValueUse,
    KeepStringUse,
    KeepMethodContainerUse,
  };

  Kind kind = Kind::And;
  std::vector<FilterNodePtr> children;          // combinators
  matchlang::MatcherPtr matcher;                // member-matching keep rules
  matchlang::StringMatcherPtr string_matcher;   // KeepStringUse
  RestrictionGroup restrictions;
};

/// Top-level rules are or-ed: any rule keeping a candidate suffices. An
/// empty document accepts nothing.
struct FilterSpec {
  std::vector<FilterNodePtr> rules;
};

/// Parses the XML filter document (elements KeepFieldValueUse,
/// KeepMethodReturnValueUse, KeepStringUse, KeepMethodContainerUse,
/// Restrictions, IsInArithmeticChain, IsValueUsedInMethodCall, Matcher, and
/// And/Or/Not combinators under a Filter root).
FilterSpec parse_filter(std::string_view document);

/// Conditionals lying on a control-flow cycle (loop headers and latches
/// included). Indices into the method body.
std::set<int> detect_loop_conditionals(const ir::ControlFlowGraph& cfg,
                                       const ir::MethodDecl& method);

/// Loop conditionals are always rejected; conditionals inside context
/// queries or arithmetically using a context-query return are always kept;
/// otherwise the rule tree decides.
bool evaluate_filter(const FilterSpec& spec, const ConditionalCandidate& candidate,
                     const std::set<StmtRef>& loop_conditionals, const ir::Program& program);

}  // namespace authmine::cpfilter
