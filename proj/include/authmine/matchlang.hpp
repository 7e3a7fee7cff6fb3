#pragma once

#include <memory>
#include <regex>
#include <set>
#include <string>
#include <vector>

#include "authmine/ir.hpp"

/// S-expression matcher language over method/field references: string and
/// regex operations on the package, class and name dimensions, word-split
/// regex matching, and and/or/not combinators.
namespace authmine::matchlang {

class MatchError : public std::runtime_error {
 public:
  explicit MatchError(const std::string& message) : std::runtime_error(message) {}
};

struct MatcherExpr;
using MatcherPtr = std::shared_ptr<const MatcherExpr>;

struct MatcherExpr {
  enum class Op {
    And,
    Or,
    Not,
    StartsWith,
    EndsWith,
    Contains,
    Equals,
    Regex,
    RegexNameWords,
    RegexClassWords,
  };
  enum class Dim { Package, Class, Name, None };

  Op op = Op::And;
  Dim dim = Dim::None;
  std::vector<MatcherPtr> children;  // And/Or/Not
  std::string text;                  // string argument or regex source
  std::regex regex;                  // compiled, for regex ops
  int class_index = -1;              // RegexClassWords: 0 = innermost, -1 = any

  /// Canonical s-expression rendering (equal-* spellings normalized).
  std::string render() const;
};

/// Parses one matcher expression. Accepts both `equals-*` and `equal-*`
/// spellings. Regex literals are backquote-delimited. Throws MatchError on
/// unbalanced parens, unknown operations, bad regexes or wrong arity.
MatcherPtr parse_matcher(std::string_view text);

/// Parses a context-query expression file: one s-expression per top-level
/// form, `;` line comments.
std::vector<MatcherPtr> parse_matcher_file(std::string_view text);

/// Splits an identifier at lower-to-upper camel transitions and underscores,
/// lowercases, joins with single spaces. Digits stay attached to the
/// preceding word.
std::string split_words(const std::string& identifier);

struct MemberName {
  std::string package;
  std::string class_name;  // simple name, may contain `$`
  std::string member;

  static MemberName of(const ir::MethodRef& m);
  static MemberName of(const ir::FieldRef& f);
};

bool matches(const MatcherExpr& expr, const MemberName& member);
bool matches(const MatcherExpr& expr, const ir::MethodRef& method);
bool matches(const MatcherExpr& expr, const ir::FieldRef& field);

/// Every declared method with a body matched by any expression, unioned with
/// the explicit seed list.
std::set<ir::MethodRef> identify_context_queries(const ir::Program& program,
                                                 const std::vector<MatcherPtr>& exprs,
                                                 const std::vector<ir::MethodRef>& seeds);

/// Seed file: one full method signature per line (`a.b.C.name(t1,t2)`),
/// `#` comments.
std::vector<ir::MethodRef> parse_seed_file(std::string_view text);

/// Matcher over a plain string value: same combinators with the dimension-
/// free operations starts-with / ends-with / contains / equals / regex.
struct StringMatcher;
using StringMatcherPtr = std::shared_ptr<const StringMatcher>;

struct StringMatcher {
  enum class Op { And, Or, Not, StartsWith, EndsWith, Contains, Equals, Regex };

  Op op = Op::And;
  std::vector<StringMatcherPtr> children;
  std::string text;
  std::regex regex;
};

StringMatcherPtr parse_string_matcher(std::string_view text);
bool matches(const StringMatcher& expr, const std::string& value);

}  // namespace authmine::matchlang
