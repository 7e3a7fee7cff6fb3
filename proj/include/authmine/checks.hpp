#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "authmine/callgraph.hpp"
#include "authmine/ir.hpp"

/// Canonical authorization-check representation: string-encoded context-query
/// invocations with expanded argument value sets, and control-predicate value
/// pairs.
namespace authmine::checkmining {

struct MiningValue;
class ValueSet;

/// A possible runtime value of a variable: a constant, the ALL/NULL
/// sentinels, or a reference to a field, method return or array element.
struct MiningValue {
  enum class Kind { Int, Bool, Str, Null, All, Field, Method, Array };

  Kind kind = Kind::All;
  long long int_value = 0;
  bool bool_value = false;
  std::string str_value;
  ir::FieldRef field;

  // Method: declared target plus expanded receiver/argument sets. The
  // receiver is kept for equals-pair reconstruction but is not part of the
  // canonical string, so the same call through different receivers encodes
  // identically.
  ir::MethodRef method;
  std::vector<std::shared_ptr<const ValueSet>> method_args;
  std::shared_ptr<const ValueSet> method_receiver;

  std::shared_ptr<const MiningValue> array_base;

  static MiningValue all();
  static MiningValue null();
  static MiningValue of_constant(const ir::Constant& c);
  static MiningValue of_field(ir::FieldRef f);
  static MiningValue of_array(MiningValue base);

  bool is_constant() const { return kind == Kind::Int || kind == Kind::Bool || kind == Kind::Str; }

  const std::string& canon() const;

 private:
  mutable std::string canon_;
};

/// Sorted-unique set of values under the canonicalization rules: a set
/// containing ALL collapses to {ALL}; NULL is dropped when other values
/// exist.
class ValueSet {
 public:
  ValueSet() = default;

  void add(MiningValue v);
  void merge(const ValueSet& other);

  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }
  const std::vector<MiningValue>& values() const { return values_; }

  bool is_all() const { return values_.size() == 1 && values_[0].kind == MiningValue::Kind::All; }
  bool is_null_only() const {
    return values_.size() == 1 && values_[0].kind == MiningValue::Kind::Null;
  }
  bool contains_all() const;
  bool all_constants() const;

  /// `{v1,v2,...}` with members sorted by canonical string.
  std::string canon() const;

 private:
  void normalize();
  std::vector<MiningValue> values_;  // sorted by canon, unique
};

struct AuthorizationCheck {
  enum class Kind { Invocation, Pair };

  Kind kind = Kind::Invocation;

  // Invocation: declared target; args carry expanded value sets when the
  // call's return value is unused, otherwise the declared parameter types.
  ir::MethodRef target;
  bool args_expanded = false;
  std::vector<ValueSet> arg_sets;

  // Pair: two operand value sets, order normalized by canonical string.
  ValueSet lhs;
  ValueSet rhs;

  std::string canon() const;
};

/// Builds an invocation check. Collapses per the value-set rules.
AuthorizationCheck make_invocation_check(const ir::MethodRef& target, bool expanded,
                                         std::vector<ValueSet> arg_sets);

/// Builds a pair check from two operand sets, applying equals-pair
/// reconstruction and the pair-removal rules. Returns false when the pair is
/// removed by canonicalization.
bool make_pair_check(const ValueSet& lhs, const ValueSet& rhs, AuthorizationCheck& out);

struct CheckOrigin {
  std::string method_signature;
  int stmt_index = 0;

  std::string render() const { return method_signature + "@" + std::to_string(stmt_index); }
  auto operator<=>(const CheckOrigin&) const = default;
};

/// An entry point's set of authorization checks, keyed by canonical string,
/// with per-check provenance.
struct CheckSet {
  ir::MethodRef entry_point;
  std::map<std::string, std::set<CheckOrigin>> checks;  // canon -> origins

  void add(const AuthorizationCheck& check, CheckOrigin origin);
  std::vector<std::string> check_strings() const;
  bool empty() const { return checks.empty(); }
};

}  // namespace authmine::checkmining
