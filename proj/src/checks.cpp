#include "authmine/checks.hpp"

#include <algorithm>
#include <sstream>

namespace authmine::checkmining {

MiningValue MiningValue::all() {
  MiningValue v;
  v.kind = Kind::All;
  return v;
}

MiningValue MiningValue::null() {
  MiningValue v;
  v.kind = Kind::Null;
  return v;
}

MiningValue MiningValue::of_constant(const ir::Constant& c) {
  MiningValue v;
  switch (c.kind) {
    case ir::Constant::Kind::Int:
      v.kind = Kind::Int;
      v.int_value = c.int_value;
      break;
    case ir::Constant::Kind::Bool:
      v.kind = Kind::Bool;
      v.bool_value = c.bool_value;
      break;
    case ir::Constant::Kind::Str:
      v.kind = Kind::Str;
      v.str_value = c.str_value;
      break;
    case ir::Constant::Kind::Null: v.kind = Kind::Null; break;
  }
  return v;
}

MiningValue MiningValue::of_field(ir::FieldRef f) {
  MiningValue v;
  v.kind = Kind::Field;
  v.field = std::move(f);
  return v;
}

MiningValue MiningValue::of_array(MiningValue base) {
  MiningValue v;
  v.kind = Kind::Array;
  v.array_base = std::make_shared<const MiningValue>(std::move(base));
  return v;
}

const std::string& MiningValue::canon() const {
  if (!canon_.empty()) return canon_;
  std::ostringstream out;
  switch (kind) {
    case Kind::Int: out << int_value; break;
    case Kind::Bool: out << (bool_value ? "true" : "false"); break;
    case Kind::Str: out << ir::Constant::of_str(str_value).render(); break;
    case Kind::Null: out << "NULL"; break;
    case Kind::All: out << "ALL"; break;
    case Kind::Field: out << field.qualified(); break;
    case Kind::Method: {
      out << method.qualified() << "(";
      for (std::size_t i = 0; i < method_args.size(); ++i) {
        if (i) out << ", ";
        out << method_args[i]->canon();
      }
      out << ")";
      break;
    }
    case Kind::Array: out << array_base->canon() << "[]"; break;
  }
  canon_ = out.str();
  return canon_;
}

void ValueSet::add(MiningValue v) {
  values_.push_back(std::move(v));
  normalize();
}

void ValueSet::merge(const ValueSet& other) {
  for (const auto& v : other.values_) values_.push_back(v);
  normalize();
}

bool ValueSet::contains_all() const {
  for (const auto& v : values_)
    if (v.kind == MiningValue::Kind::All) return true;
  return false;
}

bool ValueSet::all_constants() const {
  if (values_.empty()) return false;
  for (const auto& v : values_)
    if (!v.is_constant()) return false;
  return true;
}

void ValueSet::normalize() {
  if (contains_all()) {
    values_.clear();
    values_.push_back(MiningValue::all());
    return;
  }
  std::sort(values_.begin(), values_.end(),
            [](const MiningValue& a, const MiningValue& b) { return a.canon() < b.canon(); });
  values_.erase(std::unique(values_.begin(), values_.end(),
                            [](const MiningValue& a, const MiningValue& b) {
                              return a.canon() == b.canon();
                            }),
                values_.end());
  if (values_.size() > 1) {
    values_.erase(std::remove_if(values_.begin(), values_.end(),
                                 [](const MiningValue& v) {
                                   return v.kind == MiningValue::Kind::Null;
                                 }),
                  values_.end());
  }
}

std::string ValueSet::canon() const {
  std::string out = "{";
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) out += ",";
    out += values_[i].canon();
  }
  return out + "}";
}

std::string AuthorizationCheck::canon() const {
  if (kind == Kind::Invocation) {
    std::string out = "invoke " + target.qualified() + "(";
    if (args_expanded) {
      for (std::size_t i = 0; i < arg_sets.size(); ++i) {
        if (i) out += ", ";
        out += arg_sets[i].canon();
      }
    } else {
      for (std::size_t i = 0; i < target.param_types.size(); ++i) {
        if (i) out += ", ";
        out += target.param_types[i];
      }
    }
    return out + ")";
  }
  return lhs.canon() + " == " + rhs.canon();
}

AuthorizationCheck make_invocation_check(const ir::MethodRef& target, bool expanded,
                                         std::vector<ValueSet> arg_sets) {
  AuthorizationCheck check;
  check.kind = AuthorizationCheck::Kind::Invocation;
  check.target = target;
  check.args_expanded = expanded;
  if (expanded) check.arg_sets = std::move(arg_sets);
  return check;
}

namespace {

bool is_equals_call_set(const ValueSet& s) {
  if (s.empty()) return false;
  for (const auto& v : s.values()) {
    if (v.kind != MiningValue::Kind::Method) return false;
    if (v.method.method_name != "equals" || v.method_args.size() != 1) return false;
    if (!v.method_receiver || v.method_receiver->empty()) return false;
  }
  return true;
}

// pulls the receiver/argument sets out of a set of equals-call values
std::pair<ValueSet, ValueSet> rebuild_equals_pair(const ValueSet& s) {
  ValueSet receivers;
  ValueSet arguments;
  for (const auto& v : s.values()) {
    receivers.merge(*v.method_receiver);
    arguments.merge(*v.method_args[0]);
  }
  return {receivers, arguments};
}

}  // namespace

bool make_pair_check(const ValueSet& lhs, const ValueSet& rhs, AuthorizationCheck& out) {
  ValueSet a = lhs;
  ValueSet b = rhs;

  // equals-call reconstruction: replace the call/constant pair with the
  // receiver and argument of the equals invocation
  if (is_equals_call_set(a) && b.all_constants()) {
    auto [recv, arg] = rebuild_equals_pair(a);
    a = recv;
    b = arg;
  } else if (is_equals_call_set(b) && a.all_constants()) {
    auto [recv, arg] = rebuild_equals_pair(b);
    a = recv;
    b = arg;
  }

  if (a.empty() || b.empty()) return false;
  if (a.is_all() || b.is_all()) return false;
  if (a.is_null_only() || b.is_null_only()) return false;
  if (a.all_constants() && b.all_constants()) return false;
  if (a.canon() == b.canon()) return false;

  out.kind = AuthorizationCheck::Kind::Pair;
  if (a.canon() <= b.canon()) {
    out.lhs = std::move(a);
    out.rhs = std::move(b);
  } else {
    out.lhs = std::move(b);
    out.rhs = std::move(a);
  }
  return true;
}

void CheckSet::add(const AuthorizationCheck& check, CheckOrigin origin) {
  checks[check.canon()].insert(std::move(origin));
}

std::vector<std::string> CheckSet::check_strings() const {
  std::vector<std::string> out;
  out.reserve(checks.size());
  for (const auto& [canon, _] : checks) out.push_back(canon);
  return out;
}

}  // namespace authmine::checkmining
