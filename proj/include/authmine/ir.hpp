#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

/// Textual three-address IR for service-style programs: classes, fields,
/// methods and statement bodies, plus per-method control-flow graphs and
/// the derived type hierarchy.
namespace authmine::ir {

struct SourcePos {
  int line = 0;
  int col = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string file, SourcePos pos, const std::string& message);

  const std::string& file() const { return file_; }
  SourcePos pos() const { return pos_; }

 private:
  std::string file_;
  SourcePos pos_;
};

/// Reference to a field by qualified class name and member name. Inner
/// classes use `$` separators in the class name (a.b.Outer$Inner).
struct FieldRef {
  std::string class_name;
  std::string field_name;

  std::string qualified() const { return class_name + "." + field_name; }
  auto operator<=>(const FieldRef&) const = default;
};

/// Reference to a method. `param_types` may be empty for syntactic
/// references whose declaration was never found.
struct MethodRef {
  std::string class_name;
  std::string method_name;
  std::vector<std::string> param_types;
  std::string return_type;

  std::string package() const;
  std::string simple_class() const;
  std::string qualified() const { return class_name + "." + method_name; }
  std::string signature() const;

  auto operator<=>(const MethodRef&) const = default;
};

struct Constant {
  enum class Kind { Int, Bool, Str, Null };

  Kind kind = Kind::Null;
  long long int_value = 0;
  bool bool_value = false;
  std::string str_value;

  static Constant of_int(long long v);
  static Constant of_bool(bool v);
  static Constant of_str(std::string v);
  static Constant null();

  std::string render() const;
  auto operator<=>(const Constant&) const = default;
};

/// Statement operand: a local variable or an immediate constant.
struct Operand {
  bool is_const = false;
  Constant constant;
  std::string local;

  static Operand of_local(std::string name);
  static Operand of_const(Constant c);

  std::string render() const;
};

struct Expr {
  enum class Kind {
    Const,
    Local,
    FieldRead,
    ArrayRead,
    BinOp,
    UnOp,
    Cast,
    New,
    LengthOf,
    InstanceOf,
  };

  Kind kind = Kind::Const;
  Constant constant;        // Const
  std::string local;        // Local copy source / ArrayRead base
  FieldRef field;           // FieldRead
  Operand index;            // ArrayRead
  std::string op;           // BinOp / UnOp operator spelling
  Operand lhs;              // BinOp lhs; UnOp/Cast/LengthOf/InstanceOf operand
  Operand rhs;              // BinOp rhs
  std::string type_name;    // Cast / New / InstanceOf
};

enum class InvokeKind { Static, Virtual, Special };

struct SwitchCase {
  Constant value;
  std::string label;
};

/// Condition of an `if`: binary comparison, or unary negation of one operand.
struct CondExpr {
  bool negated = false;
  Operand lhs;
  std::string cmp_op;  // ==, !=, <, <=, >, >= (empty when negated)
  Operand rhs;
};

struct Statement {
  enum class Kind {
    Assign,
    FieldWrite,
    ArrayWrite,
    Invoke,
    If,
    Switch,
    Goto,
    Label,
    Throw,
    Return,
  };

  Kind kind = Kind::Return;
  SourcePos pos;

  // Assign / ArrayWrite target local
  std::string target;
  Expr expr;  // Assign

  // FieldWrite
  FieldRef field;
  Operand value;  // FieldWrite / ArrayWrite stored value
  Operand index;  // ArrayWrite

  // Invoke
  std::optional<std::string> result;
  InvokeKind invoke_kind = InvokeKind::Static;
  std::string callee_class;
  std::string callee_name;
  std::optional<std::string> receiver;
  std::vector<Operand> args;

  // If / Goto
  CondExpr cond;
  std::string jump_target;

  // Label
  std::string label_name;

  // Switch
  std::string switch_local;
  std::vector<SwitchCase> cases;
  std::string default_label;

  // Throw
  std::string exception_type;
  std::optional<std::string> throw_arg;

  // Return
  std::optional<Operand> return_value;

  bool is_conditional() const { return kind == Kind::If || kind == Kind::Switch; }
};

struct Param {
  std::string name;
  std::string type;
};

struct FieldDecl {
  std::string name;
  std::string type;
};

struct MethodDecl {
  std::string name;
  std::vector<Param> params;
  std::string return_type = "void";
  std::set<std::string> attributes;
  std::optional<std::vector<Statement>> body;
  SourcePos pos;

  bool has_attribute(const std::string& attr) const { return attributes.count(attr) > 0; }
  bool has_body() const { return body.has_value(); }
};

struct ClassDecl {
  std::string name;  // fully qualified
  SourcePos pos;
  std::string source_file;
  bool is_interface = false;
  std::optional<std::string> superclass;
  std::vector<std::string> interfaces;
  std::vector<FieldDecl> fields;
  std::vector<MethodDecl> methods;
  bool external = false;

  const MethodDecl* find_method(const std::string& method_name, std::size_t nparams) const;
  const FieldDecl* find_field(const std::string& field_name) const;
};

/// A parsed, validated program. Immutable after parsing; safe to share
/// across threads.
struct Program {
  std::vector<ClassDecl> classes;

  // Derived at parse time: direct subtype edges (super/interface -> subtypes).
  std::map<std::string, std::vector<std::string>> direct_subtypes;

  const ClassDecl* find_class(const std::string& name) const;
  const MethodDecl* find_method(const std::string& class_name, const std::string& method_name,
                                std::size_t nparams) const;

  /// Walks the superclass chain starting at `class_name` (inclusive) and
  /// returns the nearest class declaring a matching method, or nullptr.
  const ClassDecl* nearest_implementor(const std::string& class_name,
                                       const std::string& method_name, std::size_t nparams) const;

  MethodRef ref_of(const std::string& class_name, const MethodDecl& m) const;

  /// Rebuilds the class index and subtype adjacency; called after parsing.
  void build_indexes();

 private:
  std::map<std::string, std::size_t> class_index_;
};

/// Parses IR source text. Throws ParseError with file/line/col on syntax
/// errors, unresolved types, duplicate declarations and dangling labels.
Program parse_program(std::string_view text, const std::string& filename = "<input>");

/// Parses one file of a multi-file corpus: full syntactic and body
/// validation, but type references may resolve in other files. Combine with
/// merge_programs.
Program parse_program_unlinked(std::string_view text, const std::string& filename = "<input>");

/// Merges per-file programs into one, re-checking duplicate classes and
/// resolving every type reference across the whole corpus.
Program merge_programs(std::vector<Program> parts);

/// Duplicate-class and type-resolution checks over a complete program.
void validate_type_resolution(const Program& program);

/// Canonical printer; render + reparse yields a structurally equal Program.
std::string render_program(const Program& program);

/// Reflexive-transitive closure of the subtype relation over extends and
/// implements edges. Throws std::invalid_argument for unknown types.
std::set<std::string> subtypes_of(const Program& program, const std::string& type_name);

bool is_primitive_or_string(const std::string& type_name);

struct ControlFlowGraph {
  struct Node {
    std::vector<int> successors;  // ordered: branch targets first, fallthrough last
    bool reachable = false;
  };

  std::vector<Node> nodes;  // one per statement, same indexing as the body
};

/// One node per statement; if nodes have two successors (target, fallthrough),
/// switch nodes one per case plus default, throw/return are sinks.
ControlFlowGraph build_cfg(const MethodDecl& method);

}  // namespace authmine::ir
