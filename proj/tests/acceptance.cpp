// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit status is the number of failures.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "authmine/checkmining.hpp"
#include "authmine/matchlang.hpp"
#include "authmine/pipeline.hpp"
#include "authmine/rulemine.hpp"
#include "oracles.hpp"

#ifndef AUTHMINE_FIXTURES_DIR
#define AUTHMINE_FIXTURES_DIR "tests/fixtures"
#endif

using namespace authmine;
namespace cg = authmine::callgraph;
namespace cm = authmine::checkmining;
namespace pl = authmine::pipeline;
namespace rm = authmine::rulemine;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void criterion(int number, const std::string& label, const std::function<bool()>& body) {
  bool ok = false;
  std::string note;
  try {
    ok = body();
  } catch (const std::exception& e) {
    note = std::string(" (") + e.what() + ")";
  }
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": " << label << note
            << "\n";
  if (!ok) ++failures;
}

std::string fixture(const std::string& name) {
  return std::string(AUTHMINE_FIXTURES_DIR) + "/" + name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool expect(bool condition, const std::string& what) {
  if (!condition) std::cout << "       detail: " << what << "\n";
  return condition;
}

// --- bitmask helpers over small databases -------------------------------------

struct MaskDb {
  int items = 0;
  std::vector<unsigned> transactions;
  std::vector<int> support;  // per mask

  explicit MaskDb(const rm::TransactionDB& db) {
    items = int(db.items.size());
    for (const auto& t : db.transactions) {
      unsigned mask = 0;
      for (int id : t) mask |= 1u << id;
      transactions.push_back(mask);
    }
    support.assign(1u << items, 0);
    for (unsigned m = 0; m < (1u << items); ++m)
      for (unsigned t : transactions)
        if ((m & t) == m) ++support[m];
  }

  unsigned closure(unsigned mask) const {
    unsigned common = (1u << items) - 1;
    bool any = false;
    for (unsigned t : transactions) {
      if ((mask & t) == mask) {
        common &= t;
        any = true;
      }
    }
    return any ? common : mask;
  }
};

unsigned to_mask(const std::vector<int>& items) {
  unsigned m = 0;
  for (int i : items) m |= 1u << i;
  return m;
}

// --- criteria -------------------------------------------------------------------

bool fixture_reproduction() {
  auto start = std::chrono::steady_clock::now();
  pl::RunConfig config = pl::parse_run_config(fixture("user_restrictions.conf"));
  if (!expect(config.minconf == rm::Rational::of(85, 100), "default minconf must be 0.85"))
    return false;
  if (!expect(config.minsup_per_entry && config.minsup_numerator == 2,
              "default minsup must be 2/|E|"))
    return false;
  pl::apply_overrides(config, std::string("0.6"), std::nullopt, std::nullopt, std::nullopt);
  pl::AnalysisResult result = pl::analyze(config);
  auto elapsed = std::chrono::steady_clock::now() - start;

  if (!expect(result.rules.size() == 1, "exactly one rule expected")) return false;
  const rm::AssociationRule& rule = result.rules[0];
  std::string target = result.db.transaction_names[std::size_t(rule.target)];
  if (!expect(target == "com.android.server.pm.UserManagerService.hasUserRestriction(string,int)",
              "target must be hasUserRestriction, got " + target))
    return false;

  std::set<std::string> antecedent;
  for (int id : rule.antecedent) antecedent.insert(result.db.items[std::size_t(id)]);
  if (!expect(antecedent.count("invoke com.android.server.pm.UserRestrictionsUtils."
                               "isValidRestriction(string)") == 1,
              "antecedent must contain the isValidRestriction-derived check"))
    return false;

  std::set<std::string> consequent;
  for (int id : rule.consequent) consequent.insert(result.db.items[std::size_t(id)]);
  std::set<std::string> expected{
      "invoke com.android.server.pm.UserManagerService.hasManageUsersPermission()",
      "{android.app.ActivityManager.checkComponentPermission({\"android.permission.MANAGE_USERS\"}, "
      "{android.os.Binder.getCallingUid()}, {-1}, {true})} == "
      "{android.content.pm.PackageManager.PERMISSION_GRANTED}",
      "{android.os.Binder.getCallingUid()} == {android.os.Process.ROOT_UID}",
      "{android.os.UserHandle.isSameApp({android.os.Binder.getCallingUid()}, "
      "{android.os.Process.SYSTEM_UID})} == {true}",
  };
  for (const auto& check : expected)
    if (!expect(consequent.count(check) == 1, "missing consequent check: " + check)) return false;
  if (!expect(consequent.size() == expected.size(), "consequent must hold exactly four checks"))
    return false;
  if (!expect(rule.confidence == rm::Rational::of(2, 3), "confidence must be exactly 2/3"))
    return false;
  if (!expect(rule.supporters.size() == 2, "two supporting entry points expected")) return false;
  double seconds = std::chrono::duration<double>(elapsed).count();
  return expect(seconds < 1.0, "runtime must stay under 1 s");
}

bool closed_oracle_equivalence() {
  auto start = std::chrono::steady_clock::now();
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    oracles::Rng rng(seed * 7919);
    rm::TransactionDB db = oracles::random_db(rng, 10, 8);
    int total = int(db.size());
    rm::Rational minsup = rm::Rational::of(1 + rng.below(total), total);
    auto mined = rm::mine_closed_itemsets(db, minsup);
    auto oracle = rm::brute_force_closed(db, minsup);
    if (mined.size() != oracle.size()) return false;
    for (std::size_t i = 0; i < mined.size(); ++i) {
      if (mined[i].items != oracle[i].items) return false;
      if (mined[i].supporters != oracle[i].supporters) return false;
    }
  }
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return expect(seconds < 10.0, "200 databases must finish in under 10 s");
}

// Closure lemmas of targeted closed-rule mining, tested in their
// closure-completed form: the
// literal "every support-increasing subset of a closed set is itself closed"
// phrasing has finite counterexamples (e.g. transactions {a,b,d}, {a,b,d},
// {a,b,c,d}: {a,b,c,d} is closed with support 1, the subset {a,b} has support
// 3 but closes to {a,b,d}). What closed-rule mining guarantees, and what the
// losslessness argument actually needs, is that the closure of any frequent
// itemset is mined with identical support, so every confident rule is backed
// by a closed itemset at the same confidence.
bool lemma_properties() {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    oracles::Rng rng(seed * 4099);
    rm::TransactionDB db = oracles::random_db(rng, 8, 8);
    int total = int(db.size());
    rm::Rational minsup = rm::Rational::of(1 + rng.below(total), total);
    rm::Rational minconf = rm::Rational::of(50 + rng.below(50), 100);
    MaskDb masks(db);
    auto mined = rm::mine_closed_itemsets(db, minsup);
    std::set<unsigned> mined_masks;
    for (const auto& c : mined) mined_masks.insert(to_mask(c.items));
    auto frequent = [&](unsigned m) {
      return masks.support[m] > 0 &&
             __int128(masks.support[m]) * minsup.den >= __int128(minsup.num) * total;
    };

    // lemma 2, closure form: a support-increasing subset of a mined closed
    // set closes to another mined closed set of the same support; when the
    // subset is its own closure, the literal statement holds as well
    for (const auto& closed : mined) {
      unsigned c_mask = to_mask(closed.items);
      int c_support = masks.support[c_mask];
      for (unsigned s = (c_mask - 1) & c_mask; s; s = (s - 1) & c_mask) {
        if (masks.support[s] <= c_support) continue;
        unsigned t = masks.closure(s);
        if (masks.support[t] != masks.support[s]) return false;
        if (t == c_mask) return false;  // strictly larger support, different set
        if (frequent(s) && !mined_masks.count(t)) return false;
        if (t == s && frequent(s) && !mined_masks.count(s)) return false;
      }
    }

    // lemma 1 losslessness: every confident rule X => Y' over a frequent
    // itemset is emitted from a closed set (its closure) at the exact same
    // confidence, or X u Y' is itself closed and emitted
    for (unsigned s = 1; s < (1u << masks.items); ++s) {
      if (!frequent(s)) continue;
      unsigned closure = masks.closure(s);
      if (masks.support[closure] != masks.support[s]) return false;
      if (!mined_masks.count(closure)) return false;
      for (unsigned x = (s - 1) & s; x; x = (x - 1) & s) {
        bool sub_confident = __int128(masks.support[s]) * minconf.den >=
                             __int128(minconf.num) * masks.support[x];
        if (!sub_confident) continue;
        // the widened closed-backed rule has the identical confidence
        if (masks.support[closure] * masks.support[x] !=
            masks.support[s] * masks.support[x])
          return false;
        if ((x & closure) != x) return false;  // antecedent survives widening
      }
    }
  }
  return true;
}

bool targeted_rule_completeness() {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    oracles::Rng rng(seed * 6151);
    rm::TransactionDB db = oracles::random_db(rng, 8, 8);
    int total = int(db.size());
    rm::Rational minsup = rm::Rational::of(1 + rng.below(std::min(total, 3)), total);
    rm::Rational minconf = rm::Rational::of(50 + rng.below(50), 100);
    auto closed = rm::brute_force_closed(db, minsup);
    for (int target = 0; target < total; ++target) {
      // brute force over all closed itemsets
      std::set<std::pair<std::vector<int>, std::vector<int>>> expected;
      const auto& a_j = db.transactions[std::size_t(target)];
      for (const auto& itemset : closed) {
        std::vector<int> x, y;
        std::set_intersection(itemset.items.begin(), itemset.items.end(), a_j.begin(), a_j.end(),
                              std::back_inserter(x));
        std::set_difference(itemset.items.begin(), itemset.items.end(), a_j.begin(), a_j.end(),
                            std::back_inserter(y));
        if (x.empty() || y.empty()) continue;
        if (int(itemset.supporters.size()) < 2) continue;
        int x_support = db.support_count(x);
        if (__int128(itemset.support_count) * minconf.den <
            __int128(minconf.num) * x_support)
          continue;
        expected.insert({x, y});
      }
      auto got = rm::generate_targeted_rules(db, rm::mine_closed_itemsets(db, minsup), target,
                                             minconf);
      if (got.size() != expected.size()) return false;
      for (const auto& rule : got)
        if (!expected.count({rule.antecedent, rule.consequent})) return false;
    }
  }
  return true;
}

bool cha_completeness() {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    oracles::Rng rng(seed * 131);
    ir::Program program = oracles::random_call_program(rng, 30);
    ir::MethodRef root;
    bool have_root = false;
    for (const auto& cls : program.classes)
      for (const auto& m : cls.methods)
        if (m.has_body() && !have_root) {
          root = program.ref_of(cls.name, m);
          have_root = true;
        }
    if (!have_root) continue;
    cg::CallGraph graph = cg::build_cha_callgraph(program, root, cg::ExcludeList{}, {});
    for (const auto& node : graph.nodes) {
      const ir::MethodDecl* decl =
          program.find_method(node.class_name, node.method_name, node.param_types.size());
      if (!decl || !decl->has_body()) continue;
      const auto& body = *decl->body;
      for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i].kind != ir::Statement::Kind::Invoke) continue;
        const auto& edge = graph.edges.at(cg::CallSite{node.signature(), int(i)});
        for (const auto& target : oracles::dispatch_targets(program, body[i]))
          if (!edge.count(target)) return false;
      }
    }
    // exclusion monotonicity
    cg::ExcludeList larger;
    larger.class_path.push_back("C" + std::to_string(rng.below(6)));
    cg::CallGraph reduced = cg::build_cha_callgraph(program, root, larger, {});
    for (const auto& n : reduced.nodes)
      if (!graph.nodes.count(n)) return false;
    if (reduced.edges.size() > graph.edges.size()) return false;
  }
  return true;
}

bool marking_oracle() {
  // bundled service fixture
  std::vector<ir::Program> parts;
  parts.push_back(
      ir::parse_program_unlinked(slurp(fixture("user_restrictions.ir")), "user_restrictions.ir"));
  parts.push_back(
      ir::parse_program_unlinked(slurp(fixture("android_stubs.ir")), "android_stubs.ir"));
  ir::Program program = ir::merge_programs(std::move(parts));
  cg::EntryPointConfig ep_config;
  auto eps = cg::detect_entry_points(program, ep_config);
  std::set<ir::MethodRef> ep_set(eps.begin(), eps.end());
  cm::MinerConfig miner;
  for (const auto& ep : eps) {
    cg::CallGraph graph = cg::build_cha_callgraph(program, ep, cg::ExcludeList{}, ep_set);
    auto targets = cm::find_security_throws(graph, program, miner);
    auto marked = cm::mark_backward_cps(graph, program, targets);
    auto oracle = oracles::path_enumeration_marked(graph, program, targets);
    if (!expect(marked == oracle, "fixture marking must equal path enumeration")) return false;
  }

  // small synthetic fixtures, throws guarded at varying depths
  const char* shapes[] = {
      // diamond: one branch reaches the throw
      "class a.S {\n"
      "  method f(x: int, y: int) -> void entrypoint {\n"
      "    if x == 0 goto LA\n"
      "    l0 = const 1\n"
      "    goto LB\n"
      "  LA:\n"
      "    l0 = const 2\n"
      "  LB:\n"
      "    if y == 0 goto LT\n"
      "    return\n"
      "  LT:\n"
      "    throw new java.lang.SecurityException()\n"
      "  }\n"
      "}\n"
      "class java.lang.SecurityException external {\n}\n",
      // call chain: the guard sits two calls deep
      "class a.S {\n"
      "  method f(x: int) -> void entrypoint {\n"
      "    invoke virtual a.S.g(x)\n"
      "    return\n"
      "  }\n"
      "  method g(y: int) -> void {\n"
      "    if y == 7 goto LOK\n"
      "    invoke virtual a.S.h()\n"
      "  LOK:\n"
      "    return\n"
      "  }\n"
      "  method h() -> void {\n"
      "    throw new java.lang.SecurityException()\n"
      "  }\n"
      "}\n"
      "class java.lang.SecurityException external {\n}\n",
      // conditional after the only throw is not marked
      "class a.S {\n"
      "  method f(x: int) -> void entrypoint {\n"
      "    if x == 0 goto LT\n"
      "    if x == 1 goto LEND\n"
      "    l0 = const 3\n"
      "  LEND:\n"
      "    return\n"
      "  LT:\n"
      "    throw new java.lang.SecurityException()\n"
      "  }\n"
      "}\n"
      "class java.lang.SecurityException external {\n}\n",
  };
  for (const char* src : shapes) {
    ir::Program p = ir::parse_program(src);
    ir::MethodRef root;
    for (const auto& cls : p.classes)
      for (const auto& m : cls.methods)
        if (m.has_attribute("entrypoint")) root = p.ref_of(cls.name, m);
    cg::CallGraph graph = cg::build_cha_callgraph(p, root, cg::ExcludeList{}, {root});
    auto targets = cm::find_security_throws(graph, p, miner);
    auto marked = cm::mark_backward_cps(graph, p, targets);
    auto oracle = oracles::path_enumeration_marked(graph, p, targets);
    if (!expect(marked == oracle, "synthetic fixture marking must equal path enumeration"))
      return false;
  }

  // field-blindness regression: a query return routed through a field is
  // not marked; the direct route is
  const char* fb =
      "class fb.S {\n"
      "  field cache: bool\n"
      "  method hop(x: string) -> bool entrypoint {\n"
      "    l0 = invoke virtual fb.S.isAllowed(x)\n"
      "    field fb.S.cache = l0\n"
      "    l1 = field fb.S.cache\n"
      "    if not l1 goto LF\n"
      "    return true\n"
      "  LF:\n"
      "    return false\n"
      "  }\n"
      "  method direct(x: string) -> bool entrypoint {\n"
      "    l0 = invoke virtual fb.S.isAllowed(x)\n"
      "    if not l0 goto LF\n"
      "    return true\n"
      "  LF:\n"
      "    return false\n"
      "  }\n"
      "  method isAllowed(k: string) -> bool {\n"
      "    l0 = const true\n"
      "    return l0\n"
      "  }\n"
      "}\n";
  ir::Program p = ir::parse_program(fb);
  std::set<ir::MethodRef> cqs;
  ir::MethodRef hop, direct;
  for (const auto& cls : p.classes)
    for (const auto& m : cls.methods) {
      if (m.name == "isAllowed") cqs.insert(p.ref_of(cls.name, m));
      if (m.name == "hop") hop = p.ref_of(cls.name, m);
      if (m.name == "direct") direct = p.ref_of(cls.name, m);
    }
  cg::CallGraph hop_graph = cg::build_cha_callgraph(p, hop, cg::ExcludeList{}, {hop, direct});
  cg::CallGraph direct_graph =
      cg::build_cha_callgraph(p, direct, cg::ExcludeList{}, {hop, direct});
  if (!expect(cm::forward_defuse_cq_returns(hop_graph, p, cqs).empty(),
              "field hop must break the def-use track"))
    return false;
  return expect(cm::forward_defuse_cq_returns(direct_graph, p, cqs).size() == 1,
                "direct use must be marked");
}

bool simplification_rules() {
  // exact canonical check strings, one fixture per rule
  auto expand = [](const std::string& body_src, int index,
                   std::vector<std::string>* out) {
    std::string src = body_src;
    src +=
        "class java.lang.SecurityException external {\n}\n"
        "class android.os.Bundle external {\n  method getInt(key: string) -> int\n}\n"
        "class android.os.SystemProperties external {\n"
        "  method get(key: string, fallback: string) -> string\n}\n"
        "class java.lang.String external {\n  method equals(other: string) -> bool\n}\n";
    ir::Program program = ir::parse_program(src);
    ir::MethodRef entry;
    for (const auto& cls : program.classes)
      for (const auto& m : cls.methods)
        if (m.has_attribute("entrypoint")) entry = program.ref_of(cls.name, m);
    cg::CallGraph graph = cg::build_cha_callgraph(program, entry, cg::ExcludeList{}, {entry});
    cm::MinerConfig config;
    cm::ValueAnalysis values(program, graph, config);
    out->clear();
    for (const auto& check : cm::expand_conditional(values, program, cm::StmtRef{entry, index}))
      out->push_back(check.canon());
    return true;
  };

  std::vector<std::string> checks;

  // 1: non-primitive -> ALL (pair removed); primitive survives exactly
  expand(
      "class q.W external {\n}\n"
      "class q.H external {\n  field widget: q.W\n  field count: int\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    l0 = field q.H.widget\n    l1 = field q.H.count\n"
      "    if l0 == l1 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      2, &checks);
  if (!expect(checks.empty(), "rule 1")) return false;

  // 2: cycle -> ALL
  expand(
      "class q.H external {\n  field count: int\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    l0 = const 0\n  L:\n    l0 = l0 + 1\n    l1 = field q.H.count\n"
      "    if l0 == l1 goto L\n    return\n  }\n}\n",
      4, &checks);
  if (!expect(checks.empty(), "rule 2")) return false;

  // 3: entry parameter -> ALL
  expand(
      "class q.S {\n  method f(p: int) -> void entrypoint {\n"
      "    if p == 5 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      0, &checks);
  if (!expect(checks.empty(), "rule 3")) return false;

  // 4: lengthof -> ALL
  expand(
      "class q.H external {\n  field count: int\n}\n"
      "class q.S {\n  method f(arr: int[]) -> void entrypoint {\n"
      "    c = field q.H.count\n    l0 = lengthof arr\n"
      "    if l0 == c goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      2, &checks);
  if (!expect(checks.empty(), "rule 4")) return false;

  // 5: array reference survives with an exact encoding
  expand(
      "class q.H external {\n  field table: int[]\n  field count: int\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    l0 = field q.H.table\n    l1 = const 0\n    l2 = l0[l1]\n"
      "    l3 = field q.H.count\n    if l2 == l3 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      4, &checks);
  if (!expect(checks == std::vector<std::string>{"{q.H.count} == {q.H.table[]}"}, "rule 5"))
    return false;

  // 6: data-carrier returns -> ALL
  expand(
      "class q.H external {\n  field bundle: android.os.Bundle\n  field count: int\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    bb = field q.H.bundle\n    k = const \"x\"\n"
      "    l0 = invoke virtual android.os.Bundle.getInt(k) on bb\n"
      "    l1 = field q.H.count\n    if l0 == l1 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      4, &checks);
  if (!expect(checks.empty(), "rule 6")) return false;

  // 7: ALL absorbs the whole variable set
  expand(
      "class q.H external {\n  field count: int\n}\n"
      "class q.S {\n  method f(p: int) -> void entrypoint {\n"
      "    x = const 5\n    x = p\n    l0 = field q.H.count\n"
      "    if x == l0 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      3, &checks);
  if (!expect(checks.empty(), "rule 7")) return false;

  // 8: NULL dropped next to other values; exact surviving pair
  expand(
      "class q.H external {\n  field name: string\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    x = const null\n    x = const \"a\"\n    l0 = field q.H.name\n"
      "    if x == l0 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      3, &checks);
  if (!expect(checks == std::vector<std::string>{"{\"a\"} == {q.H.name}"}, "rule 8"))
    return false;

  // 9: NULL side, constant-constant and equal sides all removed
  expand(
      "class q.H external {\n  field name: string\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    y = const null\n    l0 = field q.H.name\n"
      "    if y == l0 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      2, &checks);
  if (!expect(checks.empty(), "rule 9 NULL side")) return false;
  expand(
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    x = const \"a\"\n    if x == \"b\" goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      1, &checks);
  if (!expect(checks.empty(), "rule 9 constants")) return false;
  expand(
      "class q.H external {\n  field count: int\n}\n"
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    l0 = field q.H.count\n    if l0 == l0 goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      1, &checks);
  if (!expect(checks.empty(), "rule 9 equal sides")) return false;

  // 10: equals-pair reconstruction, exact encoding
  expand(
      "class q.S {\n  method f() -> void entrypoint {\n"
      "    k = const \"ro.debuggable\"\n    d = const \"0\"\n"
      "    s = invoke static android.os.SystemProperties.get(k, d)\n"
      "    one = const \"1\"\n"
      "    r = invoke virtual java.lang.String.equals(s) on one\n"
      "    if r == false goto LT\n    return\n  LT:\n"
      "    throw new java.lang.SecurityException()\n  }\n}\n",
      5, &checks);
  return expect(checks == std::vector<std::string>{
                    "{\"1\"} == {android.os.SystemProperties.get({\"ro.debuggable\"}, {\"0\"})}"},
                "rule 10");
}

bool post_filter() {
  auto make_rule = [](int nx, int ny) {
    rm::AssociationRule rule;
    for (int i = 0; i < nx; ++i) rule.antecedent.push_back(i);
    for (int i = 0; i < ny; ++i) rule.consequent.push_back(1000 + i);
    return rule;
  };
  if (!rm::filter_rules({make_rule(1, 5)}).empty()) return false;        // |Y| = 5|X|
  if (!rm::filter_rules({make_rule(20, 101)}).empty()) return false;     // cap
  if (rm::filter_rules({make_rule(1, 4)}).size() != 1) return false;     // |Y| = 5|X|-1
  if (rm::filter_rules({make_rule(30, 100)}).size() != 1) return false;  // |Y| = 100
  return true;
}

bool matcher_dsl() {
  const char* expr_text =
      "(and (or (starts-with-package android.)\n"
      "         (starts-with-package com.android.))\n"
      "     (regex-name-words `^can\\s(clear\\sidentity|draw\\soverlays"
      "|run\\shere|user\\smodify\\saccounts|access\\sapp\\swidget"
      "|read\\sphone\\s(state|number)|caller\\saccess\\smock)\\b`)\n"
      "     (not (equal-package android.test)))";
  auto expr = matchlang::parse_matcher(expr_text);
  ir::MethodRef accepted;
  accepted.class_name = "android.app.X";
  accepted.method_name = "canClearIdentity";
  ir::MethodRef rejected;
  rejected.class_name = "android.test.X";
  rejected.method_name = "canClearIdentity";
  return matchlang::matches(*expr, accepted) && !matchlang::matches(*expr, rejected);
}

bool determinism() {
  std::map<std::string, std::string> contents[2];
  unsigned worker_counts[2] = {1, 8};
  for (int round = 0; round < 2; ++round) {
    pl::RunConfig config = pl::parse_run_config(fixture("user_restrictions.conf"));
    pl::apply_overrides(config, std::string("0.6"), std::nullopt, worker_counts[round],
                        std::nullopt);
    fs::path dir = fs::temp_directory_path() / ("authmine_acc_" + std::to_string(round));
    fs::remove_all(dir);
    config.out_dir = dir.string();
    pl::AnalysisResult result = pl::analyze(config);
    pl::write_artifacts(config, result);
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      contents[round][fs::relative(entry.path(), dir).string()] = slurp(entry.path());
    }
    fs::remove_all(dir);
  }
  return !contents[0].empty() && contents[0] == contents[1];
}

}  // namespace

int main() {
  criterion(1, "bundled-fixture end-to-end reproduction", fixture_reproduction);
  criterion(2, "closed-itemset oracle equivalence on 200 random databases",
            closed_oracle_equivalence);
  criterion(3,
            "closure lemmas (closure-completed form; the literal subset phrasing is "
            "counterexampled) hold on 100 random databases",
            lemma_properties);
  criterion(4, "targeted-rule completeness against brute force", targeted_rule_completeness);
  criterion(5, "CHA completeness and exclusion monotonicity on random programs",
            cha_completeness);
  criterion(6, "backward marking equals path enumeration; field blindness holds",
            marking_oracle);
  criterion(7, "simplification rules produce the exact canonical checks", simplification_rules);
  criterion(8, "post-filter drops oversized rules and keeps boundary cases", post_filter);
  criterion(9, "matcher expression accepts android.app and rejects android.test", matcher_dsl);
  criterion(10, "artifacts are byte-identical for 1 and 8 workers", determinism);

  if (failures) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed\n";
  return 0;
}
