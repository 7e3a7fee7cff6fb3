#include "doctest.h"

#include "authmine/rulemine.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace authmine;
namespace rm = authmine::rulemine;

namespace {

rm::TransactionDB db_of(const std::vector<std::vector<std::string>>& transactions) {
  std::vector<std::pair<std::string, std::vector<std::string>>> named;
  for (std::size_t i = 0; i < transactions.size(); ++i)
    named.emplace_back("t" + std::to_string(i), transactions[i]);
  return rm::TransactionDB::from_raw(named);
}

std::set<std::vector<std::string>> item_sets(const rm::TransactionDB& db,
                                             const std::vector<rm::ClosedItemset>& closed) {
  std::set<std::vector<std::string>> out;
  for (const auto& c : closed) {
    std::vector<std::string> items;
    for (int id : c.items) items.push_back(db.items[std::size_t(id)]);
    out.insert(items);
  }
  return out;
}

bool same_closed(const std::vector<rm::ClosedItemset>& a,
                 const std::vector<rm::ClosedItemset>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].items != b[i].items) return false;
    if (a[i].supporters != b[i].supporters) return false;
    if (a[i].support_count != b[i].support_count) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("rational parsing and exact comparison") {
  CHECK(rm::Rational::parse("0.85") == rm::Rational::of(17, 20));
  CHECK(rm::Rational::parse("2/3").render() == "2/3");
  CHECK(rm::Rational::parse("1") == rm::Rational::of(1, 1));
  bool per_entry = false;
  rm::Rational dyn = rm::Rational::parse("2/E", &per_entry);
  CHECK(per_entry);
  CHECK(dyn.num == 2);
  CHECK(rm::Rational::of(2, 3) <= rm::Rational::of(2, 3));
  CHECK(rm::Rational::of(199999, 300000) < rm::Rational::of(2, 3));
  CHECK_FALSE(rm::Rational::of(2, 3) < rm::Rational::of(2, 3));
  CHECK_THROWS_AS(rm::Rational::parse("2/E"), std::invalid_argument);
}

TEST_CASE("closed itemsets of the three-transaction example") {
  auto db = db_of({{"a", "b"}, {"a", "b"}, {"a"}});
  auto closed = rm::mine_closed_itemsets(db, rm::Rational::of(2, 3));
  auto sets = item_sets(db, closed);
  CHECK(sets == std::set<std::vector<std::string>>{{"a"}, {"a", "b"}});
  for (const auto& c : closed) {
    if (c.items.size() == 1) CHECK(c.support_count == 3);
    if (c.items.size() == 2) CHECK(c.support_count == 2);
  }
}

TEST_CASE("identical transactions collapse to a single closed set") {
  auto db = db_of({{"x", "y", "z"}, {"x", "y", "z"}, {"x", "y", "z"}});
  auto closed = rm::mine_closed_itemsets(db, rm::Rational::of(1, 3));
  REQUIRE(closed.size() == 1);
  CHECK(closed[0].items.size() == 3);
  CHECK(closed[0].support_count == 3);
}

TEST_CASE("minsup 1/|E| with distinct singletons yields each transaction's closure") {
  auto db = db_of({{"a"}, {"b"}, {"c"}});
  auto closed = rm::mine_closed_itemsets(db, rm::Rational::of(1, 3));
  CHECK(item_sets(db, closed) == std::set<std::vector<std::string>>{{"a"}, {"b"}, {"c"}});
}

TEST_CASE("empty database mines nothing") {
  rm::TransactionDB db;
  CHECK(rm::mine_closed_itemsets(db, rm::Rational::of(1, 2)).empty());
  CHECK_THROWS_AS(rm::mine_closed_itemsets(db_of({{"a"}}), rm::Rational::of(0, 1)),
                  std::invalid_argument);
  CHECK_THROWS_AS(rm::mine_closed_itemsets(db_of({{"a"}}), rm::Rational::of(3, 2)),
                  std::invalid_argument);
}

TEST_CASE("miner equals the powerset oracle on random databases") {
  for (std::uint64_t seed = 1; seed <= 120; ++seed) {
    oracles::Rng rng(seed * 101);
    auto db = oracles::random_db(rng, 10, 8);
    int denom = int(db.size());
    rm::Rational minsup = rm::Rational::of(1 + rng.below(denom), denom);
    auto mined = rm::mine_closed_itemsets(db, minsup);
    auto oracle = rm::brute_force_closed(db, minsup);
    CHECK(same_closed(mined, oracle));
  }
}

TEST_CASE("raising minsup never adds closed itemsets") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    oracles::Rng rng(seed * 53);
    auto db = oracles::random_db(rng, 8, 8);
    int denom = int(db.size());
    int low = 1 + rng.below(denom);
    int high = low + rng.below(denom - low + 1);
    auto wide = item_sets(db, rm::mine_closed_itemsets(db, rm::Rational::of(low, denom)));
    auto narrow = item_sets(db, rm::mine_closed_itemsets(db, rm::Rational::of(high, denom)));
    for (const auto& s : narrow) CHECK(wide.count(s) == 1);
  }
}

TEST_CASE("targeted rule of the three-transaction example") {
  auto db = db_of({{"a", "b"}, {"a", "b"}, {"a"}});
  auto closed = rm::mine_closed_itemsets(db, rm::Rational::of(2, 3));
  auto rules = rm::generate_targeted_rules(db, closed, 2, rm::Rational::of(6, 10));
  REQUIRE(rules.size() == 1);
  const auto& rule = rules[0];
  CHECK(db.items[std::size_t(rule.antecedent[0])] == "a");
  CHECK(db.items[std::size_t(rule.consequent[0])] == "b");
  CHECK(rule.confidence == rm::Rational::of(2, 3));
  CHECK(rule.support == rm::Rational::of(2, 3));
  CHECK(rule.supporters == std::vector<int>{0, 1});
}

TEST_CASE("itemsets inside the target produce no rule") {
  auto db = db_of({{"a", "b"}, {"a", "b"}, {"a", "b"}});
  auto closed = rm::mine_closed_itemsets(db, rm::Rational::of(2, 3));
  CHECK(rm::generate_targeted_rules(db, closed, 0, rm::Rational::of(1, 2)).empty());
}

TEST_CASE("supporter floor: singleton support yields no rule") {
  auto db = db_of({{"a", "b"}, {"a"}, {"c"}});
  auto closed = rm::mine_closed_itemsets(db, rm::Rational::of(1, 3));
  // {a,b} has support 1, so nothing can be recommended to t1
  auto rules = rm::generate_targeted_rules(db, closed, 1, rm::Rational::of(1, 100));
  CHECK(rules.empty());
}

TEST_CASE("consistency marking") {
  // duplicates are consistent with each other
  auto dup = db_of({{"a", "b"}, {"a", "b"}, {"c"}});
  auto closed_dup = rm::mine_closed_itemsets(dup, rm::Rational::of(1, 3));
  CHECK(rm::mark_consistent(dup, closed_dup, 0));
  CHECK(rm::mark_consistent(dup, closed_dup, 1));
  // a unique non-empty set is not, even when a closed subset covers it
  auto uniq = db_of({{"a", "b"}, {"a", "b", "c"}, {"a"}});
  auto closed_uniq = rm::mine_closed_itemsets(uniq, rm::Rational::of(1, 3));
  CHECK_FALSE(rm::mark_consistent(uniq, closed_uniq, 2));
}

TEST_CASE("post-filter thresholds and boundaries") {
  auto make_rule = [](int nx, int ny) {
    rm::AssociationRule rule;
    for (int i = 0; i < nx; ++i) rule.antecedent.push_back(i);
    for (int i = 0; i < ny; ++i) rule.consequent.push_back(1000 + i);
    rule.support_count = 2;
    return rule;
  };
  // |Y| >= 5|X| drops
  CHECK(rm::filter_rules({make_rule(1, 5)}).empty());
  CHECK(rm::filter_rules({make_rule(1, 4)}).size() == 1);   // 5|X|-1 kept
  CHECK(rm::filter_rules({make_rule(2, 9)}).size() == 1);
  CHECK(rm::filter_rules({make_rule(2, 10)}).empty());
  // cap at 100 recommendations
  CHECK(rm::filter_rules({make_rule(30, 101)}).empty());
  CHECK(rm::filter_rules({make_rule(30, 100)}).size() == 1);  // boundary kept
}

TEST_CASE("raising minconf never adds rules") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    oracles::Rng rng(seed * 67);
    auto db = oracles::random_db(rng, 8, 8);
    rm::Rational minsup = rm::Rational::of(1, (long long)db.size());
    auto lenient = rm::mine_rules(db, minsup, rm::Rational::of(1, 2));
    auto strict = rm::mine_rules(db, minsup, rm::Rational::of(9, 10));
    auto key = [&](const rm::AssociationRule& r) {
      return std::make_tuple(r.target, r.antecedent, r.consequent);
    };
    std::set<std::tuple<int, std::vector<int>, std::vector<int>>> lenient_keys;
    for (const auto& r : lenient) lenient_keys.insert(key(r));
    for (const auto& r : strict) CHECK(lenient_keys.count(key(r)) == 1);
  }
}

TEST_CASE("rule output is ordered by target, confidence, antecedent, consequent") {
  auto db = db_of({{"a", "b", "c"}, {"a", "b", "c"}, {"a", "b"}, {"a"}, {"b"}});
  auto rules = rm::mine_rules(db, rm::Rational::of(2, 5), rm::Rational::of(1, 10));
  for (std::size_t i = 1; i < rules.size(); ++i) {
    const auto& prev = rules[i - 1];
    const auto& cur = rules[i];
    std::string tp = db.transaction_names[std::size_t(prev.target)];
    std::string tc = db.transaction_names[std::size_t(cur.target)];
    CHECK(tp <= tc);
    if (tp == tc) CHECK_FALSE(prev.confidence < cur.confidence);
  }
}

TEST_CASE("brute force guard rejects oversized universes") {
  std::vector<std::vector<std::string>> rows(1);
  for (int i = 0; i < 21; ++i) rows[0].push_back("i" + std::to_string(i));
  CHECK_THROWS_AS(rm::brute_force_closed(db_of(rows), rm::Rational::of(1, 1)),
                  std::invalid_argument);
}
