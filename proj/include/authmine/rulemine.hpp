#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "authmine/checks.hpp"

/// Closed frequent-itemset mining over per-entry-point check sets and
/// antecedent-constrained association-rule generation.
namespace authmine::rulemine {

/// Exact rational; support and confidence comparisons stay precise at
/// threshold boundaries.
struct Rational {
  long long num = 0;
  long long den = 1;

  static Rational of(long long num, long long den);
  /// Accepts "a/b", decimals like "0.85", plain integers, and the dynamic
  /// per-run form "k/E" (reported via `per_transaction`).
  static Rational parse(const std::string& text, bool* per_transaction = nullptr);

  Rational normalized() const;
  std::string render() const;
  double to_double() const { return den == 0 ? 0.0 : double(num) / double(den); }

  friend bool operator==(const Rational& a, const Rational& b);
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b);
};

struct TransactionDB {
  std::vector<std::string> items;                 // sorted universe
  std::vector<std::string> transaction_names;     // sorted entry-point signatures
  std::vector<std::vector<int>> transactions;     // per transaction: sorted item ids

  static TransactionDB from_check_sets(const std::vector<checkmining::CheckSet>& check_sets);
  static TransactionDB from_raw(
      const std::vector<std::pair<std::string, std::vector<std::string>>>& named_transactions);

  std::size_t size() const { return transactions.size(); }
  int item_id(const std::string& item) const;

  /// Transactions containing every item of the set.
  std::vector<int> supporters_of(const std::vector<int>& itemset) const;
  int support_count(const std::vector<int>& itemset) const;
  /// Largest item set common to the given transactions.
  std::vector<int> common_items(const std::vector<int>& transaction_ids) const;
};

struct ClosedItemset {
  std::vector<int> items;       // sorted
  std::vector<int> supporters;  // sorted transaction indices
  int support_count = 0;
};

/// Exactly the itemsets with support >= minsup whose closure is themselves,
/// enumerated by prefix-preserving closure extension; no non-closed
/// candidates are generated.
std::vector<ClosedItemset> mine_closed_itemsets(const TransactionDB& db, const Rational& minsup);

/// Independent oracle: powerset scan applying the definitions directly.
/// Guarded to at most 20 items.
std::vector<ClosedItemset> brute_force_closed(const TransactionDB& db, const Rational& minsup);

struct AssociationRule {
  int target = 0;               // transaction index
  std::vector<int> antecedent;  // X = A_target ∩ I
  std::vector<int> consequent;  // Y = I \ A_target
  Rational support;             // |α(X∪Y)| / |E|
  Rational confidence;          // σ(X∪Y) / σ(X)
  int support_count = 0;
  std::vector<int> supporters;  // transactions containing X ∪ Y
};

/// Rules for one target entry point: for each closed itemset I overlapping
/// the target's checks but not contained in them, X = A_j ∩ I is held
/// constant and Y = I \ A_j; emitted when confidence >= minconf and at
/// least two entry points support I.
std::vector<AssociationRule> generate_targeted_rules(const TransactionDB& db,
                                                     const std::vector<ClosedItemset>& closed,
                                                     int target, const Rational& minconf);

/// Consistent iff some closed itemset equals the target's checks with
/// support from at least two entry points.
bool mark_consistent(const TransactionDB& db, const std::vector<ClosedItemset>& closed,
                     int target);

/// Drops rules with |Y| >= 5|X|, then rules with |Y| > 100.
std::vector<AssociationRule> filter_rules(std::vector<AssociationRule> rules);

/// Full mining pass: closed itemsets at minsup, targeted rules for every
/// transaction, post-filtered, sorted by (target, confidence desc, X, Y).
std::vector<AssociationRule> mine_rules(const TransactionDB& db, const Rational& minsup,
                                        const Rational& minconf);

void sort_rules(const TransactionDB& db, std::vector<AssociationRule>& rules);

}  // namespace authmine::rulemine
