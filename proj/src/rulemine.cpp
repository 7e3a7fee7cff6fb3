#include "authmine/rulemine.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <stdexcept>

namespace authmine::rulemine {

namespace {

long long gcd_ll(long long a, long long b) {
  a = a < 0 ? -a : a;
  b = b < 0 ? -b : b;
  while (b) {
    long long t = a % b;
    a = b;
    b = t;
  }
  return a == 0 ? 1 : a;
}

__int128 cross(const Rational& a, const Rational& b) {
  return __int128(a.num) * b.den - __int128(b.num) * a.den;
}

}  // namespace

Rational Rational::of(long long num, long long den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return Rational{num, den}.normalized();
}

Rational Rational::normalized() const {
  long long g = gcd_ll(num, den);
  return Rational{num / g, den / g};
}

Rational Rational::parse(const std::string& text, bool* per_transaction) {
  if (per_transaction) *per_transaction = false;
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num_part = text.substr(0, slash);
    std::string den_part = text.substr(slash + 1);
    long long num = std::stoll(num_part);
    if (den_part == "E") {
      if (!per_transaction)
        throw std::invalid_argument("per-transaction threshold not allowed here: " + text);
      *per_transaction = true;
      return Rational{num, 1};
    }
    return of(num, std::stoll(den_part));
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    if (frac.empty() || frac.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("malformed decimal: " + text);
    long long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    long long whole_v = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
    bool negative = !whole.empty() && whole[0] == '-';
    long long num = whole_v * den + (negative ? -std::stoll(frac) : std::stoll(frac));
    return of(num, den);
  }
  return of(std::stoll(text), 1);
}

std::string Rational::render() const {
  Rational n = normalized();
  return std::to_string(n.num) + "/" + std::to_string(n.den);
}

bool operator==(const Rational& a, const Rational& b) { return cross(a, b) == 0; }
bool operator<(const Rational& a, const Rational& b) { return cross(a, b) < 0; }
bool operator<=(const Rational& a, const Rational& b) { return cross(a, b) <= 0; }

TransactionDB TransactionDB::from_check_sets(
    const std::vector<checkmining::CheckSet>& check_sets) {
  std::vector<std::pair<std::string, std::vector<std::string>>> named;
  for (const auto& cs : check_sets) {
    if (cs.empty()) continue;  // entry points without authorization logic are not mined
    named.emplace_back(cs.entry_point.signature(), cs.check_strings());
  }
  return from_raw(named);
}

TransactionDB TransactionDB::from_raw(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& named_transactions) {
  TransactionDB db;
  std::set<std::string> universe;
  for (const auto& [_, items] : named_transactions)
    for (const auto& item : items) universe.insert(item);
  db.items.assign(universe.begin(), universe.end());
  std::map<std::string, int> ids;
  for (std::size_t i = 0; i < db.items.size(); ++i) ids[db.items[i]] = int(i);

  std::vector<std::pair<std::string, std::vector<std::string>>> sorted = named_transactions;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [name, items] : sorted) {
    db.transaction_names.push_back(name);
    std::set<int> t;
    for (const auto& item : items) t.insert(ids.at(item));
    db.transactions.emplace_back(t.begin(), t.end());
  }
  return db;
}

int TransactionDB::item_id(const std::string& item) const {
  auto it = std::lower_bound(items.begin(), items.end(), item);
  if (it == items.end() || *it != item) return -1;
  return int(it - items.begin());
}

std::vector<int> TransactionDB::supporters_of(const std::vector<int>& itemset) const {
  std::vector<int> out;
  for (std::size_t t = 0; t < transactions.size(); ++t) {
    if (std::includes(transactions[t].begin(), transactions[t].end(), itemset.begin(),
                      itemset.end()))
      out.push_back(int(t));
  }
  return out;
}

int TransactionDB::support_count(const std::vector<int>& itemset) const {
  return int(supporters_of(itemset).size());
}

std::vector<int> TransactionDB::common_items(const std::vector<int>& transaction_ids) const {
  std::vector<int> common;
  bool first = true;
  for (int t : transaction_ids) {
    if (first) {
      common = transactions[std::size_t(t)];
      first = false;
      continue;
    }
    std::vector<int> next;
    std::set_intersection(common.begin(), common.end(), transactions[std::size_t(t)].begin(),
                          transactions[std::size_t(t)].end(), std::back_inserter(next));
    common = std::move(next);
    if (common.empty()) break;
  }
  return common;
}

namespace {

bool meets_min_support(int count, const Rational& minsup, std::size_t total) {
  // count/total >= num/den  <=>  count*den >= num*total
  return __int128(count) * minsup.den >= __int128(minsup.num) * __int128(total);
}

void check_minsup(const Rational& minsup) {
  Rational zero{0, 1};
  Rational one{1, 1};
  if (minsup <= zero || one < minsup)
    throw std::invalid_argument("minsup must be in (0, 1], got " + minsup.render());
}

}  // namespace

std::vector<ClosedItemset> mine_closed_itemsets(const TransactionDB& db, const Rational& minsup) {
  check_minsup(minsup);
  std::vector<ClosedItemset> out;
  const std::size_t total = db.size();
  if (total == 0) return out;
  const int n = int(db.items.size());

  // per-item tid lists
  std::vector<std::vector<int>> tids;
  tids.resize(std::size_t(n));
  for (std::size_t t = 0; t < db.transactions.size(); ++t)
    for (int item : db.transactions[t]) tids[std::size_t(item)].push_back(int(t));

  std::vector<int> all(total);
  std::iota(all.begin(), all.end(), 0);

  auto closure = [&](const std::vector<int>& tidset) { return db.common_items(tidset); };

  // prefix-preserving closure extension: extending P with item i keeps the
  // result only when the closure adds no item below i outside P
  std::function<void(const std::vector<int>&, const std::vector<int>&, int)> extend =
      [&](const std::vector<int>& closed, const std::vector<int>& tidset, int core) {
        for (int i = core + 1; i < n; ++i) {
          if (std::binary_search(closed.begin(), closed.end(), i)) continue;
          std::vector<int> next_tids;
          std::set_intersection(tidset.begin(), tidset.end(), tids[std::size_t(i)].begin(),
                                tids[std::size_t(i)].end(), std::back_inserter(next_tids));
          if (next_tids.empty()) continue;
          if (!meets_min_support(int(next_tids.size()), minsup, total)) continue;
          std::vector<int> next_closed = closure(next_tids);
          bool prefix_ok = true;
          for (int item : next_closed) {
            if (item >= i) break;
            if (!std::binary_search(closed.begin(), closed.end(), item)) {
              prefix_ok = false;
              break;
            }
          }
          if (!prefix_ok) continue;
          out.push_back(ClosedItemset{next_closed, next_tids, int(next_tids.size())});
          extend(next_closed, next_tids, i);
        }
      };

  std::vector<int> root_closed = closure(all);
  if (!root_closed.empty() && meets_min_support(int(total), minsup, total))
    out.push_back(ClosedItemset{root_closed, all, int(total)});
  extend(root_closed, all, -1);

  std::sort(out.begin(), out.end(),
            [](const ClosedItemset& a, const ClosedItemset& b) { return a.items < b.items; });
  return out;
}

std::vector<ClosedItemset> brute_force_closed(const TransactionDB& db, const Rational& minsup) {
  check_minsup(minsup);
  if (db.items.size() > 20)
    throw std::invalid_argument("brute_force_closed is limited to 20 items");
  std::vector<ClosedItemset> out;
  const std::size_t total = db.size();
  if (total == 0) return out;
  const int n = int(db.items.size());
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> itemset;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) itemset.push_back(i);
    std::vector<int> supp = db.supporters_of(itemset);
    if (!meets_min_support(int(supp.size()), minsup, total)) continue;
    if (db.common_items(supp) != itemset) continue;
    out.push_back(ClosedItemset{itemset, supp, int(supp.size())});
  }
  std::sort(out.begin(), out.end(),
            [](const ClosedItemset& a, const ClosedItemset& b) { return a.items < b.items; });
  return out;
}

std::vector<AssociationRule> generate_targeted_rules(const TransactionDB& db,
                                                     const std::vector<ClosedItemset>& closed,
                                                     int target, const Rational& minconf) {
  std::vector<AssociationRule> out;
  const auto& target_items = db.transactions[std::size_t(target)];
  for (const auto& itemset : closed) {
    std::vector<int> antecedent;
    std::set_intersection(itemset.items.begin(), itemset.items.end(), target_items.begin(),
                          target_items.end(), std::back_inserter(antecedent));
    if (antecedent.empty()) continue;
    std::vector<int> consequent;
    std::set_difference(itemset.items.begin(), itemset.items.end(), target_items.begin(),
                        target_items.end(), std::back_inserter(consequent));
    if (consequent.empty()) continue;
    if (itemset.support_count < 2) continue;
    int antecedent_count = db.support_count(antecedent);
    // conf = support(I) / support(X) >= minconf
    if (__int128(itemset.support_count) * minconf.den <
        __int128(minconf.num) * antecedent_count)
      continue;
    AssociationRule rule;
    rule.target = target;
    rule.antecedent = antecedent;
    rule.consequent = consequent;
    rule.support = Rational::of(itemset.support_count, (long long)db.size());
    rule.confidence = Rational::of(itemset.support_count, antecedent_count);
    rule.support_count = itemset.support_count;
    rule.supporters = itemset.supporters;
    out.push_back(std::move(rule));
  }
  // identical (X, Y) can only arise from the same closed set, but keep the
  // higher-support instance deterministically if duplicates ever appear
  std::map<std::pair<std::vector<int>, std::vector<int>>, std::size_t> best;
  std::vector<AssociationRule> dedup;
  for (auto& rule : out) {
    auto key = std::make_pair(rule.antecedent, rule.consequent);
    auto it = best.find(key);
    if (it == best.end()) {
      best[key] = dedup.size();
      dedup.push_back(std::move(rule));
    } else if (dedup[it->second].support_count < rule.support_count) {
      dedup[it->second] = std::move(rule);
    }
  }
  return dedup;
}

bool mark_consistent(const TransactionDB& db, const std::vector<ClosedItemset>& closed,
                     int target) {
  const auto& target_items = db.transactions[std::size_t(target)];
  for (const auto& itemset : closed) {
    if (!(itemset.items == target_items) || itemset.support_count < 2) continue;
    // supporters merely containing the set is not enough: consistency means
    // some other entry point carries exactly the same checks
    int exact = 0;
    for (int t : itemset.supporters)
      if (db.transactions[std::size_t(t)] == target_items) ++exact;
    if (exact >= 2) return true;
  }
  return false;
}

std::vector<AssociationRule> filter_rules(std::vector<AssociationRule> rules) {
  std::vector<AssociationRule> out;
  for (auto& rule : rules) {
    if (rule.consequent.size() >= 5 * rule.antecedent.size()) continue;
    if (rule.consequent.size() > 100) continue;
    out.push_back(std::move(rule));
  }
  return out;
}

void sort_rules(const TransactionDB& db, std::vector<AssociationRule>& rules) {
  auto canon_items = [&](const std::vector<int>& ids) {
    std::vector<std::string> out;
    for (int id : ids) out.push_back(db.items[std::size_t(id)]);
    return out;
  };
  std::sort(rules.begin(), rules.end(), [&](const AssociationRule& a, const AssociationRule& b) {
    const std::string& ta = db.transaction_names[std::size_t(a.target)];
    const std::string& tb = db.transaction_names[std::size_t(b.target)];
    if (ta != tb) return ta < tb;
    if (!(a.confidence == b.confidence)) return b.confidence < a.confidence;
    auto xa = canon_items(a.antecedent), xb = canon_items(b.antecedent);
    if (xa != xb) return xa < xb;
    return canon_items(a.consequent) < canon_items(b.consequent);
  });
}

std::vector<AssociationRule> mine_rules(const TransactionDB& db, const Rational& minsup,
                                        const Rational& minconf) {
  std::vector<AssociationRule> out;
  if (db.size() == 0) return out;
  std::vector<ClosedItemset> closed = mine_closed_itemsets(db, minsup);
  for (std::size_t t = 0; t < db.size(); ++t) {
    auto rules = generate_targeted_rules(db, closed, int(t), minconf);
    for (auto& r : rules) out.push_back(std::move(r));
  }
  out = filter_rules(std::move(out));
  sort_rules(db, out);
  return out;
}

}  // namespace authmine::rulemine
