#include "authmine/report.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace authmine::report {

namespace {

constexpr std::size_t kMaxSampleSites = 8;

std::vector<std::string> item_strings(const rulemine::TransactionDB& db,
                                      const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int id : ids) out.push_back(db.items[std::size_t(id)]);
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ReportError("cannot write " + path.string());
  out << content;
  if (!out) throw ReportError("write failed for " + path.string());
}

std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

void render_check_list(std::ostringstream& out, const RuleReport& report,
                       const std::vector<std::string>& checks) {
  out << "<ul>\n";
  for (const auto& check : checks) {
    out << "  <li><code>" << html_escape(check) << "</code>";
    auto loc = report.check_locations.find(check);
    if (loc != report.check_locations.end() && !loc->second.empty()) {
      out << " <span class=\"loc\">";
      for (std::size_t i = 0; i < loc->second.size(); ++i) {
        if (i) out << ", ";
        out << html_escape(loc->second[i]);
      }
      out << "</span>";
    }
    out << "</li>\n";
  }
  out << "</ul>\n";
}

}  // namespace

RuleReport build_rule_report(const rulemine::TransactionDB& db,
                             const rulemine::AssociationRule& rule,
                             const std::vector<checkmining::CheckSet>& check_sets) {
  RuleReport report;
  report.target = db.transaction_names[std::size_t(rule.target)];
  for (int s : rule.supporters)
    report.supporters.push_back(db.transaction_names[std::size_t(s)]);
  report.antecedent = item_strings(db, rule.antecedent);
  report.consequent = item_strings(db, rule.consequent);
  report.support = rule.support.render();
  report.confidence = rule.confidence.render();
  report.support_count = rule.support_count;

  // target-only extras: checks of the target that are not antecedents
  std::set<std::string> antecedent_set(report.antecedent.begin(), report.antecedent.end());
  for (const auto& cs : check_sets) {
    std::string name = cs.entry_point.signature();
    bool relevant = name == report.target ||
                    std::find(report.supporters.begin(), report.supporters.end(), name) !=
                        report.supporters.end();
    if (name == report.target) {
      for (const auto& [check, _] : cs.checks)
        if (!antecedent_set.count(check)) report.extra_checks.push_back(check);
    }
    if (!relevant) continue;
    for (const auto& [check, origins] : cs.checks) {
      auto& locations = report.check_locations[check];
      for (const auto& origin : origins) {
        std::string site = origin.render();
        if (std::find(locations.begin(), locations.end(), site) == locations.end())
          locations.push_back(site);
      }
    }
  }
  for (auto& [_, locations] : report.check_locations)
    std::sort(locations.begin(), locations.end());
  return report;
}

nlohmann::json rule_report_json(const RuleReport& report) {
  nlohmann::json j;
  j["target"] = report.target;
  j["supporters"] = report.supporters;
  j["antecedent"] = report.antecedent;
  j["consequent"] = report.consequent;
  j["extra_checks"] = report.extra_checks;
  j["support"] = report.support;
  j["support_count"] = report.support_count;
  j["confidence"] = report.confidence;
  j["check_locations"] = report.check_locations;
  return j;
}

std::string rule_report_html(const RuleReport& report, std::size_t index) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">\n"
      << "<title>Rule " << index << ": " << html_escape(report.target) << "</title>\n"
      << "<style>\n"
      << "body { font-family: sans-serif; margin: 2em; }\n"
      << "code { background: #f4f4f4; padding: 1px 4px; }\n"
      << ".loc { color: #777; font-size: 0.85em; }\n"
      << "h2 { border-bottom: 1px solid #ccc; }\n"
      << "</style></head><body>\n";
  out << "<h1>Inconsistent entry point: <code>" << html_escape(report.target)
      << "</code></h1>\n";
  out << "<p>confidence " << html_escape(report.confidence) << ", support "
      << html_escape(report.support) << " (" << report.support_count
      << " supporting entry points)</p>\n";
  out << "<h2>Supporting entry points</h2>\n<ul>\n";
  for (const auto& s : report.supporters)
    out << "  <li><code>" << html_escape(s) << "</code></li>\n";
  out << "</ul>\n";
  out << "<h2>Supporting checks (present in target and supporters)</h2>\n";
  render_check_list(out, report, report.antecedent);
  out << "<h2>Recommended checks (missing from target)</h2>\n";
  render_check_list(out, report, report.consequent);
  out << "<h2>Other checks of the target</h2>\n";
  render_check_list(out, report, report.extra_checks);
  out << "</body></html>\n";
  return out.str();
}

void emit_rule_reports(const rulemine::TransactionDB& db,
                       const std::vector<rulemine::AssociationRule>& rules,
                       const std::vector<checkmining::CheckSet>& check_sets,
                       const std::string& format, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());

  bool html = format == "html";
  std::string ext = html ? ".html" : ".json";

  // index grouped by target
  std::map<std::string, std::vector<std::pair<std::size_t, const rulemine::AssociationRule*>>>
      by_target;
  std::vector<RuleReport> reports;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    reports.push_back(build_rule_report(db, rules[i], check_sets));
    by_target[reports.back().target].push_back({i, &rules[i]});
  }

  for (std::size_t i = 0; i < rules.size(); ++i) {
    std::ostringstream name;
    name << "rule_" << std::setw(4) << std::setfill('0') << i << ext;
    if (html)
      write_file(dir / name.str(), rule_report_html(reports[i], i));
    else
      write_file(dir / name.str(), rule_report_json(reports[i]).dump(2) + "\n");
  }

  if (html) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Inconsistency "
           "reports</title></head><body>\n<h1>Inconsistency reports</h1>\n";
    if (rules.empty()) out << "<p>No rules.</p>\n";
    for (const auto& [target, entries] : by_target) {
      out << "<h2><code>" << html_escape(target) << "</code></h2>\n<ul>\n";
      for (const auto& [i, rule] : entries) {
        out << "  <li><a href=\"rule_" << std::setw(4) << std::setfill('0') << i << ".html\">rule "
            << i << "</a> (confidence " << html_escape(rule->confidence.render()) << ", "
            << rule->consequent.size() << " recommended)</li>\n";
      }
      out << "</ul>\n";
    }
    out << "</body></html>\n";
    write_file(dir / "index.html", out.str());
  } else {
    nlohmann::json index;
    index["rule_count"] = rules.size();
    index["targets"] = nlohmann::json::object();
    for (const auto& [target, entries] : by_target) {
      nlohmann::json files = nlohmann::json::array();
      for (const auto& [i, _] : entries) {
        std::ostringstream name;
        name << "rule_" << std::setw(4) << std::setfill('0') << i << ext;
        files.push_back(name.str());
      }
      index["targets"][target] = files;
    }
    write_file(dir / "index.json", index.dump(2) + "\n");
  }
}

ExplorationDump build_exploration_dump(
    const ir::Program& program, const std::vector<cpfilter::ConditionalCandidate>& candidates) {
  (void)program;
  struct Agg {
    std::set<std::string> sites;
  };
  std::map<std::string, Agg> strings, fields, used_methods, container_methods;

  for (const auto& candidate : candidates) {
    std::string site = candidate.stmt.render();
    container_methods[candidate.stmt.method.signature()].sites.insert(site);
    for (const auto& element : candidate.elements) {
      switch (element.kind) {
        case cpfilter::Element::Kind::StringConst:
          strings[element.str_value].sites.insert(site);
          break;
        case cpfilter::Element::Kind::Field:
          fields[element.field.qualified()].sites.insert(site);
          break;
        case cpfilter::Element::Kind::MethodReturn:
          used_methods[element.method.signature()].sites.insert(site);
          break;
      }
    }
  }

  auto to_entries = [](const std::map<std::string, Agg>& agg) {
    std::vector<DumpEntry> out;
    for (const auto& [value, a] : agg) {
      DumpEntry e;
      e.value = value;
      e.count = int(a.sites.size());
      for (const auto& s : a.sites) {
        if (e.sites.size() >= kMaxSampleSites) break;
        e.sites.push_back(s);
      }
      out.push_back(std::move(e));
    }
    return out;
  };

  ExplorationDump dump;
  dump.strings = to_entries(strings);
  dump.fields = to_entries(fields);
  dump.methods_in_conditionals = to_entries(used_methods);
  dump.methods_containing_conditionals = to_entries(container_methods);
  return dump;
}

nlohmann::json exploration_json(const ExplorationDump& dump) {
  auto entries = [](const std::vector<DumpEntry>& list) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& e : list) {
      nlohmann::json j;
      j["value"] = e.value;
      j["count"] = e.count;
      j["sites"] = e.sites;
      out.push_back(j);
    }
    return out;
  };
  nlohmann::json j;
  j["strings"] = entries(dump.strings);
  j["fields"] = entries(dump.fields);
  j["methods_in_conditionals"] = entries(dump.methods_in_conditionals);
  j["methods_containing_conditionals"] = entries(dump.methods_containing_conditionals);
  return j;
}

void emit_exploration_dump(const ir::Program& program,
                           const std::vector<cpfilter::ConditionalCandidate>& candidates,
                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "exploration.json",
             exploration_json(build_exploration_dump(program, candidates)).dump(2) + "\n");
}

RunSummary summarize_run(const std::vector<checkmining::CheckSet>& check_sets,
                         const rulemine::TransactionDB& db,
                         const std::vector<rulemine::AssociationRule>& rules) {
  RunSummary summary;
  summary.entry_points = check_sets.size();
  for (const auto& cs : check_sets)
    if (!cs.empty()) ++summary.with_checks;
  std::set<int> targets;
  for (const auto& rule : rules) targets.insert(rule.target);
  summary.with_rules = targets.size();
  (void)db;
  return summary;
}

nlohmann::json summary_json(const RunSummary& summary) {
  nlohmann::json j;
  j["entry_points"] = summary.entry_points;
  j["entry_points_with_checks"] = summary.with_checks;
  j["entry_points_with_rules"] = summary.with_rules;
  return j;
}

}  // namespace authmine::report
