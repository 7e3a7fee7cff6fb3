#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "authmine/matchlang.hpp"
#include "authmine/pipeline.hpp"
#include "authmine/rulemine.hpp"

namespace py = pybind11;

namespace {

namespace am = authmine;

py::list closed_itemsets_py(const std::vector<std::vector<std::string>>& transactions,
                            const std::string& minsup) {
  std::vector<std::pair<std::string, std::vector<std::string>>> named;
  for (std::size_t i = 0; i < transactions.size(); ++i) {
    std::ostringstream name;
    name << "t" << std::setw(6) << std::setfill('0') << i;
    named.emplace_back(name.str(), transactions[i]);
  }
  auto db = am::rulemine::TransactionDB::from_raw(named);
  bool per_entry = false;
  am::rulemine::Rational threshold = am::rulemine::Rational::parse(minsup, &per_entry);
  if (per_entry)
    threshold = am::rulemine::Rational::of(threshold.num, (long long)db.size());
  py::list out;
  for (const auto& c : am::rulemine::mine_closed_itemsets(db, threshold)) {
    py::list items;
    for (int id : c.items) items.append(db.items[std::size_t(id)]);
    py::list supporters;
    for (int t : c.supporters) supporters.append(db.transaction_names[std::size_t(t)]);
    out.append(py::make_tuple(items, c.support_count, supporters));
  }
  return out;
}

std::string analyze_py(const std::string& config_path) {
  auto config = am::pipeline::parse_run_config(config_path);
  auto result = am::pipeline::analyze(config);
  am::pipeline::write_artifacts(config, result);
  nlohmann::json j = am::report::summary_json(result.summary);
  j["rules"] = result.rules.size();
  j["out_dir"] = config.out_dir;
  return j.dump();
}

std::string mine_rules_py(const std::string& config_path) {
  auto config = am::pipeline::parse_run_config(config_path);
  auto result = am::pipeline::analyze(config);
  return am::pipeline::rules_json(result.db, result.rules).dump(2);
}

std::vector<std::string> entry_points_py(const std::string& ir_text) {
  auto program = am::ir::parse_program(ir_text);
  am::callgraph::EntryPointConfig config;
  std::vector<std::string> out;
  for (const auto& m : am::callgraph::detect_entry_points(program, config))
    out.push_back(m.signature());
  return out;
}

bool matches_py(const std::string& expr, const std::string& class_name,
                const std::string& method_name) {
  auto matcher = am::matchlang::parse_matcher(expr);
  am::ir::MethodRef ref;
  ref.class_name = class_name;
  ref.method_name = method_name;
  return am::matchlang::matches(*matcher, ref);
}

}  // namespace

PYBIND11_MODULE(authmine_py, m) {
  m.doc() = "authorization-check consistency analysis";

  m.def("split_words", &am::matchlang::split_words,
        "split an identifier at camel-case and underscore boundaries");
  m.def("matches", &matches_py, py::arg("expr"), py::arg("class_name"), py::arg("method_name"),
        "evaluate a matcher expression against a method reference");
  m.def("entry_points", &entry_points_py, py::arg("ir_text"),
        "detected entry points of an IR program");
  m.def("closed_itemsets", &closed_itemsets_py, py::arg("transactions"), py::arg("minsup"),
        "closed frequent itemsets of string transactions");
  m.def("analyze", &analyze_py, py::arg("config_path"),
        "run the full pipeline and write artifacts; returns a JSON summary");
  m.def("mine_rules", &mine_rules_py, py::arg("config_path"),
        "run the pipeline and return the rules as JSON");
}
