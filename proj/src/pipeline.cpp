#include "authmine/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace authmine::pipeline {

namespace fs = std::filesystem;

rulemine::Rational RunConfig::minsup_for(std::size_t total) const {
  if (!minsup_per_entry) return minsup_fixed;
  if (total == 0) return rulemine::Rational{1, 1};
  long long num = minsup_numerator;
  long long den = (long long)total;
  if (num > den) num = den;  // clamp so tiny corpora stay minable
  return rulemine::Rational::of(num, den);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    std::string part =
        trim(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (!part.empty()) out.push_back(part);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void parse_threshold(RunConfig& config, const std::string& key, const std::string& value) {
  try {
    if (key == "minconf") {
      config.minconf = rulemine::Rational::parse(value);
      rulemine::Rational zero{0, 1}, one{1, 1};
      if (config.minconf <= zero || one < config.minconf)
        throw std::invalid_argument("minconf must be in (0, 1]");
    } else {
      bool per_entry = false;
      rulemine::Rational r = rulemine::Rational::parse(value, &per_entry);
      config.minsup_per_entry = per_entry;
      if (per_entry) {
        if (r.num <= 0) throw std::invalid_argument("minsup numerator must be positive");
        config.minsup_numerator = r.num;
      } else {
        rulemine::Rational zero{0, 1}, one{1, 1};
        if (r <= zero || one < r) throw std::invalid_argument("minsup must be in (0, 1]");
        config.minsup_fixed = r;
      }
    }
  } catch (const std::exception& e) {
    throw PipelineError("bad " + key + " '" + value + "': " + e.what());
  }
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  RunConfig config;
  std::string text = read_text_file(path);
  fs::path base = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path candidate(p);
    if (candidate.is_absolute() || base.empty()) return p;
    return (base / candidate).string();
  };

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw PipelineError(path + ":" + std::to_string(lineno) + ": expected 'key: value'");
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (value.empty())
      throw PipelineError(path + ":" + std::to_string(lineno) + ": empty value for " + key);

    if (key == "ir_paths") {
      for (const auto& p : split_list(value)) config.ir_paths.push_back(resolve(p));
    } else if (key == "exclude_list") {
      config.exclude_list = resolve(value);
    } else if (key == "cq_exprs") {
      config.cq_exprs = resolve(value);
    } else if (key == "cq_seeds") {
      config.cq_seeds = resolve(value);
    } else if (key == "cp_filter") {
      config.cp_filter = resolve(value);
    } else if (key == "security_exception_type") {
      config.security_exception_type = value;
    } else if (key == "minconf" || key == "minsup") {
      parse_threshold(config, key, value);
    } else if (key == "workers") {
      try {
        int w = std::stoi(value);
        if (w < 0) throw std::invalid_argument("negative");
        config.workers = unsigned(w);
      } catch (const std::exception&) {
        throw PipelineError(path + ":" + std::to_string(lineno) + ": bad workers '" + value +
                            "'");
      }
    } else if (key == "out_dir") {
      config.out_dir = resolve(value);
    } else if (key == "format") {
      if (value != "json" && value != "html")
        throw PipelineError(path + ":" + std::to_string(lineno) +
                            ": format must be json or html");
      config.format = value;
    } else if (key == "entry_attribute") {
      config.entry_points.explicit_attribute = value;
    } else if (key == "stub_bases") {
      config.entry_points.stub_bases = split_list(value);
    } else if (key == "dispatch_method") {
      config.entry_points.dispatch_method = value;
    } else if (key == "value_opaque_classes") {
      config.value_opaque_classes.clear();
      for (const auto& c : split_list(value)) config.value_opaque_classes.insert(c);
    } else {
      throw PipelineError(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return config;
}

void apply_overrides(RunConfig& config, const std::optional<std::string>& minconf,
                     const std::optional<std::string>& minsup,
                     const std::optional<unsigned>& workers,
                     const std::optional<std::string>& format) {
  if (minconf) parse_threshold(config, "minconf", *minconf);
  if (minsup) parse_threshold(config, "minsup", *minsup);
  if (workers) config.workers = *workers;
  if (format) {
    if (*format != "json" && *format != "html")
      throw PipelineError("format must be json or html");
    config.format = *format;
  }
}

void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  unsigned n = workers == 0 ? std::thread::hardware_concurrency() : workers;
  if (n == 0) n = 1;
  n = unsigned(std::min<std::size_t>(n, count));
  if (n <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < n; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

LoadedInputs load_inputs(const RunConfig& config) {
  LoadedInputs inputs;
  if (config.ir_paths.empty())
    throw PipelineError("ir_paths is required for this stage");

  std::vector<ir::Program> parts;
  for (const auto& path : config.ir_paths)
    parts.push_back(ir::parse_program_unlinked(read_text_file(path), path));
  inputs.program = ir::merge_programs(std::move(parts));

  if (!config.exclude_list.empty())
    inputs.exclude = callgraph::parse_exclude_list(read_text_file(config.exclude_list));
  if (!config.cq_exprs.empty())
    inputs.cq_exprs = matchlang::parse_matcher_file(read_text_file(config.cq_exprs));
  if (!config.cq_seeds.empty())
    inputs.cq_seeds = matchlang::parse_seed_file(read_text_file(config.cq_seeds));
  if (!config.cp_filter.empty())
    inputs.filter = cpfilter::parse_filter(read_text_file(config.cp_filter));

  inputs.miner.security_exception_type = config.security_exception_type;
  inputs.miner.value_opaque_classes = config.value_opaque_classes;

  inputs.entry_points = callgraph::detect_entry_points(inputs.program, config.entry_points);
  inputs.context_queries =
      matchlang::identify_context_queries(inputs.program, inputs.cq_exprs, inputs.cq_seeds);
  return inputs;
}

AnalysisResult analyze(const RunConfig& config) {
  LoadedInputs inputs = load_inputs(config);
  AnalysisResult result;
  result.program = std::move(inputs.program);
  result.entry_points = inputs.entry_points;
  result.per_entry.resize(result.entry_points.size());

  std::set<ir::MethodRef> all_eps(result.entry_points.begin(), result.entry_points.end());
  parallel_for(result.entry_points.size(), config.workers, [&](std::size_t i) {
    result.per_entry[i] = checkmining::mine_entry_point(
        result.program, result.entry_points[i], inputs.context_queries, inputs.filter,
        inputs.exclude, all_eps, inputs.miner);
  });

  for (const auto& analysis : result.per_entry) result.check_sets.push_back(analysis.check_set);
  result.db = rulemine::TransactionDB::from_check_sets(result.check_sets);
  result.rules =
      rulemine::mine_rules(result.db, config.minsup_for(result.db.size()), config.minconf);
  result.summary = report::summarize_run(result.check_sets, result.db, result.rules);
  return result;
}

nlohmann::json call_graphs_json(const AnalysisResult& result) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < result.entry_points.size(); ++i) {
    const auto& graph = result.per_entry[i].graph;
    nlohmann::json g;
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : graph.nodes) nodes.push_back(n.signature());
    g["nodes"] = nodes;
    nlohmann::json edges = nlohmann::json::object();
    for (const auto& [site, targets] : graph.edges) {
      nlohmann::json t = nlohmann::json::array();
      for (const auto& target : targets) t.push_back(target.signature());
      edges[site.render()] = t;
    }
    g["edges"] = edges;
    nlohmann::json cuts = nlohmann::json::object();
    for (const auto& [ref, reason] : graph.cut_reasons)
      cuts[ref.signature()] = callgraph::cut_reason_name(reason);
    g["cuts"] = cuts;
    out[result.entry_points[i].signature()] = g;
  }
  return out;
}

nlohmann::json check_sets_json(const std::vector<checkmining::CheckSet>& check_sets) {
  std::vector<const checkmining::CheckSet*> sorted;
  for (const auto& cs : check_sets) sorted.push_back(&cs);
  std::sort(sorted.begin(), sorted.end(),
            [](const checkmining::CheckSet* a, const checkmining::CheckSet* b) {
              return a->entry_point.signature() < b->entry_point.signature();
            });
  nlohmann::json entries = nlohmann::json::array();
  for (const auto* cs : sorted) {
    nlohmann::json e;
    e["entry"] = cs->entry_point.signature();
    e["checks"] = cs->check_strings();
    nlohmann::json prov = nlohmann::json::object();
    for (const auto& [check, origins] : cs->checks) {
      nlohmann::json sites = nlohmann::json::array();
      for (const auto& origin : origins) sites.push_back(origin.render());
      prov[check] = sites;
    }
    e["provenance"] = prov;
    entries.push_back(e);
  }
  nlohmann::json out;
  out["entry_points"] = entries;
  return out;
}

std::vector<checkmining::CheckSet> check_sets_from_json(const nlohmann::json& j) {
  std::vector<checkmining::CheckSet> out;
  if (!j.contains("entry_points") || !j["entry_points"].is_array())
    throw PipelineError("checksets JSON must contain an entry_points array");
  for (const auto& e : j["entry_points"]) {
    checkmining::CheckSet cs;
    std::string sig = e.at("entry").get<std::string>();
    // signature form: qualified(name,params)
    auto open = sig.find('(');
    std::string qualified = open == std::string::npos ? sig : sig.substr(0, open);
    auto dot = qualified.rfind('.');
    cs.entry_point.class_name = dot == std::string::npos ? qualified : qualified.substr(0, dot);
    cs.entry_point.method_name = dot == std::string::npos ? "" : qualified.substr(dot + 1);
    if (open != std::string::npos) {
      auto close = sig.rfind(')');
      std::string params = sig.substr(open + 1, close - open - 1);
      for (const auto& p : split_list(params)) cs.entry_point.param_types.push_back(p);
    }
    for (const auto& check : e.at("checks")) {
      std::string canon = check.get<std::string>();
      auto& origins = cs.checks[canon];
      if (e.contains("provenance") && e["provenance"].contains(canon)) {
        for (const auto& site : e["provenance"][canon]) {
          std::string s = site.get<std::string>();
          auto at = s.rfind('@');
          checkmining::CheckOrigin origin;
          origin.method_signature = at == std::string::npos ? s : s.substr(0, at);
          origin.stmt_index = at == std::string::npos ? 0 : std::stoi(s.substr(at + 1));
          origins.insert(origin);
        }
      }
    }
    out.push_back(std::move(cs));
  }
  return out;
}

nlohmann::json rules_json(const rulemine::TransactionDB& db,
                          const std::vector<rulemine::AssociationRule>& rules) {
  auto items = [&](const std::vector<int>& ids) {
    nlohmann::json out = nlohmann::json::array();
    for (int id : ids) out.push_back(db.items[std::size_t(id)]);
    return out;
  };
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rule : rules) {
    nlohmann::json r;
    r["target"] = db.transaction_names[std::size_t(rule.target)];
    r["antecedent"] = items(rule.antecedent);
    r["consequent"] = items(rule.consequent);
    // checks of the target that are not part of the rule's antecedent
    std::vector<int> extra;
    std::set_difference(db.transactions[std::size_t(rule.target)].begin(),
                        db.transactions[std::size_t(rule.target)].end(),
                        rule.antecedent.begin(), rule.antecedent.end(),
                        std::back_inserter(extra));
    r["extra_checks"] = items(extra);
    r["support"] = rule.support.render();
    r["support_count"] = rule.support_count;
    r["confidence"] = rule.confidence.render();
    nlohmann::json supporters = nlohmann::json::array();
    for (int s : rule.supporters) supporters.push_back(db.transaction_names[std::size_t(s)]);
    r["supporters"] = supporters;
    arr.push_back(r);
  }
  nlohmann::json out;
  out["rules"] = arr;
  return out;
}

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PipelineError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

void write_artifacts(const RunConfig& config, const AnalysisResult& result) {
  fs::path dir(config.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw PipelineError("cannot create " + dir.string() + ": " + ec.message());

  write_json(dir / "callgraphs.json", call_graphs_json(result));
  write_json(dir / "checksets.json", check_sets_json(result.check_sets));

  std::vector<cpfilter::ConditionalCandidate> all_candidates;
  for (const auto& analysis : result.per_entry)
    for (const auto& candidate : analysis.candidates) all_candidates.push_back(candidate);
  report::emit_exploration_dump(result.program, all_candidates, config.out_dir);

  write_json(dir / "rules.json", rules_json(result.db, result.rules));
  write_json(dir / "summary.json", report::summary_json(result.summary));

  report::emit_rule_reports(result.db, result.rules, result.check_sets, config.format,
                            (dir / "reports").string());
}

std::vector<rulemine::AssociationRule> mine_rules_from_file(const RunConfig& config,
                                                            const std::string& checksets_path,
                                                            rulemine::TransactionDB& db_out) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(checksets_path));
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError(checksets_path + ": " + e.what());
  }
  std::vector<checkmining::CheckSet> check_sets = check_sets_from_json(j);
  db_out = rulemine::TransactionDB::from_check_sets(check_sets);
  return rulemine::mine_rules(db_out, config.minsup_for(db_out.size()), config.minconf);
}

}  // namespace authmine::pipeline
