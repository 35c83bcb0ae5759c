#include "scaf/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scaf/benchgen/benchgen.hpp"
#include "scaf/cafd/cafd.hpp"
#include "scaf/ir/text.hpp"
#include "scaf/ir/validate.hpp"
#include "scaf/metrics/metrics.hpp"
#include "scaf/oracle/oracle.hpp"
#include "scaf/pta/analysis.hpp"

namespace scaf::cli {

namespace {

using nlohmann::json;

/// A failure that maps to an exit code and an error kind.
struct Failure : std::runtime_error {
  Failure(int code, std::string kind, const std::string &message)
      : std::runtime_error(message), code(code), kind(std::move(kind)) {}
  int code;
  std::string kind;
};

struct Options {
  std::string input;
  std::string out;
  std::string oracle = "conservative";
  double temperature = 0.6;
  int queries = 5;
  std::string model;
  std::string endpoint;
  double timeout = 60;
  int retries = 2;
  int max_in_flight = 5;
  std::string cassette_record;
  std::string cassette_replay;
  bool timing = false;
  bool signature_icalls = false;
  std::string mode = "baseline";
  std::vector<std::string> allocators;
  bool allocators_given = false;
  bool one_callsite = false;
  std::string entry = "main";
  std::uint64_t budget = 1000000;

  benchgen::GenSpec gen;
  std::optional<std::size_t> forced_error_link;
  std::string truth_path;
  std::string annotations_path;
};

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Failure(kInputError, "io", "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw Failure(kInputError, "io", "cannot write '" + path + "'");
}

ir::Program load(const Options &o, bool check = true) {
  std::string text = read_file(o.input);
  ir::Program p;
  try {
    p = ir::parse_program(text);
  } catch (const ir::ParseError &e) {
    throw Failure(kInputError, "parse", o.input + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                                            ": " + e.detail());
  }
  if (check) {
    auto violations = ir::validate(p);
    if (!violations.empty()) {
      const auto &v = violations.front();
      throw Failure(kInputError, "validation",
                    std::to_string(violations.size()) + " violation(s); first: " + v.function +
                        (v.site ? " " + v.site->str() : "") + " [" + v.rule + "] " + v.message);
    }
  }
  return p;
}

oracle::OracleConfig oracle_config(const Options &o) {
  oracle::OracleConfig c;
  if (o.oracle == "conservative") {
    c.kind = oracle::OracleConfig::Kind::Conservative;
  } else if (o.oracle.rfind("annotations=", 0) == 0) {
    c.kind = oracle::OracleConfig::Kind::Annotations;
    c.annotation_path = o.oracle.substr(12);
  } else if (o.oracle == "remote") {
    c.kind = oracle::OracleConfig::Kind::Remote;
    auto &r = c.remote;
    r.apply_environment();
    if (!o.endpoint.empty())
      r.endpoint = o.endpoint;
    if (!o.model.empty())
      r.model = o.model;
    r.temperature = o.temperature;
    r.query_count = o.queries;
    r.timeout_seconds = o.timeout;
    r.retries = o.retries;
    r.max_in_flight = o.max_in_flight;
    if (!o.cassette_record.empty() && !o.cassette_replay.empty())
      throw Failure(kInputError, "usage", "--cassette-record and --cassette-replay are exclusive");
    if (!o.cassette_record.empty()) {
      r.cassette_mode = oracle::CassetteMode::Record;
      r.cassette_path = o.cassette_record;
    } else if (!o.cassette_replay.empty()) {
      r.cassette_mode = oracle::CassetteMode::Replay;
      r.cassette_path = o.cassette_replay;
    }
    try {
      r.check();
    } catch (const std::invalid_argument &e) {
      throw Failure(kInputError, "usage", e.what());
    }
  } else {
    throw Failure(kInputError, "usage", "unknown oracle '" + o.oracle + "'");
  }
  return c;
}

std::unique_ptr<oracle::IgnorabilityOracle> make_oracle(const Options &o) {
  try {
    return oracle::make_oracle(oracle_config(o));
  } catch (const Failure &) {
    throw;
  } catch (const std::exception &e) {
    throw Failure(kInputError, "oracle-config", e.what());
  }
}

cafd::DetectionResult detect(const ir::Program &p, oracle::IgnorabilityOracle &oracle, const Options &o,
                             bool consult = true) {
  try {
    return cafd::detect_scafs(p, oracle, {consult, o.signature_icalls});
  } catch (const oracle::TransportError &e) {
    throw Failure(kOracleError, "oracle-transport", e.what());
  }
}

std::set<std::string> given_allocators(const ir::Program &p, const Options &o) {
  std::set<std::string> al = cafd::AllocatorList::seeds(p).names();
  for (const auto &name : o.allocators)
    if (name != "seeds")
      al.insert(name);
  return al;
}

pta::Mode parse_mode(const std::string &m) {
  if (m == "baseline")
    return pta::Mode::Baseline;
  if (m == "enhanced")
    return pta::Mode::Enhanced;
  if (m == "1ctx")
    return pta::Mode::OneCallsite;
  throw Failure(kInputError, "usage", "unknown mode '" + m + "'");
}

pta::Analysis run_analysis(const ir::Program &p, pta::Mode mode, const std::set<std::string> &al) {
  try {
    return pta::analyze(p, mode, al);
  } catch (const std::invalid_argument &e) {
    throw Failure(kInputError, "allocators", e.what());
  }
}

class Stopwatch {
public:
  double lap() {
    auto now = std::chrono::steady_clock::now();
    double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

json cmd_validate(const Options &o, int &code) {
  ir::Program p = load(o, false);
  json violations = json::array();
  auto found = ir::validate(p);
  for (const auto &v : found)
    violations.push_back({{"function", v.function},
                          {"site", v.site ? json(v.site->str()) : json(nullptr)},
                          {"rule", v.rule},
                          {"message", v.message}});
  if (!found.empty()) {
    code = kInputError;
    return {{"valid", false}, {"violations", violations}};
  }
  std::size_t defined = 0;
  for (const auto &[n, fn] : p.functions)
    defined += fn.is_defined();
  return {{"valid", true}, {"functions", p.functions.size()}, {"defined", defined}};
}

json cmd_detect(const Options &o) {
  ir::Program p = load(o);
  auto oracle = make_oracle(o);
  return cafd::to_json(detect(p, *oracle, o), o.timing);
}

json cmd_analyze(const Options &o) {
  ir::Program p = load(o);
  pta::Mode mode = parse_mode(o.mode);
  std::set<std::string> al;
  if (mode == pta::Mode::Enhanced) {
    if (o.allocators_given) {
      al = given_allocators(p, o);
    } else {
      auto oracle = make_oracle(o);
      al = detect(p, *oracle, o).al.names();
    }
  }
  return pta::to_json(run_analysis(p, mode, al));
}

json metrics_row(const std::string &strategy, const pta::Analysis &base, const metrics::DerivedMaps &bm,
                 const pta::Analysis &other) {
  metrics::ObjectPartition part = other.mode == pta::Mode::OneCallsite
                                      ? metrics::partition_by_context(base, other)
                                      : metrics::partition_objects(base, other, other.allocators);
  auto report = metrics::compute_metrics(part, bm, metrics::derive_maps(other));
  auto icalls = metrics::icall_metrics(pta::resolve_indirect_calls(base), pta::resolve_indirect_calls(other));
  json row = {{"strategy", strategy}, {"metrics", metrics::to_json(report, icalls)}};
  if (other.mode == pta::Mode::Enhanced)
    row["allocators"] = other.allocators;
  return row;
}

json cmd_compare(const Options &o) {
  ir::Program p = load(o);
  Stopwatch clock;
  json timing = json::object();
  json rows = json::array();

  auto base = run_analysis(p, pta::Mode::Baseline, {});
  timing["baseline"] = clock.lap();
  auto bm = metrics::derive_maps(base);
  rows.push_back(metrics_row("baseline", base, bm, base));

  auto enhanced = [&](const std::string &strategy, const std::set<std::string> &al) {
    auto a = run_analysis(p, pta::Mode::Enhanced, al);
    timing[strategy] = clock.lap();
    rows.push_back(metrics_row(strategy, base, bm, a));
  };
  if (o.allocators_given) {
    enhanced("enhanced", given_allocators(p, o));
  } else {
    auto oracle = make_oracle(o);
    auto heuristic = detect(p, *oracle, o, false);
    timing["detect-h"] = clock.lap();
    enhanced("cafd-h", heuristic.al.names());
    auto full = detect(p, *oracle, o);
    timing["detect"] = clock.lap();
    enhanced("cafd", full.al.names());
  }
  if (o.one_callsite) {
    auto ctx = run_analysis(p, pta::Mode::OneCallsite, {});
    timing["1ctx"] = clock.lap();
    rows.push_back(metrics_row("1ctx", base, bm, ctx));
  }
  json out = {{"rows", rows}};
  if (o.timing)
    out["timing"] = timing;
  return out;
}

json cmd_icalls(const Options &o) {
  ir::Program p = load(o);
  std::set<std::string> al;
  if (o.allocators_given) {
    al = given_allocators(p, o);
  } else {
    auto oracle = make_oracle(o);
    al = detect(p, *oracle, o).al.names();
  }
  auto bt = pta::resolve_indirect_calls(run_analysis(p, pta::Mode::Baseline, {}));
  auto et = pta::resolve_indirect_calls(run_analysis(p, pta::Mode::Enhanced, al));
  json out = metrics::to_json(metrics::icall_metrics(bt, et));
  json sites = json::array();
  for (const auto &[site, targets] : bt) {
    auto e = et.find(site);
    sites.push_back({{"site", site.str()},
                     {"baseline", targets},
                     {"enhanced", e == et.end() ? std::set<std::string>{} : e->second}});
  }
  out["sites"] = sites;
  return out;
}

std::string cmd_gen(const Options &o) {
  benchgen::GenSpec spec = o.gen;
  spec.forced_error_link = o.forced_error_link;
  benchgen::Generated g;
  try {
    g = benchgen::generate(spec);
  } catch (const std::invalid_argument &e) {
    throw Failure(kInputError, "usage", e.what());
  }
  if (!o.truth_path.empty())
    write_file(o.truth_path, g.truth.to_json().dump(2) + "\n");
  if (!o.annotations_path.empty()) {
    json a = json::object();
    for (const auto &[n, d] : g.truth.annotations())
      a[n] = d == oracle::Decision::Ignorable ? "ignorable" : "not_ignorable";
    write_file(o.annotations_path, a.dump(2) + "\n");
  }
  return ir::print_program(g.program);
}

json cmd_interpret(const Options &o) {
  ir::Program p = load(o);
  try {
    return benchgen::interpret(p, o.entry, o.budget).to_json();
  } catch (const benchgen::BudgetExceeded &e) {
    throw Failure(kFailure, "budget", e.what());
  } catch (const benchgen::NotExecutable &e) {
    throw Failure(kInputError, "not-executable", e.what());
  } catch (const std::invalid_argument &e) {
    throw Failure(kInputError, "usage", e.what());
  }
}

void add_input(CLI::App *cmd, Options &o) {
  cmd->add_option("input", o.input, "IR file")->required();
  cmd->add_option("--out,-o", o.out, "Write the report here instead of stdout");
}

void add_oracle(CLI::App *cmd, Options &o) {
  cmd->add_option("--oracle", o.oracle, "conservative | annotations=PATH | remote");
  cmd->add_option("--temperature", o.temperature, "Remote sampling temperature (0.4, 0.6, 0.8)");
  cmd->add_option("--queries", o.queries, "Votes per remote verdict (odd)");
  cmd->add_option("--model", o.model, "Remote model name");
  cmd->add_option("--endpoint", o.endpoint, "Remote chat-completions URL");
  cmd->add_option("--timeout", o.timeout, "Remote request timeout in seconds");
  cmd->add_option("--retries", o.retries, "Remote retries per request");
  cmd->add_option("--max-in-flight", o.max_in_flight, "Concurrent remote requests");
  cmd->add_option("--cassette-record", o.cassette_record, "Record remote replies to this file");
  cmd->add_option("--cassette-replay", o.cassette_replay, "Answer from recorded replies");
  cmd->add_flag("--signature-icalls", o.signature_icalls, "Resolve indirect calls by signature during detection");
}

void add_allocators(CLI::App *cmd, Options &o) {
  cmd->add_option("--allocators", o.allocators, "Use these allocators instead of detecting (seeds always included)")
      ->delimiter(',');
}

void emit(std::ostream &out, const Options &o, const std::string &text) {
  if (o.out.empty())
    out << text;
  else
    write_file(o.out, text);
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  Options o;
  CLI::App app{"Allocation-wrapper detection and points-to precision toolkit", "scaf"};
  app.require_subcommand(1);

  auto *validate = app.add_subcommand("validate", "Parse and check an IR file");
  add_input(validate, o);

  auto *detect_cmd = app.add_subcommand("detect", "Detect side-effect-free allocation wrappers");
  add_input(detect_cmd, o);
  add_oracle(detect_cmd, o);
  detect_cmd->add_flag("--timing", o.timing, "Include wall-clock timing");

  auto *analyze_cmd = app.add_subcommand("analyze", "Run one points-to analysis");
  add_input(analyze_cmd, o);
  add_oracle(analyze_cmd, o);
  add_allocators(analyze_cmd, o);
  analyze_cmd->add_option("--mode", o.mode, "baseline | enhanced | 1ctx");

  auto *compare = app.add_subcommand("compare", "Precision metrics of each strategy against the baseline");
  add_input(compare, o);
  add_oracle(compare, o);
  add_allocators(compare, o);
  compare->add_flag("--one-callsite", o.one_callsite, "Add a 1-callsite row");
  compare->add_flag("--timing", o.timing, "Include wall-clock per phase");

  auto *icalls = app.add_subcommand("icalls", "Indirect-call target refinement");
  add_input(icalls, o);
  add_oracle(icalls, o);
  add_allocators(icalls, o);

  auto *gen = app.add_subcommand("gen", "Generate a labeled program");
  gen->add_option("--seed", o.gen.seed);
  gen->add_option("--functions", o.gen.functions, "Non-entry functions (0: chain only)");
  gen->add_option("--depth", o.gen.wrapper_chain_depth, "Wrapper chain depth");
  gen->add_option("--side-effect-rate", o.gen.side_effect_rate);
  gen->add_option("--error-path-rate", o.gen.error_path_rate);
  gen->add_option("--icall-rate", o.gen.icall_rate);
  gen->add_option("--executable", o.gen.executable_subset, "Restrict to the executable subset (default true)");
  gen->add_option("--forced-error-link", o.forced_error_link, "Chain link (0 = FuncA) given an error path");
  gen->add_option("--truth", o.truth_path, "Write ground-truth labels here");
  gen->add_option("--annotations", o.annotations_path, "Write a ground-truth oracle annotation file here");
  gen->add_option("--out,-o", o.out, "Write the IR here instead of stdout");

  auto *interp = app.add_subcommand("interpret", "Execute an executable-subset program");
  add_input(interp, o);
  interp->add_option("--entry", o.entry);
  interp->add_option("--budget", o.budget, "Step budget");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp &) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError &e) {
    out << json{{"error", {{"kind", "usage"}, {"message", e.what()}}}}.dump(2) << "\n";
    err << app.help();
    return kInputError;
  }
  for (auto *a : {analyze_cmd, compare, icalls})
    if (a->parsed())
      o.allocators_given = a->count("--allocators") > 0;

  int code = kOk;
  try {
    if (validate->parsed())
      emit(out, o, cmd_validate(o, code).dump(2) + "\n");
    else if (detect_cmd->parsed())
      emit(out, o, cmd_detect(o).dump(2) + "\n");
    else if (analyze_cmd->parsed())
      emit(out, o, cmd_analyze(o).dump(2) + "\n");
    else if (compare->parsed())
      emit(out, o, cmd_compare(o).dump(2) + "\n");
    else if (icalls->parsed())
      emit(out, o, cmd_icalls(o).dump(2) + "\n");
    else if (gen->parsed())
      emit(out, o, cmd_gen(o));
    else if (interp->parsed())
      emit(out, o, cmd_interpret(o).dump(2) + "\n");
    return code;
  } catch (const Failure &f) {
    out << json{{"error", {{"kind", f.kind}, {"message", f.what()}}}}.dump(2) << "\n";
    return f.code;
  } catch (const std::exception &e) {
    out << json{{"error", {{"kind", "internal"}, {"message", e.what()}}}}.dump(2) << "\n";
    return kFailure;
  }
}

} // namespace scaf::cli
