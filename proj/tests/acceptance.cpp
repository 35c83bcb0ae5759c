// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <sstream>

#include "mock_llm.hpp"
#include "reference_solver.hpp"
#include "scaf/benchgen/benchgen.hpp"
#include "scaf/cafd/cafd.hpp"
#include "scaf/cli/cli.hpp"
#include "scaf/pta/context.hpp"
#include "test_util.hpp"

using namespace scaf;
using nlohmann::json;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string &what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

struct Cli {
  int code;
  std::string out;
  json report() const { return json::parse(out); }
};

Cli cli_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str()};
}

std::string fx(const char *name) { return test::fixture_path(name); }

std::set<std::string> detected(const ir::Program &p, oracle::IgnorabilityOracle &o) {
  std::set<std::string> out;
  for (const auto &[n, prov] : cafd::detect_scafs(p, o).al.members())
    if (prov != cafd::Provenance::Seed)
      out.insert(n);
  return out;
}

std::size_t defined_count(const ir::Program &p) {
  std::size_t n = 0;
  for (const auto &[name, fn] : p.functions)
    n += fn.is_defined();
  return n;
}

Outcome fig2_exactness() {
  Outcome o;
  auto r = cli_run({"compare", fx("fig2.ir")});
  o.check(r.code == 0, "compare exited " + std::to_string(r.code));
  if (!o.ok)
    return o;
  auto report = r.report();
  for (const auto &row : report["rows"]) {
    if (row["strategy"] != "cafd")
      continue;
    const auto &m = row["metrics"];
    o.check(m["thoc"] == json::array({1, 2}), "THOC " + m["thoc"].dump());
    o.check(m["prr1"] == 66.7, "PRR1 " + m["prr1"].dump());
    o.check(m["pc2"].is_null() && m["prr2"].is_null(), "PC2/PRR2 not null");
    o.check(m["anc"] == json::array({2.0, 0.0}), "ANC " + m["anc"].dump());
    o.check(m["arr"] == 100.0, "ARR " + m["arr"].dump());
    return o;
  }
  o.check(false, "no cafd row");
  return o;
}

Outcome lalloc_pattern() {
  Outcome o;
  auto a = cli_run({"detect", fx("lalloc.ir"), "--oracle", "annotations=" + fx("lalloc_annotations.json")});
  o.check(a.code == 0, "annotated detect failed");
  if (!o.ok)
    return o;
  auto j = a.report();
  o.check(j["num2"] == 1, "num2 " + j["num2"].dump());
  bool oracle_assisted = false;
  for (const auto &m : j["allocators"])
    oracle_assisted = oracle_assisted || (m["name"] == "lalloc" && m["provenance"] == "oracle");
  o.check(oracle_assisted, "lalloc not oracle-assisted");
  auto c = cli_run({"detect", fx("lalloc.ir")}).report();
  for (const auto &m : c["allocators"])
    o.check(m["name"] != "lalloc", "conservative oracle accepted lalloc");
  return o;
}

Outcome chain_propagation() {
  Outcome o;
  for (std::size_t k = 1; k <= 5; ++k) {
    benchgen::GenSpec spec;
    spec.seed = k;
    spec.wrapper_chain_depth = k;
    spec.forced_error_link = k / 2;
    auto g = benchgen::generate(spec);
    std::set<std::string> below, all;
    for (std::size_t i = 0; i < k; ++i) {
      all.insert(benchgen::chain_link(i));
      if (i > k / 2)
        below.insert(benchgen::chain_link(i));
    }
    oracle::ConservativeOracle cons;
    o.check(detected(g.program, cons) == below, "conservative set differs at k=" + std::to_string(k));
    oracle::AnnotationOracle ignorable(g.truth.annotations());
    o.check(detected(g.program, ignorable) == all, "all-ignorable set differs at k=" + std::to_string(k));
  }
  return o;
}

Outcome solver_equivalence() {
  Outcome o;
  std::size_t programs = 0;
  for (std::uint64_t seed = 1; seed <= 220; ++seed) {
    auto p = benchgen::random_program(seed);
    ++programs;
    oracle::ConservativeOracle cons;
    auto al = cafd::detect_scafs(p, cons).al.names();
    for (auto mode : {pta::Mode::Baseline, pta::Mode::Enhanced, pta::Mode::OneCallsite}) {
      auto prog = mode == pta::Mode::OneCallsite ? pta::one_callsite_transform(p) : p;
      auto cs = pta::generate_constraints(prog, mode, al);
      o.check(pta::solve(cs) == test::naive_solve(cs),
              "seed " + std::to_string(seed) + " mode " + pta::to_string(mode));
    }
  }
  o.check(programs >= 200, "too few programs");
  return o;
}

Outcome dynamic_soundness() {
  Outcome o;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    auto p = benchgen::random_program(seed, {60, true});
    oracle::ConservativeOracle cons;
    auto al = cafd::detect_scafs(p, cons).al.names();
    auto facts = benchgen::interpret(p, "main", 100000);
    for (auto mode : {pta::Mode::Baseline, pta::Mode::Enhanced, pta::Mode::OneCallsite}) {
      auto v = benchgen::soundness_violations(facts, pta::analyze(p, mode, al));
      o.check(v.empty(), "seed " + std::to_string(seed) + " " + pta::to_string(mode) + ": " +
                             (v.empty() ? "" : v.front()));
    }
  }
  return o;
}

Outcome precision_recall() {
  Outcome o;
  std::size_t truth_tp = 0, truth_fp = 0, truth_fn = 0, cons_tp = 0, cons_fp = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    for (bool exec : {true, false}) {
      benchgen::GenSpec spec{seed, 12, 1 + seed % 5, 0.5, 0.4, 0.5, exec, std::nullopt};
      auto g = benchgen::generate(spec);
      auto scafs = g.truth.with(benchgen::Label::SCaf);
      oracle::AnnotationOracle truth(g.truth.annotations());
      auto t = detected(g.program, truth);
      for (const auto &n : t)
        (scafs.contains(n) ? truth_tp : truth_fp)++;
      for (const auto &n : scafs)
        truth_fn += !t.contains(n);
      oracle::ConservativeOracle cons;
      for (const auto &n : detected(g.program, cons))
        (scafs.contains(n) ? cons_tp : cons_fp)++;
    }
  }
  o.check(truth_tp > 0 && cons_tp > 0, "corpus has no detections");
  o.check(truth_fp == 0, "ground-truth oracle precision below 1.0");
  o.check(truth_fn == 0, "ground-truth oracle recall below 1.0");
  o.check(cons_fp == 0, "conservative oracle accepted a non-S-CAF");
  return o;
}

Outcome icall_refinement() {
  Outcome o;
  auto r = cli_run({"icalls", fx("icall.ir")});
  o.check(r.code == 0, "icalls failed");
  if (!o.ok)
    return o;
  auto j = r.report();
  o.check(j["tn"] == 2 && j["on"] == 2 && j["oa"] == 2.0 && j["ea"] == 1.0, j.dump());
  for (const auto &s : j["sites"]) {
    o.check(s["baseline"] == json::array({"func1", "func2"}), "baseline " + s["baseline"].dump());
    o.check(s["enhanced"].size() == 1, "enhanced " + s["enhanced"].dump());
  }
  return o;
}

Outcome determinism_monotonicity() {
  Outcome o;
  std::vector<std::vector<std::string>> runs = {
      {"detect", fx("fig2.ir")},
      {"detect", fx("lalloc.ir"), "--oracle", "annotations=" + fx("lalloc_annotations.json")},
      {"detect", fx("chain3.ir"), "--oracle", "annotations=" + fx("chain3_ignorable.json")},
      {"detect", fx("two_wrappers.ir")},
  };
  for (const auto &args : runs)
    o.check(cli_run(args).out == cli_run(args).out, "report differs for " + args[1]);

  auto monotone = [&](const ir::Program &p, oracle::IgnorabilityOracle &oracle, const std::string &label) {
    auto r = cafd::detect_scafs(p, oracle);
    for (std::size_t i = 1; i < r.iterations.size(); ++i)
      o.check(r.iterations[i - 1].al_size <= r.iterations[i].al_size, "AL shrank in " + label);
    o.check(r.iterations.size() <= defined_count(p) + 1, "too many iterations in " + label);
  };
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    benchgen::GenSpec spec{seed, 10, 1 + seed % 5, 0.5, 0.5, 0.5, false, std::nullopt};
    auto g = benchgen::generate(spec);
    oracle::AnnotationOracle truth(g.truth.annotations());
    monotone(g.program, truth, "generated seed " + std::to_string(seed));
    auto p = benchgen::random_program(seed);
    oracle::ConservativeOracle cons;
    monotone(p, cons, "fuzz seed " + std::to_string(seed));
  }
  return o;
}

Outcome remote_protocol() {
  Outcome o;
  auto detect = [](const test::MockLlm &mock, std::vector<std::string> extra = {}) {
    std::vector<std::string> args = {"detect", fx("lalloc.ir"), "--oracle", "remote", "--endpoint",
                                     mock.endpoint(), "--queries", "5", "--max-in-flight", "1"};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli_run(args);
  };
  {
    test::MockLlm mock({"ANSWER: YES", "ANSWER: NO", "ANSWER: YES", "ANSWER: NO", "ANSWER: YES"});
    auto r = detect(mock);
    o.check(r.code == 0, "3-of-5 run failed");
    if (!o.ok)
      return o;
    auto j = r.report();
    o.check(j["num2"] == 1, "3-of-5 YES did not yield an accepted allocator");
    auto ledger = mock.ledger();
    const auto &c = j["oracle_counters"];
    o.check(c["QN"] == ledger.requests && c["IT"] == ledger.prompt_tokens && c["OT"] == ledger.completion_tokens,
            "counters " + c.dump() + " differ from the ledger");
  }
  {
    test::MockLlm mock({"ANSWER: YES", "maybe", "ANSWER: YES", "<garbled>", "ANSWER: NO"});
    auto r = detect(mock);
    o.check(r.code == 0 && r.report()["num2"] == 0, "unparsable replies were not counted as NO");
  }
  {
    test::MockLlm mock({"ANSWER: YES"});
    mock.fail_status = 500;
    auto r = detect(mock, {"--retries", "1"});
    o.check(r.code == cli::kOracleError, "transport failure exited " + std::to_string(r.code));
    o.check(r.code != 0 && r.code != cli::kInputError && r.code != cli::kFailure, "exit code is not distinct");
  }
  return o;
}

struct Criterion {
  int id;
  const char *name;
  std::function<Outcome()> body;
  double limit_seconds;
};

} // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "fig2 fixture exactness", fig2_exactness, 1},
      {2, "lalloc pattern", lalloc_pattern, 1},
      {3, "wrapper-chain propagation", chain_propagation, 0},
      {4, "solver vs reference on 220 fuzz programs", solver_equivalence, 60},
      {5, "dynamic soundness on 500 executable programs", dynamic_soundness, 120},
      {6, "synthetic precision/recall", precision_recall, 0},
      {7, "icall refinement fixture", icall_refinement, 0},
      {8, "determinism and monotonicity", determinism_monotonicity, 0},
      {9, "remote oracle protocol", remote_protocol, 0},
  };
  bool all = true;
  for (const auto &c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception &e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.limit_seconds > 0 && secs >= c.limit_seconds)
      o.check(false, "took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_seconds) + " s");
    all = all && o.ok;
    std::ostringstream line;
    line << (o.ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " (" << secs << " s)";
    if (!o.ok)
      line << " - " << o.detail;
    std::cout << line.str() << std::endl;
  }
  return all ? 0 : 1;
}
