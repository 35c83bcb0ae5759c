#include <gtest/gtest.h>

#include "reference_solver.hpp"
#include "scaf/benchgen/benchgen.hpp"
#include "scaf/cafd/cafd.hpp"
#include "scaf/ir/text.hpp"
#include "scaf/ir/validate.hpp"
#include "scaf/pta/context.hpp"
#include "test_util.hpp"

using namespace scaf;
using namespace scaf::benchgen;

namespace {

std::set<std::string> detected(const ir::Program &p, oracle::IgnorabilityOracle &o) {
  std::set<std::string> out;
  for (const auto &[n, prov] : cafd::detect_scafs(p, o).al.members())
    if (prov != cafd::Provenance::Seed)
      out.insert(n);
  return out;
}

std::size_t statement_count(const ir::Program &p) {
  std::size_t n = 0;
  for (const auto &[name, fn] : p.functions)
    n += fn.body.size();
  return n;
}

ir::Program fig2_with_main() {
  return ir::parse_program(test::read_fixture("fig2.ir") +
                           "\nentry main\nfunc main(n:scalar) {\n  x = call array_create(n)\n"
                           "  y = call make_bare_word(n, x)\n  ret\n}\n");
}

} // namespace

TEST(Generate, DepthThreeChain) {
  GenSpec spec;
  spec.seed = 1;
  spec.wrapper_chain_depth = 3;
  auto g = generate(spec);
  EXPECT_TRUE(ir::validate(g.program).empty());
  EXPECT_EQ(g.truth.with(Label::SCaf), (std::set<std::string>{"FuncA", "FuncB", "FuncC"}));
  const auto &a = g.program.at("FuncA").body.front();
  const auto &c = g.program.at("FuncC").body.front();
  EXPECT_EQ(a.as<ir::Call>()->callee, "FuncB");
  EXPECT_EQ(g.program.at("FuncB").body.front().as<ir::Call>()->callee, "FuncC");
  EXPECT_EQ(c.as<ir::Call>()->callee, "malloc");
  EXPECT_EQ(g.program.entry, "main");
}

TEST(Generate, NoChainMeansNoWrappers) {
  GenSpec spec;
  spec.seed = 5;
  auto g = generate(spec);
  EXPECT_EQ(g.program.functions.size(), 4u); // main plus three externals
  EXPECT_TRUE(g.truth.with(Label::SCaf).empty());
  oracle::ConservativeOracle o;
  EXPECT_TRUE(detected(g.program, o).empty());
}

TEST(Generate, Deterministic) {
  GenSpec spec;
  spec.seed = 42;
  spec.functions = 12;
  spec.wrapper_chain_depth = 4;
  spec.side_effect_rate = 0.5;
  spec.error_path_rate = 0.5;
  spec.icall_rate = 0.5;
  spec.executable_subset = false;
  EXPECT_EQ(ir::print_program(generate(spec).program), ir::print_program(generate(spec).program));
  EXPECT_EQ(generate(spec).truth.labels, generate(spec).truth.labels);
}

TEST(Generate, ChainLinkNames) {
  EXPECT_EQ(chain_link(0), "FuncA");
  EXPECT_EQ(chain_link(25), "FuncZ");
  EXPECT_EQ(chain_link(26), "FuncAA");
}

TEST(Generate, RejectsInfeasibleSpecs) {
  GenSpec spec;
  spec.functions = 2;
  spec.wrapper_chain_depth = 3;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.functions = 0;
  spec.forced_error_link = 3;
  EXPECT_THROW(generate(spec), std::invalid_argument);
  spec.forced_error_link.reset();
  spec.side_effect_rate = 1.5;
  EXPECT_THROW(generate(spec), std::invalid_argument);
}

TEST(Generate, GroundTruthJson) {
  GenSpec spec;
  spec.wrapper_chain_depth = 1;
  auto j = generate(spec).truth.to_json();
  EXPECT_EQ(j, (nlohmann::json{{"FuncA", "S-CAF"}, {"main", "non-allocator"}}));
}

TEST(Generate, ChainBreaksAtTheForcedLink) {
  for (std::size_t k = 1; k <= 5; ++k) {
    GenSpec spec;
    spec.seed = k;
    spec.wrapper_chain_depth = k;
    spec.forced_error_link = k / 2;
    auto g = generate(spec);
    std::set<std::string> below, all;
    for (std::size_t i = 0; i < k; ++i) {
      all.insert(chain_link(i));
      if (i > k / 2)
        below.insert(chain_link(i));
    }
    oracle::ConservativeOracle cons;
    EXPECT_EQ(detected(g.program, cons), below) << "k=" << k;
    oracle::AnnotationOracle truth(g.truth.annotations());
    EXPECT_EQ(detected(g.program, truth), all) << "k=" << k;
  }
}

class Labels : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(Labels, GroundTruthOracleRecoversExactlyTheSCafs) {
  for (bool exec : {true, false}) {
    GenSpec spec;
    spec.seed = GetParam();
    spec.functions = 10;
    spec.wrapper_chain_depth = 1 + GetParam() % 5;
    spec.side_effect_rate = 0.5;
    spec.error_path_rate = 0.4;
    spec.icall_rate = 0.5;
    spec.executable_subset = exec;
    auto g = generate(spec);
    ASSERT_TRUE(ir::validate(g.program).empty()) << ir::print_program(g.program);
    oracle::AnnotationOracle truth(g.truth.annotations());
    EXPECT_EQ(detected(g.program, truth), g.truth.with(Label::SCaf));
    oracle::ConservativeOracle cons;
    for (const auto &name : detected(g.program, cons))
      EXPECT_EQ(g.truth.labels.at(name), Label::SCaf) << name;
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, Labels, ::testing::Range<std::uint64_t>(1, 21));

TEST(Fuzz, ValidBoundedAndRoundTrips) {
  for (std::uint64_t seed = 1; seed <= 150; ++seed) {
    for (bool exec : {false, true}) {
      auto p = random_program(seed, {60, exec});
      EXPECT_TRUE(ir::validate(p).empty()) << ir::print_program(p);
      EXPECT_LE(statement_count(p), 60u);
      std::string text = ir::print_program(p);
      EXPECT_EQ(ir::print_program(ir::parse_program(text)), text);
      if (exec) {
        for (const auto &[name, fn] : p.functions) {
          for (const auto &s : fn.body) {
            EXPECT_NE(s.kind(), ir::StmtKind::Phi);
            if (const auto *c = s.as<ir::Call>()) {
              EXPECT_FALSE(c->is_indirect());
            }
          }
        }
      }
    }
  }
}

TEST(Fuzz, CoversEveryStatementKind) {
  std::set<ir::StmtKind> seen;
  bool icall = false;
  for (std::uint64_t seed = 1; seed <= 50; ++seed)
    for (const auto &[name, fn] : random_program(seed).functions)
      for (const auto &s : fn.body) {
        seen.insert(s.kind());
        if (const auto *c = s.as<ir::Call>())
          icall = icall || c->is_indirect();
      }
  EXPECT_EQ(seen.size(), 9u);
  EXPECT_TRUE(icall);
}

TEST(Fuzz, SolverMatchesReference) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto p = random_program(seed);
    for (auto mode : {pta::Mode::Baseline, pta::Mode::OneCallsite}) {
      auto prog = mode == pta::Mode::OneCallsite ? pta::one_callsite_transform(p) : p;
      auto cs = pta::generate_constraints(prog, mode);
      EXPECT_EQ(pta::solve(cs), test::naive_solve(cs)) << "seed " << seed;
    }
  }
}

TEST(Fuzz, SeedsOnlyEnhancementIsBaseline) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto p = random_program(seed);
    auto base = pta::analyze(p, pta::Mode::Baseline);
    auto enh = pta::analyze(p, pta::Mode::Enhanced, {"malloc"});
    EXPECT_EQ(base.solution, enh.solution) << "seed " << seed;
  }
}

TEST(Fuzz, SignatureAndPointsToResolutionAgreeWithoutIcalls) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    auto p = random_program(seed, {60, true});
    oracle::ConservativeOracle a, b;
    auto x = cafd::detect_scafs(p, a);
    auto y = cafd::detect_scafs(p, b, {true, true});
    EXPECT_EQ(x.al, y.al) << "seed " << seed;
  }
}

TEST(Interpret, Fig2KeepsTheTwoWordsApart) {
  auto facts = interpret(fig2_with_main(), "main", 1000);
  auto pairs = facts.alias_pairs();
  EXPECT_FALSE(pairs.contains({"array_create.r", "make_bare_word.w"}));
  EXPECT_TRUE(pairs.contains({"array_create.r", "main.x"}));
  EXPECT_TRUE(pairs.contains({"make_bare_word.w", "xmalloc.temp"}));
  EXPECT_EQ(facts.objects.size(), 2u);
}

TEST(Interpret, CopyAliases) {
  auto p = ir::parse_program("extern malloc kind=alloc_seed\nfunc main() {\n  p = call malloc()\n  q = copy p\n  ret\n}\n");
  auto facts = interpret(p, "main", 10);
  EXPECT_EQ(facts.alias_pairs(), (std::set<std::pair<std::string, std::string>>{{"main.p", "main.q"}}));
  EXPECT_EQ(facts.to_json()["values"]["main.q"], nlohmann::json::array({"#0"}));
}

TEST(Interpret, StoreLoadAndFields) {
  auto p = ir::parse_program("extern malloc kind=alloc_seed\nfunc main() {\n  a = call malloc()\n"
                             "  b = call malloc()\n  f = field a, next\n  g = field f, other\n"
                             "  store g, b\n  c = load g\n  e = load f\n  store g, null\n  d = load g\n  ret\n}\n");
  auto facts = interpret(p, "main", 100);
  auto pairs = facts.alias_pairs();
  EXPECT_TRUE(pairs.contains({"main.b", "main.c"}));
  // g is a.other, not a.next.other, and f is a different cell of a.
  EXPECT_FALSE(pairs.contains({"main.f", "main.g"}));
  EXPECT_EQ(facts.to_json()["values"]["main.g"], nlohmann::json::array({"#0.other"}));
  for (const auto &v : facts.values) {
    EXPECT_NE(v.name, "d");
    EXPECT_NE(v.name, "e");
  }
}

TEST(Interpret, BudgetAndUnsupportedConstructs) {
  auto loop = ir::parse_program("func main() {\n  x = call main()\n  ret x\n}\n");
  EXPECT_THROW(interpret(loop, "main", 100), BudgetExceeded);
  auto phi = ir::parse_program("func main(a:ptr) {\n  b = phi a, a\n  ret\n}\n");
  EXPECT_THROW(interpret(phi, "main", 100), NotExecutable);
  EXPECT_THROW(interpret(phi, "nope", 100), std::invalid_argument);
}

TEST(Interpret, Fig2IsCoveredByEveryMode) {
  auto p = fig2_with_main();
  oracle::ConservativeOracle o;
  auto al = cafd::detect_scafs(p, o).al.names();
  auto facts = interpret(p, "main", 1000);
  for (auto mode : {pta::Mode::Baseline, pta::Mode::Enhanced, pta::Mode::OneCallsite})
    EXPECT_TRUE(soundness_violations(facts, pta::analyze(p, mode, al)).empty());
}

TEST(Interpret, ViolationsAreReported) {
  // An allocator list that wrongly includes a function storing its result away.
  auto p = ir::parse_program("entry main\nextern malloc kind=alloc_seed\n"
                             "func leak(g:ptr) {\n  m = call malloc()\n  gf = field g, slot\n  store gf, m\n  ret m\n}\n"
                             "func main() {\n  h = call malloc()\n  x = call leak(h)\n  hf = field h, slot\n"
                             "  y = load hf\n  ret\n}\n");
  auto facts = interpret(p, "main", 100);
  EXPECT_FALSE(soundness_violations(facts, pta::analyze(p, pta::Mode::Enhanced, {"malloc", "leak"})).empty());
  EXPECT_TRUE(soundness_violations(facts, pta::analyze(p, pta::Mode::Baseline)).empty());
}

TEST(Interpret, FuzzedProgramsAreCovered) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    auto p = random_program(seed, {60, true});
    oracle::ConservativeOracle o;
    auto al = cafd::detect_scafs(p, o).al.names();
    auto facts = interpret(p, "main", 100000);
    for (auto mode : {pta::Mode::Baseline, pta::Mode::Enhanced, pta::Mode::OneCallsite}) {
      auto v = soundness_violations(facts, pta::analyze(p, mode, al));
      EXPECT_TRUE(v.empty()) << "seed " << seed << " mode " << pta::to_string(mode) << ": " << v.front();
    }
  }
}

TEST(Interpret, GeneratedExecutableProgramsAreCovered) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    GenSpec spec{seed, 10, 1 + seed % 4, 0.5, 0.5, 0, true, std::nullopt};
    auto g = generate(spec);
    oracle::AnnotationOracle truth(g.truth.annotations());
    auto al = cafd::detect_scafs(g.program, truth).al.names();
    auto facts = interpret(g.program, "main", 100000);
    for (auto mode : {pta::Mode::Baseline, pta::Mode::Enhanced, pta::Mode::OneCallsite}) {
      auto v = soundness_violations(facts, pta::analyze(g.program, mode, al));
      EXPECT_TRUE(v.empty()) << "seed " << seed << ": " << v.front();
    }
  }
}
