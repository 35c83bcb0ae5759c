#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "mock_llm.hpp"
#include "scaf/ir/text.hpp"
#include "scaf/oracle/oracle.hpp"
#include "test_util.hpp"

using namespace scaf;
using namespace scaf::oracle;

namespace {

SideEffectQuery lalloc_query() {
  ir::Program p = test::load_fixture("lalloc.ir");
  const ir::Function &f = p.at("lalloc");
  return make_query(f, {{"lalloc", 6}, {"lalloc", 1}, {"lalloc", 4}, {"lalloc", 5}});
}

std::vector<Vote> votes(std::initializer_list<const char *> replies) {
  std::vector<Vote> out;
  for (const char *r : replies) {
    Vote v;
    v.reply = r;
    auto a = parse_answer(r);
    v.parsed = a.has_value();
    v.yes = a.value_or(false);
    out.push_back(v);
  }
  return out;
}

RemoteConfig remote_config(const std::string &endpoint) {
  RemoteConfig c;
  c.endpoint = endpoint;
  c.model = "mock";
  c.retries = 1;
  c.timeout_seconds = 5;
  return c;
}

class FakeTransport : public Transport {
public:
  explicit FakeTransport(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string post(const std::string &) override {
    std::lock_guard lock(m_);
    if (fail)
      throw TransportError("down");
    std::string r = replies_[n_++ % replies_.size()];
    return nlohmann::json({{"choices", {{{"message", {{"content", r}}}}}}}).dump();
  }
  bool fail = false;

private:
  std::mutex m_;
  std::vector<std::string> replies_;
  std::size_t n_ = 0;
};

} // namespace

TEST(Prompt, LallocListsFlaggedSitesInOrder) {
  SideEffectQuery q = lalloc_query();
  ASSERT_EQ(q.flagged_sites.size(), 4u);
  std::string prompt = render_prompt(q);
  EXPECT_NE(prompt.find("Determine whether all such statements reside within error-handling paths"),
            std::string::npos);
  EXPECT_NE(prompt.find("FUNCTION: lalloc"), std::string::npos);
  EXPECT_NE(prompt.find("void *lalloc(size_t size, int message)"), std::string::npos);
  std::vector<std::string> lines = {"[lalloc:1] call iemsg()", "[lalloc:4] call clear_sb_text()",
                                    "[lalloc:5] again:scalar = call mf_release_all()",
                                    "[lalloc:6] call do_outofmem_msg(size)"};
  std::size_t pos = prompt.find("SIDE-EFFECT STATEMENTS:");
  ASSERT_NE(pos, std::string::npos);
  for (const auto &l : lines) {
    std::size_t at = prompt.find(l, pos);
    ASSERT_NE(at, std::string::npos) << l;
    pos = at;
  }
  EXPECT_NE(prompt.find("ANSWER: YES"), std::string::npos);
  EXPECT_NE(prompt.find("ANSWER: NO"), std::string::npos);
}

TEST(Prompt, Deterministic) {
  EXPECT_EQ(render_prompt(lalloc_query()), render_prompt(lalloc_query()));
  EXPECT_EQ(prompt_hash(render_prompt(lalloc_query())).size(), 16u);
}

TEST(Prompt, FallsBackToIrBody) {
  ir::Program p = test::load_fixture("fig2.ir");
  const ir::Function &f = p.at("make_bare_word");
  std::string prompt = render_prompt(make_query(f, {{"make_bare_word", 3}}));
  EXPECT_NE(prompt.find("SOURCE:\n" + ir::print_body(f)), std::string::npos);
  EXPECT_NE(prompt.find("[make_bare_word:3] store wf, word"), std::string::npos);
}

TEST(Answer, Parsing) {
  EXPECT_EQ(parse_answer("ANSWER: YES"), true);
  EXPECT_EQ(parse_answer("reasoning\nanswer: no"), false);
  EXPECT_EQ(parse_answer("ANSWER: NO\nwait\nAnswer: Yes."), true);
  EXPECT_EQ(parse_answer("**ANSWER: YES**"), true);
  EXPECT_EQ(parse_answer("I think yes"), std::nullopt);
  EXPECT_EQ(parse_answer("ANSWER: maybe"), std::nullopt);
  EXPECT_EQ(parse_answer(""), std::nullopt);
}

TEST(Vote, Majority) {
  EXPECT_EQ(majority(votes({"ANSWER: YES", "ANSWER: YES", "ANSWER: NO", "ANSWER: YES", "ANSWER: NO"})),
            Decision::Ignorable);
  EXPECT_EQ(majority(votes({"ANSWER: YES", "ANSWER: YES", "garbage", "ANSWER: NO", "ANSWER: NO"})),
            Decision::NotIgnorable);
  EXPECT_EQ(majority(votes({"x", "y", "z"})), Decision::NotIgnorable);
}

TEST(Vote, PermutationInvariant) {
  auto v = votes({"ANSWER: YES", "ANSWER: NO", "ANSWER: YES", "junk", "ANSWER: YES"});
  Decision d = majority(v);
  std::sort(v.begin(), v.end(), [](const Vote &a, const Vote &b) { return a.reply < b.reply; });
  do {
    EXPECT_EQ(majority(v), d);
  } while (std::next_permutation(v.begin(), v.end(), [](const Vote &a, const Vote &b) { return a.reply < b.reply; }));
}

TEST(Backends, ConservativeIsConstant) {
  ConservativeOracle o;
  for (int i = 0; i < 3; ++i) {
    Verdict v = o.classify(lalloc_query());
    EXPECT_EQ(v.value, Decision::NotIgnorable);
    EXPECT_EQ(v.votes.size(), 1u);
  }
  EXPECT_EQ(o.totals().queries, 0u);
}

TEST(Backends, Annotations) {
  AnnotationOracle o(AnnotationOracle::read_file(test::fixture_path("lalloc_annotations.json")));
  Verdict v = o.classify(lalloc_query());
  EXPECT_EQ(v.value, Decision::Ignorable);
  EXPECT_FALSE(v.missing_annotation);
  SideEffectQuery other = lalloc_query();
  other.function_name = "other";
  Verdict m = o.classify(other);
  EXPECT_EQ(m.value, Decision::NotIgnorable);
  EXPECT_TRUE(m.missing_annotation);
  EXPECT_THROW(AnnotationOracle::parse("{\"f\": \"yes\"}"), std::runtime_error);
  EXPECT_THROW(AnnotationOracle::parse("[1]"), std::runtime_error);
  EXPECT_THROW(AnnotationOracle::read_file("/nonexistent/file.json"), std::runtime_error);
}

TEST(Config, Checks) {
  RemoteConfig c = remote_config("http://127.0.0.1:1/x");
  EXPECT_NO_THROW(c.check());
  c.query_count = 4;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c.query_count = 3;
  c.temperature = 0.5;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c.temperature = 0.8;
  c.endpoint.clear();
  EXPECT_THROW(c.check(), std::invalid_argument);
}

TEST(Config, Environment) {
  setenv("SCAF_ORACLE_ENDPOINT", "http://example.invalid/v1", 1);
  setenv("SCAF_ORACLE_MODEL", "m1", 1);
  RemoteConfig c;
  c.apply_environment();
  EXPECT_EQ(c.endpoint, "http://example.invalid/v1");
  EXPECT_EQ(c.model, "m1");
  unsetenv("SCAF_ORACLE_ENDPOINT");
  unsetenv("SCAF_ORACLE_MODEL");
}

TEST(Remote, MajorityOverMockEndpoint) {
  test::MockLlm mock({"ANSWER: YES", "ANSWER: YES", "ANSWER: NO", "ANSWER: YES", "ANSWER: NO"});
  RemoteOracle o(remote_config(mock.endpoint()), make_http_transport(remote_config(mock.endpoint())));
  Verdict v = o.classify(lalloc_query());
  EXPECT_EQ(v.value, Decision::Ignorable);
  EXPECT_EQ(v.votes.size(), 5u);
  auto ledger = mock.ledger();
  EXPECT_EQ(ledger.requests, 5u);
  EXPECT_EQ(v.counters.queries, 5u);
  EXPECT_EQ(v.counters.input_tokens, ledger.prompt_tokens);
  EXPECT_EQ(v.counters.output_tokens, ledger.completion_tokens);
  Counters sum;
  for (const auto &vote : v.votes)
    sum += vote.counters;
  EXPECT_EQ(sum.input_tokens, v.counters.input_tokens);
  EXPECT_EQ(o.totals().output_tokens, ledger.completion_tokens);

  auto req = mock.last_request();
  EXPECT_EQ(req["model"], "mock");
  EXPECT_DOUBLE_EQ(req["temperature"].get<double>(), 0.6);
  EXPECT_EQ(req["messages"][0]["role"], "user");
  EXPECT_EQ(req["messages"][0]["content"], render_prompt(lalloc_query()));
}

TEST(Remote, UnparsableCountsAsNo) {
  test::MockLlm mock({"ANSWER: YES", "ANSWER: YES", "no idea", "sure thing", "ANSWER: NO"});
  RemoteOracle o(remote_config(mock.endpoint()), make_http_transport(remote_config(mock.endpoint())));
  Verdict v = o.classify(lalloc_query());
  EXPECT_EQ(v.value, Decision::NotIgnorable);
  EXPECT_EQ(std::count_if(v.votes.begin(), v.votes.end(), [](const Vote &x) { return !x.parsed; }), 2);
}

TEST(Remote, TransportFailureAfterRetries) {
  test::MockLlm mock({"ANSWER: YES"});
  mock.fail_status = 503;
  RemoteOracle o(remote_config(mock.endpoint()), make_http_transport(remote_config(mock.endpoint())));
  EXPECT_THROW(o.classify(lalloc_query()), TransportError);
  RemoteConfig dead = remote_config("http://127.0.0.1:9/v1/chat/completions");
  dead.timeout_seconds = 1;
  RemoteOracle d(dead, make_http_transport(dead));
  EXPECT_THROW(d.classify(lalloc_query()), TransportError);
}

TEST(Remote, BoundsInFlightRequests) {
  test::MockLlm mock({"ANSWER: YES"});
  mock.delay_ms = 50;
  RemoteConfig c = remote_config(mock.endpoint());
  c.max_in_flight = 2;
  RemoteOracle o(c, make_http_transport(c));
  o.classify(lalloc_query());
  EXPECT_LE(mock.ledger().max_in_flight, 2);
  EXPECT_EQ(mock.ledger().requests, 5u);
}

TEST(Remote, ReplyShapes) {
  for (const char *body : {R"({"choices":[{"text":"ANSWER: YES"}]})", R"({"content":"ANSWER: YES"})"}) {
    struct Fixed : Transport {
      std::string b;
      std::string post(const std::string &) override { return b; }
    };
    auto t = std::make_shared<Fixed>();
    t->b = body;
    RemoteConfig c = remote_config("http://unused/");
    c.query_count = 1;
    RemoteOracle o(c, t);
    EXPECT_EQ(o.classify(lalloc_query()).value, Decision::Ignorable) << body;
  }
}

TEST(Remote, CassetteRecordThenReplay) {
  auto path = std::filesystem::temp_directory_path() / "scaf_cassette_test.json";
  std::filesystem::remove(path);
  RemoteConfig c = remote_config("http://unused/");
  c.query_count = 3;
  c.cassette_mode = CassetteMode::Record;
  c.cassette_path = path.string();
  auto fake = std::make_shared<FakeTransport>(std::vector<std::string>{"ANSWER: YES", "ANSWER: NO", "ANSWER: YES"});
  Verdict recorded = RemoteOracle(c, fake).classify(lalloc_query());
  ASSERT_TRUE(std::filesystem::exists(path));

  c.cassette_mode = CassetteMode::Replay;
  c.endpoint.clear();
  RemoteOracle replay(c, nullptr);
  Verdict v = replay.classify(lalloc_query());
  EXPECT_EQ(v.value, recorded.value);
  ASSERT_EQ(v.votes.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(v.votes[i].reply, recorded.votes[i].reply);
  EXPECT_EQ(v.counters.input_tokens, 0u);
  SideEffectQuery other = lalloc_query();
  other.function_name = "unrecorded";
  EXPECT_THROW(replay.classify(other), TransportError);
  std::filesystem::remove(path);
}

TEST(Remote, FactoryAndOneShotClassify) {
  OracleConfig cfg;
  EXPECT_EQ(classify(lalloc_query(), cfg).value, Decision::NotIgnorable);
  cfg.kind = OracleConfig::Kind::Annotations;
  cfg.annotation_path = test::fixture_path("lalloc_annotations.json");
  EXPECT_EQ(classify(lalloc_query(), cfg).value, Decision::Ignorable);
}
