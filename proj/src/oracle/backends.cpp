#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "scaf/oracle/oracle.hpp"

namespace scaf::oracle {

using nlohmann::json;

const char *to_string(Decision d) { return d == Decision::Ignorable ? "ignorable" : "not_ignorable"; }

Counters &Counters::operator+=(const Counters &other) {
  queries += other.queries;
  input_tokens += other.input_tokens;
  output_tokens += other.output_tokens;
  latency_seconds += other.latency_seconds;
  return *this;
}

Counters IgnorabilityOracle::totals() const {
  std::lock_guard lock(mutex_);
  return totals_;
}

void IgnorabilityOracle::account(const Counters &c) {
  std::lock_guard lock(mutex_);
  totals_ += c;
}

Verdict ConservativeOracle::classify(const SideEffectQuery &) {
  Verdict v;
  v.votes.push_back({});
  return v;
}

std::map<std::string, Decision> AnnotationOracle::parse(const std::string &text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception &e) {
    throw std::runtime_error(std::string("annotation file is not valid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw std::runtime_error("annotation file must be a JSON object");
  std::map<std::string, Decision> entries;
  for (const auto &[name, value] : j.items()) {
    if (value == "ignorable")
      entries[name] = Decision::Ignorable;
    else if (value == "not_ignorable")
      entries[name] = Decision::NotIgnorable;
    else
      throw std::runtime_error("annotation for '" + name + "' must be \"ignorable\" or \"not_ignorable\"");
  }
  return entries;
}

std::map<std::string, Decision> AnnotationOracle::read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read annotation file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Verdict AnnotationOracle::classify(const SideEffectQuery &query) {
  Verdict v;
  auto it = entries_.find(query.function_name);
  v.missing_annotation = it == entries_.end();
  v.value = v.missing_annotation ? Decision::NotIgnorable : it->second;
  Vote vote;
  vote.parsed = !v.missing_annotation;
  vote.yes = v.value == Decision::Ignorable;
  v.votes.push_back(vote);
  return v;
}

void RemoteConfig::apply_environment() {
  if (const char *e = std::getenv("SCAF_ORACLE_ENDPOINT"); e && *e)
    endpoint = e;
  if (const char *k = std::getenv("SCAF_ORACLE_API_KEY"); k && *k)
    api_key = k;
  if (const char *m = std::getenv("SCAF_ORACLE_MODEL"); m && *m)
    model = m;
}

void RemoteConfig::check() const {
  if (query_count < 1 || query_count % 2 == 0)
    throw std::invalid_argument("query count must be a positive odd number");
  bool admissible = false;
  for (double t : {0.4, 0.6, 0.8})
    admissible |= std::abs(temperature - t) < 1e-9;
  if (!admissible)
    throw std::invalid_argument("temperature must be one of 0.4, 0.6, 0.8");
  if (max_in_flight < 1)
    throw std::invalid_argument("max in-flight requests must be at least 1");
  if (retries < 0)
    throw std::invalid_argument("retries must not be negative");
  if (cassette_mode != CassetteMode::Off && cassette_path.empty())
    throw std::invalid_argument("cassette mode needs a cassette path");
  if (endpoint.empty() && cassette_mode != CassetteMode::Replay)
    throw std::invalid_argument("remote oracle needs an endpoint (set SCAF_ORACLE_ENDPOINT)");
}

RemoteOracle::RemoteOracle(RemoteConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.check();
  if (config_.cassette_mode == CassetteMode::Off)
    return;
  std::ifstream in(config_.cassette_path);
  if (!in) {
    if (config_.cassette_mode == CassetteMode::Replay)
      throw std::runtime_error("cannot read cassette '" + config_.cassette_path + "'");
    return;
  }
  json j;
  try {
    j = json::parse(in);
    for (const auto &entry : j)
      cassette_[entry.at("prompt_hash").get<std::string>()] = entry.at("responses").get<std::vector<std::string>>();
  } catch (const json::exception &e) {
    throw std::runtime_error("malformed cassette '" + config_.cassette_path + "': " + e.what());
  }
}

RemoteOracle::~RemoteOracle() = default;

std::string RemoteOracle::request_body(const std::string &prompt) const {
  json body = {{"model", config_.model},
               {"temperature", config_.temperature},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
  return body.dump();
}

namespace {

// Reply text and token usage from a chat-completion response.
Vote parse_response(const std::string &body) {
  Vote v;
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    v.reply = body;
    return v;
  }
  auto text = [](const json &x) -> std::optional<std::string> {
    if (x.is_string())
      return x.get<std::string>();
    return std::nullopt;
  };
  if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
    const json &c = j["choices"][0];
    if (c.contains("message") && c["message"].contains("content"))
      v.reply = text(c["message"]["content"]).value_or("");
    else if (c.contains("text"))
      v.reply = text(c["text"]).value_or("");
  } else if (j.contains("content")) {
    v.reply = text(j["content"]).value_or("");
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    const json &u = j["usage"];
    if (u.contains("prompt_tokens") && u["prompt_tokens"].is_number_unsigned())
      v.counters.input_tokens = u["prompt_tokens"].get<std::uint64_t>();
    if (u.contains("completion_tokens") && u["completion_tokens"].is_number_unsigned())
      v.counters.output_tokens = u["completion_tokens"].get<std::uint64_t>();
  }
  return v;
}

void finish_vote(Vote &v) {
  auto answer = parse_answer(v.reply);
  v.parsed = answer.has_value();
  v.yes = answer.value_or(false);
  v.counters.queries = 1;
}

} // namespace

Vote RemoteOracle::ask(const std::string &body) {
  auto start = std::chrono::steady_clock::now();
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    try {
      std::string response = transport_->post(body);
      Vote v = parse_response(response);
      finish_vote(v);
      v.counters.latency_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return v;
    } catch (const TransportError &e) {
      last_error = e.what();
    }
  }
  throw TransportError("oracle endpoint failed after " + std::to_string(config_.retries + 1) +
                       " attempts: " + last_error);
}

Verdict RemoteOracle::classify(const SideEffectQuery &query) {
  const std::string prompt = render_prompt(query);
  const std::string hash = prompt_hash(prompt);
  const auto n = static_cast<std::size_t>(config_.query_count);
  Verdict verdict;

  if (config_.cassette_mode == CassetteMode::Replay) {
    std::lock_guard lock(cassette_mutex_);
    auto it = cassette_.find(hash);
    if (it == cassette_.end() || it->second.size() < n)
      throw TransportError("cassette has no recording for prompt " + hash);
    for (std::size_t i = 0; i < n; ++i) {
      Vote v;
      v.reply = it->second[i];
      finish_vote(v);
      verdict.votes.push_back(std::move(v));
    }
  } else {
    if (!transport_)
      throw TransportError("remote oracle has no transport");
    const std::string body = request_body(prompt);
    std::vector<Vote> votes(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          votes[i] = ask(body);
        } catch (const TransportError &e) {
          errors[i] = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min<std::size_t>(n, config_.max_in_flight); ++t)
      pool.emplace_back(worker);
    for (auto &t : pool)
      t.join();
    for (const auto &e : errors)
      if (!e.empty())
        throw TransportError(e);
    verdict.votes = std::move(votes);
    if (config_.cassette_mode == CassetteMode::Record) {
      std::lock_guard lock(cassette_mutex_);
      auto &recorded = cassette_[hash];
      recorded.clear();
      for (const auto &v : verdict.votes)
        recorded.push_back(v.reply);
      save_cassette();
    }
  }

  for (const auto &v : verdict.votes)
    verdict.counters += v.counters;
  verdict.value = majority(verdict.votes);
  account(verdict.counters);
  return verdict;
}

void RemoteOracle::save_cassette() {
  json out = json::array();
  for (const auto &[hash, responses] : cassette_)
    out.push_back({{"prompt_hash", hash}, {"responses", responses}});
  std::ofstream f(config_.cassette_path);
  if (!f)
    throw std::runtime_error("cannot write cassette '" + config_.cassette_path + "'");
  f << out.dump(2) << "\n";
}

std::unique_ptr<IgnorabilityOracle> make_oracle(const OracleConfig &config) {
  switch (config.kind) {
  case OracleConfig::Kind::Conservative: return std::make_unique<ConservativeOracle>();
  case OracleConfig::Kind::Annotations:
    return std::make_unique<AnnotationOracle>(AnnotationOracle::read_file(config.annotation_path));
  case OracleConfig::Kind::Remote: {
    std::shared_ptr<Transport> transport;
    if (config.remote.cassette_mode != CassetteMode::Replay)
      transport = make_http_transport(config.remote);
    return std::make_unique<RemoteOracle>(config.remote, std::move(transport));
  }
  }
  return std::make_unique<ConservativeOracle>();
}

Verdict classify(const SideEffectQuery &query, const OracleConfig &config) {
  return make_oracle(config)->classify(query);
}

} // namespace scaf::oracle
