#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scaf/ir/program.hpp"

namespace scaf::oracle {

struct FlaggedSite {
  ir::SiteId site;
  std::string statement;

  auto operator<=>(const FlaggedSite &) const = default;
};

struct SideEffectQuery {
  std::string function_name;
  std::optional<std::string> source_text;
  /// Pretty-printed body, shown when there is no source text.
  std::string ir_body;
  std::vector<FlaggedSite> flagged_sites;
};

/// Builds the query for `fn` with the given side-effecting sites, in body order.
SideEffectQuery make_query(const ir::Function &fn, const std::vector<ir::SiteId> &sites);

std::string render_prompt(const SideEffectQuery &query);

/// 64-bit FNV-1a of the text, as 16 lowercase hex digits.
std::string prompt_hash(const std::string &prompt);

enum class Decision { Ignorable, NotIgnorable };

const char *to_string(Decision d);

struct Counters {
  std::uint64_t queries = 0;
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;
  double latency_seconds = 0;

  Counters &operator+=(const Counters &other);
};

struct Vote {
  /// Raw reply text; empty for the non-remote backends.
  std::string reply;
  bool parsed = false;
  bool yes = false;
  Counters counters;
};

struct Verdict {
  Decision value = Decision::NotIgnorable;
  std::vector<Vote> votes;
  /// Set by the annotation backend when the function has no entry.
  bool missing_annotation = false;
  Counters counters;
};

/// Reads the last `ANSWER:` line of a reply. Returns nullopt when there is
/// none or it is neither YES nor NO.
std::optional<bool> parse_answer(const std::string &reply);

/// Majority over the parsed votes; unparsable votes count as NO.
Decision majority(const std::vector<Vote> &votes);

/// Raised when the remote endpoint cannot be reached after all retries.
class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IgnorabilityOracle {
public:
  virtual ~IgnorabilityOracle() = default;
  virtual Verdict classify(const SideEffectQuery &query) = 0;
  virtual std::string name() const = 0;

  /// Sum of the counters of every verdict returned so far.
  Counters totals() const;

protected:
  void account(const Counters &c);

private:
  mutable std::mutex mutex_;
  Counters totals_;
};

class ConservativeOracle : public IgnorabilityOracle {
public:
  Verdict classify(const SideEffectQuery &query) override;
  std::string name() const override { return "conservative"; }
};

class AnnotationOracle : public IgnorabilityOracle {
public:
  explicit AnnotationOracle(std::map<std::string, Decision> entries) : entries_(std::move(entries)) {}
  /// Reads {"function": "ignorable" | "not_ignorable"}. Throws std::runtime_error.
  static std::map<std::string, Decision> read_file(const std::string &path);
  static std::map<std::string, Decision> parse(const std::string &text);

  Verdict classify(const SideEffectQuery &query) override;
  std::string name() const override { return "annotations"; }

private:
  std::map<std::string, Decision> entries_;
};

/// Sends one chat-completion request body and returns the response body.
class Transport {
public:
  virtual ~Transport() = default;
  /// Throws TransportError on connection failure, timeout or non-2xx status.
  virtual std::string post(const std::string &body) = 0;
};

enum class CassetteMode { Off, Record, Replay };

struct RemoteConfig {
  std::string endpoint;
  std::string model;
  std::string api_key;
  double temperature = 0.6;
  int query_count = 5;
  double timeout_seconds = 60;
  int retries = 2;
  int max_in_flight = 5;
  CassetteMode cassette_mode = CassetteMode::Off;
  std::string cassette_path;

  /// Fills endpoint, key and model from SCAF_ORACLE_ENDPOINT,
  /// SCAF_ORACLE_API_KEY and SCAF_ORACLE_MODEL when those are set.
  void apply_environment();
  /// Throws std::invalid_argument on an even query count, a temperature
  /// outside {0.4, 0.6, 0.8}, or a missing endpoint (unless replaying).
  void check() const;
};

/// HTTP transport over httplib. Supports http:// URLs, and https:// when
/// built with OpenSSL.
std::unique_ptr<Transport> make_http_transport(const RemoteConfig &config);

class RemoteOracle : public IgnorabilityOracle {
public:
  /// `transport` may be null in replay mode.
  RemoteOracle(RemoteConfig config, std::shared_ptr<Transport> transport);
  ~RemoteOracle() override;

  Verdict classify(const SideEffectQuery &query) override;
  std::string name() const override { return "remote"; }

  /// Request body for one query.
  std::string request_body(const std::string &prompt) const;

private:
  Vote ask(const std::string &body);
  void save_cassette();

  RemoteConfig config_;
  std::shared_ptr<Transport> transport_;
  std::mutex cassette_mutex_;
  std::map<std::string, std::vector<std::string>> cassette_;
};

struct OracleConfig {
  enum class Kind { Conservative, Annotations, Remote };
  Kind kind = Kind::Conservative;
  std::string annotation_path;
  RemoteConfig remote;
};

std::unique_ptr<IgnorabilityOracle> make_oracle(const OracleConfig &config);

/// One-shot classification with a freshly built oracle.
Verdict classify(const SideEffectQuery &query, const OracleConfig &config);

} // namespace scaf::oracle
