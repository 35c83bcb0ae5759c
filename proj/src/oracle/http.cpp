#include <httplib.h>

#include "scaf/oracle/oracle.hpp"

namespace scaf::oracle {

namespace {

class HttpTransport : public Transport {
public:
  explicit HttpTransport(const RemoteConfig &config) : config_(config) {
    auto scheme = config.endpoint.find("://");
    if (scheme == std::string::npos)
      throw std::invalid_argument("endpoint must be an http:// or https:// URL");
    auto path = config.endpoint.find('/', scheme + 3);
    origin_ = config.endpoint.substr(0, path);
    path_ = path == std::string::npos ? "/" : config.endpoint.substr(path);
  }

  std::string post(const std::string &body) override {
    httplib::Client client(origin_);
    if (!client.is_valid())
      throw TransportError("unsupported endpoint '" + config_.endpoint + "'");
    auto seconds = static_cast<time_t>(config_.timeout_seconds);
    auto micros = static_cast<time_t>((config_.timeout_seconds - seconds) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    if (!config_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res)
      throw TransportError("request to " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
    return res->body;
  }

private:
  RemoteConfig config_;
  std::string origin_;
  std::string path_;
};

} // namespace

std::unique_ptr<Transport> make_http_transport(const RemoteConfig &config) {
  return std::make_unique<HttpTransport>(config);
}

} // namespace scaf::oracle
