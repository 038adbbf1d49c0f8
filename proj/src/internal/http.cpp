// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#include "internal/http.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "qcg/errors.hpp"

namespace qcg::internal {

Endpoint parse_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("endpoint '" + url + "' must start with http:// or https://");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("endpoint '" + url + "' has unsupported scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    ep.base_path = url.substr(path_start);
    while (!ep.base_path.empty() && ep.base_path.back() == '/') {
      ep.base_path.pop_back();
    }
  }
  if (ep.origin.size() <= scheme_end + 3) {
    throw ConfigError("endpoint '" + url + "' has no host");
  }
  return ep;
}

HttpOutcome post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                      const std::optional<std::string>& bearer, std::chrono::milliseconds timeout) {
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (bearer) {
    client.set_bearer_token_auth(*bearer);
  }
  HttpOutcome out;
  auto res = client.Post(endpoint.base_path + path, body, "application/json");
  if (!res) {
    out.transport_error = httplib::to_string(res.error());
    return out;
  }
  out.delivered = true;
  out.status = res->status;
  out.body = res->body;
  return out;
}

std::optional<std::string> env(const char* name) {
  const char* value = std::getenv(name);
  if (value == nullptr || *value == '\0') {
    return std::nullopt;
  }
  return std::string(value);
}

}  // namespace qcg::internal
