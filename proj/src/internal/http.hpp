// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace qcg::internal {

/// "http://host:port/v1" split into the origin httplib connects to and the
/// path prefix prepended to every request.
struct Endpoint {
  std::string origin;
  std::string base_path;
};

Endpoint parse_endpoint(const std::string& url);

struct HttpOutcome {
  bool delivered = false;  ///< false on connection/transport failure
  std::string transport_error;
  int status = 0;
  std::string body;

  /// Transport failures, 429 and 5xx are worth retrying.
  bool retriable() const { return !delivered || status == 429 || status >= 500; }
};

HttpOutcome post_json(const Endpoint& endpoint, const std::string& path, const std::string& body,
                      const std::optional<std::string>& bearer, std::chrono::milliseconds timeout);

/// Reads an environment variable, treating empty as unset.
std::optional<std::string> env(const char* name);

}  // namespace qcg::internal
