// Copyright 2026 The QCG-Rerank Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace qcg {

/// Base class for every error raised by the library. `category()` is a stable
/// machine-readable tag that the CLI reports alongside its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* category() const noexcept { return "error"; }
};

class InputError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "input"; }
};

class DimensionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "dimension"; }
};

class DegenerateVectorError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "degenerate_vector"; }
};

class DegenerateGraphError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "degenerate_graph"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "config"; }
};

class TemplateError : public ConfigError {
 public:
  using ConfigError::ConfigError;
  const char* category() const noexcept override { return "template"; }
};

class StoreSchemaError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "store_schema"; }
};

class DuplicateIdError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "duplicate_id"; }
};

class EmptyStoreError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "empty_store"; }
};

/// Failure talking to an external service. `retriable()` distinguishes
/// transient faults (transport, 5xx, 429) from permanent ones.
class ServiceError : public Error {
 public:
  ServiceError(const std::string& what, bool retriable)
      : Error(what), retriable_(retriable) {}
  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

class EmbedServiceError : public ServiceError {
 public:
  using ServiceError::ServiceError;
  const char* category() const noexcept override { return "embed_service"; }
};

class LlmServiceError : public ServiceError {
 public:
  using ServiceError::ServiceError;
  const char* category() const noexcept override { return "llm_service"; }
};

class EmptyCompletionError : public Error {
 public:
  using Error::Error;
  const char* category() const noexcept override { return "empty_completion"; }
};

}  // namespace qcg
