#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "natprog/core.hpp"

namespace natprog {

struct CompletionRequest {
  std::string prompt;
  double temperature = 0.7;
  int n = 1;
  int max_tokens = 1024;
  std::string model_name;
  std::string request_tag;  // "gen", "verify", ... for logs and transcripts
};

enum class CompletionSource { Live, Cache, Mock };
const char* to_string(CompletionSource s);

struct CompletionBatch {
  std::string request_fingerprint;
  std::vector<std::string> completions;  // completions.size() == request.n
  CompletionSource source;
};

class GatewayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
// Transport kept failing after the retry budget (connect errors, timeouts,
// 429, 5xx).
class BackendUnavailable : public GatewayError {
 public:
  using GatewayError::GatewayError;
};
// The server answered with something that is not a usable completion.
class ProtocolError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};
class ConfigError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};
// Strict mock hit a prompt no rule covers.
class MockMiss : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

// Stable content hash for one sampled completion; the cache key.
std::string sample_fingerprint(const std::string& model, const std::string& prompt,
                               double temperature, int index);
std::string batch_fingerprint(const std::string& model, const std::string& prompt,
                              double temperature, int n);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  // One completion per entry of sample_indices, in that order.
  virtual std::vector<std::string> complete(const CompletionRequest& req,
                                            const std::vector<int>& sample_indices) = 0;
  virtual CompletionSource source() const = 0;
  virtual const char* name() const = 0;
};

struct MockRule {
  std::string match;               // substring of the prompt, or a fingerprint
  bool match_is_fingerprint = false;
  std::vector<std::string> responses;  // indexed by sample, last one repeats
};

// Deterministic scripted backend. Selection depends only on (prompt, sample
// index), never on call order, so results are schedule-independent.
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(std::vector<MockRule> rules,
                       std::optional<std::string> default_response = std::nullopt);
  std::vector<std::string> complete(const CompletionRequest& req,
                                    const std::vector<int>& sample_indices) override;
  CompletionSource source() const override { return CompletionSource::Mock; }
  const char* name() const override { return "mock"; }

 private:
  std::vector<MockRule> rules_;
  std::optional<std::string> default_response_;
};

struct StochasticRule {
  std::string match;  // substring of the prompt
  Verdict truth = Verdict::Valid;
};

// Scripted yes/no verifier whose vote flips with a fixed probability. The
// flip decision is a hash of (seed, sample fingerprint), so runs are
// reproducible under any concurrency schedule.
class StochasticMockBackend : public CompletionBackend {
 public:
  StochasticMockBackend(std::vector<StochasticRule> rules, double flip_probability,
                        std::uint64_t seed);
  std::vector<std::string> complete(const CompletionRequest& req,
                                    const std::vector<int>& sample_indices) override;
  CompletionSource source() const override { return CompletionSource::Mock; }
  const char* name() const override { return "stochastic-mock"; }

 private:
  std::vector<StochasticRule> rules_;
  double flip_probability_;
  std::uint64_t seed_;
};

struct HttpBackendConfig {
  std::string endpoint_url;  // chat-completions URL; bare hosts get the standard path
  std::string api_key;
  int connect_timeout_s = 10;
  int read_timeout_s = 120;
  int max_attempts = 4;
  int backoff_base_ms = 500;
  int backoff_max_ms = 8000;
  std::uint64_t jitter_seed = 0;  // 0 picks a random seed
  // Test hook; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleeper;
};

// OpenAI-style chat-completions client: retries 429/5xx/transport errors
// with exponential backoff plus jitter, maps other failures to typed errors.
class HttpBackend : public CompletionBackend {
 public:
  explicit HttpBackend(HttpBackendConfig cfg);
  std::vector<std::string> complete(const CompletionRequest& req,
                                    const std::vector<int>& sample_indices) override;
  CompletionSource source() const override { return CompletionSource::Live; }
  const char* name() const override { return "http"; }

 private:
  std::vector<std::string> complete_once(const CompletionRequest& req, int want);
  HttpBackendConfig cfg_;
  std::string scheme_host_;
  std::string path_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_;
};

struct GatewayConfig {
  std::optional<std::string> cache_dir;  // unset disables the response cache
  int max_in_flight = 8;
};

// Front door for completions: per-sample cache in front of a backend, with
// an in-flight limit. Safe to share across threads.
class Gateway {
 public:
  Gateway(std::shared_ptr<CompletionBackend> backend, GatewayConfig cfg);
  ~Gateway();
  Gateway(Gateway&&) noexcept;
  Gateway& operator=(Gateway&&) noexcept;

  CompletionBatch complete(const CompletionRequest& req);

  const char* backend_name() const;
  std::uint64_t backend_calls() const;  // calls that reached the backend

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace natprog
