#include <httplib.h>
#include <json.hpp>

#include "natprog/gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <random>
#include <semaphore>
#include <thread>

#include "natprog/digest.hpp"

namespace natprog {

namespace {

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", t);
  return buf;
}

// Retryable transport-level failure, internal to the backend loop.
struct Retryable {
  std::string why;
  int retry_after_ms = 0;
};

std::uint64_t hash64(const std::string& payload) {
  std::string hex = sha256_hex(payload);
  std::uint64_t v = 0;
  for (int i = 0; i < 16; ++i) {
    char c = hex[i];
    v = (v << 4) | static_cast<std::uint64_t>(c <= '9' ? c - '0' : c - 'a' + 10);
  }
  return v;
}

}  // namespace

const char* to_string(CompletionSource s) {
  switch (s) {
    case CompletionSource::Live: return "Live";
    case CompletionSource::Cache: return "Cache";
    case CompletionSource::Mock: return "Mock";
  }
  return "?";
}

std::string sample_fingerprint(const std::string& model, const std::string& prompt,
                               double temperature, int index) {
  std::string payload = "sample-v1\x1f" + model + "\x1f" + prompt + "\x1f" +
                        format_temperature(temperature) + "\x1f" + std::to_string(index);
  return sha256_hex(payload);
}

std::string batch_fingerprint(const std::string& model, const std::string& prompt,
                              double temperature, int n) {
  std::string payload = "batch-v1\x1f" + model + "\x1f" + prompt + "\x1f" +
                        format_temperature(temperature) + "\x1f" + std::to_string(n);
  return sha256_hex(payload);
}

// --- mock ------------------------------------------------------------------

MockBackend::MockBackend(std::vector<MockRule> rules, std::optional<std::string> default_response)
    : rules_(std::move(rules)), default_response_(std::move(default_response)) {}

std::vector<std::string> MockBackend::complete(const CompletionRequest& req,
                                               const std::vector<int>& sample_indices) {
  std::vector<std::string> out;
  out.reserve(sample_indices.size());
  for (int index : sample_indices) {
    const MockRule* hit = nullptr;
    for (const auto& rule : rules_) {
      bool matches = rule.match_is_fingerprint
                         ? rule.match == sample_fingerprint(req.model_name, req.prompt,
                                                            req.temperature, index)
                         : req.prompt.find(rule.match) != std::string::npos;
      if (matches) {
        hit = &rule;
        break;
      }
    }
    if (hit != nullptr && !hit->responses.empty()) {
      size_t pick = std::min(static_cast<size_t>(index), hit->responses.size() - 1);
      out.push_back(hit->responses[pick]);
    } else if (default_response_.has_value()) {
      out.push_back(*default_response_);
    } else {
      throw MockMiss("no mock rule matches prompt (tag=" + req.request_tag +
                     ", sample " + std::to_string(index) + ")");
    }
  }
  return out;
}

StochasticMockBackend::StochasticMockBackend(std::vector<StochasticRule> rules,
                                             double flip_probability, std::uint64_t seed)
    : rules_(std::move(rules)), flip_probability_(flip_probability), seed_(seed) {}

std::vector<std::string> StochasticMockBackend::complete(const CompletionRequest& req,
                                                         const std::vector<int>& sample_indices) {
  std::vector<std::string> out;
  out.reserve(sample_indices.size());
  for (int index : sample_indices) {
    const StochasticRule* hit = nullptr;
    for (const auto& rule : rules_)
      if (req.prompt.find(rule.match) != std::string::npos) {
        hit = &rule;
        break;
      }
    if (hit == nullptr)
      throw MockMiss("no stochastic rule matches prompt (tag=" + req.request_tag + ")");
    std::string fp = sample_fingerprint(req.model_name, req.prompt, req.temperature, index);
    double u = static_cast<double>(hash64(std::to_string(seed_) + ":" + fp)) /
               18446744073709551616.0;  // 2^64
    Verdict v = hit->truth;
    if (u < flip_probability_) v = v == Verdict::Valid ? Verdict::Invalid : Verdict::Valid;
    out.push_back(v == Verdict::Valid ? "So the answer is \"yes\"." : "So the answer is \"no\".");
  }
  return out;
}

// --- http --------------------------------------------------------------------

HttpBackend::HttpBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
  const std::string& url = cfg_.endpoint_url;
  size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("endpoint URL must include a scheme: " + url);
  size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    scheme_host_ = url;
    path_ = "/v1/chat/completions";
  } else {
    scheme_host_ = url.substr(0, path_start);
    path_ = url.substr(path_start);
  }
  if (!cfg_.sleeper)
    cfg_.sleeper = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  rng_.seed(cfg_.jitter_seed != 0 ? cfg_.jitter_seed : std::random_device{}());
}

std::vector<std::string> HttpBackend::complete_once(const CompletionRequest& req, int want) {
  httplib::Client client(scheme_host_);
  client.set_connection_timeout(cfg_.connect_timeout_s, 0);
  client.set_read_timeout(cfg_.read_timeout_s, 0);

  nlohmann::json payload = {
      {"model", req.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}})},
      {"temperature", req.temperature},
      {"n", want},
      {"max_tokens", req.max_tokens},
  };
  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  auto res = client.Post(path_, headers, payload.dump(), "application/json");
  if (!res)
    throw Retryable{"transport error: " + httplib::to_string(res.error())};
  if (res->status == 429 || res->status >= 500) {
    int retry_after_ms = 0;
    if (res->has_header("Retry-After")) {
      try {
        retry_after_ms = std::stoi(res->get_header_value("Retry-After")) * 1000;
      } catch (...) {
      }
    }
    throw Retryable{"HTTP " + std::to_string(res->status), retry_after_ms};
  }
  if (res->status == 401 || res->status == 403)
    throw ConfigError("endpoint rejected the credential (HTTP " + std::to_string(res->status) + ")");
  if (res->status != 200)
    throw ProtocolError("unexpected HTTP " + std::to_string(res->status) + ": " + res->body);

  nlohmann::json body;
  try {
    body = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("response body is not JSON");
  }
  if (!body.contains("choices") || !body["choices"].is_array() || body["choices"].empty())
    throw ProtocolError("response carries no choices");

  struct Entry {
    int index;
    std::string content;
  };
  std::vector<Entry> entries;
  int fallback_index = 0;
  for (const auto& choice : body["choices"]) {
    if (!choice.contains("message") || !choice["message"].contains("content") ||
        !choice["message"]["content"].is_string())
      throw ProtocolError("choice carries no message content");
    int idx = choice.value("index", fallback_index);
    entries.push_back({idx, choice["message"]["content"].get<std::string>()});
    ++fallback_index;
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.index < b.index; });
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (auto& e : entries) out.push_back(std::move(e.content));
  return out;
}

std::vector<std::string> HttpBackend::complete(const CompletionRequest& req,
                                               const std::vector<int>& sample_indices) {
  std::vector<std::string> out;
  int remaining = static_cast<int>(sample_indices.size());
  while (remaining > 0) {
    int attempt = 0;
    for (;;) {
      try {
        auto chunk = complete_once(req, remaining);
        // Servers that ignore n return fewer choices; keep asking for the rest.
        if (static_cast<int>(chunk.size()) > remaining) chunk.resize(remaining);
        for (auto& c : chunk) out.push_back(std::move(c));
        remaining -= static_cast<int>(chunk.size());
        break;
      } catch (const Retryable& r) {
        ++attempt;
        if (attempt >= cfg_.max_attempts)
          throw BackendUnavailable("gave up after " + std::to_string(attempt) +
                                   " attempts; last failure: " + r.why);
        std::int64_t delay = static_cast<std::int64_t>(cfg_.backoff_base_ms) << (attempt - 1);
        delay = std::min<std::int64_t>(delay, cfg_.backoff_max_ms);
        {
          std::lock_guard<std::mutex> lock(rng_mutex_);
          delay += std::uniform_int_distribution<std::int64_t>(0, cfg_.backoff_base_ms)(rng_);
        }
        delay = std::max<std::int64_t>(delay, r.retry_after_ms);
        cfg_.sleeper(std::chrono::milliseconds(delay));
      }
    }
  }
  return out;
}

// --- gateway -----------------------------------------------------------------

struct Gateway::Impl {
  std::shared_ptr<CompletionBackend> backend;
  GatewayConfig cfg;
  std::counting_semaphore<4096> in_flight;
  std::atomic<std::uint64_t> backend_calls{0};

  Impl(std::shared_ptr<CompletionBackend> b, GatewayConfig c)
      : backend(std::move(b)),
        cfg(std::move(c)),
        in_flight(std::max(1, std::min(cfg.max_in_flight, 4096))) {}

  std::filesystem::path cache_path(const std::string& fingerprint) const {
    return std::filesystem::path(*cfg.cache_dir) / (fingerprint + ".json");
  }

  std::optional<std::string> cache_read(const std::string& fingerprint) const {
    if (!cfg.cache_dir.has_value()) return std::nullopt;
    std::error_code ec;
    auto path = cache_path(fingerprint);
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    try {
      nlohmann::json j = nlohmann::json::parse(read_file(path.string()));
      if (j.contains("completion") && j["completion"].is_string())
        return j["completion"].get<std::string>();
    } catch (...) {
      // Unreadable cache entries count as misses and get rewritten.
    }
    return std::nullopt;
  }

  void cache_write(const std::string& fingerprint, const CompletionRequest& req, int index,
                   const std::string& completion) const {
    if (!cfg.cache_dir.has_value()) return;
    std::filesystem::create_directories(*cfg.cache_dir);
    nlohmann::ordered_json j = {
        {"model", req.model_name},       {"temperature", req.temperature},
        {"index", index},                {"tag", req.request_tag},
        {"prompt", req.prompt},          {"completion", completion},
    };
    write_file_atomic(cache_path(fingerprint).string(), j.dump(2) + "\n");
  }
};

Gateway::Gateway(std::shared_ptr<CompletionBackend> backend, GatewayConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(backend), std::move(cfg))) {
  if (impl_->backend == nullptr) throw ConfigError("gateway needs a backend");
}

Gateway::~Gateway() = default;
Gateway::Gateway(Gateway&&) noexcept = default;
Gateway& Gateway::operator=(Gateway&&) noexcept = default;

const char* Gateway::backend_name() const { return impl_->backend->name(); }
std::uint64_t Gateway::backend_calls() const { return impl_->backend_calls.load(); }

CompletionBatch Gateway::complete(const CompletionRequest& req) {
  if (req.n < 1) throw ConfigError("completion request needs n >= 1");

  CompletionBatch batch;
  batch.request_fingerprint =
      batch_fingerprint(req.model_name, req.prompt, req.temperature, req.n);
  batch.completions.resize(req.n);

  std::vector<int> missing;
  for (int i = 0; i < req.n; ++i) {
    auto hit = impl_->cache_read(sample_fingerprint(req.model_name, req.prompt, req.temperature, i));
    if (hit.has_value())
      batch.completions[i] = std::move(*hit);
    else
      missing.push_back(i);
  }

  if (!missing.empty()) {
    impl_->in_flight.acquire();
    std::vector<std::string> fresh;
    try {
      fresh = impl_->backend->complete(req, missing);
    } catch (...) {
      impl_->in_flight.release();
      throw;
    }
    impl_->in_flight.release();
    impl_->backend_calls.fetch_add(1);
    if (fresh.size() != missing.size())
      throw ProtocolError("backend returned " + std::to_string(fresh.size()) +
                          " completions for " + std::to_string(missing.size()) + " samples");
    for (size_t j = 0; j < missing.size(); ++j) {
      batch.completions[missing[j]] = fresh[j];
      impl_->cache_write(sample_fingerprint(req.model_name, req.prompt, req.temperature, missing[j]),
                         req, missing[j], fresh[j]);
    }
    batch.source = impl_->backend->source();
  } else {
    batch.source = CompletionSource::Cache;
  }
  return batch;
}

}  // namespace natprog
