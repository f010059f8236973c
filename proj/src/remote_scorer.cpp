#include "mmvad/remote_scorer.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace mmvad::prompt {

std::string encode_score_request(std::span<const double> prompt, const SummaryInput& summary) {
  nlohmann::ordered_json body;
  body["prompt"] = std::vector<double>(prompt.begin(), prompt.end());
  body["summary_text"] = std::string(summary.text);
  body["summary_embedding"] = std::vector<double>(summary.embedding.begin(), summary.embedding.end());
  return body.dump();
}

double decode_score_response(const std::string& body) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scorer response: ") + e.what());
  }
  if (!parsed.is_object() || !parsed.contains("score") || !parsed["score"].is_number())
    throw FormatError("malformed scorer response: missing numeric \"score\"");
  const double s = parsed["score"].get<double>();
  if (!(s >= 0.0 && s <= 1.0))
    throw DomainError("scorer response " + std::to_string(s) + " outside [0, 1]");
  return s;
}

RemoteScorer::RemoteScorer(RemoteScorerOptions options) : options_(std::move(options)) {
  if (options_.endpoint.empty()) throw DomainError("remote scorer: endpoint is empty");
  if (options_.prompt_dim == 0) throw DomainError("remote scorer: prompt_dim must be >= 1");
  if (!(options_.fd_step > 0.0)) throw DomainError("remote scorer: fd_step must be > 0");
  if (options_.retries < 0) throw DomainError("remote scorer: retries must be >= 0");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
}

double RemoteScorer::post(const std::string& body) const {
  httplib::Client client(options_.endpoint);
  if (!client.is_valid()) throw TransportError("remote scorer: invalid endpoint " + options_.endpoint);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  std::string failure;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    auto res = client.Post("/score", body, "application/json");
    if (!res) {
      failure = "remote scorer: request to " + options_.endpoint + "/score failed (" +
                httplib::to_string(res.error()) + ")";
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      failure = "remote scorer: " + options_.endpoint + "/score returned HTTP " + std::to_string(res->status);
      continue;
    }
    return decode_score_response(res->body);
  }
  throw TransportError(failure);
}

std::vector<double> RemoteScorer::run(const std::vector<Request>& requests) const {
  std::vector<double> out(requests.size());
  const std::size_t workers = std::min(options_.max_in_flight, requests.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < requests.size(); ++i)
      out[i] = post(encode_score_request(requests[i].prompt, *requests[i].summary));
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < requests.size(); i = next++) {
        try {
          out[i] = post(encode_score_request(requests[i].prompt, *requests[i].summary));
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = requests.size();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

double RemoteScorer::score(std::span<const double> prompt, const SummaryInput& summary) const {
  if (prompt.size() != options_.prompt_dim) throw DimensionError("remote scorer: prompt dim mismatch");
  return post(encode_score_request(prompt, summary));
}

std::vector<double> RemoteScorer::grad_prompt(std::span<const double> prompt,
                                              const SummaryInput& summary) const {
  return grads(prompt, std::span<const SummaryInput>(&summary, 1)).front();
}

std::vector<double> RemoteScorer::scores(std::span<const double> prompt,
                                         std::span<const SummaryInput> summaries) const {
  if (prompt.size() != options_.prompt_dim) throw DimensionError("remote scorer: prompt dim mismatch");
  std::vector<Request> requests;
  requests.reserve(summaries.size());
  for (const auto& s : summaries) requests.push_back({{prompt.begin(), prompt.end()}, &s});
  return run(requests);
}

std::vector<std::vector<double>> RemoteScorer::grads(std::span<const double> prompt,
                                                     std::span<const SummaryInput> summaries) const {
  if (prompt.size() != options_.prompt_dim) throw DimensionError("remote scorer: prompt dim mismatch");
  const std::size_t p = prompt.size();
  const double h = options_.fd_step;
  std::vector<Request> requests;
  requests.reserve(summaries.size() * 2 * p);
  for (const auto& s : summaries) {
    for (std::size_t i = 0; i < p; ++i) {
      for (double sign : {1.0, -1.0}) {
        std::vector<double> q(prompt.begin(), prompt.end());
        q[i] += sign * h;
        requests.push_back({std::move(q), &s});
      }
    }
  }
  const std::vector<double> values = run(requests);
  std::vector<std::vector<double>> out(summaries.size(), std::vector<double>(p));
  for (std::size_t t = 0; t < summaries.size(); ++t)
    for (std::size_t i = 0; i < p; ++i) {
      const std::size_t base = (t * p + i) * 2;
      out[t][i] = (values[base] - values[base + 1]) / (2.0 * h);
    }
  return out;
}

}  // namespace mmvad::prompt
