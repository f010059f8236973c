#pragma once
// HTTP adapter for an external scoring service.
//
// Wire protocol: POST <endpoint>/score with JSON body
//   {"prompt": [float, ...], "summary_text": string, "summary_embedding": [float, ...]}
// answered by {"score": float}. Any non-2xx status is a transport error.
// Gradients are central finite differences, 2 * prompt_dim requests each.

#include <chrono>
#include <string>

#include "mmvad/core.hpp"
#include "mmvad/prompt_opt.hpp"

namespace mmvad::prompt {

class TransportError : public Error {
 public:
  using Error::Error;
};

struct RemoteScorerOptions {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080"
  std::size_t prompt_dim = 32;
  std::chrono::milliseconds timeout{5000};
  int retries = 0;
  double fd_step = 1e-4;
  std::size_t max_in_flight = 4;
};

/// Serializes one request body exactly as sent on the wire.
std::string encode_score_request(std::span<const double> prompt, const SummaryInput& summary);
/// Parses a response body; throws FormatError when malformed and
/// DomainError when the score is outside [0, 1].
double decode_score_response(const std::string& body);

class RemoteScorer final : public ScorerBackend {
 public:
  explicit RemoteScorer(RemoteScorerOptions options);

  std::size_t prompt_dim() const override { return options_.prompt_dim; }
  ScorerDescriptor descriptor() const override {
    return {"remote:" + options_.endpoint, false, "finite-difference"};
  }

  double score(std::span<const double> prompt, const SummaryInput& summary) const override;
  std::vector<double> grad_prompt(std::span<const double> prompt,
                                  const SummaryInput& summary) const override;
  std::vector<double> scores(std::span<const double> prompt,
                             std::span<const SummaryInput> summaries) const override;
  std::vector<std::vector<double>> grads(std::span<const double> prompt,
                                         std::span<const SummaryInput> summaries) const override;

  const RemoteScorerOptions& options() const { return options_; }

 private:
  struct Request {
    std::vector<double> prompt;
    const SummaryInput* summary;
  };
  std::vector<double> run(const std::vector<Request>& requests) const;
  double post(const std::string& body) const;

  RemoteScorerOptions options_;
};

}  // namespace mmvad::prompt
