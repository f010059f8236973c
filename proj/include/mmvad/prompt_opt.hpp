#pragma once
// Test-time optimization of the continuous anomaly-query prompt.
//
// The prompt Q is scored against every window summary by a frozen scorer,
// a_t = score(Q, S_t), and updated by full-batch gradient descent on
//
//   L(Q) = sum_t H(a_t) + lambda * |sum_t a_t - mu|
//
// with H the binary entropy (natural log). Gradients are chained through the
// scorer's grad_prompt:
//
//   dL/dQ = sum_t (ln((1 - a_t)/a_t) + lambda * sign(sum a - mu)) * da_t/dQ
//
// where a_t is clamped to [clamp, 1 - clamp] inside the logarithm only and
// sign(0) = 0.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmvad::prompt {

/// One window as seen by a scorer. The prompt is concatenated with the
/// summary as [Q; embedding] for numeric backends; text backends may prepend
/// a decoded prompt to `text` instead.
struct SummaryInput {
  std::string_view text;
  std::span<const double> embedding;
  std::optional<std::span<const double>> fused_point;
};

struct ScorerDescriptor {
  std::string name;
  bool deterministic = true;
  std::string gradient;  // "analytic" or "finite-difference"
};

class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;

  virtual std::size_t prompt_dim() const = 0;
  virtual ScorerDescriptor descriptor() const = 0;

  /// Anomaly likelihood in [0, 1].
  virtual double score(std::span<const double> prompt, const SummaryInput& summary) const = 0;
  /// d score / d prompt, length prompt_dim().
  virtual std::vector<double> grad_prompt(std::span<const double> prompt,
                                          const SummaryInput& summary) const = 0;

  /// Batched forms, results in summary order. Defaults loop serially.
  virtual std::vector<double> scores(std::span<const double> prompt,
                                     std::span<const SummaryInput> summaries) const;
  virtual std::vector<std::vector<double>> grads(std::span<const double> prompt,
                                                 std::span<const SummaryInput> summaries) const;
};

/// sigmoid(w.Q + u.s + b). Deterministic, with analytic gradient
/// score (1 - score) w. The fused point, when given, is ignored.
class StubScorer final : public ScorerBackend {
 public:
  StubScorer(std::vector<double> prompt_weights, std::vector<double> summary_weights, double bias);

  /// w ~ N(0, 1/prompt_dim) and b ~ N(0, 0.25^2) from the seed's own streams;
  /// u = gain * seeded_direction(seed, summary_dim).
  static StubScorer from_seed(std::uint64_t seed, std::size_t prompt_dim, std::size_t summary_dim,
                              double gain = 8.0);

  std::size_t prompt_dim() const override { return w_.size(); }
  std::size_t summary_dim() const { return u_.size(); }
  ScorerDescriptor descriptor() const override { return {"stub", true, "analytic"}; }

  double logit(std::span<const double> prompt, const SummaryInput& summary) const;
  double score(std::span<const double> prompt, const SummaryInput& summary) const override;
  std::vector<double> grad_prompt(std::span<const double> prompt,
                                  const SummaryInput& summary) const override;

  const std::vector<double>& prompt_weights() const { return w_; }
  const std::vector<double>& summary_weights() const { return u_; }
  double bias() const { return b_; }

 private:
  void check(std::span<const double> prompt, const SummaryInput& summary) const;

  std::vector<double> w_;
  std::vector<double> u_;
  double b_;
};

double sigmoid(double x);

/// -p ln p - (1-p) ln(1-p); H(0) = H(1) = 0. Throws DomainError outside [0, 1].
double binary_entropy(double p);

/// sum_t H(a_t) + lambda |sum_t a_t - mu|. Throws DomainError on an empty
/// vector or a score outside [0, 1].
double total_loss(std::span<const double> scores, double mu, double lambda);

struct OptimizerOptions {
  double eta = 0.05;
  int iterations = 50;
  double mu = 0.0;
  double lambda = 1.0;
  double clamp = 1e-7;
};

/// dL/da_t for every t (see header comment).
std::vector<double> loss_score_derivative(std::span<const double> scores, double mu, double lambda,
                                          double clamp = 1e-7);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> scores;
  std::vector<double> gradient;
};

LossAndGradient loss_and_gradient(std::span<const double> prompt,
                                  std::span<const SummaryInput> summaries,
                                  const ScorerBackend& scorer, const OptimizerOptions& options);

struct PromptState {
  std::vector<double> q;
  int iteration = 0;
  std::vector<double> loss_history;  // iteration + 1 entries, including the initial loss
};

struct OptimizationResult {
  PromptState state;
  std::vector<double> scores;  // a_t = score(Q*, S_t)
  ScorerDescriptor scorer;
};

/// Runs options.iterations steps of Q <- Q - eta dL/dQ from q0. Throws
/// mmvad::Error naming the iteration on a non-finite gradient, DomainError
/// on a scorer output outside [0, 1].
OptimizationResult optimize_prompt(std::vector<double> q0, std::span<const SummaryInput> summaries,
                                   const ScorerBackend& scorer, const OptimizerOptions& options);

}  // namespace mmvad::prompt
