#include "mmvad/prompt_opt.hpp"

#include <cmath>
#include <string>

#include "mmvad/core.hpp"
#include "mmvad/kernels.hpp"
#include "mmvad/rng.hpp"

namespace mmvad::prompt {

std::vector<double> ScorerBackend::scores(std::span<const double> prompt,
                                          std::span<const SummaryInput> summaries) const {
  std::vector<double> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) out.push_back(score(prompt, s));
  return out;
}

std::vector<std::vector<double>> ScorerBackend::grads(std::span<const double> prompt,
                                                      std::span<const SummaryInput> summaries) const {
  std::vector<std::vector<double>> out;
  out.reserve(summaries.size());
  for (const auto& s : summaries) out.push_back(grad_prompt(prompt, s));
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// ---------------------------------------------------------------------------

StubScorer::StubScorer(std::vector<double> prompt_weights, std::vector<double> summary_weights,
                       double bias)
    : w_(std::move(prompt_weights)), u_(std::move(summary_weights)), b_(bias) {
  if (w_.empty()) throw DimensionError("stub scorer: prompt_dim must be >= 1");
  if (u_.empty()) throw DimensionError("stub scorer: summary_dim must be >= 1");
}

StubScorer StubScorer::from_seed(std::uint64_t seed, std::size_t prompt_dim, std::size_t summary_dim,
                                 double gain) {
  auto prompt_rng = make_rng(seed, Stream::kStubPrompt);
  auto bias_rng = make_rng(seed, Stream::kStubBias);
  std::vector<double> w = normal_vector(prompt_rng, prompt_dim, 1.0 / std::sqrt(double(prompt_dim)));
  std::vector<double> u = seeded_direction(seed, summary_dim);
  for (auto& x : u) x *= gain;
  const double b = normal_vector(bias_rng, 1, 0.25).front();
  return StubScorer(std::move(w), std::move(u), b);
}

void StubScorer::check(std::span<const double> prompt, const SummaryInput& summary) const {
  if (prompt.size() != w_.size())
    throw DimensionError("stub scorer: prompt dim " + std::to_string(prompt.size()) + ", expected " +
                         std::to_string(w_.size()));
  if (summary.embedding.size() != u_.size())
    throw DimensionError("stub scorer: summary dim " + std::to_string(summary.embedding.size()) +
                         ", expected " + std::to_string(u_.size()));
}

double StubScorer::logit(std::span<const double> prompt, const SummaryInput& summary) const {
  check(prompt, summary);
  return kernels::dot(w_, prompt) + kernels::dot(u_, summary.embedding) + b_;
}

double StubScorer::score(std::span<const double> prompt, const SummaryInput& summary) const {
  return sigmoid(logit(prompt, summary));
}

std::vector<double> StubScorer::grad_prompt(std::span<const double> prompt,
                                            const SummaryInput& summary) const {
  const double s = score(prompt, summary);
  std::vector<double> g(w_);
  const double f = s * (1.0 - s);
  for (auto& x : g) x *= f;
  return g;
}

// ---------------------------------------------------------------------------

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("binary_entropy: p = " + std::to_string(p) + " outside [0, 1]");
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log1p(-p);
  return h;
}

double total_loss(std::span<const double> scores, double mu, double lambda) {
  if (scores.empty()) throw DomainError("total_loss: no scores");
  double entropy = 0.0, mass = 0.0;
  for (double a : scores) {
    entropy += binary_entropy(a);
    mass += a;
  }
  return entropy + lambda * std::abs(mass - mu);
}

std::vector<double> loss_score_derivative(std::span<const double> scores, double mu, double lambda,
                                          double clamp) {
  double mass = 0.0;
  for (double a : scores) mass += a;
  const double excess = mass - mu;
  const double sparsity = excess > 0.0 ? lambda : (excess < 0.0 ? -lambda : 0.0);
  std::vector<double> d;
  d.reserve(scores.size());
  for (double a : scores) {
    const double p = std::min(std::max(a, clamp), 1.0 - clamp);
    d.push_back(std::log((1.0 - p) / p) + sparsity);
  }
  return d;
}

namespace {

void check_scores(std::span<const double> scores, const ScorerDescriptor& who) {
  for (std::size_t t = 0; t < scores.size(); ++t)
    if (!(scores[t] >= 0.0 && scores[t] <= 1.0))
      throw DomainError(who.name + " scorer returned " + std::to_string(scores[t]) + " for summary " +
                        std::to_string(t) + ", outside [0, 1]");
}

}  // namespace

LossAndGradient loss_and_gradient(std::span<const double> prompt,
                                  std::span<const SummaryInput> summaries,
                                  const ScorerBackend& scorer, const OptimizerOptions& options) {
  LossAndGradient out;
  out.scores = scorer.scores(prompt, summaries);
  check_scores(out.scores, scorer.descriptor());
  out.loss = total_loss(out.scores, options.mu, options.lambda);
  const auto dl_da = loss_score_derivative(out.scores, options.mu, options.lambda, options.clamp);
  const auto g = scorer.grads(prompt, summaries);
  out.gradient.assign(scorer.prompt_dim(), 0.0);
  for (std::size_t t = 0; t < g.size(); ++t) {
    if (g[t].size() != out.gradient.size())
      throw DimensionError("scorer gradient has dim " + std::to_string(g[t].size()));
    kernels::axpy(dl_da[t], g[t], out.gradient);
  }
  return out;
}

OptimizationResult optimize_prompt(std::vector<double> q0, std::span<const SummaryInput> summaries,
                                   const ScorerBackend& scorer, const OptimizerOptions& options) {
  if (summaries.empty()) throw DomainError("optimize_prompt: no summaries");
  if (!(options.eta > 0.0)) throw DomainError("optimize_prompt: eta must be > 0");
  if (options.iterations < 0) throw DomainError("optimize_prompt: iterations must be >= 0");
  if (q0.size() != scorer.prompt_dim())
    throw DimensionError("optimize_prompt: Q0 has dim " + std::to_string(q0.size()) + ", scorer expects " +
                         std::to_string(scorer.prompt_dim()));

  OptimizationResult result;
  result.scorer = scorer.descriptor();
  PromptState& state = result.state;
  state.q = std::move(q0);
  state.loss_history.reserve(options.iterations + 1);

  for (int k = 0; k < options.iterations; ++k) {
    const auto step = loss_and_gradient(state.q, summaries, scorer, options);
    state.loss_history.push_back(step.loss);
    for (double g : step.gradient)
      if (!std::isfinite(g))
        throw Error("optimize_prompt: non-finite gradient at iteration " + std::to_string(k));
    kernels::axpy(-options.eta, step.gradient, state.q);
    state.iteration = k + 1;
  }
  result.scores = scorer.scores(state.q, summaries);
  check_scores(result.scores, result.scorer);
  state.loss_history.push_back(total_loss(result.scores, options.mu, options.lambda));
  return result;
}

}  // namespace mmvad::prompt
