#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "swarmsim/rng.hpp"

namespace swarmsim {

// Beta posterior over the fill ratio; integer pseudo-counts, uniform prior.
struct BetaModel {
  long long alpha = 1;
  long long beta = 1;

  long long updates() const { return alpha + beta - 2; }
  double mean() const { return static_cast<double>(alpha) / static_cast<double>(alpha + beta); }
};

inline BetaModel updated(BetaModel m, int bit) {
  if (bit != 0 && bit != 1) throw std::invalid_argument("update: bit must be 0 or 1");
  if (bit)
    m.alpha += 1;
  else
    m.beta += 1;
  return m;
}

// Var of Beta(alpha, beta).
inline double variance(const BetaModel& m) {
  const double a = static_cast<double>(m.alpha), b = static_cast<double>(m.beta);
  return a * b / ((a + b) * (a + b) * (a + b + 1.0));
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr double eps = 1e-15, tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double lnbt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(lnbt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

// Exact binomial tail sum_{j=a}^{n} C(n,j) / 2^n for n = a+b-1 <= 64.
inline double belief_exact_small(long long a, long long b) {
  const long long n = a + b - 1;
  unsigned __int128 coef = 1;  // C(n, a)
  for (long long j = 0; j < a; ++j) coef = coef * static_cast<unsigned long long>(n - j) /
                                           static_cast<unsigned long long>(j + 1);
  unsigned __int128 sum = 0;
  unsigned __int128 c = coef;
  for (long long j = a; j <= n; ++j) {
    sum += c;
    if (j < n) c = c * static_cast<unsigned long long>(n - j) / static_cast<unsigned long long>(j + 1);
  }
  const long double lo = static_cast<long double>(static_cast<std::uint64_t>(sum & 0xFFFFFFFFFFFFFFFFULL));
  const long double hi = static_cast<long double>(static_cast<std::uint64_t>(sum >> 64));
  return static_cast<double>(std::ldexp(hi, 64 - static_cast<int>(n)) +
                             std::ldexp(lo, -static_cast<int>(n)));
}

}  // namespace detail

// P(fill < 0.5 | model) = I_0.5(alpha, beta). Exact integer tail while the
// binomial row fits in machine words, continued fraction beyond.
inline double belief(const BetaModel& m) {
  if (m.alpha < 1 || m.beta < 1) throw std::invalid_argument("belief: counts must be >= 1");
  if (m.alpha + m.beta - 1 <= 64) return detail::belief_exact_small(m.alpha, m.beta);
  return detail::reg_inc_beta(static_cast<double>(m.alpha), static_cast<double>(m.beta), 0.5);
}

enum class FeedbackKind { NoFeedback, PositiveFeedback, SoftFeedback };

inline std::string to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::NoFeedback: return "no_feedback";
    case FeedbackKind::PositiveFeedback: return "positive_feedback";
    case FeedbackKind::SoftFeedback: return "soft_feedback";
  }
  return "?";
}

inline FeedbackKind feedback_kind_from_string(const std::string& s) {
  if (s == "no_feedback") return FeedbackKind::NoFeedback;
  if (s == "positive_feedback") return FeedbackKind::PositiveFeedback;
  if (s == "soft_feedback") return FeedbackKind::SoftFeedback;
  throw std::invalid_argument("unknown feedback strategy: " + s);
}

struct DecisionParams {
  long long min_updates = 381;      // observation count gate
  double threshold = 0.9;           // posterior mass needed to commit
};

// Returns the (possibly unchanged) decision: -1 undecided, 0 commits to
// "fill < 0.5", 1 commits to "fill > 0.5". Soft-feedback robots keep
// re-evaluating; the other strategies' first decision is final.
inline int try_decide(double belief_p, long long obs_count, int current, const DecisionParams& params,
                      FeedbackKind kind) {
  const bool may_evaluate = kind == FeedbackKind::SoftFeedback || current == -1;
  if (!may_evaluate || obs_count <= params.min_updates) return current;
  if (belief_p >= params.threshold) return 0;
  if (1.0 - belief_p >= params.threshold) return 1;
  return current;
}

inline int try_decide(const BetaModel& m, long long obs_count, int current,
                      const DecisionParams& params, FeedbackKind kind) {
  return try_decide(belief(m), obs_count, current, params, kind);
}

struct StrategySpec {
  FeedbackKind kind = FeedbackKind::NoFeedback;
  double eta = 1500.0;   // soft feedback: confidence sharpness
  double kappa = 2.0;    // soft feedback: belief-distance exponent
};

// Weight of the self-belief component in a soft-feedback message.
inline double soft_weight(const StrategySpec& s, double belief_p, double model_variance) {
  return std::exp(-s.eta * model_variance) * std::pow(std::fabs(0.5 - belief_p), s.kappa);
}

// The message a robot shares after an observation. No-feedback shares the raw
// observation; positive feedback shares the decision once made; soft feedback
// mixes the belief into the observation in proportion to confidence.
inline int construct_message(const StrategySpec& s, double belief_p, int obs_bit, int current,
                             double model_variance, Rng& rng) {
  switch (s.kind) {
    case FeedbackKind::NoFeedback:
      return obs_bit;
    case FeedbackKind::PositiveFeedback:
      return current != -1 ? current : obs_bit;
    case FeedbackKind::SoftFeedback: {
      const double delta = soft_weight(s, belief_p, model_variance);
      double p1 = delta * (1.0 - belief_p) + (1.0 - delta) * static_cast<double>(obs_bit);
      p1 = std::min(1.0, std::max(0.0, p1));
      return rng.bernoulli(p1) ? 1 : 0;
    }
  }
  throw std::logic_error("construct_message: bad strategy");
}

}  // namespace swarmsim
