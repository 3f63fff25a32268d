#include "sttopo/mma.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sttopo/error.hpp"

namespace sttopo {

void MmaConfig::validate() const {
  std::ostringstream os;
  if (!(move_limit > 0.0 && move_limit <= 1.0)) os << "move_limit must lie in (0, 1]; ";
  if (!(asymptote_init > 0.0)) os << "asymptote_init must be positive; ";
  if (!(asymptote_decrease > 0.0 && asymptote_decrease < 1.0)) {
    os << "asymptote_decrease must lie in (0, 1); ";
  }
  if (!(asymptote_increase > 1.0)) os << "asymptote_increase must exceed 1; ";
  if (beta_scaled_asymptotes && !(beta > 0.0)) os << "beta must be positive; ";
  if (!(raa0 > 0.0)) os << "raa0 must be positive; ";
  if (!(c > 0.0 && d > 0.0)) os << "c and d must be positive; ";
  if (!(dual_tolerance > 0.0)) os << "dual_tolerance must be positive; ";
  if (!os.str().empty()) throw ConfigError("invalid MMA settings: " + os.str());
}

Mma::Mma(std::size_t n, MmaConfig config, double lower, double upper)
    : n_(n), config_(config), xmin_(lower), xmax_(upper) {
  config_.validate();
  if (!(upper > lower)) throw ConfigError("MMA bounds must satisfy lower < upper");
}

std::vector<double> Mma::update(std::span<const double> x, std::span<const double> df, double g,
                                std::span<const double> dg) {
  if (x.size() != n_ || df.size() != n_ || dg.size() != n_) {
    throw DimensionError("MMA vectors must all have the configured length");
  }
  const double range = xmax_ - xmin_;
  ++iteration_;
  if (iteration_ <= 2) {
    double init = config_.asymptote_init;
    if (config_.beta_scaled_asymptotes) init /= config_.beta;
    low_.resize(n_);
    upp_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      low_[j] = x[j] - init * range;
      upp_[j] = x[j] + init * range;
    }
  } else {
    for (std::size_t j = 0; j < n_; ++j) {
      const double trend = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
      double factor = 1.0;
      if (trend > 0.0) factor = config_.asymptote_increase;
      if (trend < 0.0) factor = config_.asymptote_decrease;
      low_[j] = x[j] - factor * (xold1_[j] - low_[j]);
      upp_[j] = x[j] + factor * (upp_[j] - xold1_[j]);
      low_[j] = std::clamp(low_[j], x[j] - 10.0 * range, x[j] - 0.01 * range);
      upp_[j] = std::clamp(upp_[j], x[j] + 0.01 * range, x[j] + 10.0 * range);
    }
  }

  std::vector<double> alpha(n_), beta(n_), p0(n_), q0(n_), p1(n_), q1(n_);
  double b = -g;
  const double eps = config_.raa0 / range;
  for (std::size_t j = 0; j < n_; ++j) {
    alpha[j] = std::max({xmin_, low_[j] + 0.1 * (x[j] - low_[j]),
                         x[j] - config_.move_limit * range});
    beta[j] = std::min({xmax_, upp_[j] - 0.1 * (upp_[j] - x[j]),
                        x[j] + config_.move_limit * range});
    const double ux = upp_[j] - x[j], xl = x[j] - low_[j];
    const double f_plus = std::max(df[j], 0.0), f_minus = std::max(-df[j], 0.0);
    p0[j] = ux * ux * (1.001 * f_plus + 0.001 * f_minus + eps);
    q0[j] = xl * xl * (0.001 * f_plus + 1.001 * f_minus + eps);
    const double g_plus = std::max(dg[j], 0.0), g_minus = std::max(-dg[j], 0.0);
    p1[j] = ux * ux * (1.001 * g_plus + 0.001 * g_minus + eps);
    q1[j] = xl * xl * (0.001 * g_plus + 1.001 * g_minus + eps);
    b += p1[j] / ux + q1[j] / xl;
  }

  std::vector<double> xn(n_);
  auto primal = [&](double lam) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double sp = std::sqrt(p0[j] + lam * p1[j]);
      const double sq = std::sqrt(q0[j] + lam * q1[j]);
      xn[j] = std::clamp((sp * low_[j] + sq * upp_[j]) / (sp + sq), alpha[j], beta[j]);
    }
  };
  // Derivative of the dual function; non-increasing in lambda.
  auto dual_slope = [&](double lam) {
    primal(lam);
    double h = -b - std::max(0.0, (lam - config_.c) / config_.d);
    for (std::size_t j = 0; j < n_; ++j) {
      h += p1[j] / (upp_[j] - xn[j]) + q1[j] / (xn[j] - low_[j]);
    }
    return h;
  };

  double lam = 0.0;
  if (dual_slope(0.0) > 0.0) {
    double lo = 0.0, hi = 1.0;
    int grow = 0;
    while (dual_slope(hi) > 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++grow > 200) throw SolverError("MMA dual multiplier is unbounded");
    }
    for (int it = 0; it < 200 && hi - lo > config_.dual_tolerance * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (dual_slope(mid) > 0.0 ? lo : hi) = mid;
    }
    lam = 0.5 * (lo + hi);
  }
  primal(lam);
  lambda_ = lam;

  xold2_ = std::move(xold1_);
  xold1_.assign(x.begin(), x.end());
  if (xold2_.empty()) xold2_ = xold1_;
  return xn;
}

}  // namespace sttopo
