#pragma once

#include <span>
#include <vector>

namespace sttopo {

struct MmaConfig {
  double move_limit = 0.2;
  // Initial asymptote half-width as a fraction of the bound range.
  double asymptote_init = 0.2;
  double asymptote_increase = 1.2;
  double asymptote_decrease = 0.7;
  // Divides asymptote_init by beta when enabled.
  bool beta_scaled_asymptotes = false;
  double beta = 32.0;
  double raa0 = 1e-5;
  // Artificial variable y for the single constraint: c y + d y^2 / 2.
  double c = 1000.0;
  double d = 1.0;
  double dual_tolerance = 1e-9;

  void validate() const;
};

// Method of Moving Asymptotes for min f(x) s.t. g(x) <= 0, lower <= x <= upper.
class Mma {
 public:
  Mma(std::size_t n, MmaConfig config, double lower = 0.0, double upper = 1.0);

  // Returns the next iterate. Throws SolverError if the dual has no root.
  std::vector<double> update(std::span<const double> x, std::span<const double> df, double g,
                             std::span<const double> dg);

  int iteration() const noexcept { return iteration_; }
  double last_multiplier() const noexcept { return lambda_; }
  std::span<const double> lower_asymptotes() const noexcept { return low_; }
  std::span<const double> upper_asymptotes() const noexcept { return upp_; }

 private:
  std::size_t n_;
  MmaConfig config_;
  double xmin_;
  double xmax_;
  int iteration_ = 0;
  double lambda_ = 0.0;
  std::vector<double> xold1_, xold2_, low_, upp_;
};

}  // namespace sttopo
