#pragma once

#include <numbers>
#include <string>

namespace sttopo {

enum class ExampleId {
  // Space-uniform oscillating source, small heat sink on the lower boundary.
  OscillatingSource,
  // Gaussian source orbiting the centre, cold walls all around.
  MovingSource,
};

std::string to_string(ExampleId id);

struct ProblemDefinition {
  ExampleId example = ExampleId::OscillatingSource;
  double q0 = 100.0;
  // Moving source parameters (physical time).
  double radius = 0.25;
  double sigma = 0.05;
  double omega = std::numbers::pi;
  // Final physical time; rescaled time runs over [0, 1].
  double tau = 1.0;
  // Half-width of the heat sink centred on the lower boundary.
  double sink_half_width = 0.05;
  // Oscillation frequency of the space-uniform source (rescaled time).
  double source_frequency = 50.0;

  static ProblemDefinition oscillating();
  static ProblemDefinition moving();

  void validate() const;
};

// Rescaled heat density at (x1, x2, t) with t in [0, 1].
double evaluate_source(const ProblemDefinition& problem, double x1, double x2, double t);

struct SourceCentre {
  double x1;
  double x2;
};
// Centre of the moving source at rescaled time t.
SourceCentre source_centre(const ProblemDefinition& problem, double t);

}  // namespace sttopo
