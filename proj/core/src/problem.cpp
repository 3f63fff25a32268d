#include "sttopo/problem.hpp"

#include <cmath>
#include <sstream>

#include "sttopo/error.hpp"

namespace sttopo {

std::string to_string(ExampleId id) {
  return id == ExampleId::OscillatingSource ? "oscillating" : "moving";
}

ProblemDefinition ProblemDefinition::oscillating() { return ProblemDefinition{}; }

ProblemDefinition ProblemDefinition::moving() {
  ProblemDefinition p;
  p.example = ExampleId::MovingSource;
  p.q0 = 1.0;
  p.tau = 6.0;
  return p;
}

void ProblemDefinition::validate() const {
  std::ostringstream os;
  if (!(tau > 0.0)) os << "tau must be positive; ";
  if (!(q0 >= 0.0)) os << "q0 must be non-negative; ";
  if (example == ExampleId::MovingSource && !(sigma > 0.0)) os << "sigma must be positive; ";
  if (example == ExampleId::OscillatingSource && !(sink_half_width > 0.0 && sink_half_width < 0.5)) {
    os << "sink half-width must be in (0, 0.5); ";
  }
  if (!os.str().empty()) throw ConfigError("invalid problem: " + os.str());
}

SourceCentre source_centre(const ProblemDefinition& p, double t) {
  const double phase = p.omega * p.tau * t + std::numbers::pi / 2.0;
  return {0.5 + p.radius * std::cos(phase), 0.5 + p.radius * std::sin(phase)};
}

double evaluate_source(const ProblemDefinition& p, double x1, double x2, double t) {
  if (p.example == ExampleId::OscillatingSource) {
    return 0.5 * p.q0 * (1.0 - t) * (1.0 + std::cos(p.source_frequency * t));
  }
  const SourceCentre c = source_centre(p, t);
  const double r2 = (x1 - c.x1) * (x1 - c.x1) + (x2 - c.x2) * (x2 - c.x2);
  return p.q0 * std::exp(-r2 / (2.0 * p.sigma * p.sigma));
}

}  // namespace sttopo
