#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sttopo {

using Index = std::int64_t;

// Regular (2+1)D space-time grid on the rescaled unit cube [0,1]^3.
//
// Nodes and elements are numbered lexicographically with x1 fastest, then x2,
// then t. Local element nodes follow the same rule: a = i + 2 j + 4 k for the
// corner offsets (i, j, k) in {0,1}^3.
class SpaceTimeMesh {
 public:
  SpaceTimeMesh(int nx1, int nx2, int nt);

  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  int nt() const noexcept { return nt_; }

  double dx() const noexcept { return 1.0 / nx_; }
  double dt() const noexcept { return 1.0 / nt_; }
  double element_volume() const noexcept { return dx() * dx() * dt(); }

  Index num_elements() const noexcept { return Index{nx_} * ny_ * nt_; }
  Index num_nodes() const noexcept { return Index{nx_ + 1} * (ny_ + 1) * (nt_ + 1); }
  Index num_spatial_elements() const noexcept { return Index{nx_} * ny_; }
  Index num_spatial_nodes() const noexcept { return Index{nx_ + 1} * (ny_ + 1); }

  Index node(int i, int j, int k) const noexcept {
    return i + Index{nx_ + 1} * (j + Index{ny_ + 1} * k);
  }
  Index element(int i, int j, int k) const noexcept {
    return i + Index{nx_} * (j + Index{ny_} * k);
  }

  std::array<int, 3> node_coords(Index n) const noexcept;
  std::array<int, 3> element_coords(Index e) const noexcept;
  std::array<Index, 8> element_nodes(Index e) const noexcept;

  friend bool operator==(const SpaceTimeMesh&, const SpaceTimeMesh&) = default;

 private:
  int nx_;
  int ny_;
  int nt_;
};

// Validating factory; throws DimensionError for nx1 != nx2 or counts < 2.
SpaceTimeMesh build_mesh(int nx1, int nx2, int nt);

// Volumetric capacities and conductivities of the two phases. Conductivities
// are stored in physical form; the rescaled values absorb tau / L^2.
struct MaterialSet {
  double c_ins = 0.5;
  double c_con = 1.0;
  double k_ins = 0.03;
  double k_con = 3.0;
  double p_c = 2.0;
  double p_k = 3.0;
  double tau = 1.0;
  double length = 1.0;

  double k_tilde_ins() const noexcept { return k_ins * tau / (length * length); }
  double k_tilde_con() const noexcept { return k_con * tau / (length * length); }

  // Throws ConfigError when an invariant is violated.
  void validate() const;
};

enum class CoarseningKind { Finest, Space, Time, Full };

std::string to_string(CoarseningKind kind);

struct GridLevel {
  int index = 0;
  int nx = 0;
  int ny = 0;
  int nt = 0;
  double dx = 0.0;
  double dt = 0.0;
  CoarseningKind kind = CoarseningKind::Finest;
  // D_eff * dt / dx^2 evaluated on this level.
  double lambda_eff = 0.0;

  Index num_nodes() const noexcept { return Index{nx + 1} * (ny + 1) * (nt + 1); }
  SpaceTimeMesh mesh() const { return SpaceTimeMesh(nx, ny, nt); }
};

enum class CoarseningMode {
  // Halve space or time per level, picked by the effective anisotropy.
  Semi,
  // Halve all three directions per level.
  Full,
};

struct Hierarchy {
  std::vector<GridLevel> levels;
  double effective_diffusivity = 0.0;
  double lambda_crit = 0.5;
  CoarseningMode mode = CoarseningMode::Semi;

  int num_levels() const noexcept { return static_cast<int>(levels.size()); }
  const GridLevel& finest() const { return levels.front(); }
  const GridLevel& coarsest() const { return levels.back(); }
};

inline constexpr Index kAutoCoarsestNodes = 25000;

double effective_diffusivity(const MaterialSet& materials);

// Builds the level stack. With an explicit level count every requested
// coarsening must be possible (HierarchyError otherwise). Without one, levels
// are added until the coarsest has at most kAutoCoarsestNodes nodes or the
// selected direction is no longer divisible by two.
Hierarchy build_hierarchy(const SpaceTimeMesh& mesh, const MaterialSet& materials,
                          std::optional<int> num_levels = std::nullopt,
                          double lambda_crit = 0.5,
                          CoarseningMode mode = CoarseningMode::Semi);

}  // namespace sttopo
