#include "sttopo/mesh.hpp"

#include <cmath>
#include <sstream>

#include "sttopo/error.hpp"

namespace sttopo {

SpaceTimeMesh::SpaceTimeMesh(int nx1, int nx2, int nt) : nx_(nx1), ny_(nx2), nt_(nt) {
  if (nx1 < 1 || nx2 < 1 || nt < 1) {
    throw DimensionError("space-time mesh needs at least one element per direction");
  }
  if (nx1 != nx2) {
    std::ostringstream os;
    os << "space-time mesh must be square in space, got " << nx1 << " x " << nx2;
    throw DimensionError(os.str());
  }
}

std::array<int, 3> SpaceTimeMesh::node_coords(Index n) const noexcept {
  const Index plane = Index{nx_ + 1} * (ny_ + 1);
  const Index k = n / plane;
  const Index rem = n - k * plane;
  const Index j = rem / (nx_ + 1);
  const Index i = rem - j * (nx_ + 1);
  return {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)};
}

std::array<int, 3> SpaceTimeMesh::element_coords(Index e) const noexcept {
  const Index plane = Index{nx_} * ny_;
  const Index k = e / plane;
  const Index rem = e - k * plane;
  const Index j = rem / nx_;
  const Index i = rem - j * nx_;
  return {static_cast<int>(i), static_cast<int>(j), static_cast<int>(k)};
}

std::array<Index, 8> SpaceTimeMesh::element_nodes(Index e) const noexcept {
  const auto [i, j, k] = element_coords(e);
  std::array<Index, 8> nodes{};
  for (int a = 0; a < 8; ++a) {
    nodes[static_cast<std::size_t>(a)] = node(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
  }
  return nodes;
}

SpaceTimeMesh build_mesh(int nx1, int nx2, int nt) {
  if (nx1 < 2 || nx2 < 2 || nt < 2) {
    std::ostringstream os;
    os << "element counts must be >= 2, got " << nx1 << " x " << nx2 << " x " << nt;
    throw DimensionError(os.str());
  }
  return SpaceTimeMesh(nx1, nx2, nt);
}

void MaterialSet::validate() const {
  std::ostringstream os;
  if (!(c_ins > 0.0 && c_ins <= c_con)) os << "require 0 < C_ins <= C_con; ";
  if (!(k_ins > 0.0 && k_ins <= k_con)) os << "require 0 < k_ins <= k_con; ";
  if (!(p_c >= 1.0 && p_k >= 1.0)) os << "SIMP exponents must be >= 1; ";
  if (!(tau > 0.0 && length > 0.0)) os << "tau and L must be positive; ";
  if (!os.str().empty()) throw ConfigError("invalid material set: " + os.str());
}

std::string to_string(CoarseningKind kind) {
  switch (kind) {
    case CoarseningKind::Finest: return "finest";
    case CoarseningKind::Space: return "space";
    case CoarseningKind::Time: return "time";
    case CoarseningKind::Full: return "full";
  }
  return "unknown";
}

double effective_diffusivity(const MaterialSet& m) {
  return std::sqrt(m.k_tilde_con() * m.k_tilde_ins() / (m.c_con * m.c_ins));
}

namespace {

GridLevel make_level(int index, int nx, int ny, int nt, CoarseningKind kind, double d_eff) {
  GridLevel level;
  level.index = index;
  level.nx = nx;
  level.ny = ny;
  level.nt = nt;
  level.dx = 1.0 / nx;
  level.dt = 1.0 / nt;
  level.kind = kind;
  level.lambda_eff = d_eff * level.dt / (level.dx * level.dx);
  return level;
}

bool divisible(const GridLevel& level, CoarseningKind kind) {
  const bool space_ok = level.nx % 2 == 0 && level.ny % 2 == 0 && level.nx >= 2;
  const bool time_ok = level.nt % 2 == 0 && level.nt >= 2;
  switch (kind) {
    case CoarseningKind::Space: return space_ok;
    case CoarseningKind::Time: return time_ok;
    case CoarseningKind::Full: return space_ok && time_ok;
    case CoarseningKind::Finest: return false;
  }
  return false;
}

}  // namespace

Hierarchy build_hierarchy(const SpaceTimeMesh& mesh, const MaterialSet& materials,
                          std::optional<int> num_levels, double lambda_crit,
                          CoarseningMode mode) {
  materials.validate();
  if (num_levels && *num_levels < 2) {
    throw HierarchyError("a multigrid hierarchy needs at least 2 levels");
  }
  if (!(lambda_crit > 0.0)) throw ConfigError("lambda_crit must be positive");

  Hierarchy h;
  h.effective_diffusivity = effective_diffusivity(materials);
  h.lambda_crit = lambda_crit;
  h.mode = mode;
  h.levels.push_back(
      make_level(0, mesh.nx(), mesh.ny(), mesh.nt(), CoarseningKind::Finest, h.effective_diffusivity));

  for (int l = 1;; ++l) {
    if (num_levels && l >= *num_levels) break;
    const GridLevel& parent = h.levels.back();
    if (!num_levels && l > 1 && parent.num_nodes() <= kAutoCoarsestNodes) break;

    CoarseningKind kind = CoarseningKind::Full;
    if (mode == CoarseningMode::Semi) {
      kind = parent.lambda_eff < lambda_crit ? CoarseningKind::Time : CoarseningKind::Space;
    }
    if (!divisible(parent, kind)) {
      if (!num_levels) break;
      std::ostringstream os;
      os << "cannot construct level " << l << ": level " << parent.index << " ("
         << parent.nx << "x" << parent.ny << "x" << parent.nt << ") is not divisible by 2 in "
         << to_string(kind);
      throw HierarchyError(os.str());
    }
    int nx = parent.nx, ny = parent.ny, nt = parent.nt;
    if (kind != CoarseningKind::Time) {
      nx /= 2;
      ny /= 2;
    }
    if (kind != CoarseningKind::Space) nt /= 2;
    h.levels.push_back(make_level(l, nx, ny, nt, kind, h.effective_diffusivity));
  }
  if (h.levels.size() < 2 && !num_levels) {
    // Auto mode always tries for at least one coarse level; a single level is
    // only possible when nothing is divisible.
    throw HierarchyError("mesh admits no coarsening in the selected direction");
  }
  return h;
}

}  // namespace sttopo
