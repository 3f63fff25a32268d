#include "sttopo/assembly.hpp"

#include <algorithm>
#include <cmath>

#include "sttopo/error.hpp"

namespace sttopo {

namespace {

struct RowRange {
  int lo[3];
  int hi[3];
  int extent(int d) const { return hi[d] - lo[d] + 1; }
};

RowRange row_range(const SpaceTimeMesh& mesh, int i, int j, int k) {
  RowRange r;
  const int n[3] = {mesh.nx(), mesh.ny(), mesh.nt()};
  const int c[3] = {i, j, k};
  for (int d = 0; d < 3; ++d) {
    r.lo[d] = std::max(c[d] - 1, 0);
    r.hi[d] = std::min(c[d] + 1, n[d]);
  }
  return r;
}

// Visits every element touching node (i, j, k) in increasing element order and
// adds row `la` of its element matrix into the CSR row starting at `row`.
template <class ElementRow>
void accumulate_row(const SpaceTimeMesh& mesh, int i, int j, int k, double* row,
                    ElementRow&& element_row) {
  const RowRange rr = row_range(mesh, i, j, k);
  const int ex = rr.extent(0), ey = rr.extent(1);
  double local[8];
  for (int ek = std::max(k - 1, 0); ek <= std::min(k, mesh.nt() - 1); ++ek) {
    for (int ej = std::max(j - 1, 0); ej <= std::min(j, mesh.ny() - 1); ++ej) {
      for (int ei = std::max(i - 1, 0); ei <= std::min(i, mesh.nx() - 1); ++ei) {
        const int la = (i - ei) + 2 * (j - ej) + 4 * (k - ek);
        element_row(mesh.element(ei, ej, ek), la, local);
        for (int lb = 0; lb < 8; ++lb) {
          const int ci = ei + (lb & 1), cj = ej + ((lb >> 1) & 1), ck = ek + ((lb >> 2) & 1);
          const int slot = ((ck - rr.lo[2]) * ey + (cj - rr.lo[1])) * ex + (ci - rr.lo[0]);
          row[slot] += local[lb];
        }
      }
    }
  }
}

template <class ElementRow>
SparseMatrix assemble_rowwise(const SpaceTimeMesh& mesh, ElementRow&& element_row) {
  SparseMatrix m = stencil_pattern(mesh);
  const auto ptr = m.row_ptr();
  double* values = m.values().data();
  const int nx = mesh.nx(), ny = mesh.ny(), nt = mesh.nt();
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= nt; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const Index r = mesh.node(i, j, k);
        accumulate_row(mesh, i, j, k, values + ptr[r], element_row);
      }
    }
  }
  return m;
}

}  // namespace

SparseMatrix stencil_pattern(const SpaceTimeMesh& mesh) {
  const Index n = mesh.num_nodes();
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(n) + 1, 0);
  Index row = 0;
  for (int k = 0; k <= mesh.nt(); ++k) {
    for (int j = 0; j <= mesh.ny(); ++j) {
      for (int i = 0; i <= mesh.nx(); ++i) {
        const RowRange rr = row_range(mesh, i, j, k);
        ptr[row + 1] = ptr[row] + rr.extent(0) * rr.extent(1) * rr.extent(2);
        ++row;
      }
    }
  }
  std::vector<std::int32_t> idx(static_cast<std::size_t>(ptr.back()));
  std::size_t p = 0;
  for (int k = 0; k <= mesh.nt(); ++k) {
    for (int j = 0; j <= mesh.ny(); ++j) {
      for (int i = 0; i <= mesh.nx(); ++i) {
        const RowRange rr = row_range(mesh, i, j, k);
        for (int ck = rr.lo[2]; ck <= rr.hi[2]; ++ck)
          for (int cj = rr.lo[1]; cj <= rr.hi[1]; ++cj)
            for (int ci = rr.lo[0]; ci <= rr.hi[0]; ++ci)
              idx[p++] = static_cast<std::int32_t>(mesh.node(ci, cj, ck));
      }
    }
  }
  std::vector<double> val(idx.size(), 0.0);
  return SparseMatrix(n, n, std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix assemble_system(const SpaceTimeMesh& mesh, std::span<const double> capacity,
                             std::span<const double> conductivity) {
  const auto ne = static_cast<std::size_t>(mesh.num_elements());
  if (capacity.size() != ne || conductivity.size() != ne) {
    throw DimensionError("element coefficient arrays must have N_e = " + std::to_string(ne) +
                         " entries");
  }
  for (std::size_t e = 0; e < ne; ++e) {
    if (!(capacity[e] > 0.0 && conductivity[e] > 0.0)) {
      throw ConfigError("element coefficients must be positive (element " + std::to_string(e) +
                        ")");
    }
  }
  const ElementOperatorSet ops = reference_operators(mesh.dx(), mesh.dt());
  const double dt = mesh.dt();
  return assemble_rowwise(mesh, [&](Index e, int la, double* out) {
    const double c = capacity[e];
    const double k = conductivity[e];
    const double kad = artificial_diffusivity(c, dt);
    for (int lb = 0; lb < 8; ++lb) {
      out[lb] = c * entry(ops.time_convection, la, lb) + k * entry(ops.spatial_diffusion, la, lb) +
                kad * entry(ops.temporal_diffusion, la, lb);
    }
  });
}

SparseMatrix assemble_uniform(const SpaceTimeMesh& mesh, const ElementMatrix& element) {
  return assemble_rowwise(mesh, [&](Index, int la, double* out) {
    for (int lb = 0; lb < 8; ++lb) out[lb] = entry(element, la, lb);
  });
}

std::vector<double> assemble_source(const SpaceTimeMesh& mesh, const ProblemDefinition& problem) {
  problem.validate();
  std::vector<double> f(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
  const double dx = mesh.dx(), dt = mesh.dt();
  const double w = 0.125 * mesh.element_volume();
  // Shape values at the Gauss points do not depend on the element.
  std::array<ShapeEval, 8> shapes;
  for (int g = 0; g < 8; ++g) {
    shapes[g] = evaluate_shape(kGauss2[g & 1], kGauss2[(g >> 1) & 1], kGauss2[(g >> 2) & 1]);
  }
  for (Index e = 0; e < mesh.num_elements(); ++e) {
    const auto [ei, ej, ek] = mesh.element_coords(e);
    const auto nodes = mesh.element_nodes(e);
    for (int g = 0; g < 8; ++g) {
      const double x1 = (ei + kGauss2[g & 1]) * dx;
      const double x2 = (ej + kGauss2[(g >> 1) & 1]) * dx;
      const double t = (ek + kGauss2[(g >> 2) & 1]) * dt;
      const double q = evaluate_source(problem, x1, x2, t);
      if (q == 0.0) continue;
      for (int a = 0; a < 8; ++a) f[nodes[a]] += w * q * shapes[g].value[a];
    }
  }
  return f;
}

std::vector<double> assemble_element_load(const SpaceTimeMesh& mesh,
                                          std::span<const double> element_values) {
  if (static_cast<Index>(element_values.size()) != mesh.num_elements()) {
    throw DimensionError("element field length must equal N_e");
  }
  // int_e N_a dV = v_e / 8 for trilinear elements on a regular grid.
  const double w = mesh.element_volume() / 8.0;
  std::vector<double> rhs(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
  const int nx = mesh.nx(), ny = mesh.ny(), nt = mesh.nt();
#pragma omp parallel for schedule(static)
  for (int k = 0; k <= nt; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        double s = 0.0;
        for (int ek = std::max(k - 1, 0); ek <= std::min(k, nt - 1); ++ek)
          for (int ej = std::max(j - 1, 0); ej <= std::min(j, ny - 1); ++ej)
            for (int ei = std::max(i - 1, 0); ei <= std::min(i, nx - 1); ++ei)
              s += element_values[mesh.element(ei, ej, ek)];
        rhs[mesh.node(i, j, k)] = w * s;
      }
    }
  }
  return rhs;
}

std::vector<Index> dirichlet_set(const SpaceTimeMesh& mesh, const ProblemDefinition& problem) {
  problem.validate();
  std::vector<Index> nodes;
  const double tol = 1e-12;
  for (int k = 0; k <= mesh.nt(); ++k) {
    for (int j = 0; j <= mesh.ny(); ++j) {
      for (int i = 0; i <= mesh.nx(); ++i) {
        bool fixed = k == 0;
        if (problem.example == ExampleId::OscillatingSource) {
          const double x1 = i * mesh.dx();
          fixed = fixed || (j == 0 && std::abs(x1 - 0.5) <= problem.sink_half_width + tol);
        } else {
          fixed = fixed || i == 0 || j == 0 || i == mesh.nx() || j == mesh.ny();
        }
        if (fixed) nodes.push_back(mesh.node(i, j, k));
      }
    }
  }
  return nodes;
}

std::vector<char> dirichlet_mask(Index num_nodes, std::span<const Index> nodes) {
  std::vector<char> mask(static_cast<std::size_t>(num_nodes), 0);
  for (Index n : nodes) {
    if (n < 0 || n >= num_nodes) {
      throw DimensionError("Dirichlet node id " + std::to_string(n) + " out of range");
    }
    mask[n] = 1;
  }
  return mask;
}

void apply_dirichlet(SparseMatrix& matrix, std::span<double> rhs, std::span<const Index> nodes) {
  if (matrix.rows() != matrix.cols() || static_cast<Index>(rhs.size()) != matrix.rows()) {
    throw DimensionError("apply_dirichlet: matrix and rhs sizes differ");
  }
  const std::vector<char> mask = dirichlet_mask(matrix.rows(), nodes);
  const auto ptr = matrix.row_ptr();
  const auto idx = matrix.col_idx();
  auto val = matrix.values();
  for (Index r = 0; r < matrix.rows(); ++r) {
    if (mask[r]) {
      bool has_diag = false;
      for (auto p = ptr[r]; p < ptr[r + 1]; ++p) {
        val[p] = idx[p] == r ? 1.0 : 0.0;
        has_diag = has_diag || idx[p] == r;
      }
      if (!has_diag) throw DimensionError("constrained row has no diagonal entry");
      rhs[r] = 0.0;
      continue;
    }
    // Prescribed values are zero, so moving them to the rhs is a no-op.
    for (auto p = ptr[r]; p < ptr[r + 1]; ++p) {
      if (mask[idx[p]]) val[p] = 0.0;
    }
  }
}

void zero_constrained(std::span<double> v, std::span<const Index> nodes) {
  for (Index n : nodes) v[n] = 0.0;
}

}  // namespace sttopo
