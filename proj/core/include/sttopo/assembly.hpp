#pragma once

#include <span>
#include <vector>

#include "sttopo/element.hpp"
#include "sttopo/mesh.hpp"
#include "sttopo/problem.hpp"
#include "sttopo/sparse.hpp"

namespace sttopo {

// 27-point trilinear sparsity pattern with zero values.
SparseMatrix stencil_pattern(const SpaceTimeMesh& mesh);

// Global all-at-once matrix from element-wise constant (C_e, k_e). Rows are
// assembled independently so the result is bitwise reproducible.
SparseMatrix assemble_system(const SpaceTimeMesh& mesh, std::span<const double> capacity,
                             std::span<const double> conductivity);

// Same element matrix on every element.
SparseMatrix assemble_uniform(const SpaceTimeMesh& mesh, const ElementMatrix& element);

// f_a = sum_e int N_a Q dV with Q sampled at the 2x2x2 Gauss points.
std::vector<double> assemble_source(const SpaceTimeMesh& mesh, const ProblemDefinition& problem);

// rhs_a = sum_e value_e int_e N_a dV for an element-wise constant field.
std::vector<double> assemble_element_load(const SpaceTimeMesh& mesh,
                                          std::span<const double> element_values);

// Sorted node ids carrying T = 0: the t = 0 face plus the example's walls.
std::vector<Index> dirichlet_set(const SpaceTimeMesh& mesh, const ProblemDefinition& problem);

std::vector<char> dirichlet_mask(Index num_nodes, std::span<const Index> nodes);

// Homogeneous symmetric elimination: constrained rows and columns are zeroed,
// the diagonal set to one and the rhs entry to zero. Throws DimensionError for
// ids out of range.
void apply_dirichlet(SparseMatrix& matrix, std::span<double> rhs, std::span<const Index> nodes);

// Zeros the constrained entries of a vector.
void zero_constrained(std::span<double> v, std::span<const Index> nodes);

}  // namespace sttopo
