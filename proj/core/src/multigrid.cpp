#include "sttopo/multigrid.hpp"

#include <sstream>

#include "sttopo/error.hpp"
#include "sttopo/parallel.hpp"

namespace sttopo {

namespace {

struct Weights1D {
  int count = 0;
  int index[2]{};
  double weight[2]{};
};

// Fine index -> coarse stencil for one direction.
Weights1D interpolation_weights(int fine_index, bool coarsened) {
  Weights1D w;
  if (!coarsened) {
    w.count = 1;
    w.index[0] = fine_index;
    w.weight[0] = 1.0;
  } else if (fine_index % 2 == 0) {
    w.count = 1;
    w.index[0] = fine_index / 2;
    w.weight[0] = 1.0;
  } else {
    w.count = 2;
    w.index[0] = fine_index / 2;
    w.index[1] = fine_index / 2 + 1;
    w.weight[0] = 0.5;
    w.weight[1] = 0.5;
  }
  return w;
}

}  // namespace

SparseMatrix build_prolongation(const GridLevel& fine, const GridLevel& coarse) {
  auto step = [](int f, int c) -> int {
    if (f == c) return 1;
    if (f == 2 * c) return 2;
    return 0;
  };
  const int sx = step(fine.nx, coarse.nx);
  const int sy = step(fine.ny, coarse.ny);
  const int st = step(fine.nt, coarse.nt);
  if (sx == 0 || sy == 0 || st == 0 || sx != sy || (sx == 1 && st == 1)) {
    std::ostringstream os;
    os << "levels " << fine.nx << "x" << fine.ny << "x" << fine.nt << " and " << coarse.nx << "x"
       << coarse.ny << "x" << coarse.nt << " are not a parent/child pair";
    throw HierarchyError(os.str());
  }
  const bool space = sx == 2;
  const bool time = st == 2;
  const SpaceTimeMesh fm(fine.nx, fine.ny, fine.nt);
  const SpaceTimeMesh cm(coarse.nx, coarse.ny, coarse.nt);

  std::vector<std::int64_t> ptr(static_cast<std::size_t>(fm.num_nodes()) + 1, 0);
  std::vector<std::int32_t> idx;
  std::vector<double> val;
  idx.reserve(static_cast<std::size_t>(fm.num_nodes()) * 2);
  val.reserve(static_cast<std::size_t>(fm.num_nodes()) * 2);
  Index row = 0;
  for (int k = 0; k <= fine.nt; ++k) {
    const Weights1D wt = interpolation_weights(k, time);
    for (int j = 0; j <= fine.ny; ++j) {
      const Weights1D wy = interpolation_weights(j, space);
      for (int i = 0; i <= fine.nx; ++i) {
        const Weights1D wx = interpolation_weights(i, space);
        // Loop order (t, y, x) keeps coarse column ids increasing.
        for (int c = 0; c < wt.count; ++c) {
          for (int b = 0; b < wy.count; ++b) {
            for (int a = 0; a < wx.count; ++a) {
              idx.push_back(static_cast<std::int32_t>(cm.node(wx.index[a], wy.index[b], wt.index[c])));
              val.push_back(wx.weight[a] * wy.weight[b] * wt.weight[c]);
            }
          }
        }
        ptr[++row] = static_cast<std::int64_t>(idx.size());
      }
    }
  }
  return SparseMatrix(fm.num_nodes(), cm.num_nodes(), std::move(ptr), std::move(idx),
                      std::move(val));
}

Multigrid::Multigrid(const Hierarchy& hierarchy, SparseMatrix fine, SolverConfig config)
    : config_(config) {
  config_.validate();
  const auto& levels = hierarchy.levels;
  if (fine.rows() != levels.front().num_nodes() || fine.cols() != fine.rows()) {
    throw DimensionError("fine operator does not match the finest hierarchy level");
  }
  operators_.push_back(std::move(fine));
  for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
    prolongations_.push_back(build_prolongation(levels[l], levels[l + 1]));
  }
  setup_levels();
}

Multigrid::Multigrid(std::vector<SparseMatrix> prolongations, SparseMatrix fine,
                     SolverConfig config)
    : config_(config), prolongations_(std::move(prolongations)) {
  config_.validate();
  if (fine.rows() != fine.cols()) throw DimensionError("fine operator must be square");
  operators_.push_back(std::move(fine));
  setup_levels();
}

void Multigrid::setup_levels() {
  restrictions_.clear();
  for (std::size_t l = 0; l < prolongations_.size(); ++l) {
    const SparseMatrix& p = prolongations_[l];
    if (p.rows() != operators_[l].rows()) {
      throw DimensionError("prolongation " + std::to_string(l) + " does not match level size");
    }
    restrictions_.push_back(p.transposed());
    operators_.push_back(multiply(restrictions_.back(), multiply(operators_[l], p)));
  }
  jacobi_.clear();
  for (const auto& op : operators_) jacobi_.emplace_back(op);
  scratch_.assign(operators_.size(), LevelScratch{});
  level_iterations_.assign(operators_.size(), 0);
}

Multigrid Multigrid::transposed() const {
  Multigrid t;
  t.config_ = config_;
  t.prolongations_ = prolongations_;
  t.restrictions_ = restrictions_;
  for (const auto& op : operators_) t.operators_.push_back(op.transposed());
  for (const auto& op : t.operators_) t.jacobi_.emplace_back(op);
  t.scratch_.assign(t.operators_.size(), LevelScratch{});
  t.level_iterations_.assign(t.operators_.size(), 0);
  return t;
}

const SparseMatrix& Multigrid::level_operator(int level) const {
  if (level < 0 || level >= num_levels()) {
    throw HierarchyError("multigrid level " + std::to_string(level) + " is not populated");
  }
  return operators_[level];
}

void Multigrid::reset_counters() const {
  std::fill(level_iterations_.begin(), level_iterations_.end(), 0);
}

void Multigrid::vcycle(int level, std::span<const double> r, std::span<double> z) const {
  const SparseMatrix& a = level_operator(level);
  auto& s = scratch_[level];
  fill(z, 0.0);
  const bool coarsest = level + 1 == num_levels();
  if (coarsest) {
    const auto res = gmres(a, jacobi_[level], r, z, config_.smoother_rtol, config_.coarse_maxit,
                           config_.coarse_maxit, &s.gmres);
    level_iterations_[level] += res.iterations;
    return;
  }
  auto pre = gmres(a, jacobi_[level], r, z, config_.smoother_rtol, config_.smoother_maxit,
                   config_.smoother_maxit, &s.gmres);
  level_iterations_[level] += pre.iterations;

  const auto n = static_cast<std::size_t>(a.rows());
  const auto nc = static_cast<std::size_t>(operators_[level + 1].rows());
  s.residual.resize(n);
  s.coarse_rhs.resize(nc);
  s.coarse_correction.resize(nc);
  a.residual(r, z, s.residual);
  restrictions_[level].multiply(s.residual, s.coarse_rhs);
  vcycle(level + 1, s.coarse_rhs, s.coarse_correction);
  // z += P e, reusing the residual buffer for the prolongated correction.
  prolongations_[level].multiply(s.coarse_correction, s.residual);
  axpy(1.0, s.residual, z);

  auto post = gmres(a, jacobi_[level], r, z, config_.smoother_rtol, config_.smoother_maxit,
                    config_.smoother_maxit, &s.gmres);
  level_iterations_[level] += post.iterations;
}

Preconditioner Multigrid::as_preconditioner() const {
  return [this](std::span<const double> r, std::span<double> z) { apply(r, z); };
}

SolverStats solve_with_multigrid(const Multigrid& mg, std::span<const double> b,
                                 std::span<double> x) {
  mg.reset_counters();
  SolverStats stats = fgmres(mg.fine_operator(), b, x, mg.as_preconditioner(), mg.config());
  stats.level_iterations = mg.level_iterations();
  return stats;
}

}  // namespace sttopo
