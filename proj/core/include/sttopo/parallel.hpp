#pragma once

#include <cstddef>
#include <span>

namespace sttopo {

// Reductions are accumulated over fixed-size blocks and the block partials are
// summed in index order, so results do not depend on the thread count.
inline constexpr std::size_t kReductionBlock = 4096;

// Applies STTOPO_NUM_THREADS (if set) to the OpenMP runtime. Returns the number
// of threads in use; 1 when built without OpenMP.
int configure_threads();
int thread_count();
void set_thread_count(int threads);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
void scale(double alpha, std::span<double> x);
void fill(std::span<double> x, double value);
void copy(std::span<const double> from, std::span<double> to);

}  // namespace sttopo
