#pragma once

#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sttopo/mesh.hpp"
#include "sttopo/optimizer.hpp"

namespace sttopo {

struct VtkField {
  std::string name;
  std::span<const double> values;
};

// Legacy ASCII STRUCTURED_POINTS file over the space-time box. Cell fields
// need N_e values, point fields N_n. Numbers use 17 significant digits so the
// output is byte-reproducible.
void export_vtk(const SpaceTimeMesh& mesh, const std::vector<VtkField>& cell_fields,
                const std::vector<VtkField>& point_fields, const std::filesystem::path& path);

inline constexpr const char* kMetricsVersionLine = "# sttopo-metrics v1";
inline constexpr const char* kMetricsHeader = "iter,phi,chi,state_iters,adjoint_iters,wall_seconds";

// Streams one CSV row per record and flushes after each.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::filesystem::path& path);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void write(const OptRecord& record);

 private:
  std::FILE* file_ = nullptr;
  std::filesystem::path path_;
};

void write_metrics(std::span<const OptRecord> records, const std::filesystem::path& path);

}  // namespace sttopo
