#include "sttopo/io.hpp"

#include <cerrno>
#include <cstring>

#include "sttopo/error.hpp"

namespace sttopo {

namespace {

std::FILE* open_or_throw(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) {
    throw IoError("cannot open '" + path.string() + "' for writing: " + std::strerror(errno));
  }
  return f;
}

void write_scalars(std::FILE* f, const VtkField& field) {
  std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", field.name.c_str());
  for (double v : field.values) std::fprintf(f, "%.17g\n", v);
}

}  // namespace

void export_vtk(const SpaceTimeMesh& mesh, const std::vector<VtkField>& cell_fields,
                const std::vector<VtkField>& point_fields, const std::filesystem::path& path) {
  for (const auto& f : cell_fields) {
    if (static_cast<Index>(f.values.size()) != mesh.num_elements()) {
      throw DimensionError("cell field '" + f.name + "' has " + std::to_string(f.values.size()) +
                           " values, expected " + std::to_string(mesh.num_elements()));
    }
  }
  for (const auto& f : point_fields) {
    if (static_cast<Index>(f.values.size()) != mesh.num_nodes()) {
      throw DimensionError("point field '" + f.name + "' has " + std::to_string(f.values.size()) +
                           " values, expected " + std::to_string(mesh.num_nodes()));
    }
  }
  std::FILE* f = open_or_throw(path);
  std::fprintf(f, "# vtk DataFile Version 3.0\nsttopo space-time field\nASCII\n");
  std::fprintf(f, "DATASET STRUCTURED_POINTS\n");
  std::fprintf(f, "DIMENSIONS %d %d %d\n", mesh.nx() + 1, mesh.ny() + 1, mesh.nt() + 1);
  std::fprintf(f, "ORIGIN 0 0 0\n");
  std::fprintf(f, "SPACING %.17g %.17g %.17g\n", mesh.dx(), mesh.dx(), mesh.dt());
  if (!cell_fields.empty()) {
    std::fprintf(f, "CELL_DATA %lld\n", static_cast<long long>(mesh.num_elements()));
    for (const auto& field : cell_fields) write_scalars(f, field);
  }
  if (!point_fields.empty()) {
    std::fprintf(f, "POINT_DATA %lld\n", static_cast<long long>(mesh.num_nodes()));
    for (const auto& field : point_fields) write_scalars(f, field);
  }
  const bool failed = std::ferror(f) != 0;
  if (std::fclose(f) != 0 || failed) throw IoError("failed writing '" + path.string() + "'");
}

MetricsWriter::MetricsWriter(const std::filesystem::path& path)
    : file_(open_or_throw(path)), path_(path) {
  std::fprintf(file_, "%s\n%s\n", kMetricsVersionLine, kMetricsHeader);
  if (std::fflush(file_) != 0) throw IoError("failed writing '" + path_.string() + "'");
}

MetricsWriter::~MetricsWriter() {
  if (file_) std::fclose(file_);
}

void MetricsWriter::write(const OptRecord& r) {
  std::fprintf(file_, "%d,%.17g,%.17g,%d,%d,%.17g\n", r.iteration, r.phi, r.chi,
               r.state.outer_iterations, r.adjoint.outer_iterations, r.wall_seconds);
  if (std::fflush(file_) != 0 || std::ferror(file_)) {
    throw IoError("failed writing '" + path_.string() + "'");
  }
}

void write_metrics(std::span<const OptRecord> records, const std::filesystem::path& path) {
  MetricsWriter w(path);
  for (const auto& r : records) w.write(r);
}

}  // namespace sttopo
