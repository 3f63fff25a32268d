#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "sttopo/error.hpp"
#include "sttopo/io.hpp"

using namespace sttopo;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("sttopo-io-" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// Values following "SCALARS <name>" and its lookup table line.
std::vector<double> scalars(const std::vector<std::string>& lines, const std::string& name,
                            std::size_t count) {
  std::vector<double> v;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].rfind("SCALARS " + name + " ", 0) == 0) {
      for (std::size_t j = i + 2; j < i + 2 + count && j < lines.size(); ++j) {
        v.push_back(std::stod(lines[j]));
      }
    }
  }
  return v;
}

std::vector<OptRecord> sample_records(int n) {
  std::vector<OptRecord> out;
  for (int i = 0; i < n; ++i) {
    OptRecord r;
    r.iteration = i;
    r.phi = 10.0 / (i + 1.0) + 1.0 / 3.0;
    r.chi = -0.1 * i;
    r.state.outer_iterations = 5 + i;
    r.adjoint.outer_iterations = 9 + 2 * i;
    r.wall_seconds = 0.125 * i;
    out.push_back(r);
  }
  return out;
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("cell data on a 2x2x2 mesh") {
    TempDir dir;
    const SpaceTimeMesh mesh(2, 2, 2);
    const std::vector<double> g{0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 1};
    const fs::path file = dir.path / "a.vtk";
    export_vtk(mesh, {{"gamma", g}}, {}, file);
    const auto lines = read_lines(file);
    CHECK(std::count(lines.begin(), lines.end(), "CELL_DATA 8") == 1);
    CHECK(std::count(lines.begin(), lines.end(), "DIMENSIONS 3 3 3") == 1);
    CHECK(std::count(lines.begin(), lines.end(), "DATASET STRUCTURED_POINTS") == 1);
    CHECK(scalars(lines, "gamma", 8) == g);
  }

  TEST_CASE("round trip and byte reproducibility") {
    TempDir dir;
    const SpaceTimeMesh mesh(4, 4, 6);
    std::mt19937_64 rng(5);
    const auto cell = oracle::random_vector(static_cast<std::size_t>(mesh.num_elements()), rng);
    const auto point = oracle::random_vector(static_cast<std::size_t>(mesh.num_nodes()), rng, -1e5, 1e5);
    export_vtk(mesh, {{"gamma_bar", cell}}, {{"temperature", point}}, dir.path / "a.vtk");
    export_vtk(mesh, {{"gamma_bar", cell}}, {{"temperature", point}}, dir.path / "b.vtk");
    const auto lines = read_lines(dir.path / "a.vtk");
    CHECK(scalars(lines, "gamma_bar", cell.size()) == cell);
    CHECK(scalars(lines, "temperature", point.size()) == point);
    CHECK(lines == read_lines(dir.path / "b.vtk"));
  }

  TEST_CASE("zero temperature field") {
    TempDir dir;
    const SpaceTimeMesh mesh(2, 2, 4);
    const std::vector<double> t(static_cast<std::size_t>(mesh.num_nodes()), 0.0);
    export_vtk(mesh, {}, {{"temperature", t}}, dir.path / "z.vtk");
    const auto lines = read_lines(dir.path / "z.vtk");
    CHECK(std::count(lines.begin(), lines.end(), "POINT_DATA 45") == 1);
    const auto v = scalars(lines, "temperature", t.size());
    CHECK(v.size() == t.size());
    for (double x : v) CHECK(x == 0.0);
  }

  TEST_CASE("vtk errors") {
    TempDir dir;
    const SpaceTimeMesh mesh(2, 2, 2);
    const std::vector<double> bad(7, 0.0), ok(8, 0.0);
    CHECK_THROWS_AS(export_vtk(mesh, {{"gamma", bad}}, {}, dir.path / "x.vtk"), DimensionError);
    CHECK_THROWS_AS(export_vtk(mesh, {}, {{"temperature", ok}}, dir.path / "x.vtk"), DimensionError);
    CHECK_THROWS_AS(export_vtk(mesh, {{"gamma", ok}}, {}, dir.path / "missing" / "x.vtk"), IoError);
  }

  TEST_CASE("metrics file layout") {
    TempDir dir;
    write_metrics({}, dir.path / "empty.csv");
    const auto empty = read_lines(dir.path / "empty.csv");
    REQUIRE(empty.size() == 2);
    CHECK(empty[0] == kMetricsVersionLine);
    CHECK(empty[1] == kMetricsHeader);

    const auto recs = sample_records(3);
    write_metrics(recs, dir.path / "m.csv");
    const auto lines = read_lines(dir.path / "m.csv");
    std::size_t data = 0;
    for (const auto& l : lines) data += l.rfind('#', 0) == 0 ? 0 : 1;
    CHECK(data == 4);
    CHECK(lines[2].rfind("0,", 0) == 0);
    CHECK_THROWS_AS(write_metrics(recs, dir.path / "missing" / "m.csv"), IoError);
  }

  TEST_CASE("metrics rows are flushed as they are written") {
    TempDir dir;
    const auto recs = sample_records(2);
    MetricsWriter w(dir.path / "live.csv");
    w.write(recs[0]);
    CHECK(read_lines(dir.path / "live.csv").size() == 3);
    w.write(recs[1]);
    CHECK(read_lines(dir.path / "live.csv").size() == 4);
  }

  TEST_CASE("averages from the file match the records") {
    TempDir dir;
    const auto recs = sample_records(7);
    write_metrics(recs, dir.path / "m.csv");
    const auto lines = read_lines(dir.path / "m.csv");
    double s_file = 0, a_file = 0, phi_file = 0, s_mem = 0, a_mem = 0, phi_mem = 0;
    for (std::size_t i = 2; i < lines.size(); ++i) {
      std::stringstream ss(lines[i]);
      std::string cell;
      std::vector<std::string> cols;
      while (std::getline(ss, cell, ',')) cols.push_back(cell);
      REQUIRE(cols.size() == 6);
      phi_file += std::stod(cols[1]);
      s_file += std::stod(cols[3]);
      a_file += std::stod(cols[4]);
    }
    for (const auto& r : recs) {
      phi_mem += r.phi;
      s_mem += r.state.outer_iterations;
      a_mem += r.adjoint.outer_iterations;
    }
    const double n = static_cast<double>(recs.size());
    CHECK(std::abs(s_file / n - s_mem / n) <= 1e-12);
    CHECK(std::abs(a_file / n - a_mem / n) <= 1e-12);
    CHECK(std::abs(phi_file / n - phi_mem / n) <= 1e-12);
  }
}
