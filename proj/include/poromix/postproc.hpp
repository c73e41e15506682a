#pragma once

#include "poromix/fespace.hpp"
#include "poromix/timeloop.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace poromix {

inline constexpr int kErrorQuadrature = 6;

/// Reference solution; divergences are needed for the H(div) errors.
struct ExactFields {
  TensorField sigma;
  ScalarField p;
  VectorField u;
  VectorField w;
  VectorField div_sigma;
  ScalarField div_w;
};

struct ErrorReport {
  std::string scenario;
  int level = 0;
  double h = 0.0;
  double one_over_h = 0.0;
  double tau = 0.0;
  int ndofs = 0;
  double l2_u = 0.0, l2_w = 0.0, l2_sigma = 0.0, l2_p = 0.0;
  double l2_dev_sigma = 0.0;
  double hdiv_sigma = 0.0, hdiv_w = 0.0;          ///< |e|^2 + h_Omega^2 |div e|^2
  double hdiv_sigma_unw = 0.0, hdiv_w_unw = 0.0;  ///< |e|^2 + |div e|^2
  double l2_div_sigma = 0.0, l2_div_w = 0.0;
  double skw_ratio = 0.0;
  double energy_final = 0.0;
  double walltime_s = 0.0;
};

/// Cellwise quadrature of the differences between x and the exact fields at
/// time t. Fills the norm fields of the report only.
ErrorReport error_norms(const Eigen::VectorXd& x, double t, const ExactFields& exact, const Mesh& mesh,
                        const FieldSpaces& spaces);

/// |skw sigma_h| / max(|sigma_h|, tiny) in L2.
double skw_diagnostic(const Eigen::VectorXd& x, const Mesh& mesh, const FieldSpaces& spaces);

/// Slopes log(e_i / e_{i+1}) / log(h_i / h_{i+1}). Throws DegenerateRatio
/// for equal mesh sizes and InvalidValue for non-positive errors.
std::vector<double> eoc(const std::vector<double>& h, const std::vector<double>& errors);

/// Per-cell values written to VTK snapshots.
struct CellFields {
  std::vector<double> velocity_magnitude, velocity_y, pressure, skw_sigma, dev_sigma;
};
CellFields cell_fields(const Eigen::VectorXd& x, const Mesh& mesh, const FieldSpaces& spaces);

/// Finds the cell containing a point through a uniform grid of buckets.
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);
  /// -1 if x lies outside every cell.
  [[nodiscard]] int find(const Vec2& x) const;

 private:
  const Mesh* mesh_;
  int nb_ = 1;
  double x0_ = 0.0, y0_ = 0.0, dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<int>> buckets_;
};

/// Mirror-symmetry defects of a cellwise field sampled at the cell centroids:
/// max |f(x, y) - f(x', y)| / max |f| for the reflection about the vertical
/// mid-line, and likewise for the horizontal one.
struct ReflectionDefect {
  double left_right = 0.0;
  double up_down = 0.0;
};
ReflectionDefect reflection_defect(const Mesh& mesh, const std::vector<double>& cell_values);

/// max over cells touching the boundary (by a vertex) of |f|, divided by
/// max |f|. Zero for an identically zero field.
double boundary_ratio(const Mesh& mesh, const std::vector<double>& cell_values);

const std::vector<std::string>& error_csv_columns();
void write_error_csv(const std::filesystem::path& path, const std::vector<ErrorReport>& rows);
void write_energy_csv(const std::filesystem::path& path, const std::vector<EnergyRecord>& trace);
void write_vtk(const std::filesystem::path& path, const Mesh& mesh, const FieldSpaces& spaces,
               const Eigen::VectorXd& x, double t);

}  // namespace poromix
