#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mzlab/model.hpp"
#include "mzlab/tensor.hpp"
#include "mzlab/training.hpp"

namespace mzlab {

// ---------------------------------------------------------------------------
// PCA

struct SymmetricEigen {
  Vector values;               // descending
  std::vector<Vector> vectors;  // vectors[i] pairs with values[i], unit length
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
// `tolerance` times the matrix norm.
SymmetricEigen jacobi_eigen(const Tensor2& symmetric, double tolerance = 1e-12,
                            std::size_t max_sweeps = 100);

struct PcaModel {
  Vector mean;
  std::vector<Vector> components;  // n_components x dim, orthonormal
  Vector explained_variance;
  Vector explained_variance_ratio;
};

// Sample-covariance PCA. Each component's largest-magnitude entry is positive.
PcaModel fit_pca(const Tensor2& data, std::size_t n_components = 3);
Tensor2 project(const PcaModel& model, const Tensor2& points);

// ---------------------------------------------------------------------------
// Latent trajectories

enum class LatentSource { embedded_h, unrolled_g };
std::string_view to_string(LatentSource s);
LatentSource latent_source_from_string(std::string_view s);

struct LatentTrajectory {
  std::vector<LatentState> points;
  LatentSource source = LatentSource::embedded_h;
  std::vector<std::size_t> actions;
};

// h applied to every observation o_0..o_T.
LatentTrajectory embed_trajectory(const MuZeroParams& params, const TrajectoryRecord& traj);
// h(o_0), then g chained over the whole action sequence.
LatentTrajectory unroll_trajectory(const MuZeroParams& params, const Observation& first,
                                   std::span<const std::size_t> actions);

struct DivergenceReport {
  Vector per_step;
  double mean = 0.0;
  double max = 0.0;
};

DivergenceReport trajectory_divergence(const LatentTrajectory& a, const LatentTrajectory& b);

Tensor2 stack_points(std::span<const LatentState> points);

// ---------------------------------------------------------------------------
// CSV export

struct LatentRow {
  std::size_t traj_id = 0;
  std::size_t step = 0;
  LatentSource source = LatentSource::embedded_h;
  Observation observation;
  LatentState latent;
};

std::string latent_csv_header(std::size_t obs_dim, std::size_t latent_size);
inline constexpr const char* kProjectionCsvHeader = "traj_id,step,source,pc1,pc2,pc3";
inline constexpr const char* kDivergenceCsvHeader = "traj_id,step,distance";

// Rows for each trajectory: embedded_h points first, then unrolled_g points.
std::vector<LatentRow> latent_rows(const MuZeroParams& params,
                                   std::span<const TrajectoryRecord> trajectories);
void write_latent_csv(std::ostream& out, std::span<const LatentRow> rows, std::size_t obs_dim,
                      std::size_t latent_size);
std::vector<LatentRow> read_latent_csv(std::istream& in);
// Writes the latent CSV for `trajectories`; returns the number of data rows.
std::size_t export_latents(const MuZeroParams& params,
                           std::span<const TrajectoryRecord> trajectories, std::ostream& out);

// ---------------------------------------------------------------------------
// SVG

struct PlotTrajectory {
  LatentSource source = LatentSource::embedded_h;
  std::vector<Vector> points;  // 2 or 3 coordinates each
};

struct PlotInput {
  std::vector<Vector> scatter;
  std::vector<PlotTrajectory> trajectories;
};

struct PlotStyle {
  std::string title;
  double pixels_per_unit = 300.0;
  double padding = 60.0;
  double point_radius = 2.5;
};

// Standalone SVG. 3-D input goes through a fixed isometric projection. The
// data-to-pixel map is a fixed-scale affine map; the canvas grows with the data.
std::string render_plot(const PlotInput& input, const PlotStyle& style);

// Isometric screen coordinates (x right, y down) of a 2-D or 3-D point.
std::pair<double, double> isometric(std::span<const double> p);

// ---------------------------------------------------------------------------
// Pipeline

// Greedy, noise-free episodes with the given weights; episode e uses the
// stream (seed, visualize, e).
std::vector<TrajectoryRecord> sample_trajectories(const ExperimentConfig& config,
                                                  const MuZeroParams& params, std::size_t count,
                                                  std::uint64_t seed);

// Mean over trajectories of the per-trajectory mean h-vs-g divergence.
double mean_divergence(const MuZeroParams& params, std::span<const TrajectoryRecord> trajectories);

struct VisualizationSummary {
  std::size_t trajectories = 0;
  std::size_t latent_rows = 0;
  double mean_divergence = 0.0;
  Vector explained_variance_ratio;
  std::vector<std::filesystem::path> files;
};

// Writes latents.csv, projection.csv, divergence.csv, embedding_h.svg and
// embedding_g.svg into `out_dir`. PCA is fit on h-latents of trajectories
// drawn uniformly from the replay buffer (fresh ones if it is empty).
VisualizationSummary run_visualization(const TrainingState& state, std::size_t count,
                                       std::uint64_t seed, const std::filesystem::path& out_dir);

}  // namespace mzlab
