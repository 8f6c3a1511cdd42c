#include "mzlab/latent_viz.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <tuple>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mzlab {

SymmetricEigen jacobi_eigen(const Tensor2& symmetric, double tolerance, std::size_t max_sweeps) {
  const std::size_t n = symmetric.rows;
  if (symmetric.cols != n) throw ShapeError("jacobi_eigen: matrix is not square");
  Tensor2 a = symmetric;
  Tensor2 v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  double norm = 0.0;
  for (double x : a.values) norm += x * x;
  norm = std::sqrt(norm);

  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tolerance * norm || off == 0.0) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out;
  for (std::size_t i : order) {
    out.values.push_back(a(i, i));
    Vector vec(n);
    for (std::size_t k = 0; k < n; ++k) vec[k] = v(k, i);
    out.vectors.push_back(std::move(vec));
  }
  return out;
}

PcaModel fit_pca(const Tensor2& data, std::size_t n_components) {
  const std::size_t n = data.rows, dim = data.cols;
  if (n < 2) throw std::invalid_argument("fit_pca: need at least two points");
  if (n_components == 0 || n_components > std::min(n, dim)) {
    throw std::invalid_argument("fit_pca: n_components must lie in [1, min(points, dim)]");
  }
  PcaModel m;
  m.mean.assign(dim, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < dim; ++c) m.mean[c] += data(r, c);
  for (double& x : m.mean) x /= static_cast<double>(n);

  Tensor2 cov(dim, dim);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double di = data(r, i) - m.mean[i];
      for (std::size_t j = i; j < dim; ++j) cov(i, j) += di * (data(r, j) - m.mean[j]);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      cov(i, j) /= static_cast<double>(n - 1);
      cov(j, i) = cov(i, j);
    }
  }

  const SymmetricEigen eig = jacobi_eigen(cov);
  double total = 0.0;
  for (double ev : eig.values) total += std::max(ev, 0.0);
  for (std::size_t k = 0; k < n_components; ++k) {
    Vector comp = eig.vectors[k];
    const auto biggest = std::max_element(comp.begin(), comp.end(),
                                          [](double x, double y) { return std::abs(x) < std::abs(y); });
    if (*biggest < 0.0)
      for (double& x : comp) x = -x;
    const double variance = std::max(eig.values[k], 0.0);
    m.components.push_back(std::move(comp));
    m.explained_variance.push_back(variance);
    m.explained_variance_ratio.push_back(total > 0.0 ? variance / total : 0.0);
  }
  return m;
}

Tensor2 project(const PcaModel& model, const Tensor2& points) {
  const std::size_t dim = model.mean.size();
  if (points.cols != dim) throw ShapeError("project: point dimension differs from the fitted model");
  Tensor2 out(points.rows, model.components.size());
  for (std::size_t r = 0; r < points.rows; ++r) {
    for (std::size_t k = 0; k < model.components.size(); ++k) {
      double acc = 0.0;
      for (std::size_t c = 0; c < dim; ++c) acc += (points(r, c) - model.mean[c]) * model.components[k][c];
      out(r, k) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(LatentSource s) {
  return s == LatentSource::embedded_h ? "embedded_h" : "unrolled_g";
}

LatentSource latent_source_from_string(std::string_view s) {
  if (s == "embedded_h") return LatentSource::embedded_h;
  if (s == "unrolled_g") return LatentSource::unrolled_g;
  throw std::invalid_argument("unknown latent source '" + std::string(s) + "'");
}

LatentTrajectory embed_trajectory(const MuZeroParams& params, const TrajectoryRecord& traj) {
  LatentTrajectory out;
  out.source = LatentSource::embedded_h;
  out.actions = traj.actions;
  GradTape tape;
  for (const auto& o : traj.observations) {
    out.points.push_back(represent(params, o, tape));
    tape.clear();
  }
  return out;
}

LatentTrajectory unroll_trajectory(const MuZeroParams& params, const Observation& first,
                                   std::span<const std::size_t> actions) {
  LatentTrajectory out;
  out.source = LatentSource::unrolled_g;
  out.actions.assign(actions.begin(), actions.end());
  GradTape tape;
  out.points.push_back(represent(params, first, tape));
  for (std::size_t a : actions) {
    tape.clear();
    out.points.push_back(dynamics(params, out.points.back(), a, tape).second);
  }
  return out;
}

DivergenceReport trajectory_divergence(const LatentTrajectory& a, const LatentTrajectory& b) {
  if (a.points.size() != b.points.size()) throw ShapeError("trajectory_divergence: length mismatch");
  if (a.actions != b.actions) throw std::invalid_argument("trajectory_divergence: action sequences differ");
  DivergenceReport r;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (a.points[i].size() != b.points[i].size()) throw ShapeError("trajectory_divergence: latent size mismatch");
    double d2 = 0.0;
    for (std::size_t c = 0; c < a.points[i].size(); ++c) {
      const double d = a.points[i][c] - b.points[i][c];
      d2 += d * d;
    }
    r.per_step.push_back(std::sqrt(d2));
  }
  if (!r.per_step.empty()) {
    r.mean = std::accumulate(r.per_step.begin(), r.per_step.end(), 0.0) /
             static_cast<double>(r.per_step.size());
    r.max = *std::max_element(r.per_step.begin(), r.per_step.end());
  }
  return r;
}

Tensor2 stack_points(std::span<const LatentState> points) {
  if (points.empty()) return {};
  Tensor2 out(points.size(), points.front().size());
  for (std::size_t r = 0; r < points.size(); ++r) {
    if (points[r].size() != out.cols) throw ShapeError("stack_points: ragged points");
    std::copy(points[r].begin(), points[r].end(), out.row_span(r).begin());
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string latent_csv_header(std::size_t obs_dim, std::size_t latent_size) {
  std::string h = "traj_id,step,source";
  for (std::size_t i = 0; i < obs_dim; ++i) h += ",obs_" + std::to_string(i);
  for (std::size_t i = 0; i < latent_size; ++i) h += ",z_" + std::to_string(i);
  return h;
}

std::vector<LatentRow> latent_rows(const MuZeroParams& params,
                                   std::span<const TrajectoryRecord> trajectories) {
  std::vector<LatentRow> rows;
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    const TrajectoryRecord& t = trajectories[id];
    const LatentTrajectory h = embed_trajectory(params, t);
    const LatentTrajectory g = unroll_trajectory(params, t.observations.front(), t.actions);
    for (const LatentTrajectory* lt : {&h, &g}) {
      for (std::size_t step = 0; step < lt->points.size(); ++step) {
        rows.push_back({id, step, lt->source, t.observations[step], lt->points[step]});
      }
    }
  }
  return rows;
}

void write_latent_csv(std::ostream& out, std::span<const LatentRow> rows, std::size_t obs_dim,
                      std::size_t latent_size) {
  out << latent_csv_header(obs_dim, latent_size) << '\n';
  for (const LatentRow& r : rows) {
    if (r.observation.size() != obs_dim || r.latent.size() != latent_size) {
      throw ShapeError("write_latent_csv: row width differs from header");
    }
    out << r.traj_id << ',' << r.step << ',' << to_string(r.source);
    for (double x : r.observation) out << ',' << fmt_real(x);
    for (double x : r.latent) out << ',' << fmt_real(x);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_latent_csv: stream write failed");
}

std::vector<LatentRow> read_latent_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_latent_csv: missing header");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "traj_id" || header[1] != "step" || header[2] != "source") {
    throw std::runtime_error("read_latent_csv: unexpected header");
  }
  std::size_t obs_dim = 0, latent_size = 0;
  for (std::size_t i = 3; i < header.size(); ++i) {
    if (header[i].rfind("obs_", 0) == 0) ++obs_dim;
    else if (header[i].rfind("z_", 0) == 0) ++latent_size;
    else throw std::runtime_error("read_latent_csv: unexpected column '" + header[i] + "'");
  }
  if (latent_csv_header(obs_dim, latent_size) != line) {
    throw std::runtime_error("read_latent_csv: header does not match schema");
  }
  std::vector<LatentRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("read_latent_csv: line " + std::to_string(line_no) + " has wrong width");
    }
    LatentRow r;
    r.traj_id = std::stoul(cells[0]);
    r.step = std::stoul(cells[1]);
    r.source = latent_source_from_string(cells[2]);
    for (std::size_t i = 0; i < obs_dim; ++i) r.observation.push_back(std::stod(cells[3 + i]));
    for (std::size_t i = 0; i < latent_size; ++i) r.latent.push_back(std::stod(cells[3 + obs_dim + i]));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::size_t export_latents(const MuZeroParams& params,
                           std::span<const TrajectoryRecord> trajectories, std::ostream& out) {
  const auto rows = latent_rows(params, trajectories);
  write_latent_csv(out, rows, params.dims.obs_dim, params.dims.latent_size);
  return rows.size();
}

// ---------------------------------------------------------------------------

std::pair<double, double> isometric(std::span<const double> p) {
  if (p.size() == 2) return {p[0], -p[1]};
  if (p.size() != 3) throw ShapeError("isometric: points must have 2 or 3 coordinates");
  constexpr double kCos30 = 0.86602540378443864676;
  constexpr double kSin30 = 0.5;
  const double up = p[2] - (p[0] + p[1]) * kSin30;
  return {(p[0] - p[1]) * kCos30, -up};
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* color_of(LatentSource s) {
  return s == LatentSource::embedded_h ? "#1f77b4" : "#2ca02c";
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

}  // namespace

std::string render_plot(const PlotInput& input, const PlotStyle& style) {
  if (input.scatter.empty() && input.trajectories.empty()) {
    throw std::invalid_argument("render_plot: nothing to draw");
  }
  std::size_t dim = 0;
  auto check_dim = [&](const Vector& p) {
    if (p.size() != 2 && p.size() != 3) throw ShapeError("render_plot: points must be 2-D or 3-D");
    if (dim == 0) dim = p.size();
    if (p.size() != dim) throw ShapeError("render_plot: mixed 2-D and 3-D points");
  };
  double extent = 0.0;
  for (const auto& p : input.scatter) {
    check_dim(p);
    for (double x : p) extent = std::max(extent, std::abs(x));
  }
  for (const auto& t : input.trajectories) {
    for (const auto& p : t.points) {
      check_dim(p);
      for (double x : p) extent = std::max(extent, std::abs(x));
    }
  }
  if (dim == 0) throw std::invalid_argument("render_plot: trajectories have no points");

  // Axis segments from the data-space origin, scaled with the data.
  const double axis_len = extent > 0.0 ? 0.5 * extent : 1.0;
  std::vector<std::pair<Vector, std::string>> axes;
  for (std::size_t i = 0; i < dim; ++i) {
    Vector tip(dim, 0.0);
    tip[i] = axis_len;
    axes.emplace_back(std::move(tip), "PC" + std::to_string(i + 1));
  }

  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  auto extend = [&](const Vector& p) {
    const auto [sx, sy] = isometric(p);
    min_x = std::min(min_x, sx);
    max_x = std::max(max_x, sx);
    min_y = std::min(min_y, sy);
    max_y = std::max(max_y, sy);
  };
  for (const auto& p : input.scatter) extend(p);
  for (const auto& t : input.trajectories)
    for (const auto& p : t.points) extend(p);
  extend(Vector(dim, 0.0));
  for (const auto& [tip, label] : axes) extend(tip);

  const double scale = style.pixels_per_unit, pad = style.padding;
  const double width = (max_x - min_x) * scale + 2.0 * pad;
  const double height = (max_y - min_y) * scale + 2.0 * pad;
  auto to_px = [&](const Vector& p) {
    const auto [sx, sy] = isometric(p);
    return std::pair{pad + (sx - min_x) * scale, pad + (sy - min_y) * scale};
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    svg << "  <text x=\"" << num(pad) << "\" y=\"" << num(pad * 0.4) << "\" font-size=\"14\">"
        << xml_escape(style.title) << "</text>\n";
  }

  svg << "  <g id=\"axes\" stroke=\"#444444\" stroke-width=\"1\">\n";
  const auto [ox, oy] = to_px(Vector(dim, 0.0));
  for (const auto& [tip, label] : axes) {
    const auto [tx, ty] = to_px(tip);
    svg << "    <line x1=\"" << num(ox) << "\" y1=\"" << num(oy) << "\" x2=\"" << num(tx)
        << "\" y2=\"" << num(ty) << "\"/>\n";
    svg << "    <text x=\"" << num(tx) << "\" y=\"" << num(ty) << "\" font-size=\"10\" stroke=\"none\">"
        << label << "</text>\n";
  }
  svg << "  </g>\n";

  svg << "  <g id=\"scatter\" fill=\"#1f77b4\" fill-opacity=\"0.35\">\n";
  for (const auto& p : input.scatter) {
    const auto [x, y] = to_px(p);
    svg << "    <circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(style.point_radius)
        << "\"/>\n";
  }
  svg << "  </g>\n";

  svg << "  <g id=\"trajectories\" fill=\"none\" stroke-width=\"1.5\">\n";
  for (const auto& t : input.trajectories) {
    svg << "    <polyline class=\"" << to_string(t.source) << "\" stroke=\"" << color_of(t.source)
        << "\" stroke-dasharray=\"4 2\" points=\"";
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto [x, y] = to_px(t.points[i]);
      svg << (i ? " " : "") << num(x) << ',' << num(y);
    }
    svg << "\"/>\n";
  }
  svg << "  </g>\n";

  svg << "  <g id=\"legend\" font-size=\"11\">\n";
  double ly = pad * 0.4 + 16.0;
  for (LatentSource s : {LatentSource::embedded_h, LatentSource::unrolled_g}) {
    svg << "    <line x1=\"" << num(pad) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(pad + 18.0)
        << "\" y2=\"" << num(ly) << "\" stroke=\"" << color_of(s) << "\" stroke-width=\"2\"/>\n";
    svg << "    <text x=\"" << num(pad + 24.0) << "\" y=\"" << num(ly + 4.0) << "\">" << to_string(s)
        << "</text>\n";
    ly += 14.0;
  }
  svg << "  </g>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace mzlab

namespace mzlab {

std::vector<TrajectoryRecord> sample_trajectories(const ExperimentConfig& config,
                                                  const MuZeroParams& params, std::size_t count,
                                                  std::uint64_t seed) {
  SearchConfig search = search_config(config);
  search.root_noise = false;
  search.temperature = 0.0;
  std::vector<TrajectoryRecord> out;
  for (std::size_t e = 0; e < count; ++e) {
    Rng rng = derive_rng({seed, static_cast<std::uint64_t>(Stream::visualize), e});
    out.push_back(self_play_episode(config, params, search, rng));
  }
  return out;
}

double mean_divergence(const MuZeroParams& params, std::span<const TrajectoryRecord> trajectories) {
  if (trajectories.empty()) throw std::invalid_argument("mean_divergence: no trajectories");
  double acc = 0.0;
  for (const auto& t : trajectories) {
    const auto h = embed_trajectory(params, t);
    const auto g = unroll_trajectory(params, t.observations.front(), t.actions);
    acc += trajectory_divergence(h, g).mean;
  }
  return acc / static_cast<double>(trajectories.size());
}

VisualizationSummary run_visualization(const TrainingState& state, std::size_t count,
                                       std::uint64_t seed, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  const MuZeroParams& params = state.params;
  if (params.dims.alphazero) throw std::invalid_argument("visualize: AlphaZero models have no latent space");
  if (count == 0) throw std::invalid_argument("visualize: need at least one trajectory");
  fs::create_directories(out_dir);

  const auto trajs = sample_trajectories(state.config, params, count, seed);

  // Fit set: h-latents of replay trajectories drawn without replacement.
  std::vector<const TrajectoryRecord*> pool = state.buffer.trajectories();
  std::vector<const TrajectoryRecord*> fit_trajs;
  if (pool.empty()) {
    for (const auto& t : trajs) fit_trajs.push_back(&t);
  } else {
    Rng rng = derive_rng({seed, static_cast<std::uint64_t>(Stream::visualize), 0xf17ULL});
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(pool.size(), std::max<std::size_t>(count, 20)));
    fit_trajs = pool;
  }
  std::vector<LatentState> fit_points;
  for (const auto* t : fit_trajs) {
    const auto h = embed_trajectory(params, *t);
    fit_points.insert(fit_points.end(), h.points.begin(), h.points.end());
  }
  const std::size_t L = params.dims.latent_size;
  const std::size_t n_comp = std::min<std::size_t>({3, L, fit_points.size()});
  const PcaModel pca = fit_pca(stack_points(fit_points), n_comp);
  auto pc3 = [&](const Tensor2& proj, std::size_t r) {
    Vector p(3, 0.0);
    for (std::size_t c = 0; c < proj.cols; ++c) p[c] = proj(r, c);
    return p;
  };

  VisualizationSummary summary;
  summary.trajectories = trajs.size();
  summary.explained_variance_ratio = pca.explained_variance_ratio;

  const auto rows = latent_rows(params, trajs);
  summary.latent_rows = rows.size();
  {
    std::ofstream f(out_dir / "latents.csv");
    write_latent_csv(f, rows, params.dims.obs_dim, L);
    summary.files.push_back(out_dir / "latents.csv");
  }

  std::ofstream proj_csv(out_dir / "projection.csv");
  std::ofstream div_csv(out_dir / "divergence.csv");
  proj_csv << kProjectionCsvHeader << '\n';
  div_csv << kDivergenceCsvHeader << '\n';

  PlotInput plot_h, plot_g;
  const Tensor2 fit_proj = project(pca, stack_points(fit_points));
  for (std::size_t r = 0; r < fit_proj.rows; ++r) {
    plot_h.scatter.push_back(pc3(fit_proj, r));
  }
  plot_g.scatter = plot_h.scatter;

  double div_acc = 0.0;
  for (std::size_t id = 0; id < trajs.size(); ++id) {
    const auto h = embed_trajectory(params, trajs[id]);
    const auto g = unroll_trajectory(params, trajs[id].observations.front(), trajs[id].actions);
    for (const LatentTrajectory* lt : {&h, &g}) {
      const Tensor2 proj = project(pca, stack_points(lt->points));
      PlotTrajectory pt{lt->source, {}};
      for (std::size_t step = 0; step < proj.rows; ++step) {
        const Vector p = pc3(proj, step);
        proj_csv << id << ',' << step << ',' << to_string(lt->source) << ',' << fmt_real(p[0]) << ','
                 << fmt_real(p[1]) << ',' << fmt_real(p[2]) << '\n';
        pt.points.push_back(p);
      }
      (lt->source == LatentSource::embedded_h ? plot_h : plot_g).trajectories.push_back(std::move(pt));
    }
    const DivergenceReport d = trajectory_divergence(h, g);
    for (std::size_t step = 0; step < d.per_step.size(); ++step) {
      div_csv << id << ',' << step << ',' << fmt_real(d.per_step[step]) << '\n';
    }
    div_acc += d.mean;
  }
  summary.mean_divergence = div_acc / static_cast<double>(trajs.size());
  if (!proj_csv || !div_csv) throw std::runtime_error("visualize: failed writing CSV output");
  summary.files.push_back(out_dir / "projection.csv");
  summary.files.push_back(out_dir / "divergence.csv");

  const std::string env(to_string(state.config.env));
  const std::string alg(to_string(state.config.algorithm));
  for (auto [plot, name, label] :
       {std::tuple{&plot_h, "embedding_h.svg", "trajectories embedded through h"},
        std::tuple{&plot_g, "embedding_g.svg", "trajectories unrolled through g"}}) {
    PlotStyle style;
    style.title = env + " / " + alg + ": " + label;
    std::ofstream f(out_dir / name);
    f << render_plot(*plot, style);
    if (!f) throw std::runtime_error(std::string("visualize: failed writing ") + name);
    summary.files.push_back(out_dir / name);
  }
  return summary;
}

}  // namespace mzlab
