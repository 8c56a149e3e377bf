#include "adrc/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "adrc/errors.hpp"
#include "adrc/random.hpp"

namespace adrc {

void DisturbanceModel::Validate() const {
  if (!generator) return;
  const auto m = generator->chi0.size();
  if (m < 1 || generator->A_d.rows() != m || generator->A_d.cols() != m || generator->C_d.size() != m)
    throw Error(ErrorCode::kInvalidArgument, "disturbance generator dimensions are inconsistent");
}

void SimConfig::Validate(std::size_t rho) const {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "dt must be positive");
  if (!(horizon >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "horizon must be nonnegative");
  if (static_cast<std::size_t>(x0.size()) != rho) throw Error(ErrorCode::kInvalidArgument, "x0 must have rho entries");
  if (xhat0.size() != 0 && static_cast<std::size_t>(xhat0.size()) != rho)
    throw Error(ErrorCode::kInvalidArgument, "xhat0 must have rho entries");
  if (noise_variance < 0.0) throw Error(ErrorCode::kInvalidArgument, "noise variance must be nonnegative");
  if (sample_period) {
    const double ratio = *sample_period / dt;
    if (!(*sample_period >= dt) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio)
      throw Error(ErrorCode::kInvalidArgument, "sample period must be an integer multiple of dt");
  } else if (noise_variance > 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "output noise requires a sample period");
  }
}

std::size_t SimConfig::steps() const {
  return static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
}

std::size_t SimConfig::sample_stride() const {
  return sample_period ? static_cast<std::size_t>(std::llround(*sample_period / dt)) : 1;
}

namespace {

class ClosedLoopField {
 public:
  ClosedLoopField(const CanonicalPlant& plant, const AdrcGains& gains, const DisturbanceModel& dist)
      : plant_(plant), gains_(gains), dist_(dist), rho_(static_cast<Eigen::Index>(plant.rho())) {}

  Eigen::Index dim() const { return 2 * rho_ + 1 + static_cast<Eigen::Index>(dist_.states()); }

  double Disturbance(const Vector& z) const {
    if (!dist_.generator) return dist_.d_ss;
    return dist_.d_ss + dist_.generator->C_d.dot(z.tail(dist_.generator->chi0.size()));
  }

  double ControlLaw(const Vector& z) const {
    return -(gains_.K.dot(z.segment(rho_, rho_)) + z(2 * rho_)) / gains_.b_hat;
  }

  // Held values replace the live control law and measurement when present.
  Vector operator()(const Vector& z, std::optional<double> u_held, std::optional<double> y_held) const {
    const double u = u_held ? *u_held : ControlLaw(z);
    const double y = y_held ? *y_held : z(0);
    const double d = Disturbance(z);
    Vector dz(z.size());
    for (Eigen::Index i = 0; i + 1 < rho_; ++i) dz(i) = z(i + 1);
    dz(rho_ - 1) = plant_.a.dot(z.head(rho_)) + d + plant_.b * u;

    const Eigen::Index o = rho_;
    const double err = z(o) - y;
    for (Eigen::Index i = 0; i <= rho_; ++i) {
      const double next = i < rho_ ? z(o + i + 1) : 0.0;
      dz(o + i) = next - gains_.G(i) * err;
    }
    dz(o + rho_ - 1) += gains_.b_hat * u;

    if (dist_.generator) {
      const auto m = dist_.generator->chi0.size();
      dz.tail(m) = dist_.generator->A_d * z.tail(m);
    }
    return dz;
  }

 private:
  const CanonicalPlant& plant_;
  const AdrcGains& gains_;
  const DisturbanceModel& dist_;
  Eigen::Index rho_;
};

}  // namespace

Trajectory Simulate(const CanonicalPlant& plant, const AdrcGains& gains, const DisturbanceModel& dist,
                    const SimConfig& cfg) {
  plant.Validate();
  gains.Validate();
  dist.Validate();
  if (plant.rho() != gains.rho()) throw Error(ErrorCode::kInvalidArgument, "plant and gains disagree on rho");
  cfg.Validate(plant.rho());

  const auto rho = static_cast<Eigen::Index>(plant.rho());
  const ClosedLoopField field(plant, gains, dist);
  Vector z = Vector::Zero(field.dim());
  z.head(rho) = cfg.x0;
  if (cfg.xhat0.size() != 0) z.segment(rho, rho) = cfg.xhat0;
  z(2 * rho) = cfg.dhat0;
  if (dist.generator) z.tail(dist.generator->chi0.size()) = dist.generator->chi0;

  const std::size_t steps = cfg.steps();
  const auto rows = static_cast<Eigen::Index>(steps + 1);
  Trajectory traj;
  traj.t.resize(rows);
  traj.x.resize(rows, rho);
  traj.xhat.resize(rows, rho);
  traj.dhat.resize(rows);
  traj.u.resize(rows);
  traj.y.resize(rows);
  traj.d.resize(rows);

  const bool sampled = cfg.sample_period.has_value();
  const std::size_t stride = cfg.sample_stride();
  const double noise_sd = std::sqrt(cfg.noise_variance);
  std::optional<double> u_held, y_held;
  const double h = cfg.dt;

  for (std::size_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * h;
    if (sampled && i % stride == 0) {
      const std::uint64_t k = i / stride;
      const double w = noise_sd > 0.0 ? noise_sd * CounterGaussian(cfg.seed, k) : 0.0;
      y_held = z(0) + w;
      u_held = field.ControlLaw(z);
    }
    const auto row = static_cast<Eigen::Index>(i);
    traj.t(row) = t;
    traj.x.row(row) = z.head(rho).transpose();
    traj.xhat.row(row) = z.segment(rho, rho).transpose();
    traj.dhat(row) = z(2 * rho);
    traj.u(row) = sampled ? *u_held : field.ControlLaw(z);
    traj.y(row) = z(0);
    traj.d(row) = field.Disturbance(z);
    if (i == steps) break;

    const Vector k1 = field(z, u_held, y_held);
    const Vector k2 = field(z + 0.5 * h * k1, u_held, y_held);
    const Vector k3 = field(z + 0.5 * h * k2, u_held, y_held);
    const Vector k4 = field(z + h * k3, u_held, y_held);
    z += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double norm = z.norm();
    if (!std::isfinite(norm) || norm > kBlowupNorm) throw UnstableBlowup(static_cast<double>(i + 1) * h);
  }
  return traj;
}

CostBreakdown Cost(const Trajectory& traj, double lambda) {
  if (traj.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  if (!(lambda > 0.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must be positive");
  CostBreakdown c;
  for (Eigen::Index i = 1; i < traj.t.size(); ++i) {
    const double h = traj.t(i) - traj.t(i - 1);
    c.output += 0.5 * h * (traj.y(i - 1) * traj.y(i - 1) + traj.y(i) * traj.y(i));
    c.input += 0.5 * h * (traj.u(i - 1) * traj.u(i - 1) + traj.u(i) * traj.u(i));
  }
  c.total = c.output + lambda * c.input;
  return c;
}

TrajectoryMetrics Summarize(const Trajectory& traj) {
  if (traj.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty trajectory");
  TrajectoryMetrics m;
  Eigen::Index peak = 0;
  m.peak_u = traj.u.cwiseAbs().maxCoeff(&peak);
  m.peak_u_time = traj.t(peak);

  const double t0 = traj.t(0);
  const double t_end = traj.t(traj.t.size() - 1);
  const double window_start = t_end - 0.2 * (t_end - t0);
  double y_max = 0.0;
  for (Eigen::Index i = 0; i < traj.t.size(); ++i) {
    const double ay = std::abs(traj.y(i));
    y_max = std::max(y_max, ay);
    if (traj.t(i) >= window_start - 1e-12) m.final_amplitude = std::max(m.final_amplitude, ay);
  }

  const double band = 0.02 * y_max;
  m.settling_time = std::numeric_limits<double>::quiet_NaN();
  for (Eigen::Index i = traj.t.size() - 1; i >= 0; --i) {
    if (std::abs(traj.y(i)) > band) {
      if (i + 1 < traj.t.size()) m.settling_time = traj.t(i + 1);
      break;
    }
    if (i == 0) m.settling_time = traj.t(0);
  }
  return m;
}

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj) {
  const auto rho = traj.x.cols();
  out << "t";
  for (Eigen::Index j = 1; j <= rho; ++j) out << ",x" << j;
  for (Eigen::Index j = 1; j <= rho; ++j) out << ",xhat" << j;
  out << ",dhat,u,y,d\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < traj.t.size(); ++i) {
    out << traj.t(i);
    for (Eigen::Index j = 0; j < rho; ++j) out << ',' << traj.x(i, j);
    for (Eigen::Index j = 0; j < rho; ++j) out << ',' << traj.xhat(i, j);
    out << ',' << traj.dhat(i) << ',' << traj.u(i) << ',' << traj.y(i) << ',' << traj.d(i) << '\n';
  }
  out.precision(old_precision);
}

Trajectory ReadTrajectoryCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kConfig, "trajectory CSV is empty");
  std::size_t columns = 1 + static_cast<std::size_t>(std::count(line.begin(), line.end(), ','));
  if (columns < 7 || (columns - 5) % 2 != 0) throw Error(ErrorCode::kConfig, "unexpected trajectory CSV header");
  const auto rho = static_cast<Eigen::Index>((columns - 5) / 2);

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw Error(ErrorCode::kConfig, "bad number in trajectory CSV: " + cell);
      row.push_back(v);
    }
    if (row.size() != columns) throw Error(ErrorCode::kConfig, "ragged trajectory CSV row");
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  Trajectory traj;
  traj.t.resize(n);
  traj.x.resize(n, rho);
  traj.xhat.resize(n, rho);
  traj.dhat.resize(n);
  traj.u.resize(n);
  traj.y.resize(n);
  traj.d.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    traj.t(i) = r[0];
    for (Eigen::Index j = 0; j < rho; ++j) {
      traj.x(i, j) = r[static_cast<std::size_t>(1 + j)];
      traj.xhat(i, j) = r[static_cast<std::size_t>(1 + rho + j)];
    }
    const auto base = static_cast<std::size_t>(1 + 2 * rho);
    traj.dhat(i) = r[base];
    traj.u(i) = r[base + 1];
    traj.y(i) = r[base + 2];
    traj.d(i) = r[base + 3];
  }
  return traj;
}

}  // namespace adrc
