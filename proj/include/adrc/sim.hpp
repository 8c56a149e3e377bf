#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>

#include "adrc/plant.hpp"
#include "adrc/synthesis.hpp"

namespace adrc {

/// chi' = A_d chi, gamma = C_d chi.
struct LtiGenerator {
  Matrix A_d;
  Eigen::RowVectorXd C_d;
  Vector chi0;
};

/// d(t) = d_ss + C_d chi(t), or d_ss alone without a generator.
struct DisturbanceModel {
  double d_ss = 0.0;
  std::optional<LtiGenerator> generator;

  void Validate() const;
  std::size_t states() const { return generator ? static_cast<std::size_t>(generator->chi0.size()) : 0; }
};

struct SimConfig {
  double dt = 1e-3;
  double horizon = 30.0;
  /// Unset means the observer and control law run in continuous time.
  std::optional<double> sample_period;
  /// Output-noise variance seen by the observer; requires a sample period.
  double noise_variance = 0.0;
  std::uint64_t seed = 0;
  double lambda = 0.1;
  Vector x0;
  Vector xhat0;  // empty means zeros
  double dhat0 = 0.0;

  void Validate(std::size_t rho) const;
  std::size_t steps() const;
  std::size_t sample_stride() const;  // grid steps per sample, 1 when continuous
};

/// Rows are grid points t_i = i dt, i = 0 .. floor(T/dt).
struct Trajectory {
  Vector t;
  Matrix x;     // rows x rho
  Matrix xhat;  // rows x rho
  Vector dhat, u, y, d;

  std::size_t size() const { return static_cast<std::size_t>(t.size()); }
};

inline constexpr double kBlowupNorm = 1e9;

/// Fixed-step RK4 of plant, disturbance generator and ESO. Throws
/// UnstableBlowup once the state norm passes kBlowupNorm.
Trajectory Simulate(const CanonicalPlant& plant, const AdrcGains& gains, const DisturbanceModel& dist,
                    const SimConfig& cfg);

struct CostBreakdown {
  double total = 0.0;   // C = C_y + lambda C_u
  double output = 0.0;  // C_y = int y^2
  double input = 0.0;   // C_u = int u^2
};

/// Trapezoidal quadrature over the trajectory grid.
CostBreakdown Cost(const Trajectory& traj, double lambda);

struct TrajectoryMetrics {
  double peak_u = 0.0;
  double peak_u_time = 0.0;
  /// max |y| over the last 20% of the horizon.
  double final_amplitude = 0.0;
  /// First time after which |y| stays within 2% of max |y|; NaN if never.
  double settling_time = 0.0;
};

TrajectoryMetrics Summarize(const Trajectory& traj);

/// CSV with header t,x1..,xhat1..,dhat,u,y,d at full double precision.
void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj);
Trajectory ReadTrajectoryCsv(std::istream& in);

}  // namespace adrc
