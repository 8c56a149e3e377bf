#pragma once

// Scenario files: flat `section.key = values` lines, `#` comments, matrices
// row-major. Everything here is plain data so a scenario can be dumped and
// re-parsed without loss.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adrc/plant.hpp"
#include "adrc/sim.hpp"
#include "adrc/synthesis.hpp"

namespace adrc {

struct CanonicalPlantSpec {
  std::vector<double> a;
  double b = 1.0;
  friend bool operator==(const CanonicalPlantSpec&, const CanonicalPlantSpec&) = default;
};

struct FullPlantSpec {
  std::vector<double> A;  // row-major N x N
  std::vector<double> B;
  std::vector<double> C;
  friend bool operator==(const FullPlantSpec&, const FullPlantSpec&) = default;
};

using PlantSpec = std::variant<CanonicalPlantSpec, FullPlantSpec>;

struct ExplicitGainsSpec {
  std::vector<double> K, G;
  double b_hat = 1.0;
  friend bool operator==(const ExplicitGainsSpec&, const ExplicitGainsSpec&) = default;
};

struct PolesSpec {
  std::vector<Complex> poles;
  std::optional<double> b_hat;  // defaults to sgn(b)
  SplitPolicy split;
  friend bool operator==(const PolesSpec&, const PolesSpec&) = default;
};

struct BandwidthSpec {
  double omega_c = 1.0;
  double omega_o = 1.0;
  std::optional<double> b_hat;
  friend bool operator==(const BandwidthSpec&, const BandwidthSpec&) = default;
};

struct HighGainSpec {
  std::vector<double> K;
  std::vector<double> alpha;
  double epsilon = 1.0;
  std::optional<double> b_hat;
  friend bool operator==(const HighGainSpec&, const HighGainSpec&) = default;
};

using ControllerSpec = std::variant<ExplicitGainsSpec, PolesSpec, BandwidthSpec, HighGainSpec>;

struct DisturbanceSpec {
  double d_ss = 0.0;
  std::vector<double> A_d;  // row-major M x M; empty means no generator
  std::vector<double> C_d;
  std::vector<double> chi0;
  friend bool operator==(const DisturbanceSpec&, const DisturbanceSpec&) = default;
};

struct SimSpec {
  double dt = 1e-3;
  double horizon = 30.0;
  std::optional<double> sample_period;
  double noise_variance = 0.0;
  std::uint64_t seed = 0;
  double lambda = 0.1;
  std::vector<double> x0;  // empty means e_1
  std::vector<double> xhat0;
  double dhat0 = 0.0;
  friend bool operator==(const SimSpec&, const SimSpec&) = default;
};

struct ModelBasedSpec {
  std::vector<double> K_star, G_star;
  std::optional<double> b_hat;
  friend bool operator==(const ModelBasedSpec&, const ModelBasedSpec&) = default;
};

struct OutputSpec {
  std::string csv;
  std::string summary;
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct Scenario {
  std::string name;
  PlantSpec plant;
  std::optional<ControllerSpec> controller;
  DisturbanceSpec disturbance;
  SimSpec sim;
  std::optional<ModelBasedSpec> model;
  OutputSpec output;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws Error(kConfig) with the offending line number on malformed input.
Scenario ParseScenario(std::istream& in);
Scenario ParseScenarioString(const std::string& text);
/// Also defaults `name` to the file stem.
Scenario LoadScenario(const std::filesystem::path& path);
/// Canonical text form; ParseScenario(DumpScenario(s)) == s.
std::string DumpScenario(const Scenario& s);

/// Complex literal as used in `controller.poles`: "-2", "-1+2i", "3.5-0.5i", "2i".
Complex ParseComplex(const std::string& token);
std::string FormatComplex(Complex c);
std::string FormatDouble(double v);

CanonicalForm ResolvePlant(const PlantSpec& spec, const CanonicalizeOptions& opts = {});

struct ResolvedController {
  AdrcGains gains;
  std::optional<SynthesisReport> synthesis;  // set for the poles variant
};

ResolvedController ResolveController(const ControllerSpec& spec, const CanonicalPlant& plant);
DisturbanceModel ResolveDisturbance(const DisturbanceSpec& spec);
SimConfig ResolveSim(const SimSpec& spec, std::size_t rho);

}  // namespace adrc
