#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homog/corrector.hpp"
#include "homog/ergodic.hpp"
#include "homog/generator.hpp"
#include "homog/homogenize.hpp"
#include "homog/model.hpp"
#include "homog/simulate.hpp"
#include "homog/verify.hpp"

namespace homog {

/// Config-level field: a truncated Fourier series (the default, which makes
/// the Holder smoothness assumption hold by construction) or explicit grid
/// samples (plateau constructions, solver outputs).
struct FieldSpec {
  int dim = 1;
  int arity = 1;
  bool is_grid = false;
  int grid_n = 0;
  std::vector<double> grid_values;
  std::vector<std::vector<FourierTerm>> components;

  PeriodicField build() const;
};

struct LevySpec {
  int d = 1;
  double alpha = 1.5;
  double jplus = 1.0;
  double jminus = 1.0;
  std::vector<double> angular_table;  // d = 2

  LevyDensity build() const;
};

struct KernelSpec {
  std::string family = "constant";
  double value = 1.0;
  std::optional<FieldSpec> x_field, u_field, v_field;               // product
  std::optional<FieldSpec> a_field;                                 // diffeo
  std::optional<FieldSpec> alpha_field, rho_x_field, rho_angular;   // variable order
  std::optional<FieldSpec> kappa0_plus, kappa0_minus, transient_x;  // onedim
  OneDimProfile profile;
  std::optional<KernelBounds> bounds;

  JumpKernel build(int d, double alpha, const LevyDensity& J) const;
};

struct ModelConfig {
  int d = 1;
  double alpha = 1.5;
  LevySpec levy;
  KernelSpec kernel;
  std::optional<FieldSpec> b, c;
  bool allow_inactive_drift = false;

  ModelSpec build() const;
};

struct NumericsConfig {
  double delta = 0.02;
  double jump_cap = 5e7;
  double substep_scale = 0.1;
  int comp_grid_n = 256;
  int comp_radial_per_decade = 64;
  int comp_angular_nodes = 32;
  double comp_numeric_cutoff = 64.0;

  int invariant_grid_n = 32;
  double t_burn = -1.0;  // < 0: five mixing times from the pilot estimate
  double t_run = 40.0;
  int n_chains = 8;
  int mixing_paths = 20000;

  int corrector_grid_n = 0;  // 0: 64 in d = 1, 32 in d = 2
  double corrector_horizon = 0.0;  // 0: from the mixing estimate
  int corrector_paths = 20000;
  int corrector_modes = 6;
  double corrector_tol = 0.02;
  int residual_probes = 16;
  double centering_tol = 0.2;

  double gen_r_inner = 1e-3;
  int gen_nodes_per_decade = 256;
  int gen_angular_nodes = 32;
  double gen_resolve_radius = 300.0;
  int homog_u_nodes = 64;
  int homog_angular_nodes = 32;
  double exp_r_inner = 1e-2;
  int exp_nodes_per_decade = 256;

  SimOptions sim_options() const;
  InvariantOptions invariant_options() const;
  CorrectorOptions corrector_options(int d = 1) const;
  GenQuad gen_quad() const;
  HomogenizeOptions homogenize_options() const;
  ExponentQuad exponent_quad() const;
};

struct RunConfig {
  std::vector<double> eps_list{0.5, 0.25, 0.125};
  std::vector<double> t_list{1.0};
  int xi_points_per_axis = 17;
  double xi_max = 5.0;
  int n_paths = 10000;
  std::uint64_t seed_base = 20260808;
  std::string out_dir;
};

struct ExperimentConfig {
  std::string preset = "none";
  ModelConfig model;
  NumericsConfig numerics;
  RunConfig run;
};

/// Canonical serialization: sorted keys, shortest-round-trip numbers. Equal
/// configs produce byte-identical text.
std::string serialize_config(const ExperimentConfig& cfg);
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

/// FNV-1a hash of the canonical serialization, as fixed-width hex.
std::string config_hash(const ExperimentConfig& cfg);

std::vector<std::string> preset_names();
ExperimentConfig expand_preset(const std::string& name);

}  // namespace homog
