#include "homog/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "homog/errors.hpp"

namespace homog {

using nlohmann::json;

namespace {

void require_keys(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(std::string("config: unknown key '") + it.key() + "' in " + where);
  }
}

json field_to_json(const FieldSpec& f) {
  json j;
  j["dim"] = f.dim;
  j["arity"] = f.arity;
  if (f.is_grid) {
    j["type"] = "grid";
    j["n"] = f.grid_n;
    j["values"] = f.grid_values;
  } else {
    j["type"] = "fourier";
    json comps = json::array();
    for (const auto& comp : f.components) {
      json terms = json::array();
      for (const auto& t : comp) {
        json jt;
        jt["freq"] = t.freq;
        jt["cos"] = t.cos_coeff;
        jt["sin"] = t.sin_coeff;
        terms.push_back(jt);
      }
      comps.push_back(terms);
    }
    j["components"] = comps;
  }
  return j;
}

FieldSpec field_from_json(const json& j, const char* where) {
  if (!j.is_object())
    throw ConfigError(std::string("config: field spec must be an object in ") + where);
  require_keys(j, where, {"dim", "arity", "type", "n", "values", "components"});
  FieldSpec f;
  f.dim = j.value("dim", 1);
  f.arity = j.value("arity", 1);
  std::string type = j.value("type", "fourier");
  if (type == "grid") {
    f.is_grid = true;
    f.grid_n = j.at("n").get<int>();
    f.grid_values = j.at("values").get<std::vector<double>>();
  } else if (type == "fourier") {
    for (const auto& comp : j.at("components")) {
      std::vector<FourierTerm> terms;
      for (const auto& jt : comp) {
        FourierTerm t;
        t.freq = jt.at("freq").get<std::vector<int>>();
        t.cos_coeff = jt.value("cos", 0.0);
        t.sin_coeff = jt.value("sin", 0.0);
        terms.push_back(std::move(t));
      }
      f.components.push_back(std::move(terms));
    }
    f.arity = static_cast<int>(f.components.size());
  } else {
    throw ConfigError(std::string("config: unknown field type '") + type + "' in " + where);
  }
  return f;
}

json levy_to_json(const LevySpec& l) {
  json j;
  j["d"] = l.d;
  j["alpha"] = l.alpha;
  if (l.d == 1) {
    j["jplus"] = l.jplus;
    j["jminus"] = l.jminus;
  } else {
    j["angular_table"] = l.angular_table;
  }
  return j;
}

LevySpec levy_from_json(const json& j) {
  require_keys(j, "model.levy", {"d", "alpha", "jplus", "jminus", "angular_table"});
  LevySpec l;
  l.d = j.value("d", 1);
  if (j.contains("alpha")) l.alpha = j.at("alpha").get<double>();
  if (j.contains("angular_table")) {
    l.angular_table = j.at("angular_table").get<std::vector<double>>();
  } else {
    l.jplus = j.value("jplus", 1.0);
    l.jminus = j.value("jminus", 1.0);
  }
  return l;
}

json kernel_to_json(const KernelSpec& k) {
  json j;
  j["family"] = k.family;
  if (k.family == "constant") j["value"] = k.value;
  auto put = [&](const char* key, const std::optional<FieldSpec>& f) {
    if (f) j[key] = field_to_json(*f);
  };
  put("x_field", k.x_field);
  put("u_field", k.u_field);
  put("v_limit_field", k.v_field);
  put("a_field", k.a_field);
  put("alpha_field", k.alpha_field);
  put("rho_x_field", k.rho_x_field);
  put("rho_angular_field", k.rho_angular);
  put("kappa0_plus", k.kappa0_plus);
  put("kappa0_minus", k.kappa0_minus);
  put("transient_x", k.transient_x);
  if (k.family == "onedim") {
    j["profile"] = {{"step_scale", k.profile.step_scale},
                    {"transient_decay", k.profile.transient_decay}};
  }
  if (k.bounds) {
    j["bounds"] = {{"kappa1", k.bounds->kappa1},
                   {"kappa2", k.bounds->kappa2},
                   {"kappa3", k.bounds->kappa3},
                   {"beta", k.bounds->beta}};
  }
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  require_keys(j, "model.kernel",
               {"family", "value", "x_field", "u_field", "v_limit_field", "a_field",
                "alpha_field", "rho_x_field", "rho_angular_field", "kappa0_plus", "kappa0_minus",
                "transient_x", "profile", "bounds"});
  KernelSpec k;
  k.family = j.at("family").get<std::string>();
  if (k.family != "constant" && k.family != "product" && k.family != "diffeo" &&
      k.family != "variable_order" && k.family != "onedim")
    throw ConfigError("config: unknown kernel family '" + k.family + "'");
  k.value = j.value("value", 1.0);
  auto get = [&](const char* key) -> std::optional<FieldSpec> {
    if (!j.contains(key)) return std::nullopt;
    return field_from_json(j.at(key), key);
  };
  k.x_field = get("x_field");
  k.u_field = get("u_field");
  k.v_field = get("v_limit_field");
  k.a_field = get("a_field");
  k.alpha_field = get("alpha_field");
  k.rho_x_field = get("rho_x_field");
  k.rho_angular = get("rho_angular_field");
  k.kappa0_plus = get("kappa0_plus");
  k.kappa0_minus = get("kappa0_minus");
  k.transient_x = get("transient_x");
  if (j.contains("profile")) {
    const auto& p = j.at("profile");
    require_keys(p, "kernel.profile", {"step_scale", "transient_decay"});
    k.profile.step_scale = p.value("step_scale", 1.0);
    k.profile.transient_decay = p.value("transient_decay", 10.0);
  }
  if (j.contains("bounds")) {
    const auto& b = j.at("bounds");
    require_keys(b, "kernel.bounds", {"kappa1", "kappa2", "kappa3", "beta"});
    KernelBounds kb;
    kb.kappa1 = b.at("kappa1").get<double>();
    kb.kappa2 = b.at("kappa2").get<double>();
    kb.kappa3 = b.value("kappa3", 0.0);
    kb.beta = b.value("beta", 0.5);
    k.bounds = kb;
  }
  return k;
}

template <class T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

PeriodicField FieldSpec::build() const {
  if (is_grid) return PeriodicField::grid(dim, grid_n, arity, grid_values);
  return PeriodicField::fourier(dim, components);
}

LevyDensity LevySpec::build() const {
  if (d == 1) return LevyDensity::one_dim(alpha, jplus, jminus);
  if (!angular_table.empty()) return LevyDensity::angular_table(alpha, angular_table);
  return LevyDensity::isotropic(d, alpha);
}

JumpKernel KernelSpec::build(int d, double alpha, const LevyDensity& J) const {
  if (family == "constant") return JumpKernel::constant(d, value);
  if (family == "product") {
    if (!x_field || !u_field || !v_field)
      throw ConfigError("config: product kernel needs x_field, u_field and v_limit_field");
    return JumpKernel::product(d, x_field->build(), u_field->build(), v_field->build(), bounds);
  }
  if (family == "diffeo") {
    if (!a_field) throw ConfigError("config: diffeo kernel needs a_field");
    return JumpKernel::diffeo(d, alpha, a_field->build(), bounds);
  }
  if (family == "variable_order") {
    if (!alpha_field || !rho_x_field)
      throw ConfigError("config: variable_order kernel needs alpha_field and rho_x_field");
    std::optional<PeriodicField> rho_ang;
    if (rho_angular) rho_ang = rho_angular->build();
    // J0 is the model's own Levy density: kappa* = rho / J0 must refer to the
    // density that multiplies it in the generator
    return JumpKernel::variable_order(alpha_field->build(), rho_x_field->build(), rho_ang, J,
                                      bounds);
  }
  if (family == "onedim") {
    if (d != 1) throw ConfigError("config: onedim kernel is one-dimensional");
    if (!kappa0_plus || !kappa0_minus)
      throw ConfigError("config: onedim kernel needs kappa0_plus and kappa0_minus");
    std::optional<PeriodicField> trans;
    if (transient_x) trans = transient_x->build();
    return JumpKernel::one_dim(kappa0_plus->build(), kappa0_minus->build(), trans, profile,
                               bounds);
  }
  throw ConfigError("config: unknown kernel family '" + family + "'");
}

ModelSpec ModelConfig::build() const {
  ModelSpec m;
  m.d = d;
  m.alpha = alpha;
  LevySpec ls = levy;
  ls.d = d;
  ls.alpha = alpha;
  m.J = ls.build();
  m.kernel = kernel.build(d, alpha, m.J);
  if (b) m.b = b->build();
  if (c) m.c = c->build();
  m.allow_inactive_drift = allow_inactive_drift;
  m.validate();
  return m;
}

SimOptions NumericsConfig::sim_options() const {
  SimOptions so;
  so.delta = delta;
  so.jump_cap = jump_cap;
  so.substep_scale = substep_scale;
  so.comp_grid_n = comp_grid_n;
  so.comp_radial_per_decade = comp_radial_per_decade;
  so.comp_angular_nodes = comp_angular_nodes;
  so.comp_numeric_cutoff = comp_numeric_cutoff;
  return so;
}

InvariantOptions NumericsConfig::invariant_options() const {
  InvariantOptions io;
  io.grid_n = invariant_grid_n;
  io.t_burn = t_burn;
  io.t_run = t_run;
  io.n_chains = n_chains;
  return io;
}

CorrectorOptions NumericsConfig::corrector_options(int d) const {
  CorrectorOptions co;
  co.grid_n = corrector_grid_n > 0 ? corrector_grid_n : (d >= 2 ? 32 : 64);
  co.horizon = corrector_horizon;
  co.n_paths = corrector_paths;
  co.fourier_modes = corrector_modes;
  co.target_tol = corrector_tol;
  co.residual_probes = residual_probes;
  co.centering_tol = centering_tol;
  co.residual_quad = gen_quad();
  return co;
}

GenQuad NumericsConfig::gen_quad() const {
  GenQuad q;
  q.r_inner = gen_r_inner;
  q.nodes_per_decade = gen_nodes_per_decade;
  q.angular_nodes = gen_angular_nodes;
  q.resolve_radius = gen_resolve_radius;
  return q;
}

HomogenizeOptions NumericsConfig::homogenize_options() const {
  HomogenizeOptions ho;
  ho.u_nodes = homog_u_nodes;
  ho.angular_nodes = homog_angular_nodes;
  return ho;
}

ExponentQuad NumericsConfig::exponent_quad() const {
  ExponentQuad eq;
  eq.r_inner = exp_r_inner;
  eq.nodes_per_decade = exp_nodes_per_decade;
  return eq;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  json j;
  j["preset"] = cfg.preset;

  json jm;
  jm["d"] = cfg.model.d;
  jm["alpha"] = cfg.model.alpha;
  jm["levy"] = levy_to_json(cfg.model.levy);
  jm["kernel"] = kernel_to_json(cfg.model.kernel);
  if (cfg.model.b) jm["b"] = field_to_json(*cfg.model.b);
  if (cfg.model.c) jm["c"] = field_to_json(*cfg.model.c);
  if (cfg.model.allow_inactive_drift) jm["allow_inactive_drift"] = true;
  j["model"] = jm;

  const auto& n = cfg.numerics;
  json jn;
  jn["delta"] = n.delta;
  jn["jump_cap"] = n.jump_cap;
  jn["substep_scale"] = n.substep_scale;
  jn["comp_grid_n"] = n.comp_grid_n;
  jn["comp_radial_per_decade"] = n.comp_radial_per_decade;
  jn["comp_angular_nodes"] = n.comp_angular_nodes;
  jn["comp_numeric_cutoff"] = n.comp_numeric_cutoff;
  jn["invariant_grid_n"] = n.invariant_grid_n;
  jn["t_burn"] = n.t_burn;
  jn["t_run"] = n.t_run;
  jn["n_chains"] = n.n_chains;
  jn["mixing_paths"] = n.mixing_paths;
  jn["corrector_grid_n"] = n.corrector_grid_n;
  jn["corrector_horizon"] = n.corrector_horizon;
  jn["corrector_paths"] = n.corrector_paths;
  jn["corrector_modes"] = n.corrector_modes;
  jn["corrector_tol"] = n.corrector_tol;
  jn["residual_probes"] = n.residual_probes;
  jn["centering_tol"] = n.centering_tol;
  jn["gen_r_inner"] = n.gen_r_inner;
  jn["gen_nodes_per_decade"] = n.gen_nodes_per_decade;
  jn["gen_angular_nodes"] = n.gen_angular_nodes;
  jn["gen_resolve_radius"] = n.gen_resolve_radius;
  jn["homog_u_nodes"] = n.homog_u_nodes;
  jn["homog_angular_nodes"] = n.homog_angular_nodes;
  jn["exp_r_inner"] = n.exp_r_inner;
  jn["exp_nodes_per_decade"] = n.exp_nodes_per_decade;
  j["numerics"] = jn;

  json jr;
  jr["eps_list"] = cfg.run.eps_list;
  jr["t_list"] = cfg.run.t_list;
  jr["xi_grid"] = {{"points_per_axis", cfg.run.xi_points_per_axis}, {"max", cfg.run.xi_max}};
  jr["n_paths"] = cfg.run.n_paths;
  jr["seed_base"] = cfg.run.seed_base;
  if (!cfg.run.out_dir.empty()) jr["out_dir"] = cfg.run.out_dir;
  j["run"] = jr;

  return j.dump(2) + "\n";
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: JSON parse error: ") + e.what());
  }
  require_keys(j, "top level", {"preset", "model", "numerics", "run"});
  ExperimentConfig cfg;
  cfg.preset = j.value("preset", std::string("none"));

  if (!j.contains("model")) throw ConfigError("config: missing model block");
  const auto& jm = j.at("model");
  require_keys(jm, "model", {"d", "alpha", "levy", "kernel", "b", "c", "allow_inactive_drift"});
  cfg.model.d = jm.value("d", 1);
  if (!jm.contains("alpha")) throw ConfigError("config: missing model.alpha");
  cfg.model.alpha = jm.at("alpha").get<double>();
  if (!(cfg.model.alpha > 0.0 && cfg.model.alpha < 2.0))
    throw ConfigError("config: alpha must lie in (0,2)");
  if (cfg.model.d < 1 || cfg.model.d > 2) throw ConfigError("config: d must be 1 or 2");
  if (jm.contains("levy")) cfg.model.levy = levy_from_json(jm.at("levy"));
  cfg.model.levy.d = cfg.model.d;
  cfg.model.levy.alpha = cfg.model.alpha;
  if (!jm.contains("kernel")) throw ConfigError("config: missing model.kernel");
  cfg.model.kernel = kernel_from_json(jm.at("kernel"));
  if (jm.contains("b") && !jm.at("b").is_null())
    cfg.model.b = field_from_json(jm.at("b"), "model.b");
  if (jm.contains("c") && !jm.at("c").is_null())
    cfg.model.c = field_from_json(jm.at("c"), "model.c");
  cfg.model.allow_inactive_drift = jm.value("allow_inactive_drift", false);

  if (j.contains("numerics")) {
    const auto& jn = j.at("numerics");
    require_keys(jn, "numerics",
                 {"delta", "jump_cap", "substep_scale", "comp_grid_n", "comp_radial_per_decade",
                  "comp_angular_nodes", "comp_numeric_cutoff", "invariant_grid_n", "t_burn",
                  "t_run", "n_chains", "mixing_paths", "corrector_grid_n", "corrector_horizon",
                  "corrector_paths", "corrector_modes", "corrector_tol", "residual_probes",
                  "centering_tol", "gen_r_inner", "gen_nodes_per_decade", "gen_angular_nodes",
                  "gen_resolve_radius", "homog_u_nodes", "homog_angular_nodes", "exp_r_inner",
                  "exp_nodes_per_decade"});
    auto& n = cfg.numerics;
    maybe(jn, "delta", n.delta);
    maybe(jn, "jump_cap", n.jump_cap);
    maybe(jn, "substep_scale", n.substep_scale);
    maybe(jn, "comp_grid_n", n.comp_grid_n);
    maybe(jn, "comp_radial_per_decade", n.comp_radial_per_decade);
    maybe(jn, "comp_angular_nodes", n.comp_angular_nodes);
    maybe(jn, "comp_numeric_cutoff", n.comp_numeric_cutoff);
    maybe(jn, "invariant_grid_n", n.invariant_grid_n);
    maybe(jn, "t_burn", n.t_burn);
    maybe(jn, "t_run", n.t_run);
    maybe(jn, "n_chains", n.n_chains);
    maybe(jn, "mixing_paths", n.mixing_paths);
    maybe(jn, "corrector_grid_n", n.corrector_grid_n);
    maybe(jn, "corrector_horizon", n.corrector_horizon);
    maybe(jn, "corrector_paths", n.corrector_paths);
    maybe(jn, "corrector_modes", n.corrector_modes);
    maybe(jn, "corrector_tol", n.corrector_tol);
    maybe(jn, "residual_probes", n.residual_probes);
    maybe(jn, "centering_tol", n.centering_tol);
    maybe(jn, "gen_r_inner", n.gen_r_inner);
    maybe(jn, "gen_nodes_per_decade", n.gen_nodes_per_decade);
    maybe(jn, "gen_angular_nodes", n.gen_angular_nodes);
    maybe(jn, "gen_resolve_radius", n.gen_resolve_radius);
    maybe(jn, "homog_u_nodes", n.homog_u_nodes);
    maybe(jn, "homog_angular_nodes", n.homog_angular_nodes);
    maybe(jn, "exp_r_inner", n.exp_r_inner);
    maybe(jn, "exp_nodes_per_decade", n.exp_nodes_per_decade);
    if (!(n.delta > 0.0 && n.delta < 1.0))
      throw ConfigError("config: numerics.delta must lie in (0,1)");
  }

  if (j.contains("run")) {
    const auto& jr = j.at("run");
    require_keys(jr, "run", {"eps_list", "t_list", "xi_grid", "n_paths", "seed_base", "out_dir"});
    auto& r = cfg.run;
    maybe(jr, "eps_list", r.eps_list);
    maybe(jr, "t_list", r.t_list);
    if (jr.contains("xi_grid")) {
      const auto& jx = jr.at("xi_grid");
      require_keys(jx, "run.xi_grid", {"points_per_axis", "max"});
      r.xi_points_per_axis = jx.value("points_per_axis", 17);
      r.xi_max = jx.value("max", 5.0);
    }
    maybe(jr, "n_paths", r.n_paths);
    if (jr.contains("seed_base")) r.seed_base = jr.at("seed_base").get<std::uint64_t>();
    maybe(jr, "out_dir", r.out_dir);
    for (std::size_t i = 1; i < r.eps_list.size(); ++i)
      if (r.eps_list[i] >= r.eps_list[i - 1])
        throw ConfigError("config: run.eps_list must be strictly decreasing");
    if (r.eps_list.empty() || r.eps_list.front() <= 0.0)
      throw ConfigError("config: run.eps_list must hold positive values");
  }

  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = fnv1a64(serialize_config(cfg));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> preset_names() {
  return {"su18", "sde_diffeo", "variable_order", "onedim"};
}

ExperimentConfig expand_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  cfg.model.d = 1;
  cfg.model.alpha = 1.5;
  cfg.model.levy = LevySpec{1, 1.5, 1.0, 1.0, {}};
  cfg.numerics.delta = 0.01;
  cfg.run.eps_list = {0.5, 0.25, 0.125};
  cfg.run.t_list = {1.0};
  cfg.run.n_paths = 10000;

  auto fourier1 = [](std::vector<FourierTerm> terms) {
    FieldSpec f;
    f.dim = 1;
    f.arity = 1;
    f.components = {std::move(terms)};
    return f;
  };

  if (name == "su18") {
    // pure-jump kernel depending on the fast torus variable only
    cfg.model.kernel.family = "product";
    cfg.model.kernel.x_field = fourier1({FourierTerm{{0}, 1.0, 0.0}});
    cfg.model.kernel.u_field = fourier1({FourierTerm{{0}, 1.0, 0.0}, FourierTerm{{1}, 0.0, 0.5}});
    cfg.model.kernel.v_field = fourier1({FourierTerm{{0}, 1.0, 0.0}});
    return cfg;
  }
  if (name == "sde_diffeo") {
    cfg.model.kernel.family = "diffeo";
    cfg.model.kernel.a_field = fourier1({FourierTerm{{0}, 1.0, 0.0}, FourierTerm{{1}, 0.0, 0.25}});
    cfg.model.c = fourier1({FourierTerm{{0}, 0.5, 0.0}});
    return cfg;
  }
  if (name == "variable_order") {
    const double alpha0 = 0.6;
    cfg.model.alpha = alpha0;
    cfg.model.levy.alpha = alpha0;
    cfg.model.kernel.family = "variable_order";
    FieldSpec af;
    af.dim = 1;
    af.arity = 1;
    af.is_grid = true;
    af.grid_n = 64;
    af.grid_values.resize(64);
    for (int i = 0; i < 64; ++i) {
      double x = static_cast<double>(i) / 64.0;
      double bump = x >= 0.5 ? std::pow(std::sin(2.0 * std::numbers::pi * (x - 0.5)), 2) : 0.0;
      af.grid_values[i] = alpha0 + 0.3 * bump;
    }
    cfg.model.kernel.alpha_field = af;
    cfg.model.kernel.rho_x_field = fourier1({FourierTerm{{0}, 1.2, 0.0}, FourierTerm{{1}, 0.3, 0.0}});
    // the diagonal kernel escapes every uniform band as |z| -> 0 wherever
    // alpha(x) > alpha0: declare a band covering the simulated jump range
    KernelBounds kb;
    kb.kappa1 = 0.0;
    kb.kappa2 = 1.5 * std::pow(cfg.numerics.delta, -0.3) * 1.05;
    kb.kappa3 = 64.0;  // the log|v|-weighted alpha variation dominates the x-modulus
    kb.beta = 0.5;
    cfg.model.kernel.bounds = kb;
    cfg.run.eps_list = {0.5, 0.25};
    cfg.run.n_paths = 4000;
    return cfg;
  }
  if (name == "onedim") {
    cfg.model.levy.jminus = 2.0;
    cfg.model.kernel.family = "onedim";
    cfg.model.kernel.kappa0_plus = fourier1({FourierTerm{{0}, 1.2, 0.0}, FourierTerm{{1}, 0.0, 0.3}});
    cfg.model.kernel.kappa0_minus = fourier1({FourierTerm{{0}, 1.0, 0.0}, FourierTerm{{1}, 0.2, 0.0}});
    cfg.model.kernel.transient_x = fourier1({FourierTerm{{0}, 0.15, 0.0}});
    cfg.model.kernel.profile.step_scale = 1.0;
    cfg.model.kernel.profile.transient_decay = 10.0;
    return cfg;
  }
  throw ConfigError("config: unknown preset '" + name + "'");
}

}  // namespace homog
