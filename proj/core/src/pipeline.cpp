#include "homog/pipeline.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homog/errors.hpp"

namespace homog {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  fs::create_directories(fs::path(path).parent_path().empty()
                             ? fs::path(".")
                             : fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NumericsError("pipeline: cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("pipeline: cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json meta_block(const std::string& hash, std::uint64_t seed_base) {
  json j;
  j["config_hash"] = hash;
  j["seed_base"] = seed_base;
  return j;
}

/// Pilot mixing estimate reused by the invariant and corrector stages.
MixingEstimate pilot_mixing(const ExperimentConfig& cfg, const ModelSpec& model) {
  SimOptions so = cfg.numerics.sim_options();
  // probe the contraction with a short geometric time ladder
  std::vector<double> ts;
  double t = 0.01;
  for (int i = 0; i < 8; ++i) {
    ts.push_back(t);
    t *= 1.6;
  }
  return mixing_rate_estimate(model, so, ts, cfg.numerics.mixing_paths,
                              derive_seed(cfg.run.seed_base, "mixing-pilot", 0));
}

}  // namespace

bool file_exists(const std::string& path) { return fs::exists(path); }

void write_path_csv(const std::string& path, const PathRecord& record) {
  std::ostringstream out;
  const int d = static_cast<int>(record.x0.size());
  out << "# tag=" << record.tag << " eps=" << fmt(record.eps) << " T=" << fmt(record.T) << "\n";
  out << "t";
  for (int j = 0; j < d; ++j) out << ",x_" << j;
  out << ",jump\n";
  out << fmt(0.0);
  for (int j = 0; j < d; ++j) out << "," << fmt(record.x0[j]);
  out << ",0\n";
  for (const auto& e : record.events) {
    if (!e.accepted) continue;
    out << fmt(e.t);
    for (int j = 0; j < d; ++j) out << "," << fmt(e.x_post[j]);
    out << ",1\n";
  }
  write_text(path, out.str());
}

void write_invariant_csv(const std::string& path, const EmpiricalMeasure& mu,
                         const std::string& hash, std::uint64_t seed_base) {
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "# seed_base=" << seed_base << "\n";
  out << "# d=" << mu.dim() << " grid_n=" << mu.grid_n() << "\n";
  out << "cell_index";
  for (int j = 0; j < mu.dim(); ++j) out << ",center_" << j;
  out << ",weight\n";
  std::vector<double> c(mu.dim());
  for (std::size_t i = 0; i < mu.cell_count(); ++i) {
    mu.cell_center(i, c);
    out << i;
    for (int j = 0; j < mu.dim(); ++j) out << "," << fmt(c[j]);
    out << "," << fmt(mu.weights()[i]) << "\n";
  }
  write_text(path, out.str());
}

EmpiricalMeasure load_invariant_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::string line;
  int d = 0, grid_n = 0;
  std::vector<double> weights;
  while (std::getline(in, line)) {
    if (line.rfind("# d=", 0) == 0) {
      std::sscanf(line.c_str(), "# d=%d grid_n=%d", &d, &grid_n);
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("cell_index", 0) == 0) continue;
    auto pos = line.find_last_of(',');
    weights.push_back(std::strtod(line.c_str() + pos + 1, nullptr));
  }
  if (d == 0 || grid_n == 0 || weights.empty())
    throw ConfigError("pipeline: malformed invariant histogram " + path);
  EmpiricalMeasure mu(d, grid_n);
  for (std::size_t i = 0; i < weights.size(); ++i) mu.add_cell(i, weights[i]);
  mu.normalize();
  return mu;
}

void write_corrector_csv(const std::string& path, const Corrector& corr, int d,
                         const std::string& hash, std::uint64_t seed_base) {
  const int n = corr.values.grid_n();
  std::size_t cells = corr.values.grid_values().size() / static_cast<std::size_t>(d);
  std::ostringstream out;
  out << "# config_hash=" << hash << "\n";
  out << "# seed_base=" << seed_base << "\n";
  out << "# d=" << d << " grid_n=" << n << " residual=" << fmt(corr.residual_norm)
      << " residual_tol=" << fmt(corr.residual_tolerance) << "\n";
  out << "node_index";
  for (int j = 0; j < d; ++j) out << ",x_" << j;
  for (int j = 0; j < d; ++j) out << ",bhat_" << j;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out << ",grad_" << i << j;
  out << "\n";
  const auto& vals = corr.values.grid_values();
  const auto& grads = corr.gradient.grid_values();
  for (std::size_t flat = 0; flat < cells; ++flat) {
    out << flat;
    std::size_t rem = flat;
    std::vector<double> x(d);
    for (int j = d - 1; j >= 0; --j) {
      x[j] = static_cast<double>(rem % n) / n;
      rem /= n;
    }
    for (int j = 0; j < d; ++j) out << "," << fmt(x[j]);
    for (int j = 0; j < d; ++j) out << "," << fmt(vals[static_cast<std::size_t>(j) * cells + flat]);
    for (int e = 0; e < d * d; ++e)
      out << "," << fmt(grads[static_cast<std::size_t>(e) * cells + flat]);
    out << "\n";
  }
  write_text(path, out.str());
}

Corrector load_corrector_csv(const std::string& path, int d) {
  std::istringstream in(read_text(path));
  std::string line;
  int dd = 0, n = 0;
  double residual = 0.0, residual_tol = 0.0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.rfind("# d=", 0) == 0) {
      std::sscanf(line.c_str(), "# d=%d grid_n=%d residual=%lf residual_tol=%lf", &dd, &n,
                  &residual, &residual_tol);
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("node_index", 0) == 0) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
    rows.push_back(std::move(row));
  }
  if (dd != d || n == 0 || rows.empty())
    throw ConfigError("pipeline: malformed corrector table " + path);
  std::size_t cells = rows.size();
  std::vector<double> vals(cells * static_cast<std::size_t>(d));
  std::vector<double> grads(cells * static_cast<std::size_t>(d) * d);
  for (const auto& row : rows) {
    std::size_t flat = static_cast<std::size_t>(row[0]);
    for (int j = 0; j < d; ++j)
      vals[static_cast<std::size_t>(j) * cells + flat] = row[1 + d + j];
    for (int e = 0; e < d * d; ++e)
      grads[static_cast<std::size_t>(e) * cells + flat] = row[1 + 2 * d + e];
  }
  Corrector corr;
  corr.values = PeriodicField::grid(d, n, d, std::move(vals));
  corr.gradient = PeriodicField::grid(d, n, d * d, std::move(grads));
  corr.residual_norm = residual;
  corr.residual_tolerance = residual_tol;
  corr.centering_residual.assign(d, 0.0);
  return corr;
}

void write_triplet_json(const std::string& path, const HomogenizedTriplet& trip,
                        const std::string& hash, std::uint64_t seed_base) {
  json j = meta_block(hash, seed_base);
  j["d"] = trip.d;
  j["alpha"] = trip.alpha;
  j["b_bar"] = trip.b_bar;
  j["c_bar"] = trip.c_bar;
  j["truncation"] = "unit_ball";
  j["kappa1"] = trip.kappa1;
  j["kappa2"] = trip.kappa2;
  j["tail_bound"] = trip.tail_bound;
  json kb;
  kb["values"] = trip.kappa_bar.values;
  j["kappa_bar"] = kb;
  json jl;
  jl["alpha"] = trip.J.alpha();
  jl["d"] = trip.J.dim();
  if (trip.J.dim() == 1) {
    jl["jplus"] = trip.J.jplus();
    jl["jminus"] = trip.J.jminus();
  } else {
    jl["angular_table"] = trip.J.table();
  }
  j["levy"] = jl;
  write_text(path, j.dump(2) + "\n");
}

HomogenizedTriplet load_triplet_json(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline: bad triplet JSON: ") + e.what());
  }
  HomogenizedTriplet trip;
  trip.d = j.at("d").get<int>();
  trip.alpha = j.at("alpha").get<double>();
  trip.b_bar = j.at("b_bar").get<std::vector<double>>();
  trip.c_bar = j.at("c_bar").get<std::vector<double>>();
  trip.kappa1 = j.at("kappa1").get<double>();
  trip.kappa2 = j.at("kappa2").get<double>();
  trip.tail_bound = j.value("tail_bound", 0.0);
  trip.kappa_bar.d = trip.d;
  trip.kappa_bar.values = j.at("kappa_bar").at("values").get<std::vector<double>>();
  const auto& jl = j.at("levy");
  if (jl.at("d").get<int>() == 1)
    trip.J = LevyDensity::one_dim(jl.at("alpha").get<double>(), jl.at("jplus").get<double>(),
                                  jl.at("jminus").get<double>());
  else
    trip.J = LevyDensity::angular_table(jl.at("alpha").get<double>(),
                                        jl.at("angular_table").get<std::vector<double>>());
  return trip;
}

void write_verify_outputs(const std::string& json_path, const std::string& csv_path,
                          const ConvergenceReport& rep, const std::string& hash,
                          std::uint64_t seed_base) {
  json j = meta_block(hash, seed_base);
  j["eps_list"] = rep.eps_list;
  j["t_list"] = rep.t_list;
  json ecf = json::array();
  for (std::size_t ei = 0; ei < rep.eps_list.size(); ++ei) {
    for (std::size_t ti = 0; ti < rep.t_list.size(); ++ti) {
      const auto& d = rep.ecf[ei][ti];
      json je;
      je["eps"] = rep.eps_list[ei];
      je["t"] = rep.t_list[ti];
      je["distance"] = d.distance;
      je["noise_floor"] = d.noise_floor;
      je["se_at_argmax"] = d.se_at_argmax;
      je["max_ratio"] = d.max_ratio;
      je["at_floor"] = d.at_floor;
      ecf.push_back(je);
    }
  }
  j["ecf_distances"] = ecf;
  j["monotone"] = rep.monotone;
  j["final_at_floor"] = rep.final_at_floor;
  j["verdict"] = rep.pass ? "pass" : "fail";
  j["bconv_stat"] = rep.bconv_stat;
  j["bconv_se"] = rep.bconv_se;
  j["bconv_pass"] = rep.bconv_pass;
  j["nuconv_stat"] = rep.nuconv_stat;
  j["nuconv_se"] = rep.nuconv_se;
  j["nu_reference"] = rep.nu_reference;
  j["nuconv_pass"] = rep.nuconv_pass;
  j["runtime"] = {{"total_paths", rep.total_paths}, {"total_jumps", rep.total_jumps}};
  write_text(json_path, j.dump(2) + "\n");

  std::ostringstream csv;
  csv << "# config_hash=" << hash << "\n";
  csv << "# seed_base=" << seed_base << "\n";
  csv << "eps,t";
  std::size_t d = rep.table.empty() ? 1 : rep.table.front().xi.size();
  for (std::size_t k = 0; k < d; ++k) csv << ",xi_" << k;
  csv << ",re,im,se,ref_re,ref_im\n";
  for (const auto& row : rep.table) {
    csv << fmt(row.eps) << "," << fmt(row.t);
    for (double x : row.xi) csv << "," << fmt(x);
    csv << "," << fmt(row.re) << "," << fmt(row.im) << "," << fmt(row.se) << ","
        << fmt(row.ref_re) << "," << fmt(row.ref_im) << "\n";
  }
  write_text(csv_path, csv.str());
}

namespace {

struct StageContext {
  const ExperimentConfig& cfg;
  std::string out;
  std::string hash;
  ModelSpec model;

  std::string path(const char* name) const { return out + "/" + name; }
};

StageResult stage_validate(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  json j = meta_block(ctx.hash, cfg.run.seed_base);
  ValidationOptions vo;
  vo.drift_present = ctx.model.b && ctx.model.b->sup_bound() > 0.0;
  auto rep = validate_assumptions(ctx.model.kernel, ctx.model.J, vo);
  j["bounds"] = {{"min_kappa", rep.min_kappa},
                 {"max_kappa", rep.max_kappa},
                 {"kappa1", ctx.model.kernel.kappa1()},
                 {"kappa2", ctx.model.kernel.kappa2()},
                 {"pass", rep.bounds_pass}};
  j["holder"] = {{"ratio", rep.holder_ratio},
                 {"kappa3", ctx.model.kernel.bounds().kappa3},
                 {"pass", rep.holder_pass}};
  auto seq = [](const SequenceCheck& s) {
    json js;
    js["applicable"] = s.applicable;
    js["eps"] = s.eps;
    js["residual"] = s.residual;
    js["pass"] = s.pass();
    return js;
  };
  j["ez"] = seq(rep.ez);
  j["ez1"] = seq(rep.ez1);
  j["kappa0"] = seq(rep.kappa0_conv);
  j["kappa0_l1"] = seq(rep.kappa0_l1);
  if (rep.sphere_applicable)
    j["sphere_centering"] = {{"residual", rep.sphere_centering_residual},
                             {"pass", rep.sphere_pass}};

  bool centering_pass = true;
  if (ctx.model.b && ctx.model.b->sup_bound() > 0.0) {
    // centering against the estimated measure when available, else the
    // uniform proxy (any probability measure rejects a constant offset)
    EmpiricalMeasure mu;
    std::string source = "uniform_proxy";
    if (file_exists(ctx.path("invariant.csv"))) {
      mu = load_invariant_csv(ctx.path("invariant.csv"));
      source = "estimated";
    } else {
      mu = EmpiricalMeasure::uniform(ctx.model.d, cfg.numerics.invariant_grid_n);
    }
    auto cent = check_centering(*ctx.model.b, mu, cfg.numerics.centering_tol);
    centering_pass = cent.pass;
    j["centering"] = {{"residual", cent.residual},
                      {"max_abs", cent.max_abs},
                      {"tol", cent.tol},
                      {"measure", source},
                      {"pass", cent.pass}};
  }

  bool pass = rep.pass() && centering_pass;
  j["pass"] = pass;
  write_text(ctx.path("validate.json"), j.dump(2) + "\n");
  if (!pass) return {kExitValidation, "assumption validation failed (see validate.json)"};
  return {kExitOk, "validate: all assumption checks passed"};
}

StageResult stage_invariant(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (file_exists(ctx.path("invariant.csv")))
    return {kExitOk, "invariant: reusing existing artifact"};
  auto mix = pilot_mixing(cfg, ctx.model);
  InvariantOptions io = cfg.numerics.invariant_options();
  if (io.t_burn < 0.0) {
    double rate = (mix.decaying && mix.rate > 0.1) ? mix.rate : 1.0;
    io.t_burn = 5.0 / rate;
  }
  auto mu = estimate_invariant_measure(ctx.model, cfg.numerics.sim_options(), io,
                                       cfg.run.seed_base);
  write_invariant_csv(ctx.path("invariant.csv"), mu, ctx.hash, cfg.run.seed_base);
  json meta = meta_block(ctx.hash, cfg.run.seed_base);
  meta["mixing_rate"] = mix.rate;
  meta["mixing_prefactor"] = mix.prefactor;
  meta["mixing_decaying"] = mix.decaying;
  meta["t_burn"] = io.t_burn;
  meta["t_run"] = io.t_run;
  meta["n_chains"] = io.n_chains;
  write_text(ctx.path("invariant_meta.json"), meta.dump(2) + "\n");
  return {kExitOk, "invariant: histogram written"};
}

StageResult stage_corrector(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (file_exists(ctx.path("corrector.csv")))
    return {kExitOk, "corrector: reusing existing artifact"};
  if (auto r = stage_invariant(ctx); r.exit_code != 0) return r;
  auto mu = load_invariant_csv(ctx.path("invariant.csv"));

  if (!ctx.model.drift_active() || !ctx.model.b || ctx.model.b->sup_bound() == 0.0) {
    // trivial corrector: write an explicit zero table for downstream reuse
    Corrector corr;
    const int d = ctx.model.d;
    const int n = cfg.numerics.corrector_options(d).grid_n;
    std::size_t cells = 1;
    for (int j = 0; j < d; ++j) cells *= static_cast<std::size_t>(n);
    corr.values = PeriodicField::grid(d, n, d, std::vector<double>(cells * d, 0.0));
    corr.gradient = PeriodicField::grid(d, n, d * d, std::vector<double>(cells * d * d, 0.0));
    corr.trivial = true;
    write_corrector_csv(ctx.path("corrector.csv"), corr, d, ctx.hash, cfg.run.seed_base);
    return {kExitOk, "corrector: b = 0, trivial corrector written"};
  }

  MixingEstimate mix;
  if (file_exists(ctx.path("invariant_meta.json"))) {
    json meta = json::parse(read_text(ctx.path("invariant_meta.json")));
    mix.rate = meta.value("mixing_rate", 0.0);
    mix.prefactor = meta.value("mixing_prefactor", 1.0);
    mix.decaying = meta.value("mixing_decaying", false);
  }
  if (!mix.decaying) mix = pilot_mixing(cfg, ctx.model);

  CorrectorOptions co = cfg.numerics.corrector_options(ctx.model.d);
  co.throw_on_residual = false;
  auto corr = solve_corrector(ctx.model, mu, cfg.numerics.sim_options(), co, cfg.run.seed_base,
                              &mix);
  write_corrector_csv(ctx.path("corrector.csv"), corr, ctx.model.d, ctx.hash, cfg.run.seed_base);
  if (corr.residual_norm > co.target_tol + corr.residual_tolerance)
    return {kExitNumerics, "corrector: residual " + std::to_string(corr.residual_norm) +
                               " exceeds tolerance " + std::to_string(co.target_tol)};
  return {kExitOk, "corrector: table written"};
}

StageResult stage_homogenize(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (file_exists(ctx.path("triplet.json")))
    return {kExitOk, "homogenize: reusing existing artifact"};
  if (auto r = stage_invariant(ctx); r.exit_code != 0) return r;
  auto mu = load_invariant_csv(ctx.path("invariant.csv"));
  std::optional<Corrector> corr;
  const bool needs_corr = ctx.model.drift_active() && ctx.model.b &&
                          ctx.model.b->sup_bound() > 0.0;
  if (needs_corr) {
    if (auto r = stage_corrector(ctx); r.exit_code != 0) return r;
    corr = load_corrector_csv(ctx.path("corrector.csv"), ctx.model.d);
  }
  auto trip = homogenize(ctx.model, mu, corr ? &*corr : nullptr,
                         cfg.numerics.homogenize_options());
  write_triplet_json(ctx.path("triplet.json"), trip, ctx.hash, cfg.run.seed_base);
  return {kExitOk, "homogenize: triplet written"};
}

StageResult stage_verify(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  if (auto r = stage_homogenize(ctx); r.exit_code != 0) return r;
  auto trip = load_triplet_json(ctx.path("triplet.json"));
  VerifyOptions vo;
  vo.n_paths = cfg.run.n_paths;
  vo.xi_points_per_axis = cfg.run.xi_points_per_axis;
  vo.xi_max = cfg.run.xi_max;
  vo.exponent_quad = cfg.numerics.exponent_quad();
  auto rep = convergence_report(ctx.model, trip, cfg.run.eps_list, cfg.run.t_list,
                                cfg.numerics.sim_options(), vo, cfg.run.seed_base);
  write_verify_outputs(ctx.path("verify.json"), ctx.path("verify_ecf.csv"), rep, ctx.hash,
                       cfg.run.seed_base);
  return {kExitOk, rep.pass ? "verify: verdict pass" : "verify: verdict fail (see verify.json)"};
}

}  // namespace

StageResult run_stage(const ExperimentConfig& cfg, const std::string& stage,
                      const std::string& out_dir) {
  fs::create_directories(out_dir);
  StageContext ctx{cfg, out_dir, config_hash(cfg), cfg.model.build()};
  write_text(ctx.path("expanded_config.json"), serialize_config(cfg));

  if (stage == "validate") return stage_validate(ctx);
  if (stage == "invariant") return stage_invariant(ctx);
  if (stage == "corrector") return stage_corrector(ctx);
  if (stage == "homogenize") return stage_homogenize(ctx);
  if (stage == "verify") return stage_verify(ctx);
  if (stage == "all") {
    if (auto r = stage_validate(ctx); r.exit_code != 0) return r;
    if (auto r = stage_invariant(ctx); r.exit_code != 0) return r;
    if (auto r = stage_corrector(ctx); r.exit_code != 0) return r;
    if (auto r = stage_homogenize(ctx); r.exit_code != 0) return r;
    return stage_verify(ctx);
  }
  throw ConfigError("pipeline: unknown stage '" + stage + "'");
}

}  // namespace homog
