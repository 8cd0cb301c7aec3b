// Command-line entry point wiring geometry sampling, meshing, assembly,
// solving, theorem verification, forcing sampling, surrogate training,
// boundary control and report aggregation.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "fvlab/control.hpp"
#include "fvlab/fields.hpp"
#include "fvlab/io.hpp"
#include "fvlab/surrogate.hpp"
#include "fvlab/theory.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(const Clock::time_point& t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fvlab::IoError("cannot open '" + path + "'");
  json j;
  in >> j;
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw fvlab::IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << "\n";
}

fvlab::GeometryFamily parse_family(const std::string& name) {
  if (name == "corner" || name == "corner_removed_square")
    return fvlab::GeometryFamily::CornerRemovedSquare;
  if (name == "cube" || name == "cube_with_cylindrical_hole")
    return fvlab::GeometryFamily::CubeWithCylindricalHole;
  if (name == "plate" || name == "perforated_plate")
    return fvlab::GeometryFamily::PerforatedPlate;
  throw fvlab::InvalidArgument("unknown family '" + name + "'");
}

fvlab::BoundarySpec bc_from_json(const fvlab::Mesh& mesh, const json& spec) {
  fvlab::BoundarySpec bc;
  bc.per_patch.resize(mesh.num_patches());
  std::vector<char> covered(mesh.num_patches(), 0);
  bool has_wildcard = false;
  fvlab::PatchBC wildcard;

  auto parse_entry = [](const json& e) {
    const std::string type = e.at("type").get<std::string>();
    fvlab::PatchBC pbc;
    if (type == "dirichlet")
      pbc.type = fvlab::BCType::Dirichlet;
    else if (type == "neumann")
      pbc.type = fvlab::BCType::Neumann;
    else
      throw fvlab::InvalidArgument("unknown BC type '" + type + "'");
    const double value = e.value("value", 0.0);
    pbc.value = [value](const Eigen::Vector3d&) { return value; };
    return pbc;
  };

  for (const json& e : spec) {
    const json& patch = e.at("patch");
    if (patch.is_string() && patch.get<std::string>() == "*") {
      wildcard = parse_entry(e);
      has_wildcard = true;
      continue;
    }
    int id = -1;
    if (patch.is_string())
      id = mesh.find_patch(patch.get<std::string>());
    else
      id = patch.get<int>();
    if (id < 0 || id >= mesh.num_patches())
      throw fvlab::MissingPatchBC("no patch named " + patch.dump());
    bc.per_patch[id] = parse_entry(e);
    covered[id] = 1;
  }
  for (int p = 0; p < mesh.num_patches(); ++p) {
    if (covered[p]) continue;
    if (!has_wildcard)
      throw fvlab::MissingPatchBC("patch '" + mesh.patches[p].label + "' has no BC entry");
    bc.per_patch[p] = wildcard;
  }
  return bc;
}

json run_to_json(const fvlab::SupervisionRun& run, const json& config) {
  json steps = json::array();
  for (const fvlab::StepRecord& r : run.steps)
    steps.push_back({{"loss", r.loss},
                     {"rel_l2", r.rel_l2},
                     {"energy_error", r.energy_error},
                     {"t_forward", r.t_forward},
                     {"t_loss", r.t_loss},
                     {"t_backward", r.t_backward},
                     {"t_total", r.t_total}});
  return {{"config", config},
          {"diverged", run.diverged},
          {"diverged_step", run.diverged_step},
          {"final_rel_l2", run.final_rel_l2},
          {"final_energy_error", run.final_energy_error},
          {"cost",
           {{"loss_time_s", run.mean_loss_time},
            {"total_time_s", run.mean_total_time},
            {"loss_ratio_pct", 100.0 * run.loss_ratio}}},
          {"steps", steps}};
}

int dispatch(int argc, char** argv) {
  CLI::App app{"finite-volume Poisson laboratory"};
  app.require_subcommand(1);

  // geometry
  auto* cmd_geometry = app.add_subcommand("geometry", "sample a domain specification");
  std::string g_family = "corner", g_out = "geometry.json";
  int g_k = 4, g_resolution = 0;
  std::uint64_t g_seed = 0;
  double g_length = fvlab::kDefaultDomainLength;
  cmd_geometry->add_option("--family", g_family, "corner|cube|plate");
  cmd_geometry->add_option("--k", g_k, "removed-corner count (corner family)");
  cmd_geometry->add_option("--seed", g_seed);
  cmd_geometry->add_option("--resolution", g_resolution, "cells per axis");
  cmd_geometry->add_option("--length", g_length, "domain edge length");
  cmd_geometry->add_option("--out", g_out)->required();

  // mesh build
  auto* cmd_mesh = app.add_subcommand("mesh", "mesh operations");
  auto* cmd_mesh_build = cmd_mesh->add_subcommand("build", "build a mesh from a geometry");
  std::string mb_geometry, mb_out = "mesh.json", mb_binary;
  cmd_mesh_build->add_option("--geometry", mb_geometry)->required();
  cmd_mesh_build->add_option("--out", mb_out)->required();
  cmd_mesh_build->add_option("--binary", mb_binary, "also write a compact binary sidecar");

  // assemble
  auto* cmd_assemble = app.add_subcommand("assemble", "discretize into a linear system");
  std::string as_mesh, as_bc, as_forcing, as_coeff, as_out = "sys";
  cmd_assemble->add_option("--mesh", as_mesh)->required();
  cmd_assemble->add_option("--bc", as_bc)->required();
  cmd_assemble->add_option("--forcing", as_forcing)->required();
  cmd_assemble->add_option("--coeff", as_coeff, "per-cell coefficient CSV (default D = 1)");
  cmd_assemble->add_option("--out", as_out)->required();

  // sample-forcing
  auto* cmd_forcing = app.add_subcommand("sample-forcing", "draw a random forcing field");
  std::string sf_mesh, sf_dist = "trig", sf_out = "f.csv";
  std::uint64_t sf_seed = 0;
  cmd_forcing->add_option("--mesh", sf_mesh)->required();
  cmd_forcing->add_option("--dist", sf_dist, "trig|hotspot");
  cmd_forcing->add_option("--seed", sf_seed);
  cmd_forcing->add_option("--out", sf_out)->required();

  // solve
  auto* cmd_solve = app.add_subcommand("solve", "PCG solve of an assembled system");
  std::string sv_system, sv_u0 = "zeros", sv_out = "u.csv", sv_trace, sv_uref;
  double sv_tol = 1e-8;
  int sv_max_iters = 3000;
  cmd_solve->add_option("--system", sv_system)->required();
  cmd_solve->add_option("--u0", sv_u0, "'zeros' or a CSV path");
  cmd_solve->add_option("--tol", sv_tol);
  cmd_solve->add_option("--max-iters", sv_max_iters);
  cmd_solve->add_option("--out", sv_out)->required();
  cmd_solve->add_option("--trace", sv_trace, "residual/energy trace CSV");
  cmd_solve->add_option("--uref", sv_uref, "reference solution for energy errors");

  // fk
  auto* cmd_fk = app.add_subcommand("fk", "apply the K-step PCG operator");
  std::string fk_system, fk_u, fk_out = "uk.csv";
  int fk_k = 40;
  cmd_fk->add_option("--system", fk_system)->required();
  cmd_fk->add_option("--u", fk_u)->required();
  cmd_fk->add_option("--k", fk_k);
  cmd_fk->add_option("--out", fk_out)->required();

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "run the theorem battery");
  std::string vf_battery = "default", vf_out = "reports.json";
  int vf_threads = 1;
  cmd_verify->add_option("--battery", vf_battery, "default|quick");
  cmd_verify->add_option("--threads", vf_threads, "parallel trial batching");
  cmd_verify->add_option("--out", vf_out)->required();

  // train
  auto* cmd_train = app.add_subcommand("train", "train the surrogate");
  std::string tr_instances, tr_mode = "iter", tr_out = "run.json";
  int tr_k = 40, tr_steps = 2000, tr_hidden = 64;
  bool tr_stop_grad = true;
  double tr_lr = 1e-2;
  std::uint64_t tr_seed = 0;
  cmd_train->add_option("--instances", tr_instances)->required();
  cmd_train->add_option("--mode", tr_mode, "iter|residual|data");
  cmd_train->add_option("--k", tr_k);
  cmd_train->add_option("--stop-grad", tr_stop_grad);
  cmd_train->add_option("--steps", tr_steps);
  cmd_train->add_option("--lr", tr_lr);
  cmd_train->add_option("--hidden", tr_hidden);
  cmd_train->add_option("--seed", tr_seed);
  cmd_train->add_option("--out", tr_out)->required();

  // control
  auto* cmd_control = app.add_subcommand("control", "thermal boundary control");
  std::string ct_geometry, ct_out = "ctrl.json", ct_history;
  std::uint64_t ct_fseed = 0;
  double ct_um = 25.0, ct_alpha = 0.01, ct_step = 1.0, ct_tau0 = 0.0;
  int ct_iters = 100;
  cmd_control->add_option("--geometry", ct_geometry)->required();
  cmd_control->add_option("--forcing-seed", ct_fseed);
  cmd_control->add_option("--um", ct_um, "peak-temperature threshold");
  cmd_control->add_option("--alpha", ct_alpha, "effort weight");
  cmd_control->add_option("--iters", ct_iters);
  cmd_control->add_option("--step", ct_step, "gradient step size");
  cmd_control->add_option("--tau0", ct_tau0, "0 for hard max, >0 for smooth max");
  cmd_control->add_option("--out", ct_out)->required();
  cmd_control->add_option("--history", ct_history, "per-iteration CSV");

  // report
  auto* cmd_report = app.add_subcommand("report", "merge training runs");
  std::vector<std::string> rp_runs;
  std::string rp_out = "summary.json", rp_tables;
  cmd_report->add_option("runs", rp_runs, "run JSON files")->required();
  cmd_report->add_option("--out", rp_out)->required();
  cmd_report->add_option("--tables", rp_tables, "CSV table prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
  }
  const auto t0 = Clock::now();

  if (*cmd_geometry) {
    const fvlab::GeometrySpec spec =
        fvlab::sample_geometry(parse_family(g_family), g_k, g_seed, g_length, g_resolution);
    fvlab::save_geometry(spec, g_out);
    json config{{"family", g_family},
                {"k", g_k},
                {"seed", g_seed},
                {"resolution", g_resolution},
                {"length", g_length}};
    fvlab::write_manifest(fvlab::make_manifest("geometry", config, {}, ms_since(t0)), g_out);
    std::cout << "wrote " << g_out << "\n";
    return 0;
  }

  if (*cmd_mesh_build) {
    const fvlab::GeometrySpec spec = fvlab::load_geometry(mb_geometry);
    const fvlab::Mesh mesh = fvlab::build_mesh(spec);
    fvlab::save_mesh(mesh, mb_out);
    if (!mb_binary.empty()) fvlab::save_mesh_binary(mesh, mb_binary);
    json config{{"geometry", mb_geometry}};
    fvlab::write_manifest(fvlab::make_manifest("mesh build", config, {mb_geometry}, ms_since(t0)),
                          mb_out);
    std::cout << "cells=" << mesh.num_cells() << " patches=" << mesh.num_patches() << "\n";
    return 0;
  }

  if (*cmd_assemble) {
    const fvlab::Mesh mesh = fvlab::load_mesh(as_mesh);
    const fvlab::BoundarySpec bc = bc_from_json(mesh, load_json(as_bc));
    const Eigen::VectorXd forcing = fvlab::read_csv_vector(as_forcing);
    fvlab::CoefficientField coeff = fvlab::CoefficientField::constant(mesh.num_cells());
    std::vector<std::string> inputs{as_mesh, as_bc, as_forcing};
    if (!as_coeff.empty()) {
      coeff.values = fvlab::read_csv_vector(as_coeff);
      inputs.push_back(as_coeff);
    }
    const fvlab::LinearSystem sys = fvlab::assemble(mesh, bc, forcing, coeff);
    fvlab::save_system(sys, as_out);
    json config{{"mesh", as_mesh}, {"bc", as_bc}, {"forcing", as_forcing}, {"coeff", as_coeff}};
    fvlab::write_manifest(fvlab::make_manifest("assemble", config, inputs, ms_since(t0)),
                          as_out + "/system.json");
    std::cout << "n=" << sys.size() << " nnz=" << sys.matrix.nonZeros()
              << " pinned=" << sys.pinned_cell << "\n";
    return 0;
  }

  if (*cmd_forcing) {
    const fvlab::Mesh mesh = fvlab::load_mesh(sf_mesh);
    Eigen::VectorXd f;
    if (sf_dist == "trig") {
      f = fvlab::sample_trig_forcing(mesh, fvlab::TrigForcingConfig{}, sf_seed);
    } else if (sf_dist == "hotspot") {
      double length;
      if (!mesh.geometry_json.empty())
        length = json::parse(mesh.geometry_json).at("domain_length").get<double>();
      else
        length = mesh.cell_centroids.col(0).maxCoeff() + 0.5 * mesh.h;
      f = fvlab::sample_hotspot_forcing(mesh, fvlab::HotSpotConfig::for_length(length), sf_seed);
    } else {
      throw fvlab::InvalidArgument("unknown distribution '" + sf_dist + "'");
    }
    fvlab::write_csv_vector(f, sf_out);
    json config{{"mesh", sf_mesh}, {"dist", sf_dist}, {"seed", sf_seed}};
    fvlab::write_manifest(fvlab::make_manifest("sample-forcing", config, {sf_mesh}, ms_since(t0)),
                          sf_out);
    return 0;
  }

  if (*cmd_solve) {
    const fvlab::LinearSystem sys = fvlab::load_system(sv_system);
    Eigen::VectorXd u0 =
        sv_u0 == "zeros" ? Eigen::VectorXd::Zero(sys.size()) : fvlab::read_csv_vector(sv_u0);
    Eigen::VectorXd uref;
    fvlab::PCGConfig cfg;
    cfg.abs_tol = sv_tol;
    cfg.max_iters = sv_max_iters;
    if (!sv_uref.empty()) {
      uref = fvlab::read_csv_vector(sv_uref);
      cfg.energy_ref = &uref;
    }
    auto [u, trace] = fvlab::pcg_solve(sys, u0, cfg);
    fvlab::write_csv_vector(u, sv_out);
    if (!sv_trace.empty()) {
      std::ofstream out(sv_trace);
      out << (sv_uref.empty() ? "iter,residual_norm" : "iter,residual_norm,energy_error") << "\n";
      for (std::size_t i = 0; i < trace.residual_norms.size(); ++i) {
        out << i << "," << fvlab::format_full(trace.residual_norms[i]);
        if (!sv_uref.empty()) out << "," << fvlab::format_full(trace.energy_errors[i]);
        out << "\n";
      }
    }
    json config{
        {"system", sv_system}, {"u0", sv_u0}, {"tol", sv_tol}, {"max_iters", sv_max_iters}};
    fvlab::write_manifest(
        fvlab::make_manifest("solve", config, {sv_system + "/A.mtx", sv_system + "/b.csv"},
                             ms_since(t0)),
        sv_out);
    std::cout << "converged=" << (trace.converged ? "true" : "false")
              << " iterations=" << trace.iterations_used
              << " residual=" << fvlab::format_full(trace.residual_norms.back()) << "\n";
    if (!trace.converged) throw fvlab::NoConvergence("PCG exhausted its iteration budget");
    return 0;
  }

  if (*cmd_fk) {
    const fvlab::LinearSystem sys = fvlab::load_system(fk_system);
    const Eigen::VectorXd u = fvlab::read_csv_vector(fk_u);
    fvlab::write_csv_vector(fvlab::f_k(sys, u, fk_k), fk_out);
    json config{{"system", fk_system}, {"u", fk_u}, {"k", fk_k}};
    fvlab::write_manifest(fvlab::make_manifest("fk", config, {fk_u}, ms_since(t0)), fk_out);
    return 0;
  }

  if (*cmd_verify) {
    fvlab::BatteryConfig cfg = fvlab::BatteryConfig::preset(vf_battery);
    cfg.threads = vf_threads;
    const fvlab::BatteryResult result = fvlab::run_battery(cfg);
    write_json(fvlab::battery_to_json(result), vf_out);
    json config{{"battery", vf_battery}, {"threads", vf_threads}};
    fvlab::write_manifest(fvlab::make_manifest("verify", config, {}, ms_since(t0)), vf_out);
    for (const fvlab::TheoremReport& r : result.reports)
      std::cout << fvlab::theorem_name(r.id) << ": trials=" << r.trials
                << " max_violation=" << fvlab::format_full(r.trials ? r.max_violation : 0.0)
                << (r.passed ? " PASS" : " FAIL") << "\n";
    std::cout << "battery wall time: " << result.wall_seconds << " s\n";
    if (!result.all_passed) throw fvlab::Error("theorem battery failed");
    return 0;
  }

  if (*cmd_train) {
    std::vector<fs::path> inst_dirs;
    if (fs::exists(fs::path(tr_instances) / "mesh.json")) {
      inst_dirs.push_back(tr_instances);
    } else {
      for (const auto& e : fs::directory_iterator(tr_instances))
        if (e.is_directory() && fs::exists(e.path() / "mesh.json")) inst_dirs.push_back(e.path());
      std::sort(inst_dirs.begin(), inst_dirs.end());
    }
    if (inst_dirs.empty()) throw fvlab::InvalidArgument("no instances under '" + tr_instances + "'");

    std::vector<fvlab::TrainInstance> instances;
    int n_features = 0;
    for (const fs::path& dir : inst_dirs) {
      const fvlab::Mesh mesh = fvlab::load_mesh((dir / "mesh.json").string());
      const fvlab::BoundarySpec bc = bc_from_json(mesh, load_json((dir / "bc.json").string()));
      const Eigen::VectorXd forcing = fvlab::read_csv_vector((dir / "forcing.csv").string());
      instances.push_back(fvlab::make_train_instance(mesh, bc, forcing));
      n_features = static_cast<int>(instances.back().features.cols());
    }

    fvlab::TrainConfig cfg;
    if (tr_mode == "iter")
      cfg.mode = fvlab::TrainMode::IterativeSupervision;
    else if (tr_mode == "residual")
      cfg.mode = fvlab::TrainMode::ResidualSupervision;
    else if (tr_mode == "data")
      cfg.mode = fvlab::TrainMode::DataSupervision;
    else
      throw fvlab::InvalidArgument("unknown mode '" + tr_mode + "'");
    cfg.K = tr_k;
    cfg.stop_gradient = tr_stop_grad;
    cfg.learning_rate = tr_lr;
    cfg.steps = tr_steps;
    cfg.seed = tr_seed;

    fvlab::SurrogateModel model = fvlab::make_surrogate(n_features, tr_hidden, tr_seed);
    const fvlab::SupervisionRun run = fvlab::train(model, instances, cfg);

    json config{{"instances", tr_instances},
                {"mode", tr_mode},
                {"k", tr_k},
                {"stop_gradient", tr_stop_grad},
                {"lr", tr_lr},
                {"steps", tr_steps},
                {"hidden", tr_hidden},
                {"seed", tr_seed}};
    write_json(run_to_json(run, config), tr_out);
    fvlab::write_manifest(fvlab::make_manifest("train", config, {}, ms_since(t0)), tr_out);
    std::cout << "final_rel_l2=" << fvlab::format_full(run.final_rel_l2)
              << " loss_ratio_pct=" << 100.0 * run.loss_ratio
              << (run.diverged ? " DIVERGED" : "") << "\n";
    return 0;
  }

  if (*cmd_control) {
    const fvlab::GeometrySpec spec = fvlab::load_geometry(ct_geometry);
    const fvlab::ControlProblem problem =
        fvlab::make_control_problem(spec, ct_fseed, ct_um, ct_alpha);
    const fvlab::SensitivityBasis basis = fvlab::build_sensitivity(problem);
    fvlab::TauSchedule schedule;
    schedule.tau0 = ct_tau0 > 0.0 ? ct_tau0 : 0.0;
    const fvlab::ControlResult res =
        fvlab::optimize_control(problem, basis, ct_iters, ct_step, schedule);

    json out{{"c_opt", {res.c_opt(0), res.c_opt(1), res.c_opt(2), res.c_opt(3)}},
             {"success", res.success},
             {"bounds_violated", res.bounds_violated},
             {"u_max_initial", res.u_max_initial},
             {"u_max_final", res.u_max_final},
             {"u_m", ct_um},
             {"alpha", ct_alpha},
             {"iters", ct_iters}};
    write_json(out, ct_out);
    if (!ct_history.empty()) {
      std::ofstream hist(ct_history);
      hist << "iter,loss,u_max,effort,c1,c2,c3,c4\n";
      for (std::size_t i = 0; i < res.history.size(); ++i) {
        const auto& e = res.history[i];
        hist << i << "," << fvlab::format_full(e.loss) << "," << fvlab::format_full(e.u_max)
             << "," << fvlab::format_full(e.effort);
        for (int k = 0; k < 4; ++k) hist << "," << fvlab::format_full(e.c(k));
        hist << "\n";
      }
    }
    json config{{"geometry", ct_geometry}, {"forcing_seed", ct_fseed}, {"um", ct_um},
                {"alpha", ct_alpha},       {"iters", ct_iters},        {"step", ct_step}};
    fvlab::write_manifest(fvlab::make_manifest("control", config, {ct_geometry}, ms_since(t0)),
                          ct_out);
    std::cout << "u_max " << res.u_max_initial << " -> " << res.u_max_final
              << " success=" << (res.success ? "true" : "false") << "\n";
    return 0;
  }

  if (*cmd_report) {
    json summary = json::array();
    for (const std::string& path : rp_runs) {
      const json run = load_json(path);
      summary.push_back({{"file", path},
                         {"mode", run.at("config").value("mode", "")},
                         {"k", run.at("config").value("k", 0)},
                         {"stop_gradient", run.at("config").value("stop_gradient", true)},
                         {"lr", run.at("config").value("lr", 0.0)},
                         {"steps", run.at("config").value("steps", 0)},
                         {"final_rel_l2", run.at("final_rel_l2").get<double>()},
                         {"diverged", run.at("diverged").get<bool>()},
                         {"loss_time_s", run.at("cost").at("loss_time_s").get<double>()},
                         {"total_time_s", run.at("cost").at("total_time_s").get<double>()},
                         {"loss_ratio_pct", run.at("cost").at("loss_ratio_pct").get<double>()}});
    }
    write_json(json{{"runs", summary}}, rp_out);
    if (!rp_tables.empty()) {
      std::ofstream sup(rp_tables + "_supervision.csv");
      sup << "mode,k,stop_gradient,lr,steps,final_rel_l2,diverged\n";
      for (const json& r : summary)
        sup << r.at("mode").get<std::string>() << "," << r.at("k").get<int>() << ","
            << (r.at("stop_gradient").get<bool>() ? "true" : "false") << ","
            << fvlab::format_full(r.at("lr").get<double>()) << "," << r.at("steps").get<int>()
            << "," << fvlab::format_full(r.at("final_rel_l2").get<double>()) << ","
            << (r.at("diverged").get<bool>() ? "true" : "false") << "\n";
      std::ofstream cost(rp_tables + "_cost.csv");
      cost << "mode,k,loss_time_s,total_time_s,loss_ratio_pct\n";
      for (const json& r : summary)
        cost << r.at("mode").get<std::string>() << "," << r.at("k").get<int>() << ","
             << fvlab::format_full(r.at("loss_time_s").get<double>()) << ","
             << fvlab::format_full(r.at("total_time_s").get<double>()) << ","
             << fvlab::format_full(r.at("loss_ratio_pct").get<double>()) << "\n";
    }
    fvlab::write_manifest(
        fvlab::make_manifest("report", json{{"runs", rp_runs}}, rp_runs, ms_since(t0)), rp_out);
    return 0;
  }

  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const fvlab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
