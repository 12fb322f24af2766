#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "rs/cdr.hpp"
#include "rs/endpoints.hpp"
#include "rs/enroute.hpp"
#include "rs/extrapolate.hpp"
#include "rs/population.hpp"
#include "rs/social.hpp"

namespace {

using nlohmann::json;

rs::CityConfig config_from_json(const json& j) {
  rs::CityConfig cfg;
  cfg.n_commuters = j.at("n_commuters").get<std::size_t>();
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "uniform")
    cfg.mode = rs::CityMode::uniform;
  else if (mode == "clustered")
    cfg.mode = rs::CityMode::clustered;
  else
    throw std::runtime_error("config: mode must be uniform or clustered");
  const auto& box = j.at("bounding_box");
  cfg.box.min = {box.at(0).at(0).get<double>(), box.at(0).at(1).get<double>()};
  cfg.box.max = {box.at(1).at(0).get<double>(), box.at(1).at(1).get<double>()};
  if (j.contains("clusters")) {
    for (const auto& cj : j.at("clusters")) {
      rs::ClusterSpec spec;
      spec.center = {cj.at("center").at(0).get<double>(), cj.at("center").at(1).get<double>()};
      spec.weight = cj.at("weight").get<double>();
      spec.spread_km = cj.at("spread_km").get<double>();
      const std::string kind = cj.at("kind").get<std::string>();
      if (kind == "home")
        spec.kind = rs::ClusterKind::home;
      else if (kind == "work")
        spec.kind = rs::ClusterKind::work;
      else if (kind == "mixed")
        spec.kind = rs::ClusterKind::mixed;
      else
        throw std::runtime_error("config: cluster kind must be home, work or mixed");
      cfg.clusters.push_back(spec);
    }
  }
  cfg.sigma_minutes = j.value("sigma_minutes", 30.0);
  cfg.car_ownership = j.value("car_ownership", 1.0);
  cfg.seed = j.value("seed", std::uint64_t{0});
  return cfg;
}

struct ConstraintFlags {
  double delta_km = 1.0;
  std::optional<double> tau_min;
  int social_hops = 0;
  std::string social_graph_path;
};

void add_constraint_flags(CLI::App* cmd, ConstraintFlags& f) {
  cmd->add_option("--delta-km", f.delta_km, "max home/work proximity radius (km)");
  cmd->add_option("--tau-min", f.tau_min, "wait tolerance (min); omit for unbounded");
  cmd->add_option("--social-hops", f.social_hops, "social filter hops (1 or 2)")
      ->check(CLI::Range(0, 2));
  cmd->add_option("--social-graph", f.social_graph_path, "edge-list CSV for the social filter");
}

rs::MatchConstraints to_constraints(const ConstraintFlags& f, const rs::SocialGraph* g) {
  rs::MatchConstraints c;
  c.delta_km = f.delta_km;
  c.tau_min = f.tau_min.value_or(rs::kUnboundedTau);
  c.social_hops = f.social_hops;
  c.social_graph = g;
  if (c.social_hops > 0 && g == nullptr)
    throw std::runtime_error("--social-hops requires --social-graph");
  return c;
}

double run_solver(const std::string& mode, const std::vector<rs::Commuter>& commuters,
                  const rs::MatchConstraints& c, const rs::EndpointsParams& params,
                  bool strict_richer, double grid_cell_km, std::size_t* cars_out) {
  rs::PopulationIndex idx({commuters.data(), commuters.size()}, c.delta_km);
  if (mode == "tighter_bound") {
    if (cars_out) *cars_out = 0;
    return rs::tighter_upper_bound(idx, c);
  }
  rs::Assignment a = rs::endpoints_solve(idx, c, params);
  rs::validate_assignment(a, idx, c);
  if (mode == "enroute") {
    const rs::RouteGrid grid = rs::make_route_grid(rs::population_bbox(commuters), grid_cell_km);
    rs::EnrouteParams ep;
    ep.strict_richer = strict_richer;
    a = rs::enroute_solve(a, idx, c, grid, ep);
    rs::validate_enroute(a, idx, c, grid);
  }
  if (cars_out) *cars_out = a.car_count();
  return rs::success_ratio(commuters.size(), a.car_count());
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok == "inf" || tok == "unbounded")
      out.push_back(rs::kUnboundedTau);
    else
      out.push_back(std::stod(tok));
  }
  return out;
}

std::string fmt_tau(double tau) {
  if (!std::isfinite(tau)) return "inf";
  std::ostringstream os;
  os << tau;
  return os.str();
}

int cmd_generate(const std::string& config_path, const std::string& preset, std::size_t n,
                 std::uint64_t seed, const std::string& out_path) {
  rs::CityConfig cfg;
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open " + config_path);
    cfg = config_from_json(json::parse(in));
  } else {
    cfg = rs::city_preset(preset, n, seed);
  }
  auto commuters = rs::generate_city(cfg);
  if (cfg.car_ownership < 1.0)
    commuters = rs::subsample_owners(commuters, cfg.car_ownership, cfg.seed + 1);
  rs::save_commuters(commuters, out_path);
  json summary;
  summary["n"] = commuters.size();
  summary["mode"] = cfg.mode == rs::CityMode::uniform ? "uniform" : "clustered";
  summary["seed"] = cfg.seed;
  summary["cluster_count"] = cfg.clusters.size();
  std::cout << summary.dump(2) << "\n";
  return 0;
}

int cmd_solve(const std::string& commuters_path, const ConstraintFlags& cf,
              const std::string& mode, const rs::EndpointsParams& params, bool strict_richer,
              double grid_cell_km, const std::string& out_path) {
  const auto commuters = rs::load_commuters(commuters_path);
  rs::SocialGraph graph;
  if (!cf.social_graph_path.empty()) graph = rs::SocialGraph::load_edge_csv(cf.social_graph_path);
  const auto c = to_constraints(cf, cf.social_graph_path.empty() ? nullptr : &graph);

  const auto t0 = std::chrono::steady_clock::now();
  rs::PopulationIndex idx({commuters.data(), commuters.size()}, c.delta_km);
  rs::Assignment a = rs::endpoints_solve(idx, c, params);
  rs::validate_assignment(a, idx, c);
  std::string assignment_json;
  if (mode == "enroute") {
    const rs::RouteGrid grid = rs::make_route_grid(rs::population_bbox(commuters), grid_cell_km);
    rs::EnrouteParams ep;
    ep.strict_richer = strict_richer;
    a = rs::enroute_solve(a, idx, c, grid, ep);
    rs::validate_enroute(a, idx, c, grid);
    assignment_json = rs::enroute_assignment_to_json(a, c, idx, grid);
  } else {
    assignment_json = rs::assignment_to_json(a, c, rs::total_cost(a, idx, c));
  }
  const double runtime =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << assignment_json << "\n";
  }
  json report;
  report["cars_before"] = commuters.size();
  report["cars_after"] = a.car_count();
  report["success_percent"] = rs::success_ratio(commuters.size(), a.car_count());
  report["absolute_bound_percent"] = rs::kAbsoluteBoundPercent;
  report["tighter_bound_percent"] = rs::tighter_upper_bound(idx, c);
  report["runtime_sec"] = runtime;
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_sweep(const std::string& commuters_path, const std::string& deltas_csv,
              const std::string& taus_csv, const std::string& solver,
              const ConstraintFlags& base, const rs::EndpointsParams& params,
              bool strict_richer, double grid_cell_km, std::size_t jobs,
              const std::string& out_path) {
  const auto commuters = rs::load_commuters(commuters_path);
  rs::SocialGraph graph;
  if (!base.social_graph_path.empty())
    graph = rs::SocialGraph::load_edge_csv(base.social_graph_path);
  const rs::SocialGraph* gptr = base.social_graph_path.empty() ? nullptr : &graph;

  const auto deltas = parse_list(deltas_csv);
  const auto taus = parse_list(taus_csv);
  if (deltas.empty() || taus.empty())
    throw std::runtime_error("sweep: --deltas and --taus must be non-empty");

  struct Cell {
    double delta, tau, success, bound;
  };
  std::vector<Cell> cells(deltas.size() * taus.size());
  std::vector<std::size_t> work(cells.size());
  for (std::size_t i = 0; i < work.size(); ++i) work[i] = i;

  auto run_cell = [&](std::size_t k) {
    Cell& cell = cells[k];
    cell.delta = deltas[k / taus.size()];
    cell.tau = taus[k % taus.size()];
    rs::MatchConstraints c;
    c.delta_km = cell.delta;
    c.tau_min = cell.tau;
    c.social_hops = base.social_hops;
    c.social_graph = gptr;
    rs::PopulationIndex idx({commuters.data(), commuters.size()}, c.delta_km);
    cell.bound = rs::tighter_upper_bound(idx, c);
    if (solver == "tighter_bound") {
      cell.success = cell.bound;
      return;
    }
    rs::Assignment a = rs::endpoints_solve(idx, c, params);
    if (solver == "enroute") {
      const rs::RouteGrid grid =
          rs::make_route_grid(rs::population_bbox(commuters), grid_cell_km);
      rs::EnrouteParams ep;
      ep.strict_richer = strict_richer;
      a = rs::enroute_solve(a, idx, c, grid, ep);
    }
    cell.success = rs::success_ratio(commuters.size(), a.car_count());
  };

  const std::size_t nthreads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
  std::vector<std::thread> workers;
  std::atomic<std::size_t> next{0};
  for (std::size_t t = 0; t < nthreads; ++t)
    workers.emplace_back([&] {
      for (std::size_t k = next.fetch_add(1); k < cells.size(); k = next.fetch_add(1))
        run_cell(k);
    });
  for (auto& w : workers) w.join();

  std::ostringstream table;
  table << "solver,delta_km,tau_min,success_percent,tighter_bound_percent,absolute_bound_percent\n";
  for (const Cell& cell : cells) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%g,%s,%.4f,%.4f,%.1f\n", solver.c_str(), cell.delta,
                  fmt_tau(cell.tau).c_str(), cell.success, cell.bound,
                  rs::kAbsoluteBoundPercent);
    table << buf;
  }
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << table.str();
  }
  std::cout << table.str();
  return 0;
}

int cmd_gen_cdr(const std::string& commuters_path, const rs::SynthCdrConfig& cfg,
                const std::string& out_path, const std::string& truth_path) {
  const auto commuters = rs::load_commuters(commuters_path);
  const auto box = rs::population_bbox(commuters);
  const auto synth = rs::synthesize_cdr(commuters, box, cfg);
  rs::save_cdr(synth.events, out_path);
  if (!truth_path.empty()) {
    std::ofstream out(truth_path);
    out << "user_id,home_lat,home_lon,work_lat,work_lon,leave_home_min,leave_work_min\n";
    char buf[256];
    for (const auto& t : synth.truth) {
      std::snprintf(buf, sizeof(buf), "%llu,%.7f,%.7f,%.7f,%.7f,%.7f,%.7f",
                    static_cast<unsigned long long>(t.user_id), t.home_tower.lat,
                    t.home_tower.lon, t.work_tower.lat, t.work_tower.lon, t.leave_home,
                    t.leave_work);
      out << buf << "\n";
    }
  }
  std::cout << "{\"events\": " << synth.events.size() << ", \"users\": " << synth.truth.size()
            << "}\n";
  return 0;
}

int cmd_infer(const std::string& cdr_path, const std::string& weights_path,
              double merge_radius_km, double speed_kmh, double grid_cell_km,
              const std::string& out_homework, const std::string& out_departures,
              const std::string& sidecar_path) {
  const auto events = rs::load_cdr(cdr_path);
  rs::ScoreWeights weights = rs::default_weights();
  if (!weights_path.empty()) {
    std::ifstream in(weights_path);
    if (!in) throw std::runtime_error("cannot open " + weights_path);
    const json j = json::parse(in);
    for (int i = 0; i < 5; ++i) {
      weights.home[i] = j.at("home").at(i).get<double>();
      weights.work[i] = j.at("work").at(i).get<double>();
    }
    weights.home_bias = j.value("home_bias", 0.0);
    weights.work_bias = j.value("work_bias", 0.0);
    weights.home_threshold = j.value("home_threshold", 0.0);
    weights.work_threshold = j.value("work_threshold", 0.0);
  }

  std::ofstream hw(out_homework);
  hw << "user_id,home_lat,home_lon,work_lat,work_lon\n";
  std::ofstream dep(out_departures);
  dep << "user_id,leave_home_min,leave_work_min\n";
  std::ofstream sidecar;
  if (!sidecar_path.empty()) {
    sidecar.open(sidecar_path);
    sidecar << "user_id,reason\n";
  }

  std::optional<rs::BoundingBox> box;
  for (const auto& e : events) {
    if (!box) box = rs::BoundingBox{e.tower, e.tower};
    box->min.lat = std::min(box->min.lat, e.tower.lat);
    box->min.lon = std::min(box->min.lon, e.tower.lon);
    box->max.lat = std::max(box->max.lat, e.tower.lat);
    box->max.lon = std::max(box->max.lon, e.tower.lon);
  }
  std::optional<rs::RouteGrid> grid;
  if (box && box->min.lat < box->max.lat && box->min.lon < box->max.lon)
    grid = rs::make_route_grid(*box, grid_cell_km);

  char buf[256];
  std::size_t lo = 0;
  while (lo < events.size()) {
    std::size_t hi = lo;
    while (hi < events.size() && events[hi].user_id == events[lo].user_id) ++hi;
    const std::span<const rs::CdrEvent> user{events.data() + lo, hi - lo};
    const std::uint64_t uid = events[lo].user_id;
    lo = hi;

    const auto clusters = rs::cluster_events(user, merge_radius_km);
    if (!rs::eligible(user, clusters)) {
      if (sidecar.is_open()) sidecar << uid << ",insufficient-activity\n";
      continue;
    }
    const auto result = rs::classify_home_work(clusters, weights);
    if (!result) {
      if (sidecar.is_open()) sidecar << uid << ",ambiguous-home-work\n";
      continue;
    }
    std::snprintf(buf, sizeof(buf), "%llu,%.7f,%.7f,%.7f,%.7f",
                  static_cast<unsigned long long>(uid), result->home.lat, result->home.lon,
                  result->work.lat, result->work.lon);
    hw << buf << "\n";

    // trip time from the grid route at the configured speed
    double trip_min = 20.0;
    if (grid) {
      try {
        const rs::Route r = rs::compute_route(result->home, result->work, *grid);
        trip_min = std::max(1.0, r.length_km / speed_kmh * 60.0);
      } catch (const rs::RoutingError&) {
      }
    }
    const auto [lh, lw] = rs::estimate_departure(user, clusters[result->home_cluster],
                                                 clusters[result->work_cluster], trip_min);
    if (lh || lw) {
      std::snprintf(buf, sizeof(buf), "%llu,%s,%s", static_cast<unsigned long long>(uid),
                    lh ? std::to_string(*lh).c_str() : "",
                    lw ? std::to_string(*lw).c_str() : "");
      dep << buf << "\n";
    }
  }
  return 0;
}

int cmd_project(const std::string& commuters_path, const std::string& fractions_csv,
                double target, std::size_t repeats, const std::string& solver_mode,
                const ConstraintFlags& cf, const rs::EndpointsParams& params,
                bool strict_richer, double grid_cell_km, std::uint64_t seed,
                const std::string& out_path, const std::string& curve_csv_path) {
  const auto commuters = rs::load_commuters(commuters_path);
  rs::SocialGraph graph;
  if (!cf.social_graph_path.empty()) graph = rs::SocialGraph::load_edge_csv(cf.social_graph_path);
  const auto c = to_constraints(cf, cf.social_graph_path.empty() ? nullptr : &graph);

  const auto fractions = parse_list(fractions_csv);
  rs::SolverFn solver = [&](const std::vector<rs::Commuter>& sub) {
    std::size_t cars = 0;
    return run_solver(solver_mode, sub, c, params, strict_richer, grid_cell_km, &cars);
  };
  const auto points = rs::sample_curve(commuters, fractions, solver, repeats, seed);
  if (!curve_csv_path.empty()) {
    std::ofstream out(curve_csv_path);
    out << "fraction,savings_percent\n";
    for (const auto& [f, s] : points) out << f << "," << s << "\n";
  }

  const rs::SavingsCurve curve = rs::fit_savings_curve(points);
  double max_obs = points.front().second;
  for (const auto& [f, s] : points) max_obs = std::max(max_obs, s);
  const double projection = rs::project_savings(curve, target, max_obs);

  json report;
  report["parameters"] = {{"a", curve.a}, {"b", curve.b}, {"c", curve.c}};
  report["rms_residual"] = curve.rms_residual;
  report["target_multiple"] = target;
  report["projected_savings_percent"] = projection;
  json pts = json::array();
  for (const auto& [f, s] : points) pts.push_back({f, s});
  report["points"] = std::move(pts);
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << report.dump(2) << "\n";
  }
  std::cout << report.dump(2) << "\n";
  return 0;
}

int cmd_validate(const std::string& commuters_path, const std::string& assignment_path,
                 const ConstraintFlags& cf, const std::string& mode, double grid_cell_km) {
  const auto commuters = rs::load_commuters(commuters_path);
  rs::SocialGraph graph;
  if (!cf.social_graph_path.empty()) graph = rs::SocialGraph::load_edge_csv(cf.social_graph_path);
  const auto c = to_constraints(cf, cf.social_graph_path.empty() ? nullptr : &graph);
  std::ifstream in(assignment_path);
  if (!in) throw std::runtime_error("cannot open " + assignment_path);
  std::stringstream ss;
  ss << in.rdbuf();
  const rs::Assignment a = rs::assignment_from_json(ss.str());
  rs::PopulationIndex idx({commuters.data(), commuters.size()}, c.delta_km);
  if (mode == "enroute") {
    const rs::RouteGrid grid = rs::make_route_grid(rs::population_bbox(commuters), grid_cell_km);
    rs::validate_enroute(a, idx, c, grid);
  } else {
    rs::validate_assignment(a, idx, c);
  }
  std::cout << "{\"valid\": true, \"cars\": " << a.car_count() << "}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ride-sharing potential toolkit"};
  app.require_subcommand(1);

  // generate
  std::string config_path, preset = "clustered-metro", out_path = "commuters.csv";
  std::size_t gen_n = 10000;
  std::uint64_t seed = 0;
  auto* gen = app.add_subcommand("generate", "generate a synthetic commuter population");
  gen->add_option("--config", config_path, "CityConfig JSON");
  gen->add_option("--preset", preset, "uniform-metro or clustered-metro");
  gen->add_option("--n", gen_n, "population size (ignored with --config)");
  gen->add_option("--seed", seed, "RNG seed");
  gen->add_option("--out", out_path, "output commuter CSV")->required();

  // gen-cdr
  std::string cdr_commuters, cdr_out = "cdr.csv", cdr_truth;
  rs::SynthCdrConfig synth_cfg;
  auto* gcdr = app.add_subcommand("gen-cdr", "synthesize call records for a population");
  gcdr->add_option("--commuters", cdr_commuters)->required();
  gcdr->add_option("--out", cdr_out)->required();
  gcdr->add_option("--truth-out", cdr_truth, "ground-truth sidecar CSV");
  gcdr->add_option("--calls-per-user", synth_cfg.calls_per_user);
  gcdr->add_option("--truth-fraction", synth_cfg.truth_fraction);
  gcdr->add_option("--days", synth_cfg.days);
  gcdr->add_option("--tower-spacing-km", synth_cfg.tower_spacing_km);
  gcdr->add_option("--seed", synth_cfg.seed);

  // infer
  std::string infer_cdr, weights_path, out_homework = "homework.csv",
                         out_departures = "departures.csv", sidecar_path;
  double merge_radius = 1.0, speed_kmh = 30.0, infer_grid_cell = 0.5;
  auto* inf = app.add_subcommand("infer", "infer home/work and departures from CDR");
  inf->add_option("--cdr", infer_cdr)->required();
  inf->add_option("--weights", weights_path, "ScoreWeights JSON (default weights if omitted)");
  inf->add_option("--merge-radius-km", merge_radius);
  inf->add_option("--speed-kmh", speed_kmh, "travel speed for trip-time estimates");
  inf->add_option("--grid-cell-km", infer_grid_cell);
  inf->add_option("--out-homework", out_homework);
  inf->add_option("--out-departures", out_departures);
  inf->add_option("--sidecar", sidecar_path, "ineligible users with reasons");

  // shared solver flags
  ConstraintFlags solve_cf, sweep_cf, project_cf, validate_cf;
  rs::EndpointsParams params;
  bool strict_richer = false;
  double grid_cell_km = 0.5;

  std::string solve_commuters, solve_mode = "endpoints", solve_out;
  auto* solve = app.add_subcommand("solve", "match commuters and report savings");
  solve->add_option("--commuters", solve_commuters)->required();
  solve->add_option("--mode", solve_mode, "endpoints or enroute");
  add_constraint_flags(solve, solve_cf);
  solve->add_option("--seed", params.seed);
  solve->add_option("--neighborhood", params.neighborhood_size);
  solve->add_option("--max-iters", params.max_iters);
  solve->add_flag("--strict-richer", strict_richer);
  solve->add_option("--grid-cell-km", grid_cell_km);
  solve->add_option("--out", solve_out, "assignment JSON");

  std::string sweep_commuters, sweep_deltas = "1.0", sweep_taus = "inf",
              sweep_solver = "endpoints", sweep_out;
  std::size_t jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "success table over (delta, tau)");
  sweep->add_option("--commuters", sweep_commuters)->required();
  sweep->add_option("--deltas", sweep_deltas, "comma list of delta values (km)");
  sweep->add_option("--taus", sweep_taus, "comma list of tau values (min), inf allowed");
  sweep->add_option("--solver", sweep_solver, "endpoints, enroute or tighter_bound");
  add_constraint_flags(sweep, sweep_cf);
  sweep->add_option("--seed", params.seed);
  sweep->add_option("--neighborhood", params.neighborhood_size);
  sweep->add_option("--max-iters", params.max_iters);
  sweep->add_flag("--strict-richer", strict_richer);
  sweep->add_option("--grid-cell-km", grid_cell_km);
  sweep->add_option("--jobs", jobs);
  sweep->add_option("--out", sweep_out, "output CSV");

  std::string project_commuters, fractions = "0.3,0.6,1.0", project_solver = "endpoints",
              project_out, curve_csv;
  double target = 3.6;
  std::size_t repeats = 3;
  auto* project = app.add_subcommand("project", "extrapolate savings to a larger population");
  project->add_option("--commuters", project_commuters)->required();
  project->add_option("--fractions", fractions);
  project->add_option("--target", target, "population multiple to project to");
  project->add_option("--repeats", repeats);
  project->add_option("--solver", project_solver);
  add_constraint_flags(project, project_cf);
  project->add_option("--seed", params.seed);
  project->add_option("--neighborhood", params.neighborhood_size);
  project->add_option("--max-iters", params.max_iters);
  project->add_flag("--strict-richer", strict_richer);
  project->add_option("--grid-cell-km", grid_cell_km);
  project->add_option("--out", project_out, "projection JSON");
  project->add_option("--curve-out", curve_csv, "sampled curve CSV");

  std::string validate_commuters, validate_assignment, validate_mode = "endpoints";
  auto* validate = app.add_subcommand("validate", "check an assignment JSON");
  validate->add_option("--commuters", validate_commuters)->required();
  validate->add_option("--assignment", validate_assignment)->required();
  validate->add_option("--mode", validate_mode, "endpoints or enroute");
  add_constraint_flags(validate, validate_cf);
  validate->add_option("--grid-cell-km", grid_cell_km);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, preset, gen_n, seed, out_path);
    if (gcdr->parsed()) return cmd_gen_cdr(cdr_commuters, synth_cfg, cdr_out, cdr_truth);
    if (inf->parsed())
      return cmd_infer(infer_cdr, weights_path, merge_radius, speed_kmh, infer_grid_cell,
                       out_homework, out_departures, sidecar_path);
    if (solve->parsed())
      return cmd_solve(solve_commuters, solve_cf, solve_mode, params, strict_richer,
                       grid_cell_km, solve_out);
    if (sweep->parsed())
      return cmd_sweep(sweep_commuters, sweep_deltas, sweep_taus, sweep_solver, sweep_cf,
                       params, strict_richer, grid_cell_km, jobs, sweep_out);
    if (project->parsed())
      return cmd_project(project_commuters, fractions, target, repeats, project_solver,
                         project_cf, params, strict_richer, grid_cell_km, params.seed,
                         project_out, curve_csv);
    if (validate->parsed())
      return cmd_validate(validate_commuters, validate_assignment, validate_cf, validate_mode,
                          grid_cell_km);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
