// peh: command-line front end for the harvester toolkit.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "peh/peh.hpp"

namespace fs = std::filesystem;
using namespace peh;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitPartial = 4;

struct Globals {
  std::string config;
  unsigned threads = 0;
  std::string out;
};

struct DesignOverrides {
  std::optional<double> L, R, l, H, h;

  void add(CLI::App* app) {
    // "-h" stays free for the thickness option; help is "--help" only here.
    app->set_help_flag("--help", "Print this help message and exit");
    app->add_option("--L", L, "total length [m]");
    app->add_option("--R", R, "aspect ratio W/L");
    app->add_option("--l", l, "piezo length ratio L_pzt/L");
    app->add_option("--H", H, "piezo thickness ratio h_p/h");
    app->add_option("--h", h, "total thickness [m]");
  }

  DesignVector apply(DesignVector x) const {
    if (L) x.L = *L;
    if (R) x.R = *R;
    if (l) x.l = *l;
    if (H) x.H = *H;
    if (h) x.h = *h;
    return x;
  }
};

RunConfig load_run_config(const Globals& g) {
  RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
  if (g.threads > 0) c.threads = g.threads;
  if (c.threads == 0) c.threads = default_thread_count();
  return c;
}

fs::path output_dir(const Globals& g, const RunConfig& c, const std::string& fallback) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("PEH_OUT_DIR"); env && *env) return env;
  if (!c.output_dir.empty()) return c.output_dir;
  return fallback;
}

Provenance provenance(const RunConfig& c) { return Provenance{c.hash, c.seed, {}}; }

std::string fmt(double v) { return format_double(v); }

void log(const std::string& msg) { std::cerr << "peh: " << msg << "\n"; }

// ---------------------------------------------------------------- frf

int cmd_frf(const Globals& g, const DesignOverrides& ov, const std::string& rl, double fmin, double fmax, int points,
            const std::string& dump) {
  RunConfig c = load_run_config(g);
  const DesignVector x = ov.apply(c.design);
  validate(x);
  if (!rl.empty()) {
    if (rl == "optimal") {
      c.model.fixed_resistance.reset();
    } else {
      const double v = ConfigReader("--rl").quantity(Json(rl), "--rl", Dim::Resistance);
      if (!(v > 0.0)) fail(ErrorKind::InvalidArgument, "--rl must be positive or 'optimal'");
      c.model.fixed_resistance = v;
    }
  }
  if (points < 2 || !(fmax > fmin) || fmin < 0.0) fail(ErrorKind::InvalidArgument, "need 0 <= fmin < fmax and points >= 2");

  const DeviceGeometry geom = design_to_geometry(x);
  const AssembledModel full = assemble(geom, c.materials, c.model.refinement);
  if (!dump.empty()) {
    const fs::path d = dump;
    write_matrix_csv(d / "M.csv", full.M, provenance(c));
    write_matrix_csv(d / "K.csv", full.K, provenance(c));
    write_matrix_csv(d / "C.csv", full.C, provenance(c));
    write_matrix_csv(d / "Theta.csv", full.Theta, provenance(c));
    write_matrix_csv(d / "F.csv", full.F, provenance(c));
  }
  const HarvesterModel hm = build_harvester(x, c.materials, c.model);
  const ReducedModel& r = hm.reduced;

  Provenance prov = provenance(c);
  prov.add("L", fmt(x.L)).add("R", fmt(x.R)).add("l", fmt(x.l)).add("H", fmt(x.H)).add("h", fmt(x.h));
  prov.add("modes", std::to_string(r.modes()));
  prov.add(c.model.fixed_resistance ? "R_l_ohm" : "R_l_star_ohm", fmt(r.R_l));
  prov.add("omega_1_rad_s", fmt(r.omega[0])).add("omega_o_rad_s", fmt(hm.omega_o)).add("H_o", fmt(hm.H_o));
  prov.add("C_p_F", fmt(r.C_p));
  CsvTable t({"freq_hz", "Re_Hv", "Im_Hv", "Hp"}, prov);
  for (int k = 0; k < points; ++k) {
    const double f = fmin + (fmax - fmin) * k / (points - 1);
    const auto hv = voltage_frf(r, 2.0 * std::numbers::pi * f);
    t.row(std::vector<double>{f, hv.real(), hv.imag(), std::norm(hv) / r.R_l});
  }
  const fs::path out = output_dir(g, c, ".") / "frf.csv";
  t.write(out);
  log("wrote " + out.string() + " (R_l = " + fmt(r.R_l) + " ohm, f_o = " + fmt(hm.omega_o / (2 * std::numbers::pi)) +
      " Hz)");
  if (!hm.resistance_converged) {
    log("warning: resistance search hit its iteration limit");
    return kExitPartial;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Globals& g, const DesignOverrides& ov, const std::string& input, double rate) {
  const RunConfig c = load_run_config(g);
  const DesignVector x = ov.apply(c.design);
  validate(x);
  const AccelerationRecord rec = read_record(input, rate);
  const auto t0 = std::chrono::steady_clock::now();
  const HarvesterModel hm = build_harvester(x, c.materials, c.model);
  const auto t1 = std::chrono::steady_clock::now();
  const SimulationResult res = integrate(hm.reduced, ExcitationSignal{rec.sample_rate, rec.samples}, c.simulation);
  const auto t2 = std::chrono::steady_clock::now();

  const fs::path dir = output_dir(g, c, ".");
  Provenance prov = provenance(c);
  prov.add("input", input).add("R_l_ohm", fmt(hm.reduced.R_l)).add("energy_J", fmt(res.energy_J));
  CsvTable t({"t", "a_b", "v", "p"}, prov);
  for (std::size_t i = 0; i < res.t.size(); ++i) t.row(std::vector<double>{res.t[i], res.a_b[i], res.v[i], res.p[i]});
  t.write(dir / "simulation.csv");
  Json summary = {{"energy_J", res.energy_J},
                  {"steps", res.stats.steps},
                  {"rejected_steps", res.stats.rejected},
                  {"R_l_ohm", hm.reduced.R_l},
                  {"omega_o_rad_s", hm.omega_o},
                  {"modes", hm.reduced.modes()},
                  {"model_seconds", std::chrono::duration<double>(t1 - t0).count()},
                  {"integration_seconds", std::chrono::duration<double>(t2 - t1).count()},
                  {"provenance", prov.json()}};
  write_json(dir / "summary.json", summary);
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const Globals& g, int which, const std::string& grid) {
  const RunConfig c = load_run_config(g);
  int n1 = 0, n2 = 0;
  if (std::sscanf(grid.c_str(), "%dx%d", &n1, &n2) != 2 || n1 < 1 || n2 < 1)
    fail(ErrorKind::InvalidArgument, "--grid must look like 20x20");
  const double h = c.design.h;
  const SweepScenario sc = which == 1 ? design1(h) : which == 2 ? design2(h) : design3(h);
  const auto rows = sweep_design(sc, n1, n2, c.materials, c.model, c.threads);

  Provenance prov = provenance(c);
  prov.add("scenario", sc.name).add("grid", std::to_string(n1) + "x" + std::to_string(n2));
  CsvTable t({"L", "R", "l", "H", "omega_o_rad_s", "H_o", "R_l_star_ohm", "zeta1", "error"}, prov);
  Json rows_json = Json::array();
  int failures = 0;
  for (const auto& r : rows) {
    t.row(std::vector<std::string>{fmt(r.x.L), fmt(r.x.R), fmt(r.x.l), fmt(r.x.H), fmt(r.omega_o), fmt(r.H_o),
                                   fmt(r.R_l), fmt(r.zeta1), r.ok() ? "" : "\"" + r.error + "\""});
    rows_json.push_back({{"L", r.x.L}, {"R", r.x.R}, {"l", r.x.l}, {"H", r.x.H},
                         {"omega_o_rad_s", r.ok() ? Json(r.omega_o) : Json(nullptr)},
                         {"H_o", r.ok() ? Json(r.H_o) : Json(nullptr)},
                         {"R_l_star_ohm", r.ok() ? Json(r.R_l) : Json(nullptr)},
                         {"zeta1", r.ok() ? Json(r.zeta1) : Json(nullptr)},
                         {"error", r.error}});
    if (!r.ok()) ++failures;
  }
  const fs::path dir = output_dir(g, c, ".");
  t.write(dir / (sc.name + ".csv"));
  write_json(dir / (sc.name + ".json"), {{"provenance", prov.json()}, {"rows", rows_json}});

  CsvTable front({"omega_lo_rad_s", "omega_hi_rad_s", "L", "R", "l", "H", "omega_o_rad_s", "H_o"}, prov);
  for (const auto& f : optimal_front(rows)) {
    const auto& r = rows[static_cast<std::size_t>(f.row)];
    front.row(std::vector<double>{f.omega_lo, f.omega_hi, r.x.L, r.x.R, r.x.l, r.x.H, r.omega_o, r.H_o});
  }
  front.write(dir / (sc.name + "_front.csv"));
  log("wrote " + std::to_string(rows.size()) + " rows to " + (dir / (sc.name + ".csv")).string());
  if (failures > 0) {
    log(std::to_string(failures) + " grid points failed");
    return kExitPartial;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- extract-events

int cmd_extract(const Globals& g, const std::string& input, double rate, std::optional<double> threshold,
                std::optional<double> window, std::optional<double> peak_at, std::optional<double> separation,
                int quiet) {
  const RunConfig c = load_run_config(g);
  EventOptions opt = c.events;
  if (threshold) opt.threshold = *threshold;
  if (window) opt.window = *window;
  if (peak_at) opt.peak_at = *peak_at;
  if (separation) opt.min_separation = *separation;
  const AccelerationRecord rec = read_record(input, rate);
  const auto events = extract_events(rec, opt);
  const fs::path dir = output_dir(g, c, "events");
  write_events(dir, events);
  log("extracted " + std::to_string(events.size()) + " events into " + dir.string());
  int code = kExitOk;
  if (quiet > 0) {
    const QuietWindows q = extract_quiet_windows(rec, opt.threshold, opt.window, static_cast<std::size_t>(quiet));
    std::vector<Event> as_events;
    for (std::size_t i = 0; i < q.windows.size(); ++i) {
      Event e;
      e.id = static_cast<int>(i) + 1;
      e.source = rec.channel;
      e.sample_rate = rec.sample_rate;
      e.samples = q.windows[i].samples;
      e.offset = q.offsets[i];
      as_events.push_back(std::move(e));
    }
    write_events(dir / "quiet", as_events);
    log("extracted " + std::to_string(q.windows.size()) + " quiet windows");
    if (q.insufficient) {
      log("warning: InsufficientQuiet: requested " + std::to_string(quiet) + ", found " +
          std::to_string(q.windows.size()));
      code = kExitPartial;
    }
  }
  return code;
}

// ---------------------------------------------------------------- optimize

Json design_json(const OptimalDesign& d, const std::string& key) {
  return {{"key", key},         {"event_id", d.event_id}, {"L", d.x.L},       {"R", d.x.R},
          {"l", d.x.l},         {"H", d.x.H},             {"h", d.x.h},       {"energy_J", d.energy},
          {"R_l_ohm", d.R_l},   {"omega_o_rad_s", d.omega_o}, {"H_o", d.H_o}, {"trace", d.trace},
          {"failures", d.failures}, {"last_failure", d.last_failure}};
}

OptimalDesign design_from_json(const Json& j) {
  OptimalDesign d;
  d.event_id = j.at("event_id").get<int>();
  d.x = {j.at("L").get<double>(), j.at("R").get<double>(), j.at("l").get<double>(), j.at("H").get<double>(),
         j.at("h").get<double>()};
  d.energy = j.at("energy_J").get<double>();
  d.R_l = j.at("R_l_ohm").get<double>();
  d.omega_o = j.at("omega_o_rad_s").get<double>();
  d.H_o = j.at("H_o").get<double>();
  d.trace = j.at("trace").get<std::vector<double>>();
  d.failures = j.at("failures").get<int>();
  d.last_failure = j.at("last_failure").get<std::string>();
  return d;
}

std::string signal_key(const RunConfig& c, const Event& e) {
  std::string bytes = c.hash + "|" + std::to_string(c.seed) + "|" + std::to_string(e.id) + "|" + fmt(e.sample_rate);
  bytes.append(reinterpret_cast<const char*>(e.samples.data()), e.samples.size() * sizeof(double));
  return fnv1a_hex(bytes);
}

Json load_json_file(const fs::path& p) { return parse_json_text(read_text_file(p), p.string()); }

int cmd_optimize(const Globals& g, const std::string& events_dir, const std::string& quiet_dir, bool resume) {
  RunConfig c = load_run_config(g);
  OptimizationScenario s = c.scenario();
  validate(s);
  const auto events = read_events(events_dir);
  if (events.empty()) fail(ErrorKind::InvalidArgument, "no events found in '" + events_dir + "'");
  const fs::path dir = output_dir(g, c, "run");
  ensure_directory(dir / "designs");

  // Snapshot of the resolved configuration so later steps see the same settings.
  const Json cfg = g.config.empty() ? Json::object() : load_config_json(g.config);
  write_json(dir / "config.json", cfg);

  std::vector<OptimalDesign> designs(events.size());
  std::vector<std::string> errors(events.size());
  std::vector<int> todo;
  int reused = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto file = dir / "designs" / (event_stem(events[i].id) + ".json");
    const std::string key = signal_key(c, events[i]);
    if (resume && fs::exists(file)) {
      try {
        const Json j = load_json_file(file);
        if (j.at("key").get<std::string>() == key) {
          designs[i] = design_from_json(j);
          ++reused;
          continue;
        }
      } catch (const std::exception&) {
      }
    }
    todo.push_back(static_cast<int>(i));
  }
  if (resume) log("resume: reusing " + std::to_string(reused) + " completed events");

  parallel_for(todo.size(), c.threads, [&](std::size_t k) {
    const auto i = static_cast<std::size_t>(todo[k]);
    try {
      designs[i] = optimize_event(s, events[i]);
      write_json(dir / "designs" / (event_stem(events[i].id) + ".json"), design_json(designs[i], signal_key(c, events[i])));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::size_t> ok;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (errors[i].empty())
      ok.push_back(i);
    else
      log("event " + std::to_string(events[i].id) + " failed: " + errors[i]);
  }

  std::optional<OptimalDesign> quiet_design;
  if (!quiet_dir.empty()) {
    const auto quiet = read_events(quiet_dir);
    std::vector<ExcitationSignal> windows;
    for (const auto& q : quiet) windows.push_back(q.signal());
    if (!windows.empty()) {
      quiet_design = optimize_quiet(s, windows);
      write_json(dir / "quiet_design.json", design_json(*quiet_design, "quiet"));
    } else {
      log("warning: no quiet windows in '" + quiet_dir + "'");
    }
  }

  Provenance prov = provenance(c);
  CsvTable opt({"event_id", "L", "R", "l", "H", "h", "energy_J", "R_l_ohm", "omega_o_rad_s", "H_o", "iterations",
                "failures"},
               prov);
  for (std::size_t i : ok) {
    const auto& d = designs[i];
    opt.row(std::vector<std::string>{std::to_string(d.event_id), fmt(d.x.L), fmt(d.x.R), fmt(d.x.l), fmt(d.x.H),
                                     fmt(d.x.h), fmt(d.energy), fmt(d.R_l), fmt(d.omega_o), fmt(d.H_o),
                                     std::to_string(d.trace.size() - 1), std::to_string(d.failures)});
  }
  opt.write(dir / "optimal_designs.csv");

  std::vector<DesignVector> xs;
  std::vector<ExcitationSignal> sigs;
  for (std::size_t i : ok) {
    xs.push_back(designs[i].x);
    sigs.push_back(events[i].signal());
  }
  const CrossEnergy ce = cross_energy(xs, sigs, c.materials, c.model, c.simulation, c.threads);
  std::vector<std::string> cols = {"event_id"};
  for (std::size_t i : ok) cols.push_back("e_" + std::to_string(events[i].id));
  cols.push_back("total_J");
  CsvTable cross(cols, prov);
  for (std::size_t r = 0; r < ok.size(); ++r) {
    std::vector<std::string> cells = {std::to_string(events[ok[r]].id)};
    for (Eigen::Index j = 0; j < ce.E.cols(); ++j) cells.push_back(fmt(ce.E(static_cast<Eigen::Index>(r), j)));
    cells.push_back(fmt(ce.totals[static_cast<Eigen::Index>(r)]));
    cross.row(cells);
  }
  cross.write(dir / "cross_energy.csv");
  for (const auto& w : ce.warnings) log("warning: " + w);

  Json report = {{"provenance", prov.json()},
                 {"events_dir", fs::absolute(events_dir).string()},
                 {"quiet_dir", quiet_dir.empty() ? std::string() : fs::absolute(quiet_dir).string()},
                 {"completed", ok.size()},
                 {"failed", events.size() - ok.size()},
                 {"missing_cross_entries", ce.missing}};
  write_json(dir / "run.json", report);
  log("optimized " + std::to_string(ok.size()) + "/" + std::to_string(events.size()) + " events into " + dir.string());
  if (ok.empty()) return kExitNumeric;
  return ok.size() < events.size() || ce.missing > 0 ? kExitPartial : kExitOk;
}

// ---------------------------------------------------------------- cluster

struct RunData {
  RunConfig config;
  std::vector<OptimalDesign> designs;  // ordered by event id
  std::vector<double> totals;
  std::optional<OptimalDesign> quiet;
  Json run;
};

RunData load_run(const fs::path& dir, const Globals& g) {
  RunData rd;
  const fs::path cfg = dir / "config.json";
  rd.config = fs::exists(cfg) ? load_config(cfg) : RunConfig{};
  if (g.threads > 0) rd.config.threads = g.threads;
  if (rd.config.threads == 0) rd.config.threads = default_thread_count();
  rd.run = load_json_file(dir / "run.json");

  std::ifstream in(dir / "cross_energy.csv");
  if (!in) fail(ErrorKind::IoError, "missing " + (dir / "cross_energy.csv").string() + " (run optimize first)");
  std::string line;
  bool header = false;
  std::map<int, double> totals;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto cells = detail::split_csv(line);
    totals[std::stoi(cells.front())] = detail::parse_number(cells.back(), "cross_energy.csv");
  }
  for (const auto& [id, total] : totals) {
    const auto file = dir / "designs" / (event_stem(id) + ".json");
    rd.designs.push_back(design_from_json(load_json_file(file)));
    rd.totals.push_back(total);
  }
  if (fs::exists(dir / "quiet_design.json")) rd.quiet = design_from_json(load_json_file(dir / "quiet_design.json"));
  return rd;
}

int cmd_cluster(const Globals& g, const std::string& run, std::optional<int> k_min, std::optional<int> k_max) {
  const fs::path dir = run;
  const RunData rd = load_run(dir, g);
  const RunConfig& c = rd.config;
  const OptimizationScenario s = c.scenario();
  std::vector<DesignVector> xs;
  for (const auto& d : rd.designs) xs.push_back(d.x);
  const CandidateReport rep = cluster_designs(s, xs, rd.totals, k_min.value_or(c.cluster.k_min),
                                              k_max.value_or(c.cluster.k_max), c.cluster.restarts, c.seed);
  for (const auto& w : rep.warnings) log("warning: " + w);

  const Provenance prov = provenance(c);
  CsvTable sil({"k", "silhouette"}, prov);
  for (std::size_t i = 0; i < rep.ks.size(); ++i)
    sil.row(std::vector<std::string>{std::to_string(rep.ks[i]), fmt(rep.silhouette[i])});
  sil.write(dir / "silhouette.csv");

  std::vector<int> members(static_cast<std::size_t>(rep.k), 0);
  for (int l : rep.labels) ++members[static_cast<std::size_t>(l)];
  CsvTable cand({"candidate", "class", "L", "R", "l", "H", "h", "members", "nearest_event_id"}, prov);
  Json cands = Json::array();
  for (int k = 0; k < rep.k; ++k) {
    const auto& x = rep.candidates[static_cast<std::size_t>(k)];
    const int nearest = rd.designs[static_cast<std::size_t>(rep.nearest_design[static_cast<std::size_t>(k)])].event_id;
    cand.row(std::vector<std::string>{std::to_string(k + 1), "cluster_" + std::to_string(k), fmt(x.L), fmt(x.R),
                                      fmt(x.l), fmt(x.H), fmt(x.h), std::to_string(members[static_cast<std::size_t>(k)]),
                                      std::to_string(nearest)});
    cands.push_back({{"candidate", k + 1}, {"class", "cluster"}, {"cluster", k}, {"L", x.L}, {"R", x.R}, {"l", x.l},
                     {"H", x.H}, {"h", x.h}, {"members", members[static_cast<std::size_t>(k)]},
                     {"nearest_event_id", nearest}});
  }
  if (rd.quiet) {
    const auto& x = rd.quiet->x;
    cand.row(std::vector<std::string>{std::to_string(rep.k + 1), "quiet", fmt(x.L), fmt(x.R), fmt(x.l), fmt(x.H),
                                      fmt(x.h), "0", "0"});
    cands.push_back({{"candidate", rep.k + 1}, {"class", "quiet"}, {"L", x.L}, {"R", x.R}, {"l", x.l}, {"H", x.H},
                     {"h", x.h}});
  }
  cand.write(dir / "candidates.csv");

  Json labels = Json::object();
  for (std::size_t i = 0; i < rd.designs.size(); ++i) labels[std::to_string(rd.designs[i].event_id)] = rep.labels[i];
  write_json(dir / "clusters.json", {{"provenance", prov.json()},
                                     {"k", rep.k},
                                     {"features", rep.features},
                                     {"silhouette", {{"k", rep.ks}, {"score", rep.silhouette}}},
                                     {"labels", labels},
                                     {"candidates", cands},
                                     {"warnings", rep.warnings}});
  log("selected k = " + std::to_string(rep.k) + " clusters");
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

int cmd_evaluate(const Globals& g, const std::string& run, const std::string& record_path, double rate) {
  const fs::path dir = run;
  const RunData rd = load_run(dir, g);
  const RunConfig& c = rd.config;
  const Json clusters = load_json_file(dir / "clusters.json");
  const int k = clusters.at("k").get<int>();

  EvaluationInput in;
  for (const auto& cj : clusters.at("candidates"))
    in.candidates.push_back({cj.at("L").get<double>(), cj.at("R").get<double>(), cj.at("l").get<double>(),
                             cj.at("H").get<double>(), cj.at("h").get<double>()});

  // Representative events per class: the run's own events with their cluster labels.
  const auto events = read_events(rd.run.at("events_dir").get<std::string>());
  std::vector<double> class_freq(static_cast<std::size_t>(k), 0.0);
  std::vector<int> class_n(static_cast<std::size_t>(k), 0);
  for (const auto& e : events) {
    const auto key = std::to_string(e.id);
    if (!clusters.at("labels").contains(key)) continue;
    const int label = clusters.at("labels").at(key).get<int>();
    in.events.push_back(e.signal());
    in.event_class.push_back(label);
    class_freq[static_cast<std::size_t>(label)] += dominant_frequency(e.signal());
    ++class_n[static_cast<std::size_t>(label)];
  }
  for (int q = 0; q < k; ++q)
    if (class_n[static_cast<std::size_t>(q)] > 0) class_freq[static_cast<std::size_t>(q)] /= class_n[static_cast<std::size_t>(q)];
  in.classes = k;

  // Occurrence: events of the evaluation record, each assigned to the class with
  // the nearest mean dominant frequency.
  const AccelerationRecord rec = read_record(record_path, rate);
  const auto rec_events = extract_events(rec, c.events);
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (const auto& e : rec_events) {
    const double f = dominant_frequency(e.signal());
    int best = 0;
    for (int q = 1; q < k; ++q)
      if (std::abs(std::log(f / class_freq[static_cast<std::size_t>(q)])) <
          std::abs(std::log(f / class_freq[static_cast<std::size_t>(best)])))
        best = q;
    ++counts[static_cast<std::size_t>(best)];
  }
  const QuietWindows quiet =
      extract_quiet_windows(rec, c.quiet.threshold, c.quiet.window, static_cast<std::size_t>(c.quiet.count));
  in.quiet = quiet.windows;
  in.record_duration = rec.duration();
  in.window = c.events.window;
  in.record = &rec;

  in.occurrences = counts;
  const CandidateEvaluation ev = evaluate_candidates(in, c.materials, c.model, c.simulation, c.threads);
  for (const auto& w : ev.warnings) log("warning: " + w);
  const int ncol = static_cast<int>(ev.M.cols());

  const Provenance prov = provenance(c);
  std::vector<std::string> cols = {"candidate"};
  for (int q = 0; q < k; ++q) cols.push_back("cluster_" + std::to_string(q));
  if (ev.has_quiet) cols.push_back("quiet");
  cols.push_back("expected_30s_J");
  CsvTable cross(cols, prov);
  for (std::size_t cnd = 0; cnd < in.candidates.size(); ++cnd) {
    std::vector<std::string> cells = {std::to_string(cnd + 1)};
    for (int q = 0; q < ncol; ++q) cells.push_back(fmt(ev.M(static_cast<Eigen::Index>(cnd), q)));
    cells.push_back(fmt(ev.expected[cnd]));
    cross.row(cells);
  }
  std::vector<std::string> rate_row = {"rate"};
  for (double r : ev.rates) rate_row.push_back(fmt(r));
  rate_row.push_back("");
  cross.row(rate_row);
  cross.write(dir / "candidate_cross.csv");

  CsvTable rank({"rank", "candidate", "long_window_J", "expected_scaled_J", "expected_30s_J"}, prov);
  for (std::size_t i = 0; i < ev.ranking.size(); ++i) {
    const auto cnd = static_cast<std::size_t>(ev.ranking[i]);
    rank.row(std::vector<std::string>{std::to_string(i + 1), std::to_string(cnd + 1), fmt(ev.long_energy[cnd]),
                                      fmt(ev.scaled[cnd]), fmt(ev.expected[cnd])});
  }
  rank.write(dir / "ranking.csv");
  write_json(dir / "evaluation.json", {{"provenance", prov.json()},
                                       {"record", record_path},
                                       {"record_seconds", in.record_duration},
                                       {"record_events", rec_events.size()},
                                       {"quiet_windows", quiet.windows.size()},
                                       {"rates", ev.rates},
                                       {"expected_30s_J", ev.expected},
                                       {"expected_scaled_J", ev.scaled},
                                       {"long_window_J", ev.long_energy},
                                       {"ranking", ev.ranking}});
  log("ranked " + std::to_string(in.candidates.size()) + " candidates");
  if (quiet.insufficient) log("warning: InsufficientQuiet: " + std::to_string(quiet.windows.size()) + " quiet windows");
  return kExitOk;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const Globals& g, const std::string& kind, double duration, double fs, double freq, double amplitude,
              std::uint64_t seed, const std::string& out, bool binary) {
  AccelerationRecord rec;
  rec.sample_rate = fs;
  rec.channel = kind;
  if (kind == "event") {
    rec.samples = synthetic::narrowband_event(freq, amplitude, 4.0, 0.005, seed, fs, duration).samples;
  } else if (kind == "vehicle") {
    rec.samples = synthetic::vehicle_event(seed, fs).samples;
  } else if (kind == "harmonic") {
    rec.samples = synthetic::harmonic(amplitude, 2.0 * std::numbers::pi * freq, duration, fs).samples;
  } else if (kind == "noise") {
    rec.samples.assign(static_cast<std::size_t>(duration * fs), 0.0);
    synthetic::add_noise(rec.samples, amplitude, seed);
  } else if (kind == "traffic") {
    rec = synthetic::traffic(duration, {{2.0, 0.3, 3.0, 20.0}, {6.0, 0.4, 2.0, 10.0}}, 0.01, seed, fs).record;
  } else {
    fail(ErrorKind::InvalidArgument, "unknown --kind '" + kind + "' (event, vehicle, harmonic, noise, traffic)");
  }
  (void)g;
  if (binary) {
    write_record_binary(out, rec);
  } else {
    Provenance prov{"none", seed, {}};
    prov.add("kind", kind).add("sample_rate", fmt(fs));
    write_text_file(out, record_csv(rec.samples, fs, &prov));
  }
  log("wrote " + std::to_string(rec.samples.size()) + " samples to " + out);
  return kExitOk;
}

int exit_code_for(const Error& e) { return is_input_error(e.kind()) ? kExitInput : kExitNumeric; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piezoelectric harvester simulation and design optimization"};
  app.require_subcommand(1);
  // Global options may also follow the subcommand name.
  app.fallthrough();
  Globals g;
  app.add_option("-c,--config,--scenario", g.config, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--threads", g.threads, "worker threads (default: available cores)");
  app.add_option("-o,--out", g.out, "output directory (overrides PEH_OUT_DIR)");

  DesignOverrides frf_ov, sim_ov;
  std::string rl, dump;
  double fmin = 0.0, fmax = 100.0;
  int points = 1001;
  auto* frf = app.add_subcommand("frf", "voltage and power FRF of one design");
  frf_ov.add(frf);
  frf->add_option("--rl", rl, "load resistance [ohm] or 'optimal'");
  frf->add_option("--fmin", fmin, "lowest frequency [Hz]");
  frf->add_option("--fmax", fmax, "highest frequency [Hz]");
  frf->add_option("--points", points, "grid points");
  frf->add_option("--dump-matrices", dump, "write full-order M, K, C, Theta, F into this directory");

  std::string input;
  double rate = 0.0;
  auto* sim = app.add_subcommand("simulate", "time-domain response and harvested energy");
  sim_ov.add(sim);
  sim->add_option("-i,--input", input, "excitation record (CSV t,a or binary)")->required();
  sim->add_option("--rate", rate, "sample rate [Hz] when the file has no time column");

  bool d1 = false, d2 = false, d3 = false;
  std::string grid = "20x20";
  auto* sweep = app.add_subcommand("sweep", "two-parameter design sweep");
  sweep->add_flag("--design1", d1, "L x R, H = 0.25, l = 1");
  sweep->add_flag("--design2", d2, "L x H, R = 1, l = 1");
  sweep->add_flag("--design3", d3, "L x l, R = 1, H = 0.25");
  sweep->add_option("--grid", grid, "grid size, e.g. 20x20");

  std::optional<double> threshold, window, peak_at, separation;
  int quiet = 0;
  auto* ext = app.add_subcommand("extract-events", "cut fixed-length events out of a long record");
  ext->add_option("-i,--input", input, "acceleration record")->required();
  ext->add_option("--rate", rate, "sample rate [Hz] when the file has no time column");
  ext->add_option("--threshold", threshold, "trigger level [m/s^2]");
  ext->add_option("--window", window, "event length [s]");
  ext->add_option("--peak-at", peak_at, "peak position inside the window [s]");
  ext->add_option("--min-separation", separation, "crossings closer than this join one event [s]");
  ext->add_option("--quiet", quiet, "also extract up to N event-free windows into <out>/quiet");

  std::string events_dir, quiet_dir;
  bool resume = false;
  auto* optc = app.add_subcommand("optimize", "per-event PSO and cross-event energy");
  optc->add_option("--events", events_dir, "directory with event_NNNN.csv files")->required();
  optc->add_option("--quiet", quiet_dir, "directory with quiet windows (adds the event-free candidate)");
  optc->add_flag("--resume", resume, "reuse completed per-event results with matching content hash");

  std::string run;
  std::optional<int> k_min, k_max;
  auto* clu = app.add_subcommand("cluster", "cluster optimal designs into candidates");
  clu->add_option("--run", run, "run directory written by optimize")->required();
  clu->add_option("--k-min", k_min, "smallest k");
  clu->add_option("--k-max", k_max, "largest k");

  std::string record;
  auto* eva = app.add_subcommand("evaluate", "rank candidates on a long record");
  eva->add_option("--run", run, "run directory written by optimize and cluster")->required();
  eva->add_option("--record", record, "long acceleration record")->required();
  eva->add_option("--rate", rate, "sample rate [Hz] when the file has no time column");

  std::string kind = "event", out_file;
  double duration = 30.0, fs = 600.0, freq = 2.0, amplitude = 0.3;
  std::uint64_t seed = 1;
  bool binary = false;
  auto* syn = app.add_subcommand("synth", "write a synthetic acceleration record");
  syn->add_option("--kind", kind, "event, vehicle, harmonic, noise or traffic");
  syn->add_option("--duration", duration, "length [s]");
  syn->add_option("--fs", fs, "sample rate [Hz]");
  syn->add_option("--freq", freq, "center frequency [Hz]");
  syn->add_option("--amplitude", amplitude, "peak amplitude or noise sigma [m/s^2]");
  syn->add_option("--seed", seed, "random seed");
  syn->add_flag("--binary", binary, "binary record instead of CSV");
  syn->add_option("file", out_file, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*frf) return cmd_frf(g, frf_ov, rl, fmin, fmax, points, dump);
    if (*sim) return cmd_simulate(g, sim_ov, input, rate);
    if (*sweep) {
      if (int(d1) + int(d2) + int(d3) != 1) fail(ErrorKind::InvalidArgument, "choose exactly one of --design1/2/3");
      return cmd_sweep(g, d1 ? 1 : d2 ? 2 : 3, grid);
    }
    if (*ext) return cmd_extract(g, input, rate, threshold, window, peak_at, separation, quiet);
    if (*optc) return cmd_optimize(g, events_dir, quiet_dir, resume);
    if (*clu) return cmd_cluster(g, run, k_min, k_max);
    if (*eva) return cmd_evaluate(g, run, record, rate);
    if (*syn) return cmd_synth(g, kind, duration, fs, freq, amplitude, seed, out_file, binary);
  } catch (const Error& e) {
    std::cerr << "peh: error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "peh: error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return kExitInput;
}
