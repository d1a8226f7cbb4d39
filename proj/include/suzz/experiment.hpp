#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "suzz/core.hpp"
#include "suzz/diagnostics.hpp"
#include "suzz/efficiency.hpp"
#include "suzz/io.hpp"
#include "suzz/sampler.hpp"
#include "suzz/speed.hpp"
#include "suzz/targets.hpp"
#include "suzz/transform1d.hpp"

namespace suzz::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Worker pool

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs job(k) for k in [0, n) on `threads` workers. Failures are collected
/// and the one with the lowest index is rethrown as "<label> k: ...".
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& job,
                         const std::string& label = "chain") {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned m = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n));
  if (m <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < m; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!errors[k]) continue;
    const std::string where = label + " " + std::to_string(k) + ": ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const config_error& e) {
      throw config_error(where + e.what());
    } catch (const explosion_error& e) {
      throw explosion_error(where + e.what());
    } catch (const guard_violation& e) {
      throw guard_violation(where + e.what());
    } catch (const no_event_escape& e) {
      throw no_event_escape(where + e.what());
    } catch (const error& e) {
      throw error(where + e.what());
    } catch (const std::exception& e) {
      throw error(where + e.what());
    }
  }
}

// ---------------------------------------------------------------------------
// Configuration

struct ExperimentConfig {
  std::string section;
  std::string target = "normal1d";
  std::string speed = "unit";
  Vec refresh;
  std::size_t switches = 0;  // run mode "switches:N" when > 0
  double time = 0.0;         // run mode "time:T" when > 0
  double delta = 0.1;
  std::size_t chains = 1;
  std::uint64_t master_seed = 1;
  std::string out = "out";
  unsigned threads = default_threads();
  std::string observable = "auto";
  std::string start = "origin";  // origin | target | comma list of coordinates
  std::vector<std::string> speeds;
  std::vector<std::string> targets;
  Vec cube_l;
  std::string input;
  std::size_t coordinate = 1;
  std::size_t qq_points = 99;
  double x0 = 0.3;
  int theta0 = 1;
};

inline Vec parse_list(const io::Config& cfg, const std::string& section, const std::string& key) {
  Vec out;
  for (const auto& item : cfg.get_list(section, key, {})) {
    try {
      out.push_back(io::parse_double(item, key));
    } catch (const error&) {
      throw config_error(cfg.where(section, key) + ": field '" + key + "' has a non-numeric entry '" +
                         item + "'");
    }
  }
  return out;
}

/// Checks that every id resolves, naming the field and line on failure.
template <class Make>
void check_id(const io::Config& cfg, const std::string& section, const std::string& key,
              const std::string& id, Make make) {
  try {
    (void)make(id);
  } catch (const config_error& e) {
    throw config_error(cfg.where(section, key) + ": field '" + key + "': " + e.what());
  }
}

inline ExperimentConfig load_config(const io::Config& cfg, const std::string& section) {
  ExperimentConfig c;
  c.section = section;
  c.target = cfg.get_string(section, "target", c.target);
  c.speed = cfg.get_string(section, "speed", c.speed);
  c.refresh = parse_list(cfg, section, "refresh");
  c.switches = cfg.get_u64(section, "switches", 0);
  c.time = cfg.get_double(section, "time", 0.0);
  c.delta = cfg.get_double(section, "delta", c.delta);
  c.chains = cfg.get_u64(section, "chains", c.chains);
  c.master_seed = cfg.get_u64(section, "seed", c.master_seed);
  c.out = cfg.get_string(section, "out", c.out);
  c.threads = static_cast<unsigned>(cfg.get_u64(section, "threads", c.threads));
  c.observable = cfg.get_string(section, "observable", c.observable);
  c.start = cfg.get_string(section, "start", c.start);
  c.speeds = cfg.get_list(section, "speeds", {});
  c.targets = cfg.get_list(section, "targets", {});
  c.cube_l = parse_list(cfg, section, "cube_l");
  c.input = cfg.get_string(section, "input", "");
  c.coordinate = cfg.get_u64(section, "coordinate", c.coordinate);
  c.qq_points = cfg.get_u64(section, "qq_points", c.qq_points);
  c.x0 = cfg.get_double(section, "x0", c.x0);
  c.theta0 = static_cast<int>(cfg.get_double(section, "theta0", c.theta0));

  check_id(cfg, section, "target", c.target, make_target);
  check_id(cfg, section, "speed", c.speed, make_speed);
  for (const auto& s : c.speeds) check_id(cfg, section, "speeds", s, make_speed);
  for (const auto& t : c.targets) check_id(cfg, section, "targets", t, make_target);
  if (c.observable != "auto") check_id(cfg, section, "observable", c.observable, make_observable);

  if (!(c.delta > 0.0)) throw config_error(cfg.where(section, "delta") + ": field 'delta' must be positive");
  if (c.chains < 1) throw config_error(cfg.where(section, "chains") + ": field 'chains' must be at least 1");
  if (c.threads < 1) c.threads = 1;
  if (c.time < 0.0) throw config_error(cfg.where(section, "time") + ": field 'time' must be positive");
  if (c.switches > 0 && c.time > 0.0) {
    throw config_error(cfg.where(section, "time") + ": give either 'switches' or 'time', not both");
  }
  for (double l : c.cube_l) {
    if (!(l > 0.0)) throw config_error(cfg.where(section, "cube_l") + ": cube half-widths must be positive");
  }
  if (c.theta0 != 1 && c.theta0 != -1) {
    throw config_error(cfg.where(section, "theta0") + ": field 'theta0' must be 1 or -1");
  }
  if (c.coordinate < 1) throw config_error(cfg.where(section, "coordinate") + ": coordinates are 1-based");
  return c;
}

/// Run mode check for the subcommands that simulate.
inline void require_run_length(const ExperimentConfig& c) {
  if (c.switches == 0 && !(c.time > 0.0)) {
    throw config_error("[" + c.section + "]: one of 'switches' or 'time' must be positive");
  }
}

inline RateSpec rate_spec(const std::string& target, const std::string& speed, const Vec& refresh) {
  Target t = make_target(target);
  Vec gamma = refresh;
  if (gamma.size() == 1 && t.dim > 1) gamma.assign(t.dim, refresh[0]);
  return RateSpec(std::move(t), make_speed(speed), gamma);
}

inline Observable1d observable_for(const std::string& id, const Target& t) {
  return id == "auto" ? default_observable_for(t) : make_observable(id);
}

/// Starting state for one chain, drawn from `rng` when start = target.
inline std::pair<Vec, Velocity> initial_state(const ExperimentConfig& c, const RateSpec& rs, Rng& rng) {
  const std::size_t d = rs.dim();
  if (c.start == "origin") return default_start(rs);
  if (c.start == "target") {
    if (!rs.target.quantile_1d) throw config_error("start = target needs a one-dimensional target with a quantile");
    return {Vec{rs.target.quantile_1d(rng.uniform_pos() * (1.0 - 1e-16))}, Velocity{rng.sign()}};
  }
  Vec x;
  std::stringstream ss(c.start);
  std::string item;
  while (std::getline(ss, item, ',')) x.push_back(io::parse_double(item, "start"));
  if (x.size() != d) throw config_error("start: expected " + std::to_string(d) + " coordinates");
  return {x, Velocity(d, 1)};
}

inline EventChain run_chain(const ExperimentConfig& c, const RateSpec& rs, std::uint64_t seed) {
  Rng rng(seed);
  auto [x0, th0] = initial_state(c, rs, rng);
  if (c.switches > 0) return run_until_switches(rs, std::move(x0), std::move(th0), c.switches, rng);
  return run_until_time(rs, std::move(x0), std::move(th0), c.time, rng);
}

// ---------------------------------------------------------------------------
// Output helpers

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw error("cannot create output directory '" + dir + "': " + ec.message());
}

inline std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw error("cannot write '" + p.string() + "'");
  return os;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline json number(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? json("nan") : json(v > 0 ? "inf" : "-inf");
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// sample

struct ChainRecord {
  std::uint64_t seed = 0;
  EventChain chain;
  double wall_seconds = 0.0;
};

inline std::vector<ChainRecord> run_chains(const ExperimentConfig& c, const RateSpec& rs) {
  std::vector<ChainRecord> recs(c.chains);
  parallel_for(c.chains, c.threads, [&](std::size_t k) {
    const auto t0 = std::chrono::steady_clock::now();
    recs[k].seed = chain_seed(c.master_seed, k);
    recs[k].chain = run_chain(c, rs, recs[k].seed);
    recs[k].wall_seconds = seconds_since(t0);
  });
  return recs;
}

inline json cmd_sample(const ExperimentConfig& c, std::ostream& log) {
  require_run_length(c);
  const RateSpec rs = rate_spec(c.target, c.speed, c.refresh);
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_timestamp();
  const auto recs = run_chains(c, rs);
  ensure_dir(c.out);

  json summary = {{"target", c.target}, {"speed", c.speed}, {"refresh", c.refresh},
                  {"mode", c.switches > 0 ? "switches:" + std::to_string(c.switches)
                                          : "time:" + io::format_double(c.time)},
                  {"delta", c.delta}, {"master_seed", c.master_seed}, {"start", c.start}};
  json meta = {{"started", started}, {"threads", c.threads}};
  json chains = json::array(), walls = json::array();
  for (std::size_t k = 0; k < recs.size(); ++k) {
    const auto& r = recs[k];
    const std::string stem = "chain_" + std::to_string(k);
    {
      auto os = open_out(fs::path(c.out) / (stem + ".events.jsonl"));
      io::write_events_jsonl(os, r.chain);
    }
    {
      auto os = open_out(fs::path(c.out) / (stem + ".skeleton.csv"));
      io::write_skeleton_csv(os, skeleton(r.chain, c.delta));
    }
    chains.push_back({{"chain", k}, {"seed", r.seed}, {"events", r.chain.events.size()},
                      {"switches", r.chain.switches()}, {"end_time", r.chain.t_end},
                      {"proposals", r.chain.proposals}, {"guard_violations", 0}});
    walls.push_back({{"chain", k}, {"wall_seconds", r.wall_seconds}});
    log << stem << ": " << r.chain.switches() << " switches, T=" << r.chain.t_end << '\n';
  }
  summary["chains"] = chains;
  meta["chains"] = walls;
  meta["wall_seconds"] = seconds_since(t0);
  open_out(fs::path(c.out) / "summary.json") << summary.dump(2) << '\n';
  open_out(fs::path(c.out) / "metadata.json") << meta.dump(2) << '\n';
  return summary;
}

// ---------------------------------------------------------------------------
// efficiency

inline std::vector<std::string> default_speeds() { return {"unit", "poly:0", "poly:0.2", "poly:0.5", "poly:0.9"}; }

inline std::vector<std::string> default_efficiency_targets() {
  return {"normal1d", "exp1d", "student:1", "student:2", "student:10", "student:100"};
}

inline EfficiencyTable run_efficiency(const ExperimentConfig& c) {
  std::vector<SpeedFunction> speeds;
  std::vector<Target> targets;
  for (const auto& s : c.speeds.empty() ? default_speeds() : c.speeds) speeds.push_back(make_speed(s));
  for (const auto& t : c.targets.empty() ? default_efficiency_targets() : c.targets) {
    targets.push_back(make_target(t));
  }
  const std::string obs = c.observable;
  EfficiencyTable table;
  for (const auto& s : speeds) table.algorithms.push_back(algorithm_label(s));
  for (const auto& t : targets) table.targets.push_back(t.id);
  table.cells.resize(speeds.size() * targets.size());
  // Cells are independent; efficiency_table's per-cell policy, run on the pool.
  parallel_for(table.cells.size(), c.threads, [&](std::size_t i) {
    const std::size_t r = i / targets.size(), col = i % targets.size();
    auto& cell = table.cells[i];
    cell.algorithm = table.algorithms[r];
    cell.target = targets[col].id;
    try {
      cell.report = inverse_efficiency(targets[col], speeds[r], observable_for(obs, targets[col]));
      if (cell.report.divergent) cell.reason = cell.report.reason;
    } catch (const error& e) {
      cell.failed = true;
      cell.reason = e.what();
    }
  }, "cell");
  return table;
}

inline void write_efficiency_csv(std::ostream& os, const EfficiencyTable& t) {
  os << "algorithm,target,observable,J,n0,gamma2,status,reason\n";
  for (const auto& cell : t.cells) {
    const auto& r = cell.report;
    const std::string status = cell.failed ? "error" : (r.divergent ? "divergent" : "ok");
    std::string reason = cell.reason;
    std::replace(reason.begin(), reason.end(), ',', ';');
    std::replace(reason.begin(), reason.end(), '\n', ' ');
    os << cell.algorithm << ',' << cell.target << ',' << r.observable_id << ','
       << io::format_double(cell.value()) << ',' << io::format_double(cell.failed ? kInf : r.n0) << ','
       << io::format_double(cell.failed ? kInf : r.gamma2) << ',' << status << ',' << reason << '\n';
  }
}

inline void print_efficiency_table(std::ostream& os, const EfficiencyTable& t) {
  os << std::left << std::setw(12) << "";
  for (const auto& tg : t.targets) os << std::right << std::setw(13) << tg;
  os << '\n';
  for (std::size_t r = 0; r < t.algorithms.size(); ++r) {
    os << std::left << std::setw(12) << t.algorithms[r];
    for (std::size_t col = 0; col < t.targets.size(); ++col) {
      const double v = t.at(r, col).value();
      std::ostringstream cell;
      if (std::isfinite(v)) {
        cell << std::setprecision(6) << v;
      } else {
        cell << "inf";
      }
      os << std::right << std::setw(13) << cell.str();
    }
    os << '\n';
  }
}

inline EfficiencyTable cmd_efficiency(const ExperimentConfig& c, std::ostream& log) {
  const auto table = run_efficiency(c);
  ensure_dir(c.out);
  auto os = open_out(fs::path(c.out) / "efficiency.csv");
  write_efficiency_csv(os, table);
  print_efficiency_table(log, table);
  return table;
}

// ---------------------------------------------------------------------------
// compare

struct Summary {
  double mean = 0.0, median = 0.0, sd = 0.0;
};

inline Summary summarize(Vec v) {
  Summary s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  return s;
}

struct CompareCell {
  std::string algorithm;
  std::string speed;
  std::string target;
  std::string observable;
  Vec ess;               // per chain
  std::vector<Vec> cube;  // per chain, one entry per cube_l
  Summary ess_summary;
};

/// ESS of the (transformed) first-requested coordinate of the skeleton, one
/// value per seed, for every (speed, target) pair.
inline std::vector<CompareCell> run_compare(const ExperimentConfig& c) {
  require_run_length(c);
  const auto speeds = c.speeds.empty() ? std::vector<std::string>{"unit", "poly:0", "poly:0.5"} : c.speeds;
  const auto targets = c.targets.empty() ? std::vector<std::string>{c.target} : c.targets;
  std::vector<CompareCell> cells;
  for (const auto& tg : targets) {
    for (const auto& sp : speeds) {
      CompareCell cell;
      cell.speed = sp;
      cell.target = tg;
      cell.algorithm = algorithm_label(make_speed(sp));
      cells.push_back(std::move(cell));
    }
  }
  const std::size_t per = c.chains;
  std::vector<double> ess(cells.size() * per);
  std::vector<Vec> cube(cells.size() * per);
  std::vector<std::string> obs_ids(cells.size());
  parallel_for(cells.size() * per, c.threads, [&](std::size_t i) {
    const std::size_t ci = i / per, k = i % per;
    const RateSpec rs = rate_spec(cells[ci].target, cells[ci].speed, c.refresh);
    if (c.coordinate > rs.dim()) throw config_error("coordinate exceeds the target dimension");
    const Observable1d g = observable_for(c.observable, rs.target);
    if (k == 0) obs_ids[ci] = g.id;
    // Seeds depend on the chain index only, so every algorithm sees the same streams.
    const EventChain chain = run_chain(c, rs, chain_seed(c.master_seed, k));
    const Skeleton sk = skeleton(chain, c.delta);
    ess[i] = suzz::ess(transform_series(sk.coordinate(c.coordinate - 1), [&g](double x) { return g.g(x, 1); }));
    if (!c.cube_l.empty()) cube[i] = cube_probabilities(chain, c.cube_l);
  });
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    cells[ci].observable = obs_ids[ci];
    cells[ci].ess.assign(ess.begin() + ci * per, ess.begin() + (ci + 1) * per);
    cells[ci].cube.assign(cube.begin() + ci * per, cube.begin() + (ci + 1) * per);
    cells[ci].ess_summary = summarize(cells[ci].ess);
  }
  return cells;
}

/// Reference cube probability P(|X| <= l) where a closed form exists (d = 1).
inline std::optional<double> actual_cube_probability(const Target& t, double l) {
  if (t.dim != 1 || !t.cdf_1d) return std::nullopt;
  return t.cdf_1d(l) - t.cdf_1d(-l);
}

inline std::vector<CompareCell> cmd_compare(const ExperimentConfig& c, std::ostream& log) {
  const auto cells = run_compare(c);
  ensure_dir(c.out);
  {
    auto os = open_out(fs::path(c.out) / "compare.csv");
    os << "algorithm,speed,target,observable,chains,switches,delta,mean_ess,median_ess,sd_ess\n";
    for (const auto& cell : cells) {
      os << cell.algorithm << ',' << cell.speed << ',' << cell.target << ',' << cell.observable << ','
         << cell.ess.size() << ',' << c.switches << ',' << io::format_double(c.delta) << ','
         << io::format_double(cell.ess_summary.mean) << ',' << io::format_double(cell.ess_summary.median)
         << ',' << io::format_double(cell.ess_summary.sd) << '\n';
      log << std::left << std::setw(12) << cell.algorithm << std::setw(12) << cell.target
          << " median ESS " << cell.ess_summary.median << " (mean " << cell.ess_summary.mean << ", sd "
          << cell.ess_summary.sd << ")\n";
    }
  }
  if (!c.cube_l.empty()) {
    auto os = open_out(fs::path(c.out) / "cube.csv");
    os << "algorithm,speed,target,l,mean,median,sd,actual\n";
    for (const auto& cell : cells) {
      const Target t = make_target(cell.target);
      for (std::size_t j = 0; j < c.cube_l.size(); ++j) {
        Vec v;
        for (const auto& per_chain : cell.cube) v.push_back(per_chain[j]);
        const Summary s = summarize(v);
        const auto actual = actual_cube_probability(t, c.cube_l[j]);
        os << cell.algorithm << ',' << cell.speed << ',' << cell.target << ','
           << io::format_double(c.cube_l[j]) << ',' << io::format_double(s.mean) << ','
           << io::format_double(s.median) << ',' << io::format_double(s.sd) << ','
           << (actual ? io::format_double(*actual) : std::string()) << '\n';
      }
    }
  }
  return cells;
}

// ---------------------------------------------------------------------------
// diagnose

inline DiagnosticsReport diagnose_skeleton(const Skeleton& sk, const ExperimentConfig& c,
                                           const std::optional<Target>& reference) {
  if (sk.points.empty()) throw error("diagnose: skeleton is empty");
  if (c.coordinate > sk.points.front().x.size()) throw config_error("coordinate exceeds the skeleton dimension");
  DiagnoseOptions opt;
  opt.qq_points = c.qq_points;
  if (c.observable != "auto" && c.observable != "x") {
    const Observable1d g = make_observable(c.observable);
    opt.transform = [g](double x) { return g.g(x, 1); };
  }
  if (reference && reference->dim == 1) {
    opt.cdf = reference->cdf_1d;
    opt.quantile = reference->quantile_1d;
  }
  DiagnosticsReport rep = diagnose_series(sk.coordinate(c.coordinate - 1), opt);
  for (double l : c.cube_l) rep.cube_probs.emplace_back(l, cube_probability_skeleton(sk, l));
  return rep;
}

inline DiagnosticsReport cmd_diagnose(const ExperimentConfig& c, std::ostream& log) {
  if (c.input.empty()) throw config_error("[" + c.section + "]: field 'input' (skeleton CSV) is required");
  std::ifstream in(c.input);
  if (!in) throw error("cannot open skeleton '" + c.input + "'");
  const Skeleton sk = io::read_skeleton_csv(in);
  std::optional<Target> ref;
  ref = make_target(c.target);
  const DiagnosticsReport rep = diagnose_skeleton(sk, c, ref);

  ensure_dir(c.out);
  json j = {{"input", c.input}, {"coordinate", c.coordinate}, {"samples", rep.samples},
            {"ess", rep.ess}, {"ess_method", rep.ess_method}, {"super_n", rep.super_n}};
  if (rep.has_ks) {
    j["ks"] = {{"reference", c.target}, {"statistic", rep.ks.statistic}, {"p_value", rep.ks.p_value},
               {"n_effective", rep.ks.n}};
  }
  json cubes = json::array();
  for (const auto& [l, p] : rep.cube_probs) cubes.push_back({{"l", l}, {"estimate", p}});
  j["cube"] = cubes;
  open_out(fs::path(c.out) / "diagnostics.json") << j.dump(2) << '\n';
  if (!rep.qq_pairs.empty()) {
    auto os = open_out(fs::path(c.out) / "qq.csv");
    os << "p,empirical,reference\n";
    for (const auto& q : rep.qq_pairs) {
      os << io::format_double(q.p) << ',' << io::format_double(q.empirical) << ','
         << io::format_double(q.reference) << '\n';
    }
  }
  log << "ESS " << rep.ess << " from " << rep.samples << " samples";
  if (rep.has_ks) log << ", KS p=" << rep.ks.p_value;
  log << '\n';
  return rep;
}

// ---------------------------------------------------------------------------
// oracle1d

inline EquivalenceReport cmd_oracle1d(const ExperimentConfig& c, std::ostream& log) {
  const RateSpec rs = rate_spec(c.target, c.speed, c.refresh);
  if (rs.dim() != 1) throw config_error("oracle1d needs a one-dimensional target");
  const std::size_t n = c.switches > 0 ? c.switches : 1000;
  const auto t0 = std::chrono::steady_clock::now();
  const EquivalenceReport rep = equivalence_check(rs, c.x0, c.theta0, n, c.master_seed);
  const double wall = seconds_since(t0);
  ensure_dir(c.out);
  json j = {{"target", c.target}, {"speed", c.speed}, {"x0", c.x0}, {"theta0", c.theta0},
            {"events", rep.n_events}, {"seed", rep.seed},
            {"max_time_discrepancy", rep.max_time_discrepancy},
            {"max_position_discrepancy", rep.max_position_discrepancy},
            {"min_boundary_distance", number(rep.min_boundary_distance)},
            {"m_plus", number(rep.m_plus)}, {"m_minus", number(rep.m_minus)}};
  open_out(fs::path(c.out) / "oracle1d.json") << j.dump(2) << '\n';
  open_out(fs::path(c.out) / "metadata.json") << json{{"started", utc_timestamp()}, {"wall_seconds", wall}}.dump(2)
                                              << '\n';
  log << "events " << rep.n_events << ": time discrepancy " << rep.max_time_discrepancy
      << ", position discrepancy " << rep.max_position_discrepancy << '\n';
  return rep;
}

}  // namespace suzz::experiment
