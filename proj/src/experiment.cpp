#include "stackpc/experiment.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <thread>

#include <json.hpp>

#include "stackpc/baseline_ncg.hpp"
#include "stackpc/rng.hpp"

#ifndef STACKPC_VERSION
#define STACKPC_VERSION "unknown"
#endif

namespace stackpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  for (std::size_t w = 0; w < count; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  for (auto& t : pool) t.join();
}

std::string csv_number(double x) { return std::isfinite(x) ? format_double(x) : std::string(); }

}  // namespace

const char* code_version() { return STACKPC_VERSION; }

std::uint64_t drop_seed(std::uint64_t base_seed, std::uint64_t index) {
  return derive_key(base_seed, {static_cast<std::uint64_t>(StreamRole::drop), index});
}

DropRecord run_drop(std::uint64_t seed, const ExperimentConfig& config, Scheme scheme) {
  DropRecord d;
  d.seed = seed;
  d.scheme = scheme;
  d.k = config.scenario.k;
  const Scenario s = generate(seed, config.scenario.k, make_radii(config), make_policy(config));
  d.scenario_hash = s.hash();
  const ChannelGainsd g = gains_from_scenario(s, config.pathloss);
  const GameParamsd params = make_params(config);
  d.contraction = build_w_matrix(g);
  try {
    SolveResult res = scheme == Scheme::sg ? solve(g, params, config.solver.p0_init_fraction * params.p_max)
                                           : ncg_solve(g, params);
    d.ok = true;
    d.profile = std::move(res.profile);
    d.trace = std::move(res.trace);
    d.converged = d.trace.converged;
    d.outer_iterations = d.trace.outer_iterations;
  } catch (const SolveError& e) {
    d.error = e.what();
    d.trace = e.trace();
    d.outer_iterations = d.trace.outer_iterations;
    return d;
  }
  d.u_mue = utility_mue(d.profile, g, params);
  d.r_mue = rate_mue(d.profile, g, params);
  d.u_sue.resize(g.size());
  d.r_sue.resize(g.size());
  for (Index k = 0; k < g.size(); ++k) {
    d.u_sue(k) = utility_sue(k, d.profile, g, params);
    d.r_sue(k) = rate_sue(k, d.profile, g, params);
  }
  return d;
}

DropMetrics profile_metrics(const PowerProfiled& profile, const ChannelGainsd& g, const GameParamsd& params) {
  DropMetrics m;
  m.ok = true;
  m.u_mue = utility_mue(profile, g, params);
  m.r_mue = rate_mue(profile, g, params);
  m.p_mue = profile.p_mue;
  const Index k = g.size();
  double u_sum = 0.0, r_sum = 0.0, p_sum = 0.0;
  for (Index i = 0; i < k; ++i) {
    u_sum += utility_sue(i, profile, g, params);
    r_sum += rate_sue(i, profile, g, params);
    p_sum += profile.p_sue(i);
  }
  const double kd = static_cast<double>(k);
  m.u_sue = k > 0 ? u_sum / kd : kNaN;
  m.r_sue = k > 0 ? r_sum / kd : kNaN;
  m.p_sue = k > 0 ? p_sum / kd : kNaN;
  m.r_all = (m.r_mue + r_sum) / (kd + 1.0);
  return m;
}

DropMetrics drop_metrics(const DropRecord& drop, const ExperimentConfig& config, std::optional<int> iteration) {
  if (!drop.ok) {
    DropMetrics m;
    m.outer_iterations = drop.outer_iterations;
    return m;
  }
  PowerProfiled profile = drop.profile;
  bool converged = drop.converged;
  if (iteration) {
    const auto n = static_cast<std::size_t>(*iteration);
    if (n >= 1 && n <= drop.trace.outer.size()) {
      const OuterRecord& r = drop.trace.outer[n - 1];
      profile = PowerProfiled(r.p_mue, r.p_sue);
    }
    converged = drop.converged && drop.outer_iterations <= *iteration;
  }
  const Scenario s = generate(drop.seed, config.scenario.k, make_radii(config), make_policy(config));
  DropMetrics m = profile_metrics(profile, gains_from_scenario(s, config.pathloss), make_params(config));
  m.converged = converged;
  m.outer_iterations = drop.outer_iterations;
  return m;
}

MeanStderr aggregate(std::span<const double> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values)
    if (std::isfinite(v)) {
      sum += v;
      ++n;
    }
  if (n == 0) return {kNaN, kNaN};
  const double mean = sum / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values)
    if (std::isfinite(v)) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

MetricsRow aggregate_metrics(double axis_value, std::span<const DropMetrics> drops) {
  MetricsRow row;
  row.axis_value = axis_value;
  row.drops = static_cast<int>(drops.size());
  auto column = [&](double DropMetrics::*field) {
    std::vector<double> xs;
    for (const auto& d : drops)
      if (d.ok) xs.push_back(d.*field);
    return aggregate(xs);
  };
  row.u_mue = column(&DropMetrics::u_mue);
  row.u_sue = column(&DropMetrics::u_sue);
  row.r_mue = column(&DropMetrics::r_mue);
  row.r_sue = column(&DropMetrics::r_sue);
  row.r_all = column(&DropMetrics::r_all);
  row.p_mue = column(&DropMetrics::p_mue);
  row.p_sue = column(&DropMetrics::p_sue);
  int converged = 0;
  double outer = 0.0;
  for (const auto& d : drops) {
    if (d.ok) ++row.drops_ok;
    if (d.converged) ++converged;
    outer += d.outer_iterations;
  }
  if (!drops.empty()) {
    row.convergence_rate = static_cast<double>(converged) / static_cast<double>(drops.size());
    row.mean_outer_iterations = outer / static_cast<double>(drops.size());
  }
  return row;
}

MeanStderr paired_difference(std::span<const DropMetrics> a, std::span<const DropMetrics> b,
                             double DropMetrics::*field) {
  if (a.size() != b.size()) throw std::invalid_argument("paired_difference: drop counts differ");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].ok && b[i].ok) diffs.push_back(b[i].*field - a[i].*field);
  return aggregate(diffs);
}

std::string metrics_csv(SweepAxis axis, const std::vector<MetricsRow>& rows, const std::string& family) {
  using Field = MeanStderr MetricsRow::*;
  std::vector<std::pair<std::string, Field>> cols;
  if (family == "utility") cols = {{"u0", &MetricsRow::u_mue}, {"uk", &MetricsRow::u_sue}};
  else if (family == "rate") cols = {{"r0", &MetricsRow::r_mue}, {"rk", &MetricsRow::r_sue}, {"r", &MetricsRow::r_all}};
  else if (family == "power") cols = {{"p0", &MetricsRow::p_mue}, {"pk", &MetricsRow::p_sue}};
  else if (family != "convergence") throw ConfigError("unknown metric family '" + family + "'");

  std::string out = to_string(axis);
  if (family == "convergence") {
    out += ",convergence_rate,mean_outer_iterations,drops_ok,drops\n";
    for (const auto& r : rows)
      out += csv_number(r.axis_value) + ',' + csv_number(r.convergence_rate) + ',' +
             csv_number(r.mean_outer_iterations) + ',' + std::to_string(r.drops_ok) + ',' +
             std::to_string(r.drops) + '\n';
    return out;
  }
  for (const auto& [name, field] : cols) out += ',' + name + "_mean," + name + "_stderr";
  out += '\n';
  for (const auto& r : rows) {
    out += csv_number(r.axis_value);
    for (const auto& [name, field] : cols) out += ',' + csv_number((r.*field).mean) + ',' + csv_number((r.*field).se);
    out += '\n';
  }
  return out;
}

SweepResult run_sweep(const ExperimentConfig& config, int workers, const std::string& out_dir) {
  config.validate();
  config.sweep.validate();
  const SweepSpec& spec = config.sweep;
  const auto drops = static_cast<std::size_t>(spec.drops);

  SweepResult result;
  for (Scheme scheme : spec.schemes) {
    SchemeRows sr;
    sr.scheme = scheme;
    if (spec.axis == SweepAxis::iteration) {
      // One solve per drop; every axis value reads the same trace.
      std::vector<std::vector<DropMetrics>> per_iter(spec.values.size(), std::vector<DropMetrics>(drops));
      parallel_for(drops, workers, [&](std::size_t i) {
        const DropRecord d = run_drop(drop_seed(config.scenario.seed, i), config, scheme);
        for (std::size_t v = 0; v < spec.values.size(); ++v)
          per_iter[v][i] = drop_metrics(d, config, static_cast<int>(spec.values[v]));
      });
      for (std::size_t v = 0; v < spec.values.size(); ++v)
        sr.rows.push_back(aggregate_metrics(spec.values[v], per_iter[v]));
      sr.drops = std::move(per_iter);
    } else {
      for (double value : spec.values) {
        const ExperimentConfig point = at_axis_value(config, spec.axis, value);
        std::vector<DropMetrics> metrics(drops);
        parallel_for(drops, workers, [&](std::size_t i) {
          metrics[i] = drop_metrics(run_drop(drop_seed(config.scenario.seed, i), point, scheme), point);
        });
        sr.rows.push_back(aggregate_metrics(value, metrics));
        sr.drops.push_back(std::move(metrics));
      }
    }
    result.schemes.push_back(std::move(sr));
  }

  if (out_dir.empty()) return result;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
    result.files.push_back(name);
  };
  for (const auto& sr : result.schemes)
    for (const char* family : {"utility", "rate", "power", "convergence"})
      write(std::string(to_string(sr.scheme)) + "_" + family + ".csv", metrics_csv(spec.axis, sr.rows, family));

  nlohmann::ordered_json manifest;
  manifest["tool"] = "stackpc";
  manifest["version"] = code_version();
  manifest["axis"] = to_string(spec.axis);
  manifest["values"] = spec.values;
  manifest["drops"] = spec.drops;
  std::vector<std::string> schemes;
  for (Scheme s : spec.schemes) schemes.emplace_back(to_string(s));
  manifest["schemes"] = schemes;
  manifest["files"] = result.files;
  manifest["config"] = serialize_config(config);
  write("manifest.json", manifest.dump(2) + "\n");
  return result;
}

}  // namespace stackpc
