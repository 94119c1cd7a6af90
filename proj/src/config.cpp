#include "stackpc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stackpc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

struct LineContext {
  int line;
  std::string key;
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line) + " (" + key + "): " + what);
  }
};

double to_double(const std::string& text, const LineContext& ctx) {
  double x = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end || text.empty()) ctx.fail("expected a number, got '" + text + "'");
  if (!std::isfinite(x)) ctx.fail("number must be finite");
  return x;
}

template <typename Int>
Int to_integer(const std::string& text, const LineContext& ctx) {
  Int x = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end || text.empty()) ctx.fail("expected an integer, got '" + text + "'");
  return x;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += format_double(xs[i]);
  }
  return out;
}

void apply(ExperimentConfig& c, const std::string& section, const std::string& key, const std::string& value,
           const LineContext& ctx) {
  auto num = [&] { return to_double(value, ctx); };
  if (section == "scenario") {
    if (key == "seed") c.scenario.seed = to_integer<std::uint64_t>(value, ctx);
    else if (key == "k") c.scenario.k = to_integer<Index>(value, ctx);
    else if (key == "macro_radius_m") c.scenario.macro_radius_m = num();
    else if (key == "small_radius_m") c.scenario.small_radius_m = num();
    else if (key == "max_placement_tries") c.scenario.max_placement_tries = to_integer<int>(value, ctx);
    else if (key == "separation_factor") c.scenario.separation_factor = num();
    else ctx.fail("unknown key in [scenario]");
  } else if (section == "pathloss") {
    if (key == "exponent") c.pathloss.exponent = num();
    else if (key == "reference_distance_m") c.pathloss.reference_distance = num();
    else if (key == "reference_gain") c.pathloss.reference_gain = num();
    else if (key == "shadowing_sigma_db") c.pathloss.shadowing_sigma_db = num();
    else ctx.fail("unknown key in [pathloss]");
  } else if (section == "game") {
    if (key == "lambda") c.game.lambda_mue = c.game.lambda_sue = num();
    else if (key == "lambda_db") c.game.lambda_mue = c.game.lambda_sue = db_to_linear(num());
    else if (key == "lambda_mue") c.game.lambda_mue = num();
    else if (key == "lambda_mue_db") c.game.lambda_mue = db_to_linear(num());
    else if (key == "lambda_sue") c.game.lambda_sue = num();
    else if (key == "lambda_sue_db") c.game.lambda_sue = db_to_linear(num());
    else if (key == "pt_dbm") c.game.pt_dbm = num();
    else if (key == "noise_density_dbm_hz") c.game.noise_density_dbm_hz = num();
    else if (key == "bandwidth_hz") c.game.bandwidth_hz = num();
    else ctx.fail("unknown key in [game]");
  } else if (section == "solver") {
    if (key == "tol_inner") c.solver.tol_inner = num();
    else if (key == "tol_outer") c.solver.tol_outer = num();
    else if (key == "max_inner") c.solver.max_inner = to_integer<int>(value, ctx);
    else if (key == "max_outer") c.solver.max_outer = to_integer<int>(value, ctx);
    else if (key == "p0_init_fraction") c.solver.p0_init_fraction = num();
    else ctx.fail("unknown key in [solver]");
  } else if (section == "sweep") {
    if (key == "axis") {
      try {
        c.sweep.axis = parse_axis(value);
      } catch (const ConfigError& e) {
        ctx.fail(e.what());
      }
    } else if (key == "values" || key == "values_db") {
      c.sweep.values.clear();
      for (const auto& item : split_list(value)) {
        const double x = to_double(item, ctx);
        c.sweep.values.push_back(key == "values_db" ? db_to_linear(x) : x);
      }
    } else if (key == "drops") {
      c.sweep.drops = to_integer<int>(value, ctx);
    } else if (key == "schemes") {
      c.sweep.schemes.clear();
      for (const auto& item : split_list(value)) {
        try {
          c.sweep.schemes.push_back(parse_scheme(item));
        } catch (const ConfigError& e) {
          ctx.fail(e.what());
        }
      }
    } else if (key == "output") {
      c.sweep.output = value;
    } else {
      ctx.fail("unknown key in [sweep]");
    }
  } else {
    ctx.fail("key outside a known section");
  }
}

}  // namespace

const char* to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::pt_dbm: return "pt_dbm";
    case SweepAxis::lambda: return "lambda";
    case SweepAxis::k: return "k";
    case SweepAxis::iteration: return "iteration";
  }
  return "?";
}

const char* to_string(Scheme scheme) { return scheme == Scheme::sg ? "sg" : "ncg"; }

SweepAxis parse_axis(const std::string& name) {
  if (name == "pt_dbm") return SweepAxis::pt_dbm;
  if (name == "lambda") return SweepAxis::lambda;
  if (name == "k") return SweepAxis::k;
  if (name == "iteration") return SweepAxis::iteration;
  throw ConfigError("unknown sweep axis '" + name + "'");
}

Scheme parse_scheme(const std::string& name) {
  if (name == "sg") return Scheme::sg;
  if (name == "ncg") return Scheme::ncg;
  throw ConfigError("unknown scheme '" + name + "'");
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw ConfigError("cannot format number");
  return std::string(buf, ptr);
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep: axis values must not be empty");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep: axis values must be strictly increasing");
  if (drops < 1) throw ConfigError("sweep: drops must be at least 1");
  if (schemes.empty()) throw ConfigError("sweep: at least one scheme is required");
  for (double v : values) {
    if (axis == SweepAxis::k && (v < 0 || v != std::floor(v)))
      throw ConfigError("sweep: k values must be nonnegative integers");
    if (axis == SweepAxis::iteration && (v < 1 || v != std::floor(v)))
      throw ConfigError("sweep: iteration values must be positive integers");
    if (axis == SweepAxis::lambda && !(v > 0)) throw ConfigError("sweep: lambda values must be positive");
  }
}

void ExperimentConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  check(scenario.k >= 0, "scenario: k must be nonnegative");
  check(scenario.macro_radius_m > 0 && scenario.small_radius_m > 0, "scenario: radii must be positive");
  check(scenario.max_placement_tries >= 1, "scenario: max_placement_tries must be positive");
  check(scenario.separation_factor >= 0, "scenario: separation_factor must be nonnegative");
  try {
    pathloss.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError(e.what());
  }
  check(game.lambda_mue >= 0, "game: lambda_mue must be nonnegative");
  check(game.lambda_sue > 0, "game: lambda_sue must be positive");
  check(game.bandwidth_hz > 0, "game: bandwidth_hz must be positive");
  check(solver.tol_inner > 0 && solver.tol_outer > 0, "solver: tolerances must be positive");
  check(solver.max_inner > 0 && solver.max_outer > 0, "solver: iteration caps must be positive");
  check(solver.p0_init_fraction >= 0 && solver.p0_init_fraction <= 1, "solver: p0_init_fraction must be in [0, 1]");
  check(sweep.drops >= 1, "sweep: drops must be at least 1");
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find_first_of("#;");
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "pathloss" && section != "game" && section != "solver" &&
          section != "sweep")
        throw ConfigError("config line " + std::to_string(line_no) + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    apply(c, section, key, trim(line.substr(eq + 1)), LineContext{line_no, key});
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << " = " << value << '\n'; };
  auto num = [](double x) { return format_double(x); };

  out << "[scenario]\n";
  kv("seed", std::to_string(c.scenario.seed));
  kv("k", std::to_string(c.scenario.k));
  kv("macro_radius_m", num(c.scenario.macro_radius_m));
  kv("small_radius_m", num(c.scenario.small_radius_m));
  kv("max_placement_tries", std::to_string(c.scenario.max_placement_tries));
  kv("separation_factor", num(c.scenario.separation_factor));
  out << "\n[pathloss]\n";
  kv("exponent", num(c.pathloss.exponent));
  kv("reference_distance_m", num(c.pathloss.reference_distance));
  kv("reference_gain", num(c.pathloss.reference_gain));
  kv("shadowing_sigma_db", num(c.pathloss.shadowing_sigma_db));
  out << "\n[game]\n";
  kv("lambda_mue", num(c.game.lambda_mue));
  kv("lambda_sue", num(c.game.lambda_sue));
  kv("pt_dbm", num(c.game.pt_dbm));
  kv("noise_density_dbm_hz", num(c.game.noise_density_dbm_hz));
  kv("bandwidth_hz", num(c.game.bandwidth_hz));
  out << "\n[solver]\n";
  kv("tol_inner", num(c.solver.tol_inner));
  kv("tol_outer", num(c.solver.tol_outer));
  kv("max_inner", std::to_string(c.solver.max_inner));
  kv("max_outer", std::to_string(c.solver.max_outer));
  kv("p0_init_fraction", num(c.solver.p0_init_fraction));
  out << "\n[sweep]\n";
  kv("axis", to_string(c.sweep.axis));
  kv("values", join(c.sweep.values));
  kv("drops", std::to_string(c.sweep.drops));
  std::string schemes;
  for (std::size_t i = 0; i < c.sweep.schemes.size(); ++i) {
    if (i) schemes += ", ";
    schemes += to_string(c.sweep.schemes[i]);
  }
  kv("schemes", schemes);
  kv("output", c.sweep.output);
  return out.str();
}

GameParamsd make_params(const ExperimentConfig& c) {
  GameParamsd p = GameParamsd::uniform(c.scenario.k, c.game.lambda_sue, dbm_to_watts(c.game.pt_dbm),
                                       noise_power_watts(c.game.noise_density_dbm_hz, c.game.bandwidth_hz));
  p.lambda_mue = c.game.lambda_mue;
  p.tol_inner = c.solver.tol_inner;
  p.tol_outer = c.solver.tol_outer;
  p.max_inner = c.solver.max_inner;
  p.max_outer = c.solver.max_outer;
  return p;
}

CellRadii make_radii(const ExperimentConfig& c) { return {c.scenario.macro_radius_m, c.scenario.small_radius_m}; }

PlacementPolicy make_policy(const ExperimentConfig& c) {
  return {c.scenario.max_placement_tries, c.scenario.separation_factor};
}

ExperimentConfig at_axis_value(const ExperimentConfig& config, SweepAxis axis, double value) {
  ExperimentConfig c = config;
  switch (axis) {
    case SweepAxis::pt_dbm: c.game.pt_dbm = value; break;
    case SweepAxis::lambda: c.game.lambda_mue = c.game.lambda_sue = value; break;
    case SweepAxis::k: c.scenario.k = static_cast<Index>(value); break;
    case SweepAxis::iteration: break;
  }
  return c;
}

}  // namespace stackpc
