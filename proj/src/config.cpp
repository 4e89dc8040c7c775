#include "hitstat/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hitstat/lawcheck.hpp"
#include "hitstat/parallel.hpp"
#include "hitstat/random.hpp"

namespace hitstat {

namespace {

using Kind = ConfigError::Kind;

[[noreturn]] void out_of_range(const std::string& key, const std::string& constraint) {
  throw ConfigError(Kind::out_of_range, key, key + " " + constraint);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(v.substr(used)) != "" || !std::isfinite(out)) {
    throw ConfigError(Kind::malformed, key, key + " expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
    throw ConfigError(Kind::malformed, key,
                      key + " expects a nonnegative integer, got '" + v + "'");
  }
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError(Kind::out_of_range, key, key + " does not fit in 64 bits");
  }
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split_list(v)) out.push_back(to_double(key, item));
  if (out.empty()) throw ConfigError(Kind::malformed, key, key + " expects a non-empty list");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw ConfigError(Kind::malformed, key, key + " expects true or false");
}

// Lags accept "A..B" ranges as well as lists.
std::vector<std::uint64_t> to_lags(const std::string& key, const std::string& v) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(v)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_u64(key, item));
    } else {
      const std::uint64_t a = to_u64(key, item.substr(0, dots));
      const std::uint64_t b = to_u64(key, item.substr(dots + 2));
      if (b < a) out_of_range(key, "range must be increasing");
      for (std::uint64_t n = a; n <= b; ++n) out.push_back(n);
    }
  }
  return out;
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ",";
    if constexpr (std::is_floating_point_v<T>) {
      s += fmt_double(xs[i]);
    } else {
      s += std::to_string(xs[i]);
    }
  }
  return s;
}

}  // namespace

std::vector<double> parse_t_grid(const std::string& spec) {
  if (spec.rfind("geometric:", 0) == 0) {
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(10));
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) {
      throw ConfigError(Kind::malformed, "t_grid", "t_grid expects geometric:LO:HI:POINTS");
    }
    const double lo = to_double("t_grid", parts[0]);
    const double hi = to_double("t_grid", parts[1]);
    const std::uint64_t n = to_u64("t_grid", parts[2]);
    if (!(lo > 0 && hi > lo && n >= 2)) out_of_range("t_grid", "needs 0 < LO < HI and POINTS >= 2");
    return geometric_t_grid(lo, hi, n);
  }
  std::vector<double> grid = to_doubles("t_grid", spec);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0 || (i > 0 && !(grid[i] > grid[i - 1]))) {
      out_of_range("t_grid", "must be nonnegative and increasing");
    }
  }
  return grid;
}

void ExperimentConfig::validate() const {
  const SystemSpec& s = system;
  if (s.multiplier < 2 || s.multiplier > kMaxExactMultiplier) {
    out_of_range("multiplier", "must lie in [2, 256]");
  }
  if (s.family == Family::beta) {
    if (!(s.beta.lo > 1.0)) out_of_range("beta_min", "must be > 1");
    if (s.beta.hi < s.beta.lo) out_of_range("beta_max", "must be >= beta_min (empty interval)");
  }
  if (s.family == Family::perturbed && !(s.epsilon > 0.0 && s.epsilon <= 0.5)) {
    out_of_range("epsilon", "must lie in (0, 0.5]");
  }
  if (target && !(*target >= 0.0 && *target < 1.0)) out_of_range("target", "must lie in [0, 1)");
  for (double r : radii) {
    if (!(r > 0.0)) out_of_range("radius", "must be > 0");
    if (!(r < 0.5)) out_of_range("radius", "must be < 0.5");
  }
  if (samples < 1) out_of_range("samples", "must be >= 1");
  if (cutoff && *cutoff < 1) out_of_range("cutoff", "must be >= 1");
  if (!(cutoff_factor > 0.0)) out_of_range("cutoff_factor", "must be > 0");
  parse_t_grid(t_grid);
  if (ks_tolerance && !(*ks_tolerance > 0.0 && *ks_tolerance <= 1.0)) {
    out_of_range("ks_tolerance", "must lie in (0, 1]");
  }
  if (!(delta_tolerance > 0.0)) out_of_range("delta_tolerance", "must be > 0");
  for (std::size_t i = 1; i < lags.size(); ++i) {
    if (!(lags[i] > lags[i - 1])) out_of_range("lags", "must be strictly increasing");
  }
  if (!(annulus_a > 0.0)) out_of_range("annulus_a", "must be > 0");
  if (!(annulus_b >= 0.0)) out_of_range("annulus_b", "must be >= 0");
  for (double r : rho) {
    if (!(r > 0.0 && r < 0.5)) out_of_range("rho", "must lie in (0, 0.5)");
  }
  if (measure_samples < 1) out_of_range("measure_samples", "must be >= 1");
  if (steps < 1) out_of_range("steps", "must be >= 1");
  if (starts < 1) out_of_range("starts", "must be >= 1");
  if (!(rate_tolerance > 0.0)) out_of_range("rate_tolerance", "must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) out_of_range("alpha", "must lie in (0, 1)");
  Observable::parse(psi);
  Observable::parse(phi);
}

unsigned ExperimentConfig::effective_workers() const {
  return workers == 0 ? default_workers() : workers;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "family=" << to_string(system.family) << "\n"
     << "multiplier=" << system.multiplier << "\n"
     << "beta_min=" << fmt_double(system.beta.lo) << "\n"
     << "beta_max=" << fmt_double(system.beta.hi) << "\n"
     << "epsilon=" << fmt_double(system.epsilon) << "\n"
     << "burn_in=" << system.burn_in << "\n"
     << "target=" << (target ? fmt_double(*target) : "default") << "\n"
     << "radius=" << join(radii) << "\n"
     << "samples=" << samples << "\n"
     << "seed=" << seed << "\n"
     << "cutoff=" << (cutoff ? std::to_string(*cutoff) : "auto") << "\n"
     << "cutoff_factor=" << fmt_double(cutoff_factor) << "\n"
     << "t_grid=" << t_grid << "\n"
     << "ks_tolerance=" << (ks_tolerance ? fmt_double(*ks_tolerance) : "default") << "\n"
     << "k_max=" << k_max << "\n"
     << "delta_tolerance=" << fmt_double(delta_tolerance) << "\n"
     << "psi=" << psi << "\n"
     << "phi=" << phi << "\n"
     << "lags=" << join(lags) << "\n"
     << "p_list=" << join(p_list) << "\n"
     << "annulus_a=" << fmt_double(annulus_a) << "\n"
     << "annulus_b=" << fmt_double(annulus_b) << "\n"
     << "rho=" << join(rho) << "\n"
     << "measure_samples=" << measure_samples << "\n"
     << "steps=" << steps << "\n"
     << "starts=" << starts << "\n"
     << "rate_tolerance=" << fmt_double(rate_tolerance) << "\n"
     << "alpha=" << fmt_double(alpha) << "\n"
     << "empirical=" << (empirical ? "true" : "false") << "\n";
  // Worker count and output directory do not change results.
  return os.str();
}

std::string ExperimentConfig::hash() const {
  return fmt::format("{:016x}", fnv1a64(canonical()));
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(Kind::malformed, "", std::string("config: ") + e.what());
    }
  }

  static const std::map<std::string, std::set<std::string>> kKeys{
      {"system", {"family", "multiplier", "beta_min", "beta_max", "epsilon", "burn_in"}},
      {"experiment",
       {"target", "radius", "samples", "seed", "cutoff", "cutoff_factor", "t_grid", "workers",
        "ks_tolerance", "k_max", "delta_tolerance", "psi", "phi", "lags", "p_list", "annulus_a",
        "annulus_b", "rho", "measure_samples", "steps", "starts", "rate_tolerance", "alpha",
        "empirical"}},
      {"output", {"dir"}},
  };

  for (const auto& [section, body] : tree) {
    auto allowed = kKeys.find(section);
    if (allowed == kKeys.end()) {
      if (body.empty()) {
        throw ConfigError(Kind::unknown_key, section,
                          "key '" + section + "' must appear inside a section");
      }
      throw ConfigError(Kind::unknown_key, section, "unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!allowed->second.count(key)) {
        throw ConfigError(Kind::unknown_key, key,
                          "unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  auto get = [&](const std::string& section, const std::string& key) -> std::optional<std::string> {
    auto child = tree.get_child_optional(pt::ptree::path_type(section + "/" + key, '/'));
    if (!child) return std::nullopt;
    return trim(child->data());
  };

  ExperimentConfig cfg;
  const auto family = get("system", "family");
  if (!family || family->empty()) {
    throw ConfigError(Kind::missing_required, "family", "[system] family is required");
  }
  try {
    cfg.system.family = family_from_string(*family);
  } catch (const InvalidArgument&) {
    throw ConfigError(Kind::out_of_range, "family",
                      "family must be one of affine, markov_skew, theta_skew, beta, perturbed");
  }
  if (auto v = get("system", "multiplier")) {
    const std::uint64_t m = to_u64("multiplier", *v);
    if (m < 2 || m > kMaxExactMultiplier) out_of_range("multiplier", "must lie in [2, 256]");
    cfg.system.multiplier = static_cast<std::uint32_t>(m);
  }
  {
    double lo = cfg.system.beta.lo;
    double hi = cfg.system.beta.hi;
    if (auto v = get("system", "beta_min")) lo = to_double("beta_min", *v);
    if (auto v = get("system", "beta_max")) hi = to_double("beta_max", *v);
    if (hi < lo) out_of_range("beta_max", "must be >= beta_min (empty interval)");
    cfg.system.beta = lo == hi ? ParameterDistribution::point_mass(lo)
                               : ParameterDistribution::uniform_on(lo, hi);
  }
  if (auto v = get("system", "epsilon")) cfg.system.epsilon = to_double("epsilon", *v);
  if (auto v = get("system", "burn_in")) {
    cfg.system.burn_in = static_cast<std::uint32_t>(to_u64("burn_in", *v));
  }

  if (auto v = get("experiment", "target")) cfg.target = to_double("target", *v);
  if (auto v = get("experiment", "radius")) cfg.radii = to_doubles("radius", *v);
  if (auto v = get("experiment", "samples")) cfg.samples = to_u64("samples", *v);
  if (auto v = get("experiment", "seed")) cfg.seed = to_u64("seed", *v);
  if (auto v = get("experiment", "cutoff"); v && *v != "auto") cfg.cutoff = to_u64("cutoff", *v);
  if (auto v = get("experiment", "cutoff_factor")) {
    cfg.cutoff_factor = to_double("cutoff_factor", *v);
  }
  if (auto v = get("experiment", "t_grid")) cfg.t_grid = *v;
  if (auto v = get("experiment", "workers")) {
    cfg.workers = static_cast<unsigned>(to_u64("workers", *v));
  }
  if (auto v = get("experiment", "ks_tolerance")) cfg.ks_tolerance = to_double("ks_tolerance", *v);
  if (auto v = get("experiment", "k_max")) cfg.k_max = to_u64("k_max", *v);
  if (auto v = get("experiment", "delta_tolerance")) {
    cfg.delta_tolerance = to_double("delta_tolerance", *v);
  }
  if (auto v = get("experiment", "psi")) cfg.psi = *v;
  if (auto v = get("experiment", "phi")) cfg.phi = *v;
  if (auto v = get("experiment", "lags")) cfg.lags = to_lags("lags", *v);
  if (auto v = get("experiment", "p_list")) cfg.p_list = to_doubles("p_list", *v);
  if (auto v = get("experiment", "annulus_a")) cfg.annulus_a = to_double("annulus_a", *v);
  if (auto v = get("experiment", "annulus_b")) cfg.annulus_b = to_double("annulus_b", *v);
  if (auto v = get("experiment", "rho")) cfg.rho = to_doubles("rho", *v);
  if (auto v = get("experiment", "measure_samples")) {
    cfg.measure_samples = to_u64("measure_samples", *v);
  }
  if (auto v = get("experiment", "steps")) cfg.steps = to_u64("steps", *v);
  if (auto v = get("experiment", "starts")) cfg.starts = to_u64("starts", *v);
  if (auto v = get("experiment", "rate_tolerance")) {
    cfg.rate_tolerance = to_double("rate_tolerance", *v);
  }
  if (auto v = get("experiment", "alpha")) cfg.alpha = to_double("alpha", *v);
  if (auto v = get("experiment", "empirical")) cfg.empirical = to_bool("empirical", *v);
  if (auto v = get("output", "dir")) cfg.out_dir = *v;

  try {
    Observable::parse(cfg.psi);
  } catch (const InvalidArgument& e) {
    throw ConfigError(Kind::malformed, "psi", std::string("psi: ") + e.what());
  }
  try {
    Observable::parse(cfg.phi);
  } catch (const InvalidArgument& e) {
    throw ConfigError(Kind::malformed, "phi", std::string("phi: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(Kind::malformed, "config", "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hitstat
