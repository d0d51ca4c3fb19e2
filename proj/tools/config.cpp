#include "config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <functional>

namespace charfem::tools {

namespace {

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return value;
}

double parse_real(const std::string& key, const std::string& text) {
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  return parse_number<double>(key, text);
}

int positive(const std::string& key, int v) {
  if (v < 1) throw ConfigError(key + " must be at least 1");
  return v;
}

} // namespace

KeyValues read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("cannot read config: " + std::string(e.what()));
  }
  KeyValues out;
  std::function<void(const boost::property_tree::ptree&)> walk =
      [&](const boost::property_tree::ptree& node) {
        for (const auto& [key, child] : node) {
          if (child.empty()) {
            out[key] = child.data();
          } else {
            walk(child);
          }
        }
      };
  walk(tree);
  return out;
}

void apply(RunConfig& c, const KeyValues& values) {
  for (const auto& [raw_key, value] : values) {
    std::string key = raw_key;
    for (char& ch : key) {
      if (ch == '-') ch = '_';
    }
    if (key == "benchmark") {
      c.benchmark = value;
    } else if (key == "p") {
      c.p = positive(key, parse_number<int>(key, value));
    } else if (key == "rule") {
      c.rule = value;
    } else if (key == "basis") {
      c.basis = value;
    } else if (key == "elements") {
      c.elements = positive(key, parse_number<int>(key, value));
    } else if (key == "partitions") {
      c.partitions = positive(key, parse_number<int>(key, value));
    } else if (key == "levels") {
      c.levels = positive(key, parse_number<int>(key, value));
    } else if (key == "motion") {
      c.motion = value;
    } else if (key == "reconfigure") {
      c.reconfigure = value;
    } else if (key == "dt_ceiling") {
      c.dt_ceiling = parse_real(key, value);
      if (!(c.dt_ceiling > 0.0)) throw ConfigError("dt_ceiling must be positive");
    } else if (key == "t_final") {
      c.t_final = parse_real(key, value);
      if (!(*c.t_final > 0.0) || !std::isfinite(*c.t_final)) {
        throw ConfigError("t_final must be positive and finite");
      }
    } else if (key == "spatial_degree") {
      c.spatial_degree = parse_number<int>(key, value);
      if (c.spatial_degree < 0) throw ConfigError("spatial_degree must be >= 0");
    } else if (key == "out") {
      c.out = value;
    } else if (key == "seed") {
      c.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "threads") {
      c.threads = positive(key, parse_number<int>(key, value));
    } else {
      throw ConfigError("unknown config key '" + raw_key + "'");
    }
  }
}

ReferenceRule parse_rule(const std::string& text, int p) {
  try {
    if (text == "gauss") return gauss_rule(p);
    if (text == "radau") return radau_rule(p);
    if (text.rfind("theta:", 0) == 0) {
      return theta_rule(p, parse_real("rule", text.substr(6)));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("rule: ") + e.what());
  }
  throw ConfigError("unknown rule '" + text + "' (expected gauss, radau or theta:S)");
}

BasisNodePolicy parse_basis(const std::string& text) {
  if (text == "coincident") return BasisNodePolicy::coincident;
  if (text == "equispaced") return BasisNodePolicy::equispaced;
  throw ConfigError("unknown basis policy '" + text + "' (expected coincident or equispaced)");
}

ResolvedRun resolve(const RunConfig& c, int level) {
  Benchmark bm = [&] {
    try {
      return find_benchmark(c.benchmark);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  if (c.t_final) bm.domain.t_final = *c.t_final;
  ReferenceRule rule = parse_rule(c.rule, c.p);
  TimeBasis basis = [&] {
    try {
      return default_basis(rule, parse_basis(c.basis));
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("basis: ") + e.what());
    }
  }();
  const std::string motion_name = c.motion.value_or(bm.motion);
  VelocityField w = [&] {
    try {
      return motion_strategy(parse_motion(motion_name, bm.problem, bm.domain), bm.problem,
                             bm.domain);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }();
  const int scale = 1 << level;
  const int n = c.elements.value_or(bm.elements) * scale;
  const int m = c.partitions.value_or(bm.partitions) * scale;
  const double t_final = bm.domain.t_final;
  return ResolvedRun{std::move(bm), std::move(rule), std::move(basis), std::move(w),
                     motion_name, n, m, t_final};
}

RunOptions run_options(const RunConfig& c, const ResolvedRun& r) {
  RunOptions opt;
  opt.dt_ceiling = c.dt_ceiling;
  opt.spatial_degree = c.spatial_degree;
  if (c.reconfigure == "keep") {
    opt.reconfiguration = keep_policy();
  } else if (c.reconfigure == "uniform") {
    opt.reconfiguration = uniform_policy(r.elements);
  } else if (c.reconfigure.rfind("uniform:", 0) == 0) {
    const int k = positive("reconfigure", parse_number<int>("reconfigure", c.reconfigure.substr(8)));
    opt.reconfiguration = uniform_policy(r.elements, k);
  } else {
    throw ConfigError("unknown reconfigure policy '" + c.reconfigure +
                      "' (expected keep, uniform or uniform:K)");
  }
  return opt;
}

} // namespace charfem::tools
