#include "elsg/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "elsg/errors.hpp"
#include "elsg/util.hpp"

namespace elsg {
namespace {

[[noreturn]] void bad_value(int line, const std::string& key, const std::string& value,
                            const std::string& why) {
  // line 0 marks a value re-parsed after load, where line numbers are meaningless
  const std::string at = line > 0 ? "line " + std::to_string(line) + ": " : "";
  throw ConfigError(at + "bad value '" + value + "' for '" + key + "': " + why);
}

double to_double(int line, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double x = 0;
  try {
    x = std::stod(value, &pos);
  } catch (const std::exception&) {
    bad_value(line, key, value, "expected a number");
  }
  if (pos != value.size()) bad_value(line, key, value, "trailing characters after number");
  if (!std::isfinite(x)) bad_value(line, key, value, "must be finite");
  return x;
}

int to_int(int line, const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  long long x = 0;
  try {
    x = std::stoll(value, &pos);
  } catch (const std::exception&) {
    bad_value(line, key, value, "expected an integer");
  }
  if (pos != value.size()) bad_value(line, key, value, "trailing characters after integer");
  if (x < -1000000000LL || x > 1000000000LL) bad_value(line, key, value, "out of range");
  return static_cast<int>(x);
}

Eigen::VectorXd to_vector(int line, const std::string& key, const std::string& value) {
  std::vector<std::string> parts = split_ws(value);
  if (parts.empty()) bad_value(line, key, value, "expected one or more numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = to_double(line, key, parts[i]);
  return v;
}

std::string vector_text(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_g17(v(i));
  }
  return out;
}

struct KeySpec {
  const char* name;
  std::function<void(RunConfig&, const std::string&, int)> set;
  std::function<std::optional<std::string>(const RunConfig&)> get;
};

KeySpec str_key(const char* name, std::optional<std::string> RunConfig::*field) {
  return {name,
          [field](RunConfig& c, const std::string& v, int) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

KeySpec dbl_key(const char* name, std::optional<double> RunConfig::*field) {
  return {name,
          [field, name](RunConfig& c, const std::string& v, int line) {
            c.*field = to_double(line, name, v);
          },
          [field](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*field)) return std::nullopt;
            return format_g17(*(c.*field));
          }};
}

KeySpec int_key(const char* name, std::optional<int> RunConfig::*field) {
  return {name,
          [field, name](RunConfig& c, const std::string& v, int line) {
            c.*field = to_int(line, name, v);
          },
          [field](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*field)) return std::nullopt;
            return std::to_string(*(c.*field));
          }};
}

KeySpec vec_key(const char* name, std::optional<Eigen::VectorXd> RunConfig::*field) {
  return {name,
          [field, name](RunConfig& c, const std::string& v, int line) {
            c.*field = to_vector(line, name, v);
          },
          [field](const RunConfig& c) -> std::optional<std::string> {
            if (!(c.*field)) return std::nullopt;
            return vector_text(*(c.*field));
          }};
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      str_key("scenario", &RunConfig::scenario),
      str_key("controller", &RunConfig::controller),
      str_key("alpha", &RunConfig::alpha),
      str_key("beta", &RunConfig::beta),
      str_key("mass_mode", &RunConfig::mass_mode),
      dbl_key("l1", &RunConfig::l1),
      dbl_key("l2", &RunConfig::l2),
      dbl_key("m1", &RunConfig::m1),
      dbl_key("m2", &RunConfig::m2),
      vec_key("damping", &RunConfig::damping),
      dbl_key("gravity", &RunConfig::gravity),
      str_key("map", &RunConfig::map),
      vec_key("map_center", &RunConfig::map_center),
      vec_key("map_plane", &RunConfig::map_plane),
      dbl_key("map_sign", &RunConfig::map_sign),
      vec_key("native_q_min", &RunConfig::native_q_min),
      vec_key("native_q_max", &RunConfig::native_q_max),
      vec_key("q_min", &RunConfig::q_min),
      vec_key("q_max", &RunConfig::q_max),
      vec_key("v_max", &RunConfig::v_max),
      vec_key("u_max", &RunConfig::u_max),
      vec_key("ref_amplitude", &RunConfig::ref_amplitude),
      vec_key("ref_omega", &RunConfig::ref_omega),
      vec_key("ref_offset", &RunConfig::ref_offset),
      vec_key("x0_q", &RunConfig::x0_q),
      vec_key("x0_v", &RunConfig::x0_v),
      dbl_key("delta0", &RunConfig::delta0),
      dbl_key("eta0", &RunConfig::eta0),
      dbl_key("epsilon_fraction", &RunConfig::epsilon_fraction),
      int_key("grid_per_axis", &RunConfig::grid_per_axis),
      int_key("delta_grid", &RunConfig::delta_grid),
      str_key("gamma_rule", &RunConfig::gamma_rule),
      str_key("nu_rule", &RunConfig::nu_rule),
      dbl_key("T", &RunConfig::T),
      dbl_key("duration", &RunConfig::duration),
      int_key("substeps", &RunConfig::substeps),
      str_key("sampling_margin", &RunConfig::sampling_margin),
      dbl_key("gamma", &RunConfig::gamma),
      dbl_key("nu", &RunConfig::nu),
      dbl_key("delta", &RunConfig::delta),
      dbl_key("eta_bar", &RunConfig::eta_bar),
      str_key("trace_out", &RunConfig::trace_out),
      str_key("plots_out", &RunConfig::plots_out),
      str_key("report_out", &RunConfig::report_out),
  };
  return table;
}

const KeySpec* find_key(const std::string& name) {
  for (const KeySpec& k : key_table())
    if (name == k.name) return &k;
  return nullptr;
}

Planar2Dof::MassMode parse_mass_mode(const std::string& token) {
  if (token == "point-mass-at-tip") return Planar2Dof::MassMode::kPointMassTip;
  if (token == "uniform-rod") return Planar2Dof::MassMode::kUniformRod;
  throw ConfigError("unknown mass_mode '" + token +
                    "' (expected point-mass-at-tip or uniform-rod)");
}

Eigen::Vector2d as_vec2(const Eigen::VectorXd& v, const std::string& key) {
  if (v.size() != 2) throw ConfigError("'" + key + "' must have exactly 2 entries");
  return Eigen::Vector2d(v(0), v(1));
}

void require_size(const std::optional<Eigen::VectorXd>& v, Eigen::Index n,
                  const std::string& key) {
  if (v && v->size() != n)
    throw ConfigError("'" + key + "' must have " + std::to_string(n) + " entries");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key: value', got '" +
                        line + "'");
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": missing key before ':'");
    if (value.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": missing value for '" + key + "'");
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second)
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    spec->set(cfg, value, line_no);
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string emit_config(const RunConfig& cfg) {
  std::string out;
  for (const KeySpec& k : key_table()) {
    std::optional<std::string> v = k.get(cfg);
    if (v) {
      out += k.name;
      out += ": ";
      out += *v;
      out += '\n';
    }
  }
  return out;
}

ResolvedRun resolve(const RunConfig& cfg) {
  ResolvedRun out;
  ScenarioDefinition def;
  if (cfg.scenario) {
    def = make_scenario(*cfg.scenario);
  } else {
    def.id = "custom";
  }

  // Rebuild the plant from the effective values so overrides always stick.
  Planar2Dof::Params ap = def.arm ? def.arm->params() : Planar2Dof::Params{};
  if (cfg.mass_mode) ap.mass_mode = parse_mass_mode(*cfg.mass_mode);
  if (cfg.l1) ap.l1 = *cfg.l1;
  if (cfg.l2) ap.l2 = *cfg.l2;
  if (cfg.m1) ap.m1 = *cfg.m1;
  if (cfg.m2) ap.m2 = *cfg.m2;
  if (!(ap.l1 > 0 && ap.l2 > 0 && ap.m1 > 0 && ap.m2 > 0))
    throw ConfigError("link lengths and masses must be positive");
  if (cfg.damping) ap.damping = as_vec2(*cfg.damping, "damping");
  if ((ap.damping.array() < 0).any()) throw ConfigError("damping must be nonnegative");
  if (cfg.gravity) ap.gravity = *cfg.gravity;
  auto arm = std::make_shared<Planar2Dof>(ap);
  def.arm = arm;

  MapSpec ms = def.map;
  if (cfg.map) {
    if (*cfg.map == "none")
      ms.enabled = false;
    else if (*cfg.map == "ellipse-plane")
      ms.enabled = true;
    else
      throw ConfigError("unknown map '" + *cfg.map + "' (expected none or ellipse-plane)");
  }
  if (cfg.map_center) ms.center = as_vec2(*cfg.map_center, "map_center");
  if (cfg.map_plane) ms.plane = as_vec2(*cfg.map_plane, "map_plane");
  if (cfg.map_sign) {
    if (*cfg.map_sign != 1.0 && *cfg.map_sign != -1.0)
      throw ConfigError("map_sign must be 1 or -1");
    ms.sign = *cfg.map_sign;
  }
  if (cfg.native_q_min) ms.native_box.lo = as_vec2(*cfg.native_q_min, "native_q_min");
  if (cfg.native_q_max) ms.native_box.hi = as_vec2(*cfg.native_q_max, "native_q_max");
  def.map = ms;
  if (ms.enabled) {
    if (ms.plane.norm() == 0.0) throw ConfigError("map_plane must be nonzero");
    if (ms.native_box.lo.size() != 2 || ms.native_box.hi.size() != 2)
      throw ConfigError("an ellipse-plane map needs native_q_min and native_q_max");
    if (((ms.native_box.hi - ms.native_box.lo).array() <= 0).any())
      throw ConfigError("native position box is degenerate");
    def.model = std::make_shared<TransformedSystem>(
        arm, ellipse_plane_map(ms.center, ms.plane, ms.sign), ms.native_box);
  } else {
    def.model = arm;
  }

  if (cfg.q_min) def.spec.q_min = *cfg.q_min;
  if (cfg.q_max) def.spec.q_max = *cfg.q_max;
  if (cfg.v_max) def.spec.v_max = *cfg.v_max;
  if (cfg.u_max) def.spec.u_max = *cfg.u_max;
  if (!cfg.scenario) {
    const std::pair<const Eigen::VectorXd*, const char*> required[] = {
        {&def.spec.q_min, "q_min"},
        {&def.spec.q_max, "q_max"},
        {&def.spec.v_max, "v_max"},
        {&def.spec.u_max, "u_max"}};
    for (const auto& [vec, name] : required)
      if (vec->size() == 0) throw ConfigError(std::string("custom runs need '") + name + "'");
  }
  def.spec.validate();
  if (def.spec.dof() != def.model->dof())
    throw ConfigError("constraint box dimension does not match the model");
  if (def.spec.input_dim() != def.model->input_dim())
    throw ConfigError("u_max dimension does not match the model input");

  if (cfg.alpha) def.alpha = ClassKFn::parse(*cfg.alpha);
  if (cfg.beta) def.beta = ClassKFn::parse(*cfg.beta);

  const Eigen::Index n = def.model->dof();
  if (cfg.ref_amplitude) def.reference.amplitude = *cfg.ref_amplitude;
  if (cfg.ref_omega) def.reference.omega = *cfg.ref_omega;
  if (cfg.ref_offset) def.reference.offset = *cfg.ref_offset;
  if (def.reference.amplitude.size() == 0) def.reference.amplitude = Eigen::VectorXd::Zero(n);
  if (def.reference.omega.size() == 0) def.reference.omega = Eigen::VectorXd::Zero(n);
  if (def.reference.offset.size() == 0) def.reference.offset = Eigen::VectorXd::Zero(n);
  def.reference.validate();
  if (def.reference.amplitude.size() != n)
    throw ConfigError("reference dimension does not match the model");

  if (cfg.x0_q) def.x0_q = *cfg.x0_q;
  if (cfg.x0_v) def.x0_v = *cfg.x0_v;
  if (def.x0_q.size() == 0) throw ConfigError("missing initial position 'x0_q'");
  if (def.x0_v.size() == 0) def.x0_v = Eigen::VectorXd::Zero(n);
  require_size(std::optional<Eigen::VectorXd>(def.x0_q), n, "x0_q");
  require_size(std::optional<Eigen::VectorXd>(def.x0_v), n, "x0_v");

  if (cfg.delta0) {
    if (*cfg.delta0 < 0) throw ConfigError("delta0 must be nonnegative");
    def.delta0 = *cfg.delta0;
  }
  if (cfg.eta0) {
    if (*cfg.eta0 < 0) throw ConfigError("eta0 must be nonnegative");
    def.eta0 = *cfg.eta0;
  }

  if (cfg.epsilon_fraction) {
    if (!(*cfg.epsilon_fraction > 0 && *cfg.epsilon_fraction < 1))
      throw ConfigError("epsilon_fraction must lie in (0, 1)");
    out.synth.epsilon_fraction = *cfg.epsilon_fraction;
  }
  if (cfg.grid_per_axis) {
    if (*cfg.grid_per_axis < 2) throw ConfigError("grid_per_axis must be at least 2");
    out.synth.grid_per_axis = *cfg.grid_per_axis;
  }
  if (cfg.delta_grid) {
    if (*cfg.delta_grid < 2) throw ConfigError("delta_grid must be at least 2");
    out.synth.delta_grid = *cfg.delta_grid;
  }
  if (cfg.gamma_rule) {
    const std::string& r = *cfg.gamma_rule;
    if (r == "max-gamma") {
      out.synth.policy.gamma_rule = GammaRule::kMaxGamma;
      out.synth.policy.gamma_fraction = 1.0;
    } else if (r.rfind("fraction:", 0) == 0) {
      double f = to_double(0, "gamma_rule", r.substr(9));
      if (!(f > 0 && f <= 1)) throw ConfigError("gamma_rule fraction must lie in (0, 1]");
      out.synth.policy.gamma_rule = GammaRule::kFraction;
      out.synth.policy.gamma_fraction = f;
    } else {
      throw ConfigError("unknown gamma_rule '" + r + "' (expected max-gamma or fraction:<f>)");
    }
  }
  if (cfg.nu_rule) {
    const std::string& r = *cfg.nu_rule;
    if (r == "nu1")
      out.synth.policy.nu_rule = NuRule::kNu1;
    else if (r == "nu2")
      out.synth.policy.nu_rule = NuRule::kNu2;
    else if (r == "midpoint-log")
      out.synth.policy.nu_rule = NuRule::kMidpointLog;
    else
      throw ConfigError("unknown nu_rule '" + r + "' (expected nu1, nu2 or midpoint-log)");
  }

  if (cfg.T) {
    if (!(*cfg.T > 0)) throw ConfigError("T must be positive");
    def.T = *cfg.T;
  }
  if (cfg.duration) {
    if (*cfg.duration < 0) throw ConfigError("duration must be nonnegative");
    def.duration = *cfg.duration;
  }
  if (cfg.substeps) {
    if (*cfg.substeps < 1) throw ConfigError("substeps must be at least 1");
    def.substeps = *cfg.substeps;
  }
  if (cfg.sampling_margin) {
    const std::string& r = *cfg.sampling_margin;
    if (r == "eta-of-T") {
      def.margin_rule = MarginRule::kEtaOfT;
      def.margin_value = 0.0;
    } else if (r == "eta-bar") {
      def.margin_rule = MarginRule::kEtaBar;
      def.margin_value = 0.0;
    } else {
      double x = to_double(0, "sampling_margin", r);
      if (x < 0) throw ConfigError("a numeric sampling_margin must be nonnegative");
      def.margin_rule = MarginRule::kNumber;
      def.margin_value = x;
    }
  }

  out.mode =
      cfg.controller ? parse_controller_mode(*cfg.controller) : def.default_mode;

  const bool any_param = cfg.gamma || cfg.nu || cfg.delta || cfg.eta_bar;
  const bool full_param = cfg.gamma && cfg.nu && cfg.delta;
  if (any_param && !full_param)
    throw ConfigError("gamma, nu and delta must be given together (eta_bar is optional)");
  if (full_param) {
    ZcbfParams p;
    p.gamma = *cfg.gamma;
    p.nu = *cfg.nu;
    p.delta = *cfg.delta;
    p.eta_bar = cfg.eta_bar.value_or(0.0);
    if (!(p.gamma > 0) || !(p.nu > 0) || p.delta < 0 || p.eta_bar < 0)
      throw ConfigError("gamma and nu must be positive; delta and eta_bar nonnegative");
    out.params = p;
  }

  out.trace_out = cfg.trace_out;
  out.plots_out = cfg.plots_out;
  out.report_out = cfg.report_out;
  out.def = std::move(def);
  return out;
}

}  // namespace elsg
