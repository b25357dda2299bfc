#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "flexpos/control.hpp"
#include "flexpos/errors.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/plant.hpp"
#include "flexpos/signals.hpp"
#include "flexpos/workspace.hpp"

namespace flexpos {

inline constexpr const char* kVersion = "1.0.0";

// Everything a run needs. Defaults reproduce the nominal stage with no user
// input; see README for the JSON schema.
struct Config {
  std::uint64_t seed = 1;
  kinematics::MobilityParams mobility = kinematics::nominal_mobility();
  Jacobian6 jacobian = kinematics::nominal_jacobian();
  Compliance6 compliance = kinematics::nominal_compliance();
  double input_stiffness = kinematics::kNominalInputStiffness;  // N/m
  workspace::InputBox input_box;
  double safe_stroke = kinematics::kSafeInputStroke;  // µm
  plant::ActuatorParams actuator;
  plant::ModalParams modal = plant::unloaded_modes();
  plant::SensorParams sensor;
  control::PidGains gains;
  control::LoopConfig loop;
  signals::WaveformSpec reference;

  plant::PlantConfig plant_config() const { return {jacobian, actuator, modal, sensor}; }
};

namespace config_detail {

using nlohmann::json;

// Reads one JSON object and remembers which keys were consumed so that
// leftovers can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  const json* find(const std::string& k) {
    seen_.insert(k);
    const auto it = j_.find(k);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& k, double& out) {
    if (const json* v = find(k)) out = as_number(*v, key(k));
  }

  void integer(const std::string& k, int& out) {
    if (const json* v = find(k)) {
      if (!v->is_number_integer()) throw ConfigError(key(k), "expected an integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& k, bool& out) {
    if (const json* v = find(k)) {
      if (!v->is_boolean()) throw ConfigError(key(k), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& k, std::string& out) {
    if (const json* v = find(k)) {
      if (!v->is_string()) throw ConfigError(key(k), "expected a string");
      out = v->get<std::string>();
    }
  }

  // A scalar (broadcast to all six) or an array of six numbers.
  void six(const std::string& k, Vector6& out) {
    if (const json* v = find(k)) {
      if (v->is_number()) {
        out.setConstant(as_number(*v, key(k)));
        return;
      }
      const auto vals = numbers(*v, key(k), 6);
      for (Eigen::Index i = 0; i < 6; ++i) out[i] = vals[static_cast<std::size_t>(i)];
    }
  }

  std::vector<double> numbers(const json& v, const std::string& full_key, std::size_t n) {
    if (!v.is_array() || v.size() != n)
      throw ConfigError(full_key, "expected an array of " + std::to_string(n) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(as_number(v[i], full_key + "[" + std::to_string(i) + "]"));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

  static double as_number(const json& v, const std::string& full_key) {
    if (!v.is_number()) throw ConfigError(full_key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(full_key, "must be finite");
    return d;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

// Runs a component validator and re-raises its complaint under `key`.
inline void check(const std::string& key, const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key, e.what());
  }
}

inline json six_json(const Vector6& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < 6; ++i) a.push_back(v[i]);
  return a;
}

inline json six_json(const Vec6<ActuatorTag>& v) { return six_json(v.vec()); }

inline std::vector<Axis> parse_axes(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) throw ConfigError(key, "expected a non-empty array of axis names");
  std::vector<Axis> out;
  for (const auto& a : v) {
    if (!a.is_string()) throw ConfigError(key, "axis names must be strings");
    check(key, [&] { out.push_back(axis_from_name(a.get<std::string>())); });
  }
  return out;
}

}  // namespace config_detail

inline Config parse_config(const nlohmann::json& root) {
  using config_detail::check;
  using config_detail::Reader;
  Config c;
  if (root.is_null()) return c;
  Reader r(root, "");

  if (const auto* v = r.find("seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0))
      throw ConfigError("seed", "expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }

  if (const auto* v = r.find("mobility")) {
    Reader m(*v, "mobility");
    m.integer("lambda", c.mobility.lambda);
    m.integer("n_links", c.mobility.n_links);
    if (const auto* j = m.find("joints")) {
      if (!j->is_array()) throw ConfigError("mobility.joints", "expected an array of integers");
      c.mobility.joints.clear();
      for (const auto& e : *j) {
        if (!e.is_number_integer()) throw ConfigError("mobility.joints", "expected integers");
        c.mobility.joints.push_back(e.get<int>());
      }
    }
    m.finish();
    check("mobility", [&] { c.mobility.validate(); });
  }

  if (const auto* v = r.find("jacobian")) {
    const auto vals = r.numbers(*v, "jacobian", 36);
    c.jacobian = Jacobian6::from_row_major(vals);
    if (!c.jacobian.invertible())
      throw ConfigError("jacobian", "matrix is singular or ill-conditioned (condition number " +
                                        std::to_string(c.jacobian.condition_number()) + ")");
  }
  if (const auto* v = r.find("compliance")) c.compliance = Compliance6::from_row_major(r.numbers(*v, "compliance", 36));
  check("compliance", [&] {
    const auto rep = kinematics::validate_compliance(c.compliance);
    if (!rep.positive_diagonal) throw ValidationError("diagonal entries must be > 0");
    if (!rep.symmetric) throw ValidationError("relative asymmetry " + std::to_string(rep.max_asymmetry) + " exceeds 0.05");
  });

  r.number("input_stiffness_n_per_m", c.input_stiffness);
  if (!(c.input_stiffness > 0.0)) throw ConfigError("input_stiffness_n_per_m", "must be > 0");
  r.number("safe_stroke_um", c.safe_stroke);
  if (!(c.safe_stroke > 0.0)) throw ConfigError("safe_stroke_um", "must be > 0");

  if (const auto* v = r.find("input_box_um")) {
    Reader b(*v, "input_box_um");
    Vector6 lo = c.input_box.lo.vec(), hi = c.input_box.hi.vec();
    b.six("lo", lo);
    b.six("hi", hi);
    b.finish();
    c.input_box = {ActuatorVec6(lo), ActuatorVec6(hi)};
  }
  check("input_box_um", [&] { c.input_box.validate(c.safe_stroke); });

  if (const auto* v = r.find("actuator")) {
    Reader a(*v, "actuator");
    a.number("v_min", c.actuator.v_min);
    a.number("v_max", c.actuator.v_max);
    a.number("stroke_um", c.actuator.stroke);
    a.number("bw_alpha", c.actuator.bw_alpha);
    a.number("bw_beta", c.actuator.bw_beta);
    a.number("bw_gamma", c.actuator.bw_gamma);
    a.number("bw_n", c.actuator.bw_n);
    a.finish();
  }
  check("actuator", [&] { c.actuator.validate(); });

  if (const auto* v = r.find("modal")) {
    Reader m(*v, "modal");
    m.six("freq_hz", c.modal.freq_hz);
    m.six("damping", c.modal.damping);
    m.finish();
  }
  check("modal", [&] { c.modal.validate(); });

  if (const auto* v = r.find("sensor")) {
    Reader s(*v, "sensor");
    s.six("noise_std", c.sensor.noise_std);
    s.integer("adc_bits", c.sensor.adc_bits);
    s.six("range", c.sensor.range);
    s.finish();
    if (c.sensor.adc_bits < 8 || c.sensor.adc_bits > 24) throw ConfigError("sensor.adc_bits", "must be in [8, 24]");
  }
  check("sensor", [&] { c.sensor.validate(); });

  if (const auto* v = r.find("controller")) {
    Reader g(*v, "controller");
    g.six("kp", c.gains.kp);
    g.six("ki", c.gains.ki);
    g.six("kd", c.gains.kd);
    if (const auto* lim = g.find("v_limits")) {
      const auto vals = g.numbers(*lim, "controller.v_limits", 2);
      c.gains.v_lo = vals[0];
      c.gains.v_hi = vals[1];
    }
    std::string aw = c.gains.anti_windup == control::AntiWindup::conditional ? "conditional" : "none";
    g.string("anti_windup", aw);
    if (aw == "conditional") c.gains.anti_windup = control::AntiWindup::conditional;
    else if (aw == "none") c.gains.anti_windup = control::AntiWindup::none;
    else throw ConfigError("controller.anti_windup", "expected \"conditional\" or \"none\"");
    std::string mode = c.loop.mode == control::Mode::task ? "task" : "actuator";
    g.string("mode", mode);
    if (mode == "task") c.loop.mode = control::Mode::task;
    else if (mode == "actuator") c.loop.mode = control::Mode::actuator;
    else throw ConfigError("controller.mode", "expected \"task\" or \"actuator\"");
    g.number("derivative_filter_s", c.gains.derivative_tau);
    g.finish();
  }
  check("controller", [&] { c.gains.validate(); });

  if (const auto* v = r.find("loop")) {
    Reader l(*v, "loop");
    l.number("control_rate_hz", c.loop.control_rate_hz);
    l.number("sim_dt_s", c.loop.sim_dt);
    l.number("operating_voltage", c.loop.operating_voltage);
    l.finish();
  }
  check("loop", [&] {
    c.loop.validate();
    plant::check_structure_dt(c.modal, c.loop.sim_dt);
  });

  if (const auto* v = r.find("reference")) {
    Reader w(*v, "reference");
    std::string kind = signals::kind_name(c.reference.kind);
    w.string("kind", kind);
    check("reference.kind", [&] { c.reference.kind = signals::kind_from_name(kind); });
    if (const auto* a = w.find("axes")) c.reference.axes = config_detail::parse_axes(*a, "reference.axes");
    Vector6 amp = c.reference.amplitude.vec();
    w.six("amplitude", amp);
    c.reference.amplitude = Pose6(amp);
    w.number("freq_hz", c.reference.freq_hz);
    w.number("duration_s", c.reference.duration_s);
    w.integer("petals", c.reference.petals);
    w.number("third_amplitude", c.reference.third_amplitude);
    w.number("f0_hz", c.reference.f0_hz);
    w.number("f1_hz", c.reference.f1_hz);
    w.number("period_s", c.reference.period_s);
    w.integer("n_steps", c.reference.n_steps);
    w.boolean("ascent_only", c.reference.ascent_only);
    w.finish();
  }
  check("reference", [&] { c.reference.validate(); });

  r.finish();
  return c;
}

inline Config parse_config_text(const std::string& text) {
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) return Config{};
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<document>", std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Fully explicit JSON form; every field is written.
inline nlohmann::json to_json(const Config& c) {
  using config_detail::six_json;
  nlohmann::json j;
  j["seed"] = c.seed;
  j["mobility"] = {{"lambda", c.mobility.lambda}, {"n_links", c.mobility.n_links}, {"joints", c.mobility.joints}};
  j["jacobian"] = c.jacobian.row_major();
  j["compliance"] = c.compliance.row_major();
  j["input_stiffness_n_per_m"] = c.input_stiffness;
  j["safe_stroke_um"] = c.safe_stroke;
  j["input_box_um"] = {{"lo", six_json(c.input_box.lo)}, {"hi", six_json(c.input_box.hi)}};
  j["actuator"] = {{"v_min", c.actuator.v_min},       {"v_max", c.actuator.v_max},
                   {"stroke_um", c.actuator.stroke},  {"bw_alpha", c.actuator.bw_alpha},
                   {"bw_beta", c.actuator.bw_beta},   {"bw_gamma", c.actuator.bw_gamma},
                   {"bw_n", c.actuator.bw_n}};
  j["modal"] = {{"freq_hz", six_json(c.modal.freq_hz)}, {"damping", six_json(c.modal.damping)}};
  j["sensor"] = {{"noise_std", six_json(c.sensor.noise_std)},
                 {"adc_bits", c.sensor.adc_bits},
                 {"range", six_json(c.sensor.range)}};
  j["controller"] = {{"kp", six_json(c.gains.kp)},
                     {"ki", six_json(c.gains.ki)},
                     {"kd", six_json(c.gains.kd)},
                     {"v_limits", {c.gains.v_lo, c.gains.v_hi}},
                     {"anti_windup", c.gains.anti_windup == control::AntiWindup::conditional ? "conditional" : "none"},
                     {"mode", c.loop.mode == control::Mode::task ? "task" : "actuator"},
                     {"derivative_filter_s", c.gains.derivative_tau}};
  j["loop"] = {{"control_rate_hz", c.loop.control_rate_hz},
               {"sim_dt_s", c.loop.sim_dt},
               {"operating_voltage", c.loop.operating_voltage}};
  nlohmann::json axes = nlohmann::json::array();
  for (Axis a : c.reference.axes) axes.push_back(std::string(kAxisNames[index(a)]));
  j["reference"] = {{"kind", signals::kind_name(c.reference.kind)},
                    {"axes", axes},
                    {"amplitude", six_json(c.reference.amplitude.vec())},
                    {"freq_hz", c.reference.freq_hz},
                    {"duration_s", c.reference.duration_s},
                    {"petals", c.reference.petals},
                    {"third_amplitude", c.reference.third_amplitude},
                    {"f0_hz", c.reference.f0_hz},
                    {"f1_hz", c.reference.f1_hz},
                    {"period_s", c.reference.period_s},
                    {"n_steps", c.reference.n_steps},
                    {"ascent_only", c.reference.ascent_only}};
  return j;
}

// Canonical text: sorted keys (nlohmann objects are ordered maps), no
// whitespace, shortest round-trip number formatting.
inline std::string serialize(const Config& c) { return to_json(c).dump(); }

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string config_hash(const Config& c) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(serialize(c));
  return os.str();
}

struct RunManifest {
  std::string subcommand;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::string timestamp;  // UTC, ISO 8601

  nlohmann::json to_json() const {
    return {{"subcommand", subcommand}, {"config_hash", config_hash}, {"seed", seed},
            {"version", version},       {"timestamp", timestamp}};
  }
};

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline RunManifest make_manifest(const std::string& subcommand, const Config& c) {
  return {subcommand, config_hash(c), c.seed, kVersion, utc_timestamp()};
}

}  // namespace flexpos
