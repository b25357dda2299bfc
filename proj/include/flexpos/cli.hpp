#pragma once

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "flexpos/config.hpp"
#include "flexpos/experiments.hpp"
#include "flexpos/kinematics.hpp"
#include "flexpos/workspace.hpp"

// Command-line front end: one executable, one subcommand per experiment.
namespace flexpos::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kNumericalError = 3, kUsageError = 4 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"mobility",   "workspace",  "fit-jacobian", "simulate",
                                              "resolution", "hysteresis", "freq-response"};
  return names;
}

// Subcommand-specific overrides. Unset optionals keep the config value or the
// experiment default.
struct Flags {
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> freq;
  std::optional<double> amplitude;
  std::optional<double> duration;
  std::optional<std::string> axes;  // comma separated, e.g. "x,y"
  std::optional<std::string> waveform;
  // resolution
  double noise_scale = 1.0;
  std::optional<double> period;
  // hysteresis
  int cycles = 3;
  // freq-response
  std::optional<double> f0;
  std::optional<double> f1;
  // fit-jacobian
  std::size_t samples = 100;
  double noise = 0.1;
  std::string samples_path;
};

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

// Shortest round-trip-safe text for CSV cells; locale independent.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline std::string axis_name(Axis a) { return std::string(kAxisNames[index(a)]); }
inline std::string unit(Axis a) { return std::string(kAxisUnits[index(a)]); }
inline std::string channel(Axis a) { return axis_name(a) + "_" + unit(a); }

inline std::vector<Axis> parse_axis_list(const std::string& text) {
  std::vector<Axis> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(axis_from_name(item));
    } catch (const ValidationError& e) {
      throw UsageError(std::string("--axes: ") + e.what());
    }
  }
  if (out.empty()) throw UsageError("--axes: no axes given");
  return out;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : path_(path), out_(path), columns_(header.size()) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    row(header);
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_)
      throw std::logic_error(path_.string() + ": row has " + std::to_string(cells.size()) + " cells, header has " +
                             std::to_string(columns_));
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

// time_s, ref_*, true_*, meas_*, err_*, v1_V..v6_V, flags
inline void write_run_csv(const std::filesystem::path& path, const control::RunRecord& r) {
  std::vector<std::string> header{"time_s"};
  for (const char* prefix : {"ref_", "true_", "meas_", "err_"})
    for (Axis a : kAllAxes) header.push_back(prefix + channel(a));
  for (int i = 1; i <= 6; ++i) header.push_back("v" + std::to_string(i) + "_V");
  header.insert(header.end(), {"cmd_saturated", "sensor_saturated", "hysteresis_bound"});
  CsvWriter csv(path, header);
  std::vector<std::string> cells;
  for (std::size_t i = 0; i < r.size(); ++i) {
    cells.clear();
    cells.push_back(num(r.reference.time(i)));
    for (const PoseSeries* s : {&r.reference, &r.truth, &r.measured, &r.error})
      for (std::size_t k = 0; k < 6; ++k) cells.push_back(num((*s)[i][k]));
    for (std::size_t k = 0; k < 6; ++k) cells.push_back(num(r.voltage[i][k]));
    cells.push_back(std::to_string(r.command_saturated[i]));
    cells.push_back(std::to_string(r.sensor_saturated[i]));
    cells.push_back(std::to_string(r.hysteresis_bound[i]));
    csv.row(cells);
  }
}

// Text goes to the console and to summary.txt in the output directory.
class Report {
 public:
  explicit Report(std::ostream& console) : console_(console) {}
  template <class T>
  Report& operator<<(const T& v) {
    console_ << v;
    text_ << v;
    return *this;
  }
  std::string text() const { return text_.str(); }

 private:
  std::ostream& console_;
  std::ostringstream text_;
};

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

namespace detail {

using std::filesystem::path;

inline void print_vector(Report& rep, const std::string& label, const Vector6& v, int digits) {
  rep << label;
  for (Axis a : kAllAxes) rep << "  " << axis_name(a) << " " << fixed(v[static_cast<Eigen::Index>(index(a))], digits);
  rep << "\n";
}

inline void mobility(const Config& c, Report& rep) {
  rep << "links " << c.mobility.n_links << ", joints " << c.mobility.joints.size() << ", lambda " << c.mobility.lambda
      << "\n";
  rep << "DOF = " << kinematics::mobility(c.mobility) << "\n";
}

inline void workspace(const Config& c, const path& out, Report& rep) {
  const auto s = workspace::summarize(c.jacobian, c.input_box);
  rep << "translation ranges [um]: x " << fixed(s.ranges[0].width(), 2) << "  y " << fixed(s.ranges[1].width(), 2)
      << "  z " << fixed(s.ranges[2].width(), 2) << "\n";
  rep << "rotation ranges [urad]: rx " << fixed(s.ranges[3].width(), 1) << "  ry " << fixed(s.ranges[4].width(), 1)
      << "  rz " << fixed(s.ranges[5].width(), 1) << "\n";
  if (s.amplification[0] > 0.0)
    rep << "amplification: x " << fixed(s.amplification[0], 3) << "  y " << fixed(s.amplification[1], 3) << "  z "
        << fixed(s.amplification[2], 3) << "\n";
  rep << "translational volume [um^3]: " << num(s.translational_volume) << "\n";
  rep << "rotational volume [urad^3]: " << num(s.rotational_volume) << "\n";

  const double stroke = c.input_box.widths().vec().maxCoeff();
  rep << "actuator force for " << fixed(stroke, 1) << " um input stroke [N]: "
      << fixed(kinematics::required_actuator_force(c.input_stiffness, stroke), 1) << "\n";
  const auto cr = kinematics::validate_compliance(c.compliance);
  rep << "compliance: symmetric " << (cr.symmetric ? "yes" : "no") << " (max asymmetry " << num(cr.max_asymmetry)
      << "), positive diagonal " << (cr.positive_diagonal ? "yes" : "no") << "\n";
  if (cr.ok()) {
    Vector6 d;
    for (Axis a : kAllAxes) {
      const auto p = kinematics::output_deflection(c.compliance, Wrench6::unit(a));
      d[static_cast<Eigen::Index>(index(a))] = p[a];
    }
    print_vector(rep, "deflection per unit load [um/N, urad/(N m)]:", d, 4);
  }

  // Shapes only: each polygon is centred on its own centroid.
  CsvWriter csv(out / "workspace_polygons.csv", {"plane", "vertex_index", "u", "v"});
  for (const auto& poly : s.projections) {
    const Eigen::Vector2d o = poly.centroid();
    for (std::size_t i = 0; i < poly.vertices.size(); ++i) {
      const Eigen::Vector2d p = poly.vertices[i] - o;
      csv.row({poly.label, std::to_string(i), num(p.x()), num(p.y())});
    }
  }
}

inline void fit_jacobian(const Config& c, const Flags& f, const path& out, Report& rep) {
  std::vector<kinematics::JacobianSample> samples;
  if (!f.samples_path.empty()) {
    samples = experiments::read_samples_csv(f.samples_path);
    rep << "samples: " << samples.size() << " from " << f.samples_path << "\n";
  } else {
    samples = experiments::synthetic_samples(c, {f.samples, f.noise});
    rep << "samples: " << samples.size() << " synthetic, noise std " << num(f.noise) << "\n";
  }
  std::vector<std::string> header;
  for (int i = 1; i <= 6; ++i) header.push_back("u" + std::to_string(i) + "_um");
  for (Axis a : kAllAxes) header.push_back(channel(a));
  CsvWriter sc(out / "jacobian_samples.csv", header);
  for (const auto& s : samples) {
    std::vector<std::string> cells;
    for (std::size_t i = 0; i < 6; ++i) cells.push_back(num(s.input[i]));
    for (std::size_t k = 0; k < 6; ++k) cells.push_back(num(s.output[k]));
    sc.row(cells);
  }

  const auto fit = kinematics::fit_jacobian(samples);
  const Matrix6 diff = fit.jacobian.matrix() - c.jacobian.matrix();
  rep << "fitted Jacobian:\n";
  for (int r = 0; r < 6; ++r) {
    rep << " ";
    for (int k = 0; k < 6; ++k) rep << " " << std::setw(10) << fixed(fit.jacobian.matrix()(r, k), 5);
    rep << "\n";
  }
  rep << "max |fit - configured|: " << num(diff.cwiseAbs().maxCoeff()) << "\n";
  rep << "max std error: " << num(fit.std_error.maxCoeff()) << "\n";
  print_vector(rep, "rms residual:", fit.rms_residual.vec(), 5);

  CsvWriter csv(out / "jacobian_fit.csv", {"row", "col", "unit", "fitted", "std_error", "configured"});
  for (int r = 0; r < 6; ++r)
    for (int k = 0; k < 6; ++k)
      csv.row({std::to_string(r + 1), std::to_string(k + 1), unit(static_cast<Axis>(r)) + "_per_um",
               num(fit.jacobian.matrix()(r, k)), num(fit.std_error(r, k)), num(c.jacobian.matrix()(r, k))});
}

inline signals::WaveformSpec reference_with_flags(const Config& c, const Flags& f) {
  signals::WaveformSpec w = c.reference;
  if (f.waveform) w.kind = signals::kind_from_name(*f.waveform);
  if (f.axes) w.axes = parse_axis_list(*f.axes);
  if (f.freq) w.freq_hz = *f.freq;
  if (f.amplitude) w.amplitude = Pose6::constant(*f.amplitude);
  if (f.duration) w.duration_s = *f.duration;
  if (f.period) w.period_s = *f.period;
  return w;
}

inline void simulate(Config c, const Flags& f, const path& out, Report& rep) {
  c.reference = reference_with_flags(c, f);
  const auto r = experiments::simulate(c);
  write_run_csv(out / "simulate.csv", r.record);
  std::size_t cmd_sat = 0, sensor_sat = 0;
  for (std::size_t i = 0; i < r.record.size(); ++i) {
    cmd_sat += r.record.command_saturated[i];
    sensor_sat += r.record.sensor_saturated[i];
  }
  rep << "reference: " << signals::kind_name(c.reference.kind) << ", " << r.record.size() << " samples at "
      << num(c.loop.control_rate_hz) << " Hz\n";
  print_vector(rep, "rms error [um, urad]:", r.tracking.rms, 5);
  print_vector(rep, "max |error| [um, urad]:", r.tracking.max_abs, 5);
  rep << "saturated samples: command " << cmd_sat << ", sensor " << sensor_sat << "\n";
}

inline void resolution(const Config& c, const Flags& f, const path& out, Report& rep) {
  experiments::ResolutionSetup s;
  s.noise_scale = f.noise_scale;
  if (f.axes) s.axes = parse_axis_list(*f.axes);
  if (f.period) s.period_s = *f.period;
  if (f.amplitude)
    for (Axis a : s.axes) s.steps[a] = *f.amplitude;
  const auto results = experiments::resolution_study(c, s);
  CsvWriter csv(out / "resolution.csv", {"axis", "unit", "step", "level", "mean", "std", "samples"});
  bool all = true;
  for (const auto& r : results) {
    for (const auto& d : r.report.dwells)
      csv.row({axis_name(r.axis), unit(r.axis), num(r.step), std::to_string(d.level), num(d.mean), num(d.std),
               std::to_string(d.samples)});
    rep << axis_name(r.axis) << ": step " << num(r.step) << " " << unit(r.axis) << ", separation "
        << fixed(r.report.separation, 2) << " sigma, " << (r.report.pass ? "resolved" : "NOT resolved") << "\n";
    all = all && r.report.pass;
  }
  rep << "all steps resolved: " << (all ? "yes" : "no") << "\n";
}

inline void hysteresis(const Config& c, const Flags& f, const path& out, Report& rep) {
  experiments::HysteresisSetup s;
  if (f.axes) {
    const auto axes = parse_axis_list(*f.axes);
    if (axes.size() != 1) throw UsageError("hysteresis: --axes takes exactly one axis");
    s.axis = axes[0];
  }
  if (f.amplitude) s.amplitude = *f.amplitude;
  if (f.freq) s.freq_hz = *f.freq;
  s.cycles = f.cycles;
  const auto r = experiments::hysteresis_study(c, s);
  const Axis a = s.axis;
  CsvWriter csv(out / "hysteresis.csv",
                {"time_s", "ref_" + channel(a), "open_meas_" + channel(a), "closed_meas_" + channel(a)});
  for (std::size_t i = 0; i < r.reference.size(); ++i)
    csv.row({num(r.reference.time(i)), num(r.reference[i][a]), num(r.open.measured[i][a]),
             num(r.closed.measured[i][a])});
  auto line = [&](const char* label, const analysis::HysteresisMetric& m) {
    rep << label << ": width " << num(m.width) << " " << unit(a) << " (" << fixed(m.width_pct, 2)
        << "% of span), area " << num(m.area) << ", r^2 " << fixed(m.r_squared, 6) << "\n";
  };
  line("open loop", r.open_metric);
  line("closed loop", r.closed_metric);
  rep << "width reduction: " << fixed(r.reduction(), 2) << "x\n";
}

inline void freq_response(const Config& c, const Flags& f, const path& out, Report& rep) {
  experiments::FreqSetup s;
  if (f.axes) s.axes = parse_axis_list(*f.axes);
  if (f.f0) s.f0_hz = *f.f0;
  if (f.f1) s.f1_hz = *f.f1;
  if (f.duration) s.duration_s = *f.duration;
  if (f.amplitude)
    for (Axis a : s.axes) s.amplitude[a] = *f.amplitude;
  const auto results = experiments::freq_response_study(c, s);
  CsvWriter csv(out / "freq_response.csv", {"freq_hz", "axis", "mag_db", "phase_rad"});
  for (const auto& r : results) {
    for (std::size_t i = 0; i < r.response.freq_hz.size(); ++i)
      csv.row({num(r.response.freq_hz[i]), axis_name(r.axis), num(r.response.mag_db[i]),
               num(r.response.phase_rad[i])});
    rep << axis_name(r.axis) << ": band " << fixed(r.f0_hz, 1) << "-" << fixed(r.f1_hz, 1) << " Hz, peaks [Hz]:";
    if (r.response.peaks_hz.empty()) rep << " none";
    for (double p : r.response.peaks_hz) rep << " " << fixed(p, 2);
    rep << "\n";
  }
}

}  // namespace detail

// Runs one subcommand and maps errors to exit codes. Files land in
// flags.out_dir together with summary.txt and manifest.json.
inline int run_subcommand(const std::string& name, const Config& config, const Flags& flags, std::ostream& out,
                          std::ostream& err) {
  try {
    Config c = config;
    if (flags.seed) c.seed = *flags.seed;
    const std::filesystem::path dir = flags.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(flags.out_dir);
    std::filesystem::create_directories(dir);
    Report rep(out);
    if (name == "mobility") detail::mobility(c, rep);
    else if (name == "workspace") detail::workspace(c, dir, rep);
    else if (name == "fit-jacobian") detail::fit_jacobian(c, flags, dir, rep);
    else if (name == "simulate") detail::simulate(c, flags, dir, rep);
    else if (name == "resolution") detail::resolution(c, flags, dir, rep);
    else if (name == "hysteresis") detail::hysteresis(c, flags, dir, rep);
    else if (name == "freq-response") detail::freq_response(c, flags, dir, rep);
    else throw UsageError("unknown subcommand '" + name + "'");

    std::ofstream(dir / "summary.txt") << rep.text();
    std::ofstream(dir / "manifest.json") << make_manifest(name, c).to_json().dump(2) << "\n";
    return kOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumericalError;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

// Full argv entry point.
inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Six-axis flexure positioner toolkit", "flexpos"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  Flags flags;
  if (const char* env = std::getenv("FLEXPOS_OUT")) flags.out_dir = env;
  if (flags.out_dir.empty()) flags.out_dir = "flexpos_out";

  app.add_option("--config", config_path, "JSON configuration file (defaults apply when omitted)");
  app.add_option("--out", flags.out_dir, "output directory (default $FLEXPOS_OUT or ./flexpos_out)");
  app.add_option("--seed", flags.seed, "override the configured seed");

  auto* mob = app.add_subcommand("mobility", "mobility count of the mechanism");
  auto* ws = app.add_subcommand("workspace", "axis ranges, volumes, projections, force and compliance checks");
  auto* fit = app.add_subcommand("fit-jacobian", "least-squares Jacobian from input/output samples");
  fit->add_option("--samples", flags.samples, "number of synthetic samples")->check(CLI::Range(7, 1000000));
  fit->add_option("--noise", flags.noise, "output noise std for synthetic samples")->check(CLI::NonNegativeNumber);
  fit->add_option("--input", flags.samples_path, "CSV of measured samples (u1..u6, then the pose)");
  auto* sim = app.add_subcommand("simulate", "closed-loop tracking of the configured reference");
  sim->add_option("--waveform", flags.waveform, "staircase, circle, rose, sine, chirp or constant");
  sim->add_option("--freq", flags.freq, "reference frequency [Hz]");
  sim->add_option("--amplitude", flags.amplitude, "amplitude on every listed axis [um or urad]");
  sim->add_option("--axes", flags.axes, "comma-separated axes, e.g. x,y");
  sim->add_option("--duration", flags.duration, "duration [s]");
  sim->add_option("--period", flags.period, "staircase dwell [s]");
  auto* res = app.add_subcommand("resolution", "closed-loop staircases at the smallest resolvable steps");
  res->add_option("--axes", flags.axes, "comma-separated axes (default all)");
  res->add_option("--amplitude", flags.amplitude, "step height on every listed axis");
  res->add_option("--period", flags.period, "dwell per level [s]");
  res->add_option("--noise-scale", flags.noise_scale, "multiplier on sensor noise")->check(CLI::NonNegativeNumber);
  auto* hys = app.add_subcommand("hysteresis", "open-loop against closed-loop hysteresis loop");
  hys->add_option("--axes", flags.axes, "driven axis (default z)");
  hys->add_option("--amplitude", flags.amplitude, "sine amplitude [um or urad]");
  hys->add_option("--freq", flags.freq, "sine frequency [Hz]");
  hys->add_option("--cycles", flags.cycles, "number of cycles")->check(CLI::Range(2, 1000));
  auto* fr = app.add_subcommand("freq-response", "chirp frequency response per axis");
  fr->add_option("--axes", flags.axes, "comma-separated axes (default all)");
  fr->add_option("--f0", flags.f0, "chirp start [Hz]");
  fr->add_option("--f1", flags.f1, "chirp end [Hz] (default from the modal config)");
  fr->add_option("--duration", flags.duration, "sweep duration [s]");
  fr->add_option("--amplitude", flags.amplitude, "chirp amplitude on every listed axis");
  (void)mob;
  (void)ws;
  for (auto* s : app.get_subcommands({})) s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string what = e.what();
    for (int i = 1; i < argc; ++i) {
      const std::string a = argv[i];
      if (a == "--config" || a == "--out" || a == "--seed") {
        ++i;
        continue;
      }
      if (a.empty() || a[0] == '-') continue;
      if (std::find(subcommands().begin(), subcommands().end(), a) == subcommands().end())
        what = "unknown subcommand '" + a + "'";
      break;
    }
    err << "usage error: " << what << "\n\n" << app.help();
    return kUsageError;
  }

  Config config;
  try {
    if (!config_path.empty()) config = load_config(config_path);
  } catch (const Error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  return run_subcommand(name, config, flags, out, err);
}

}  // namespace flexpos::cli
