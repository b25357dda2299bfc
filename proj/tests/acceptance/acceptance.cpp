// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "flexpos/cli.hpp"
#include "flexpos/flexpos.hpp"
#include "oracles.hpp"

using namespace flexpos;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %2d  %s: %s  [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string f(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

bool near(double v, double target, double tol) { return std::abs(v - target) <= tol; }

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  const Config defaults;

  criterion(1, "mobility", [&] {
    const int dof = kinematics::mobility(defaults.mobility);
    return Outcome{dof == 6, "DOF = " + std::to_string(dof) + " (expected 6)"};
  });

  criterion(2, "axis ranges", [&] {
    const auto r = workspace::axis_ranges(defaults.jacobian, defaults.input_box);
    const double expected[6] = {403.7, 398.5, 390.9, 8864.4, 8297.8, 15278.2};
    bool ok = true;
    std::string d;
    for (std::size_t i = 0; i < 6; ++i) {
      ok = ok && near(r[i].width(), expected[i], 0.1);
      d += std::string(kAxisNames[i]) + " " + f(r[i].width(), 7) + " ";
    }
    return Outcome{ok, d + "(each +-0.1)"};
  });

  criterion(3, "amplification ratios", [&] {
    const auto a = workspace::amplification_ratios(defaults.jacobian, defaults.input_box);
    const bool ok = near(a[0], 3.67, 0.01) && near(a[1], 3.62, 0.01) && near(a[2], 3.55, 0.01);
    return Outcome{ok, "x " + f(a[0]) + " y " + f(a[1]) + " z " + f(a[2]) + " (3.67/3.62/3.55 +-0.01)"};
  });

  criterion(4, "actuator force", [&] {
    const double F = kinematics::required_actuator_force(defaults.input_stiffness, 110.0);
    return Outcome{near(F, 334.2, 0.1), f(F, 5) + " N (334.2 +-0.1)"};
  });

  criterion(5, "workspace volumes", [&] {
    const auto s = workspace::summarize(defaults.jacobian, defaults.input_box);
    const auto gt = workspace::generators(defaults.jacobian, defaults.input_box, workspace::Block::translation);
    const auto gr = workspace::generators(defaults.jacobian, defaults.input_box, workspace::Block::rotation);
    const auto mt = oracle::zonotope_volume_mc(gt, 1'000'000, 11);
    const auto mr = oracle::zonotope_volume_mc(gr, 1'000'000, 12);
    const double et = std::abs(s.translational_volume - 2.0339e7) / 2.0339e7;
    const double er = std::abs(s.rotational_volume - 3.7015e11) / 3.7015e11;
    const double zt = std::abs(s.translational_volume - mt.estimate) / mt.sigma;
    const double zr = std::abs(s.rotational_volume - mr.estimate) / mr.sigma;
    const bool ok = et <= 0.02 && er <= 0.02 && zt <= 3.0 && zr <= 3.0;
    return Outcome{ok, "translational " + f(s.translational_volume, 6) + " um^3 (" + f(100 * et, 2) +
                           "% off, MC " + f(zt, 2) + " sigma), rotational " + f(s.rotational_volume, 6) + " urad^3 (" +
                           f(100 * er, 2) + "% off, MC " + f(zr, 2) + " sigma)"};
  });

  criterion(6, "compliance", [&] {
    const auto r = kinematics::validate_compliance(defaults.compliance);
    const double dz = kinematics::output_deflection(defaults.compliance, Wrench6::unit(Axis::z))[Axis::z];
    const bool ok = r.symmetric && r.positive_diagonal && near(dz, 10.176, 0.001);
    return Outcome{ok, std::string("symmetric ") + (r.symmetric ? "yes" : "no") + ", positive diagonal " +
                           (r.positive_diagonal ? "yes" : "no") + ", z deflection " + f(dz, 6) +
                           " um/N (10.176 +-0.001)"};
  });

  criterion(7, "Jacobian regression", [&] {
    Config c = defaults;
    const auto clean = kinematics::fit_jacobian(experiments::synthetic_samples(c, {100, 0.0}));
    const double clean_err = (clean.jacobian.matrix() - c.jacobian.matrix()).cwiseAbs().maxCoeff();
    constexpr int kSeeds = 100;
    Matrix6 mean = Matrix6::Zero(), se = Matrix6::Zero();
    int inside = 0, total = 0;
    for (int s = 0; s < kSeeds; ++s) {
      c.seed = 100 + static_cast<std::uint64_t>(s);
      const auto fit = kinematics::fit_jacobian(experiments::synthetic_samples(c, {100, 0.1}));
      mean += fit.jacobian.matrix() / kSeeds;
      se += fit.std_error / kSeeds;
      const Matrix6 dev = (fit.jacobian.matrix() - c.jacobian.matrix()).cwiseAbs();
      for (Eigen::Index i = 0; i < 36; ++i, ++total)
        if (dev.data()[i] <= 3.0 * fit.std_error.data()[i]) ++inside;
    }
    const double worst_mean = ((mean - c.jacobian.matrix()).cwiseAbs().array() /
                               (se.array() / std::sqrt(static_cast<double>(kSeeds))))
                                  .maxCoeff();
    const double frac = static_cast<double>(inside) / total;
    const bool ok = clean_err <= 1e-9 && worst_mean <= 3.0 && frac >= 0.99;
    return Outcome{ok, "noiseless max error " + f(clean_err, 3) + " (<=1e-9); sigma 0.1 over 100 seeds: " +
                           f(100 * frac, 4) + "% of entries within 3 SE, worst mean deviation " + f(worst_mean, 3) +
                           " SE of mean"};
  });

  criterion(8, "step response", [&] {
    const auto ref = signals::constant(Pose6::unit(Axis::z, 10.0), 0.5, defaults.loop.control_rate_hz);
    const auto rec = control::closed_loop_run(defaults.plant_config(), defaults.gains, defaults.loop, ref,
                                              defaults.seed);
    const std::size_t n = rec.size(), tail = static_cast<std::size_t>(0.1 * defaults.loop.control_rate_hz);
    double mean = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) mean += (rec.reference[i][Axis::z] - rec.truth[i][Axis::z]) / tail;
    const double q = defaults.sensor.step(index(Axis::z));
    return Outcome{std::abs(mean) < q, "|mean error| over last 0.1 s " + f(1e3 * std::abs(mean), 3) +
                                           " nm (< one quantization step " + f(1e3 * q, 4) + " nm)"};
  });

  criterion(9, "hysteresis reduction", [&] {
    const auto r = experiments::hysteresis_study(defaults, {});
    return Outcome{r.reduction() >= 5.0, "0.5 Hz z sine: open-loop width " + f(r.open_metric.width_pct, 3) +
                                             "%, closed-loop " + f(r.closed_metric.width_pct, 3) + "%, ratio " +
                                             f(r.reduction(), 3) + " (>= 5)"};
  });

  criterion(10, "frequency response", [&] {
    Config c = defaults;
    c.modal = plant::loaded_modes(0.02);
    experiments::FreqSetup s;
    s.axes = {Axis::z};
    s.f0_hz = 10.0;
    s.f1_hz = 400.0;
    const auto r = experiments::freq_response_study(c, s).front().response;
    const double fn = c.modal.freq_hz[static_cast<Eigen::Index>(index(Axis::z))];
    const double zeta = 0.02;
    const double analytic_db = 20.0 * std::log10(1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta)));
    const double peak_db = *std::max_element(r.mag_db.begin(), r.mag_db.end());
    double best = -1.0;
    for (double p : r.peaks_hz)
      if (best < 0.0 || std::abs(p - fn) < std::abs(best - fn)) best = p;
    const bool ok = best > 0.0 && std::abs(best - fn) <= 0.02 * fn && std::abs(peak_db - analytic_db) <= 1.5;
    return Outcome{ok, "peak " + f(best, 6) + " Hz vs " + f(fn, 6) + " Hz (2%), magnitude " + f(peak_db, 4) +
                           " dB vs analytic " + f(analytic_db, 4) + " dB (1.5 dB)"};
  });

  criterion(11, "resolution staircase", [&] {
    auto run = [&](double scale, std::string& d) {
      experiments::ResolutionSetup s;
      s.noise_scale = scale;
      bool all = true;
      for (const auto& r : experiments::resolution_study(defaults, s)) {
        d += std::string(kAxisNames[index(r.axis)]) + " " + f(r.report.separation, 3) + (r.report.pass ? "+ " : "- ");
        all = all && r.report.pass;
      }
      return all;
    };
    std::string d1 = "default noise: ", d10 = "10x noise: ";
    const bool base = run(1.0, d1);
    const bool noisy = run(10.0, d10);
    return Outcome{base && !noisy, d1 + "| " + d10 + "(separation in sigma, + resolved; need all at 1x, not all at 10x)"};
  });

  criterion(12, "tracking trends", [&] {
    const auto r = experiments::trend_study(defaults, {});
    bool ok = true;
    std::string d;
    for (Axis a : r.driven) {
      const double ratio = r.amplitude_ratio(a);
      const bool mono = r.monotonic_in_frequency(a);
      ok = ok && ratio >= 1.5 && ratio <= 2.5 && mono;
      d += std::string(kAxisNames[index(a)]) + ": ratio " + f(ratio, 3) + ", rms over 0.1/0.5/1 Hz";
      for (const auto& p : r.sweep) d += " " + f(p.rms[static_cast<Eigen::Index>(index(a))], 3);
      d += mono ? " increasing; " : " NOT increasing; ";
    }
    return Outcome{ok, d + "(ratio in [1.5, 2.5])"};
  });

  criterion(13, "simulate determinism", [&] {
    const auto root = std::filesystem::temp_directory_path() / "flexpos_acceptance";
    std::filesystem::remove_all(root);
    std::ostringstream sink;
    for (const char* run : {"a", "b"}) {
      const std::string out = (root / run).string();
      const char* argv[] = {"flexpos", "simulate", "--seed", "7", "--out", out.c_str()};
      if (cli::main(6, argv, sink, sink) != 0) return Outcome{false, "simulate failed: " + sink.str()};
    }
    const auto a = read_file(root / "a" / "simulate.csv"), b = read_file(root / "b" / "simulate.csv");
    return Outcome{!a.empty() && a == b, std::to_string(a.size()) + " bytes, " + (a == b ? "identical" : "DIFFERENT")};
  });

  std::printf("%s: %d of 13 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
