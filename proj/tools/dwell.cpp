// Command-line driver: pole tables, trajectory sweeps, occupation curves,
// the double-pole search and wavefunction dumps, as reproducible CSV/JSON.
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dwell/config_io.hpp"
#include "dwell/continuation.hpp"

using namespace dwell;
using nlohmann::ordered_json;

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct Table {
  std::string command;            // echo of the invocation
  std::string config;             // JSON text of the model parameters
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> footnotes;          // extra '#' lines (CSV)
  ordered_json extras = ordered_json::object();  // extra fields (JSON)
};

void write_table(const Table& t, const std::string& out_path, const std::string& format) {
  std::string text;
  if (format == "json") {
    ordered_json j;
    j["command"] = t.command;
    j["config"] = ordered_json::parse(t.config);
    for (auto& [key, value] : t.extras.items()) j[key] = value;
    j["columns"] = t.columns;
    auto& rows = j["rows"] = ordered_json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    text = j.dump(2);
    text += '\n';
  } else {
    text = "# dwell " + t.command + "\n# config " + t.config + "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      text += (c ? "," : "") + t.columns[c];
    text += '\n';
    for (const auto& r : t.rows) {
      for (std::size_t c = 0; c < r.size(); ++c) text += (c ? "," : "") + fmt(r[c]);
      text += '\n';
    }
    for (const auto& f : t.footnotes) text += "# " + f + "\n";
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << text;
  }
}

// deterministic regardless of the thread count: every result is written at
// its own index
void parallel_for(int threads, std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  int threads = 1;
  std::optional<double> override_d, override_v;

  DoubleWellParams params() const {
    DoubleWellParams p;
    if (!config_path.empty()) p = params_from_json_file(config_path);
    if (override_d) p.barrier_thickness = *override_d;
    if (override_v) p.v3 = *override_v;
    p.validate();
    return p;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "model parameters as JSON");
  cmd->add_option("--out", o.out_path, "output file (default: stdout)");
  cmd->add_option("--format", o.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", o.threads, "worker threads for grid evaluation")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--D", o.override_d, "override the barrier thickness D");
  cmd->add_option("--V", o.override_v, "override the outer well depth V");
}

struct RegionOpts {
  double re_min = 1.0, re_max = 4.0, gamma_max = 2.0, density = 20.0;
  SearchRegion region() const { return {re_min, re_max, -gamma_max / 2.0, 0.0, density}; }
};

void add_region(CLI::App* cmd, RegionOpts& r) {
  cmd->add_option("--re-min", r.re_min, "lower real-energy bound");
  cmd->add_option("--re-max", r.re_max, "upper real-energy bound");
  cmd->add_option("--gamma-max", r.gamma_max, "largest width Gamma to scan for");
  cmd->add_option("--density", r.density, "seed grid points per unit");
}

std::string echo_region(const RegionOpts& r) {
  return "--re-min " + fmt(r.re_min) + " --re-max " + fmt(r.re_max) +
         " --gamma-max " + fmt(r.gamma_max) + " --density " + fmt(r.density);
}

int run_poles(const CommonOpts& common, const RegionOpts& region) {
  const DoubleWellParams params = common.params();
  const PoleSearch ps = find_poles(build_double_well(params), region.region());
  Table t;
  t.command = "poles " + echo_region(region);
  t.config = params_to_json_text(params);
  t.columns = {"E_r", "Gamma", "order", "residual"};
  for (const Pole& p : ps.poles)
    t.rows.push_back({p.e_r(), p.gamma(), static_cast<double>(p.order), p.residual});
  t.footnotes.push_back("winding " + std::to_string(ps.winding));
  t.extras["winding"] = ps.winding;
  write_table(t, common.out_path, common.format);
  return 0;
}

int run_sweep(const CommonOpts& common, const RegionOpts& region, const std::string& param,
              double from, double to, double step, double min_step,
              const std::string& layout) {
  const DoubleWellParams params = common.params();
  SweepParameter which = SweepParameter::barrier_thickness;
  if (param == "V") which = SweepParameter::outer_well_depth;
  else if (param == "v2") which = SweepParameter::barrier_height;
  else if (param == "v1") which = SweepParameter::inner_well_depth;
  else if (param != "D") throw CLI::ValidationError("--param must be D, V, v2 or v1");

  SweepSpec sweep{which, from, to, step, min_step};
  const DoubleWellParams start_params = with_parameter(params, which, from);
  const PoleSearch seeds = find_poles(build_double_well(start_params), region.region());
  const auto trajs = track(params, sweep, seeds.poles);

  Table t;
  t.command = "sweep --param " + param + " --from " + fmt(from) + " --to " + fmt(to) +
              " --step " + fmt(step) + " --min-step " + fmt(min_step) + " --layout " +
              layout + " " + echo_region(region);
  t.config = params_to_json_text(params);
  const bool gnuplot = layout == "gnuplot";
  t.columns = gnuplot
                  ? std::vector<std::string>{"param_value", "E_r", "Gamma", "trajectory_id"}
                  : std::vector<std::string>{"param_value", "trajectory_id", "E_r", "Gamma"};
  for (const auto& traj : trajs)
    for (const auto& pt : traj.points) {
      const double id = traj.label;
      if (gnuplot)
        t.rows.push_back({pt.parameter, pt.pole.e_r(), pt.pole.gamma(), id});
      else
        t.rows.push_back({pt.parameter, id, pt.pole.e_r(), pt.pole.gamma()});
    }

  std::optional<TransitionReport> rep;
  if (trajs.size() == 2 && trajs[0].points.size() >= 6) rep = classify_regimes(trajs);
  auto regime_name = [](Regime r) {
    return r == Regime::resonant_tunneling ? std::string("resonant_tunneling")
                                           : std::string("level_repulsion");
  };
  if (rep) {
    t.footnotes.push_back("transition param_value " + fmt(rep->transition_parameter) +
                          " before " + regime_name(rep->regime_before) + " after " +
                          regime_name(rep->regime_after) + " min_gap " +
                          fmt(rep->min_pole_gap));
    t.extras["transition"] = {{"param_value", rep->transition_parameter},
                              {"regime_before", regime_name(rep->regime_before)},
                              {"regime_after", regime_name(rep->regime_after)},
                              {"min_gap", rep->min_pole_gap}};
  } else {
    t.footnotes.push_back("transition none");
    t.extras["transition"] = nullptr;
  }
  write_table(t, common.out_path, common.format);
  return 0;
}

int run_occupancy(const CommonOpts& common, double emin, double emax, long count) {
  const DoubleWellParams params = common.params();
  const PotentialSpec spec = build_double_well(params);
  const double x2 = params.x1 + params.barrier_thickness;
  const double x3 = x2 + params.outer_well_width;

  Table t;
  t.command = "occupancy --emin " + fmt(emin) + " --emax " + fmt(emax) + " --count " +
              std::to_string(count);
  t.config = params_to_json_text(params);
  t.columns = {"E", "P1", "P2"};
  t.rows.resize(count > 0 ? count : 0);
  parallel_for(common.threads, t.rows.size(), [&](std::size_t i) {
    const double e =
        count > 1 ? emin + (emax - emin) * static_cast<double>(i) / (count - 1) : emin;
    t.rows[i] = {e, occupation(spec, e, 0.0, params.x1), occupation(spec, e, x2, x3)};
  });
  write_table(t, common.out_path, common.format);
  return 0;
}

int run_double_pole(const CommonOpts& common, const RegionOpts& region, double d_min,
                    double d_max, double v_min, double v_max) {
  const DoubleWellParams params = common.params();
  const DoublePoleBox box{d_min, d_max, v_min, v_max};
  const DoublePoleResult dp = find_double_pole(params, box, region.region());
  double alpha = std::numeric_limits<double>::quiet_NaN();
  if (dp.converged) {
    const double dvs[] = {1e-3, 5e-4, 2.5e-4, 1.25e-4};
    alpha = unfolding_exponent(params, dp, dvs);
  }

  Table t;
  t.command = "double-pole --d-min " + fmt(d_min) + " --d-max " + fmt(d_max) +
              " --v-min " + fmt(v_min) + " --v-max " + fmt(v_max) + " " +
              echo_region(region);
  t.config = params_to_json_text(params);
  t.columns = {"converged", "D", "V", "E_re", "E_im", "winding", "residual",
               "min_gap", "unfolding_exponent"};
  t.rows.push_back({dp.converged ? 1.0 : 0.0, dp.d, dp.v, dp.energy.real(),
                    dp.energy.imag(), static_cast<double>(dp.winding), dp.residual,
                    dp.min_gap, alpha});
  t.extras["report"] = {{"converged", dp.converged},
                        {"D", dp.d},
                        {"V", dp.v},
                        {"E_re", dp.energy.real()},
                        {"E_im", dp.energy.imag()},
                        {"winding", dp.winding},
                        {"residual", dp.residual},
                        {"min_gap", dp.min_gap},
                        {"iterations", dp.iterations},
                        {"unfolding_exponent", alpha}};
  write_table(t, common.out_path, common.format);
  return dp.converged ? 0 : 4;
}

int run_wavefunction(const CommonOpts& common, double e_re, double e_im, double x_max,
                     long count) {
  const DoubleWellParams params = common.params();
  const PotentialSpec spec = build_double_well(params);
  const Complex e{e_re, e_im};

  Table t;
  t.command = "wavefunction --e-re " + fmt(e_re) + " --e-im " + fmt(e_im) +
              " --x-max " + fmt(x_max) + " --count " + std::to_string(count);
  t.config = params_to_json_text(params);
  t.columns = {"x", "re_psi", "im_psi", "abs2"};
  std::vector<double> xs(count > 0 ? count : 0);
  for (std::size_t i = 0; i < xs.size(); ++i)
    xs[i] = count > 1 ? x_max * static_cast<double>(i) / (count - 1) : 0.0;
  const auto values = wavefunction(spec, e, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    t.rows.push_back({xs[i], values[i].real(), values[i].imag(), std::norm(values[i])});
  write_table(t, common.out_path, common.format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S-matrix poles of a piecewise-constant double-well potential"};
  app.require_subcommand(1);

  CommonOpts poles_common, sweep_common, occ_common, dp_common, wf_common;
  RegionOpts poles_region, sweep_region, dp_region;

  auto* poles = app.add_subcommand("poles", "locate resonance poles in a region");
  add_common(poles, poles_common);
  add_region(poles, poles_region);

  auto* sweep = app.add_subcommand("sweep", "track poles through a parameter sweep");
  add_common(sweep, sweep_common);
  add_region(sweep, sweep_region);
  std::string sweep_param = "D", sweep_layout = "default";
  double sweep_from = 2.0, sweep_to = 0.2, sweep_step = 0.01, sweep_min_step = 1e-5;
  sweep->add_option("--param", sweep_param, "parameter to sweep: D, V, v2 or v1");
  sweep->add_option("--from", sweep_from, "sweep start");
  sweep->add_option("--to", sweep_to, "sweep stop");
  sweep->add_option("--step", sweep_step, "initial step magnitude");
  sweep->add_option("--min-step", sweep_min_step, "smallest allowed step");
  sweep->add_option("--layout", sweep_layout, "column order: default or gnuplot")
      ->check(CLI::IsMember({"default", "gnuplot"}));

  auto* occ = app.add_subcommand("occupancy", "well occupation probabilities on an energy grid");
  add_common(occ, occ_common);
  double occ_emin = 1.5, occ_emax = 3.5;
  long occ_count = 1000;
  occ->add_option("--emin", occ_emin, "grid start");
  occ->add_option("--emax", occ_emax, "grid end (inclusive)");
  occ->add_option("--count", occ_count, "number of grid points");

  auto* dpole = app.add_subcommand("double-pole", "locate the pole coalescence in (D, V)");
  add_common(dpole, dp_common);
  add_region(dpole, dp_region);
  double dp_dmin = 0.9, dp_dmax = 1.3, dp_vmin = 1.02, dp_vmax = 1.05;
  dpole->add_option("--d-min", dp_dmin, "barrier thickness lower bound");
  dpole->add_option("--d-max", dp_dmax, "barrier thickness upper bound");
  dpole->add_option("--v-min", dp_vmin, "outer well depth lower bound");
  dpole->add_option("--v-max", dp_vmax, "outer well depth upper bound");

  auto* wf = app.add_subcommand("wavefunction", "sample the scattering solution on [0, x_max]");
  add_common(wf, wf_common);
  double wf_ere = 2.49, wf_eim = 0.0, wf_xmax = 8.0;
  long wf_count = 1000;
  wf->add_option("--e-re", wf_ere, "Re E");
  wf->add_option("--e-im", wf_eim, "Im E");
  wf->add_option("--x-max", wf_xmax, "sample up to this position");
  wf->add_option("--count", wf_count, "number of sample points");

  CLI11_PARSE(app, argc, argv);

  try {
    if (poles->parsed()) return run_poles(poles_common, poles_region);
    if (sweep->parsed())
      return run_sweep(sweep_common, sweep_region, sweep_param, sweep_from, sweep_to,
                       sweep_step, sweep_min_step, sweep_layout);
    if (occ->parsed()) return run_occupancy(occ_common, occ_emin, occ_emax, occ_count);
    if (dpole->parsed())
      return run_double_pole(dp_common, dp_region, dp_dmin, dp_dmax, dp_vmin, dp_vmax);
    if (wf->parsed())
      return run_wavefunction(wf_common, wf_ere, wf_eim, wf_xmax, wf_count);
  } catch (const PoleCountMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ContourError& e) {
    std::cerr << "error: " << e.what() << "; shift or shrink the region\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
