#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lifshift/errors.hpp"
#include "lifshift/io.hpp"
#include "lifshift/lifshitz.hpp"
#include "lifshift/optics.hpp"
#include "lifshift/sphere_plate.hpp"
#include "lifshift/stats.hpp"
#include "lifshift/svg.hpp"

namespace {

using namespace lifshift;

std::string out_path(const std::string& dir, const std::string& name)
{
  return (std::filesystem::path(dir) / name).string();
}

const sphere_plate::oscillator_geometry& require_geometry(const io::run_config& cfg)
{
  if (!cfg.geometry)
    raise(errc::invalid_settings, "config: [geometry] section is required for this command");
  return *cfg.geometry;
}

std::vector<optics::eps_mode> effective_modes(const io::run_config& cfg,
                                              const std::vector<std::string>& overrides)
{
  if (overrides.empty()) return cfg.modes;
  std::string joined;
  for (const auto& t : overrides) {
    if (!joined.empty()) joined += ',';
    joined += t;
  }
  return io::parse_mode_list(joined, "--mode");
}

sphere_plate::averaging_mode resolve_averaging(const io::run_config& cfg, const std::string& cli)
{
  if (!cli.empty()) {
    const auto m = sphere_plate::averaging_from_string(cli);
    if (!m)
      raise(errc::invalid_argument,
            "--averaging must be 'exact' or 'first_term', got '" + cli + "'");
    return *m;
  }
  return cfg.z_grid ? cfg.z_grid->averaging : sphere_plate::averaging_mode::exact;
}

void require_modes(const std::vector<optics::eps_mode>& modes)
{
  if (modes.empty())
    raise(errc::invalid_settings,
          "no permittivity mode selected (set [optics] mode or pass --mode)");
}

void warn_pfa(double z_min_m, double radius_m)
{
  if (!sphere_plate::pfa_ratio_ok(z_min_m, radius_m))
    std::fprintf(stderr,
                 "warning: sphere radius over closest separation is %.3g; the "
                 "sphere-plate mapping assumes R much larger than z\n",
                 radius_m / z_min_m);
}

// Dataset as used by the analysis: loaded, optionally with the separation
// correction applied. The separation uncertainty is propagated through the
// correction (dz'/dz = z/z' for both directions).
stats::measurement_dataset analysis_dataset(const io::run_config& cfg)
{
  if (cfg.stats.dataset_path.empty())
    raise(errc::invalid_settings, "config: [stats] dataset is required");
  auto data = io::load_dataset(cfg.resolve(cfg.stats.dataset_path));
  if (cfg.correction) {
    const auto& geom = require_geometry(cfg);
    for (auto& p : data.points) {
      const double z0 = p.z_m;
      p.z_m = sphere_plate::apply_separation_correction(z0, geom.a_rms_m, cfg.correction->which,
                                                        cfg.correction->direction);
      if (p.sigma_z_m) *p.sigma_z_m *= z0 / p.z_m;
    }
    data.validate();
  }
  return data;
}

const char* correction_name(sphere_plate::correction_factor f)
{
  return f == sphere_plate::correction_factor::eta ? "eta" : "eta_corr";
}

const char* direction_name(sphere_plate::correction_direction d)
{
  return d == sphere_plate::correction_direction::multiply ? "multiply" : "divide";
}

int cmd_eps(const io::run_config& cfg, const std::string& out_dir,
            const std::vector<optics::eps_mode>& modes)
{
  require_modes(modes);
  if (!cfg.eps_grid)
    raise(errc::invalid_settings, "config: [eps_grid] section is required for eps");
  const auto xi = io::build_xi_grid(*cfg.eps_grid);
  for (const auto mode : modes) {
    const auto spec = cfg.make_spec(mode);
    std::vector<double> eps;
    eps.reserve(xi.size());
    for (const double x : xi) eps.push_back(optics::eps_imag_axis(x, spec));
    const auto path = out_path(out_dir, std::string("eps_") + optics::to_string(mode) + ".csv");
    io::write_eps_csv(path, xi, eps);
    std::printf("wrote %s (%zu points)\n", path.c_str(), xi.size());
  }
  return 0;
}

int cmd_curve(const io::run_config& cfg, const std::string& out_dir,
              const std::vector<optics::eps_mode>& modes, sphere_plate::averaging_mode averaging)
{
  require_modes(modes);
  if (!cfg.z_grid) raise(errc::invalid_settings, "config: [grid] section is required for curve");
  const auto& geom = require_geometry(cfg);
  const auto z = io::build_z_grid(*cfg.z_grid);
  warn_pfa(z.front(), geom.sphere_radius_m);

  svg::figure fig;
  fig.x_label = "z [um]";
  fig.y_label = "z * delta_f [Hz um]";
  for (const auto mode : modes) {
    const auto spec = cfg.make_spec(mode);
    const auto curve = sphere_plate::theory_curve(z, spec, cfg.settings, geom, averaging);
    const auto path = out_path(out_dir, std::string("curve_") + optics::to_string(mode) + ".csv");
    io::write_curve_csv(path, curve);
    std::printf("wrote %s (%zu points)\n", path.c_str(), curve.points.size());

    svg::series s;
    s.label = curve.model_tag + " (" + curve.averaging_tag + ")";
    s.dashed = mode == optics::eps_mode::pure_drude || mode == optics::eps_mode::pure_plasma;
    for (const auto& p : curve.points) {
      s.x.push_back(p.z_m * 1e6);
      s.y.push_back(p.z_delta_f_hz_m * 1e6);
    }
    fig.curves.push_back(std::move(s));
  }

  if (!cfg.stats.dataset_path.empty()) {
    const auto data = analysis_dataset(cfg);
    svg::errorbar_series m;
    m.label = "measured";
    for (const auto& p : data.points)
      m.points.push_back({p.z_m * 1e6, p.z_m * 1e6 * p.delta_f_hz,
                          p.sigma_z_m ? *p.sigma_z_m * 1e6 : 0.0, p.z_m * 1e6 * p.sigma_f_hz});
    fig.markers.push_back(std::move(m));
  }

  const auto svg_path = out_path(out_dir, "curves.svg");
  io::write_text_file(svg_path, svg::render(fig));
  std::printf("wrote %s\n", svg_path.c_str());
  return 0;
}

int cmd_compare(const io::run_config& cfg, const std::string& out_dir,
                const std::vector<optics::eps_mode>& modes, sphere_plate::averaging_mode averaging)
{
  if (!cfg.stats.n_fit_params)
    raise(errc::invalid_settings,
          "config: [stats] n_fit_params is required for compare (it is never inferred)");
  const auto data = analysis_dataset(cfg);
  const long dof = static_cast<long>(data.points.size()) - *cfg.stats.n_fit_params;
  if (dof < 1)
    raise(errc::invalid_dof, "compare: dataset leaves no degrees of freedom after "
                                 + std::to_string(*cfg.stats.n_fit_params) + " fit parameters");

  struct job {
    std::string tag;
    std::string heading;
    sphere_plate::frequency_shift_curve curve;
    std::optional<double> partial_bound;
  };
  std::vector<job> jobs;

  if (!cfg.stats.theory_path.empty()) {
    const auto path = cfg.resolve(cfg.stats.theory_path);
    jobs.push_back({"curve_file", "theory: curve file '" + path + "'", io::load_curve(path),
                    std::nullopt});
  } else {
    require_modes(modes);
    const auto& geom = require_geometry(cfg);
    std::vector<double> zgrid;
    zgrid.reserve(data.points.size());
    for (const auto& p : data.points) zgrid.push_back(p.z_m);
    warn_pfa(zgrid.front(), geom.sphere_radius_m);
    for (const auto mode : modes) {
      const auto spec = cfg.make_spec(mode);
      const bool drude_family =
          mode == optics::eps_mode::tabulated_drude || mode == optics::eps_mode::pure_drude;
      jobs.push_back({optics::to_string(mode),
                      std::string("model: ") + optics::to_string(mode) + " ("
                          + sphere_plate::to_string(averaging) + ")",
                      sphere_plate::theory_curve(zgrid, spec, cfg.settings, geom, averaging),
                      drude_family ? cfg.stats.partial_bound_drude
                                   : cfg.stats.partial_bound_plasma});
    }
  }

  bool first = true;
  for (const auto& j : jobs) {
    auto report = stats::chi2(data, j.curve, cfg.stats.sigma);
    report.dof = dof;
    report.probability = stats::chi2_survival(report.chi2, dof);

    if (!first) std::printf("\n");
    first = false;
    std::printf("%s\n", j.heading.c_str());
    std::printf("sigma mode: %s\n", stats::to_string(cfg.stats.sigma));
    if (cfg.correction)
      std::printf("separation correction: %s %s\n", correction_name(cfg.correction->which),
                  direction_name(cfg.correction->direction));
    std::printf("points: %zu\n", data.points.size());
    std::printf("chi2 = %s\n", io::fmt_double(report.chi2).c_str());
    std::printf("dof = %ld\n", report.dof);
    std::printf("probability = %s\n", io::fmt_percent3(*report.probability).c_str());
    if (cfg.stats.exclusion_threshold_sigma) {
      const auto ex = stats::exclusion_subset(report, *cfg.stats.exclusion_threshold_sigma);
      std::printf("excluded count (>= %s sigma) = %ld\n",
                  io::fmt_double(*cfg.stats.exclusion_threshold_sigma).c_str(), ex.count);
      std::printf("partial chi2 = %s\n", io::fmt_double(ex.partial_chi2).c_str());
      if (j.partial_bound)
        std::printf("partial chi2 > %s: %s\n", io::fmt_double(*j.partial_bound).c_str(),
                    ex.partial_chi2 > *j.partial_bound ? "yes" : "no");
    }

    const auto path = out_path(out_dir, "compare_" + j.tag + ".csv");
    io::write_compare_csv(path, data, report);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Casimir frequency-shift pipeline for a sphere-membrane oscillator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string averaging;
  std::vector<std::string> mode_override;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "run configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (created if missing)");
    sub->add_option("--mode", mode_override,
                    "permittivity model(s); repeatable or comma-separated; overrides config")
        ->delimiter(',');
  };

  auto* eps = app.add_subcommand("eps", "tabulate the permittivity along the imaginary axis");
  add_common(eps);
  auto* curve = app.add_subcommand("curve", "frequency-shift curves over a separation grid");
  add_common(curve);
  curve->add_option("--averaging", averaging, "exact or first_term; overrides config");
  auto* compare = app.add_subcommand("compare", "chi-square comparison against measured data");
  add_common(compare);
  compare->add_option("--averaging", averaging, "exact or first_term; overrides config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: InvalidArgument: %s\n", e.what());
    return 2;
  }

  try {
    const auto cfg = io::load_run_config(config_path);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (!std::filesystem::is_directory(out_dir))
      raise(errc::io_error, "cannot create output directory '" + out_dir + "'");
    const auto modes = effective_modes(cfg, mode_override);
    if (eps->parsed()) return cmd_eps(cfg, out_dir, modes);
    const auto avg = resolve_averaging(cfg, averaging);
    if (curve->parsed()) return cmd_curve(cfg, out_dir, modes, avg);
    return cmd_compare(cfg, out_dir, modes, avg);
  } catch (const lifshift::error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return is_input_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: Unhandled: %s\n", e.what());
    return 3;
  }
}
