#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "lifshift/errors.hpp"
#include "lifshift/lifshitz.hpp"
#include "lifshift/optics.hpp"
#include "lifshift/sphere_plate.hpp"
#include "lifshift/stats.hpp"

namespace lifshift::io {

// Shortest decimal that parses back to the same double. Keeps CSV output
// byte-stable across runs and exact under a write/read round trip.
inline std::string fmt_double(double v)
{
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Probability as a percentage with three significant digits, e.g. "36.0 %".
inline std::string fmt_percent3(double probability)
{
  char buf[48];
  std::snprintf(buf, sizeof buf, "%#.3g", probability * 100.0);
  std::string s = buf;
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s + " %";
}

namespace detail {

inline std::string_view trim(std::string_view s)
{
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::vector<std::string> split_csv(std::string_view line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view token, const std::string& where)
{
  const auto t = trim(token);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    raise(errc::parse_error, where + ": cannot parse number '" + std::string(t) + "'");
  return v;
}

inline long parse_long(std::string_view token, const std::string& where)
{
  const auto t = trim(token);
  long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    raise(errc::parse_error, where + ": cannot parse integer '" + std::string(t) + "'");
  return v;
}

} // namespace detail

struct delimited_table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Comma-separated numeric file: one header line naming the columns, then one
// row per line. Blank lines and lines starting with '#' are skipped.
inline delimited_table read_delimited(const std::string& path)
{
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open '" + path + "'");
  delimited_table out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto where = path + ":" + std::to_string(lineno);
    if (out.header.empty()) {
      out.header = detail::split_csv(t);
      continue;
    }
    const auto tokens = detail::split_csv(t);
    if (tokens.size() != out.header.size())
      raise(errc::parse_error, where + ": expected " + std::to_string(out.header.size())
                                   + " columns, got " + std::to_string(tokens.size()));
    std::vector<double> row;
    row.reserve(tokens.size());
    for (const auto& tok : tokens) row.push_back(detail::parse_double(tok, where));
    out.rows.push_back(std::move(row));
  }
  if (out.header.empty()) raise(errc::parse_error, path + ": no header line found");
  return out;
}

// Optical data: either (energy_ev, n, k) with im_eps = 2nk, or (energy_ev,
// im_eps) directly.
inline optics::optical_table load_optical_table(const std::string& path)
{
  const auto t = read_delimited(path);
  if (t.header == std::vector<std::string>{"energy_ev", "n", "k"}) {
    std::vector<optics::nk_row> rows;
    rows.reserve(t.rows.size());
    for (const auto& r : t.rows) rows.push_back({r[0], r[1], r[2]});
    return optics::optical_table::from_nk(std::move(rows), path);
  }
  if (t.header == std::vector<std::string>{"energy_ev", "im_eps"}) {
    std::vector<optics::im_eps_row> rows;
    rows.reserve(t.rows.size());
    for (const auto& r : t.rows) rows.push_back({r[0], r[1]});
    return optics::optical_table::from_im_eps(std::move(rows), path);
  }
  raise(errc::parse_error,
        path + ": header must be 'energy_ev,n,k' or 'energy_ev,im_eps'");
}

// Measured frequency shifts: z_um, delta_f_hz, sigma_f_hz and optionally
// sigma_z_um.
inline stats::measurement_dataset load_dataset(const std::string& path)
{
  const auto t = read_delimited(path);
  const std::vector<std::string> with{"z_um", "delta_f_hz", "sigma_f_hz", "sigma_z_um"};
  const std::vector<std::string> without{"z_um", "delta_f_hz", "sigma_f_hz"};
  const bool has_sigma_z = t.header == with;
  if (!has_sigma_z && t.header != without)
    raise(errc::parse_error, path + ": header must be 'z_um,delta_f_hz,sigma_f_hz[,sigma_z_um]'");
  stats::measurement_dataset d;
  d.label = path;
  for (const auto& r : t.rows) {
    stats::measurement_point p;
    p.z_m = r[0] * 1e-6;
    p.delta_f_hz = r[1];
    p.sigma_f_hz = r[2];
    if (has_sigma_z) p.sigma_z_m = r[3] * 1e-6;
    d.points.push_back(p);
  }
  d.validate();
  return d;
}

// Surface height histogram: height_nm, weight.
inline std::vector<sphere_plate::roughness_bin> load_roughness(const std::string& path)
{
  const auto t = read_delimited(path);
  if (t.header != std::vector<std::string>{"height_nm", "weight"})
    raise(errc::parse_error, path + ": header must be 'height_nm,weight'");
  std::vector<sphere_plate::roughness_bin> bins;
  bins.reserve(t.rows.size());
  for (const auto& r : t.rows) bins.push_back({r[0] * 1e-9, r[1]});
  return bins;
}

// Theory curve as written by write_curve_csv.
inline sphere_plate::frequency_shift_curve load_curve(const std::string& path)
{
  const auto t = read_delimited(path);
  if (t.header != std::vector<std::string>{"z_um", "delta_f_hz", "z_delta_f_hz_um"})
    raise(errc::parse_error, path + ": header must be 'z_um,delta_f_hz,z_delta_f_hz_um'");
  sphere_plate::frequency_shift_curve c;
  c.model_tag = path;
  for (const auto& r : t.rows) c.points.push_back({r[0] * 1e-6, r[1], r[2] * 1e-6});
  return c;
}

inline void write_text_file(const std::string& path, const std::string& content)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(errc::io_error, "cannot write '" + path + "'");
  out << content;
  if (!out) raise(errc::io_error, "write failed for '" + path + "'");
}

inline void write_eps_csv(const std::string& path, const std::vector<double>& xi_ev,
                          const std::vector<double>& eps)
{
  std::string s = "xi_ev,eps\n";
  for (std::size_t i = 0; i < xi_ev.size(); ++i)
    s += fmt_double(xi_ev[i]) + "," + fmt_double(eps[i]) + "\n";
  write_text_file(path, s);
}

inline void write_curve_csv(const std::string& path, const sphere_plate::frequency_shift_curve& c)
{
  std::string s = "z_um,delta_f_hz,z_delta_f_hz_um\n";
  for (const auto& p : c.points)
    s += fmt_double(p.z_m * 1e6) + "," + fmt_double(p.delta_f_hz) + ","
         + fmt_double(p.z_delta_f_hz_m * 1e6) + "\n";
  write_text_file(path, s);
}

inline void write_compare_csv(const std::string& path, const stats::measurement_dataset& data,
                              const stats::chi2_report& report)
{
  std::string s = "z_um,delta_f_data_hz,sigma_f_hz,sigma_eff_hz,delta_f_theory_hz,per_point\n";
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    const auto& p = data.points[i];
    s += fmt_double(p.z_m * 1e6) + "," + fmt_double(p.delta_f_hz) + ","
         + fmt_double(p.sigma_f_hz) + "," + fmt_double(report.sigma_eff_hz[i]) + ","
         + fmt_double(report.theory_hz[i]) + "," + fmt_double(report.per_point[i]) + "\n";
  }
  write_text_file(path, s);
}

// ---------------------------------------------------------------------------
// INI-style run configuration
// ---------------------------------------------------------------------------

using ini_sections = std::map<std::string, std::map<std::string, std::string>>;

// [section] headers and key = value lines; '#' or ';' lines are comments.
// Duplicate keys within a section are rejected.
inline ini_sections parse_ini(std::istream& in, const std::string& path)
{
  ini_sections out;
  std::string line, section;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = detail::trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    const auto where = path + ":" + std::to_string(lineno);
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        raise(errc::parse_error, where + ": malformed section header '" + std::string(t) + "'");
      section = std::string(detail::trim(t.substr(1, t.size() - 2)));
      out[section]; // a section may legitimately stay empty
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string_view::npos)
      raise(errc::parse_error, where + ": expected 'key = value', got '" + std::string(t) + "'");
    if (section.empty())
      raise(errc::parse_error, where + ": key outside any [section]");
    const std::string key(detail::trim(t.substr(0, eq)));
    const std::string value(detail::trim(t.substr(eq + 1)));
    if (key.empty()) raise(errc::parse_error, where + ": empty key");
    if (!out[section].emplace(key, value).second)
      raise(errc::parse_error, where + ": duplicate key '" + key + "' in [" + section + "]");
  }
  return out;
}

struct eps_grid_config {
  double xi_min_ev = 0.0;
  double xi_max_ev = 0.0;
  long points = 0;
};

struct z_grid_config {
  double z_min_um = 0.0;
  double z_max_um = 0.0;
  long points = 0;
  bool log_spacing = false;
  sphere_plate::averaging_mode averaging = sphere_plate::averaging_mode::exact;
};

struct stats_config {
  std::string dataset_path;
  std::string theory_path; // compare against a stored curve instead of recomputing
  stats::sigma_mode sigma = stats::sigma_mode::f_only;
  std::optional<long> n_fit_params;
  std::optional<double> exclusion_threshold_sigma;
  std::optional<double> partial_bound_drude;
  std::optional<double> partial_bound_plasma;
};

struct correction_config {
  sphere_plate::correction_factor which = sphere_plate::correction_factor::eta;
  sphere_plate::correction_direction direction = sphere_plate::correction_direction::multiply;
};

struct run_config {
  std::vector<optics::eps_mode> modes;
  std::string table_path; // required only by tabulated modes
  optics::drude_params drude{0.0, 0.0};
  double core_cutoff_ev = 2.0;
  double tail_exponent = 3.0;
  double kk_quad_tolerance = 1e-6;
  lifshitz::lifshitz_settings settings;
  std::optional<sphere_plate::oscillator_geometry> geometry;
  std::string roughness_path;
  std::optional<eps_grid_config> eps_grid;
  std::optional<z_grid_config> z_grid;
  stats_config stats;
  std::optional<correction_config> correction;
  std::string base_dir; // directory of the config file, for relative paths

  std::string resolve(const std::string& path) const
  {
    if (path.empty() || std::filesystem::path(path).is_absolute() || base_dir.empty())
      return path;
    return (std::filesystem::path(base_dir) / path).string();
  }

  // Permittivity description for one mode; loads the optical table on first
  // use by a tabulated mode.
  optics::permittivity_spec make_spec(optics::eps_mode mode) const
  {
    optics::permittivity_spec s;
    s.mode = mode;
    s.drude = drude;
    s.core_cutoff_ev = core_cutoff_ev;
    s.tail_exponent = tail_exponent;
    s.quad_tolerance = kk_quad_tolerance;
    if (s.tabulated()) {
      if (table_path.empty())
        raise(errc::invalid_spec, "config: [optics] table is required for tabulated modes");
      if (!cached_table_) cached_table_ = load_optical_table(resolve(table_path));
      s.table = *cached_table_;
    }
    s.validate();
    return s;
  }

private:
  mutable std::optional<optics::optical_table> cached_table_;
};

namespace detail {

class section_reader {
public:
  section_reader(const ini_sections& ini, std::string name) : name_(std::move(name))
  {
    const auto it = ini.find(name_);
    if (it != ini.end()) kv_ = &it->second;
  }

  bool present() const { return kv_ != nullptr; }

  std::optional<std::string> get(const std::string& key)
  {
    if (!kv_) return std::nullopt;
    seen_.insert(key);
    const auto it = kv_->find(key);
    if (it == kv_->end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key)
  {
    auto v = get(key);
    if (!v || v->empty())
      raise(errc::invalid_settings, "config: [" + name_ + "] " + key + " is required");
    return *v;
  }

  double require_double(const std::string& key)
  {
    return parse_double(require(key), "config [" + name_ + "] " + key);
  }

  std::optional<double> get_double(const std::string& key)
  {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_double(*v, "config [" + name_ + "] " + key);
  }

  std::optional<long> get_long(const std::string& key)
  {
    const auto v = get(key);
    if (!v) return std::nullopt;
    return parse_long(*v, "config [" + name_ + "] " + key);
  }

  std::optional<bool> get_bool(const std::string& key)
  {
    const auto v = get(key);
    if (!v) return std::nullopt;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    raise(errc::parse_error, "config [" + name_ + "] " + key + ": expected a boolean, got '" + *v
                                 + "'");
  }

  // After all keys have been read, anything left in the section is a typo.
  void reject_unknown() const
  {
    if (!kv_) return;
    for (const auto& [key, value] : *kv_)
      if (!seen_.count(key))
        raise(errc::parse_error, "config: unknown key '" + key + "' in [" + name_ + "]");
  }

private:
  std::string name_;
  const std::map<std::string, std::string>* kv_ = nullptr;
  std::set<std::string> seen_;
};

} // namespace detail

inline std::vector<optics::eps_mode> parse_mode_list(const std::string& csv,
                                                     const std::string& where)
{
  std::vector<optics::eps_mode> modes;
  for (const auto& token : detail::split_csv(csv)) {
    if (token.empty()) continue;
    const auto m = optics::eps_mode_from_string(token);
    if (!m)
      raise(errc::invalid_argument,
            where + ": unknown mode '" + token
                + "' (expected tabulated_drude, tabulated_plasma, pure_drude or pure_plasma)");
    modes.push_back(*m);
  }
  return modes;
}

inline run_config load_run_config(const std::string& path)
{
  std::ifstream in(path);
  if (!in) raise(errc::io_error, "cannot open config '" + path + "'");
  const auto ini = parse_ini(in, path);

  static const std::set<std::string> known_sections{
      "optics", "eps_grid", "thermal", "geometry", "grid", "stats", "correction"};
  for (const auto& [name, kv] : ini)
    if (!known_sections.count(name))
      raise(errc::parse_error, "config: unknown section [" + name + "]");

  run_config cfg;
  cfg.base_dir = std::filesystem::path(path).parent_path().string();

  detail::section_reader optics_s(ini, "optics");
  cfg.table_path = optics_s.get("table").value_or("");
  if (const auto m = optics_s.get("mode"))
    cfg.modes = parse_mode_list(*m, "config [optics] mode");
  cfg.drude.omega_p_ev = optics_s.require_double("omega_p_ev");
  cfg.drude.gamma_ev = optics_s.require_double("gamma_ev");
  cfg.core_cutoff_ev = optics_s.get_double("core_cutoff_ev").value_or(2.0);
  cfg.tail_exponent = optics_s.get_double("tail_exponent").value_or(3.0);
  cfg.kk_quad_tolerance = optics_s.get_double("quad_tolerance").value_or(1e-6);
  optics_s.reject_unknown();

  detail::section_reader thermal(ini, "thermal");
  cfg.settings.temperature_k = thermal.get_double("temperature_k").value_or(300.0);
  if (const auto lm = thermal.get("l_max"); lm && *lm != "auto")
    cfg.settings.l_max = detail::parse_long(*lm, "config [thermal] l_max");
  cfg.settings.term_tolerance = thermal.get_double("term_tolerance").value_or(1e-8);
  cfg.settings.k_quad_tolerance = thermal.get_double("k_quad_tolerance").value_or(1e-9);
  cfg.settings.zero_t_mode = thermal.get_bool("zero_t_mode").value_or(false);
  thermal.reject_unknown();
  cfg.settings.validate();

  detail::section_reader geom_s(ini, "geometry");
  if (geom_s.present()) {
    sphere_plate::oscillator_geometry g;
    g.sphere_radius_m = geom_s.require_double("r_sphere_um") * 1e-6;
    g.resonance_frequency_hz = geom_s.require_double("f0_hz");
    g.spring_constant_n_per_m = geom_s.require_double("spring_constant_n_per_m");
    g.a_rms_m = geom_s.require_double("a_rms_nm") * 1e-9;
    cfg.roughness_path = geom_s.get("roughness_file").value_or("");
    geom_s.reject_unknown();
    if (!cfg.roughness_path.empty())
      g.roughness = load_roughness(cfg.resolve(cfg.roughness_path));
    g.validate();
    cfg.geometry = g;
  }

  detail::section_reader eps_grid_s(ini, "eps_grid");
  if (eps_grid_s.present()) {
    eps_grid_config e;
    e.xi_min_ev = eps_grid_s.require_double("xi_min_ev");
    e.xi_max_ev = eps_grid_s.require_double("xi_max_ev");
    e.points = eps_grid_s.get_long("points").value_or(0);
    eps_grid_s.reject_unknown();
    if (!(e.xi_min_ev > 0.0) || e.xi_max_ev < e.xi_min_ev || e.points < 1)
      raise(errc::invalid_grid, "config: [eps_grid] needs 0 < xi_min_ev <= xi_max_ev, points >= 1");
    if (e.points == 1 && e.xi_max_ev != e.xi_min_ev)
      raise(errc::invalid_grid, "config: [eps_grid] a single point needs xi_min_ev == xi_max_ev");
    cfg.eps_grid = e;
  }

  detail::section_reader grid_s(ini, "grid");
  if (grid_s.present()) {
    z_grid_config g;
    g.z_min_um = grid_s.require_double("z_min_um");
    g.z_max_um = grid_s.require_double("z_max_um");
    g.points = grid_s.get_long("points").value_or(0);
    const auto spacing = grid_s.get("spacing").value_or("lin");
    if (spacing == "lin") {
      g.log_spacing = false;
    } else if (spacing == "log") {
      g.log_spacing = true;
    } else {
      raise(errc::parse_error, "config: [grid] spacing must be 'lin' or 'log'");
    }
    if (const auto av = grid_s.get("averaging")) {
      const auto m = sphere_plate::averaging_from_string(*av);
      if (!m)
        raise(errc::invalid_argument,
              "config: [grid] averaging must be 'exact' or 'first_term', got '" + *av + "'");
      g.averaging = *m;
    }
    grid_s.reject_unknown();
    if (!(g.z_min_um > 0.0) || g.z_max_um < g.z_min_um || g.points < 1)
      raise(errc::invalid_grid, "config: [grid] needs 0 < z_min_um <= z_max_um, points >= 1");
    if (g.points == 1 && g.z_max_um != g.z_min_um)
      raise(errc::invalid_grid, "config: [grid] a single point needs z_min_um == z_max_um");
    cfg.z_grid = g;
  }

  detail::section_reader stats_s(ini, "stats");
  if (stats_s.present()) {
    cfg.stats.dataset_path = stats_s.get("dataset").value_or("");
    cfg.stats.theory_path = stats_s.get("theory").value_or("");
    if (const auto sm = stats_s.get("sigma_mode")) {
      const auto m = stats::sigma_mode_from_string(*sm);
      if (!m)
        raise(errc::invalid_argument,
              "config: [stats] sigma_mode must be 'f_only' or 'combined', got '" + *sm + "'");
      cfg.stats.sigma = *m;
    }
    cfg.stats.n_fit_params = stats_s.get_long("n_fit_params");
    cfg.stats.exclusion_threshold_sigma = stats_s.get_double("exclusion_threshold_sigma");
    cfg.stats.partial_bound_drude = stats_s.get_double("partial_bound_drude");
    cfg.stats.partial_bound_plasma = stats_s.get_double("partial_bound_plasma");
    stats_s.reject_unknown();
    if (cfg.stats.n_fit_params && *cfg.stats.n_fit_params < 0)
      raise(errc::invalid_settings, "config: [stats] n_fit_params must be >= 0");
    if (cfg.stats.exclusion_threshold_sigma && !(*cfg.stats.exclusion_threshold_sigma >= 0.0))
      raise(errc::invalid_settings, "config: [stats] exclusion_threshold_sigma must be >= 0");
  }

  detail::section_reader corr(ini, "correction");
  if (corr.present()) {
    const auto which = corr.require("which");
    if (which == "none") {
      corr.get("direction"); // tolerated but unused
    } else {
      correction_config c;
      if (which == "eta") {
        c.which = sphere_plate::correction_factor::eta;
      } else if (which == "eta_corr") {
        c.which = sphere_plate::correction_factor::eta_corr;
      } else {
        raise(errc::invalid_argument,
              "config: [correction] which must be 'eta', 'eta_corr' or 'none', got '" + which
                  + "'");
      }
      const auto dir = corr.require("direction");
      if (dir == "multiply") {
        c.direction = sphere_plate::correction_direction::multiply;
      } else if (dir == "divide") {
        c.direction = sphere_plate::correction_direction::divide;
      } else {
        raise(errc::invalid_argument,
              "config: [correction] direction must be 'multiply' or 'divide', got '" + dir + "'");
      }
      cfg.correction = c;
    }
    corr.reject_unknown();
  }

  return cfg;
}

// z grid in meters from the [grid] section.
inline std::vector<double> build_z_grid(const z_grid_config& g)
{
  std::vector<double> z;
  z.reserve(static_cast<std::size_t>(g.points));
  if (g.points == 1) {
    z.push_back(g.z_min_um * 1e-6);
    return z;
  }
  for (long i = 0; i < g.points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(g.points - 1);
    double zi_um;
    if (g.log_spacing) {
      zi_um = i == g.points - 1 ? g.z_max_um
                                : g.z_min_um * std::exp(t * std::log(g.z_max_um / g.z_min_um));
    } else {
      zi_um = i == g.points - 1 ? g.z_max_um : g.z_min_um + t * (g.z_max_um - g.z_min_um);
    }
    z.push_back(zi_um * 1e-6);
  }
  return z;
}

// log grid in eV from the [eps_grid] section.
inline std::vector<double> build_xi_grid(const eps_grid_config& g)
{
  std::vector<double> xi;
  xi.reserve(static_cast<std::size_t>(g.points));
  if (g.points == 1) {
    xi.push_back(g.xi_min_ev);
    return xi;
  }
  for (long i = 0; i < g.points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(g.points - 1);
    xi.push_back(i == g.points - 1 ? g.xi_max_ev
                                   : g.xi_min_ev * std::exp(t * std::log(g.xi_max_ev / g.xi_min_ev)));
  }
  return xi;
}

} // namespace lifshift::io
