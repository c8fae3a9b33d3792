#include "antiito/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

#include "CLI11.hpp"

#include "antiito/errors.hpp"
#include "antiito/feller.hpp"

namespace antiito::cli {
namespace {

using nlohmann::json;

// Typed, strict access to one object of the config document.
class Section {
 public:
  Section(const json& doc, std::string name, std::set<std::string> allowed) : name_(std::move(name)) {
    if (!doc.contains(name_)) return;
    obj_ = &doc.at(name_);
    if (!obj_->is_object()) throw ConfigError("'" + name_ + "' must be an object");
    for (const auto& [key, _] : obj_->items()) {
      if (!allowed.contains(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
    }
  }

  bool has(const std::string& key) const { return obj_ != nullptr && obj_->contains(key); }

  double number(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(path(key) + " must be a number");
    return v.get<double>();
  }
  std::uint64_t unsigned_int(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError(path(key) + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_boolean()) throw ConfigError(path(key) + " must be true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) throw ConfigError(path(key) + " must be a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) throw ConfigError(path(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) throw ConfigError(path(key) + " must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  const json& at(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing " + path(key));
    return obj_->at(key);
  }
  std::string path(const std::string& key) const { return "'" + name_ + "." + key + "'"; }

  std::string name_;
  const json* obj_ = nullptr;
};

Scheme parse_scheme(const std::string& s) {
  for (Scheme k : {Scheme::EulerMaruyama, Scheme::Milstein, Scheme::LogTransform, Scheme::AlphaPoint}) {
    if (s == to_string(k)) return k;
  }
  throw ConfigError("unknown scheme '" + s + "'");
}

Interpretation parse_interpretation(const std::string& s) {
  for (Interpretation i : {Interpretation::ito(), Interpretation::stratonovich(), Interpretation::hanggi_klimontovich()}) {
    if (s == i.name()) return i;
  }
  throw ConfigError("unknown interpretation '" + s + "'");
}

BoundaryMode parse_boundary(const std::string& s) {
  if (s == "zero_flux") return BoundaryMode::ZeroFlux;
  if (s == "absorbing_at_zero") return BoundaryMode::AbsorbingAtZero;
  throw ConfigError("unknown fpe boundary '" + s + "'");
}

const char* to_string(BoundaryMode m) { return m == BoundaryMode::ZeroFlux ? "zero_flux" : "absorbing_at_zero"; }

std::string num(double x) { return format_number(x); }

std::string params_line(const ModelParams& p) {
  return "q=" + num(p.q) + ",r=" + num(p.r) + ",v=" + num(p.v) + ",c=" + num(p.c) + ",sigma=" + num(p.sigma);
}

std::string sha1_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha1(), nullptr) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

void set_param(ModelParams& p, const std::string& name, double value) {
  if (name == "q") p.q = value;
  else if (name == "r") p.r = value;
  else if (name == "v") p.v = value;
  else if (name == "c") p.c = value;
  else if (name == "sigma") p.sigma = value;
  else throw ConfigError("sweep parameter must be one of q, r, v, c, sigma");
}

std::optional<StationaryDensity> density_if_proper(const ModelParams& p) {
  if (p.sigma <= 0.0 || classify_regime(p) == RegimeClass::DegenerateAtZero) return std::nullopt;
  return StationaryDensity(p);
}

std::string cell_text(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) return format_number(*d);
  if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  return out + "\"";
}

json cell_json(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    if (std::isfinite(*d)) return *d;
    return format_number(*d);
  }
  if (const std::int64_t* i = std::get_if<std::int64_t>(&c)) return *i;
  return std::get<std::string>(c);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << content;
  if (!out.flush()) throw ConfigError("cannot write output file '" + path + "'");
}

Table samples_table(const EnsembleSummary& s) {
  Table t;
  t.columns = {"path", "x"};
  for (std::size_t i = 0; i < s.terminal_samples.size(); ++i) {
    t.rows.push_back({static_cast<std::int64_t>(i), s.terminal_samples[i]});
  }
  return t;
}

std::vector<std::pair<std::string, std::string>> common_header(const ExperimentConfig& cfg) {
  return {
      {"tool", std::string("antiito ") + kToolVersion},
      {"command", to_string(cfg.command)},
      {"params", params_line(cfg.params)},
      {"seed", std::to_string(cfg.sim.seed)},
      {"config_hash", config_hash(cfg.effective)},
  };
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Stationary: return "stationary";
    case Command::Sweep: return "sweep";
    case Command::Classify: return "classify";
    case Command::Fpe: return "fpe";
    case Command::Compare: return "compare";
  }
  return "unknown";
}

Command parse_command(const std::string& name) {
  for (Command c : {Command::Simulate, Command::Stationary, Command::Sweep, Command::Classify, Command::Fpe,
                    Command::Compare}) {
    if (name == to_string(c)) return c;
  }
  throw ConfigError("unknown command '" + name + "'");
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", x);
  return buf;
}

std::string config_hash(const nlohmann::json& doc) {
  const std::string content = doc.dump();
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  return sha1_hex(blob + content);
}

ExperimentConfig parse_config(Command command, const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> sections = {"params", "simulation", "stationary", "sweep", "fpe", "output"};
  for (const auto& [key, _] : doc.items()) {
    if (!sections.contains(key)) throw ConfigError("unknown config section '" + key + "'");
  }
  ExperimentConfig cfg;
  cfg.command = command;
  cfg.effective = doc;

  const Section params(doc, "params", {"q", "r", "v", "c", "sigma"});
  cfg.params = {params.number("q"), params.number("r"), params.number("v"), params.number("c"),
                params.number("sigma")};

  const Section sim(doc, "simulation",
                    {"dt", "t_final", "n_paths", "seed", "scheme", "interpretation", "x0", "absorb_eps", "burn_in",
                     "histogram_bins"});
  SimulationConfig& s = cfg.sim;
  if (sim.has("dt")) s.dt = sim.number("dt");
  if (sim.has("t_final")) s.t_final = sim.number("t_final");
  if (sim.has("n_paths")) s.n_paths = sim.unsigned_int("n_paths");
  if (sim.has("seed")) s.seed = sim.unsigned_int("seed");
  if (sim.has("scheme")) s.scheme = parse_scheme(sim.string("scheme"));
  if (sim.has("interpretation")) s.interp = parse_interpretation(sim.string("interpretation"));
  if (sim.has("x0")) s.x0 = sim.number("x0");
  if (sim.has("absorb_eps")) s.absorb_eps = sim.number("absorb_eps");
  if (sim.has("burn_in")) s.burn_in = sim.number("burn_in");
  if (sim.has("histogram_bins")) s.histogram_bins = sim.unsigned_int("histogram_bins");

  const Section st(doc, "stationary", {"points", "x_max"});
  if (st.has("points")) cfg.stationary.points = st.unsigned_int("points");
  if (st.has("x_max")) cfg.stationary.x_max = st.number("x_max");

  const Section sw(doc, "sweep", {"parameter", "values", "values_are_squared", "monte_carlo"});
  if (doc.contains("sweep")) {
    SweepAxis axis;
    axis.parameter = sw.string("parameter");
    axis.values = sw.numbers("values");
    if (sw.has("values_are_squared")) axis.values_are_squared = sw.boolean("values_are_squared");
    if (sw.has("monte_carlo")) axis.monte_carlo = sw.boolean("monte_carlo");
    static const std::set<std::string> names = {"q", "r", "v", "c", "sigma"};
    if (!names.contains(axis.parameter)) throw ConfigError("sweep parameter must be one of q, r, v, c, sigma");
    if (axis.values_are_squared && axis.parameter != "sigma") {
      throw ConfigError("values_are_squared applies to the sigma axis only");
    }
    cfg.sweep = std::move(axis);
  }

  const Section fp(doc, "fpe", {"x_max", "n_cells", "t_final", "dt", "boundary", "x0", "snapshots"});
  if (fp.has("x_max")) cfg.fpe.x_max = fp.number("x_max");
  if (fp.has("n_cells")) cfg.fpe.n_cells = fp.unsigned_int("n_cells");
  if (fp.has("t_final")) cfg.fpe.t_final = fp.number("t_final");
  if (fp.has("dt")) cfg.fpe.dt = fp.number("dt");
  if (fp.has("boundary")) cfg.fpe.boundary = parse_boundary(fp.string("boundary"));
  if (fp.has("x0")) cfg.fpe.x0 = fp.number("x0");
  if (fp.has("snapshots")) cfg.fpe.snapshots = fp.numbers("snapshots");

  const Section out(doc, "output", {"path", "format", "samples_path"});
  if (out.has("path")) cfg.output_path = out.string("path");
  if (out.has("format")) {
    const std::string f = out.string("format");
    if (f == "csv") cfg.format = Format::Csv;
    else if (f == "json") cfg.format = Format::Json;
    else throw ConfigError("output.format must be csv or json");
  }
  if (out.has("samples_path")) cfg.samples_path = out.string("samples_path");

  if (command == Command::Sweep && !cfg.sweep) throw ConfigError("sweep command needs a 'sweep' section");
  return cfg;
}

Table run_simulate(const ExperimentConfig& cfg) {
  const EnsembleSummary s = simulate_ensemble(cfg.sim, cfg.params);
  Table t;
  t.header = {
      {"scheme", to_string(cfg.sim.scheme)},
      {"interpretation", cfg.sim.interp.name()},
      {"dt", num(cfg.sim.step_size())},
      {"t_final", num(cfg.sim.t_final)},
      {"n_paths", std::to_string(cfg.sim.n_paths)},
      {"x0", num(cfg.sim.x0)},
      {"absorb_eps", num(cfg.sim.absorb_threshold())},
      {"extinct_fraction", num(s.extinct_fraction)},
      {"mean", num(s.mean)},
      {"ks_vs_analytic", s.ks_vs_analytic ? num(*s.ks_vs_analytic) : "none"},
      {"blown_paths", std::to_string(s.blown_paths)},
  };
  t.columns = {"bin_lo", "bin_hi", "count"};
  for (std::size_t i = 0; i < s.histogram.counts.size(); ++i) {
    t.rows.push_back({s.histogram.edges[i], s.histogram.edges[i + 1], static_cast<std::int64_t>(s.histogram.counts[i])});
  }
  if (cfg.samples_path) {
    Table samples = samples_table(s);
    samples.header = common_header(cfg);
    write_file(*cfg.samples_path, render(samples, cfg.format));
  }
  return t;
}

Table run_stationary(const ExperimentConfig& cfg) {
  validate_stochastic(cfg.params);
  Table t;
  const RegimeClass regime = classify_regime(cfg.params);
  t.header.emplace_back("regime", to_string(regime));
  if (regime == RegimeClass::DegenerateAtZero) {
    t.header.emplace_back("degenerate", "true");
    t.columns = {"degenerate"};
    t.rows.push_back({std::string("true")});
    return t;
  }
  if (cfg.stationary.points == 0) throw ConfigError("stationary.points must be positive");
  const StationaryDensity d(cfg.params);
  const double x_max = cfg.stationary.x_max.value_or(suggested_x_max(cfg.params));
  if (!(x_max > 0.0) || !std::isfinite(x_max)) throw ConfigError("stationary.x_max must be positive");
  t.header.emplace_back("k0", num(std::exp(d.log_k0())));
  t.header.emplace_back("log_k0", num(d.log_k0()));
  t.header.emplace_back("mode", num(stationary_mode(cfg.params)));
  t.columns = {"x", "p"};
  const std::size_t n = cfg.stationary.points;
  for (std::size_t i = 1; i <= n; ++i) {
    const double x = x_max * static_cast<double>(i) / static_cast<double>(n);
    t.rows.push_back({x, std::exp(d.log_pdf(x))});
  }
  return t;
}

Table run_sweep(const ExperimentConfig& cfg) {
  const SweepAxis& axis = *cfg.sweep;
  Table t;
  t.header = {{"sweep_parameter", axis.parameter}, {"values_are_squared", axis.values_are_squared ? "true" : "false"}};
  t.columns = {"value", "sigma2", "regime", "mode", "extinct_fraction"};
  for (double value : axis.values) {
    ModelParams p = cfg.params;
    if (axis.values_are_squared) {
      if (!(value >= 0.0)) throw DomainError("squared sweep values must be non-negative");
      set_param(p, axis.parameter, std::sqrt(value));
    } else {
      set_param(p, axis.parameter, value);
    }
    validate(p);
    std::vector<Cell> row = {value, p.sigma2(), std::string(to_string(classify_regime(p))), stationary_mode(p)};
    if (axis.monte_carlo) {
      row.emplace_back(simulate_ensemble(cfg.sim, p).extinct_fraction);
    } else {
      row.emplace_back(std::string());
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table run_classify(const ExperimentConfig& cfg) {
  const BoundaryReport report = classify_boundary(cfg.params);
  Table t;
  t.header = {{"positive_net_growth", report.positive_net_growth ? "true" : "false"}};
  t.columns = {"boundary", "sigma", "sigma_value", "n", "n_value", "class"};
  auto row = [](const char* name, const BoundaryVerdict& v) {
    return std::vector<Cell>{std::string(name),
                             std::string(v.sigma.diverges ? "diverges" : "finite"),
                             v.sigma.value,
                             std::string(v.n.diverges ? "diverges" : "finite"),
                             v.n.value,
                             std::string(to_string(v.cls))};
  };
  t.rows.push_back(row("zero", report.zero));
  t.rows.push_back(row("infinity", report.infinity));
  return t;
}

Table run_fpe(const ExperimentConfig& cfg) {
  validate_stochastic(cfg.params);
  const FpeOptions& o = cfg.fpe;
  const double x_max = o.x_max.value_or(suggested_x_max(cfg.params));
  const Grid grid(0.0, x_max, o.n_cells);
  const double dt = o.dt.value_or(max_stable_dt(grid, cfg.params));
  const double x0 = o.x0.value_or(cfg.sim.x0);
  std::vector<double> times = o.snapshots;
  if (times.empty()) times.push_back(o.t_final);
  const std::vector<DensityField> fields = fpe_evolve_snapshots(cfg.params, x0, times, grid, dt, o.boundary);
  const DensityField& last = fields.back();

  Table t;
  t.header = {
      {"boundary", to_string(o.boundary)},
      {"x_max", num(x_max)},
      {"n_cells", std::to_string(o.n_cells)},
      {"dt", num(dt)},
      {"x0", num(x0)},
      {"final_mass", num(last.mass())},
      {"absorbed_mass", num(last.absorbed_mass)},
      {"clip_events", std::to_string(last.clip_events)},
  };
  if (auto d = density_if_proper(cfg.params); d && o.boundary == BoundaryMode::ZeroFlux) {
    t.header.emplace_back("l1_vs_stationary", num(l1_distance(last, [&](double x) { return d->cdf(x); })));
  }
  t.columns = {"t", "x", "p"};
  for (const DensityField& f : fields) {
    for (std::size_t i = 0; i < grid.n_cells(); ++i) t.rows.push_back({f.time, grid.center(i), f.values[i]});
  }
  return t;
}

Table run_compare(const ExperimentConfig& cfg) {
  validate_stochastic(cfg.params);
  const auto density = density_if_proper(cfg.params);
  Table t;
  t.columns = {"interpretation", "extinct_fraction", "mean", "ks_vs_stationary", "eradicated"};
  std::string eradicated_under;
  for (Interpretation interp : {Interpretation::ito(), Interpretation::hanggi_klimontovich()}) {
    SimulationConfig sim = cfg.sim;
    sim.interp = interp;
    const EnsembleSummary s = simulate_ensemble(sim, cfg.params);
    const double ks = density ? ks_distance(s.terminal_samples, [&](double x) { return density->cdf(x); })
                              : std::numeric_limits<double>::quiet_NaN();
    const bool eradicated = s.extinct_fraction >= 0.99;
    if (eradicated) eradicated_under += std::string(eradicated_under.empty() ? "" : ";") + interp.name();
    t.rows.push_back({std::string(interp.name()), s.extinct_fraction, s.mean, ks,
                      std::string(eradicated ? "true" : "false")});
  }
  t.header = {
      {"scheme", to_string(cfg.sim.scheme)},
      {"dt", num(cfg.sim.step_size())},
      {"t_final", num(cfg.sim.t_final)},
      {"n_paths", std::to_string(cfg.sim.n_paths)},
      {"eradicated_under", eradicated_under.empty() ? "none" : eradicated_under},
  };
  return t;
}

Table run_command(const ExperimentConfig& cfg) {
  Table t;
  switch (cfg.command) {
    case Command::Simulate: t = run_simulate(cfg); break;
    case Command::Stationary: t = run_stationary(cfg); break;
    case Command::Sweep: t = run_sweep(cfg); break;
    case Command::Classify: t = run_classify(cfg); break;
    case Command::Fpe: t = run_fpe(cfg); break;
    case Command::Compare: t = run_compare(cfg); break;
  }
  auto header = common_header(cfg);
  header.insert(header.end(), t.header.begin(), t.header.end());
  t.header = std::move(header);
  return t;
}

std::string render(const Table& table, Format format) {
  if (format == Format::Json) {
    json doc;
    json header = json::object();
    for (const auto& [k, v] : table.header) header[k] = v;
    doc["header"] = std::move(header);
    doc["columns"] = table.columns;
    json rows = json::array();
    for (const auto& row : table.rows) {
      json r = json::array();
      for (const Cell& c : row) r.push_back(cell_json(c));
      rows.push_back(std::move(r));
    }
    doc["rows"] = std::move(rows);
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  for (const auto& [k, v] : table.header) out << "# " << k << ": " << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_field(cell_text(row[i]));
    out << '\n';
  }
  return out.str();
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Stochastic chemotherapy model laboratory", "antiito"};
  std::string command, config_path;
  std::optional<double> q, r, v, c, sigma;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
  app.add_option("command", command, "simulate | stationary | sweep | classify | fpe | compare")->required();
  app.add_option("--config", config_path, "JSON experiment configuration");
  app.add_option("--q", q, "proliferation rate");
  app.add_option("--r", r, "crowding coefficient");
  app.add_option("--v", v, "logistic exponent");
  app.add_option("--c", c, "drug kill rate");
  app.add_option("--sigma", sigma, "noise intensity");
  app.add_option("--seed", seed, "ensemble seed");
  app.add_option("--out", out_path, "output file (default stdout)");
  app.set_version_flag("--version", std::string("antiito ") + kToolVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    const Command cmd = parse_command(command);
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config '" + config_path + "'");
      try {
        doc = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
      if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    }
    auto override_param = [&](const char* key, const std::optional<double>& value) {
      if (value) doc["params"][key] = *value;
    };
    override_param("q", q);
    override_param("r", r);
    override_param("v", v);
    override_param("c", c);
    override_param("sigma", sigma);
    if (seed) doc["simulation"]["seed"] = *seed;
    if (out_path) doc["output"]["path"] = *out_path;

    const ExperimentConfig cfg = parse_config(cmd, doc);
    const Table table = run_command(cfg);
    for (const auto& [k, val] : table.header) {
      if (k == "degenerate" && val == "true") {
        std::cerr << "warning: sigma^2 <= 2(c - q); the stationary law is the point mass at 0\n";
      }
      if (k == "positive_net_growth" && val == "false") {
        std::cerr << "note: q - c <= 0, no interior stable fixed point\n";
      }
    }
    const std::string text = render(table, cfg.format);
    if (cfg.output_path.empty()) {
      std::cout << text << std::flush;
    } else {
      write_file(cfg.output_path, text);
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DegenerateDensity& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace antiito::cli
