#include "clelab/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "clelab/json_io.hpp"
#include "json.hpp"

namespace clelab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
  ConfigFile cfg;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument("config line " + std::to_string(lineno) +
                                    ": unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      cfg.sections_.emplace_back(current, Section{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || current.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value inside a section");
    cfg.sections_.back().second.emplace_back(trim(line.substr(0, eq)),
                                             trim(line.substr(eq + 1)));
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string ConfigFile::serialize() const {
  std::ostringstream os;
  for (const auto& [name, entries] : sections_) {
    os << "[" << name << "]\n";
    for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
    os << "\n";
  }
  return os.str();
}

const std::string* ConfigFile::find(const std::string& section,
                                    const std::string& key) const {
  for (const auto& [name, entries] : sections_) {
    if (name != section) continue;
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
  }
  return nullptr;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::string ConfigFile::get_string(const std::string& section,
                                   const std::string& key) const {
  const std::string* v = find(section, key);
  if (!v)
    throw std::invalid_argument("config: missing [" + section + "] " + key);
  return *v;
}

std::string ConfigFile::get_string_or(const std::string& section,
                                      const std::string& key,
                                      const std::string& fallback) const {
  const std::string* v = find(section, key);
  return v ? *v : fallback;
}

double ConfigFile::get_number(const std::string& section,
                              const std::string& key) const {
  const std::string s = get_string(section, key);
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (trim(s.substr(used)) != "")
    throw std::invalid_argument("config: [" + section + "] " + key +
                                " is not a number: " + s);
  return v;
}

double ConfigFile::get_number_or(const std::string& section,
                                 const std::string& key,
                                 double fallback) const {
  return has(section, key) ? get_number(section, key) : fallback;
}

long ConfigFile::get_integer_or(const std::string& section,
                                const std::string& key, long fallback) const {
  if (!has(section, key)) return fallback;
  return std::lround(get_number(section, key));
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key,
                             bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get_string(section, key);
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw std::invalid_argument("config: [" + section + "] " + key +
                              " is not a boolean: " + v);
}

std::vector<double> ConfigFile::get_numbers(const std::string& section,
                                            const std::string& key) const {
  std::string s = get_string(section, key);
  for (char& c : s)
    if (c == ',') c = ' ';
  std::istringstream in(s);
  std::vector<double> out;
  double v;
  while (in >> v) out.push_back(v);
  if (out.empty())
    throw std::invalid_argument("config: [" + section + "] " + key +
                                " holds no numbers");
  return out;
}

Cplx ConfigFile::get_complex_or(const std::string& section,
                                const std::string& key, Cplx fallback) const {
  if (!has(section, key)) return fallback;
  const auto v = get_numbers(section, key);
  if (v.size() == 1) return Cplx{v[0], 0.0};
  if (v.size() == 2) return Cplx{v[0], v[1]};
  throw std::invalid_argument("config: [" + section + "] " + key +
                              " must hold one or two numbers");
}

void ConfigFile::set(const std::string& section, const std::string& key,
                     const std::string& value) {
  for (auto& [name, entries] : sections_) {
    if (name != section) continue;
    for (auto& [k, v] : entries)
      if (k == key) {
        v = value;
        return;
      }
    entries.emplace_back(key, value);
    return;
  }
  sections_.emplace_back(section, Section{{key, value}});
}

namespace {

RegionSpec region_from_config(const ConfigFile& cfg) {
  const std::string kind = cfg.get_string("lattice", "region");
  if (kind == "disk")
    return RegionSpec::disk(cfg.get_complex_or("lattice", "center", {0.0, 0.0}),
                            cfg.get_number("lattice", "radius"));
  if (kind == "annulus")
    return RegionSpec::annulus(
        cfg.get_complex_or("lattice", "center", {0.0, 0.0}),
        cfg.get_number("lattice", "r_inner"),
        cfg.get_number("lattice", "r_outer"));
  if (kind == "plane")
    return RegionSpec::full_plane_proxy(cfg.get_number("lattice", "radius"));
  if (kind == "polygon") {
    const auto nums = cfg.get_numbers("lattice", "vertices");
    if (nums.size() < 6 || nums.size() % 2 != 0)
      throw std::invalid_argument("config: polygon vertices must be x y pairs");
    std::vector<Cplx> pts;
    for (std::size_t i = 0; i + 1 < nums.size(); i += 2)
      pts.emplace_back(nums[i], nums[i + 1]);
    return RegionSpec::polygon(std::move(pts));
  }
  if (kind == "exterior-ellipse") {
    const EllipseSpec e(cfg.get_complex_or("lattice", "center", {0.0, 0.0}),
                        cfg.get_number("lattice", "ellipse_eps"),
                        cfg.get_number_or("lattice", "ellipse_theta", 0.0),
                        cfg.get_number("lattice", "ellipse_b"));
    return RegionSpec::exterior_proxy(ClosedCurve::ellipse(e),
                                      cfg.get_number("lattice", "proxy_radius"));
  }
  if (kind == "exterior-circle")
    return RegionSpec::exterior_proxy(
        ClosedCurve::circle(cfg.get_complex_or("lattice", "center", {0.0, 0.0}),
                            cfg.get_number("lattice", "circle_radius")),
        cfg.get_number("lattice", "proxy_radius"));
  throw std::invalid_argument("config: unknown lattice region kind " + kind);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& cfg) {
  ExperimentConfig ec;
  ec.raw = cfg;
  const double n = cfg.get_number("model", "n");
  const std::string xs = cfg.get_string_or("model", "x", "critical");
  std::optional<double> kappa;
  if (cfg.has("model", "kappa")) kappa = cfg.get_number("model", "kappa");
  ec.model = (xs == "critical") ? ModelParams::critical(n, kappa)
                                : ModelParams(n, std::stod(xs), kappa);

  ec.lattice.region = region_from_config(cfg);
  ec.lattice.spacing = cfg.get_number("lattice", "spacing");

  ec.mc.seed = std::uint64_t(cfg.get_integer_or("mc", "seed", 1));
  ec.mc.thermalization_sweeps =
      int(cfg.get_integer_or("mc", "thermalization_sweeps", 1000));
  ec.mc.measurement_sweeps =
      int(cfg.get_integer_or("mc", "measurement_sweeps", 10000));
  ec.mc.measure_every = int(cfg.get_integer_or("mc", "measure_every", 1));
  ec.mc.enable_topological_move =
      cfg.get_bool_or("mc", "topological_move", false);
  ec.mc.chains = int(cfg.get_integer_or("mc", "chains", 4));
  ec.mc.validate();

  ec.task = cfg.get_string_or("task", "kind", "");
  ec.out_dir = cfg.get_string_or("output", "dir", ".");
  ec.prefix = cfg.get_string_or("output", "prefix", "run");
  ec.workers = int(cfg.get_integer_or("mc", "workers", 0));

  if (const char* env = std::getenv("CLELAB_WORKERS"))
    ec.workers = std::atoi(env);
  if (const char* env = std::getenv("CLELAB_OUTDIR")) ec.out_dir = env;

  // geometry must build before any sampling starts
  (void)build_lattice(ec.lattice.region, ec.lattice.spacing);
  return ec;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_config(ConfigFile::load(path));
}

std::string csv_render(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << "task,geometry_id,eta|eps|theta,value_re,value_im,stderr,n_samples,"
        "seed,chain_count\n";
  char buf[256];
  for (const ResultRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.12g,%.12g,%.12g,%.12g,%ld,%llu,%d\n",
                  r.task.c_str(), r.geometry_id.c_str(), r.knob, r.value_re,
                  r.value_im, r.stderror, r.n_samples,
                  static_cast<unsigned long long>(r.seed), r.chain_count);
    os << buf;
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

namespace {

using nlohmann::ordered_json;

struct TaskContext {
  ExperimentConfig ec;
  std::string csv_path, json_path;

  void emit(const std::vector<ResultRow>& rows, const ordered_json& summary) {
    write_text_file(csv_path, csv_render(rows));
    write_text_file(json_path, summary.dump(2) + "\n");
    std::cout << "wrote " << csv_path << " and " << json_path << "\n";
  }
};

TaskContext make_context(const std::string& config_path,
                         const std::string& expected_task) {
  TaskContext ctx{ExperimentConfig::from_file(config_path), "", ""};
  if (!ctx.ec.task.empty() && ctx.ec.task != expected_task)
    throw std::invalid_argument("config task kind '" + ctx.ec.task +
                                "' does not match subcommand '" +
                                expected_task + "'");
  ctx.csv_path = ctx.ec.out_dir + "/" + ctx.ec.prefix + ".csv";
  ctx.json_path = ctx.ec.out_dir + "/" + ctx.ec.prefix + ".json";
  return ctx;
}

DenominatorTable denominators_from_config(const ExperimentConfig& ec,
                                          const std::vector<double>& etas) {
  const ConfigFile& cfg = ec.raw;
  LatticeJob proxy{RegionSpec::full_plane_proxy(
                       cfg.get_number_or("denominator", "proxy_radius", 4.2)),
                   cfg.get_number_or("denominator", "spacing", 0.125)};
  MCParams mc = ec.mc;
  mc.seed = ec.mc.seed + 0x51ED270B4A90EEULL;
  mc.thermalization_sweeps = int(cfg.get_integer_or(
      "denominator", "thermalization_sweeps", ec.mc.thermalization_sweeps));
  mc.measurement_sweeps = int(cfg.get_integer_or(
      "denominator", "measurement_sweeps", ec.mc.measurement_sweeps));
  return unit_disk_denominators(etas, proxy, ec.model, mc, ec.workers);
}

ordered_json fit_json(const char* model, double value, double err, double chi2,
                      int dof, bool inflated) {
  ordered_json j;
  j["model"] = model;
  j["value"] = value;
  j["stderr"] = err;
  j["fit_chi2"] = chi2;
  j["fit_dof"] = dof;
  j["stderr_inflated"] = inflated;
  return j;
}

int cmd_enumerate(int faces, double n, const std::string& x_text,
                  const std::string& event_name, const std::string& out_dir) {
  const ModelParams p = (x_text == "critical")
                            ? ModelParams::critical(n)
                            : ModelParams(n, std::stod(x_text));
  // smallest centered disk holding at least the requested face count
  double radius = 0.4;
  HexLattice lat = build_lattice(RegionSpec::disk({0.0, 0.0}, radius), 1.0);
  while (lat.n_faces() < faces) {
    radius += 0.2;
    lat = build_lattice(RegionSpec::disk({0.0, 0.0}, radius), 1.0);
  }
  const ExactDistribution dist = enumerate_configs(lat, p);
  double prob = 0.0;
  if (event_name == "single-loop")
    prob = dist.probability_of(
        [](const LoopConfig& c) { return c.occupied_edges() > 0; });
  else if (event_name == "origin-surrounded")
    prob = dist.probability_of([](const LoopConfig& c) {
      const LoopsView v = LoopsView::from(c);
      return eval_event(
          EventSpec::surround_pair(Cplx{0.05, 0.03}, Cplx{-0.05, -0.07}), v);
    });
  else
    throw std::invalid_argument("enumerate: unknown event " + event_name);

  std::printf("P(%s) = %.6f  (faces=%d, states=%zu, n=%g, x=%g)\n",
              event_name.c_str(), prob, lat.n_faces(), dist.states().size(),
              p.n, p.x);
  std::vector<ResultRow> rows{{"enumerate", event_name, 0.0, prob, 0.0, 0.0,
                               long(dist.states().size()), 0, 0}};
  ordered_json j;
  j["task"] = "enumerate";
  j["faces"] = lat.n_faces();
  j["states"] = dist.states().size();
  j["event"] = event_name;
  j["probability"] = prob;
  write_text_file(out_dir + "/enumerate.csv", csv_render(rows));
  write_text_file(out_dir + "/enumerate.json", j.dump(2) + "\n");
  return 0;
}

int cmd_sample(const std::string& config_path, const std::string& resume) {
  TaskContext ctx = make_context(config_path, "sample");
  const ExperimentConfig& ec = ctx.ec;
  const HexLattice lat = build_lattice(ec.lattice.region, ec.lattice.spacing);

  std::vector<Observable> obs;
  obs.push_back({"occupied_fraction",
                 [&lat](const LoopConfig& c, const LoopsView&) {
                   return double(c.occupied_edges()) / double(lat.n_edges());
                 }});
  obs.push_back({"loop_count", [](const LoopConfig& c, const LoopsView&) {
                   return double(c.loop_count());
                 }});
  if (ec.raw.has("task", "event"))
    obs.push_back(event_observable(
        event_from_json(ec.raw.get_string("task", "event")), lat));

  std::vector<ResultRow> rows;
  ordered_json summary;
  summary["task"] = "sample";
  summary["lattice_hash"] = lat.hash();
  summary["observables"] = ordered_json::array();

  std::vector<ChainRunResult> results;
  for (int c = 0; c < ec.mc.chains; ++c) {
    ChainState st(lat, ec.mc.seed, std::uint64_t(c));
    bool resumed = false;
    if (!resume.empty()) {
      const std::string ck_path =
          resume + ".chain" + std::to_string(c) + ".ckpt.json";
      std::ifstream in(ck_path);
      if (!in)
        throw std::invalid_argument("sample: missing checkpoint " + ck_path);
      std::ostringstream buf;
      buf << in.rdbuf();
      MCParams stored;
      checkpoint_restore(buf.str(), lat, &st, &stored);
      resumed = true;
    }
    MCParams mc1 = ec.mc;
    mc1.chains = 1;
    results.push_back(run_chain(st, ec.model, mc1, obs, resumed));
    write_text_file(ctx.ec.out_dir + "/" + ctx.ec.prefix + ".chain" +
                        std::to_string(c) + ".ckpt.json",
                    checkpoint_to_json(st, ec.mc));
  }
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::vector<BinnedEstimate> parts;
    for (const auto& r : results) parts.push_back(r.estimates[i]);
    const BinnedEstimate est = BinnedEstimate::from_chains(parts);
    rows.push_back({"sample", obs[i].name, 0.0, est.mean, 0.0, est.stderror,
                    est.n_samples, ec.mc.seed, ec.mc.chains});
    ordered_json o;
    o["name"] = obs[i].name;
    o["mean"] = est.mean;
    o["stderr"] = est.stderror;
    o["n_samples"] = est.n_samples;
    summary["observables"].push_back(o);
  }
  ctx.emit(rows, summary);
  return 0;
}

int cmd_estimate_m(const std::string& config_path) {
  TaskContext ctx = make_context(config_path, "estimate-m");
  const ExperimentConfig& ec = ctx.ec;
  const EllipseSpec A(ec.raw.get_complex_or("task", "ellipse_center", {0, 0}),
                      ec.raw.get_number("task", "ellipse_eps"),
                      ec.raw.get_number_or("task", "ellipse_theta", 0.0),
                      ec.raw.get_number("task", "ellipse_b"));
  const std::vector<double> etas = ec.raw.get_numbers("task", "eta");
  const DenominatorTable den = denominators_from_config(ec, etas);
  const WeightRatioEstimate m =
      estimate_m(ec.lattice, A, ec.model, ec.mc, etas, den, ec.workers);

  std::vector<ResultRow> rows;
  const std::string gid = "ellipse_b" + std::to_string(A.b);
  for (const auto& pt : m.points)
    rows.push_back({"estimate-m", gid, pt.eta, pt.ratio.value, 0.0,
                    pt.ratio.stderror, pt.numerator.n_samples, ec.mc.seed,
                    ec.mc.chains});
  ordered_json j;
  j["task"] = "estimate-m";
  j["extrapolation"] = fit_json(m.model.c_str(), m.value, m.stderror,
                                m.fit_chi2, m.fit_dof, m.stderr_inflated);
  ctx.emit(rows, j);
  std::printf("m = %.6f +- %.6f (eta -> 0, %s)\n", m.value, m.stderror,
              m.model.c_str());
  return 0;
}

int cmd_estimate_z(const std::string& config_path) {
  TaskContext ctx = make_context(config_path, "estimate-z");
  const ExperimentConfig& ec = ctx.ec;
  ZGeometry g;
  g.u_center = ec.raw.get_complex_or("task", "u_center", {0, 0});
  g.u_radius = ec.raw.get_number("task", "u_radius");
  g.v_center = ec.raw.get_complex_or("task", "v_center", {0, 0});
  g.v_radius = ec.raw.get_number("task", "v_radius");
  g.proxy_radius = ec.raw.get_number("task", "proxy_radius");
  g.spacing = ec.lattice.spacing;
  const std::vector<double> widths = ec.raw.get_numbers("task", "widths");
  const RelPartitionEstimate z =
      estimate_Z(g, ec.model, ec.mc, widths, ec.workers);

  std::vector<ResultRow> rows;
  for (const auto& pt : z.points)
    rows.push_back({"estimate-z", "u_r" + std::to_string(g.u_radius), pt.width,
                    pt.ratio.value, 0.0, pt.ratio.stderror, 0, ec.mc.seed,
                    ec.mc.chains});
  ordered_json j;
  j["task"] = "estimate-z";
  j["extrapolation"] = fit_json(z.model.c_str(), z.value, z.stderror,
                                z.fit_chi2, z.fit_dof, z.stderr_inflated);
  ctx.emit(rows, j);
  std::printf("Z = %.6f +- %.6f (width -> 0)\n", z.value, z.stderror);
  return 0;
}

int cmd_estimate_tau(const std::string& config_path) {
  TaskContext ctx = make_context(config_path, "estimate-tau");
  const ExperimentConfig& ec = ctx.ec;
  TauParams tp;
  tp.eps_grid = ec.raw.get_numbers("task", "eps");
  tp.theta_grid_size = int(ec.raw.get_integer_or("task", "theta_grid", 16));
  tp.b = ec.raw.get_number_or("task", "b", 2.0);
  tp.eta_grid = ec.raw.get_numbers("task", "eta");
  const Cplx w = ec.raw.get_complex_or("task", "w", {0, 0});
  EventSpec X = EventSpec::sure();
  if (ec.raw.has("task", "event"))
    X = event_from_json(ec.raw.get_string("task", "event"));

  // matched normalization on a plane proxy at the tau scale
  double reach = 0.0;
  for (const double e : tp.eps_grid)
    reach = std::max(reach, e * (tp.b + 1.0 / tp.b));
  const double norm_radius = ec.raw.get_number_or(
      "task", "norm_proxy_radius", 4.0 * reach + 2.0 * ec.lattice.spacing);
  const LatticeJob norm_proxy{RegionSpec::full_plane_proxy(norm_radius),
                              ec.lattice.spacing};
  MCParams mc_norm = ec.mc;
  mc_norm.seed = ec.mc.seed + 0x7E57ULL;
  const TauNormalization norm =
      estimate_tau_normalization(norm_proxy, ec.model, mc_norm, tp, ec.workers);

  const StressTensorEstimate tau =
      estimate_tau(ec.lattice, w, X, ec.model, ec.mc, tp, norm, ec.workers);

  std::vector<ResultRow> rows;
  for (const auto& pt : tau.points)
    rows.push_back({"estimate-tau", "b" + std::to_string(tp.b), pt.eps,
                    pt.value.real(), pt.value.imag(),
                    std::max(pt.stderror.real(), pt.stderror.imag()), 0,
                    ec.mc.seed, ec.mc.chains});
  ordered_json j;
  j["task"] = "estimate-tau";
  j["value"] = {tau.value.real(), tau.value.imag()};
  j["stderr"] = {tau.stderror.real(), tau.stderror.imag()};
  j["theta_grid_size"] = tau.theta_grid_size;
  j["scale_relative_error"] = tau.scale_relative_error;
  j["model"] = tau.model;
  j["normalization_proxy_radius"] = norm_radius;
  ctx.emit(rows, j);
  std::printf("tau = (%.3e, %.3e) +- (%.3e, %.3e)\n", tau.value.real(),
              tau.value.imag(), tau.stderror.real(), tau.stderror.imag());
  return 0;
}

int cmd_ward_check(const std::string& config_path) {
  TaskContext ctx = make_context(config_path, "ward-check");
  const ExperimentConfig& ec = ctx.ec;
  WardOptions opts;
  opts.tau.eps_grid = ec.raw.get_numbers("task", "eps");
  opts.tau.theta_grid_size =
      int(ec.raw.get_integer_or("task", "theta_grid", 16));
  opts.tau.b = ec.raw.get_number_or("task", "b", 2.0);
  opts.tau.eta_grid = ec.raw.get_numbers("task", "eta");
  opts.displacement = ec.raw.get_number_or("task", "displacement", 0.0);
  const Cplx w = ec.raw.get_complex_or("task", "w", {0, 0});
  auto read_points = [&](const char* key) {
    const auto nums = ec.raw.get_numbers("task", key);
    if (nums.size() % 2 != 0)
      throw std::invalid_argument("config: point list needs x y pairs");
    std::vector<Cplx> pts;
    for (std::size_t i = 0; i + 1 < nums.size(); i += 2)
      pts.emplace_back(nums[i], nums[i + 1]);
    return pts;
  };
  const auto g1 = read_points("group1");
  const auto g2 = read_points("group2");

  double reach = 0.0;
  for (const double e : opts.tau.eps_grid)
    reach = std::max(reach, e * (opts.tau.b + 1.0 / opts.tau.b));
  double far = reach + std::abs(w);
  for (const Cplx pt : g1) far = std::max(far, std::abs(pt));
  for (const Cplx pt : g2) far = std::max(far, std::abs(pt));
  const double norm_radius = ec.raw.get_number_or(
      "task", "norm_proxy_radius", 4.0 * far + 2.0 * ec.lattice.spacing);
  const LatticeJob norm_proxy{RegionSpec::full_plane_proxy(norm_radius),
                              ec.lattice.spacing};
  MCParams mc_norm = ec.mc;
  mc_norm.seed = ec.mc.seed + 0x7E57ULL;
  const TauNormalization norm = estimate_tau_normalization(
      norm_proxy, ec.model, mc_norm, opts.tau, ec.workers);

  const WardReport rep = ward_check(ec.lattice, w, g1, g2, ec.model, ec.mc,
                                    opts, norm, ec.workers);
  std::vector<ResultRow> rows{
      {"ward-check", "lhs", 0.0, rep.lhs.real(), rep.lhs.imag(),
       std::max(rep.lhs_err.real(), rep.lhs_err.imag()), 0, ec.mc.seed,
       ec.mc.chains},
      {"ward-check", "rhs", 0.0, rep.rhs.real(), rep.rhs.imag(),
       std::max(rep.rhs_err.real(), rep.rhs_err.imag()), 0, ec.mc.seed,
       ec.mc.chains}};
  ordered_json j;
  j["task"] = "ward-check";
  j["lhs"] = {rep.lhs.real(), rep.lhs.imag()};
  j["lhs_err"] = {rep.lhs_err.real(), rep.lhs_err.imag()};
  j["rhs"] = {rep.rhs.real(), rep.rhs.imag()};
  j["rhs_err"] = {rep.rhs_err.real(), rep.rhs_err.imag()};
  j["sigma_distance"] = rep.sigma_distance;
  ctx.emit(rows, j);
  std::printf("ward residual: %.2f sigma\n", rep.sigma_distance);
  return rep.sigma_distance <= 3.0 ? 0 : 3;
}

int cmd_central_charge(const std::string& config_path) {
  TaskContext ctx = make_context(config_path, "central-charge");
  const ExperimentConfig& ec = ctx.ec;
  const std::string method =
      ec.raw.get_string_or("task", "method", "transformation_law");
  CentralChargeFit fit;
  if (method == "transformation_law") {
    TransformationLawGeometry g;
    g.b = ec.raw.get_number_or("task", "b", 2.0);
    g.ellipse_scale = ec.raw.get_number_or("task", "ellipse_scale", 8.0);
    g.proxy_radius = ec.raw.get_number_or("task", "proxy_radius", 48.0);
    g.spacing = ec.lattice.spacing;
    g.w_points = ec.raw.get_numbers("task", "w_points");
    g.tau.eps_grid = ec.raw.get_numbers("task", "eps");
    g.tau.theta_grid_size =
        int(ec.raw.get_integer_or("task", "theta_grid", 16));
    g.tau.b = ec.raw.get_number_or("task", "tau_b", 2.0);
    g.tau.eta_grid = ec.raw.get_numbers("task", "eta");
    fit = central_charge_transformation_law(g, ec.model, ec.mc, ec.workers);
  } else if (method == "logZ_schwarzian") {
    LogZSchwarzianGeometry g;
    g.b = ec.raw.get_number_or("task", "b", 2.0);
    g.ellipse_scale = ec.raw.get_number_or("task", "ellipse_scale", 8.0);
    g.d_center = ec.raw.get_complex_or("task", "d_center", {28.0, 0.0});
    g.d_radius = ec.raw.get_number_or("task", "d_radius", 4.0);
    g.annulus_width = ec.raw.get_number_or("task", "annulus_width", 3.0);
    g.proxy_radius = ec.raw.get_number_or("task", "proxy_radius", 48.0);
    g.spacing = ec.lattice.spacing;
    g.step = ec.raw.get_number_or("task", "step", 0.5);
    fit = central_charge_logZ_schwarzian(g, ec.model, ec.mc, ec.workers);
  } else {
    throw std::invalid_argument("central-charge: unknown method " + method);
  }

  std::vector<ResultRow> rows{{"central-charge", fit.method, 0.0, fit.c, 0.0,
                               fit.c_err, 0, ec.mc.seed, ec.mc.chains}};
  ordered_json j;
  j["task"] = "central-charge";
  j["method"] = fit.method;
  j["c"] = fit.c;
  j["c_err"] = fit.c_err;
  j["kappa_implied"] = fit.kappa_implied;
  j["fit_chi2"] = fit.fit_chi2;
  j["fit_dof"] = fit.fit_dof;
  j["resolved"] = fit.resolved;
  ctx.emit(rows, j);
  std::printf("c = %.4f +- %.4f (%s)%s\n", fit.c, fit.c_err, fit.method.c_str(),
              fit.resolved ? "" : "  [not resolved]");
  return fit.resolved ? 0 : 3;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{
      "Monte Carlo laboratory for critical O(n) loop ensembles and "
      "renormalized stress-tensor observables"};
  app.require_subcommand(1);

  auto* selftest = app.add_subcommand(
      "selftest", "run the analytic and oracle suites, print pass/fail");

  auto* enumerate =
      app.add_subcommand("enumerate", "exact small-lattice enumeration");
  int en_faces = 1;
  double en_n = 1.0;
  std::string en_x = "critical", en_event = "single-loop", en_out = ".";
  enumerate->add_option("--faces", en_faces, "minimum active face count");
  enumerate->add_option("--n", en_n, "loop fugacity n");
  enumerate->add_option("--x", en_x, "edge weight x or 'critical'");
  enumerate->add_option("--event", en_event, "single-loop | origin-surrounded");
  enumerate->add_option("--out", en_out, "output directory");

  std::string config_path, resume_path;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config file")
        ->required();
  };
  auto* sample = app.add_subcommand("sample", "run chains, write checkpoints");
  add_config(sample);
  sample->add_option("--resume", resume_path,
                     "checkpoint prefix to continue from");
  auto* em = app.add_subcommand("estimate-m", "renormalized weight m");
  add_config(em);
  auto* ez = app.add_subcommand("estimate-z", "relative partition function");
  add_config(ez);
  auto* et = app.add_subcommand("estimate-tau", "stress-tensor observable");
  add_config(et);
  auto* wc = app.add_subcommand("ward-check", "conformal Ward identity check");
  add_config(wc);
  auto* cc = app.add_subcommand("central-charge", "central-charge fits");
  add_config(cc);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (selftest->parsed()) return run_selftest(std::cout) ? 0 : 2;
    if (enumerate->parsed())
      return cmd_enumerate(en_faces, en_n, en_x, en_event, en_out);
    if (sample->parsed()) return cmd_sample(config_path, resume_path);
    if (em->parsed()) return cmd_estimate_m(config_path);
    if (ez->parsed()) return cmd_estimate_z(config_path);
    if (et->parsed()) return cmd_estimate_tau(config_path);
    if (wc->parsed()) return cmd_ward_check(config_path);
    if (cc->parsed()) return cmd_central_charge(config_path);
  } catch (const StatisticalResolutionError& e) {
    std::cerr << "statistical resolution failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace clelab
