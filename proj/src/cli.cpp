#include "flexikry/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "flexikry/problems.hpp"
#include "flexikry/solvers.hpp"

namespace flexikry::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  // shared
  std::string solvers;
  double noise = 0.0;
  double eta = 1.01;
  Index iters = 50;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::optional<double> tau_lambda;
  double gamma = 1.0;
  double tau = kDefaultTau;
  bool parallel = false;
  std::string save_problem;
  std::string config;
  // deblur-wavelet
  Index size = 0;
  int levels = 2;
  std::string strategy = "G1";
  std::string image;
  // dynamic-deblur
  Index frames = 9;
  std::optional<Index> obs_frames;
  // anomaly
  Index grid = 10;
  Index times = 8;
  Index obs = 1600;
  Index anomalies = 5;
  double amplitude = 12.0;
  double theta_t = 9.854;
  double theta_s = 555.42;
  Index footprint = 0;
  double lag_weight = 0.5;
};

void add_shared(CLI::App* sub, Options& o) {
  sub->add_option("--solvers", o.solvers, "Comma-separated solver names")->capture_default_str();
  sub->add_option("--noise", o.noise, "Noise level ||e|| / ||A x_true||")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--eta", o.eta, "Discrepancy principle safety factor")->capture_default_str();
  sub->add_option("--iters", o.iters, "Maximum number of iterations")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "Random seed (falls back to FLEXIKRY_SEED, then 0)");
  sub->add_option("--out", o.out, "Output directory")->capture_default_str();
  sub->add_option("--tau-lambda", o.tau_lambda,
                  "Weight of the group term in combined regularization "
                  "(default 1.2 for LSQR-based, 0.8 for GMRES-based solvers)");
  sub->add_option("--gamma", o.gamma, "alpha = gamma * lambda for hybrid-sd")->capture_default_str();
  sub->add_option("--tau", o.tau, "Weight smoothing parameter")->capture_default_str();
  sub->add_flag("--parallel", o.parallel, "Run the solvers concurrently");
  sub->add_option("--save-problem", o.save_problem, "Also write the generated problem to this directory");
  sub->add_option("--config", o.config, "key = value file with defaults for these flags");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
  }
  return items;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::uint64_t resolve_seed(const Options& o) {
  if (o.seed) return *o.seed;
  const char* env = std::getenv("FLEXIKRY_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(env, &used);
    if (used == std::string(env).size()) return v;
  } catch (const std::exception&) {
  }
  throw UsageError(std::string("FLEXIKRY_SEED is not a non-negative integer: '") + env + "'");
}

/// Tracks every file written so the manifest can list it.
class OutputDir {
 public:
  explicit OutputDir(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  template <typename Fn>
  void text(const std::string& name, Fn&& write) {
    std::ofstream f(dir_ / name);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    write(f);
    f.close();
    if (!f) throw std::runtime_error("write failed for " + (dir_ / name).string());
    files_.push_back(name);
  }

  void pgm(const std::string& name, const Image& img) {
    write_pgm(dir_ / name, img);
    files_.push_back(name);
  }

  const fs::path& path() const { return dir_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  fs::path dir_;
  std::vector<std::string> files_;
};

struct Job {
  SolverSpec spec;
  SolverConfig config;
};

std::vector<Job> make_jobs(const Options& o, const TestProblem& problem,
                           const std::function<GroupStructure(const std::string&)>& tagged_groups) {
  std::vector<Job> jobs;
  const auto names = split_list(o.solvers);
  if (names.empty()) throw UsageError("--solvers is empty");
  for (const auto& name : names) {
    Job job;
    try {
      job.spec = parse_solver_name(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    for (const auto& other : jobs) {
      if (other.spec.name == job.spec.name) throw UsageError("solver '" + name + "' listed twice");
    }
    if (job.spec.gmres_family() && !problem.a.is_square()) {
      throw UsageError("solver '" + name + "' needs a square operator; this problem is " +
                       std::to_string(problem.m()) + " x " + std::to_string(problem.n()));
    }
    SolverConfig& c = job.config;
    c.variant = job.spec.variant;
    c.regularizer = job.spec.regularizer;
    if (job.spec.group_tag) c.groups = tagged_groups(*job.spec.group_tag);
    c.tau = o.tau;
    c.eta = o.eta;
    c.tau_lambda = o.tau_lambda ? *o.tau_lambda : (job.spec.gmres_family() ? 0.8 : 1.2);
    c.gamma = o.gamma;
    c.max_iters = o.iters;
    c.lambda_mode = LambdaMode::dp;
    // Validate against the problem before anything runs.
    SolverConfig probe = c;
    probe.max_iters = 0;
    try {
      (void)flexikry::run(problem, probe);
    } catch (const std::invalid_argument& e) {
      throw UsageError("solver '" + name + "': " + e.what());
    }
    jobs.push_back(std::move(job));
  }
  return jobs;
}

std::vector<SolverTrace> run_jobs(const TestProblem& problem, const std::vector<Job>& jobs, bool parallel) {
  std::vector<SolverTrace> traces(jobs.size());
  if (!parallel) {
    for (std::size_t i = 0; i < jobs.size(); ++i) traces[i] = flexikry::run(problem, jobs[i].config);
    return traces;
  }
  std::vector<std::future<SolverTrace>> pending;
  for (const auto& job : jobs) {
    pending.push_back(std::async(std::launch::async,
                                 [&problem, &job] { return flexikry::run(problem, job.config); }));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) traces[i] = pending[i].get();
  return traces;
}

void write_traces(OutputDir& dir, const std::vector<Job>& jobs, const std::vector<SolverTrace>& traces) {
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string& name = jobs[i].spec.name;
    dir.text("errors_" + name + ".csv", [&](std::ostream& f) { write_trace_csv(f, traces[i]); });
    dir.text("lambda_" + name + ".csv", [&](std::ostream& f) { write_lambda_csv(f, traces[i]); });
  }
}

void report(std::ostream& out, const std::vector<Job>& jobs, const std::vector<SolverTrace>& traces) {
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const SolverTrace& t = traces[i];
    out << jobs[i].spec.name << ": " << t.iterations() << " iterations";
    if (!t.records.empty()) {
      out << ", final relative error " << std::setprecision(6) << t.records.back().rel_error;
    }
    if (t.breakdown.occurred) out << " (breakdown at iteration " << t.breakdown.iteration << ")";
    out << '\n';
  }
}

json solver_summary(const std::vector<Job>& jobs, const std::vector<SolverTrace>& traces) {
  json list = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const SolverTrace& t = traces[i];
    json s{{"name", jobs[i].spec.name},
           {"variant", to_string(jobs[i].config.variant)},
           {"regularizer", to_string(jobs[i].config.regularizer)},
           {"tau_lambda", jobs[i].config.tau_lambda},
           {"iterations", t.iterations()},
           {"breakdown", t.breakdown.occurred}};
    if (!t.records.empty()) {
      s["final_lambda"] = t.records.back().lambda;
      const double e = t.records.back().rel_error;
      s["final_rel_error"] = std::isfinite(e) ? json(e) : json(nullptr);
    }
    list.push_back(std::move(s));
  }
  return list;
}

json shared_echo(const Options& o, std::uint64_t seed) {
  return json{{"solvers", o.solvers},
              {"noise", o.noise},
              {"eta", o.eta},
              {"iters", o.iters},
              {"seed", seed},
              {"out", o.out},
              {"tau_lambda", o.tau_lambda ? json(*o.tau_lambda) : json("family default")},
              {"gamma", o.gamma},
              {"tau", o.tau},
              {"parallel", o.parallel},
              {"save_problem", o.save_problem},
              {"config", o.config}};
}

void write_manifest(OutputDir& dir, const std::string& command, json config, std::uint64_t seed,
                    const std::string& started, const std::vector<Job>& jobs,
                    const std::vector<SolverTrace>& traces, const std::vector<std::string>& extra) {
  json m{{"command", command},
         {"config", std::move(config)},
         {"seed", seed},
         {"version", kVersion},
         {"started", started},
         {"finished", timestamp()},
         {"solvers", solver_summary(jobs, traces)}};
  std::vector<std::string> files = dir.files();
  files.push_back("manifest.json");
  m["outputs"] = files;
  if (!extra.empty()) m["problem_files"] = extra;
  dir.text("manifest.json", [&](std::ostream& f) { f << m.dump(2) << '\n'; });
}

std::vector<std::string> maybe_save_problem(const Options& o, const TestProblem& p) {
  if (o.save_problem.empty()) return {};
  save_problem(o.save_problem, p);
  std::vector<std::string> files;
  for (const char* f : {"metadata.json", "groups.txt", "x_true.txt", "b.txt"}) {
    files.push_back((fs::path(o.save_problem) / f).string());
  }
  return files;
}

Image slice(const Vector& v, Index offset, Index rows, Index cols) {
  return Image{rows, cols, v.segment(offset, rows * cols)};
}

Image time_average(const Vector& v, Index n_space, Index n_time, Index rows, Index cols) {
  Vector avg = Vector::Zero(n_space);
  for (Index t = 0; t < n_time; ++t) avg += v.segment(t * n_space, n_space);
  return Image{rows, cols, avg / static_cast<double>(n_time)};
}

// ---------------------------------------------------------------------------

int cmd_deblur_wavelet(const Options& o, std::ostream& out) {
  const std::string started = timestamp();
  const std::uint64_t seed = resolve_seed(o);
  WaveletDeblurOptions w;
  w.size = o.size;
  w.levels = o.levels;
  w.strategy = parse_tree_strategy(o.strategy);
  w.noise_level = o.noise;
  w.seed = seed;
  if (!o.image.empty()) w.image = read_pgm(fs::path(o.image));

  TestProblem problem = [&] {
    try {
      return gen_wavelet_deblur(w);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  const Index rows = std::stol(problem.metadata.at("rows"));
  const Index cols = std::stol(problem.metadata.at("cols"));
  const WaveletLayout layout(rows, cols, o.levels);
  const auto jobs = make_jobs(o, problem, [&](const std::string& tag) {
    if (o.levels < 2) throw UsageError("tree groups need --levels >= 2");
    return wavelet_tree_groups(layout, parse_tree_strategy(tag));
  });

  OutputDir dir(o.out);
  const auto traces = run_jobs(problem, jobs, o.parallel);
  write_traces(dir, jobs, traces);
  dir.pgm("x_true.pgm", Image{rows, cols, problem.x_true});
  dir.pgm("b.pgm", Image{rows, cols, problem.b});
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    dir.pgm("x_" + jobs[i].spec.name + ".pgm", Image{rows, cols, traces[i].x});
  }
  const auto extra = maybe_save_problem(o, problem);

  json config = shared_echo(o, seed);
  config["size"] = o.size;
  config["levels"] = o.levels;
  config["strategy"] = o.strategy;
  config["image"] = o.image;
  write_manifest(dir, "deblur-wavelet", std::move(config), seed, started, jobs, traces, extra);
  report(out, jobs, traces);
  return kExitOk;
}

int cmd_dynamic_deblur(const Options& o, std::ostream& out) {
  const std::string started = timestamp();
  const std::uint64_t seed = resolve_seed(o);
  DynamicDeblurOptions d;
  d.size = o.size;
  d.frames = o.frames;
  d.observed_frames = o.obs_frames ? *o.obs_frames : o.frames;
  d.noise_level = o.noise;
  d.seed = seed;

  TestProblem problem = [&] {
    try {
      return gen_dynamic_deblur(d);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  const auto jobs = make_jobs(o, problem, [](const std::string& tag) -> GroupStructure {
    throw UsageError("group suffix '-" + tag + "' only applies to deblur-wavelet; use '-g'");
  });

  OutputDir dir(o.out);
  const auto traces = run_jobs(problem, jobs, o.parallel);
  write_traces(dir, jobs, traces);
  const Index n_space = d.size * d.size;
  for (Index t = 0; t < d.frames; ++t) {
    dir.pgm("x_true_t" + std::to_string(t) + ".pgm", slice(problem.x_true, t * n_space, d.size, d.size));
  }
  for (Index t = 0; t < d.observed_frames; ++t) {
    dir.pgm("b_t" + std::to_string(t) + ".pgm", slice(problem.b, t * n_space, d.size, d.size));
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    for (Index t = 0; t < d.frames; ++t) {
      dir.pgm("x_" + jobs[i].spec.name + "_t" + std::to_string(t) + ".pgm",
              slice(traces[i].x, t * n_space, d.size, d.size));
    }
  }
  const auto extra = maybe_save_problem(o, problem);

  json config = shared_echo(o, seed);
  config["size"] = d.size;
  config["frames"] = d.frames;
  config["obs_frames"] = d.observed_frames;
  write_manifest(dir, "dynamic-deblur", std::move(config), seed, started, jobs, traces, extra);
  report(out, jobs, traces);
  return kExitOk;
}

int cmd_anomaly(const Options& o, std::ostream& out) {
  const std::string started = timestamp();
  const std::uint64_t seed = resolve_seed(o);
  AnomalyOptions a;
  a.grid = o.grid;
  a.n_time = o.times;
  a.n_obs = o.obs;
  a.noise_level = o.noise;
  a.seed = seed;
  a.n_anomalies = o.anomalies;
  a.anomaly_amplitude = o.amplitude;
  a.theta_t = o.theta_t;
  a.theta_s = o.theta_s;
  a.footprint = o.footprint;
  a.lag_weight = o.lag_weight;

  TestProblem problem = [&] {
    try {
      return gen_anomaly(a);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  const auto jobs = make_jobs(o, problem, [](const std::string& tag) -> GroupStructure {
    throw UsageError("group suffix '-" + tag + "' only applies to deblur-wavelet; use '-g'");
  });

  OutputDir dir(o.out);
  const auto traces = run_jobs(problem, jobs, o.parallel);
  write_traces(dir, jobs, traces);
  const Index g = a.grid, n_space = g * g;
  dir.pgm("x_true.pgm", time_average(problem.x_true, n_space, a.n_time, g, g));
  dir.pgm("xi_true.pgm", time_average(problem.xi_true, n_space, a.n_time, g, g));
  dir.pgm("s_true.pgm", time_average(problem.s_true, n_space, a.n_time, g, g));
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const SolverTrace& t = traces[i];
    const std::string& name = jobs[i].spec.name;
    dir.pgm("x_" + name + ".pgm", time_average(t.x, n_space, a.n_time, g, g));
    if (t.xi.size() == t.x.size() && t.s.size() == t.x.size()) {
      dir.pgm("xi_" + name + ".pgm", time_average(t.xi, n_space, a.n_time, g, g));
      dir.pgm("s_" + name + ".pgm", time_average(t.s, n_space, a.n_time, g, g));
    }
  }
  const auto extra = maybe_save_problem(o, problem);

  json config = shared_echo(o, seed);
  config["grid"] = a.grid;
  config["times"] = a.n_time;
  config["obs"] = a.n_obs;
  config["anomalies"] = a.n_anomalies;
  config["amplitude"] = a.anomaly_amplitude;
  config["theta_t"] = a.theta_t;
  config["theta_s"] = a.theta_s;
  config["footprint"] = a.footprint;
  config["lag_weight"] = a.lag_weight;
  write_manifest(dir, "anomaly", std::move(config), seed, started, jobs, traces, extra);
  report(out, jobs, traces);
  return kExitOk;
}

std::optional<std::string> find_config_flag(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

}  // namespace

std::map<std::string, std::string> read_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path.string());
  std::map<std::string, std::string> values;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(t.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    if (key == "config") {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": config files do not nest");
    }
    values[key] = trim(t.substr(eq + 1));
  }
  return values;
}

std::vector<std::string> merge_config(std::vector<std::string> args,
                                      const std::map<std::string, std::string>& config) {
  std::vector<std::string> extra;
  for (const auto& [key, value] : config) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args) {
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    }
    if (!present) extra.push_back(flag + "=" + value);
  }
  // Subcommand first, file-provided flags next, then the explicit ones.
  const auto at = args.empty() ? args.end() : args.begin() + 1;
  args.insert(at, extra.begin(), extra.end());
  return args;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args = raw_args;
  try {
    if (const auto file = find_config_flag(args)) args = merge_config(args, read_config_file(*file));
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }

  CLI::App app{"Group-sparse flexible Krylov solvers: experiment runner", "flexikry"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Options wavelet, dynamic, anomaly;
  wavelet.size = 64;
  wavelet.noise = 0.05;
  wavelet.solvers = "flsqr-g,hybrid-flsqr-g,irw-flsqr-g";
  dynamic.size = 50;
  dynamic.noise = 0.02;
  dynamic.solvers =
      "hybrid-lsqr,hybrid-flsqr,hybrid-flsqr-g,hybrid-flsqr-c,"
      "hybrid-gmres,hybrid-fgmres,hybrid-fgmres-g,hybrid-fgmres-c";
  anomaly.noise = 0.2;
  anomaly.solvers = "hybrid-sd,hybrid-sd-g";

  auto* w = app.add_subcommand("deblur-wavelet", "Image deblurring with wavelet tree groups");
  add_shared(w, wavelet);
  w->add_option("--size", wavelet.size, "Image side length")->check(CLI::PositiveNumber)->capture_default_str();
  w->add_option("--levels", wavelet.levels, "Haar decomposition levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  w->add_option("--strategy", wavelet.strategy, "Tree grouping strategy")
      ->transform(CLI::IsMember({"G1", "G2"}, CLI::ignore_case))
      ->capture_default_str();
  w->add_option("--image", wavelet.image, "PGM image used as the true solution")->check(CLI::ExistingFile);

  auto* d = app.add_subcommand("dynamic-deblur", "Spatio-temporal deblurring with temporal groups");
  add_shared(d, dynamic);
  d->add_option("--size", dynamic.size, "Frame side length")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--frames", dynamic.frames, "Number of frames")->check(CLI::PositiveNumber)->capture_default_str();
  d->add_option("--obs-frames", dynamic.obs_frames,
                "Observe only the leading frames (A becomes rectangular)")
      ->check(CLI::PositiveNumber);

  auto* an = app.add_subcommand("anomaly", "Anomaly detection by solution decomposition");
  add_shared(an, anomaly);
  an->add_option("--grid", anomaly.grid, "Spatial grid side (one-degree cells)")
      ->check(CLI::Range(2, 1000))
      ->capture_default_str();
  an->add_option("--times", anomaly.times, "Daily time steps")->check(CLI::PositiveNumber)->capture_default_str();
  an->add_option("--obs", anomaly.obs, "Number of observations")->check(CLI::PositiveNumber)->capture_default_str();
  an->add_option("--anomalies", anomaly.anomalies, "Number of anomalous sites")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  an->add_option("--amplitude", anomaly.amplitude, "Anomaly amplitude")->capture_default_str();
  an->add_option("--theta-t", anomaly.theta_t, "Temporal kernel range (days)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  an->add_option("--theta-s", anomaly.theta_s, "Spatial kernel range (km)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  an->add_option("--footprint", anomaly.footprint, "Observation patch half-width in cells")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  an->add_option("--lag-weight", anomaly.lag_weight, "Weight of the previous day in each observation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::vector<const char*> argv{"flexikry"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    for (auto* sub : app.get_subcommands()) err << sub->help();
    if (app.get_subcommands().empty()) err << app.help();
    return kExitUsage;
  }

  try {
    if (w->parsed()) return cmd_deblur_wavelet(wavelet, out);
    if (d->parsed()) return cmd_dynamic_deblur(dynamic, out);
    return cmd_anomaly(anomaly, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace flexikry::cli
