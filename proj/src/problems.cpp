#include "flexikry/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Sparse>

#include "json.hpp"

namespace flexikry {

// ---------------------------------------------------------------------------
// PGM

void write_pgm(std::ostream& out, const Image& image) {
  if (image.pixels.size() != image.rows * image.cols) {
    throw std::invalid_argument("write_pgm: pixel count does not match dimensions");
  }
  const double lo = image.pixels.size() ? image.pixels.minCoeff() : 0.0;
  const double hi = image.pixels.size() ? image.pixels.maxCoeff() : 0.0;
  const double span = hi - lo;
  out << "P2\n" << image.cols << ' ' << image.rows << "\n255\n";
  for (Index r = 0; r < image.rows; ++r) {
    for (Index c = 0; c < image.cols; ++c) {
      const double v = image.pixels[r * image.cols + c];
      const long q = span > 0.0 ? std::lround(255.0 * (v - lo) / span) : 0;
      out << std::clamp(q, 0L, 255L) << (c + 1 == image.cols ? '\n' : ' ');
    }
  }
}

void write_pgm(const std::filesystem::path& path, const Image& image) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_pgm: cannot open " + path.string());
  write_pgm(out, image);
  if (!out) throw std::runtime_error("write_pgm: write failed for " + path.string());
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      if (!tok.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  if (tok.empty()) throw std::runtime_error("read_pgm: truncated header");
  return tok;
}

long pgm_number(std::istream& in) {
  const std::string tok = pgm_token(in);
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || v < 0) throw std::runtime_error("read_pgm: bad number '" + tok + "'");
  return v;
}

}  // namespace

Image read_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw std::runtime_error("read_pgm: not a PGM file");
  Image img;
  img.cols = pgm_number(in);
  img.rows = pgm_number(in);
  const long maxval = pgm_number(in);
  if (img.rows <= 0 || img.cols <= 0 || maxval <= 0 || maxval > 65535) {
    throw std::runtime_error("read_pgm: bad header values");
  }
  img.pixels.resize(img.rows * img.cols);
  for (Index i = 0; i < img.pixels.size(); ++i) {
    long v = 0;
    if (magic == "P2") {
      if (!(in >> v)) throw std::runtime_error("read_pgm: truncated pixel data");
    } else if (maxval < 256) {
      const int ch = in.get();
      if (ch == EOF) throw std::runtime_error("read_pgm: truncated pixel data");
      v = ch;
    } else {
      const int hi = in.get(), lo = in.get();
      if (lo == EOF) throw std::runtime_error("read_pgm: truncated pixel data");
      v = (hi << 8) | lo;
    }
    img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return img;
}

Image read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_pgm: cannot open " + path.string());
  return read_pgm(in);
}

// ---------------------------------------------------------------------------

NoisyData add_noise(const Vector& b_exact, double level, std::uint64_t seed) {
  if (!(level >= 0.0)) throw std::invalid_argument("add_noise: level must be >= 0");
  const double scale = level * b_exact.norm();
  if (scale == 0.0) return {b_exact, 0.0};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector g(b_exact.size());
  for (Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
  return {b_exact + (scale / g.norm()) * g, scale};
}

namespace {

constexpr std::uint64_t kNoiseStream = 0x9E3779B97F4A7C15ULL;

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// Wavelet deblurring

std::pair<double, Index> medium_blur_parameters(Index size) {
  const double scale = static_cast<double>(size) / 256.0;
  const Index bw = std::max<Index>(1, static_cast<Index>(std::lround(16.0 * scale)));
  return {4.0 * scale, std::min(bw, size - 1)};
}

Image satellite_image(Index size, std::uint64_t seed) {
  if (size < 2) throw std::invalid_argument("satellite_image: size must be >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tilt(-0.25, 0.25);
  const double angle = tilt(rng);
  const double ca = std::cos(angle), sa = std::sin(angle);

  Image img{size, size, Vector::Zero(size * size)};
  const double n = static_cast<double>(size);
  for (Index r = 0; r < size; ++r) {
    for (Index c = 0; c < size; ++c) {
      const double u = (static_cast<double>(c) + 0.5) / n - 0.5;
      const double v = (static_cast<double>(r) + 0.5) / n - 0.5;
      const double x = ca * u + sa * v;
      const double y = -sa * u + ca * v;
      const double ax = std::abs(x), ay = std::abs(y);
      double val = 0.0;
      if (0.13 <= ax && ax <= 0.38 && ay <= 0.06) {
        val = std::fmod(ax - 0.13, 0.05) < 0.012 ? 0.35 : 0.55;
      }
      if (0.09 <= ax && ax <= 0.13 && ay <= 0.01) val = 0.7;
      if ((x / 0.09) * (x / 0.09) + (y / 0.16) * (y / 0.16) <= 1.0) {
        val = (ax < 0.04 && ay < 0.08) ? 1.0 : 0.8;
      }
      if (ax <= 0.01 && y >= -0.34 && y <= -0.16) val = 0.9;
      if (x * x + (y + 0.36) * (y + 0.36) <= 0.045 * 0.045) val = 0.6;
      img.pixels[r * size + c] = val;
    }
  }
  return img;
}

TestProblem gen_wavelet_deblur(const WaveletDeblurOptions& o) {
  Image truth = o.image ? *o.image : satellite_image(o.size, o.seed);
  if (truth.pixels.size() != truth.rows * truth.cols) {
    throw std::invalid_argument("gen_wavelet_deblur: image pixel count does not match its size");
  }
  const WaveletLayout layout(truth.rows, truth.cols, o.levels);
  const auto [sigma, bandwidth] = medium_blur_parameters(std::min(truth.rows, truth.cols));
  LinearOperator a = gaussian_blur_2d(truth.rows, truth.cols, sigma, bandwidth);
  const Vector b_exact = a.apply(truth.pixels);
  NoisyData data = add_noise(b_exact, o.noise_level, o.seed ^ kNoiseStream);

  TestProblem p{
      .name = "wavelet-deblur",
      .a = std::move(a),
      .psi = haar_operator(layout),
      .psi_inv = haar_inverse_operator(layout),
      .x_true = truth.pixels,
      .b = std::move(data.b),
      .noise_norm = data.noise_norm,
      .groups = wavelet_tree_groups(layout, o.strategy),
      .priors = std::nullopt,
      .xi_true = {},
      .s_true = {},
      .metadata = {},
  };
  p.metadata = {
      {"generator", "wavelet-deblur"},
      {"rows", std::to_string(truth.rows)},
      {"cols", std::to_string(truth.cols)},
      {"size", std::to_string(o.size)},
      {"levels", std::to_string(o.levels)},
      {"strategy", to_string(o.strategy)},
      {"noise_level", num(o.noise_level)},
      {"seed", std::to_string(o.seed)},
      {"blur_sigma", num(sigma)},
      {"blur_bandwidth", std::to_string(bandwidth)},
      {"boundary", "zero"},
      {"custom_image", o.image ? "true" : "false"},
  };
  return p;
}

// ---------------------------------------------------------------------------
// Dynamic deblurring

Vector pulsing_shapes(Index size, Index frames) {
  if (size < 4 || frames < 1) throw std::invalid_argument("pulsing_shapes: grid too small");
  const Index n_space = size * size;
  Vector x = Vector::Zero(n_space * frames);
  const double n = static_cast<double>(size);
  const double pi = std::numbers::pi;
  // Smoothstep over a rim of width 0.05 inside each shape; d is the distance
  // to the shape boundary, positive inside.
  auto edge = [](double d) {
    const double q = std::clamp(d / 0.05, 0.0, 1.0);
    return q * q * (3.0 - 2.0 * q);
  };
  for (Index t = 0; t < frames; ++t) {
    const double tau = frames > 1 ? static_cast<double>(t) / static_cast<double>(frames - 1) : 0.0;
    const double cross_level = 0.9 + 0.16 * std::sin(2.0 * pi * tau);
    const double disc_level = 0.6 + 0.56 * std::sin(pi * tau);
    const double ring_level = 0.5 + 0.48 * std::cos(pi * tau);
    const double square_level = 0.6 + 0.48 * (2.0 * tau - 1.0);
    for (Index r = 0; r < size; ++r) {
      for (Index c = 0; c < size; ++c) {
        const double v = (static_cast<double>(r) + 0.5) / n;
        const double u = (static_cast<double>(c) + 0.5) / n;
        const double dv = std::abs(v - 0.72), du = std::abs(u - 0.72);
        const double cross = std::max(std::min(0.03 - dv, 0.14 - du), std::min(0.03 - du, 0.14 - dv));
        const double disc = 0.12 - std::hypot(v - 0.27, u - 0.28);
        const double rr = std::hypot(v - 0.27, u - 0.75);
        const double ring = std::min(rr - 0.06, 0.11 - rr);
        const double square = std::min(0.1 - std::abs(v - 0.7), 0.1 - std::abs(u - 0.25));
        double val = edge(cross) * cross_level;
        val = std::max(val, edge(disc) * disc_level);
        val = std::max(val, edge(ring) * ring_level);
        val = std::max(val, edge(square) * square_level);
        x[t * n_space + r * size + c] = val;
      }
    }
  }
  return x;
}

TestProblem gen_dynamic_deblur(const DynamicDeblurOptions& o) {
  if (o.observed_frames < 1 || o.observed_frames > o.frames) {
    throw std::invalid_argument("gen_dynamic_deblur: observed frames must be in [1, frames]");
  }
  const Index n_space = o.size * o.size;
  const LinearOperator a_t = gaussian_blur_1d(o.frames, 1.0, std::min<Index>(3, o.frames - 1));
  const LinearOperator a_s = gaussian_blur_2d(o.size, o.size, 1.0, std::min<Index>(4, o.size - 1));
  LinearOperator a = kron(a_t, a_s);
  if (o.observed_frames < o.frames) {
    std::vector<Index> rows(static_cast<std::size_t>(o.observed_frames * n_space));
    for (Index i = 0; i < static_cast<Index>(rows.size()); ++i) rows[static_cast<std::size_t>(i)] = i;
    a = select_rows(a, std::move(rows));
  }
  Vector x_true = pulsing_shapes(o.size, o.frames);
  const Vector b_exact = a.apply(x_true);
  NoisyData data = add_noise(b_exact, o.noise_level, o.seed ^ kNoiseStream);

  TestProblem p{
      .name = "dynamic-deblur",
      .a = std::move(a),
      .psi = std::nullopt,
      .psi_inv = std::nullopt,
      .x_true = std::move(x_true),
      .b = std::move(data.b),
      .noise_norm = data.noise_norm,
      .groups = temporal_groups(n_space, o.frames),
      .priors = std::nullopt,
      .xi_true = {},
      .s_true = {},
      .metadata = {},
  };
  p.metadata = {
      {"generator", "dynamic-deblur"},
      {"size", std::to_string(o.size)},
      {"frames", std::to_string(o.frames)},
      {"observed_frames", std::to_string(o.observed_frames)},
      {"noise_level", num(o.noise_level)},
      {"seed", std::to_string(o.seed)},
      {"spatial_blur", "sigma=1 bandwidth=4"},
      {"temporal_blur", "sigma=1 bandwidth=3"},
      {"boundary", "zero"},
  };
  return p;
}

// ---------------------------------------------------------------------------
// Anomaly detection

TestProblem gen_anomaly(const AnomalyOptions& o) {
  if (o.grid < 2 || o.n_time < 1 || o.n_obs < 1) throw std::invalid_argument("gen_anomaly: empty problem");
  if (o.footprint < 0 || !(o.lag_weight >= 0.0)) {
    throw std::invalid_argument("gen_anomaly: footprint and lag weight must be non-negative");
  }
  if (o.n_anomalies < 1 || o.n_anomalies > o.grid * o.grid) {
    throw std::invalid_argument("gen_anomaly: anomaly count out of range");
  }
  const Index n_space = o.grid * o.grid;
  const Index n = n_space * o.n_time;
  std::mt19937_64 rng(o.seed);

  Matrix space(n_space, 2);
  for (Index i = 0; i < o.grid; ++i) {
    for (Index j = 0; j < o.grid; ++j) {
      space(i * o.grid + j, 0) = 40.0 + static_cast<double>(i);    // latitude
      space(i * o.grid + j, 1) = -100.0 + static_cast<double>(j);  // longitude
    }
  }
  Matrix time(o.n_time, 1);
  for (Index t = 0; t < o.n_time; ++t) time(t, 0) = static_cast<double>(t);
  const SpdOperator q_s = build_covariance(space, o.theta_s, DistanceMetric::spherical_great_circle);
  const SpdOperator q_t = build_covariance(time, o.theta_t, DistanceMetric::time_days);
  SpdOperator q = SpdOperator::kron(q_t, q_s);

  std::normal_distribution<double> normal;
  Vector g(n);
  for (Index i = 0; i < n; ++i) g[i] = normal(rng);
  Vector xi_true = q.apply_factor(g);

  std::vector<Index> sites(static_cast<std::size_t>(n_space));
  for (Index i = 0; i < n_space; ++i) sites[static_cast<std::size_t>(i)] = i;
  std::shuffle(sites.begin(), sites.end(), rng);
  sites.resize(static_cast<std::size_t>(o.n_anomalies));
  std::sort(sites.begin(), sites.end());
  std::uniform_real_distribution<double> jitter(0.85, 1.15);
  Vector s_true = Vector::Zero(n);
  for (std::size_t a = 0; a < sites.size(); ++a) {
    const double sign = a % 2 == 0 ? 1.0 : -1.0;
    for (Index t = 0; t < o.n_time; ++t) {
      s_true[t * n_space + sites[a]] = sign * o.anomaly_amplitude * jitter(rng);
    }
  }

  // Each sounding averages a square patch around a random cell at its time
  // step and, with lag_weight, the same patch one step earlier.
  std::uniform_int_distribution<Index> pick_t(0, o.n_time - 1), pick_cell(0, o.grid - 1);
  std::vector<Eigen::Triplet<double>> entries;
  for (Index row = 0; row < o.n_obs; ++row) {
    const Index t = pick_t(rng), ci = pick_cell(rng), cj = pick_cell(rng);
    std::vector<std::pair<Index, double>> taps;
    for (Index dt = 0; dt <= std::min<Index>(o.lag_weight > 0.0 ? 1 : 0, t); ++dt) {
      const double wt = dt == 0 ? 1.0 : o.lag_weight;
      for (Index di = -o.footprint; di <= o.footprint; ++di) {
        for (Index dj = -o.footprint; dj <= o.footprint; ++dj) {
          const Index i = ci + di, j = cj + dj;
          if (i < 0 || j < 0 || i >= o.grid || j >= o.grid) continue;
          taps.emplace_back((t - dt) * n_space + i * o.grid + j, wt);
        }
      }
    }
    double total = 0.0;
    for (const auto& tp : taps) total += tp.second;
    for (const auto& tp : taps) entries.emplace_back(row, tp.first, tp.second / total);
  }
  using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  auto obs = std::make_shared<Sparse>(o.n_obs, n);
  obs->setFromTriplets(entries.begin(), entries.end());
  LinearOperator a(
      o.n_obs, n, [obs](const Vector& x) -> Vector { return *obs * x; },
      [obs](const Vector& y) -> Vector { return obs->transpose() * y; });

  Vector x_true = xi_true + s_true;
  const Vector b_exact = a.apply(x_true);
  NoisyData data = add_noise(b_exact, o.noise_level, o.seed ^ kNoiseStream);
  // Uncorrelated noise: R = sigma^2 I with sigma matched to the realized noise.
  const double sigma = data.noise_norm / std::sqrt(static_cast<double>(o.n_obs));
  const double sigma2 = sigma > 0.0 ? sigma * sigma : 1.0;
  const double noise_r = sigma > 0.0 ? data.noise_norm / sigma : 0.0;

  TestProblem p{
      .name = "anomaly",
      .a = std::move(a),
      .psi = std::nullopt,
      .psi_inv = std::nullopt,
      .x_true = std::move(x_true),
      .b = std::move(data.b),
      .noise_norm = noise_r,
      .groups = temporal_groups(n_space, o.n_time),
      .priors = SdPriors{std::move(q), SpdOperator::scaled_identity(o.n_obs, sigma2)},
      .xi_true = std::move(xi_true),
      .s_true = std::move(s_true),
      .metadata = {},
  };
  std::string site_list;
  for (Index s : sites) site_list += (site_list.empty() ? "" : " ") + std::to_string(s);
  p.metadata = {
      {"generator", "anomaly"},
      {"grid", std::to_string(o.grid)},
      {"n_time", std::to_string(o.n_time)},
      {"n_obs", std::to_string(o.n_obs)},
      {"noise_level", num(o.noise_level)},
      {"seed", std::to_string(o.seed)},
      {"n_anomalies", std::to_string(o.n_anomalies)},
      {"anomaly_amplitude", num(o.anomaly_amplitude)},
      {"theta_t", num(o.theta_t)},
      {"theta_s", num(o.theta_s)},
      {"footprint", std::to_string(o.footprint)},
      {"lag_weight", num(o.lag_weight)},
      {"noise_sigma", num(sigma)},
      {"anomaly_sites", site_list},
      {"reference_theta_t", num(kReferenceThetaT)},
      {"reference_theta_s", num(kReferenceThetaS)},
      {"reference_noise_sigma", num(kReferenceNoiseSigma)},
  };
  return p;
}

// ---------------------------------------------------------------------------
// Problem directories

namespace {

void write_vector(const std::filesystem::path& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

Vector read_vector(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw std::runtime_error("malformed vector file " + path.string());
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

const std::string& field(const std::map<std::string, std::string>& meta, const std::string& key) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw std::runtime_error("problem metadata lacks '" + key + "'");
  return it->second;
}

}  // namespace

void save_problem(const std::filesystem::path& dir, const TestProblem& problem) {
  std::filesystem::create_directories(dir);
  nlohmann::json meta(problem.metadata);
  std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';
  std::ofstream groups(dir / "groups.txt");
  write_groups(groups, problem.groups);
  write_vector(dir / "x_true.txt", problem.x_true);
  write_vector(dir / "b.txt", problem.b);
}

TestProblem load_problem(const std::filesystem::path& dir) {
  std::ifstream in(dir / "metadata.json");
  if (!in) throw std::runtime_error("load_problem: no metadata.json in " + dir.string());
  const auto meta = nlohmann::json::parse(in).get<std::map<std::string, std::string>>();
  const std::string& gen = field(meta, "generator");
  const auto seed = static_cast<std::uint64_t>(std::stoull(field(meta, "seed")));
  const double noise = std::stod(field(meta, "noise_level"));

  TestProblem p = [&] {
    if (gen == "wavelet-deblur") {
      WaveletDeblurOptions o;
      o.size = std::stol(field(meta, "size"));
      o.levels = std::stoi(field(meta, "levels"));
      o.strategy = parse_tree_strategy(field(meta, "strategy"));
      o.noise_level = noise;
      o.seed = seed;
      if (field(meta, "custom_image") == "true") {
        o.image = Image{std::stol(field(meta, "rows")), std::stol(field(meta, "cols")),
                        read_vector(dir / "x_true.txt")};
      }
      return gen_wavelet_deblur(o);
    }
    if (gen == "dynamic-deblur") {
      DynamicDeblurOptions o;
      o.size = std::stol(field(meta, "size"));
      o.frames = std::stol(field(meta, "frames"));
      o.observed_frames = std::stol(field(meta, "observed_frames"));
      o.noise_level = noise;
      o.seed = seed;
      return gen_dynamic_deblur(o);
    }
    if (gen == "anomaly") {
      AnomalyOptions o;
      o.grid = std::stol(field(meta, "grid"));
      o.n_time = std::stol(field(meta, "n_time"));
      o.n_obs = std::stol(field(meta, "n_obs"));
      o.n_anomalies = std::stol(field(meta, "n_anomalies"));
      o.anomaly_amplitude = std::stod(field(meta, "anomaly_amplitude"));
      o.theta_t = std::stod(field(meta, "theta_t"));
      o.theta_s = std::stod(field(meta, "theta_s"));
      o.footprint = std::stol(field(meta, "footprint"));
      o.lag_weight = std::stod(field(meta, "lag_weight"));
      o.noise_level = noise;
      o.seed = seed;
      return gen_anomaly(o);
    }
    throw std::runtime_error("load_problem: unknown generator '" + gen + "'");
  }();

  const Vector stored_b = read_vector(dir / "b.txt");
  if (stored_b.size() != p.b.size() || stored_b != p.b) {
    throw std::runtime_error("load_problem: regenerated data does not match b.txt");
  }
  return p;
}

}  // namespace flexikry
