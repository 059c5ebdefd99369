#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "flexikry/problem.hpp"
#include "flexikry/transforms.hpp"

namespace flexikry {

/// Grayscale image, row-major.
struct Image {
  Index rows = 0;
  Index cols = 0;
  Vector pixels;
};

/// Plain (P2) PGM. Pixels are mapped linearly from [min, max] to [0, 255].
void write_pgm(std::ostream& out, const Image& image);
void write_pgm(const std::filesystem::path& path, const Image& image);
/// Reads P2 (plain) or P5 (binary) PGM; pixels are returned in [0, 1].
Image read_pgm(std::istream& in);
Image read_pgm(const std::filesystem::path& path);

struct NoisyData {
  Vector b;
  double noise_norm = 0.0;
};

/// b = b_exact + e with e = level * ||b_exact|| * g / ||g||, g ~ N(0, I) seeded.
NoisyData add_noise(const Vector& b_exact, double level, std::uint64_t seed);

struct WaveletDeblurOptions {
  Index size = 64;
  int levels = 2;
  TreeStrategy strategy = TreeStrategy::G1;
  double noise_level = 0.05;
  std::uint64_t seed = 0;
  /// Replaces the synthetic satellite when set; dimensions must be divisible by 2^levels.
  std::optional<Image> image;
};

/// Blur sigma and bandwidth used for an image of the given size: sigma = 4 and
/// bandwidth = 16 at 256 pixels, scaled proportionally (bandwidth at least 1).
std::pair<double, Index> medium_blur_parameters(Index size);

/// Satellite-like test image: body, solar panels and antenna on a zero background.
Image satellite_image(Index size, std::uint64_t seed);

TestProblem gen_wavelet_deblur(const WaveletDeblurOptions& options);

struct DynamicDeblurOptions {
  Index size = 50;
  Index frames = 9;
  /// Number of leading frames observed; fewer than `frames` makes A rectangular.
  Index observed_frames = 9;
  double noise_level = 0.02;
  std::uint64_t seed = 0;
};

/// Shapes on a fixed support whose intensities change over time (the rest of
/// every frame is zero). Time-slowest.
Vector pulsing_shapes(Index size, Index frames);

TestProblem gen_dynamic_deblur(const DynamicDeblurOptions& options);

struct AnomalyOptions {
  Index grid = 10;    ///< spatial grid is grid x grid one-degree cells
  Index n_time = 8;   ///< daily time steps
  Index n_obs = 1600;
  double noise_level = 0.2;
  std::uint64_t seed = 0;
  Index n_anomalies = 5;
  double anomaly_amplitude = 12.0;
  double theta_t = 9.854;   ///< days
  double theta_s = 555.42;  ///< km, about five grid cells
  Index footprint = 0;      ///< observation patch half-width in cells (0: single cell)
  double lag_weight = 0.5;  ///< weight of the previous time step in each observation
};

/// Parameters of the full-scale atmospheric setting.
inline constexpr double kReferenceThetaT = 9.854;
inline constexpr double kReferenceThetaS = 555.42;
inline constexpr double kReferenceNoiseSigma = 1.1267;

TestProblem gen_anomaly(const AnomalyOptions& options);

/// Writes metadata.json, groups.txt, x_true.txt and b.txt into `dir`.
void save_problem(const std::filesystem::path& dir, const TestProblem& problem);
/// Regenerates the problem from metadata.json and checks it against b.txt.
TestProblem load_problem(const std::filesystem::path& dir);

}  // namespace flexikry
