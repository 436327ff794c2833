#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mrsde/harness.hpp"
#include "mrsde/model.hpp"
#include "mrsde/rate.hpp"
#include "mrsde/types.hpp"

namespace mrsde::cli {

/// Bad configuration: malformed JSON, schema violation, or an invalid model.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KCheck {
  double slope = 1.0;  // expected K_T = slope * T
  double tolerance = 0.01;
};

struct SimulateConfig {
  Index n_steps = 1000;
  Index n_particles = 1000;
  double epsilon = 1.0;
  bool write_paths = true;
  double tol_g0 = kDefaultG0Tol;
  std::optional<KCheck> k_check;
};

struct SkeletonConfig {
  Index n_steps = 1000;
  std::optional<std::vector<double>> phi;  // one value (constant) or one per cell
  bool short_time = false;
};

struct RateConfig {
  std::vector<double> targets;
  RateMode mode = RateMode::small_noise;
  Index n_steps = 200;
};

struct MalliavinConfig {
  Index n_steps = 1000;
  Index n_particles = 2000;  // ensemble used to freeze K
  Index path = 0;
  Index kernel_stride = 1;
  double bump = 1e-4;
  Index density_particles = 10000;
  Index density_steps = 100;
  double bandwidth = 0.05;
};

struct LdpConfig {
  Variant variant = Variant::small_noise;
  std::vector<double> epsilons{0.1, 0.05, 0.025};
  Event event;
  Index n_particles = 10000;
  Index n_steps = 20;
  Index n_mc_batches = 30;
};

struct EpsLimitConfig {
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  Index n_particles = 10000;
  Index n_steps = 1000;
  Index n_batches = 30;
};

struct ConvergeConfig {
  std::vector<double> dts{1e-1, 5e-2, 2.5e-2};
  std::vector<Index> n_particles{1000, 4000, 16000};
  Index replicates = 4;
  std::optional<EpsLimitConfig> eps_limit;
};

struct RunConfig {
  ModelSpec model;
  std::uint64_t seed = 1;
  SimulateConfig simulate;
  SkeletonConfig skeleton;
  RateConfig rate;
  MalliavinConfig malliavin;
  LdpConfig ldp;
  ConvergeConfig converge;
  std::uint64_t hash = 0;  // FNV-1a of the canonical JSON text
};

/// Parses and validates a config document. Unknown keys are rejected; the
/// model must pass validate(). Errors carry the JSON pointer and line.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& file);

std::uint64_t fnv1a(std::string_view bytes);

}  // namespace mrsde::cli
