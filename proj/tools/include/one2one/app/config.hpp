#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "one2one/data.hpp"
#include "one2one/gan.hpp"

namespace one2one::app {

/// Everything a run needs. Text form (`write_config`) is sectioned
/// `key = value` lines; `parse_config_text(write_config(c)) == c` for every
/// valid `c`.
struct RunConfig {
  // [task]
  std::string task;  // reflection | affine | image_inversion | manifest
  std::size_t n = 2000;
  std::size_t height = 16;
  std::size_t width = 16;
  double margin = 0.2;
  double affine_scale = 0.75;
  double affine_angle = 50.0;
  std::string manifest;

  // [model]
  nn::NetKind kind = nn::NetKind::vector;
  std::vector<std::size_t> generator_hidden{32, 32};
  std::vector<std::size_t> discriminator_hidden{32, 32};
  bool norm = false;

  // [train]
  gan::Mode mode = gan::Mode::one2one;
  int epochs = 200;
  double lambda_x = 10.0;
  double lambda_y = 10.0;
  double lambda = 10.0;
  double lr = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int fixed_epochs = 100;
  int decay_epochs = 100;
  std::size_t pool = 50;

  // [seed]
  std::uint64_t data_seed = 0;
  std::uint64_t init_seed = 0;
  std::uint64_t train_seed = 0;

  // [eval]
  int eval_every = 0;
  std::size_t eval_n = 200;
  std::uint64_t eval_seed = 0;

  // [output]
  std::string out_dir = "runs";
  int checkpoint_every = 0;
  std::size_t dump = 8;

  bool operator==(const RunConfig&) const = default;
};

/// Required keys: task.name, seed.data, seed.init, seed.train, eval.seed.
/// Missing, unknown or duplicate keys and out-of-range values raise
/// ParseError naming the key (and line where there is one). When [model]
/// is absent the image task defaults to conv nets with 8,16,16,8 / 8,16.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::filesystem::path& path);

std::string write_config(const RunConfig& config);

/// FNV-1a 64 of the canonical text, as 16 lowercase hex digits.
std::string config_hash(const RunConfig& config);

data::DomainTask make_task(const RunConfig& config);

/// Generator and discriminator specs plus optimiser settings for samples of
/// `sample_shape`.
gan::SystemConfig system_config(const RunConfig& config, const ad::Shape& sample_shape);

}  // namespace one2one::app
