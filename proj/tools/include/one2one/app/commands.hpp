#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "one2one/app/config.hpp"
#include "one2one/checkpoint.hpp"
#include "one2one/gan.hpp"
#include "one2one/metrics.hpp"

namespace one2one::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Models named G, D_X, D_Y (plus F for the baseline); meta holds mode,
/// epoch and config_hash.
nn::Checkpoint make_checkpoint(const gan::System& system, const std::string& hash, int epoch);
/// Rebuilds a system (fresh optimiser state and pools) around stored weights.
gan::System system_from_checkpoint(const nn::Checkpoint& ckpt);

std::string loss_csv_header();
std::string loss_csv_row(const gan::IterationRecord& record);
std::string metrics_csv_header();
std::string metrics_csv_row(const metrics::MetricsReport& report, const std::string& hash, std::uint64_t seed);

/// Output directory layout:
///
///     config.ini        effective config
///     losses.csv        one row per iteration
///     metrics.csv       one row per evaluation
///     ckpt_e<NNNN>.txt  initial, periodic and final checkpoints
///     abort.txt         snapshot written if a loss turns non-finite
///     dump/             point CSVs or PGMs of held-out samples and translations
///
/// Files are created exclusively; an existing file is an error.
int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Evaluates a checkpoint on the config's task, prints the report and appends
/// a row to <out_dir>/eval_metrics.csv.
int cmd_eval(const RunConfig& config, const std::filesystem::path& checkpoint, std::ostream& out,
             std::ostream& err);

struct DemoOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path output;
  int repeat = 1;
  data::Direction direction = data::Direction::x2y;
};

/// Translates a point CSV (every row) or a PGM image, applying the generator
/// `repeat` times. The baseline uses F for y2x; one2one ignores the direction.
int cmd_demo(const DemoOptions& options, std::ostream& out, std::ostream& err);

/// Full command line: `one2one <train|eval|demo> ...`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace one2one::app
