#include "one2one/app/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "one2one/errors.hpp"
#include "one2one/io.hpp"
#include "one2one/text.hpp"

namespace one2one::app {

namespace fs = std::filesystem;

namespace {

std::string checkpoint_name(int epoch) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_e%04d.txt", epoch);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = io::create_new_file(path);
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string summary_line(const gan::System& system, const RunConfig& config, const ad::Shape& shape,
                         const metrics::MetricsReport* report, std::size_t iterations, const std::string& hash) {
  const auto sys_cfg = system_config(config, shape);
  const auto one2one_params = gan::generator_param_count(gan::make_system(gan::Mode::one2one, sys_cfg));
  const auto baseline_params = gan::generator_param_count(gan::make_system(gan::Mode::baseline, sys_cfg));
  std::string s = "summary mode=" + gan::to_string(gan::mode_of(system)) + " epochs=" + std::to_string(config.epochs) +
                  " iterations=" + std::to_string(iterations);
  if (report != nullptr) {
    s += " psnr_x2y=" + format_double(report->psnr_x2y) + " psnr_y2x=" + format_double(report->psnr_y2x) +
         " ssim_x2y=" + format_double(report->ssim_x2y) + " ssim_y2x=" + format_double(report->ssim_y2x) +
         " residual=" + format_double(report->self_inverse_residual) +
         " injectivity=" + format_double(report->injectivity_score) +
         " bias_gap_x2y=" + format_double(report->bias_gap_x2y) +
         " bias_gap_y2x=" + format_double(report->bias_gap_y2x);
  } else {
    s += " metrics=unavailable";
  }
  s += " generator_params_one2one=" + std::to_string(one2one_params) +
       " generator_params_baseline=" + std::to_string(baseline_params) + " config_hash=" + hash;
  return s;
}

void dump_samples(const fs::path& dir, const gan::System& system, const data::DomainTask& task, const RunConfig& config,
                  const std::string& hash) {
  if (config.dump == 0 || task.truth() == nullptr) return;
  const auto stream = derive_seed(config.eval_seed, "dump");
  const auto xs = task.sample_x(stream, config.dump);
  const auto ys = task.sample_y(stream, config.dump);
  std::vector<ad::Tensor> fy, fx;
  for (const auto& x : xs) fy.push_back(nn::apply(gan::x2y_generator(system), x));
  for (const auto& y : ys) fx.push_back(nn::apply(gan::y2x_generator(system), y));
  const std::string comment = "config_hash=" + hash;
  if (!task.is_image()) {
    io::save_points_csv(dir / "x.csv", xs, comment);
    io::save_points_csv(dir / "x2y.csv", fy, comment);
    io::save_points_csv(dir / "y.csv", ys, comment);
    io::save_points_csv(dir / "y2x.csv", fx, comment);
    return;
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    char idx[16];
    std::snprintf(idx, sizeof(idx), "%03zu", i);
    io::save_pgm(dir / ("x_" + std::string(idx) + ".pgm"), xs[i], comment);
    io::save_pgm(dir / ("x2y_" + std::string(idx) + ".pgm"), fy[i], comment);
    io::save_pgm(dir / ("y_" + std::string(idx) + ".pgm"), ys[i], comment);
    io::save_pgm(dir / ("y2x_" + std::string(idx) + ".pgm"), fx[i], comment);
  }
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace

nn::Checkpoint make_checkpoint(const gan::System& system, const std::string& hash, int epoch) {
  nn::Checkpoint ckpt;
  ckpt.meta = {{"mode", gan::to_string(gan::mode_of(system))}, {"epoch", std::to_string(epoch)}, {"config_hash", hash}};
  std::visit(
      [&](const auto& s) {
        ckpt.models.emplace_back("G", s.G.clone());
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, gan::BaselineSystem>) {
          ckpt.models.emplace_back("F", s.F.clone());
        }
        ckpt.models.emplace_back("D_X", s.D_X.clone());
        ckpt.models.emplace_back("D_Y", s.D_Y.clone());
      },
      system);
  return ckpt;
}

gan::System system_from_checkpoint(const nn::Checkpoint& ckpt) {
  const auto mode_text = ckpt.meta_value("mode");
  if (!mode_text) throw ParseError("checkpoint has no 'mode' meta entry", 0);
  const auto mode = gan::parse_mode(*mode_text);
  gan::SystemConfig cfg;
  cfg.generator = std::get<nn::GeneratorSpec>(ckpt.model("G").spec());
  cfg.discriminator = std::get<nn::DiscriminatorSpec>(ckpt.model("D_X").spec());
  auto system = gan::make_system(mode, cfg);
  std::visit(
      [&](auto& s) {
        s.G = ckpt.model("G").clone();
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, gan::BaselineSystem>) s.F = ckpt.model("F").clone();
        s.D_X = ckpt.model("D_X").clone();
        s.D_Y = ckpt.model("D_Y").clone();
      },
      system);
  return system;
}

std::string loss_csv_header() {
  return "iteration,epoch,lr,loss_x2y_adv,loss_x2y_cyc,loss_y2x_adv,loss_y2x_cyc,loss_dx,loss_dy\n";
}

std::string loss_csv_row(const gan::IterationRecord& r) {
  const auto& l = r.losses;
  return std::to_string(r.iteration) + ',' + std::to_string(r.epoch) + ',' + format_double(r.lr) + ',' +
         format_double(l.x2y_adv) + ',' + format_double(l.x2y_cyc) + ',' + format_double(l.y2x_adv) + ',' +
         format_double(l.y2x_cyc) + ',' + format_double(l.d_x) + ',' + format_double(l.d_y) + '\n';
}

std::string metrics_csv_header() {
  return "epoch,psnr_x2y,psnr_y2x,ssim_x2y,ssim_y2x,self_inverse_residual,residual_kind,injectivity_score,eps_in,"
         "eps_out,bias_gap_x2y,bias_gap_y2x,config_hash,seed\n";
}

std::string metrics_csv_row(const metrics::MetricsReport& r, const std::string& hash, std::uint64_t seed) {
  return std::to_string(r.epoch) + ',' + format_double(r.psnr_x2y) + ',' + format_double(r.psnr_y2x) + ',' +
         format_double(r.ssim_x2y) + ',' + format_double(r.ssim_y2x) + ',' + format_double(r.self_inverse_residual) +
         ',' + r.residual_kind + ',' + format_double(r.injectivity_score) + ',' + format_double(r.eps_in) + ',' +
         format_double(r.eps_out) + ',' + format_double(r.bias_gap_x2y) + ',' + format_double(r.bias_gap_y2x) + ',' +
         hash + ',' + std::to_string(seed) + '\n';
}

int cmd_train(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::string hash = config_hash(config);
    const fs::path dir = config.out_dir;
    fs::create_directories(dir);
    write_text(dir / "config.ini", write_config(config));

    const auto task = make_task(config);
    const auto sys_cfg = system_config(config, task.shape());
    const bool has_truth = task.truth() != nullptr;
    if (!has_truth) err << "note: task '" << task.name() << "' has no ground truth; metrics are unavailable\n";

    auto losses = io::create_new_file(dir / "losses.csv");
    losses << "# config_hash=" << hash << '\n' << loss_csv_header();
    auto metrics_log = io::create_new_file(dir / "metrics.csv");
    metrics_log << "# config_hash=" << hash << '\n' << metrics_csv_header();

    nn::save_checkpoint(dir / checkpoint_name(0), make_checkpoint(gan::make_system(config.mode, sys_cfg), hash, 0));

    gan::TrainHooks hooks;
    hooks.on_iteration = [&](const gan::IterationRecord& r) { losses << loss_csv_row(r); };
    if (has_truth) {
      hooks.eval_every = config.eval_every;
      hooks.evaluate = [&](const gan::System& s, int epoch) {
        auto report = metrics::evaluate(s, task, config.eval_n, config.eval_seed);
        report.epoch = epoch;
        metrics_log << metrics_csv_row(report, hash, config.eval_seed);
        metrics_log.flush();
        return report;
      };
    }
    hooks.checkpoint_every = config.checkpoint_every;
    hooks.on_checkpoint = [&](const gan::System& s, int epoch) {
      nn::save_checkpoint(dir / checkpoint_name(epoch), make_checkpoint(s, hash, epoch));
    };
    const fs::path abort_path = dir / "abort.txt";
    hooks.on_abort = [&](const gan::System& s, const TrainingError& e) {
      losses.flush();
      auto ckpt = make_checkpoint(s, hash, -1);
      ckpt.meta.emplace_back("abort_iteration", std::to_string(e.iteration()));
      ckpt.meta.emplace_back("abort_loss", e.loss_name());
      nn::save_checkpoint(abort_path, ckpt);
    };

    gan::TrainConfig train_cfg{config.mode, sys_cfg, config.epochs};
    gan::TrainResult result;
    try {
      result = gan::train(task.training_data(), train_cfg, hooks);
    } catch (const TrainingError& e) {
      err << "error: training aborted: " << e.what() << "; diagnostic snapshot at " << abort_path.string() << '\n';
      return kExitRuntime;
    }
    losses.flush();

    const bool periodic_hit = config.checkpoint_every > 0 && config.epochs % config.checkpoint_every == 0;
    if (config.epochs > 0 && !periodic_hit) {
      nn::save_checkpoint(dir / checkpoint_name(config.epochs), make_checkpoint(result.system, hash, config.epochs));
    }
    dump_samples(dir / "dump", result.system, task, config, hash);

    std::optional<metrics::MetricsReport> final_report;
    if (!result.history.empty()) {
      final_report = result.history.back();
    } else if (has_truth) {
      final_report = metrics::evaluate(result.system, task, config.eval_n, config.eval_seed);
    }
    out << summary_line(result.system, config, task.shape(), final_report ? &*final_report : nullptr,
                        result.iterations, hash)
        << '\n';
    return kExitOk;
  });
}

int cmd_eval(const RunConfig& config, const fs::path& checkpoint, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto ckpt = nn::load_checkpoint(checkpoint);
    const auto system = system_from_checkpoint(ckpt);
    const auto task = make_task(config);
    const auto expected = nn::input_shape(gan::x2y_generator(system).spec());
    if (expected != task.shape()) {
      throw SpecError("checkpoint generator expects " + ad::to_string(expected) + " but task '" + task.name() +
                      "' yields " + ad::to_string(task.shape()));
    }
    auto report = metrics::evaluate(system, task, config.eval_n, config.eval_seed);
    if (auto epoch = ckpt.meta_value("epoch")) {
      if (auto e = parse_unsigned(*epoch)) report.epoch = static_cast<int>(*e);
    }
    const std::string hash = ckpt.meta_value("config_hash").value_or("unknown");
    const std::string row = metrics_csv_row(report, hash, config.eval_seed);

    const fs::path dir = config.out_dir;
    fs::create_directories(dir);
    const fs::path log = dir / "eval_metrics.csv";
    if (!fs::exists(log)) {
      auto f = io::create_new_file(log);
      f << metrics_csv_header();
    }
    std::ofstream append(log, std::ios::app | std::ios::binary);
    append << row;
    if (!append) throw std::runtime_error("failed appending to " + log.string());
    out << metrics_csv_header() << row;
    return kExitOk;
  });
}

int cmd_demo(const DemoOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.repeat < 1) throw std::invalid_argument("--repeat must be at least 1");
    const auto ckpt = nn::load_checkpoint(options.checkpoint);
    const auto system = system_from_checkpoint(ckpt);
    const nn::Model& G = options.direction == data::Direction::x2y ? gan::x2y_generator(system)
                                                                   : gan::y2x_generator(system);
    const auto expected = nn::input_shape(G.spec());
    const std::string comment = "config_hash=" + ckpt.meta_value("config_hash").value_or("unknown");
    auto translate = [&](ad::Tensor t) {
      if (t.shape() != expected) {
        throw DimensionError("input shape " + ad::to_string(t.shape()) + " does not match generator input " +
                             ad::to_string(expected));
      }
      for (int i = 0; i < options.repeat; ++i) t = nn::apply(G, t);
      return t;
    };
    if (options.input.extension() == ".pgm") {
      io::save_pgm(options.output, translate(io::load_pgm(options.input)), comment);
    } else {
      std::vector<ad::Tensor> outputs;
      for (const auto& p : io::load_points_csv(options.input)) outputs.push_back(translate(p));
      io::save_points_csv(options.output, outputs, comment);
    }
    out << "wrote " << options.output.string() << '\n';
    return kExitOk;
  });
}

}  // namespace one2one::app
