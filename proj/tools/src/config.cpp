#include "one2one/app/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "one2one/errors.hpp"
#include "one2one/io.hpp"
#include "one2one/text.hpp"

namespace one2one::app {

namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Field {
  std::string section;
  std::string key;
  Setter set;  // throws std::invalid_argument with a reason on bad values
  Getter get;
};

[[noreturn]] void bad(const std::string& reason) { throw std::invalid_argument(reason); }

double to_double(const std::string& v) {
  auto d = parse_double(v);
  if (!d || !std::isfinite(*d)) bad("expected a finite number, got '" + v + "'");
  return *d;
}

std::uint64_t to_u64(const std::string& v) {
  auto u = parse_unsigned(v);
  if (!u) bad("expected a non-negative integer, got '" + v + "'");
  return *u;
}

int to_int(const std::string& v, int lo, int hi) {
  const auto u = to_u64(v);
  if (u < static_cast<std::uint64_t>(lo) || u > static_cast<std::uint64_t>(hi)) {
    bad("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + v);
  }
  return static_cast<int>(u);
}

std::size_t to_size(const std::string& v, std::size_t lo, std::size_t hi) {
  const auto u = to_u64(v);
  if (u < lo || u > hi) bad("must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + v);
  return static_cast<std::size_t>(u);
}

double in_range(double d, double lo, double hi, bool lo_open, const std::string& text) {
  if ((lo_open ? d <= lo : d < lo) || d > hi) {
    bad("must lie in " + std::string(lo_open ? "(" : "[") + format_double(lo) + ", " + format_double(hi) +
        "], got " + text);
  }
  return d;
}

std::vector<std::size_t> to_widths(const std::string& v) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) bad("expected a comma-separated list of positive widths");
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_size(std::string(trim(item)), 1, 4096));
  return out;
}

std::string join(const std::vector<std::size_t>& ws) {
  std::string s;
  for (std::size_t i = 0; i < ws.size(); ++i) s += (i ? "," : "") + std::to_string(ws[i]);
  return s;
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  bad("expected true or false, got '" + v + "'");
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto add = [&](const char* section, const char* key, Setter s, Getter g) {
      f.push_back({section, key, std::move(s), std::move(g)});
    };
    auto num = [](double RunConfig::*m, double lo, double hi, bool lo_open) {
      return std::pair<Setter, Getter>{
          [=](RunConfig& c, const std::string& v) { c.*m = in_range(to_double(v), lo, hi, lo_open, v); },
          [=](const RunConfig& c) { return format_double(c.*m); }};
    };
    auto size = [](std::size_t RunConfig::*m, std::size_t lo, std::size_t hi) {
      return std::pair<Setter, Getter>{[=](RunConfig& c, const std::string& v) { c.*m = to_size(v, lo, hi); },
                                       [=](const RunConfig& c) { return std::to_string(c.*m); }};
    };
    auto integer = [](int RunConfig::*m, int lo, int hi) {
      return std::pair<Setter, Getter>{[=](RunConfig& c, const std::string& v) { c.*m = to_int(v, lo, hi); },
                                       [=](const RunConfig& c) { return std::to_string(c.*m); }};
    };
    auto seed = [](std::uint64_t RunConfig::*m) {
      return std::pair<Setter, Getter>{[=](RunConfig& c, const std::string& v) { c.*m = to_u64(v); },
                                       [=](const RunConfig& c) { return std::to_string(c.*m); }};
    };
    auto add_pair = [&](const char* section, const char* key, std::pair<Setter, Getter> p) {
      add(section, key, std::move(p.first), std::move(p.second));
    };

    add(
        "task", "name",
        [](RunConfig& c, const std::string& v) {
          if (v != "reflection" && v != "affine" && v != "image_inversion" && v != "manifest") {
            bad("unknown task '" + v + "' (reflection, affine, image_inversion, manifest)");
          }
          c.task = v;
        },
        [](const RunConfig& c) { return c.task; });
    add_pair("task", "n", size(&RunConfig::n, 1, 10'000'000));
    add_pair("task", "height", size(&RunConfig::height, 1, 32));
    add_pair("task", "width", size(&RunConfig::width, 1, 32));
    add_pair("task", "margin", num(&RunConfig::margin, 0.0, 0.48, false));
    add_pair("task", "affine_scale", num(&RunConfig::affine_scale, 0.0, 2.0, true));
    add_pair("task", "affine_angle", num(&RunConfig::affine_angle, -360.0, 360.0, false));
    add(
        "task", "manifest", [](RunConfig& c, const std::string& v) { c.manifest = v; },
        [](const RunConfig& c) { return c.manifest; });

    add(
        "model", "kind", [](RunConfig& c, const std::string& v) { c.kind = nn::parse_net_kind(v); },
        [](const RunConfig& c) { return nn::to_string(c.kind); });
    add(
        "model", "generator_hidden", [](RunConfig& c, const std::string& v) { c.generator_hidden = to_widths(v); },
        [](const RunConfig& c) { return join(c.generator_hidden); });
    add(
        "model", "discriminator_hidden",
        [](RunConfig& c, const std::string& v) { c.discriminator_hidden = to_widths(v); },
        [](const RunConfig& c) { return join(c.discriminator_hidden); });
    add(
        "model", "norm", [](RunConfig& c, const std::string& v) { c.norm = to_bool(v); },
        [](const RunConfig& c) { return std::string(c.norm ? "true" : "false"); });

    add(
        "train", "mode", [](RunConfig& c, const std::string& v) { c.mode = gan::parse_mode(v); },
        [](const RunConfig& c) { return gan::to_string(c.mode); });
    add_pair("train", "epochs", integer(&RunConfig::epochs, 0, 1'000'000));
    add_pair("train", "lambda_x", num(&RunConfig::lambda_x, 0.0, 1e6, false));
    add_pair("train", "lambda_y", num(&RunConfig::lambda_y, 0.0, 1e6, false));
    add_pair("train", "lambda", num(&RunConfig::lambda, 0.0, 1e6, false));
    add_pair("train", "lr", num(&RunConfig::lr, 0.0, 1.0, true));
    add_pair("train", "beta1", num(&RunConfig::beta1, 0.0, 0.999999, false));
    add_pair("train", "beta2", num(&RunConfig::beta2, 0.0, 0.999999999, false));
    add_pair("train", "adam_eps", num(&RunConfig::adam_eps, 0.0, 1.0, true));
    add_pair("train", "fixed_epochs", integer(&RunConfig::fixed_epochs, 0, 1'000'000));
    add_pair("train", "decay_epochs", integer(&RunConfig::decay_epochs, 0, 1'000'000));
    add_pair("train", "pool", size(&RunConfig::pool, 0, 100'000));

    add_pair("seed", "data", seed(&RunConfig::data_seed));
    add_pair("seed", "init", seed(&RunConfig::init_seed));
    add_pair("seed", "train", seed(&RunConfig::train_seed));

    add_pair("eval", "every", integer(&RunConfig::eval_every, 0, 1'000'000));
    add_pair("eval", "n", size(&RunConfig::eval_n, 2, 100'000));
    add_pair("eval", "seed", seed(&RunConfig::eval_seed));

    add(
        "output", "dir",
        [](RunConfig& c, const std::string& v) {
          if (v.empty()) bad("output directory must not be empty");
          c.out_dir = v;
        },
        [](const RunConfig& c) { return c.out_dir; });
    add_pair("output", "checkpoint_every", integer(&RunConfig::checkpoint_every, 0, 1'000'000));
    add_pair("output", "dump", size(&RunConfig::dump, 0, 100'000));
    return f;
  }();
  return table;
}

const std::set<std::pair<std::string, std::string>>& required_keys() {
  static const std::set<std::pair<std::string, std::string>> keys{
      {"task", "name"}, {"seed", "data"}, {"seed", "init"}, {"seed", "train"}, {"eval", "seed"}};
  return keys;
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  RunConfig cfg;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    const auto body = trim(raw);
    if (body.empty() || body.front() == '#' || body.front() == ';') continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError("unterminated section header", line_no);
      section = std::string(trim(body.substr(1, body.size() - 2)));
      const bool known = std::any_of(fields().begin(), fields().end(), [&](const Field& f) { return f.section == section; });
      if (!known) throw ParseError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (section.empty()) throw ParseError("key '" + key + "' appears before any [section]", line_no);
    const auto it = std::find_if(fields().begin(), fields().end(),
                                 [&](const Field& f) { return f.section == section && f.key == key; });
    const std::string qualified = section + "." + key;
    if (it == fields().end()) throw ParseError("unknown key '" + qualified + "'", line_no);
    if (seen.count({section, key})) throw ParseError("duplicate key '" + qualified + "'", line_no);
    seen[{section, key}] = line_no;
    try {
      it->set(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ParseError("key '" + qualified + "': " + e.what(), line_no);
    }
  }

  for (const auto& req : required_keys()) {
    if (!seen.count(req)) throw ParseError("missing required key '" + req.first + "." + req.second + "'", 0);
  }
  auto given = [&](const char* s, const char* k) { return seen.count({s, k}) > 0; };
  if (cfg.task == "image_inversion" && !given("model", "kind")) cfg.kind = nn::NetKind::conv;
  if (cfg.kind == nn::NetKind::conv) {
    if (!given("model", "generator_hidden")) cfg.generator_hidden = {8, 16, 16, 8};
    if (!given("model", "discriminator_hidden")) cfg.discriminator_hidden = {8, 16};
  }
  if (cfg.task == "manifest" && cfg.manifest.empty()) {
    throw ParseError("task 'manifest' requires key 'task.manifest'", seen.count({"task", "name"}) ? seen[{"task", "name"}] : 0);
  }
  if (cfg.task == "image_inversion" && cfg.kind != nn::NetKind::conv) {
    throw ParseError("key 'model.kind': the image task needs conv nets", seen.count({"model", "kind"}) ? seen[{"model", "kind"}] : 0);
  }
  if ((cfg.task == "reflection" || cfg.task == "affine") && cfg.n < 100) {
    throw ParseError("key 'task.n': synthetic point tasks need n >= 100", seen[{"task", "n"}]);
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

std::string write_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : write_config(config)) h = (h ^ c) * 1099511628211ULL;
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

data::DomainTask make_task(const RunConfig& config) {
  if (config.task == "reflection") return data::make_reflection_task(config.data_seed, config.n, config.margin);
  if (config.task == "affine") {
    return data::make_affine_task(config.data_seed, config.n,
                                  {config.affine_scale, config.affine_angle, config.margin});
  }
  if (config.task == "image_inversion") {
    return data::make_image_inversion_task(config.data_seed, config.n, config.height, config.width, config.margin);
  }
  if (config.task == "manifest") return io::load_manifest_task(config.manifest, config.data_seed);
  throw SpecError("unknown task '" + config.task + "'");
}

gan::SystemConfig system_config(const RunConfig& config, const ad::Shape& sample_shape) {
  gan::SystemConfig sys;
  auto widths = [](std::size_t io, const std::vector<std::size_t>& hidden, std::size_t last) {
    std::vector<std::size_t> w{io};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(last);
    return w;
  };
  if (config.kind == nn::NetKind::vector) {
    if (sample_shape.size() != 2 || sample_shape[0] != 1) {
      throw SpecError("vector nets need [1 x d] samples, task gives " + ad::to_string(sample_shape));
    }
    const auto d = sample_shape[1];
    sys.generator = {nn::NetKind::vector, widths(d, config.generator_hidden, d), 0, 0, config.norm};
    sys.discriminator = {nn::NetKind::vector, widths(d, config.discriminator_hidden, 1), 0, 0};
  } else {
    if (sample_shape.size() != 3) {
      throw SpecError("conv nets need [c x h x w] samples, task gives " + ad::to_string(sample_shape));
    }
    const auto c = sample_shape[0], h = sample_shape[1], w = sample_shape[2];
    sys.generator = {nn::NetKind::conv, widths(c, config.generator_hidden, c), h, w, config.norm};
    sys.discriminator = {nn::NetKind::conv, widths(c, config.discriminator_hidden, 1), h, w};
  }
  nn::validate(sys.generator);
  nn::validate(sys.discriminator);
  sys.lambda_x = config.lambda_x;
  sys.lambda_y = config.lambda_y;
  sys.lambda = config.lambda;
  sys.adam = {config.beta1, config.beta2, config.adam_eps};
  sys.schedule = {config.lr, config.fixed_epochs, config.decay_epochs};
  sys.pool_capacity = config.pool;
  sys.init_seed = config.init_seed;
  sys.train_seed = config.train_seed;
  return sys;
}

}  // namespace one2one::app
