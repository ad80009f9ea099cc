#include "one2one/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "one2one/errors.hpp"
#include "one2one/io.hpp"
#include "one2one/text.hpp"

namespace one2one::nn {

namespace {
constexpr std::string_view kMagic = "one2one-checkpoint v1";
}

const Model& Checkpoint::model(const std::string& name) const {
  for (const auto& [n, m] : models)
    if (n == name) return m;
  throw std::out_of_range("checkpoint has no model '" + name + "'");
}

bool Checkpoint::has_model(const std::string& name) const {
  for (const auto& entry : models)
    if (entry.first == name) return true;
  return false;
}

std::optional<std::string> Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta)
    if (k == key) return v;
  return std::nullopt;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out << kMagic << '\n';
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << ' ' << v << '\n';
  for (const auto& [name, model] : ckpt.models) {
    out << "model " << name << '\n';
    out << "spec " << describe(model.spec()) << '\n';
    for (const auto& p : model.parameters()) {
      out << "param " << p.name << ' ' << p.value.rank();
      for (auto d : p.value.shape()) out << ' ' << d;
      out << '\n';
      bool first = true;
      for (double v : p.value.values()) {
        if (!first) out << ' ';
        out << format_double(v);
        first = false;
      }
      out << '\n';
    }
    out << "end\n";
  }
}

Checkpoint read_checkpoint(std::istream& in) {
  Checkpoint ckpt;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };

  if (!next_line() || trim(line) != kMagic) throw ParseError("missing checkpoint header", 1);

  std::optional<ModelSpec> spec;
  std::string model_name;
  std::vector<NamedParameter> params;
  bool in_model = false;

  while (next_line()) {
    if (trim(line).empty()) continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (tag == "meta") {
      std::string key;
      fields >> key;
      std::string rest;
      std::getline(fields, rest);
      ckpt.meta.emplace_back(key, std::string(trim(rest)));
    } else if (tag == "model") {
      if (in_model) throw ParseError("model '" + model_name + "' not terminated by 'end'", line_no);
      fields >> model_name;
      in_model = true;
      spec.reset();
      params.clear();
    } else if (tag == "spec") {
      if (!in_model) throw ParseError("'spec' outside a model block", line_no);
      std::string rest;
      std::getline(fields, rest);
      try {
        spec = parse_spec(std::string(trim(rest)));
      } catch (const SpecError& e) {
        throw ParseError(e.what(), line_no);
      }
    } else if (tag == "param") {
      if (!in_model || !spec) throw ParseError("'param' before 'spec'", line_no);
      std::string name;
      std::size_t rank = 0;
      fields >> name >> rank;
      ad::Shape shape(rank);
      for (auto& d : shape) fields >> d;
      if (!fields) throw ParseError("malformed param header", line_no);
      if (!next_line()) throw ParseError("missing values for param '" + name + "'", line_no);
      std::vector<double> values;
      std::istringstream vs(line);
      std::string token;
      while (vs >> token) {
        auto v = parse_double(token);
        if (!v) throw ParseError("bad number '" + token + "'", line_no);
        values.push_back(*v);
      }
      try {
        params.push_back({name, ad::Tensor(shape, std::move(values), true)});
      } catch (const DimensionError& e) {
        throw ParseError(e.what(), line_no);
      }
    } else if (tag == "end") {
      if (!in_model || !spec) throw ParseError("'end' without model", line_no);
      Model model(*spec, params);
      // Reject parameter layouts that disagree with the declared spec.
      Model reference = std::holds_alternative<GeneratorSpec>(*spec)
                            ? build_generator(std::get<GeneratorSpec>(*spec), 0)
                            : build_discriminator(std::get<DiscriminatorSpec>(*spec), 0);
      if (reference.parameters().size() != params.size()) {
        throw ParseError("model '" + model_name + "' has wrong parameter count", line_no);
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (reference.parameters()[i].name != params[i].name ||
            reference.parameters()[i].value.shape() != params[i].value.shape()) {
          throw ParseError("model '" + model_name + "' parameter '" + params[i].name + "' does not match spec",
                           line_no);
        }
      }
      ckpt.models.emplace_back(model_name, std::move(model));
      in_model = false;
    } else {
      throw ParseError("unknown record '" + tag + "'", line_no);
    }
  }
  if (in_model) throw ParseError("truncated checkpoint: model '" + model_name + "' not terminated", line_no);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  auto out = io::create_new_file(path);
  write_checkpoint(out, ckpt);
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace one2one::nn
