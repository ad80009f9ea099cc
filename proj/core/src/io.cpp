#include "one2one/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "one2one/errors.hpp"
#include "one2one/text.hpp"

namespace one2one::io {

namespace fs = std::filesystem;
using ad::Tensor;

std::ofstream create_new_file(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  // "x" makes creation exclusive, so concurrent runs never clobber each other.
  std::FILE* f = std::fopen(path.c_str(), "wx");
  if (f == nullptr) {
    if (fs::exists(path)) throw std::runtime_error("refusing to overwrite existing file " + path.string());
    throw std::runtime_error("cannot create " + path.string());
  }
  std::fclose(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  return out;
}

std::vector<Tensor> load_points_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<Tensor> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t arity = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      const auto field = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      auto v = parse_double(field);
      if (!v) throw ParseError(path.string() + ": bad number '" + std::string(field) + "'", line_no);
      values.push_back(*v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (arity == 0) arity = values.size();
    if (values.size() != arity) {
      throw ParseError(path.string() + ": expected " + std::to_string(arity) + " columns, got " +
                           std::to_string(values.size()),
                       line_no);
    }
    rows.emplace_back(ad::Shape{1, arity}, std::move(values));
  }
  if (rows.empty()) throw ParseError(path.string() + ": no samples", line_no);
  return rows;
}

void save_points_csv(const fs::path& path, const std::vector<Tensor>& points, const std::string& comment) {
  auto out = create_new_file(path);
  if (!comment.empty()) out << "# " << comment << '\n';
  for (const auto& p : points) {
    bool first = true;
    for (double v : p.values()) {
      if (!first) out << ',';
      out << format_double(v);
      first = false;
    }
    out << '\n';
  }
}

namespace {

// Whitespace/comment-aware header tokenizer that tracks line numbers.
class PgmHeaderReader {
 public:
  PgmHeaderReader(const std::string& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      if (bytes_[pos_] == '#') break;
      out += bytes_[pos_++];
    }
    if (out.empty()) fail("unexpected end of header");
    return out;
  }

  std::size_t number(const char* what) {
    const auto text = token();
    auto v = parse_unsigned(text);
    if (!v) fail(std::string("bad ") + what + " '" + text + "'");
    return static_cast<std::size_t>(*v);
  }

  // P5: exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      fail("missing whitespace before raster");
    }
    return pos_ + 1;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(path_.string() + ": " + msg, line_); }

  std::size_t line() const { return line_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  const fs::path& path_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

double pixel_to_unit(unsigned value) { return static_cast<double>(value) / 127.5 - 1.0; }

}  // namespace

Tensor load_pgm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  PgmHeaderReader reader(bytes, path);
  const auto magic = reader.token();
  if (magic != "P2" && magic != "P5") reader.fail("unsupported magic '" + magic + "' (expected P2 or P5)");
  const auto width = reader.number("width");
  const auto height = reader.number("height");
  const auto maxval = reader.number("maxval");
  if (width == 0 || height == 0) reader.fail("zero image extent");
  if (maxval != 255) reader.fail("maxval must be 255, got " + std::to_string(maxval));

  std::vector<double> pixels(width * height);
  if (magic == "P5") {
    const auto start = reader.raster_start();
    if (bytes.size() - start < pixels.size()) reader.fail("truncated raster");
    for (std::size_t i = 0; i < pixels.size(); ++i) {
      pixels[i] = pixel_to_unit(static_cast<unsigned char>(bytes[start + i]));
    }
  } else {
    for (auto& p : pixels) {
      const auto v = reader.number("pixel");
      if (v > 255) reader.fail("pixel value " + std::to_string(v) + " exceeds maxval");
      p = pixel_to_unit(static_cast<unsigned>(v));
    }
  }
  return Tensor({1, height, width}, std::move(pixels));
}

void save_pgm(const fs::path& path, const Tensor& image, const std::string& comment) {
  if (image.rank() != 3 || image.shape()[0] != 1) {
    throw DimensionError("save_pgm expects a [1 x h x w] tensor, got " + ad::to_string(image.shape()));
  }
  const auto height = image.shape()[1], width = image.shape()[2];
  auto out = create_new_file(path);
  out << "P5\n";
  if (!comment.empty()) out << "# " << comment << '\n';
  out << width << ' ' << height << "\n255\n";
  std::string raster(width * height, '\0');
  auto values = image.values();
  for (std::size_t i = 0; i < raster.size(); ++i) {
    const double v = std::clamp(values[i], -1.0, 1.0);
    raster[i] = static_cast<char>(static_cast<unsigned char>(std::lround((v + 1.0) * 127.5)));
  }
  out.write(raster.data(), static_cast<std::streamsize>(raster.size()));
}

namespace {

std::vector<Tensor> load_domain(const fs::path& source, bool images, std::size_t line_no) {
  if (!images) return load_points_csv(source);
  if (!fs::is_directory(source)) throw ParseError("image domain '" + source.string() + "' is not a directory", line_no);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(source)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw ParseError("no .pgm files in '" + source.string() + "'", line_no);
  std::vector<Tensor> out;
  for (const auto& f : files) out.push_back(load_pgm(f));
  return out;
}

}  // namespace

data::DomainTask load_manifest_task(const fs::path& path, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest " + path.string());
  std::string kind, shape_text, x_src, y_src;
  std::size_t x_line = 0, y_line = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no);
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key == "kind") {
      kind = value;
    } else if (key == "shape") {
      shape_text = value;
    } else if (key == "x") {
      x_src = value;
      x_line = line_no;
    } else if (key == "y") {
      y_src = value;
      y_line = line_no;
    } else {
      throw ParseError("unknown manifest key '" + key + "'", line_no);
    }
  }
  if (kind != "points" && kind != "images") throw ParseError("manifest kind must be 'points' or 'images'", 0);
  if (x_src.empty() || y_src.empty() || shape_text.empty()) throw ParseError("manifest needs shape, x and y", 0);
  const bool images = kind == "images";

  ad::Shape shape;
  if (images) {
    const auto sep = shape_text.find('x');
    auto h = sep == std::string::npos ? std::nullopt : parse_unsigned(shape_text.substr(0, sep));
    auto w = sep == std::string::npos ? std::nullopt : parse_unsigned(shape_text.substr(sep + 1));
    if (!h || !w) throw ParseError("image shape must look like HxW", 0);
    shape = {1, static_cast<std::size_t>(*h), static_cast<std::size_t>(*w)};
  } else {
    auto d = parse_unsigned(shape_text);
    if (!d || *d == 0) throw ParseError("point shape must be a positive dimension", 0);
    shape = {1, static_cast<std::size_t>(*d)};
  }

  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  auto xs = load_domain(resolve(x_src), images, x_line);
  auto ys = load_domain(resolve(y_src), images, y_line);
  for (const auto* set : {&xs, &ys}) {
    for (const auto& t : *set) {
      if (t.shape() != shape) {
        throw ParseError("sample shape " + ad::to_string(t.shape()) + " does not match manifest shape " +
                             ad::to_string(shape),
                         0);
      }
    }
  }

  auto picker = [](std::vector<Tensor> pool) {
    return [pool = std::move(pool)](Rng& rng) {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      return pool[pick(rng)].detach();
    };
  };
  data::DomainTask task("manifest", shape, seed, std::max(xs.size(), ys.size()), picker(xs), picker(ys),
                        std::nullopt);
  task.set_fixed_training(std::move(xs), std::move(ys));
  return task;
}

}  // namespace one2one::io
