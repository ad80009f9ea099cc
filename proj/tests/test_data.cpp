#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "one2one/data.hpp"
#include "one2one/errors.hpp"
#include "one2one/io.hpp"

using namespace one2one;
using namespace one2one::data;
using ad::Tensor;
namespace fs = std::filesystem;

// Training code receives TrainingData; it must not be able to name a truth oracle.
template <typename T>
concept HasTruth = requires(T t) { t.truth; } || requires(T t) { t.truth(); };
static_assert(!HasTruth<TrainingData>);
static_assert(HasTruth<DomainTask>);

namespace {

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "one2one_test_data" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.at(i) - b.at(i)));
  return m;
}

}  // namespace

TEST_CASE("reflection task: disjoint supports and an exact involution") {
  const auto task = make_reflection_task(3, 2000);
  const auto d = task.training_data();
  REQUIRE(d.x.size() == 2000);
  REQUIRE(d.y.size() == 2000);
  for (const auto& x : d.x) CHECK(x.at(0) <= -0.1);
  for (const auto& y : d.y) CHECK(y.at(0) >= 0.1);
  const auto* f = task.truth();
  REQUIRE(f != nullptr);
  for (const auto& x : d.x) {
    CHECK(f->to_x(f->to_y(x)) == x);
    CHECK(f->to_y(f->to_y(x)) == x);
  }
  CHECK_THROWS_AS(make_reflection_task(1, 99), SpecError);
}

TEST_CASE("reflection task: the X mixture sits left of the axis") {
  const auto xs = make_reflection_task(1, 100).sample_x(5, 3000);
  double mean_u = 0;
  for (const auto& x : xs) mean_u += x.at(0) / 3000.0;
  // component means -0.55, -0.45, -0.6 with weights 0.5, 0.3, 0.2
  CHECK(mean_u == doctest::Approx(0.5 * -0.55 + 0.3 * -0.45 + 0.2 * -0.6).epsilon(0.02));
}

TEST_CASE("affine task: exact inverse, non-involution, margin") {
  const auto task = make_affine_task(4, 500);
  const auto* f = task.truth();
  const auto d = task.training_data();
  for (const auto& x : d.x) {
    CHECK(x.at(0) <= -0.1);
    CHECK(max_abs_diff(f->to_x(f->to_y(x)), x) < 1e-12);
  }
  for (const auto& y : d.y) {
    CHECK(y.at(0) >= 0.1);
    CHECK(max_abs_diff(f->to_y(f->to_x(y)), y) < 1e-12);
  }
  // f itself is not an involution
  CHECK(max_abs_diff(f->to_y(f->to_y(d.x[0])), d.x[0]) > 0.1);
  // the piecewise map (f on X, f^-1 on Y) composed twice is the identity
  auto piecewise = [&](const Tensor& p) { return p.at(0) < 0 ? f->to_y(p) : f->to_x(p); };
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(max_abs_diff(piecewise(piecewise(d.x[i])), d.x[i]) < 1e-12);
    CHECK(max_abs_diff(piecewise(piecewise(d.y[i])), d.y[i]) < 1e-12);
  }
}

TEST_CASE("affine task parameter errors") {
  CHECK_THROWS_AS(make_affine_task(1, 200, {1e-7, 30.0, 0.2}), SpecError);
  CHECK_THROWS_AS(make_affine_task(1, 200, {1.0, 0.0, 0.2}), SpecError);
  CHECK_THROWS_AS(make_affine_task(1, 200, {1.0, 180.0, 0.2}), SpecError);
}

TEST_CASE("image inversion task") {
  const auto task = make_image_inversion_task(2, 120, 16, 16);
  const auto d = task.training_data();
  double mx = 0, my = 0;
  for (const auto& x : d.x) {
    CHECK(x.shape() == ad::Shape{1, 16, 16});
    for (double v : x.values()) {
      CHECK(v >= -1.0);
      CHECK(v <= 1.0);
      mx += v;
    }
    CHECK(task.truth()->to_y(task.truth()->to_y(x)) == x);
  }
  for (const auto& y : d.y) {
    for (double v : y.values()) my += v;
  }
  CHECK(mx > 0);
  CHECK(my < 0);
  CHECK(task.is_image());
  CHECK_THROWS_AS(make_image_inversion_task(1, 10, 33, 16), SpecError);
}

TEST_CASE("X and Y streams are independent and seeded") {
  const auto task = make_reflection_task(1, 200);
  const auto xs = task.sample_x(9, 5);
  const auto ys = task.sample_y(9, 5);
  // If the streams were shared, y_i would equal reflect(x_i).
  CHECK_FALSE(task.truth()->to_y(xs[0]) == ys[0]);
  CHECK(task.sample_x(9, 5)[3] == xs[3]);
  CHECK_FALSE(task.sample_x(10, 5)[3] == xs[3]);
}

TEST_CASE("sampler visits every sample once per epoch") {
  std::vector<Tensor> samples;
  for (int i = 0; i < 37; ++i) samples.push_back(Tensor({1, 1}, {static_cast<double>(i)}));
  UnpairedSampler a(samples, 4), b(samples, 4), c(samples, 5);
  std::vector<double> first, second, other;
  for (int i = 0; i < 37; ++i) first.push_back(a.next().at(0));
  for (int i = 0; i < 37; ++i) second.push_back(a.next().at(0));
  for (int i = 0; i < 37; ++i) other.push_back(c.next().at(0));
  CHECK(std::set<double>(first.begin(), first.end()).size() == 37);
  CHECK(std::set<double>(second.begin(), second.end()).size() == 37);
  CHECK(first != second);
  CHECK(first != other);
  CHECK(a.epoch() == 1);
  for (int i = 0; i < 37; ++i) CHECK(b.next().at(0) == first[i]);
  CHECK_THROWS(UnpairedSampler({}, 1));
}

TEST_CASE("points CSV") {
  const auto dir = scratch("csv");
  write_file(dir / "ok.csv", "# comment\n0.5,-0.5\n\n1e-3 , 2\n");
  const auto pts = io::load_points_csv(dir / "ok.csv");
  REQUIRE(pts.size() == 2);
  CHECK(pts[0] == Tensor({1, 2}, {0.5, -0.5}));
  CHECK(pts[1].at(0) == 1e-3);

  write_file(dir / "bad.csv", "0.5,-0.5\n0.1,zz\n");
  try {
    io::load_points_csv(dir / "bad.csv");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  write_file(dir / "ragged.csv", "1,2\n3\n");
  CHECK_THROWS_AS(io::load_points_csv(dir / "ragged.csv"), ParseError);

  io::save_points_csv(dir / "out.csv", pts, "config_hash=abc");
  CHECK(io::load_points_csv(dir / "out.csv")[1] == pts[1]);
  CHECK_THROWS(io::save_points_csv(dir / "out.csv", pts));
}

TEST_CASE("PGM read and write") {
  const auto dir = scratch("pgm");
  write_file(dir / "a.pgm", "P2\n# tiny\n3 2\n255\n0 255 51\n204 127 128\n");
  const Tensor img = io::load_pgm(dir / "a.pgm");
  CHECK(img.shape() == ad::Shape{1, 2, 3});
  CHECK(img.at(0) == -1.0);
  CHECK(img.at(1) == 1.0);
  CHECK(img.at(2) == doctest::Approx(51.0 / 127.5 - 1.0).epsilon(1e-15));

  io::save_pgm(dir / "b.pgm", img, "config_hash=abc");
  CHECK(io::load_pgm(dir / "b.pgm") == img);

  write_file(dir / "bad.pgm", "P2\n2 2\n65535\n0 0 0 0\n");
  CHECK_THROWS_AS(io::load_pgm(dir / "bad.pgm"), ParseError);
  write_file(dir / "short.pgm", std::string("P5\n2 2\n255\n") + "ab");
  CHECK_THROWS_AS(io::load_pgm(dir / "short.pgm"), ParseError);
  write_file(dir / "magic.pgm", "P6\n2 2\n255\n");
  CHECK_THROWS_AS(io::load_pgm(dir / "magic.pgm"), ParseError);
}

TEST_CASE("manifest tasks load fixed sets and carry no truth") {
  const auto dir = scratch("manifest");
  write_file(dir / "x.csv", "-0.5,0.1\n-0.4,0.2\n-0.6,0.0\n");
  write_file(dir / "y.csv", "0.5,0.1\n0.4,0.2\n");
  write_file(dir / "m.txt", "# points\nkind = points\nshape = 2\nx = x.csv\ny = y.csv\n");
  const auto task = io::load_manifest_task(dir / "m.txt", 1);
  CHECK(task.truth() == nullptr);
  const auto d = task.training_data();
  CHECK(d.x.size() == 3);
  CHECK(d.y.size() == 2);
  CHECK(task.sample_y(1, 4).size() == 4);

  write_file(dir / "bad.txt", "kind = points\nshape = 2\nz = x.csv\n");
  try {
    io::load_manifest_task(dir / "bad.txt", 1);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  write_file(dir / "shape.txt", "kind = points\nshape = 3\nx = x.csv\ny = y.csv\n");
  CHECK_THROWS_AS(io::load_manifest_task(dir / "shape.txt", 1), ParseError);
}

TEST_CASE("image manifests read a directory of PGMs") {
  const auto dir = scratch("manifest_img");
  fs::create_directories(dir / "X");
  fs::create_directories(dir / "Y");
  io::save_pgm(dir / "X" / "0.pgm", Tensor::full({1, 4, 4}, 0.5));
  io::save_pgm(dir / "Y" / "0.pgm", Tensor::full({1, 4, 4}, -0.5));
  write_file(dir / "m.txt", "kind = images\nshape = 4x4\nx = X\ny = Y\n");
  const auto d = io::load_manifest_task(dir / "m.txt", 1).training_data();
  REQUIRE(d.x.size() == 1);
  CHECK(d.x[0].shape() == ad::Shape{1, 4, 4});
}
