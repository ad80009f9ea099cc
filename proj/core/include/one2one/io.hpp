#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "one2one/data.hpp"
#include "one2one/tensor.hpp"

namespace one2one::io {

/// Opens `path` for writing; throws if it already exists.
std::ofstream create_new_file(const std::filesystem::path& path);

/// One sample per line, comma-separated decimals, all rows the same arity.
/// Blank lines and lines starting with '#' are skipped. Each row becomes a
/// [1 x d] tensor.
std::vector<ad::Tensor> load_points_csv(const std::filesystem::path& path);
/// A non-empty `comment` is written first as a '#' line.
void save_points_csv(const std::filesystem::path& path, const std::vector<ad::Tensor>& points,
                     const std::string& comment = {});

/// 8-bit greyscale PGM (P2 or P5, maxval 255). Pixel p maps to p / 127.5 - 1,
/// giving a [1 x h x w] tensor in [-1, 1].
ad::Tensor load_pgm(const std::filesystem::path& path);
/// Writes P5; values are clamped to [-1, 1] and rounded to the nearest level.
/// A non-empty `comment` goes into the header as a '#' line.
void save_pgm(const std::filesystem::path& path, const ad::Tensor& image, const std::string& comment = {});

/// Dataset manifest (key = value lines, '#' comments):
///
///     kind  = points | images
///     shape = 2        (points: dimension)   or   16x16   (images: h x w)
///     x     = <CSV file | directory of .pgm files>
///     y     = <CSV file | directory of .pgm files>
///
/// Relative paths resolve against the manifest's directory. The returned task
/// carries no ground truth.
data::DomainTask load_manifest_task(const std::filesystem::path& path, std::uint64_t seed);

}  // namespace one2one::io
