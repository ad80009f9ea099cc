#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "one2one/nn.hpp"

namespace one2one::nn {

/// Named models plus free-form metadata.
///
/// On disk (UTF-8 text, '\n' line endings, so byte-identical on every
/// platform; floats are the shortest decimal that round-trips binary64):
///
///     one2one-checkpoint v1
///     meta <key> <value>
///     model <name>
///     spec <describe(spec)>
///     param <name> <rank> <dim>...
///     <values separated by single spaces>
///     end
struct Checkpoint {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::pair<std::string, Model>> models;

  const Model& model(const std::string& name) const;
  bool has_model(const std::string& name) const;
  std::optional<std::string> meta_value(const std::string& key) const;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);

/// Refuses to replace an existing file.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace one2one::nn
