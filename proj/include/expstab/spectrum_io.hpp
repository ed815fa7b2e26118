#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "expstab/problem.hpp"

namespace expstab {

/// One spectrum in transform order with its provenance header.
struct SpectrumSnapshot {
  std::string problem;
  std::size_t nx = 0;
  double t = 0.0;
  ComplexVector<> values;
  /// Set when the run diverged; t is then the last finite time.
  std::optional<std::size_t> blowup_step;
};

/// `# expstab-spectrum v1 problem=<name> Nx=<n> t=<time>[ status=blowup blowup_step=<n>]`
/// followed by Nx lines `re,im`, 17 significant digits.
void write_snapshot(std::ostream& os, const SpectrumSnapshot& snap);
/// Reads one snapshot; throws std::runtime_error on malformed input.
SpectrumSnapshot read_snapshot(std::istream& is);
/// Reads snapshots until end of stream.
std::vector<SpectrumSnapshot> read_snapshots(std::istream& is);

/// Writes to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace expstab
