#pragma once
// Network checkpoint file.
//
//   "GMEG"                      4 bytes magic
//   u32  version (= 1)
//   u32  network count
//   per network:
//     u32  number of widths W
//     u32  widths[W]
//     u8   activation codes for the W-2 hidden layers (0 identity, 1 relu, 2 tanh)
//     u8   final activation code
//     u64  parameter count P
//     f64  params[P]
//
// Integers and floats are little-endian.

#include <filesystem>
#include <span>
#include <vector>

#include "gmelab/mlp.hpp"

namespace gmelab::nd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, std::span<const Mlp> networks);
std::vector<Mlp> load_checkpoint(const std::filesystem::path& path);

void write_checkpoint(std::ostream& out, std::span<const Mlp> networks);
std::vector<Mlp> read_checkpoint(std::istream& in);

}  // namespace gmelab::nd
