#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dbn/nnet/network.hpp"

namespace dbn::nnet {

/// Binary layout, all integers little-endian:
///
///   "DBNMINI\0"                      8 bytes
///   version                          u32 (= 1)
///   input_size, input_channels,
///   classes, width, kernel           u32 x5
///   dropout_rate                     f64
///   layer count                      u32
///   per layer: section, kind, in_channels, out_channels, kernel, stride
///                                    u32 x6 (section 0 = branch_a, 1 = branch_b, 2 = head)
///              parameter count       u64
///   total parameter count            u64
///   parameters                       f32, declaration order
inline constexpr std::uint32_t checkpoint_version = 1;

std::vector<std::uint8_t> encode_checkpoint(Network& net);
/// Rebuilds the network from the header and loads its parameters. Throws
/// DataError on a bad magic, unknown version, truncation, trailing bytes or
/// a layer table that does not match the rebuilt network.
Network decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, Network& net);
Network load_checkpoint(const std::filesystem::path& path);

/// `index,section,kind,in_channels,out_channels,kernel,stride,params`
std::string layer_table_csv(const Network& net);

}  // namespace dbn::nnet
