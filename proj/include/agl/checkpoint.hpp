#pragma once

#include <filesystem>
#include <iosfwd>

#include "agl/network.hpp"

namespace agl {

// Text checkpoint, version 1:
//
//   agl-checkpoint 1
//   architecture <FFN|RNN|GRU>
//   neurons <int>
//   depth <int>
//   laminations <int>
//   window <int>
//   gru_candidate <tanh|relu>
//   tensors <count>
//   tensor <name> <rows> <cols>      (repeated <count> times, layer order)
//   <rows lines of <cols> space-separated values, row-major>
//   end
//
// Values use the shortest decimal form that round-trips exactly. Masks are
// not stored; they are rebuilt from the configuration.

void save_checkpoint(std::ostream& out, const Parameters& params);
Parameters load_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const Parameters& params);
Parameters load_checkpoint(const std::filesystem::path& path);

}  // namespace agl
