#pragma once

// Binary checkpoint container. All integers and reals are little-endian.
//
//   offset  field
//   0       magic "MDRNNCKP" (8 bytes)
//   8       u32 format version (currently 1)
//   12      u32 num_dims, u32 layer_kind (0 tanh, 1 lstm), u32 input_width,
//           u32 hidden_size, u32 cells_per_block, u32 num_classes,
//           u32 multidirectional (0/1)
//   40      u64 rng seed
//   48      u32 length + bytes: textual std::mt19937_64 state
//   ...     u32 length + bytes: metadata, "key=value" lines
//   ...     u64 parameter count, then that many f64 in Network::params() order
//           (directions ascending; per direction input, recurrent per
//           dimension, peepholes, biases; then output weights, output biases)

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mdrnn/network.hpp"

namespace mdrnn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    NetworkConfig config;
    std::uint64_t seed = 0;
    std::string rng_state;
    std::map<std::string, std::string> metadata;
    std::vector<double> params;

    Network network() const { return Network(config, params); }
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
/// Throws FormatError on bad magic, unknown version, truncation or trailing bytes.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mdrnn
