#pragma once

#include <string>

#include "afgcl/model.hpp"

namespace afgcl::nn {

/// Flat binary container of named double arrays with a JSON header.
///
/// Layout: 8-byte little-endian header length, the JSON header, then the
/// payload of row-major little-endian doubles. The header carries
/// {"version": "afgcl-ckpt-1", "arrays": [{"name", "shape", "offset"}...]}
/// with offsets in bytes relative to the payload start. Serialization is
/// byte-deterministic for identical parameters.
void save_checkpoint(const std::string& path, const ModelParams& params);

ModelParams load_checkpoint(const std::string& path);

}  // namespace afgcl::nn
