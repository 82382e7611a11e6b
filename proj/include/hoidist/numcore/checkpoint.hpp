#pragma once

#include <string>

#include "hoidist/numcore/param_store.hpp"

namespace numcore {

// Checkpoint layout: u64 little-endian header length, a UTF-8 JSON header
// {"seed": ..., "tensors": [{name, shape, dtype:"f64", byte_offset}, ...]},
// then the raw little-endian float64 blobs back to back. Offsets are
// relative to the end of the header.
void save_checkpoint(const ParamStore& store, const std::string& path);

// Loads values into an already-built store; names and shapes must match.
void load_checkpoint(ParamStore& store, const std::string& path);

}  // namespace numcore
