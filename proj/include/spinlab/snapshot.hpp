#pragma once

#include <string>

#include "spinlab/grid.hpp"

namespace spinlab {

// Binary field snapshot, format version 1:
//   "MAGF"  magic
//   u32     format version
//   u32 x3  cell counts n1 n2 n3
//   mask    packed bits, row-major x-fastest, LSB first within each byte
//   payload 3 little-endian f64 per interior cell, in mask order
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::string& path, const VectorField& field);

/// Loads a snapshot onto an existing grid; the stored mask and cell counts
/// must match the grid exactly. Throws IoError otherwise.
VectorField read_snapshot(const std::string& path, GridPtr grid);

}  // namespace spinlab
