#pragma once

#include <string>

#include "bbsi/block_banded.hpp"

namespace bbsi {

/// ".bbm" matrix file: one-line JSON header
/// {"version":1,"num_layers":..,"block_sizes":[..],"bandwidth":..,"scalar":"c128"}
/// followed by the in-band blocks in row-major block order (layer ascending,
/// offset ascending), each block column-ordered, each entry two little-endian
/// 8-byte doubles (real then imaginary). Round-trips bit-exactly.
void write_bbm(const std::string& path, const BlockBandedMatrix<std::complex<double>>& m);
BlockBandedMatrix<std::complex<double>> read_bbm(const std::string& path);

}  // namespace bbsi
