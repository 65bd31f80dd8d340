#pragma once

#include <complex>
#include <vector>

#include "qcf/image.hpp"

namespace qcf {

// In-place forward DFT of arbitrary length: radix-2 when the size is a
// power of two, Bluestein's chirp-z otherwise.
void fft(std::vector<std::complex<double>>& v);
void ifft(std::vector<std::complex<double>>& v);

// Row-column 2-D forward DFT of a real grid; output row-major H x W.
std::vector<std::complex<double>> fft2(const FloatGrid& grid);

}  // namespace qcf
