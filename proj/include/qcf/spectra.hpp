#pragma once

#include <string>
#include <vector>

#include "qcf/image.hpp"

namespace qcf {

enum class DenoiseMethod { median3, gaussian, external };

struct DenoiseConfig {
    DenoiseMethod method = DenoiseMethod::median3;
    double sigma = 1.0;       // gaussian only
    std::string model_path;   // external only
};

// Running mean of residual grids from one (concept, source) slice.
struct ResidualStack {
    int width = 0;
    int height = 0;
    std::size_t count = 0;
    std::vector<double> mean;  // row-major H x W

    FloatGrid grid() const;
};

struct Spectrogram {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;  // DC-centered
    std::vector<double> phase;      // (-pi, pi]
};

// Per-channel float output in [0,1]. Three channels, row-major interleaved.
std::vector<double> denoise(const Image& img, const DenoiseConfig& cfg);

// (img - denoised) per channel, then channel mean. img samples are scaled
// to [0,1] to match the denoiser output.
FloatGrid residual(const Image& img, const std::vector<double>& denoised);

void accumulate(ResidualStack& stack, const FloatGrid& r);

// DC-centered magnitude/phase of the 2-D DFT.
Spectrogram fft2_spectrum(const FloatGrid& grid);

// log(1+m) scaled linearly to 0..255, max magnitude maps to 255.
std::vector<std::uint8_t> render_pixels(const Spectrogram& spec);
void render_spectrogram(const Spectrogram& spec, const std::string& path);

}  // namespace qcf
