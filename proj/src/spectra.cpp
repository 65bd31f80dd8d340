#include "qcf/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "qcf/fft.hpp"
#include "qcf/pixels.hpp"

namespace qcf {

namespace {

std::vector<double> median3_denoise(const Image& img) {
    std::vector<double> out(img.data.size());
    double window[9];
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                int k = 0;
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int xi = std::clamp(x + dx, 0, img.width - 1);
                        const int yi = std::clamp(y + dy, 0, img.height - 1);
                        window[k++] = img.at(xi, yi, c);
                    }
                }
                std::nth_element(window, window + 4, window + 9);
                out[(std::size_t(y) * img.width + x) * 3 + c] = window[4] / 255.0;
            }
        }
    }
    return out;
}

std::vector<double> gaussian_denoise(const Image& img, double sigma) {
    const std::vector<double> k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size()) / 2;
    std::vector<double> src(img.data.size());
    for (std::size_t i = 0; i < img.data.size(); ++i) src[i] = img.data[i] / 255.0;

    std::vector<double> tmp(src.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int xi = std::clamp(x + i, 0, img.width - 1);
                    acc += k[i + radius] *
                           src[(std::size_t(y) * img.width + xi) * 3 + c];
                }
                tmp[(std::size_t(y) * img.width + x) * 3 + c] = acc;
            }
        }
    }
    std::vector<double> out(src.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int yi = std::clamp(y + i, 0, img.height - 1);
                    acc += k[i + radius] *
                           tmp[(std::size_t(yi) * img.width + x) * 3 + c];
                }
                out[(std::size_t(y) * img.width + x) * 3 + c] = acc;
            }
        }
    }
    return out;
}

}  // namespace

FloatGrid ResidualStack::grid() const {
    FloatGrid g(width, height);
    g.data = mean;
    return g;
}

std::vector<double> denoise(const Image& img, const DenoiseConfig& cfg) {
    switch (cfg.method) {
        case DenoiseMethod::median3:
            return median3_denoise(img);
        case DenoiseMethod::gaussian:
            return gaussian_denoise(img, cfg.sigma);
        case DenoiseMethod::external:
            throw std::runtime_error(
                "external denoiser model unavailable: " + cfg.model_path);
    }
    throw std::logic_error("unreachable");
}

FloatGrid residual(const Image& img, const std::vector<double>& denoised) {
    if (denoised.size() != img.data.size()) {
        throw std::invalid_argument("residual dim mismatch");
    }
    FloatGrid out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int c = 0; c < 3; ++c) {
                const std::size_t i = (std::size_t(y) * img.width + x) * 3 + c;
                acc += img.data[i] / 255.0 - denoised[i];
            }
            out.at(x, y) = acc / 3.0;
        }
    }
    return out;
}

void accumulate(ResidualStack& stack, const FloatGrid& r) {
    if (stack.count == 0) {
        stack.width = r.width;
        stack.height = r.height;
        stack.mean.assign(r.data.begin(), r.data.end());
        stack.count = 1;
        return;
    }
    if (stack.width != r.width || stack.height != r.height) {
        throw std::invalid_argument("residual dims do not match stack");
    }
    stack.count += 1;
    const double inv = 1.0 / static_cast<double>(stack.count);
    for (std::size_t i = 0; i < stack.mean.size(); ++i) {
        stack.mean[i] += (r.data[i] - stack.mean[i]) * inv;
    }
}

Spectrogram fft2_spectrum(const FloatGrid& grid) {
    if (grid.width < 2 || grid.height < 2) {
        throw std::invalid_argument("grid must be at least 2x2");
    }
    const auto spectrum = fft2(grid);
    const int h = grid.height;
    const int w = grid.width;
    Spectrogram spec;
    spec.width = w;
    spec.height = h;
    spec.magnitude.resize(spectrum.size());
    spec.phase.resize(spectrum.size());
    // fftshift: DC lands at (h/2, w/2).
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int cy = (y + h / 2) % h;
            const int cx = (x + w / 2) % w;
            const auto v = spectrum[std::size_t(y) * w + x];
            double ph = std::arg(v);
            if (ph <= -std::numbers::pi) ph = std::numbers::pi;
            spec.magnitude[std::size_t(cy) * w + cx] = std::abs(v);
            spec.phase[std::size_t(cy) * w + cx] = ph;
        }
    }
    return spec;
}

std::vector<std::uint8_t> render_pixels(const Spectrogram& spec) {
    double max_m = 0.0;
    for (double m : spec.magnitude) max_m = std::max(max_m, m);
    const double denom = max_m > 0.0 ? std::log1p(max_m) : 1.0;
    std::vector<std::uint8_t> px(spec.magnitude.size());
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double v = 255.0 * std::log1p(spec.magnitude[i]) / denom;
        px[i] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
    return px;
}

void render_spectrogram(const Spectrogram& spec, const std::string& path) {
    const std::vector<std::uint8_t> png =
        encode_png_gray(render_pixels(spec), spec.width, spec.height);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write(reinterpret_cast<const char*>(png.data()),
            static_cast<std::streamsize>(png.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace qcf
