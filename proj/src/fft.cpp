#include "qcf/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qcf {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative Cooley-Tukey, n a power of two. sign -1 forward, +1 inverse
// (unscaled).
void fft_pow2(std::vector<cd>& v, int sign) {
    const std::size_t n = v.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(v[i], v[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const cd wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cd w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cd u = v[i + k];
                const cd t = v[i + k + len / 2] * w;
                v[i + k] = u + t;
                v[i + k + len / 2] = u - t;
                w *= wlen;
            }
        }
    }
}

// Bluestein: length-n DFT as a convolution, carried by a power-of-two FFT.
void fft_bluestein(std::vector<cd>& v, int sign) {
    const std::size_t n = v.size();
    std::size_t m = 1;
    while (m < 2 * n + 1) m <<= 1;

    // Chirp factors; the k^2 exponent is reduced mod 2n to keep the angle
    // argument small for large n.
    std::vector<cd> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t k2 = (k * k) % (2 * n);
        const double ang = sign * std::numbers::pi * static_cast<double>(k2) /
                           static_cast<double>(n);
        chirp[k] = cd(std::cos(ang), std::sin(ang));
    }

    std::vector<cd> a(m, cd(0.0, 0.0));
    std::vector<cd> b(m, cd(0.0, 0.0));
    for (std::size_t k = 0; k < n; ++k) a[k] = v[k] * chirp[k];
    b[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) {
        b[k] = b[m - k] = std::conj(chirp[k]);
    }

    fft_pow2(a, -1);
    fft_pow2(b, -1);
    for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
    fft_pow2(a, +1);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) {
        v[k] = a[k] * inv_m * chirp[k];
    }
}

void dft(std::vector<cd>& v, int sign) {
    if (v.size() <= 1) return;
    if (is_pow2(v.size())) {
        fft_pow2(v, sign);
    } else {
        fft_bluestein(v, sign);
    }
}

}  // namespace

void fft(std::vector<cd>& v) { dft(v, -1); }

void ifft(std::vector<cd>& v) {
    dft(v, +1);
    const double inv = 1.0 / static_cast<double>(v.size());
    for (cd& x : v) x *= inv;
}

std::vector<cd> fft2(const FloatGrid& grid) {
    const int h = grid.height;
    const int w = grid.width;
    if (h < 1 || w < 1) throw std::invalid_argument("empty grid");

    std::vector<cd> out(static_cast<std::size_t>(h) * w);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = cd(grid.data[i], 0.0);

    std::vector<cd> row(w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) row[x] = out[std::size_t(y) * w + x];
        fft(row);
        for (int x = 0; x < w; ++x) out[std::size_t(y) * w + x] = row[x];
    }
    std::vector<cd> col(h);
    for (int x = 0; x < w; ++x) {
        for (int y = 0; y < h; ++y) col[y] = out[std::size_t(y) * w + x];
        fft(col);
        for (int y = 0; y < h; ++y) out[std::size_t(y) * w + x] = col[y];
    }
    return out;
}

}  // namespace qcf
