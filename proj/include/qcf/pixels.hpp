#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qcf/feature_store.hpp"
#include "qcf/image.hpp"
#include "qcf/rng.hpp"

namespace qcf {

// Training-time augmentation pipeline: random area-scaled crop, resize to
// out_size, optional Gaussian blur, optional JPEG compression cycle.
struct AugmentConfig {
    int out_size = 224;
    double crop_scale_min = 0.64;  // fraction of source area
    double crop_scale_max = 1.0;
    double blur_prob = 0.5;
    double blur_sigma_min = 0.0;
    double blur_sigma_max = 3.0;
    double jpeg_prob = 0.5;
    int jpeg_quality_min = 30;
    int jpeg_quality_max = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class ExtractorKind { toy, external };

struct FeatureExtractor {
    ExtractorKind kind = ExtractorKind::toy;
    std::uint32_t dim = 64;
    std::uint64_t projection_seed = 0;  // toy
    std::string model_path;             // external
};

Image resize_bilinear(const Image& img, int w, int h);

// Separable Gaussian blur, kernel truncated at radius ceil(3*sigma),
// edge replication. sigma <= 0 is the identity.
Image gaussian_blur(const Image& img, double sigma);
std::vector<double> gaussian_kernel(double sigma);

// Baseline JPEG encode at the given quality, then decode.
Image jpeg_cycle(const Image& img, int quality);

Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng);

// One vector per image, input order preserved. The toy extractor is
// grayscale -> 32x32 -> [0,1] -> seeded random projection (scaled by
// 1/sqrt(1024)) -> L2 normalize. A zero-norm projection input (all-black
// image) is an error, not a NaN.
FeatureSet extract_features(const std::vector<Image>& imgs,
                            const FeatureExtractor& fx,
                            std::size_t batch_size = 50);

std::vector<float> extract_one(const Image& img, const FeatureExtractor& fx);

}  // namespace qcf
