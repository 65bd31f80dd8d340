#include "qcf/pixels.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgcodecs.hpp>

namespace qcf {

namespace {

cv::Mat to_bgr_mat(const Image& img) {
    cv::Mat m(img.height, img.width, CV_8UC3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            cv::Vec3b& px = m.at<cv::Vec3b>(y, x);
            px[0] = img.at(x, y, 2);
            px[1] = img.at(x, y, 1);
            px[2] = img.at(x, y, 0);
        }
    }
    return m;
}

Image from_bgr_mat(const cv::Mat& m) {
    Image img(m.cols, m.rows);
    for (int y = 0; y < m.rows; ++y) {
        for (int x = 0; x < m.cols; ++x) {
            const cv::Vec3b& px = m.at<cv::Vec3b>(y, x);
            img.at(x, y, 0) = px[2];
            img.at(x, y, 1) = px[1];
            img.at(x, y, 2) = px[0];
        }
    }
    return img;
}

std::uint8_t round_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Image load_image(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
    if (m.empty()) throw std::runtime_error("cannot decode image: " + path);
    return from_bgr_mat(m);
}

void save_png(const Image& img, const std::string& path) {
    if (!cv::imwrite(path, to_bgr_mat(img))) {
        throw std::runtime_error("cannot write image: " + path);
    }
}

std::vector<std::uint8_t> encode_png_gray(const std::vector<std::uint8_t>& pixels,
                                          int width, int height) {
    if (pixels.size() != std::size_t(width) * height) {
        throw std::invalid_argument("pixel buffer size does not match dims");
    }
    cv::Mat m(height, width, CV_8UC1);
    std::copy(pixels.begin(), pixels.end(), m.data);
    std::vector<std::uint8_t> out;
    if (!cv::imencode(".png", m, out)) {
        throw std::runtime_error("png encode failed");
    }
    return out;
}

void AugmentConfig::validate() const {
    auto prob_ok = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob_ok(blur_prob) || !prob_ok(jpeg_prob)) {
        throw std::invalid_argument("augment probability outside [0,1]");
    }
    if (crop_scale_min > crop_scale_max || crop_scale_min <= 0.0 ||
        crop_scale_max > 1.0) {
        throw std::invalid_argument("bad crop scale range");
    }
    if (blur_sigma_min > blur_sigma_max || blur_sigma_min < 0.0) {
        throw std::invalid_argument("bad blur sigma range");
    }
    if (jpeg_quality_min > jpeg_quality_max || jpeg_quality_min < 1 ||
        jpeg_quality_max > 100) {
        throw std::invalid_argument("bad jpeg quality range");
    }
    if (out_size < 1) throw std::invalid_argument("bad out_size");
}

Image resize_bilinear(const Image& img, int w, int h) {
    if (w < 1 || h < 1) throw std::invalid_argument("bad resize dims");
    Image out(w, h);
    const double sx = static_cast<double>(img.width) / w;
    const double sy = static_cast<double>(img.height) / h;
    for (int y = 0; y < h; ++y) {
        double src_y = (y + 0.5) * sy - 0.5;
        src_y = std::clamp(src_y, 0.0, static_cast<double>(img.height - 1));
        const int y0 = static_cast<int>(src_y);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double fy = src_y - y0;
        for (int x = 0; x < w; ++x) {
            double src_x = (x + 0.5) * sx - 0.5;
            src_x = std::clamp(src_x, 0.0, static_cast<double>(img.width - 1));
            const int x0 = static_cast<int>(src_x);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double fx = src_x - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(x0, y0, c) * (1.0 - fx) +
                                   img.at(x1, y0, c) * fx;
                const double bot = img.at(x0, y1, c) * (1.0 - fx) +
                                   img.at(x1, y1, c) * fx;
                out.at(x, y, c) = round_u8(top * (1.0 - fy) + bot * fy);
            }
        }
    }
    return out;
}

std::vector<double> gaussian_kernel(double sigma) {
    if (sigma <= 0.0) return {1.0};
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& v : k) v /= sum;
    return k;
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    const std::vector<double> k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size()) / 2;

    // Horizontal pass in doubles, then vertical.
    std::vector<double> tmp(img.data.size());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int xi = std::clamp(x + i, 0, img.width - 1);
                    acc += k[i + radius] * img.at(xi, y, c);
                }
                tmp[(std::size_t(y) * img.width + x) * 3 + c] = acc;
            }
        }
    }
    Image out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i) {
                    const int yi = std::clamp(y + i, 0, img.height - 1);
                    acc += k[i + radius] *
                           tmp[(std::size_t(yi) * img.width + x) * 3 + c];
                }
                out.at(x, y, c) = round_u8(acc);
            }
        }
    }
    return out;
}

Image jpeg_cycle(const Image& img, int quality) {
    if (quality < 1 || quality > 100) {
        throw std::invalid_argument("jpeg quality outside 1..100");
    }
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".jpg", to_bgr_mat(img), buf,
                      {cv::IMWRITE_JPEG_QUALITY, quality})) {
        throw std::runtime_error("jpeg encode failed");
    }
    cv::Mat decoded = cv::imdecode(buf, cv::IMREAD_COLOR);
    if (decoded.empty()) throw std::runtime_error("jpeg decode failed");
    return from_bgr_mat(decoded);
}

Image augment(const Image& img, const AugmentConfig& cfg, Rng& rng) {
    cfg.validate();
    if (img.width < 8 || img.height < 8) {
        throw std::invalid_argument("augment input smaller than 8x8");
    }

    // All draws happen unconditionally so the stream position does not
    // depend on which branches fire.
    const double area = rng.uniform(cfg.crop_scale_min, cfg.crop_scale_max);
    const double u_cx = rng.uniform();
    const double u_cy = rng.uniform();
    const double u_blur = rng.uniform();
    const double sigma = rng.uniform(cfg.blur_sigma_min, cfg.blur_sigma_max);
    const double u_jpeg = rng.uniform();
    const int quality = cfg.jpeg_quality_min +
                        static_cast<int>(rng.below(std::uint64_t(
                            cfg.jpeg_quality_max - cfg.jpeg_quality_min + 1)));

    const double side = std::sqrt(area);
    const int cw = std::max(1, static_cast<int>(std::lround(img.width * side)));
    const int ch = std::max(1, static_cast<int>(std::lround(img.height * side)));
    const int x0 = static_cast<int>(u_cx * (img.width - cw + 1));
    const int y0 = static_cast<int>(u_cy * (img.height - ch + 1));

    Image cropped(cw, ch);
    for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) {
            for (int c = 0; c < 3; ++c) {
                cropped.at(x, y, c) = img.at(x0 + x, y0 + y, c);
            }
        }
    }

    Image out = (cropped.width == cfg.out_size && cropped.height == cfg.out_size)
                    ? cropped
                    : resize_bilinear(cropped, cfg.out_size, cfg.out_size);
    if (u_blur < cfg.blur_prob) out = gaussian_blur(out, sigma);
    if (u_jpeg < cfg.jpeg_prob) out = jpeg_cycle(out, quality);
    return out;
}

std::vector<float> extract_one(const Image& img, const FeatureExtractor& fx) {
    if (fx.kind == ExtractorKind::external) {
        throw std::runtime_error(
            "external extractor model not loadable: " + fx.model_path +
            " (supply precomputed QCFS features instead)");
    }
    if (fx.dim == 0) throw std::invalid_argument("extractor dim must be > 0");

    // Grayscale, replicated into RGB so the shared resizer applies.
    Image gray(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double g = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                             0.114 * img.at(x, y, 2);
            const std::uint8_t gv =
                static_cast<std::uint8_t>(std::clamp(std::lround(g), 0L, 255L));
            gray.at(x, y, 0) = gray.at(x, y, 1) = gray.at(x, y, 2) = gv;
        }
    }
    const Image small = resize_bilinear(gray, 32, 32);

    std::vector<double> input(1024);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 32; ++x) {
            input[y * 32 + x] = small.at(x, y, 0) / 255.0;
        }
    }

    // Projection rows are drawn in a fixed order from the seed; the scale
    // 1/sqrt(1024) keeps output magnitudes O(1).
    Rng rng(fx.projection_seed);
    const double scale = 1.0 / std::sqrt(1024.0);
    std::vector<double> projected(fx.dim, 0.0);
    for (std::uint32_t r = 0; r < fx.dim; ++r) {
        double acc = 0.0;
        for (int j = 0; j < 1024; ++j) {
            acc += rng.normal() * scale * input[j];
        }
        projected[r] = acc;
    }

    double norm_sq = 0.0;
    for (double v : projected) norm_sq += v * v;
    if (norm_sq == 0.0) {
        throw std::runtime_error("zero-norm feature (all-black input image)");
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    std::vector<float> out(fx.dim);
    for (std::uint32_t i = 0; i < fx.dim; ++i) {
        out[i] = static_cast<float>(projected[i] * inv_norm);
    }
    return out;
}

FeatureSet extract_features(const std::vector<Image>& imgs,
                            const FeatureExtractor& fx,
                            std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    FeatureSet set;
    set.dim = fx.dim;
    set.records.reserve(imgs.size());
    for (std::size_t start = 0; start < imgs.size(); start += batch_size) {
        const std::size_t end = std::min(start + batch_size, imgs.size());
        for (std::size_t i = start; i < end; ++i) {
            FeatureRecord r;
            r.id = "img_" + std::to_string(i);
            r.vector = extract_one(imgs[i], fx);
            set.records.push_back(std::move(r));
        }
    }
    return set;
}

}  // namespace qcf
