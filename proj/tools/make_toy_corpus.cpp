// Regenerates the bundled toy corpus under data/toy/: 30 "real" photos
// (smooth gradients plus sensor-like noise) and 30 "fake" renders (the same
// base plus a periodic artifact whose amplitude grows with the index, so
// quality scores have something to rank). Deterministic; safe to re-run.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include "qcf/feature_store.hpp"
#include "qcf/image.hpp"
#include "qcf/rng.hpp"

namespace {

qcf::Image base_image(int size, std::uint64_t seed) {
    qcf::Rng rng(seed);
    const double cx = 8.0 + 48.0 * rng.uniform();
    const double cy = 8.0 + 48.0 * rng.uniform();
    const double tint[3] = {0.7 + 0.3 * rng.uniform(),
                            0.7 + 0.3 * rng.uniform(),
                            0.7 + 0.3 * rng.uniform()};
    qcf::Image img(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = x - cx, dy = y - cy;
            const double r = std::sqrt(dx * dx + dy * dy) / size;
            const double base = 60.0 + 160.0 * std::exp(-2.0 * r * r);
            for (int c = 0; c < 3; ++c) {
                const double v = base * tint[c] + 4.0 * rng.normal();
                img.at(x, y, c) =
                    static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
    return img;
}

void add_artifact(qcf::Image& img, double amplitude) {
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const double wave = amplitude * (((x / 4 + y / 4) % 2 == 0) ? 1.0 : -1.0);
            for (int c = 0; c < 3; ++c) {
                const double v = img.at(x, y, c) + wave;
                img.at(x, y, c) =
                    static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
            }
        }
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::string root = argc > 1 ? argv[1] : "data/toy";
    std::filesystem::create_directories(root + "/images");

    qcf::DatasetManifest reals;
    reals.name = "toy-reals";
    reals.concept_tag = "toy";
    reals.source = "camera";
    reals.image_root = "images";

    qcf::DatasetManifest fakes;
    fakes.name = "toy-fakes";
    fakes.concept_tag = "toy";
    fakes.source = "generator";
    fakes.image_root = "images";

    for (int i = 0; i < 30; ++i) {
        const qcf::Image img = base_image(64, 1000 + i);
        const std::string name = "real_" + std::to_string(i) + ".png";
        qcf::save_png(img, root + "/images/" + name);
        reals.entries.push_back({name, qcf::Label::real});
    }
    for (int i = 0; i < 30; ++i) {
        qcf::Image img = base_image(64, 2000 + i);
        // Amplitude spans subtle to blatant so curation has a ranking to find.
        add_artifact(img, 2.0 + 2.0 * i);
        const std::string name = "fake_" + std::to_string(i) + ".png";
        qcf::save_png(img, root + "/images/" + name);
        fakes.entries.push_back({name, qcf::Label::fake});
    }

    qcf::write_manifest(reals, root + "/reals.json");
    qcf::write_manifest(fakes, root + "/fakes.json");
    std::cout << "wrote 60 images and two manifests under " << root << "\n";
    return 0;
}
