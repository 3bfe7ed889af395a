#ifndef SPP_SYNTH_HPP
#define SPP_SYNTH_HPP

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "spp/image.hpp"
#include "spp/rng.hpp"

namespace spp {

// Desk-scale stand-in for restricted face datasets: class templates are
// seeded smooth random fields; each sample gets a small translation, global
// brightness/contrast jitter, and additive pixel noise.
struct SynthConfig {
    int n_classes = 10;
    int n_per_class = 7;
    int image_side = 32;
    double noise = 0.05;     // additive gaussian sigma on [0,1] pixels
    double jitter = 0.15;    // brightness shift bound; contrast scale in [1-2j, 1+2j]
    int max_shift = 2;       // translation bound in pixels
    double class_sep = 1.0;  // 1: fully distinct templates; <1: blend toward a shared base
    std::uint64_t seed = 0;
};

struct SynthDataset {
    std::vector<std::string> classes;
    std::vector<std::vector<GrayImage>> images; // per class
};

namespace detail {

inline double gaussian(std::mt19937_64& g) {
    // Box-Muller on the portable uniform; one draw per call keeps it simple
    double u1 = std::max(uniform01(g), 1e-12);
    double u2 = uniform01(g);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Smooth field: coarse random grid bilinearly upsampled, squashed to
// mid-range so jitter has headroom before clamping.
inline GrayImage smooth_field(int d, std::mt19937_64& g) {
    int coarse = std::max(3, d / 3); // texture at roughly patch scale
    GrayImage low = make_image(coarse, coarse);
    for (auto& p : low.pixels) p = uniform01(g);
    GrayImage field = resize(low, d);
    double lo = *std::min_element(field.pixels.begin(), field.pixels.end());
    double hi = *std::max_element(field.pixels.begin(), field.pixels.end());
    double span = std::max(hi - lo, 1e-9);
    for (auto& p : field.pixels)
        p = 0.2 + 0.6 * (p - lo) / span;
    return field;
}

inline double sample_clamped(const GrayImage& img, int y, int x) {
    y = std::clamp(y, 0, img.height - 1);
    x = std::clamp(x, 0, img.width - 1);
    return img.at(y, x);
}

} // namespace detail

inline SynthDataset generate_synthetic(const SynthConfig& cfg) {
    if (cfg.n_classes < 1 || cfg.n_per_class < 1 || cfg.image_side < 1)
        throw ConfigInvalid("synth: counts and image side must be positive");

    SynthDataset ds;
    auto brng = stream_rng(cfg.seed, "synth.base");
    GrayImage base = detail::smooth_field(cfg.image_side, brng);
    for (int k = 0; k < cfg.n_classes; ++k) {
        auto trng = stream_rng(cfg.seed, "synth.template." + std::to_string(k));
        GrayImage tmpl = detail::smooth_field(cfg.image_side, trng);
        if (cfg.class_sep < 1.0)
            for (std::size_t i = 0; i < tmpl.pixels.size(); ++i)
                tmpl.pixels[i] =
                    base.pixels[i] + cfg.class_sep * (tmpl.pixels[i] - base.pixels[i]);

        std::vector<GrayImage> samples;
        for (int i = 0; i < cfg.n_per_class; ++i) {
            auto irng = stream_rng(cfg.seed, "synth.image." + std::to_string(k) + "." +
                                                 std::to_string(i));
            int ty = cfg.max_shift > 0
                         ? static_cast<int>(irng() % (2 * cfg.max_shift + 1)) - cfg.max_shift
                         : 0;
            int tx = cfg.max_shift > 0
                         ? static_cast<int>(irng() % (2 * cfg.max_shift + 1)) - cfg.max_shift
                         : 0;
            double contrast = 1.0 + uniform(irng, -2.0 * cfg.jitter, 2.0 * cfg.jitter);
            double brightness = uniform(irng, -cfg.jitter, cfg.jitter);

            GrayImage img = make_image(cfg.image_side, cfg.image_side);
            for (int y = 0; y < cfg.image_side; ++y) {
                for (int x = 0; x < cfg.image_side; ++x) {
                    double v = detail::sample_clamped(tmpl, y + ty, x + tx);
                    v = contrast * (v - 0.5) + 0.5 + brightness;
                    if (cfg.noise > 0.0)
                        v += cfg.noise * detail::gaussian(irng);
                    img.at(y, x) = std::clamp(v, 0.0, 1.0);
                }
            }
            samples.push_back(std::move(img));
        }
        char name[16];
        std::snprintf(name, sizeof(name), "class%03d", k);
        ds.classes.emplace_back(name);
        ds.images.push_back(std::move(samples));
    }
    return ds;
}

// Write the dataset in the directory-per-class PNG layout.
inline void write_synthetic(const SynthDataset& ds, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
        throw IoError("cannot create " + out_dir.string());
    for (std::size_t k = 0; k < ds.classes.size(); ++k) {
        fs::path dir = out_dir / ds.classes[k];
        fs::create_directories(dir, ec);
        if (ec)
            throw IoError("cannot create " + dir.string());
        for (std::size_t i = 0; i < ds.images[k].size(); ++i) {
            char name[16];
            std::snprintf(name, sizeof(name), "img%03zu.png", i);
            save_gray(ds.images[k][i], dir / name);
        }
    }
}

} // namespace spp

#endif
