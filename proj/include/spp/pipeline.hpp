#ifndef SPP_PIPELINE_HPP
#define SPP_PIPELINE_HPP

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "spp/classifier.hpp"
#include "spp/errors.hpp"
#include "spp/image.hpp"
#include "spp/patches.hpp"
#include "spp/pooling.hpp"
#include "spp/rng.hpp"
#include "spp/serialize.hpp"

namespace spp {

// Deterministic static-chunk parallel map over [0, n); each index owns its
// output slot, so results are independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < std::min<std::size_t>(jobs, n); ++t)
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                fn(i);
        });
    for (auto& w : workers) w.join();
}

struct PipelineConfig {
    int image_side = 64;               // d
    std::vector<int> patch_sizes = {4, 6, 8};
    int stride = 1;
    PcaTarget pca;                     // fixed_dim==0 && energy==0 -> raw patches
    bool whiten = false;
    PoolingPyramid pyramid{{1, 2, 4, 6, 8, 10, 12, 15}};
    PoolMode pool_mode = PoolMode::max;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    bool contrast_normalization = true;
    bool polarity_splitting = true;
    bool standardization = true;
    double epsilon_v = 1e-5;
    double epsilon_s = 1e-8;
    double epsilon_w = 1e-8;
    std::size_t pca_subsample = 200000;

    bool use_pca() const { return pca.fixed_dim > 0 || pca.energy > 0.0; }

    void validate() const {
        if (image_side < 1)
            throw ConfigInvalid("image_side must be >= 1");
        if (patch_sizes.empty())
            throw ConfigInvalid("need at least one patch size");
        if (stride < 1)
            throw ConfigInvalid("stride must be >= 1");
        if (lambda <= 0.0)
            throw ConfigInvalid("lambda must be positive");
        pyramid.validate();
        for (int r : patch_sizes) {
            if (r < 1 || r > image_side)
                throw ConfigInvalid("patch size " + std::to_string(r) +
                                    " invalid for image side " + std::to_string(image_side));
            int l = grid_size(image_side, r, stride);
            if (pyramid.levels.back() > l)
                throw PyramidTooDeep("pyramid level c_L=" + std::to_string(pyramid.levels.back()) +
                                     " exceeds patch grid l=" + std::to_string(l) +
                                     " at r=" + std::to_string(r));
        }
    }
};

// Paper-style defaults; small images get the single 4x4 scale.
inline PipelineConfig default_config(int d) {
    PipelineConfig cfg;
    cfg.image_side = d;
    cfg.patch_sizes = d <= 32 ? std::vector<int>{4} : std::vector<int>{4, 6, 8};
    cfg.pca.fixed_dim = 10;
    return cfg;
}

struct PipelineModel {
    PipelineConfig config;
    std::vector<PcaModel> pca_per_scale; // parallel to config.patch_sizes; empty if raw
    std::optional<Standardizer> standardizer;
    RidgeClassifier classifier;
    int feature_dim = 0; // D

    const std::vector<std::string>& classes() const { return classifier.classes; }
};

namespace detail {

inline Vector featurize_raw(const PipelineConfig& cfg,
                            const std::vector<PcaModel>& pca_per_scale,
                            const GrayImage& img) {
    if (img.width != cfg.image_side || img.height != cfg.image_side)
        throw DimensionMismatch("featurize: image is not " + std::to_string(cfg.image_side) +
                                "x" + std::to_string(cfg.image_side));
    PreprocessToggles toggles{cfg.contrast_normalization, cfg.polarity_splitting};
    std::vector<std::pair<int, Vector>> pooled;
    pooled.reserve(cfg.patch_sizes.size());
    for (std::size_t i = 0; i < cfg.patch_sizes.size(); ++i) {
        PatchExtractionConfig pc{cfg.patch_sizes[i], cfg.stride, cfg.epsilon_v};
        const PcaModel* pca = pca_per_scale.empty() ? nullptr : &pca_per_scale[i];
        PatchSet ps = preprocess_image(img, pc, pca, toggles);
        pooled.emplace_back(cfg.patch_sizes[i], pool(ps, cfg.pyramid, cfg.pool_mode));
    }
    return concat_scales(std::move(pooled));
}

// Contrast-normalized raw patches of the training set at one scale,
// subsampled to at most cfg.pca_subsample columns (seeded stream).
inline Matrix gather_training_patches(const PipelineConfig& cfg, int r,
                                      const std::vector<GrayImage>& images) {
    PatchExtractionConfig pc{r, cfg.stride, cfg.epsilon_v};
    const int l = grid_size(cfg.image_side, r, cfg.stride);
    const std::size_t per_image = static_cast<std::size_t>(l) * l;
    const std::size_t total = per_image * images.size();

    std::vector<std::size_t> selected;
    if (total > cfg.pca_subsample) {
        std::vector<std::size_t> all(total);
        for (std::size_t i = 0; i < total; ++i) all[i] = i;
        auto rng = stream_rng(cfg.seed, "pca.subsample.r" + std::to_string(r));
        shuffle(all, rng);
        all.resize(cfg.pca_subsample);
        std::sort(all.begin(), all.end());
        selected = std::move(all);
    }

    const std::size_t kept = selected.empty() ? total : selected.size();
    Matrix out(r * r, static_cast<Eigen::Index>(kept));
    std::size_t sel_pos = 0;
    Eigen::Index out_col = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (!selected.empty()) {
            // skip images contributing no selected patch
            std::size_t lo = i * per_image, hi = lo + per_image;
            if (sel_pos >= selected.size() || selected[sel_pos] >= hi)
                continue;
            PatchSet ps = extract_patches(images[i], pc);
            while (sel_pos < selected.size() && selected[sel_pos] < hi) {
                Eigen::Index j = static_cast<Eigen::Index>(selected[sel_pos] - lo);
                Vector v = ps.data.col(j);
                out.col(out_col++) = cfg.contrast_normalization
                                         ? contrast_normalize(v, cfg.epsilon_v)
                                         : v;
                ++sel_pos;
            }
        } else {
            PatchSet ps = extract_patches(images[i], pc);
            for (Eigen::Index j = 0; j < ps.data.cols(); ++j) {
                Vector v = ps.data.col(j);
                out.col(out_col++) = cfg.contrast_normalization
                                         ? contrast_normalize(v, cfg.epsilon_v)
                                         : v;
            }
        }
    }
    return out;
}

} // namespace detail

// Fit the full pipeline on labeled training images. labels[i] indexes into
// class_names. PCA, standardizer, and classifier see training data only.
inline PipelineModel fit(const PipelineConfig& config,
                         const std::vector<GrayImage>& images,
                         const std::vector<int>& labels,
                         std::vector<std::string> class_names,
                         unsigned jobs = 1) {
    config.validate();
    if (images.size() != labels.size())
        throw ConfigInvalid("fit: image and label counts differ");
    if (class_names.size() < 2)
        throw ConfigInvalid("fit: need at least 2 classes");
    {
        std::vector<int> counts(class_names.size(), 0);
        for (int lab : labels) {
            if (lab < 0 || lab >= static_cast<int>(class_names.size()))
                throw ConfigInvalid("fit: label out of range");
            ++counts[static_cast<std::size_t>(lab)];
        }
        for (std::size_t k = 0; k < counts.size(); ++k)
            if (counts[k] == 0)
                throw ConfigInvalid("fit: class '" + class_names[k] + "' has no images");
    }
    for (const auto& img : images)
        if (img.width != config.image_side || img.height != config.image_side)
            throw DimensionMismatch("fit: all images must be resized to the configured side");

    PipelineModel model;
    model.config = config;

    if (config.use_pca()) {
        model.pca_per_scale.reserve(config.patch_sizes.size());
        for (int r : config.patch_sizes) {
            Matrix patches = detail::gather_training_patches(config, r, images);
            model.pca_per_scale.push_back(
                fit_pca(patches, config.pca, config.whiten, config.epsilon_w));
        }
    }

    // featurize training images (pre-standardization)
    const std::size_t n = images.size();
    Vector probe = detail::featurize_raw(config, model.pca_per_scale, images[0]);
    const Eigen::Index D = probe.size();
    Matrix X(static_cast<Eigen::Index>(n), D);
    X.row(0) = probe.transpose();
    parallel_for(n - 1, jobs, [&](std::size_t i) {
        X.row(static_cast<Eigen::Index>(i + 1)) =
            detail::featurize_raw(config, model.pca_per_scale, images[i + 1]).transpose();
    });

    if (config.standardization) {
        model.standardizer = standardize_fit(X, config.epsilon_s);
        X = (X.rowwise() - model.standardizer->mean.transpose()).array().rowwise() /
            (model.standardizer->std.array() + config.epsilon_s).transpose();
    }

    Matrix Xb(X.rows(), X.cols() + 1);
    Xb.leftCols(X.cols()) = X;
    Xb.col(X.cols()).setOnes();
    Matrix Y = Matrix::Zero(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(class_names.size()));
    for (std::size_t i = 0; i < n; ++i)
        Y(static_cast<Eigen::Index>(i), labels[i]) = 1.0;

    model.classifier = ridge_fit(Xb, Y, config.lambda, std::move(class_names));
    model.feature_dim = static_cast<int>(D);
    return model;
}

inline Vector featurize(const PipelineModel& model, const GrayImage& img) {
    Vector f = detail::featurize_raw(model.config, model.pca_per_scale, img);
    if (model.standardizer)
        f = standardize_apply(*model.standardizer, f);
    return f;
}

inline Prediction predict_image(const PipelineModel& model, const GrayImage& img) {
    return predict(model.classifier, featurize(model, img));
}

inline std::string predicted_label(const PipelineModel& model, const GrayImage& img) {
    return model.classes()[static_cast<std::size_t>(predict_image(model, img).label_index)];
}

// ---- model persistence -------------------------------------------------

namespace detail {

inline constexpr char kModelMagic[8] = {'S', 'P', 'P', 'M', 'O', 'D', 'L', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

inline void write_config(ByteWriter& w, const PipelineConfig& c) {
    w.write_i64(c.image_side);
    w.write_u64(c.patch_sizes.size());
    for (int r : c.patch_sizes) w.write_i64(r);
    w.write_i64(c.stride);
    w.write_i64(c.pca.fixed_dim);
    w.write_f64(c.pca.energy);
    w.write_u8(c.whiten ? 1 : 0);
    w.write_u64(c.pyramid.levels.size());
    for (int lv : c.pyramid.levels) w.write_i64(lv);
    w.write_u8(c.pool_mode == PoolMode::max ? 0 : 1);
    w.write_f64(c.lambda);
    w.write_u64(c.seed);
    w.write_u8(c.contrast_normalization ? 1 : 0);
    w.write_u8(c.polarity_splitting ? 1 : 0);
    w.write_u8(c.standardization ? 1 : 0);
    w.write_f64(c.epsilon_v);
    w.write_f64(c.epsilon_s);
    w.write_f64(c.epsilon_w);
    w.write_u64(c.pca_subsample);
}

inline PipelineConfig read_config(ByteReader& r) {
    PipelineConfig c;
    c.image_side = static_cast<int>(r.read_i64());
    c.patch_sizes.resize(r.read_u64());
    for (auto& v : c.patch_sizes) v = static_cast<int>(r.read_i64());
    c.stride = static_cast<int>(r.read_i64());
    c.pca.fixed_dim = static_cast<int>(r.read_i64());
    c.pca.energy = r.read_f64();
    c.whiten = r.read_u8() != 0;
    c.pyramid.levels.resize(r.read_u64());
    for (auto& v : c.pyramid.levels) v = static_cast<int>(r.read_i64());
    c.pool_mode = r.read_u8() == 0 ? PoolMode::max : PoolMode::average;
    c.lambda = r.read_f64();
    c.seed = r.read_u64();
    c.contrast_normalization = r.read_u8() != 0;
    c.polarity_splitting = r.read_u8() != 0;
    c.standardization = r.read_u8() != 0;
    c.epsilon_v = r.read_f64();
    c.epsilon_s = r.read_f64();
    c.epsilon_w = r.read_f64();
    c.pca_subsample = r.read_u64();
    return c;
}

inline void write_pca(ByteWriter& w, const PcaModel& m) {
    w.write_i64(m.input_dim);
    w.write_i64(m.p);
    w.write_vector(m.mean);
    w.write_matrix(m.basis);
    w.write_vector(m.eigenvalues);
    w.write_u8(m.whiten ? 1 : 0);
    w.write_f64(m.epsilon_w);
}

inline PcaModel read_pca(ByteReader& r) {
    PcaModel m;
    m.input_dim = static_cast<int>(r.read_i64());
    m.p = static_cast<int>(r.read_i64());
    m.mean = r.read_vector();
    m.basis = r.read_matrix();
    m.eigenvalues = r.read_vector();
    m.whiten = r.read_u8() != 0;
    m.epsilon_w = r.read_f64();
    return m;
}

} // namespace detail

inline std::vector<std::uint8_t> serialize_model(const PipelineModel& model) {
    ByteWriter w;
    w.write_raw(detail::kModelMagic, sizeof(detail::kModelMagic));
    w.write_u32(detail::kModelVersion);
    detail::write_config(w, model.config);

    w.write_u64(model.pca_per_scale.size());
    for (const auto& pca : model.pca_per_scale)
        detail::write_pca(w, pca);

    w.write_u8(model.standardizer ? 1 : 0);
    if (model.standardizer) {
        w.write_vector(model.standardizer->mean);
        w.write_vector(model.standardizer->std);
        w.write_f64(model.standardizer->epsilon_s);
    }

    w.write_matrix(model.classifier.W);
    w.write_u64(model.classifier.classes.size());
    for (const auto& c : model.classifier.classes)
        w.write_string(c);
    w.write_f64(model.classifier.lambda);
    w.write_i64(model.feature_dim);

    std::uint32_t crc = crc32(w.bytes.data(), w.bytes.size());
    w.write_u32(crc);
    return std::move(w.bytes);
}

inline PipelineModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < sizeof(detail::kModelMagic) + sizeof(std::uint32_t) * 2)
        throw CorruptModel("model file too short");
    std::uint32_t stored;
    std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
    if (crc32(bytes.data(), bytes.size() - 4) != stored)
        throw CorruptModel("model file checksum mismatch");

    ByteReader r(bytes.data(), bytes.size() - 4);
    char magic[sizeof(detail::kModelMagic)];
    r.read_raw(magic, sizeof(magic));
    if (std::memcmp(magic, detail::kModelMagic, sizeof(magic)) != 0)
        throw CorruptModel("bad model file magic");
    std::uint32_t version = r.read_u32();
    if (version != detail::kModelVersion)
        throw CorruptModel("unsupported model version " + std::to_string(version) +
                           " (expected " + std::to_string(detail::kModelVersion) + ")");

    PipelineModel model;
    model.config = detail::read_config(r);
    model.pca_per_scale.resize(r.read_u64());
    for (auto& pca : model.pca_per_scale)
        pca = detail::read_pca(r);
    if (r.read_u8() != 0) {
        Standardizer st;
        st.mean = r.read_vector();
        st.std = r.read_vector();
        st.epsilon_s = r.read_f64();
        model.standardizer = std::move(st);
    }
    model.classifier.W = r.read_matrix();
    model.classifier.classes.resize(r.read_u64());
    for (auto& c : model.classifier.classes)
        c = r.read_string();
    model.classifier.lambda = r.read_f64();
    model.feature_dim = static_cast<int>(r.read_i64());
    return model;
}

inline void save_model(const PipelineModel& model, const std::filesystem::path& path) {
    auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw IoError("failed to write " + path.string());
}

inline PipelineModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open model file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

} // namespace spp

#endif
