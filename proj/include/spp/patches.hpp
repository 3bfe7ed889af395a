#ifndef SPP_PATCHES_HPP
#define SPP_PATCHES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spp/errors.hpp"
#include "spp/image.hpp"
#include "spp/numerics.hpp"
#include "spp/rng.hpp"

namespace spp {

struct PatchExtractionConfig {
    int r = 4;              // patch side length
    int s = 1;              // stride
    double epsilon_v = 1e-5; // guard added to the per-patch std
};

// Patches per image dimension for a d x d image.
inline int grid_size(int d, int r, int s) {
    if (r > d)
        throw PatchLargerThanImage("patch size " + std::to_string(r) +
                                   " exceeds image size " + std::to_string(d));
    return (d - r) / s + 1;
}

// Pre-processed patches of one image at one scale. Column j of `data` is the
// patch at grid position (a, b) with j = a * l + b; grid position (a, b)
// corresponds to the patch whose top-left pixel is (row a*s, col b*s).
struct PatchSet {
    int l = 0;         // grid side
    int q = 0;         // per-patch feature length
    int scale_tag = 0; // the r that produced it
    Matrix data;       // q x l^2, column-major patches

    int count() const { return l * l; }
};

// Dense overlapped extraction; returns raw row-major-flattened r^2 patches.
inline PatchSet extract_patches(const GrayImage& img, const PatchExtractionConfig& cfg) {
    if (img.width != img.height)
        throw ConfigInvalid("extract_patches: image must be square");
    const int d = img.width;
    const int l = grid_size(d, cfg.r, cfg.s);

    PatchSet ps;
    ps.l = l;
    ps.q = cfg.r * cfg.r;
    ps.scale_tag = cfg.r;
    ps.data.resize(ps.q, static_cast<Eigen::Index>(l) * l);
    for (int a = 0; a < l; ++a) {
        for (int b = 0; b < l; ++b) {
            Eigen::Index j = static_cast<Eigen::Index>(a) * l + b;
            int idx = 0;
            for (int dy = 0; dy < cfg.r; ++dy)
                for (int dx = 0; dx < cfg.r; ++dx)
                    ps.data(idx++, j) = img.at(a * cfg.s + dy, b * cfg.s + dx);
        }
    }
    return ps;
}

// (x - mean) / (population std + epsilon_v), elementwise.
inline Vector contrast_normalize(const Vector& x, double epsilon_v) {
    const double m = x.mean();
    const double var = (x.array() - m).square().sum() / static_cast<double>(x.size());
    const double v = std::sqrt(var);
    return (x.array() - m) / (v + epsilon_v);
}

// v -> [max(v,0); max(-v,0)]
inline Vector polarity_split(const Vector& v) {
    Vector out(2 * v.size());
    out.head(v.size()) = v.cwiseMax(0.0);
    out.tail(v.size()) = (-v).cwiseMax(0.0);
    return out;
}

struct PcaModel {
    int input_dim = 0;
    int p = 0;            // retained components
    Vector mean;          // input_dim
    Matrix basis;         // input_dim x p, orthonormal columns
    Vector eigenvalues;   // all input_dim, non-increasing
    bool whiten = false;
    double epsilon_w = 1e-8;
};

struct PcaTarget {
    int fixed_dim = 0;     // > 0: keep exactly min(fixed_dim, input_dim) components
    double energy = 0.0;   // used when fixed_dim == 0: smallest p reaching this fraction
};

// Covariance eigendecomposition PCA. Covariance is accumulated streaming in
// the patch dimension (<= r^2), so patch count is unbounded.
inline PcaModel fit_pca(const Matrix& patches, const PcaTarget& target,
                        bool whiten = false, double epsilon_w = 1e-8) {
    const Eigen::Index dim = patches.rows();
    const Eigen::Index n = patches.cols();
    if (n < 2)
        throw TooFewSamples("fit_pca: need at least 2 patches");

    Vector mu = patches.rowwise().mean();
    Matrix cov = Matrix::Zero(dim, dim);
    // rank-update in blocks keeps memory bounded for huge patch counts
    const Eigen::Index block = 8192;
    for (Eigen::Index j0 = 0; j0 < n; j0 += block) {
        Eigen::Index b = std::min(block, n - j0);
        Matrix centered = patches.middleCols(j0, b).colwise() - mu;
        cov.noalias() += centered * centered.transpose();
    }
    cov /= static_cast<double>(n);

    if (cov.cwiseAbs().maxCoeff() < 1e-14)
        throw DegenerateData("fit_pca: all patches identical");

    EigenDecomposition ed = sym_eig(cov);

    int p;
    if (target.fixed_dim > 0) {
        p = std::min<int>(target.fixed_dim, static_cast<int>(dim));
    } else {
        double total = std::max(ed.eigenvalues.sum(), 1e-300);
        double acc = 0.0;
        p = static_cast<int>(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            acc += ed.eigenvalues(i);
            if (acc / total >= target.energy) {
                p = static_cast<int>(i) + 1;
                break;
            }
        }
    }

    PcaModel model;
    model.input_dim = static_cast<int>(dim);
    model.p = p;
    model.mean = std::move(mu);
    model.basis = ed.eigenvectors.leftCols(p);
    model.eigenvalues = std::move(ed.eigenvalues);
    model.whiten = whiten;
    model.epsilon_w = epsilon_w;
    return model;
}

inline Vector project(const PcaModel& model, const Vector& x) {
    if (x.size() != model.input_dim)
        throw DimensionMismatch("project: expected dim " + std::to_string(model.input_dim) +
                                ", got " + std::to_string(x.size()));
    Vector y = model.basis.transpose() * (x - model.mean);
    if (model.whiten)
        for (int i = 0; i < model.p; ++i)
            y(i) /= std::sqrt(model.eigenvalues(i) + model.epsilon_w);
    return y;
}

struct PreprocessToggles {
    bool contrast_normalization = true;
    bool polarity_splitting = true;
};

// extract -> contrast normalize -> PCA project -> polarity split, per patch.
// A null PCA model keeps raw (normalized) patches.
inline PatchSet preprocess_image(const GrayImage& img, const PatchExtractionConfig& cfg,
                                 const PcaModel* pca,
                                 const PreprocessToggles& toggles = {}) {
    PatchSet raw = extract_patches(img, cfg);
    const int p = pca ? pca->p : raw.q;
    const int q = toggles.polarity_splitting ? 2 * p : p;

    PatchSet out;
    out.l = raw.l;
    out.q = q;
    out.scale_tag = raw.scale_tag;
    out.data.resize(q, raw.data.cols());
    for (Eigen::Index j = 0; j < raw.data.cols(); ++j) {
        Vector v = raw.data.col(j);
        if (toggles.contrast_normalization)
            v = contrast_normalize(v, cfg.epsilon_v);
        if (pca)
            v = project(*pca, v);
        if (toggles.polarity_splitting)
            v = polarity_split(v);
        out.data.col(j) = v;
    }
    return out;
}

// Uniformly subsample at most `max_count` columns (patches), seeded.
inline Matrix subsample_columns(const Matrix& m, std::size_t max_count, std::mt19937_64& rng) {
    const std::size_t n = static_cast<std::size_t>(m.cols());
    if (n <= max_count)
        return m;
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    shuffle(idx, rng);
    idx.resize(max_count);
    std::sort(idx.begin(), idx.end());
    Matrix out(m.rows(), static_cast<Eigen::Index>(max_count));
    for (std::size_t i = 0; i < max_count; ++i)
        out.col(static_cast<Eigen::Index>(i)) = m.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

} // namespace spp

#endif
