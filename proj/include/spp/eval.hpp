#ifndef SPP_EVAL_HPP
#define SPP_EVAL_HPP

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "spp/image.hpp"
#include "spp/pipeline.hpp"
#include "spp/synth.hpp"

namespace spp {

// Whole dataset decoded, resized, grouped per class.
struct LoadedDataset {
    std::vector<std::string> classes;
    std::vector<std::vector<GrayImage>> images; // per class
    int skipped_files = 0;
    int skipped_classes = 0;

    std::size_t total_images() const {
        std::size_t n = 0;
        for (const auto& v : images) n += v.size();
        return n;
    }
};

inline LoadedDataset load_dataset(const std::filesystem::path& root, int image_side,
                                  unsigned jobs = 1) {
    DatasetIndex idx = scan_dataset(root);
    LoadedDataset ds;
    ds.classes = idx.classes;
    ds.skipped_files = idx.skipped_files;
    ds.skipped_classes = idx.skipped_classes;
    ds.images.resize(idx.classes.size());

    std::vector<std::pair<std::size_t, std::size_t>> flat; // (class, index)
    for (std::size_t k = 0; k < idx.samples.size(); ++k) {
        ds.images[k].resize(idx.samples[k].size());
        for (std::size_t i = 0; i < idx.samples[k].size(); ++i)
            flat.emplace_back(k, i);
    }
    parallel_for(flat.size(), jobs, [&](std::size_t f) {
        auto [k, i] = flat[f];
        ds.images[k][i] = resize(load_gray(idx.samples[k][i]), image_side);
    });
    return ds;
}

inline LoadedDataset to_loaded(const SynthDataset& sd) {
    LoadedDataset ds;
    ds.classes = sd.classes;
    ds.images = sd.images;
    return ds;
}

struct TrialSpec {
    int n_train = 5;
    int n_test = 2;
    int n_trials = 10;
    std::uint64_t base_seed = 0;
};

struct TrialReport {
    std::vector<double> accuracies; // per trial, in [0,1]
    double mean = 0.0;
    double stddev = 0.0; // population
    std::string config_echo;
    double fit_seconds = 0.0;  // summed over trials
    double eval_seconds = 0.0; // summed over trials
    int excluded_classes = 0;

    void finalize() {
        mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
               static_cast<double>(accuracies.size());
        double ss = 0.0;
        for (double a : accuracies) ss += (a - mean) * (a - mean);
        stddev = std::sqrt(ss / static_cast<double>(accuracies.size()));
    }
};

struct Split {
    // per retained class: sample indices
    std::vector<std::vector<int>> train;
    std::vector<std::vector<int>> test;
};

// Deterministic per-trial split: shuffle each retained class's indices with
// the trial's named stream, take the first n_train for training and the next
// n_test for testing.
inline Split make_split(const std::vector<std::size_t>& class_sizes, const TrialSpec& spec,
                        int trial) {
    Split sp;
    sp.train.resize(class_sizes.size());
    sp.test.resize(class_sizes.size());
    const std::uint64_t trial_seed = spec.base_seed + static_cast<std::uint64_t>(trial);
    for (std::size_t k = 0; k < class_sizes.size(); ++k) {
        std::vector<int> idx(class_sizes[k]);
        std::iota(idx.begin(), idx.end(), 0);
        auto rng = stream_rng(trial_seed, "split.class" + std::to_string(k));
        shuffle(idx, rng);
        sp.train[k].assign(idx.begin(), idx.begin() + spec.n_train);
        sp.test[k].assign(idx.begin() + spec.n_train, idx.begin() + spec.n_train + spec.n_test);
    }
    return sp;
}

// Retained classes have at least n_train + n_test samples; the rest are
// dropped with a count. Throws if nothing survives.
inline LoadedDataset retain_classes(const LoadedDataset& ds, const TrialSpec& spec,
                                    int* excluded) {
    LoadedDataset out;
    out.skipped_files = ds.skipped_files;
    out.skipped_classes = ds.skipped_classes;
    int dropped = 0;
    for (std::size_t k = 0; k < ds.classes.size(); ++k) {
        if (ds.images[k].size() >= static_cast<std::size_t>(spec.n_train + spec.n_test)) {
            out.classes.push_back(ds.classes[k]);
            out.images.push_back(ds.images[k]);
        } else {
            ++dropped;
        }
    }
    if (excluded)
        *excluded = dropped;
    if (out.classes.size() < 2)
        throw InsufficientSamples("fewer than 2 classes have n_train + n_test = " +
                                  std::to_string(spec.n_train + spec.n_test) + " samples");
    return out;
}

// Repeated random-split evaluation (Algorithm-level protocol: fit on the
// train split, micro-averaged accuracy on the test split, per trial).
inline TrialReport evaluate_trials(const LoadedDataset& full, const PipelineConfig& base_cfg,
                                   const TrialSpec& spec, unsigned jobs = 1) {
    if (spec.n_train < 1 || spec.n_test < 1 || spec.n_trials < 1)
        throw ConfigInvalid("trial spec: counts must be positive");

    TrialReport report;
    LoadedDataset ds = retain_classes(full, spec, &report.excluded_classes);

    std::vector<std::size_t> class_sizes;
    for (const auto& v : ds.images) class_sizes.push_back(v.size());

    report.accuracies.resize(static_cast<std::size_t>(spec.n_trials));
    std::vector<double> fit_s(report.accuracies.size()), eval_s(report.accuracies.size());

    parallel_for(report.accuracies.size(), jobs, [&](std::size_t t) {
        Split sp = make_split(class_sizes, spec, static_cast<int>(t));

        std::vector<GrayImage> train_imgs;
        std::vector<int> train_labels;
        for (std::size_t k = 0; k < ds.classes.size(); ++k)
            for (int i : sp.train[k]) {
                train_imgs.push_back(ds.images[k][static_cast<std::size_t>(i)]);
                train_labels.push_back(static_cast<int>(k));
            }

        PipelineConfig cfg = base_cfg;
        cfg.seed = stream_seed(spec.base_seed + t, "pipeline");

        auto t0 = std::chrono::steady_clock::now();
        PipelineModel model = fit(cfg, train_imgs, train_labels, ds.classes);
        auto t1 = std::chrono::steady_clock::now();

        int correct = 0, total = 0;
        for (std::size_t k = 0; k < ds.classes.size(); ++k)
            for (int i : sp.test[k]) {
                Prediction pr = predict_image(model, ds.images[k][static_cast<std::size_t>(i)]);
                correct += (pr.label_index == static_cast<int>(k)) ? 1 : 0;
                ++total;
            }
        auto t2 = std::chrono::steady_clock::now();

        report.accuracies[t] = static_cast<double>(correct) / static_cast<double>(total);
        fit_s[t] = std::chrono::duration<double>(t1 - t0).count();
        eval_s[t] = std::chrono::duration<double>(t2 - t1).count();
    });

    report.fit_seconds = std::accumulate(fit_s.begin(), fit_s.end(), 0.0);
    report.eval_seconds = std::accumulate(eval_s.begin(), eval_s.end(), 0.0);
    report.finalize();
    return report;
}

// ---- ablation sweeps -----------------------------------------------------

enum class SweepKind { pyramid_depth, patch_sizes, stride, pca_dim, preprocessing };

struct SweepRow {
    std::string label;
    bool skipped = false;
    std::string note;
    TrialReport report;
};

inline std::string format_int_list(const std::vector<int>& v) {
    std::string s = "{";
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    return s + "}";
}

inline std::vector<SweepRow> run_sweep(const LoadedDataset& ds, const PipelineConfig& base,
                                       const TrialSpec& spec, SweepKind kind,
                                       unsigned jobs = 1) {
    struct Point {
        std::string label;
        PipelineConfig cfg;
    };
    std::vector<Point> points;

    switch (kind) {
        case SweepKind::pyramid_depth: {
            for (std::size_t depth = 1; depth <= base.pyramid.levels.size(); ++depth) {
                PipelineConfig c = base;
                c.pyramid.levels.assign(base.pyramid.levels.begin(),
                                        base.pyramid.levels.begin() +
                                            static_cast<std::ptrdiff_t>(depth));
                points.push_back({format_int_list(c.pyramid.levels), c});
            }
            break;
        }
        case SweepKind::patch_sizes: {
            const std::vector<std::vector<int>> sets = {{4},    {6},    {8},   {4, 6},
                                                        {4, 8}, {6, 8}, {4, 6, 8}};
            for (const auto& sizes : sets) {
                PipelineConfig c = base;
                c.patch_sizes = sizes;
                points.push_back({format_int_list(sizes), c});
            }
            break;
        }
        case SweepKind::stride: {
            // reduced pyramid, as the patch grid shrinks quickly with stride
            for (int s : {1, 2, 4}) {
                PipelineConfig c = base;
                c.stride = s;
                c.pyramid.levels = {1, 2, 4, 6, 8};
                points.push_back({"s=" + std::to_string(s), c});
            }
            break;
        }
        case SweepKind::pca_dim: {
            for (int p : {2, 5, 10, 20, 40}) {
                PipelineConfig c = base;
                c.pca = PcaTarget{p, 0.0};
                points.push_back({"p=" + std::to_string(p), c});
            }
            PipelineConfig raw = base;
            raw.pca = PcaTarget{};
            points.push_back({"raw", raw});
            break;
        }
        case SweepKind::preprocessing: {
            PipelineConfig all_on = base;
            all_on.contrast_normalization = true;
            all_on.polarity_splitting = true;
            all_on.standardization = true;
            points.push_back({"all-on", all_on});
            PipelineConfig c1 = all_on;
            c1.contrast_normalization = false;
            points.push_back({"no-contrast-norm", c1});
            PipelineConfig c2 = all_on;
            c2.polarity_splitting = false;
            points.push_back({"no-polarity-split", c2});
            PipelineConfig c3 = all_on;
            c3.standardization = false;
            points.push_back({"no-standardize", c3});
            break;
        }
    }

    std::vector<SweepRow> rows;
    for (auto& pt : points) {
        SweepRow row;
        row.label = pt.label;
        try {
            pt.cfg.validate();
        } catch (const ConfigError& e) {
            row.skipped = true;
            row.note = e.what();
            rows.push_back(std::move(row));
            continue;
        }
        row.report = evaluate_trials(ds, pt.cfg, spec, jobs);
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---- feature export --------------------------------------------------------

enum class ExportFormat { csv, binary };

inline void export_features(const PipelineModel& model, const LoadedDataset& ds,
                            const std::filesystem::path& out, ExportFormat fmt,
                            unsigned jobs = 1) {
    std::vector<std::pair<std::size_t, std::size_t>> flat;
    for (std::size_t k = 0; k < ds.images.size(); ++k)
        for (std::size_t i = 0; i < ds.images[k].size(); ++i)
            flat.emplace_back(k, i);

    const std::size_t n = flat.size();
    const std::size_t D = static_cast<std::size_t>(model.feature_dim);
    std::vector<Vector> feats(n);
    parallel_for(n, jobs, [&](std::size_t f) {
        auto [k, i] = flat[f];
        feats[f] = featurize(model, ds.images[k][i]);
    });

    if (fmt == ExportFormat::csv) {
        std::ofstream os(out);
        if (!os)
            throw IoError("cannot open " + out.string() + " for writing");
        os << "label";
        for (std::size_t j = 0; j < D; ++j) os << ",f" << j;
        os << "\n";
        for (std::size_t f = 0; f < n; ++f) {
            os << ds.classes[flat[f].first];
            char buf[32];
            for (std::size_t j = 0; j < D; ++j) {
                std::snprintf(buf, sizeof(buf), ",%.9g", feats[f](static_cast<Eigen::Index>(j)));
                os << buf;
            }
            os << "\n";
        }
        if (!os)
            throw IoError("failed writing " + out.string());
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os)
            throw IoError("cannot open " + out.string() + " for writing");
        std::uint64_t nh = n, dh = D;
        os.write(reinterpret_cast<const char*>(&nh), 8);
        os.write(reinterpret_cast<const char*>(&dh), 8);
        for (std::size_t f = 0; f < n; ++f) {
            std::uint32_t lab = static_cast<std::uint32_t>(flat[f].first);
            os.write(reinterpret_cast<const char*>(&lab), 4);
        }
        for (std::size_t f = 0; f < n; ++f)
            for (std::size_t j = 0; j < D; ++j) {
                float v = static_cast<float>(feats[f](static_cast<Eigen::Index>(j)));
                os.write(reinterpret_cast<const char*>(&v), 4);
            }
        if (!os)
            throw IoError("failed writing " + out.string());
    }
}

// ---- report formatting ------------------------------------------------------

inline std::string format_report_text(const TrialReport& r) {
    std::ostringstream os;
    char buf[128];
    os << "trial  accuracy\n";
    for (std::size_t t = 0; t < r.accuracies.size(); ++t) {
        std::snprintf(buf, sizeof(buf), "%5zu  %8.4f\n", t, r.accuracies[t]);
        os << buf;
    }
    std::snprintf(buf, sizeof(buf), "mean %.4f  std %.4f\n", r.mean, r.stddev);
    os << buf;
    if (r.excluded_classes > 0)
        os << "warning: " << r.excluded_classes << " class(es) excluded (too few samples)\n";
    return os.str();
}

inline std::string format_sweep_text(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    char buf[192];
    os << "point                 mean      std     trials\n";
    for (const auto& row : rows) {
        if (row.skipped) {
            std::snprintf(buf, sizeof(buf), "%-20s  skipped: %s\n", row.label.c_str(),
                          row.note.c_str());
        } else {
            std::snprintf(buf, sizeof(buf), "%-20s  %8.4f  %8.4f  %zu\n", row.label.c_str(),
                          row.report.mean, row.report.stddev, row.report.accuracies.size());
        }
        os << buf;
    }
    return os.str();
}

inline std::string format_sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "point,mean,std,trials,skipped\n";
    char buf[128];
    for (const auto& row : rows) {
        if (row.skipped) {
            os << row.label << ",,,0,1\n";
        } else {
            std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%zu,0", row.report.mean,
                          row.report.stddev, row.report.accuracies.size());
            os << row.label << "," << buf << "\n";
        }
    }
    return os.str();
}

} // namespace spp

#endif
