// spp: dense-patch spatial pyramid pooling image classifier.
//
// Subcommands: train, evaluate, ablate, synth, extract.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spp/eval.hpp"
#include "spp/pipeline.hpp"
#include "spp/synth.hpp"

namespace {

struct CommonFlags {
    int image_size = 64;
    std::vector<int> patch_sizes;
    int stride = 1;
    int pca_dim = -1;      // -1: default (10), 0: raw
    double pca_energy = 0.0;
    bool whiten = false;
    std::vector<int> pyramid;
    std::string pool = "max";
    double lambda = 1.0;
    std::uint64_t seed = 0;
    bool no_contrast_norm = false;
    bool no_polarity_split = false;
    bool no_standardize = false;
    unsigned jobs = 1;
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("--image-size", f.image_size, "square image side d (default 64)");
    app->add_option("--patch-sizes", f.patch_sizes, "patch sizes r (default {4,6,8}; {4} for d<=32)");
    app->add_option("--stride", f.stride, "patch stride s (default 1)");
    app->add_option("--pca-dim", f.pca_dim, "fixed PCA dimension p (0 keeps raw patches)");
    app->add_option("--pca-energy", f.pca_energy, "PCA energy fraction target in (0,1]");
    app->add_flag("--whiten", f.whiten, "variance-normalize PCA projections");
    app->add_option("--pyramid", f.pyramid, "pooling pyramid levels (default {1,2,4,6,8,10,12,15})");
    app->add_option("--pool", f.pool, "pooling mode: max or avg")
        ->check(CLI::IsMember({"max", "avg"}));
    app->add_option("--lambda", f.lambda, "ridge regularization (default 1.0)");
    app->add_option("--seed", f.seed, "base RNG seed");
    app->add_flag("--no-contrast-norm", f.no_contrast_norm, "disable contrast normalization");
    app->add_flag("--no-polarity-split", f.no_polarity_split, "disable polarity splitting");
    app->add_flag("--no-standardize", f.no_standardize, "disable feature standardization");
    unsigned default_jobs = 1;
    if (const char* env = std::getenv("SPP_JOBS"))
        default_jobs = static_cast<unsigned>(std::max(1, std::atoi(env)));
    f.jobs = default_jobs;
    app->add_option("--jobs", f.jobs, "worker threads (env SPP_JOBS)");
}

spp::PipelineConfig build_config(const CommonFlags& f) {
    spp::PipelineConfig cfg = spp::default_config(f.image_size);
    if (!f.patch_sizes.empty())
        cfg.patch_sizes = f.patch_sizes;
    cfg.stride = f.stride;
    if (f.pca_energy > 0.0)
        cfg.pca = spp::PcaTarget{0, f.pca_energy};
    else if (f.pca_dim == 0)
        cfg.pca = spp::PcaTarget{};
    else if (f.pca_dim > 0)
        cfg.pca = spp::PcaTarget{f.pca_dim, 0.0};
    cfg.whiten = f.whiten;
    if (!f.pyramid.empty())
        cfg.pyramid.levels = f.pyramid;
    cfg.pool_mode = f.pool == "avg" ? spp::PoolMode::average : spp::PoolMode::max;
    cfg.lambda = f.lambda;
    cfg.seed = f.seed;
    cfg.contrast_normalization = !f.no_contrast_norm;
    cfg.polarity_splitting = !f.no_polarity_split;
    cfg.standardization = !f.no_standardize;
    return cfg;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const spp::NumericError*>(&e)) return 3;
    if (dynamic_cast<const spp::DataError*>(&e)) return 2;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"spp: dense-patch spatial pyramid pooling classifier"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "fit a model on a whole dataset");
    std::string train_dir, model_out = "model.ppm.model";
    CommonFlags tf;
    train->add_option("dataset", train_dir, "dataset root (directory per class)")->required();
    train->add_option("--model-out", model_out, "output model path");
    add_common(train, tf);

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "repeated random-split evaluation");
    std::string eval_dir, eval_out;
    CommonFlags ef;
    int n_train = 5, n_test = 2, n_trials = 10;
    eval->add_option("dataset", eval_dir)->required();
    eval->add_option("--n-train", n_train, "training samples per class (default 5)");
    eval->add_option("--n-test", n_test, "test samples per class (default 2)");
    eval->add_option("--trials", n_trials, "number of independent runs (default 10)");
    eval->add_option("--out", eval_out, "also write report CSV here");
    add_common(eval, ef);

    // ablate
    auto* ablate = app.add_subcommand("ablate", "parameter sweep evaluation");
    std::string ab_dir, ab_sweep, ab_out;
    CommonFlags af;
    int ab_train = 5, ab_test = 2, ab_trials = 10;
    ablate->add_option("dataset", ab_dir)->required();
    ablate->add_option("--sweep", ab_sweep,
                       "one of: pyramid-depth, patch-sizes, stride, pca-dim, preprocessing")
        ->required()
        ->check(CLI::IsMember({"pyramid-depth", "patch-sizes", "stride", "pca-dim",
                               "preprocessing"}));
    ablate->add_option("--n-train", ab_train);
    ablate->add_option("--n-test", ab_test);
    ablate->add_option("--trials", ab_trials);
    ablate->add_option("--out", ab_out, "also write sweep CSV here");
    add_common(ablate, af);

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    std::string synth_out;
    spp::SynthConfig sc;
    synth->add_option("out_dir", synth_out)->required();
    synth->add_option("--classes", sc.n_classes, "number of classes (default 10)");
    synth->add_option("--per-class", sc.n_per_class, "images per class (default 7)");
    synth->add_option("--image-size", sc.image_side, "image side (default 32)");
    synth->add_option("--noise", sc.noise, "additive noise sigma (default 0.05)");
    synth->add_option("--jitter", sc.jitter, "brightness/contrast jitter (default 0.15)");
    synth->add_option("--max-shift", sc.max_shift, "translation bound in px (default 2)");
    synth->add_option("--class-sep", sc.class_sep,
                      "template separation in [0,1]; <1 blends toward a shared base");
    synth->add_option("--seed", sc.seed, "RNG seed");

    // extract
    auto* extract = app.add_subcommand("extract", "export features with a trained model");
    std::string ex_dir, ex_model, ex_out = "features.csv", ex_fmt = "csv";
    unsigned ex_jobs = 1;
    extract->add_option("dataset", ex_dir)->required();
    extract->add_option("model", ex_model)->required();
    extract->add_option("--out", ex_out, "output file (default features.csv)");
    extract->add_option("--format", ex_fmt, "csv or bin")->check(CLI::IsMember({"csv", "bin"}));
    extract->add_option("--jobs", ex_jobs);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            spp::PipelineConfig cfg = build_config(tf);
            cfg.validate();
            auto t0 = std::chrono::steady_clock::now();
            spp::LoadedDataset ds = spp::load_dataset(train_dir, cfg.image_side, tf.jobs);
            if (ds.skipped_files > 0)
                std::cerr << "warning: skipped " << ds.skipped_files << " non-image file(s)\n";
            if (ds.skipped_classes > 0)
                std::cerr << "warning: skipped " << ds.skipped_classes << " empty class dir(s)\n";
            std::vector<spp::GrayImage> images;
            std::vector<int> labels;
            for (std::size_t k = 0; k < ds.images.size(); ++k)
                for (auto& img : ds.images[k]) {
                    images.push_back(std::move(img));
                    labels.push_back(static_cast<int>(k));
                }
            auto t1 = std::chrono::steady_clock::now();
            spp::PipelineModel model = spp::fit(cfg, images, labels, ds.classes, tf.jobs);
            auto t2 = std::chrono::steady_clock::now();
            spp::save_model(model, model_out);
            std::cout << "classes: " << model.classes().size() << "\n"
                      << "images:  " << images.size() << "\n"
                      << "D:       " << model.feature_dim << "\n"
                      << "load "
                      << std::chrono::duration<double>(t1 - t0).count() << "s, fit "
                      << std::chrono::duration<double>(t2 - t1).count() << "s\n"
                      << "model written to " << model_out << "\n";
        } else if (*eval) {
            spp::PipelineConfig cfg = build_config(ef);
            cfg.validate();
            spp::LoadedDataset ds = spp::load_dataset(eval_dir, cfg.image_side, ef.jobs);
            spp::TrialSpec spec{n_train, n_test, n_trials, ef.seed};
            spp::TrialReport rep = spp::evaluate_trials(ds, cfg, spec, ef.jobs);
            std::cout << spp::format_report_text(rep);
            std::cerr << "timing: fit " << rep.fit_seconds << "s, eval " << rep.eval_seconds
                      << "s\n";
            if (!eval_out.empty()) {
                std::ofstream os(eval_out);
                os << "trial,accuracy\n";
                for (std::size_t t = 0; t < rep.accuracies.size(); ++t)
                    os << t << "," << rep.accuracies[t] << "\n";
                os << "mean," << rep.mean << "\nstd," << rep.stddev << "\n";
                if (!os)
                    throw spp::IoError("failed writing " + eval_out);
            }
        } else if (*ablate) {
            spp::PipelineConfig cfg = build_config(af);
            spp::LoadedDataset ds = spp::load_dataset(ab_dir, cfg.image_side, af.jobs);
            spp::TrialSpec spec{ab_train, ab_test, ab_trials, af.seed};
            spp::SweepKind kind = spp::SweepKind::pyramid_depth;
            if (ab_sweep == "patch-sizes") kind = spp::SweepKind::patch_sizes;
            else if (ab_sweep == "stride") kind = spp::SweepKind::stride;
            else if (ab_sweep == "pca-dim") kind = spp::SweepKind::pca_dim;
            else if (ab_sweep == "preprocessing") kind = spp::SweepKind::preprocessing;
            auto rows = spp::run_sweep(ds, cfg, spec, kind, af.jobs);
            std::cout << spp::format_sweep_text(rows);
            if (!ab_out.empty()) {
                std::ofstream os(ab_out);
                os << spp::format_sweep_csv(rows);
                if (!os)
                    throw spp::IoError("failed writing " + ab_out);
            }
        } else if (*synth) {
            spp::SynthDataset ds = spp::generate_synthetic(sc);
            spp::write_synthetic(ds, synth_out);
            std::cout << "wrote " << sc.n_classes << " classes x " << sc.n_per_class
                      << " images to " << synth_out << "\n";
        } else if (*extract) {
            spp::PipelineModel model = spp::load_model(ex_model);
            spp::LoadedDataset ds = spp::load_dataset(ex_dir, model.config.image_side, ex_jobs);
            spp::export_features(model, ds, ex_out,
                                 ex_fmt == "bin" ? spp::ExportFormat::binary
                                                 : spp::ExportFormat::csv,
                                 ex_jobs);
            std::cout << "wrote features for " << ds.total_images() << " images (D="
                      << model.feature_dim << ") to " << ex_out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return 0;
}
