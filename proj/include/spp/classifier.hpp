#ifndef SPP_CLASSIFIER_HPP
#define SPP_CLASSIFIER_HPP

#include <string>
#include <utility>
#include <vector>

#include "spp/errors.hpp"
#include "spp/numerics.hpp"

namespace spp {

struct Standardizer {
    Vector mean;
    Vector std; // population std, entries >= 0
    double epsilon_s = 1e-8;
};

// Per-column mean and population std of an n x D feature matrix (rows are
// samples). Constant columns get std 0; epsilon_s guards them at apply time.
inline Standardizer standardize_fit(const Matrix& X, double epsilon_s = 1e-8) {
    if (X.rows() < 2)
        throw TooFewSamples("standardize_fit: need at least 2 samples");
    Standardizer st;
    st.epsilon_s = epsilon_s;
    st.mean = X.colwise().mean();
    Matrix centered = X.rowwise() - st.mean.transpose();
    st.std = (centered.array().square().colwise().sum() / static_cast<double>(X.rows()))
                 .sqrt()
                 .matrix()
                 .transpose();
    return st;
}

inline Vector standardize_apply(const Standardizer& st, const Vector& x) {
    if (x.size() != st.mean.size())
        throw DimensionMismatch("standardize_apply: dimension mismatch");
    return (x - st.mean).array() / (st.std.array() + st.epsilon_s);
}

struct RidgeClassifier {
    Matrix W;                         // (D + 1 bias) x K
    std::vector<std::string> classes; // ordered labels
    double lambda = 1.0;

    int feature_dim() const { return static_cast<int>(W.rows()) - 1; }
};

// Closed form W = (X'X + lambda I)^-1 X'Y. X must already carry the bias
// column of ones; the bias row is regularized like every other row.
inline Matrix ridge_primal(const Matrix& X, const Matrix& Y, double lambda) {
    const Eigen::Index D = X.cols();
    Matrix A = X.transpose() * X + lambda * Matrix::Identity(D, D);
    return solve_spd(A, X.transpose() * Y);
}

// Dual form W = X'(XX' + lambda I)^-1 Y, identical for lambda > 0; the solve
// is n x n, which wins when the feature dimension exceeds the sample count.
inline Matrix ridge_dual(const Matrix& X, const Matrix& Y, double lambda) {
    const Eigen::Index n = X.rows();
    Matrix A = X * X.transpose() + lambda * Matrix::Identity(n, n);
    return X.transpose() * solve_spd(A, Y);
}

inline RidgeClassifier ridge_fit(const Matrix& X, const Matrix& Y, double lambda,
                                 std::vector<std::string> classes) {
    if (lambda <= 0.0)
        throw ConfigInvalid("ridge_fit: lambda must be positive");
    if (X.rows() != Y.rows())
        throw DimensionMismatch("ridge_fit: X and Y row counts differ");
    if (static_cast<Eigen::Index>(classes.size()) != Y.cols())
        throw DimensionMismatch("ridge_fit: class count does not match Y columns");

    RidgeClassifier clf;
    clf.lambda = lambda;
    clf.classes = std::move(classes);
    clf.W = (X.cols() > X.rows()) ? ridge_dual(X, Y, lambda) : ridge_primal(X, Y, lambda);
    return clf;
}

struct Prediction {
    int label_index = 0;
    Vector scores;
};

// Scores W'[x;1]; argmax with ties broken by lowest class index.
inline Prediction predict(const RidgeClassifier& clf, const Vector& x) {
    if (x.size() + 1 != clf.W.rows())
        throw DimensionMismatch("predict: feature dimension mismatch");
    Prediction pr;
    pr.scores = clf.W.topRows(x.size()).transpose() * x + clf.W.row(clf.W.rows() - 1).transpose();
    pr.label_index = 0;
    for (Eigen::Index k = 1; k < pr.scores.size(); ++k)
        if (pr.scores(k) > pr.scores(pr.label_index))
            pr.label_index = static_cast<int>(k);
    return pr;
}

} // namespace spp

#endif
