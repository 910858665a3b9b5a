#ifndef MELPROJ_CLASSIFIERS_HPP
#define MELPROJ_CLASSIFIERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace melproj {

// ---------------------------------------------------------------------------
// Feature standardization

struct Scaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd std_dev;  // entries below 1e-12 replaced by 1
};

Scaler fit_scaler(const Eigen::MatrixXd& train);
Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& data);

// ---------------------------------------------------------------------------
// K-nearest neighbors

struct KnnModel {
    Eigen::MatrixXd train_vectors;
    std::vector<int> train_labels;
    int k = 1;
};

/// Euclidean majority vote among the k nearest. Vote ties go to the class of
/// the nearest neighbor among the tied classes; distance ties go to the lower
/// training index.
std::vector<int> knn_predict(const KnnModel& model, const Eigen::MatrixXd& queries);

// ---------------------------------------------------------------------------
// RBF-kernel SVM, SMO-trained

struct SvmBinary {
    Eigen::MatrixXd support_vectors;
    Eigen::VectorXd dual_coef;  // alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 1.0;
    double c = 1.0;
};

struct SvmTrainResult {
    SvmBinary machine;
    Eigen::VectorXd alphas;  // one per training row, zeros included
    std::size_t iterations = 0;
    std::size_t kernel_evals = 0;
};

constexpr double kSmoTolerance = 1e-3;
constexpr std::size_t kSmoKernelEvalCap = 10'000'000;

/// Solves the soft-margin dual by SMO with maximal-violating-pair selection.
/// Labels must be +-1 with both classes present. Throws ConvergenceError
/// carrying the violation count if the kernel-evaluation cap is reached.
SvmTrainResult train_svm_binary(const Eigen::MatrixXd& x, const std::vector<int>& y, double c,
                                double gamma);

/// Sum_i coef_i * exp(-gamma ||sv_i - q||^2) + bias per query row.
Eigen::VectorXd svm_decision(const SvmBinary& machine, const Eigen::MatrixXd& queries);

/// One-vs-one multiclass wrapper: one binary machine per unordered class
/// pair, majority vote, ties broken by summed absolute decision values and
/// then by class order.
struct SvmOvo {
    std::vector<int> classes;                  // ascending
    std::vector<std::pair<int, int>> pairs;    // index pairs into `classes`
    std::vector<SvmBinary> machines;
};

SvmOvo svm_ovo_train(const Eigen::MatrixXd& x, const std::vector<int>& labels, double c,
                     double gamma);
std::vector<int> svm_ovo_predict(const SvmOvo& model, const Eigen::MatrixXd& queries);

// ---------------------------------------------------------------------------
// Hyperparameter search

enum class ClassifierKind { svm, knn };

struct GridPoint {
    double svm_c = 0.0;
    int knn_k = 0;
};

/// The grids used throughout: C in {1, 10, 1000, 10000}; K in {1, 5, 10, 20}.
std::vector<GridPoint> default_grid(ClassifierKind kind);

struct GridSearchResult {
    GridPoint best;
    double best_score = 0.0;
    std::vector<double> scores;  // one per grid point, grid order
};

/// Scores every grid point on a stratified 80-20 split of the training set
/// that never separates tracks sharing a group key (artist). Each point is
/// trained on the 80% side and scored by weighted F1 on the 20% side; ties go
/// to the earlier grid entry. If a class is missing from the 80% side the
/// split is retried with the next seed offset, at most 10 times.
GridSearchResult grid_search(const Eigen::MatrixXd& train_vectors,
                             const std::vector<int>& train_labels,
                             const std::vector<std::string>& groups, ClassifierKind kind,
                             const std::vector<GridPoint>& grid, std::uint64_t seed);

}  // namespace melproj

#endif
