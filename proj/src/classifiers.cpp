#include "melproj/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "melproj/errors.hpp"
#include "melproj/metrics.hpp"
#include "melproj/rng.hpp"

namespace melproj {

// ---------------------------------------------------------------------------
// Scaler

Scaler fit_scaler(const Eigen::MatrixXd& train) {
    if (train.rows() < 1) throw ValidationError("scaler needs at least one row");
    Scaler s;
    s.mean = train.colwise().mean().transpose();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(train.cols());
    for (Eigen::Index r = 0; r < train.rows(); ++r) {
        const Eigen::VectorXd d = train.row(r).transpose() - s.mean;
        var += d.cwiseProduct(d);
    }
    var /= static_cast<double>(train.rows());
    s.std_dev = var.cwiseSqrt();
    for (Eigen::Index i = 0; i < s.std_dev.size(); ++i)
        if (s.std_dev(i) < 1e-12) s.std_dev(i) = 1.0;
    return s;
}

Eigen::MatrixXd apply_scaler(const Scaler& scaler, const Eigen::MatrixXd& data) {
    if (data.cols() != scaler.mean.size())
        throw DimensionError("scaler expects " + std::to_string(scaler.mean.size()) +
                             " columns, got " + std::to_string(data.cols()));
    return (data.rowwise() - scaler.mean.transpose()).array().rowwise() /
           scaler.std_dev.transpose().array();
}

// ---------------------------------------------------------------------------
// KNN

std::vector<int> knn_predict(const KnnModel& model, const Eigen::MatrixXd& queries) {
    const Eigen::Index n = model.train_vectors.rows();
    if (model.k < 1) throw ValidationError("k must be at least 1");
    if (model.k > n)
        throw ValidationError("k = " + std::to_string(model.k) + " exceeds training size " +
                              std::to_string(n));
    if (queries.cols() != model.train_vectors.cols())
        throw DimensionError("query dimensionality mismatch");

    std::vector<int> predictions(static_cast<std::size_t>(queries.rows()));
    std::vector<std::pair<double, Eigen::Index>> order(static_cast<std::size_t>(n));
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        for (Eigen::Index t = 0; t < n; ++t)
            order[static_cast<std::size_t>(t)] = {
                (model.train_vectors.row(t) - queries.row(q)).squaredNorm(), t};
        // Distance ties resolve to the lower training index.
        std::sort(order.begin(), order.end());

        std::map<int, int> votes;
        for (int i = 0; i < model.k; ++i) ++votes[model.train_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)].second)]];
        int best_count = 0;
        for (const auto& [label, count] : votes) best_count = std::max(best_count, count);
        // Among vote-tied classes, the one owning the nearest neighbor wins.
        int winner = -1;
        for (int i = 0; i < model.k && winner < 0; ++i) {
            const int label = model.train_labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)].second)];
            if (votes[label] == best_count) winner = label;
        }
        predictions[static_cast<std::size_t>(q)] = winner;
    }
    return predictions;
}

// ---------------------------------------------------------------------------
// SVM

namespace {

// One RBF kernel column against every training row.
Eigen::VectorXd kernel_column(const Eigen::MatrixXd& x, Eigen::Index j, double gamma) {
    return (-gamma * (x.rowwise() - x.row(j)).rowwise().squaredNorm().array()).exp().matrix();
}

}  // namespace

SvmTrainResult train_svm_binary(const Eigen::MatrixXd& x, const std::vector<int>& y, double c,
                                double gamma) {
    const Eigen::Index n = x.rows();
    if (static_cast<std::size_t>(n) != y.size())
        throw ValidationError("label count does not match row count");
    if (c <= 0.0) throw ValidationError("C must be positive");
    if (gamma <= 0.0) throw ValidationError("gamma must be positive");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == 1) has_pos = true;
        else if (label == -1) has_neg = true;
        else throw ValidationError("binary labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw ValidationError("both classes must be present");

    Eigen::VectorXd yv(n);
    for (Eigen::Index i = 0; i < n; ++i) yv(i) = y[static_cast<std::size_t>(i)];

    // Minimize 0.5 a'Qa - e'a with Q_ij = y_i y_j K_ij, subject to y'a = 0,
    // 0 <= a <= C. Gradient maintained incrementally; kernel rows are
    // recomputed on demand (no cache).
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
    std::size_t kernel_evals = 0;
    std::size_t iterations = 0;

    auto in_up = [&](Eigen::Index t) {
        return (yv(t) > 0 && alpha(t) < c) || (yv(t) < 0 && alpha(t) > 0);
    };
    auto in_low = [&](Eigen::Index t) {
        return (yv(t) < 0 && alpha(t) < c) || (yv(t) > 0 && alpha(t) > 0);
    };

    double m_up = 0, m_low = 0;
    while (true) {
        // Maximal violating pair.
        Eigen::Index i = -1, j = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < n; ++t) {
            const double v = -yv(t) * grad(t);
            if (in_up(t) && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low(t) && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || m_up - m_low <= kSmoTolerance) break;

        if (kernel_evals + 2 * static_cast<std::size_t>(n) > kSmoKernelEvalCap) {
            std::size_t violations = 0;
            for (Eigen::Index t = 0; t < n; ++t) {
                const double v = -yv(t) * grad(t);
                if ((in_up(t) && v > m_low + kSmoTolerance) ||
                    (in_low(t) && v < m_up - kSmoTolerance))
                    ++violations;
            }
            throw ConvergenceError("SMO hit the kernel evaluation cap with " +
                                       std::to_string(violations) + " KKT violations",
                                   violations);
        }
        const Eigen::VectorXd ki = kernel_column(x, i, gamma);
        const Eigen::VectorXd kj = kernel_column(x, j, gamma);
        kernel_evals += 2 * static_cast<std::size_t>(n);

        const double s = yv(i) * yv(j);
        double eta = ki(i) + kj(j) - 2.0 * ki(j);
        if (eta <= 1e-12) eta = 1e-12;
        double delta = -(grad(i) - s * grad(j)) / eta;

        // Box constraints for the pair move.
        const double lo = std::max(-alpha(i), s > 0 ? alpha(j) - c : -alpha(j));
        const double hi = std::min(c - alpha(i), s > 0 ? alpha(j) : c - alpha(j));
        delta = std::clamp(delta, lo, hi);
        if (delta == 0.0) break;  // blocked move; selection band is flat

        const double delta_i = delta;
        const double delta_j = -s * delta;
        alpha(i) += delta_i;
        alpha(j) += delta_j;
        grad += (yv(i) * delta_i) * yv.cwiseProduct(ki) + (yv(j) * delta_j) * yv.cwiseProduct(kj);
        ++iterations;
    }

    // Bias from the free support vectors; fall back to the selection band.
    double bias_sum = 0.0;
    int free_count = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha(t) > 0.0 && alpha(t) < c) {
            bias_sum += -yv(t) * grad(t);
            ++free_count;
        }
    }
    const double bias = free_count > 0 ? bias_sum / free_count : (m_up + m_low) / 2.0;

    SvmTrainResult result;
    result.alphas = alpha;
    result.iterations = iterations;
    result.kernel_evals = kernel_evals;
    result.machine.gamma = gamma;
    result.machine.c = c;
    result.machine.bias = bias;
    const Eigen::Index sv_count = (alpha.array() > 0.0).count();
    result.machine.support_vectors.resize(sv_count, x.cols());
    result.machine.dual_coef.resize(sv_count);
    Eigen::Index out = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        if (alpha(t) > 0.0) {
            result.machine.support_vectors.row(out) = x.row(t);
            result.machine.dual_coef(out) = alpha(t) * yv(t);
            ++out;
        }
    }
    return result;
}

Eigen::VectorXd svm_decision(const SvmBinary& machine, const Eigen::MatrixXd& queries) {
    if (queries.cols() != machine.support_vectors.cols())
        throw DimensionError("query dimensionality mismatch");
    Eigen::VectorXd out(queries.rows());
    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        const Eigen::VectorXd k =
            (-machine.gamma *
             (machine.support_vectors.rowwise() - queries.row(q)).rowwise().squaredNorm().array())
                .exp()
                .matrix();
        out(q) = machine.dual_coef.dot(k) + machine.bias;
    }
    return out;
}

SvmOvo svm_ovo_train(const Eigen::MatrixXd& x, const std::vector<int>& labels, double c,
                     double gamma) {
    std::set<int> unique(labels.begin(), labels.end());
    if (unique.size() < 2) throw ValidationError("one-vs-one needs at least 2 classes");
    SvmOvo model;
    model.classes.assign(unique.begin(), unique.end());
    const int k = static_cast<int>(model.classes.size());
    for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
            std::vector<Eigen::Index> rows;
            std::vector<int> pair_labels;
            for (std::size_t t = 0; t < labels.size(); ++t) {
                if (labels[t] == model.classes[static_cast<std::size_t>(a)]) {
                    rows.push_back(static_cast<Eigen::Index>(t));
                    pair_labels.push_back(1);
                } else if (labels[t] == model.classes[static_cast<std::size_t>(b)]) {
                    rows.push_back(static_cast<Eigen::Index>(t));
                    pair_labels.push_back(-1);
                }
            }
            Eigen::MatrixXd pair_x(static_cast<Eigen::Index>(rows.size()), x.cols());
            for (std::size_t r = 0; r < rows.size(); ++r)
                pair_x.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
            model.pairs.emplace_back(a, b);
            model.machines.push_back(train_svm_binary(pair_x, pair_labels, c, gamma).machine);
        }
    }
    return model;
}

std::vector<int> svm_ovo_predict(const SvmOvo& model, const Eigen::MatrixXd& queries) {
    const std::size_t n_classes = model.classes.size();
    std::vector<int> out(static_cast<std::size_t>(queries.rows()));
    std::vector<Eigen::VectorXd> decisions(model.machines.size());
    for (std::size_t m = 0; m < model.machines.size(); ++m)
        decisions[m] = svm_decision(model.machines[m], queries);

    for (Eigen::Index q = 0; q < queries.rows(); ++q) {
        std::vector<int> votes(n_classes, 0);
        std::vector<double> strength(n_classes, 0.0);
        for (std::size_t m = 0; m < model.machines.size(); ++m) {
            const double d = decisions[m](q);
            const auto [a, b] = model.pairs[m];
            const std::size_t winner = d >= 0.0 ? static_cast<std::size_t>(a) : static_cast<std::size_t>(b);
            ++votes[winner];
            strength[winner] += std::abs(d);
        }
        std::size_t best = 0;
        for (std::size_t cls = 1; cls < n_classes; ++cls) {
            if (votes[cls] > votes[best] ||
                (votes[cls] == votes[best] && strength[cls] > strength[best]))
                best = cls;
        }
        out[static_cast<std::size_t>(q)] = model.classes[best];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Grid search

std::vector<GridPoint> default_grid(ClassifierKind kind) {
    std::vector<GridPoint> grid;
    if (kind == ClassifierKind::svm) {
        for (double c : {1.0, 10.0, 1000.0, 10000.0}) grid.push_back({c, 0});
    } else {
        for (int k : {1, 5, 10, 20}) grid.push_back({0.0, k});
    }
    return grid;
}

namespace {

struct SplitSides {
    std::vector<Eigen::Index> train;  // 80% side
    std::vector<Eigen::Index> val;    // 20% side
};

// Greedy group assignment against per-class 80/20 count targets.
SplitSides split_80_20(const std::vector<int>& labels, const std::vector<std::string>& groups,
                       std::uint64_t seed) {
    std::map<std::string, std::vector<Eigen::Index>> members;
    for (std::size_t i = 0; i < groups.size(); ++i)
        members[groups[i]].push_back(static_cast<Eigen::Index>(i));

    std::vector<const std::vector<Eigen::Index>*> order;
    order.reserve(members.size());
    for (const auto& [key, rows] : members) order.push_back(&rows);
    Rng rng(seed);
    seeded_shuffle(order, rng);
    std::stable_sort(order.begin(), order.end(),
                     [](const auto* a, const auto* b) { return a->size() > b->size(); });

    std::map<int, double> class_total;
    for (int label : labels) class_total[label] += 1.0;

    std::map<int, double> train_count, val_count;
    SplitSides sides;
    const double train_weight = 0.8, val_weight = 0.2;
    auto deviation = [&](const std::map<int, double>& counts, double weight,
                         const std::map<int, double>& extra) {
        double dev = 0.0;
        for (const auto& [cls, total] : class_total) {
            const double target = weight * total;
            auto it = counts.find(cls);
            double have = it == counts.end() ? 0.0 : it->second;
            auto ex = extra.find(cls);
            if (ex != extra.end()) have += ex->second;
            dev += (have - target) * (have - target) / std::max(target, 1.0);
        }
        return dev;
    };
    const std::map<int, double> nothing;
    for (const auto* rows : order) {
        std::map<int, double> group_classes;
        for (Eigen::Index r : *rows) group_classes[labels[static_cast<std::size_t>(r)]] += 1.0;
        const double cost_train = deviation(train_count, train_weight, group_classes) +
                                  deviation(val_count, val_weight, nothing);
        const double cost_val = deviation(train_count, train_weight, nothing) +
                                deviation(val_count, val_weight, group_classes);
        auto& side = cost_train <= cost_val ? sides.train : sides.val;
        auto& side_count = cost_train <= cost_val ? train_count : val_count;
        for (Eigen::Index r : *rows) {
            side.push_back(r);
            side_count[labels[static_cast<std::size_t>(r)]] += 1.0;
        }
    }
    return sides;
}

bool split_usable(const SplitSides& sides, const std::vector<int>& labels) {
    if (sides.train.empty() || sides.val.empty()) return false;
    std::set<int> all(labels.begin(), labels.end());
    std::set<int> train_classes;
    for (Eigen::Index r : sides.train) train_classes.insert(labels[static_cast<std::size_t>(r)]);
    return train_classes == all;
}

}  // namespace

GridSearchResult grid_search(const Eigen::MatrixXd& train_vectors,
                             const std::vector<int>& train_labels,
                             const std::vector<std::string>& groups, ClassifierKind kind,
                             const std::vector<GridPoint>& grid, std::uint64_t seed) {
    if (grid.empty()) throw ValidationError("hyperparameter grid must be non-empty");
    if (train_labels.size() != static_cast<std::size_t>(train_vectors.rows()) ||
        groups.size() != train_labels.size())
        throw ValidationError("vectors, labels and groups must have matching lengths");

    SplitSides sides;
    bool found = false;
    for (std::uint64_t attempt = 0; attempt < 10 && !found; ++attempt) {
        sides = split_80_20(train_labels, groups, derive_seed(seed, "split", attempt));
        found = split_usable(sides, train_labels);
    }
    if (!found)
        throw ValidationError("could not build an 80-20 split covering every class; "
                              "too few artist groups");

    Eigen::MatrixXd x80(static_cast<Eigen::Index>(sides.train.size()), train_vectors.cols());
    Eigen::MatrixXd x20(static_cast<Eigen::Index>(sides.val.size()), train_vectors.cols());
    std::vector<int> y80(sides.train.size()), y20(sides.val.size());
    for (std::size_t i = 0; i < sides.train.size(); ++i) {
        x80.row(static_cast<Eigen::Index>(i)) = train_vectors.row(sides.train[i]);
        y80[i] = train_labels[static_cast<std::size_t>(sides.train[i])];
    }
    for (std::size_t i = 0; i < sides.val.size(); ++i) {
        x20.row(static_cast<Eigen::Index>(i)) = train_vectors.row(sides.val[i]);
        y20[i] = train_labels[static_cast<std::size_t>(sides.val[i])];
    }

    GridSearchResult result;
    result.best_score = -1.0;
    const double gamma = 1.0 / static_cast<double>(train_vectors.cols());
    for (const GridPoint& point : grid) {
        std::vector<int> predicted;
        if (kind == ClassifierKind::svm) {
            const SvmOvo model = svm_ovo_train(x80, y80, point.svm_c, gamma);
            predicted = svm_ovo_predict(model, x20);
        } else {
            predicted = knn_predict({x80, y80, point.knn_k}, x20);
        }
        const double score = weighted_f1(y20, predicted);
        result.scores.push_back(score);
        if (score > result.best_score) {
            result.best_score = score;
            result.best = point;
        }
    }
    return result;
}

}  // namespace melproj
