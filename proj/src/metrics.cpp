#include "melproj/metrics.hpp"

#include <string>

#include "melproj/errors.hpp"

namespace melproj {

std::map<int, double> per_class_f1(const std::vector<int>& truth,
                                   const std::vector<int>& predicted) {
    if (truth.size() != predicted.size())
        throw ValidationError("label vectors have different lengths: " +
                              std::to_string(truth.size()) + " vs " +
                              std::to_string(predicted.size()));
    std::map<int, double> tp, fp, fn;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == predicted[i]) {
            tp[truth[i]] += 1.0;
        } else {
            fn[truth[i]] += 1.0;
            fp[predicted[i]] += 1.0;
        }
    }
    std::map<int, double> f1;
    auto get = [](const std::map<int, double>& m, int k) {
        auto it = m.find(k);
        return it == m.end() ? 0.0 : it->second;
    };
    std::map<int, bool> classes;
    for (int c : truth) classes[c] = true;
    for (int c : predicted) classes[c] = true;
    for (const auto& [c, unused] : classes) {
        const double t = get(tp, c);
        const double precision_den = t + get(fp, c);
        const double recall_den = t + get(fn, c);
        const double precision = precision_den > 0.0 ? t / precision_den : 0.0;
        const double recall = recall_den > 0.0 ? t / recall_den : 0.0;
        f1[c] = (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    }
    return f1;
}

double weighted_f1(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.empty()) throw ValidationError("weighted_f1 needs at least one label");
    const std::map<int, double> f1 = per_class_f1(truth, predicted);
    std::map<int, std::size_t> support;
    for (int c : truth) ++support[c];
    double total = 0.0;
    for (const auto& [c, count] : support)
        total += static_cast<double>(count) * f1.at(c);
    return total / static_cast<double>(truth.size());
}

}  // namespace melproj
