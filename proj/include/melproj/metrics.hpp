#ifndef MELPROJ_METRICS_HPP
#define MELPROJ_METRICS_HPP

#include <map>
#include <vector>

namespace melproj {

/// Per-class F1 scores; 0/0 ratios resolve to 0. Classes are whatever appears
/// in `truth` or `predicted`.
std::map<int, double> per_class_f1(const std::vector<int>& truth,
                                   const std::vector<int>& predicted);

/// Support-weighted mean of per-class F1 over the classes present in `truth`.
double weighted_f1(const std::vector<int>& truth, const std::vector<int>& predicted);

}  // namespace melproj

#endif
