#pragma once

#include "birkhoff/flow.hpp"

#include <iosfwd>
#include <vector>

namespace birkhoff {

/// Greedy (T, eps)-spanning set size: base points (sorted lexicographically)
/// become centers unless their orbit stays within eps in the sup norm of an
/// existing center's orbit over [0, T]. Throws std::runtime_error naming the
/// first base point whose orbit escapes.
std::size_t spanning_count(const Scenario& s, const PointSet& base, double T, double eps,
                           const IntegratorConfig& cfg = {});

struct EntropyReport {
    std::vector<double> horizons;                 // ascending
    std::vector<double> epsilons;                 // ascending
    std::vector<std::vector<std::size_t>> counts; // counts[k][j] = N(horizons[k], epsilons[j])
    std::vector<double> slopes;                   // per eps, least squares of log N against T
    double headline = 0.0;                        // max slope
    bool degenerate = false;
    bool monotone = true;
};

/// Counts are made monotone by construction: the search for (T_k, eps_j)
/// starts from the centers found for (T_{k-1}, eps_j) and (T_k, eps_{j+1}).
EntropyReport entropy_estimate(const Scenario& s, const PointSet& base, std::vector<double> horizons,
                               std::vector<double> epsilons, const IntegratorConfig& cfg = {});

void write_entropy_csv(std::ostream& os, const EntropyReport& r);

/// One line: headline slope, threshold and ZERO/POSITIVE.
void write_entropy_verdict(std::ostream& os, const EntropyReport& r, double threshold);

}  // namespace birkhoff
