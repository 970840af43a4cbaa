#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

namespace ulamlab::numeric {

/// Estimates the limit of a sequence A_1..A_n from its tail.
///
/// Plain tail means are useless for the Cesaro-type sequences here: they
/// approach their limit like c/k or c*log(k)/k, which at k ~ 512 still sits
/// far above any usable threshold. The extrapolant
/// R2(k) = 4*A_k - 4*A_{k/2} + A_{k/4} cancels both of those trends exactly
/// while leaving constants untouched; its mean over the last quarter handles
/// the algebraic tails. Geometrically decaying sequences are the opposite
/// case (the A_{k/4} sample dominates R2 there), so the smaller of the two
/// tail means is reported. Returns +infinity if the tail touches an overflow
/// marker.
inline double tail_limit(const std::vector<double>& seq) {
    const std::size_t n = seq.size();
    if (n < 8) {
        double last = seq.empty() ? 0.0 : seq.back();
        return std::isfinite(last) ? last : std::numeric_limits<double>::infinity();
    }
    double richardson = 0.0, plain = 0.0;
    std::size_t count = 0;
    for (std::size_t k = (3 * n) / 4; k <= n; ++k) {
        const double a = seq[k - 1];
        const double a2 = seq[k / 2 - 1];
        const double a4 = seq[k / 4 - 1];
        if (!std::isfinite(a) || !std::isfinite(a2) || !std::isfinite(a4))
            return std::numeric_limits<double>::infinity();
        richardson += 4.0 * a - 4.0 * a2 + a4;
        plain += a;
        ++count;
    }
    const double r = richardson / static_cast<double>(count);
    const double p = plain / static_cast<double>(count);
    return std::max(0.0, std::min(r, p));
}

/// Growth-aware unboundedness surrogate for "sup over S is infinite":
/// the sup over the window must clear the threshold and the outer half of
/// the window (by argument magnitude) must dominate the inner half.
inline bool unbounded_growth(std::vector<std::pair<double, double>> magnitude_and_norm,
                             double threshold) {
    if (magnitude_and_norm.empty()) return false;
    std::sort(magnitude_and_norm.begin(), magnitude_and_norm.end());
    double sup = 0.0, sup_inner = 0.0, sup_outer = 0.0;
    const std::size_t half = magnitude_and_norm.size() / 2;
    for (std::size_t i = 0; i < magnitude_and_norm.size(); ++i) {
        const double v = magnitude_and_norm[i].second;
        sup = std::max(sup, v);
        (i < half ? sup_inner : sup_outer) = std::max(i < half ? sup_inner : sup_outer, v);
    }
    return sup > threshold && sup_outer > sup_inner;
}

/// Convergence heuristic for a nonnegative series given its terms: declared
/// convergent when the terms decay with ratio <= 0.95 across the last 8
/// recorded terms (zero terms pass trivially).
inline bool series_terms_converge(const std::vector<double>& terms, double ratio_cap = 0.95) {
    if (terms.empty()) return true;
    const std::size_t n = terms.size();
    const std::size_t from = n > 8 ? n - 8 : 1;
    for (std::size_t k = from; k < n; ++k) {
        if (!std::isfinite(terms[k])) return false;
        if (terms[k - 1] == 0.0) {
            if (terms[k] != 0.0) return false;
            continue;
        }
        if (terms[k] / terms[k - 1] > ratio_cap) return false;
    }
    return true;
}

} // namespace ulamlab::numeric
