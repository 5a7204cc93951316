#pragma once

// The 60-column binned mobility feature matrix and a small dense PCA:
// covariance of the centered matrix, cyclic Jacobi eigendecomposition,
// deterministic sign convention. The matrix is at most a few dozen rows by
// 60 columns, so numerical simplicity beats sophistication here.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mobility/calendar.hpp"
#include "mobility/error.hpp"
#include "mobility/ses.hpp"

namespace mobility {

inline constexpr int kRgBins = 40;       // (0.5, 20.5] km in 0.5 km steps
inline constexpr int kEntropyBins = 20;  // (0, 1] in 0.05 steps
inline constexpr int kFeatureCols = kRgBins + kEntropyBins;

/// Bin 1..40 for rg in (0.5, 20.5] km; 0 = out of range.
inline int rg_bin(double rg_km) {
    if (!(rg_km > 0.5) || rg_km > 20.5) return 0;
    int b = static_cast<int>(std::ceil((rg_km - 0.5) / 0.5));
    return std::min(std::max(b, 1), kRgBins);
}

/// Bin 1..20 for entropy in (0, 1]; 0 = out of range.
inline int entropy_bin(double entropy) {
    if (!(entropy > 0.0) || entropy > 1.0) return 0;
    int b = static_cast<int>(std::ceil(entropy / 0.05));
    return std::min(std::max(b, 1), kEntropyBins);
}

struct FeatureKey {
    int home_price_category = 0;  // 1..10
    QuartileGroup quartile_group = QuartileGroup::Q1Q3;
    DayType day_type = DayType::workday;

    bool operator<(const FeatureKey& o) const {
        if (home_price_category != o.home_price_category)
            return home_price_category < o.home_price_category;
        if (quartile_group != o.quartile_group) return quartile_group < o.quartile_group;
        return day_type < o.day_type;
    }
    bool operator==(const FeatureKey& o) const {
        return home_price_category == o.home_price_category &&
               quartile_group == o.quartile_group && day_type == o.day_type;
    }
};

struct FeatureMatrix {
    std::vector<FeatureKey> keys;              // one per row, sorted
    std::vector<std::array<double, kFeatureCols>> rows;
    uint64_t dropped_rg = 0;       // SIM-day-type points outside the rg range
    uint64_t dropped_entropy = 0;  // ... outside the entropy range
};

struct FeaturePoint {
    FeatureKey key;
    double rg_km = 0.0;
    double entropy = 0.0;
};

/// Aggregates per-SIM points into keyed rows of bin counts, then normalizes
/// each metric block to sum 1. Keys never enter the numeric columns.
inline FeatureMatrix build_matrix(const std::vector<FeaturePoint>& points) {
    std::map<FeatureKey, std::array<double, kFeatureCols>> acc;
    FeatureMatrix m;
    for (const FeaturePoint& p : points) {
        int rb = rg_bin(p.rg_km);
        int eb = entropy_bin(p.entropy);
        if (rb == 0) ++m.dropped_rg;
        if (eb == 0) ++m.dropped_entropy;
        if (rb == 0 && eb == 0) continue;
        auto& row = acc.try_emplace(p.key).first->second;
        if (rb > 0) row[static_cast<size_t>(rb - 1)] += 1.0;
        if (eb > 0) row[static_cast<size_t>(kRgBins + eb - 1)] += 1.0;
    }
    if (acc.empty()) throw InputError("feature matrix is empty: no SIM fell into any bin");
    for (auto& [key, row] : acc) {
        double rg_sum = 0.0, en_sum = 0.0;
        for (int i = 0; i < kRgBins; ++i) rg_sum += row[static_cast<size_t>(i)];
        for (int i = kRgBins; i < kFeatureCols; ++i) en_sum += row[static_cast<size_t>(i)];
        if (rg_sum > 0.0)
            for (int i = 0; i < kRgBins; ++i) row[static_cast<size_t>(i)] /= rg_sum;
        if (en_sum > 0.0)
            for (int i = kRgBins; i < kFeatureCols; ++i) row[static_cast<size_t>(i)] /= en_sum;
        m.keys.push_back(key);
        m.rows.push_back(row);
    }
    return m;
}

struct PcaResult {
    std::vector<std::array<double, kFeatureCols>> components;  // descending variance
    std::vector<double> eigenvalues;                           // clamped >= 0
    std::vector<double> explained_variance_ratio;
    std::vector<double> column_means;
    std::vector<std::vector<double>> scores;  // row-aligned with the input matrix
};

namespace detail {

/// Cyclic Jacobi for a symmetric matrix (row-major d*d). Returns eigenvalues
/// in `diag` and eigenvectors as rows of `vecs`.
inline void jacobi_eigen(std::vector<double> a, int d, std::vector<double>& diag,
                         std::vector<double>& vecs) {
    vecs.assign(static_cast<size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) vecs[static_cast<size_t>(i) * d + i] = 1.0;
    auto A = [&](int r, int c) -> double& { return a[static_cast<size_t>(r) * d + c]; };
    auto V = [&](int r, int c) -> double& { return vecs[static_cast<size_t>(r) * d + c]; };

    double scale = 0.0;
    for (int i = 0; i < d; ++i) scale = std::max(scale, std::fabs(A(i, i)));
    scale = std::max(scale, 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += A(p, q) * A(p, q);
        if (off < 1e-24 * scale * scale) break;
        for (int p = 0; p < d; ++p) {
            for (int q = p + 1; q < d; ++q) {
                double apq = A(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < d; ++k) {
                    double akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    double apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < d; ++k) {
                    double vpk = V(p, k), vqk = V(q, k);
                    V(p, k) = c * vpk - s * vqk;
                    V(q, k) = s * vpk + c * vqk;
                }
            }
        }
    }
    diag.resize(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) diag[static_cast<size_t>(i)] = A(i, i);
}

} // namespace detail

/// Mean-centers the matrix, eigendecomposes its sample covariance, orders
/// components by descending variance, and fixes each component's sign so its
/// largest-magnitude entry is positive.
inline PcaResult run_pca(const std::vector<std::array<double, kFeatureCols>>& rows) {
    size_t n = rows.size();
    constexpr int d = kFeatureCols;
    if (n < 2) throw InputError("PCA needs at least 2 rows, got " + std::to_string(n));

    PcaResult r;
    r.column_means.assign(d, 0.0);
    for (const auto& row : rows)
        for (int c = 0; c < d; ++c) r.column_means[static_cast<size_t>(c)] += row[static_cast<size_t>(c)];
    for (double& m : r.column_means) m /= static_cast<double>(n);

    std::vector<std::array<double, d>> centered(n);
    for (size_t i = 0; i < n; ++i)
        for (int c = 0; c < d; ++c)
            centered[i][static_cast<size_t>(c)] =
                rows[i][static_cast<size_t>(c)] - r.column_means[static_cast<size_t>(c)];

    std::vector<double> cov(static_cast<size_t>(d) * d, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (int p = 0; p < d; ++p) {
            double v = centered[i][static_cast<size_t>(p)];
            if (v == 0.0) continue;
            for (int q = p; q < d; ++q)
                cov[static_cast<size_t>(p) * d + q] += v * centered[i][static_cast<size_t>(q)];
        }
    for (int p = 0; p < d; ++p)
        for (int q = p; q < d; ++q) {
            double v = cov[static_cast<size_t>(p) * d + q] / static_cast<double>(n - 1);
            cov[static_cast<size_t>(p) * d + q] = v;
            cov[static_cast<size_t>(q) * d + p] = v;
        }

    std::vector<double> diag, vecs;
    detail::jacobi_eigen(std::move(cov), d, diag, vecs);

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (diag[static_cast<size_t>(a)] != diag[static_cast<size_t>(b)])
            return diag[static_cast<size_t>(a)] > diag[static_cast<size_t>(b)];
        return a < b;
    });

    r.components.resize(d);
    r.eigenvalues.resize(d);
    double trace = 0.0;
    for (int j = 0; j < d; ++j) {
        int src = order[static_cast<size_t>(j)];
        double lambda = std::max(0.0, diag[static_cast<size_t>(src)]);
        r.eigenvalues[static_cast<size_t>(j)] = lambda;
        trace += lambda;
        auto& comp = r.components[static_cast<size_t>(j)];
        int arg = 0;
        double best = -1.0;
        for (int c = 0; c < d; ++c) {
            comp[static_cast<size_t>(c)] = vecs[static_cast<size_t>(src) * d + c];
            if (std::fabs(comp[static_cast<size_t>(c)]) > best) {
                best = std::fabs(comp[static_cast<size_t>(c)]);
                arg = c;
            }
        }
        if (comp[static_cast<size_t>(arg)] < 0.0)
            for (int c = 0; c < d; ++c) comp[static_cast<size_t>(c)] = -comp[static_cast<size_t>(c)];
    }
    r.explained_variance_ratio.resize(d);
    for (int j = 0; j < d; ++j)
        r.explained_variance_ratio[static_cast<size_t>(j)] =
            trace > 0.0 ? r.eigenvalues[static_cast<size_t>(j)] / trace : 0.0;

    r.scores.assign(n, std::vector<double>(d, 0.0));
    for (size_t i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double s = 0.0;
            const auto& comp = r.components[static_cast<size_t>(j)];
            for (int c = 0; c < d; ++c)
                s += centered[i][static_cast<size_t>(c)] * comp[static_cast<size_t>(c)];
            r.scores[i][static_cast<size_t>(j)] = s;
        }
    return r;
}

/// (ratio, cumulative ratio) per component.
inline std::vector<std::pair<double, double>> pareto(const PcaResult& r) {
    std::vector<std::pair<double, double>> out;
    out.reserve(r.explained_variance_ratio.size());
    double cum = 0.0;
    for (double ratio : r.explained_variance_ratio) {
        cum += ratio;
        out.emplace_back(ratio, cum);
    }
    return out;
}

} // namespace mobility
