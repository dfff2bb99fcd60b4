#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "lightcd/errors.hpp"
#include "lightcd/rng.hpp"

namespace lightcd {

struct PcaConfig {
    Eigen::Index c = 200;
    double variance_fraction = 0.90;
    bool deterministic = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (c < 1) throw ConfigError("pca.c must be >= 1");
        if (!(variance_fraction > 0.0 && variance_fraction <= 1.0))
            throw ConfigError("pca.variance_fraction must be in (0, 1]");
    }
};

/// Projection fitted on one reference window: column means for centering,
/// the sampled column set, the n-by-k right factor, and the bound R on the
/// magnitude of any projected coordinate.
struct ProjectionModel {
    Eigen::VectorXd col_means;                // length n
    std::vector<Eigen::Index> selected_cols;  // length c, ascending
    Eigen::MatrixXd v_k;                      // n x k
    Eigen::VectorXd singular_values;          // length k, non-increasing
    Eigen::Index k = 0;
    Eigen::Index c = 0;
    double variance_fraction = 0.0;
    double r_bound = 0.0;
};

/// Subtracts per-column means; returns the centered matrix and the means.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> center_columns(
    const Eigen::MatrixXd& window) {
    if (window.rows() == 0)
        throw DegenerateWindowError("cannot center an empty window");
    Eigen::VectorXd means = window.colwise().mean();
    Eigen::MatrixXd centered = window.rowwise() - means.transpose();
    return {std::move(centered), std::move(means)};
}

/// Magnitude bound on any projection of a centered row:
/// sqrt(sum_j max(lo_j^2, hi_j^2)) over the centered columns.
inline double r_bound_from_centered(const Eigen::MatrixXd& centered) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < centered.cols(); ++j) {
        const double lo = centered.col(j).minCoeff();
        const double hi = centered.col(j).maxCoeff();
        sum += std::max(lo * lo, hi * hi);
    }
    return std::sqrt(sum);
}

/// Indices of the c columns with largest squared norm, ties broken by the
/// lower column index; output sorted ascending.
inline std::vector<Eigen::Index> select_columns(const Eigen::MatrixXd& centered,
                                                Eigen::Index c) {
    const Eigen::Index n = centered.cols();
    if (c < 1 || c > n)
        throw ConfigError("column count c=" + std::to_string(c) +
                          " outside [1, n=" + std::to_string(n) + "]");
    Eigen::VectorXd norms = centered.colwise().squaredNorm();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::partial_sort(idx.begin(), idx.begin() + c, idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          if (norms[a] != norms[b]) return norms[a] > norms[b];
                          return a < b;
                      });
    idx.resize(static_cast<std::size_t>(c));
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Stochastic variant: samples c columns with replacement, each drawn with
/// probability proportional to its squared norm.
inline std::vector<Eigen::Index> select_columns_sampled(
    const Eigen::MatrixXd& centered, Eigen::Index c, Rng& rng) {
    const Eigen::Index n = centered.cols();
    if (c < 1 || c > n)
        throw ConfigError("column count c=" + std::to_string(c) +
                          " outside [1, n=" + std::to_string(n) + "]");
    Eigen::VectorXd norms = centered.colwise().squaredNorm();
    const double total = norms.sum();
    if (total <= 0.0)
        throw DegenerateWindowError("all columns have zero variance");
    std::vector<double> cumulative(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        acc += norms[j];
        cumulative[static_cast<std::size_t>(j)] = acc;
    }
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(c));
    for (Eigen::Index draw = 0; draw < c; ++draw) {
        const double u = rng.uniform() * total;
        const auto it =
            std::upper_bound(cumulative.begin(), cumulative.end(), u);
        idx.push_back(static_cast<Eigen::Index>(it - cumulative.begin()));
    }
    std::sort(idx.begin(), idx.end());
    return idx;
}

struct FitResult {
    ProjectionModel model;
    Eigen::MatrixXd ref_trans;  // m x k
};

/// Fits the projection on a centered reference window: eigendecomposition
/// of the c-by-c Gram matrix of the sampled columns, k chosen as the
/// smallest eigenvalue count reaching variance_fraction of the total mass.
/// Throws DegenerateWindowError when no usable eigenvalue remains.
inline FitResult fit(const Eigen::MatrixXd& centered, const PcaConfig& cfg) {
    cfg.validate();
    const Eigen::Index m = centered.rows();
    const Eigen::Index n = centered.cols();
    if (m < 1) throw DegenerateWindowError("empty window");
    const Eigen::Index c = std::min({cfg.c, m, n});

    std::vector<Eigen::Index> cols;
    if (cfg.deterministic) {
        cols = select_columns(centered, c);
    } else {
        Rng rng(derive_seed(cfg.seed, "pca.columns"));
        cols = select_columns_sampled(centered, c, rng);
    }

    Eigen::MatrixXd sampled(m, c);
    for (Eigen::Index j = 0; j < c; ++j)
        sampled.col(j) = centered.col(cols[static_cast<std::size_t>(j)]);

    Eigen::MatrixXd gram = sampled.transpose() * sampled;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
        throw DegenerateWindowError("eigendecomposition failed");

    // eigenvalues ascending; walk from the top, dropping near-zero ones
    const Eigen::VectorXd& evals = solver.eigenvalues();
    const double top = evals[c - 1];
    if (!(top > 0.0))
        throw DegenerateWindowError("window has no variance along any column");
    const double drop = 1e-10 * top;
    Eigen::Index usable = 0;
    double total_mass = 0.0;
    for (Eigen::Index i = 0; i < c; ++i) {
        if (evals[i] > 0.0) total_mass += evals[i];
        if (evals[i] > drop) ++usable;
    }

    double kept = 0.0;
    Eigen::Index k = 0;
    const double target = cfg.variance_fraction * total_mass;
    for (Eigen::Index i = 0; i < usable; ++i) {
        kept += evals[c - 1 - i];
        k = i + 1;
        if (kept >= target - 1e-12 * total_mass) break;
    }

    ProjectionModel model;
    model.selected_cols = std::move(cols);
    model.k = k;
    model.c = c;
    model.variance_fraction = cfg.variance_fraction;
    model.singular_values.resize(k);
    Eigen::MatrixXd u_k(m, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const double alpha = evals[c - 1 - i];
        model.singular_values[i] = std::sqrt(alpha);
        u_k.col(i) = sampled * solver.eigenvectors().col(c - 1 - i) /
                     model.singular_values[i];
    }

    FitResult out;
    out.ref_trans = u_k * model.singular_values.asDiagonal();
    model.v_k = centered.transpose() * u_k *
                model.singular_values.cwiseInverse().asDiagonal();
    model.col_means = Eigen::VectorXd::Zero(n);  // caller overwrites with means
    model.r_bound = r_bound_from_centered(centered);
    out.model = std::move(model);
    return out;
}

/// Centers a raw window, fits, and stores the means in the model.
/// A window whose every column is constant is reported as degenerate.
inline FitResult fit_window(const Eigen::MatrixXd& window, const PcaConfig& cfg) {
    bool all_constant = true;
    for (Eigen::Index j = 0; j < window.cols() && all_constant; ++j)
        all_constant = window.col(j).minCoeff() == window.col(j).maxCoeff();
    if (window.rows() == 0 || all_constant)
        throw DegenerateWindowError("reference window is constant");
    auto [centered, means] = center_columns(window);
    FitResult result = fit(centered, cfg);
    result.model.col_means = std::move(means);
    return result;
}

/// Maps a raw window through the fitted model: (window - col_means) * V_k.
inline Eigen::MatrixXd transform(const ProjectionModel& model,
                                 const Eigen::MatrixXd& window) {
    if (window.cols() != model.v_k.rows())
        throw DimensionMismatchError(model.v_k.rows(), window.cols());
    return (window.rowwise() - model.col_means.transpose()) * model.v_k;
}

inline Eigen::VectorXd transform_row(const ProjectionModel& model,
                                     const Eigen::VectorXd& row) {
    if (row.size() != model.v_k.rows())
        throw DimensionMismatchError(model.v_k.rows(), row.size());
    return model.v_k.transpose() * (row - model.col_means);
}

}  // namespace lightcd
