#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "lightcd/errors.hpp"
#include "lightcd/rng.hpp"

namespace lightcd {

struct Bounds1D {
    double lo = 0.0;
    double hi = 0.0;
};

struct SketchConfig {
    int s1 = 50;
    int s2 = 3;
    bool exact = false;
    std::uint64_t seed = 0;

    int vectors() const { return s1 * s2; }
    void validate() const {
        if (s1 < 1 || s2 < 1) throw ConfigError("factor.s1 and factor.s2 must be >= 1");
    }
};

/// Pre-generated Rademacher vector pairs, reused for every dimension and
/// every pair so that sketch products estimate inner products.
class SketchBasis {
public:
    SketchBasis(Eigen::Index m, int s1, int s2, std::uint64_t seed)
        : m_(m), s1_(s1), s2_(s2) {
        const int total = s1 * s2;
        u_.resize(m, total);
        w_.resize(m, total);
        Rng rng(derive_seed(seed, "sketch.basis"));
        for (int l = 0; l < total; ++l) {
            for (Eigen::Index s = 0; s < m; ++s) u_(s, l) = rng.sign();
            for (Eigen::Index s = 0; s < m; ++s) w_(s, l) = rng.sign();
        }
        u_mean_ = u_.colwise().mean();
        w_mean_ = w_.colwise().mean();
    }

    Eigen::Index m() const { return m_; }
    int s1() const { return s1_; }
    int s2() const { return s2_; }
    int vectors() const { return s1_ * s2_; }
    const Eigen::MatrixXd& u() const { return u_; }
    const Eigen::MatrixXd& w() const { return w_; }
    const Eigen::RowVectorXd& u_mean() const { return u_mean_; }
    const Eigen::RowVectorXd& w_mean() const { return w_mean_; }

private:
    Eigen::Index m_;
    int s1_, s2_;
    Eigen::MatrixXd u_, w_;  // m x (s1*s2), entries +-1
    Eigen::RowVectorXd u_mean_, w_mean_;
};

namespace detail {

inline void check_bounds(const Eigen::VectorXd& v, Bounds1D b, const char* name) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v[i] < b.lo || v[i] > b.hi)
            throw OutOfBoundsError(std::string(name) + "[" + std::to_string(i) +
                                   "]=" + std::to_string(v[i]) + " outside [" +
                                   std::to_string(b.lo) + ", " + std::to_string(b.hi) +
                                   "]");
}

/// Row sums of Delta[s,t] = |x_s - x_t| / 2, via sorted prefix sums.
inline Eigen::VectorXd abs_diff_row_sums(const Eigen::VectorXd& x,
                                         const std::vector<Eigen::Index>& order) {
    const Eigen::Index m = x.size();
    Eigen::VectorXd rho(m);
    double prefix = 0.0;
    double total = x.sum();
    for (Eigen::Index p = 0; p < m; ++p) {
        const double v = x[order[static_cast<std::size_t>(p)]];
        prefix += v;
        const double cnt_le = static_cast<double>(p + 1);
        const double sum_gt = total - prefix;
        const double cnt_gt = static_cast<double>(m - p - 1);
        rho[order[static_cast<std::size_t>(p)]] =
            0.5 * (v * cnt_le - prefix + sum_gt - v * cnt_gt);
    }
    return rho;
}

}  // namespace detail

/// Per-dimension sketch state: exact row sums of the absolute-difference
/// kernel, the exact squared norm of its double-centered form, and one
/// sketch value per basis vector pair.
struct DimensionProfile {
    Eigen::VectorXd rho;       // row sums of Delta
    double delta_sum = 0.0;    // sum of Delta entries
    double norm2 = 0.0;        // ||H Delta H||_F^2, exact
    Eigen::VectorXd sketch;    // one value per vector pair (empty on exact path)
};

/// Builds the profile of one dimension; the basis may be null when only
/// the exact quantities are needed.
inline DimensionProfile profile_dimension(const Eigen::VectorXd& x,
                                          const SketchBasis* basis) {
    const Eigen::Index m = x.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return x[a] < x[b]; });

    DimensionProfile prof;
    prof.rho = detail::abs_diff_row_sums(x, order);
    prof.delta_sum = prof.rho.sum();
    const double sum = x.sum();
    const double sq_sum = x.squaredNorm();
    const double dm = static_cast<double>(m);
    const double delta_sq = (dm * sq_sum - sum * sum) / 2.0;
    prof.norm2 = delta_sq - 2.0 / dm * prof.rho.squaredNorm() +
                 prof.delta_sum * prof.delta_sum / (dm * dm);

    if (basis == nullptr) return prof;
    const int total = basis->vectors();
    prof.sketch.resize(total);
    Eigen::VectorXd xs(m);
    for (Eigen::Index p = 0; p < m; ++p) xs[p] = x[order[static_cast<std::size_t>(p)]];
    Eigen::VectorXd us(m), ws(m);
    for (int l = 0; l < total; ++l) {
        const double umean = basis->u_mean()[l];
        const double wmean = basis->w_mean()[l];
        for (Eigen::Index p = 0; p < m; ++p) {
            const Eigen::Index s = order[static_cast<std::size_t>(p)];
            us[p] = basis->u()(s, l) - umean;
            ws[p] = basis->w()(s, l) - wmean;
        }
        // g[p] = sum_t w~_t |xs_p - x_t| / 2 via prefix sums in sorted order
        double pw = 0.0, pwx = 0.0;
        const double tw = ws.sum();
        const double twx = ws.dot(xs);
        double acc = 0.0;
        for (Eigen::Index p = 0; p < m; ++p) {
            pw += ws[p];
            pwx += ws[p] * xs[p];
            const double g =
                0.5 * (xs[p] * pw - pwx + (twx - pwx) - xs[p] * (tw - pw));
            acc += us[p] * g;
        }
        prof.sketch[l] = acc;
    }
    return prof;
}

/// Exact quadratic dependency of two dimensions over the given bounds:
/// the squared distance between the joint empirical cdf and the product of
/// the marginal cdfs, integrated over the box. O(m^2).
inline double dependency_exact(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               Bounds1D bounds_a, Bounds1D bounds_b) {
    if (a.size() != b.size()) throw DimensionMismatchError(a.size(), b.size());
    if (a.size() < 1) throw DegenerateWindowError("empty dimension");
    detail::check_bounds(a, bounds_a, "a");
    detail::check_bounds(b, bounds_b, "b");

    const Eigen::Index m = a.size();
    const double dm = static_cast<double>(m);
    double t1 = 0.0;
    for (Eigen::Index s = 0; s < m; ++s) {
        double row = 0.0;
        for (Eigen::Index t = 0; t < m; ++t)
            row += (bounds_a.hi - std::max(a[s], a[t])) *
                   (bounds_b.hi - std::max(b[s], b[t]));
        t1 += row;
    }

    // row sums R[s] = sum_t (hi - max(x_s, x_t)) from the |difference| kernel
    std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto row_sums = [&](const Eigen::VectorXd& x, double hi) {
        std::sort(order.begin(), order.end(),
                  [&](Eigen::Index p, Eigen::Index q) { return x[p] < x[q]; });
        Eigen::VectorXd rho = detail::abs_diff_row_sums(x, order);
        Eigen::VectorXd r(m);
        const double sum = x.sum();
        for (Eigen::Index s = 0; s < m; ++s)
            r[s] = dm * hi - (dm * x[s] + sum) / 2.0 - rho[s];
        return r;
    };
    Eigen::VectorXd ra = row_sums(a, bounds_a.hi);
    Eigen::VectorXd rb = row_sums(b, bounds_b.hi);

    const double t2 = ra.dot(rb);
    const double t3 = ra.sum() * rb.sum();
    return t1 / (dm * dm) - 2.0 * t2 / (dm * dm * dm) + t3 / (dm * dm * dm * dm);
}

/// Sketch estimate of the dependency from two dimension profiles.
///
/// Within each of the s2 groups the mean of the s1 sketch products is
/// improved by regressing out the products' correlation with the per-dim
/// squared sketch values, whose expectations (norm2) are known exactly;
/// the group estimates are combined by median. With s1 = s2 = 1 this
/// reduces to the plain unbiased product.
inline double dependency_from_profiles(const DimensionProfile& pi,
                                       const DimensionProfile& pj, int s1, int s2,
                                       Eigen::Index m) {
    const double dm = static_cast<double>(m);
    std::vector<double> groups;
    groups.reserve(static_cast<std::size_t>(s2));
    for (int g = 0; g < s2; ++g) {
        const int base = g * s1;
        double ybar = 0.0, x1bar = 0.0, x2bar = 0.0;
        for (int l = 0; l < s1; ++l) {
            const double vi = pi.sketch[base + l];
            const double vj = pj.sketch[base + l];
            ybar += vi * vj;
            x1bar += vi * vi - pi.norm2;
            x2bar += vj * vj - pj.norm2;
        }
        ybar /= s1;
        x1bar /= s1;
        x2bar /= s1;
        double estimate = ybar;
        if (s1 >= 8) {
            double s11 = 0.0, s12 = 0.0, s22 = 0.0, sy1 = 0.0, sy2 = 0.0;
            for (int l = 0; l < s1; ++l) {
                const double vi = pi.sketch[base + l];
                const double vj = pj.sketch[base + l];
                const double x1 = vi * vi - pi.norm2 - x1bar;
                const double x2 = vj * vj - pj.norm2 - x2bar;
                const double y = vi * vj - ybar;
                s11 += x1 * x1;
                s12 += x1 * x2;
                s22 += x2 * x2;
                sy1 += x1 * y;
                sy2 += x2 * y;
            }
            const double det = s11 * s22 - s12 * s12;
            if (det > 1e-12 * s11 * s22 && s11 > 0.0 && s22 > 0.0) {
                const double b1 = (s22 * sy1 - s12 * sy2) / det;
                const double b2 = (s11 * sy2 - s12 * sy1) / det;
                estimate = ybar - b1 * x1bar - b2 * x2bar;
            }
        }
        groups.push_back(estimate);
    }
    auto mid = groups.begin() + groups.size() / 2;
    std::nth_element(groups.begin(), mid, groups.end());
    double med = *mid;
    if (groups.size() % 2 == 0) {
        auto lower = std::max_element(groups.begin(), mid);
        med = (med + *lower) / 2.0;
    }
    return med / (dm * dm);
}

/// Sketch estimate of dependency_exact; deterministic for a fixed basis.
inline double dependency_sketch(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                Bounds1D bounds_a, Bounds1D bounds_b,
                                const SketchBasis& basis) {
    if (a.size() != b.size()) throw DimensionMismatchError(a.size(), b.size());
    if (a.size() != basis.m()) throw DimensionMismatchError(basis.m(), a.size());
    detail::check_bounds(a, bounds_a, "a");
    detail::check_bounds(b, bounds_b, "b");
    DimensionProfile pa = profile_dimension(a, &basis);
    DimensionProfile pb = profile_dimension(b, &basis);
    return dependency_from_profiles(pa, pb, basis.s1(), basis.s2(), a.size());
}

/// Maximum spanning tree over the transformed dimensions. Edges carry their
/// dependency weight; degree is per node.
struct FactorTree {
    struct Edge {
        int i = 0;
        int j = 0;
        double weight = 0.0;
    };

    Eigen::Index k = 0;
    std::vector<Edge> edges;
    std::vector<int> degree;
};

/// Dense-graph maximum spanning tree (Prim), O(k^2). Ties prefer the
/// lexicographically smallest (i, j) pair.
inline FactorTree build_tree(const Eigen::MatrixXd& weights) {
    const Eigen::Index k = weights.rows();
    if (weights.cols() != k) throw DimensionMismatchError(k, weights.cols());
    FactorTree tree;
    tree.k = k;
    tree.degree.assign(static_cast<std::size_t>(k), 0);
    if (k < 2) return tree;

    std::vector<bool> in_tree(static_cast<std::size_t>(k), false);
    std::vector<double> key(static_cast<std::size_t>(k));
    std::vector<int> parent(static_cast<std::size_t>(k), 0);
    in_tree[0] = true;
    for (Eigen::Index v = 1; v < k; ++v) key[static_cast<std::size_t>(v)] = weights(0, v);

    for (Eigen::Index round = 1; round < k; ++round) {
        int best = -1;
        for (Eigen::Index v = 0; v < k; ++v) {
            if (in_tree[static_cast<std::size_t>(v)]) continue;
            if (best < 0 || key[static_cast<std::size_t>(v)] > key[static_cast<std::size_t>(best)])
                best = static_cast<int>(v);
        }
        in_tree[static_cast<std::size_t>(best)] = true;
        const int p = parent[static_cast<std::size_t>(best)];
        FactorTree::Edge e;
        e.i = std::min(p, best);
        e.j = std::max(p, best);
        e.weight = key[static_cast<std::size_t>(best)];
        tree.edges.push_back(e);
        ++tree.degree[static_cast<std::size_t>(e.i)];
        ++tree.degree[static_cast<std::size_t>(e.j)];
        for (Eigen::Index v = 0; v < k; ++v) {
            if (in_tree[static_cast<std::size_t>(v)]) continue;
            const double w = weights(best, v);
            if (w > key[static_cast<std::size_t>(v)] ||
                (w == key[static_cast<std::size_t>(v)] &&
                 best < parent[static_cast<std::size_t>(v)])) {
                key[static_cast<std::size_t>(v)] = w;
                parent[static_cast<std::size_t>(v)] = best;
            }
        }
    }
    std::sort(tree.edges.begin(), tree.edges.end(),
              [](const FactorTree::Edge& a, const FactorTree::Edge& b) {
                  return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    return tree;
}

/// Pairwise dependency weights of all transformed dimensions, then the
/// maximum spanning tree. All dimensions share the bounds [-r, r].
inline FactorTree build_structure(const Eigen::MatrixXd& trans, double r,
                                  const SketchConfig& cfg,
                                  const SketchBasis* basis) {
    cfg.validate();
    const Eigen::Index k = trans.cols();
    const Eigen::Index m = trans.rows();
    const Bounds1D bounds{-r, r};
    if (k == 1) {
        FactorTree tree;
        tree.k = 1;
        tree.degree = {0};
        return tree;
    }
    for (Eigen::Index d = 0; d < k; ++d)
        detail::check_bounds(trans.col(d), bounds, "trans");

    Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(k, k);
    if (cfg.exact || basis == nullptr) {
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i + 1; j < k; ++j) {
                const double w =
                    dependency_exact(trans.col(i), trans.col(j), bounds, bounds);
                weights(i, j) = w;
                weights(j, i) = w;
            }
    } else {
        if (basis->m() != m) throw DimensionMismatchError(m, basis->m());
        std::vector<DimensionProfile> profiles;
        profiles.reserve(static_cast<std::size_t>(k));
        for (Eigen::Index d = 0; d < k; ++d)
            profiles.push_back(profile_dimension(trans.col(d), basis));
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = i + 1; j < k; ++j) {
                const double w = dependency_from_profiles(
                    profiles[static_cast<std::size_t>(i)],
                    profiles[static_cast<std::size_t>(j)], cfg.s1, cfg.s2, m);
                weights(i, j) = w;
                weights(j, i) = w;
            }
    }
    return build_tree(weights);
}

}  // namespace lightcd
