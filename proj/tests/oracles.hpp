// Independent brute-force oracles used only by tests: a hand-rolled Jacobi
// eigensolver, direct numeric integration of the defining integrals on the
// data-induced grid, spanning-tree enumeration, and discrete KL.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace oracle {

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigendecomposition of a symmetric matrix.
// Returns eigenvalues (descending) and matching eigenvectors as columns.
inline void jacobi_eigen(std::vector<std::vector<double>> a,
                         std::vector<double>& eigenvalues,
                         std::vector<std::vector<double>>& eigenvectors) {
    const std::size_t n = a.size();
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i][p], aiq = a[i][q];
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p][i], aqi = a[q][i];
                    a[p][i] = c * api - s * aqi;
                    a[q][i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v[i][p], viq = v[i][q];
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
    eigenvalues.resize(n);
    eigenvectors.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t r = 0; r < n; ++r) {
        eigenvalues[r] = a[order[r]][order[r]];
        for (std::size_t i = 0; i < n; ++i) eigenvectors[i][r] = v[i][order[r]];
    }
}

/// Exact-PCA projection oracle: eigendecomposition of A^T A by Jacobi,
/// projection onto the k leading eigenvectors.
inline Eigen::MatrixXd exact_pca_projection(const Eigen::MatrixXd& centered,
                                            Eigen::Index k) {
    const auto n = static_cast<std::size_t>(centered.cols());
    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i][j] = centered.col(static_cast<Eigen::Index>(i))
                             .dot(centered.col(static_cast<Eigen::Index>(j)));
    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    jacobi_eigen(gram, evals, evecs);
    Eigen::MatrixXd vk(centered.cols(), k);
    for (Eigen::Index j = 0; j < k; ++j)
        for (Eigen::Index i = 0; i < centered.cols(); ++i)
            vk(i, j) = evecs[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return centered * vk;
}

inline std::vector<double> exact_gram_eigenvalues(const Eigen::MatrixXd& mat) {
    const auto n = static_cast<std::size_t>(mat.cols());
    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            gram[i][j] = mat.col(static_cast<Eigen::Index>(i))
                             .dot(mat.col(static_cast<Eigen::Index>(j)));
    std::vector<double> evals;
    std::vector<std::vector<double>> evecs;
    jacobi_eigen(gram, evals, evecs);
    return evals;
}

// ---------------------------------------------------------------------------
// Numeric integration of the defining integrals over the grid induced by
// the data values (the integrands are constant between consecutive knots).

inline std::vector<double> knots(std::initializer_list<const Eigen::VectorXd*> vs,
                                 double lo, double hi) {
    std::vector<double> k;
    k.push_back(lo);
    for (const auto* v : vs)
        for (Eigen::Index i = 0; i < v->size(); ++i) k.push_back((*v)[i]);
    k.push_back(hi);
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
}

inline double cdf(const Eigen::VectorXd& x, double y) {
    double count = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] <= y) count += 1.0;
    return count / static_cast<double>(x.size());
}

inline double joint_cdf(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                        double ya, double yb) {
    double count = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        if (a[i] <= ya && b[i] <= yb) count += 1.0;
    return count / static_cast<double>(a.size());
}

/// integral over [lo,hi]^2 of (P(ya,yb) - P(ya)P(yb))^2
inline double corr_integral(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                            double lo_a, double hi_a, double lo_b, double hi_b) {
    const auto ka = knots({&a}, lo_a, hi_a);
    const auto kb = knots({&b}, lo_b, hi_b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ka.size(); ++i) {
        const double wa = ka[i + 1] - ka[i];
        if (wa <= 0.0) continue;
        for (std::size_t j = 0; j + 1 < kb.size(); ++j) {
            const double wb = kb[j + 1] - kb[j];
            if (wb <= 0.0) continue;
            const double pj = joint_cdf(a, b, ka[i], kb[j]);
            const double d = pj - cdf(a, ka[i]) * cdf(b, kb[j]);
            total += wa * wb * d * d;
        }
    }
    return total;
}

/// integral over [lo,hi] of (P(y) - Q(y))^2
inline double div1d_integral(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                             double lo, double hi) {
    const auto k = knots({&p, &q}, lo, hi);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < k.size(); ++i) {
        const double w = k[i + 1] - k[i];
        const double d = cdf(p, k[i]) - cdf(q, k[i]);
        total += w * d * d;
    }
    return total;
}

/// integral over the box of (P(ya,yb) - Q(ya,yb))^2
inline double div2d_integral(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                             double lo_a, double hi_a, double lo_b, double hi_b) {
    const Eigen::VectorXd pa = p.col(0), pb = p.col(1);
    const Eigen::VectorXd qa = q.col(0), qb = q.col(1);
    const auto ka = knots({&pa, &qa}, lo_a, hi_a);
    const auto kb = knots({&pb, &qb}, lo_b, hi_b);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < ka.size(); ++i) {
        const double wa = ka[i + 1] - ka[i];
        if (wa <= 0.0) continue;
        for (std::size_t j = 0; j + 1 < kb.size(); ++j) {
            const double wb = kb[j + 1] - kb[j];
            if (wb <= 0.0) continue;
            const double d = joint_cdf(pa, pb, ka[i], kb[j]) -
                             joint_cdf(qa, qb, ka[i], kb[j]);
            total += wa * wb * d * d;
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// Maximum spanning tree by enumeration of all Pruefer sequences.

inline std::vector<std::pair<int, int>> decode_pruefer(const std::vector<int>& seq,
                                                       int k) {
    std::vector<int> degree(static_cast<std::size_t>(k), 1);
    for (const int s : seq) ++degree[static_cast<std::size_t>(s)];
    std::vector<std::pair<int, int>> edges;
    std::vector<bool> used(static_cast<std::size_t>(k), false);
    for (const int s : seq) {
        for (int leaf = 0; leaf < k; ++leaf) {
            if (degree[static_cast<std::size_t>(leaf)] == 1 &&
                !used[static_cast<std::size_t>(leaf)]) {
                edges.emplace_back(std::min(leaf, s), std::max(leaf, s));
                used[static_cast<std::size_t>(leaf)] = true;
                --degree[static_cast<std::size_t>(s)];
                break;
            }
        }
    }
    int a = -1, b = -1;
    for (int i = 0; i < k; ++i) {
        if (used[static_cast<std::size_t>(i)] ||
            degree[static_cast<std::size_t>(i)] != 1)
            continue;
        (a < 0 ? a : b) = i;
    }
    edges.emplace_back(a, b);
    return edges;
}

inline double max_spanning_tree_weight(const Eigen::MatrixXd& weights) {
    const int k = static_cast<int>(weights.rows());
    if (k == 2) return weights(0, 1);
    std::vector<int> seq(static_cast<std::size_t>(k - 2), 0);
    double best = -1e300;
    while (true) {
        const auto edges = decode_pruefer(seq, k);
        double total = 0.0;
        for (const auto& [i, j] : edges) total += weights(i, j);
        best = std::max(best, total);
        int pos = 0;
        while (pos < k - 2 && seq[static_cast<std::size_t>(pos)] == k - 1) {
            seq[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == k - 2) break;
        ++seq[static_cast<std::size_t>(pos)];
    }
    return best;
}

// ---------------------------------------------------------------------------
// Discrete tree-factorized distributions and their KL divergence.

struct DiscreteTree {
    int vars = 0;
    std::vector<int> states;                   // per variable
    std::vector<std::pair<int, int>> edges;    // tree edges (parent, child)
    std::vector<int> degree;
};

/// Joint table of a Markov distribution over the tree: a root marginal and
/// one conditional table per edge, expanded over all state tuples.
struct TreeDistribution {
    std::vector<double> joint;  // indexed by mixed-radix tuple
};

inline int tuple_count(const DiscreteTree& t) {
    int n = 1;
    for (const int s : t.states) n *= s;
    return n;
}

inline int tuple_state(const DiscreteTree& t, int index, int var) {
    for (int v = 0; v < var; ++v) index /= t.states[static_cast<std::size_t>(v)];
    return index % t.states[static_cast<std::size_t>(var)];
}

template <typename Uniform>
inline TreeDistribution random_tree_distribution(const DiscreteTree& tree,
                                                 Uniform&& uniform) {
    // root marginal and per-edge conditionals, floored away from zero
    const auto draw_row = [&](int states) {
        std::vector<double> row(static_cast<std::size_t>(states));
        double sum = 0.0;
        for (auto& x : row) {
            x = 0.1 + uniform();
            sum += x;
        }
        for (auto& x : row) x /= sum;
        return row;
    };
    const std::vector<double> root = draw_row(tree.states[0]);
    std::vector<std::vector<std::vector<double>>> cond;
    for (const auto& [u, c] : tree.edges) {
        std::vector<std::vector<double>> table;
        for (int su = 0; su < tree.states[static_cast<std::size_t>(u)]; ++su)
            table.push_back(draw_row(tree.states[static_cast<std::size_t>(c)]));
        cond.push_back(std::move(table));
    }

    TreeDistribution dist;
    const int total = tuple_count(tree);
    dist.joint.resize(static_cast<std::size_t>(total));
    for (int idx = 0; idx < total; ++idx) {
        double p = root[static_cast<std::size_t>(tuple_state(tree, idx, 0))];
        for (std::size_t e = 0; e < tree.edges.size(); ++e) {
            const auto [u, c] = tree.edges[e];
            p *= cond[e][static_cast<std::size_t>(tuple_state(tree, idx, u))]
                        [static_cast<std::size_t>(tuple_state(tree, idx, c))];
        }
        dist.joint[static_cast<std::size_t>(idx)] = p;
    }
    return dist;
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) total += p[i] * std::log(p[i] / q[i]);
    return total;
}

inline std::vector<double> marginal(const DiscreteTree& t,
                                    const TreeDistribution& d,
                                    std::vector<int> vars) {
    int size = 1;
    for (const int v : vars) size *= t.states[static_cast<std::size_t>(v)];
    std::vector<double> out(static_cast<std::size_t>(size), 0.0);
    const int total = tuple_count(t);
    for (int idx = 0; idx < total; ++idx) {
        int key = 0, mult = 1;
        for (const int v : vars) {
            key += tuple_state(t, idx, v) * mult;
            mult *= t.states[static_cast<std::size_t>(v)];
        }
        out[static_cast<std::size_t>(key)] += d.joint[static_cast<std::size_t>(idx)];
    }
    return out;
}

}  // namespace oracle
