#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lightcd/errors.hpp"
#include "lightcd/factorization.hpp"
#include "lightcd/rng.hpp"

namespace lightcd {

struct DivConfig {
    Eigen::Index subsample_threshold = 2000;
    std::uint64_t seed = 0;
};

/// Quadratic divergence between two 1-D samples over [lo, hi]: the squared
/// distance between the empirical cdfs, integrated in closed form.
inline double div1d(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                    Bounds1D bounds) {
    detail::check_bounds(p, bounds, "p");
    detail::check_bounds(q, bounds, "q");
    const double mp = static_cast<double>(p.size());
    const double mq = static_cast<double>(q.size());
    double tpp = 0.0, tpq = 0.0, tqq = 0.0;
    for (Eigen::Index s = 0; s < p.size(); ++s) {
        tpp += (bounds.hi - p.cwiseMax(p[s]).array()).sum();
        tpq += (bounds.hi - q.cwiseMax(p[s]).array()).sum();
    }
    for (Eigen::Index s = 0; s < q.size(); ++s)
        tqq += (bounds.hi - q.cwiseMax(q[s]).array()).sum();
    return tpp / (mp * mp) - 2.0 * tpq / (mp * mq) + tqq / (mq * mq);
}

/// Two-dimensional quadratic divergence in closed form; p and q are
/// point sets with one column per coordinate.
inline double div2d(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                    Bounds1D bounds_e, Bounds1D bounds_f) {
    if (p.cols() != 2 || q.cols() != 2)
        throw DimensionMismatchError(2, p.cols() != 2 ? p.cols() : q.cols());
    detail::check_bounds(p.col(0), bounds_e, "p.e");
    detail::check_bounds(p.col(1), bounds_f, "p.f");
    detail::check_bounds(q.col(0), bounds_e, "q.e");
    detail::check_bounds(q.col(1), bounds_f, "q.f");
    const double mp = static_cast<double>(p.rows());
    const double mq = static_cast<double>(q.rows());
    double tpp = 0.0, tpq = 0.0, tqq = 0.0;
    for (Eigen::Index s = 0; s < p.rows(); ++s) {
        tpp += ((bounds_e.hi - p.col(0).cwiseMax(p(s, 0)).array()) *
                (bounds_f.hi - p.col(1).cwiseMax(p(s, 1)).array()))
                   .sum();
        tpq += ((bounds_e.hi - q.col(0).cwiseMax(p(s, 0)).array()) *
                (bounds_f.hi - q.col(1).cwiseMax(p(s, 1)).array()))
                   .sum();
    }
    for (Eigen::Index s = 0; s < q.rows(); ++s)
        tqq += ((bounds_e.hi - q.col(0).cwiseMax(q(s, 0)).array()) *
                (bounds_f.hi - q.col(1).cwiseMax(q(s, 1)).array()))
                   .sum();
    return tpp / (mp * mp) - 2.0 * tpq / (mp * mq) + tqq / (mq * mq);
}

/// k-coordinate generalization of the closed form (used by the variant
/// that scores the full joint distribution).
inline double divkd(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                    Bounds1D bounds) {
    if (p.cols() != q.cols()) throw DimensionMismatchError(p.cols(), q.cols());
    for (Eigen::Index d = 0; d < p.cols(); ++d) {
        detail::check_bounds(p.col(d), bounds, "p");
        detail::check_bounds(q.col(d), bounds, "q");
    }
    const double mp = static_cast<double>(p.rows());
    const double mq = static_cast<double>(q.rows());
    const Eigen::Index k = p.cols();
    auto pair_sum = [&](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        double total = 0.0;
        Eigen::ArrayXd acc(y.rows());
        for (Eigen::Index s = 0; s < x.rows(); ++s) {
            acc.setOnes();
            for (Eigen::Index d = 0; d < k; ++d)
                acc *= bounds.hi - y.col(d).cwiseMax(x(s, d)).array();
            total += acc.sum();
        }
        return total;
    };
    return pair_sum(p, p) / (mp * mp) - 2.0 * pair_sum(p, q) / (mp * mq) +
           pair_sum(q, q) / (mq * mq);
}

/// Rows drawn uniformly with replacement: ceil(epsilon * m) of them.
inline Eigen::MatrixXd subsample(const Eigen::MatrixXd& trans, double epsilon,
                                 std::uint64_t seed) {
    if (trans.rows() < 1) throw DegenerateWindowError("empty window");
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw ConfigError("epsilon must be in (0, 1]");
    const auto m = static_cast<std::uint64_t>(trans.rows());
    const auto count = static_cast<Eigen::Index>(
        std::ceil(epsilon * static_cast<double>(trans.rows())));
    Eigen::MatrixXd out(count, trans.cols());
    Rng rng(derive_seed(seed, "div.subsample"));
    for (Eigen::Index i = 0; i < count; ++i)
        out.row(i) = trans.row(static_cast<Eigen::Index>(rng.below(m)));
    return out;
}

/// One additive piece of the factorized score: a coefficient times the
/// divergence of the marginal over `dims`. Caches keep the fixed ref-ref
/// sum, one cross sum per test point, and one test-test row sum per test
/// point, so a slide costs O(m) per term.
struct ScoreTerm {
    std::vector<Eigen::Index> dims;
    double coeff = 0.0;
    double ref_ref = 0.0;    // raw sum over ref x ref pairs
    Eigen::VectorXd cross;   // per test point, sum over ref
    Eigen::VectorXd row;     // per test point, sum over test
};

/// Divergence between the factorized reference and test distributions,
/// maintained incrementally as the test window slides.
class DivergenceState {
public:
    /// Tree-factorized score: delta * sum of edge terms minus the weighted
    /// 1-D terms of nodes with degree > 1. A single-dimension space scores
    /// delta times its 1-D divergence.
    static DivergenceState from_tree(Eigen::MatrixXd ref, Eigen::MatrixXd test,
                                     const FactorTree& tree, double delta,
                                     Bounds1D bounds) {
        std::vector<ScoreTerm> terms;
        if (tree.k == 1) {
            terms.push_back({{0}, delta, 0.0, {}, {}});
        } else {
            for (const auto& e : tree.edges)
                terms.push_back({{e.i, e.j}, delta, 0.0, {}, {}});
            for (Eigen::Index d = 0; d < tree.k; ++d) {
                const int deg = tree.degree[static_cast<std::size_t>(d)];
                if (deg > 1)
                    terms.push_back({{d}, -static_cast<double>(deg - 1), 0.0, {}, {}});
            }
        }
        return DivergenceState(std::move(ref), std::move(test), std::move(terms),
                               delta, bounds);
    }

    /// Independence-assuming score: delta * sum of all 1-D divergences.
    static DivergenceState independent(Eigen::MatrixXd ref, Eigen::MatrixXd test,
                                       double delta, Bounds1D bounds) {
        std::vector<ScoreTerm> terms;
        for (Eigen::Index d = 0; d < ref.cols(); ++d)
            terms.push_back({{d}, delta, 0.0, {}, {}});
        return DivergenceState(std::move(ref), std::move(test), std::move(terms),
                               delta, bounds);
    }

    /// Full-joint score: one term over all coordinates, unscaled.
    static DivergenceState joint(Eigen::MatrixXd ref, Eigen::MatrixXd test,
                                 Bounds1D bounds) {
        std::vector<ScoreTerm> terms;
        std::vector<Eigen::Index> dims(static_cast<std::size_t>(ref.cols()));
        std::iota(dims.begin(), dims.end(), Eigen::Index{0});
        terms.push_back({std::move(dims), 1.0, 0.0, {}, {}});
        const double delta = bounds.hi - bounds.lo;
        return DivergenceState(std::move(ref), std::move(test), std::move(terms),
                               delta, bounds);
    }

    double score() const { return score_; }
    double delta() const { return delta_; }
    Bounds1D bounds() const { return bounds_; }
    const Eigen::MatrixXd& ref() const { return ref_; }
    Eigen::Index test_size() const { return test_.rows(); }

    Eigen::MatrixXd test_in_order() const {
        Eigen::MatrixXd out(test_.rows(), test_.cols());
        for (Eigen::Index i = 0; i < test_.rows(); ++i)
            out.row(i) = test_.row((cursor_ + i) % test_.rows());
        return out;
    }

    Eigen::VectorXd oldest_test_row() const { return test_.row(cursor_); }

    /// Slides the test window by one sample. Returns the new score, or
    /// nullopt when the added point falls outside the bounds, in which
    /// case nothing is mutated and the caller must refresh bounds and
    /// rebuild the state.
    std::optional<double> update(const Eigen::VectorXd& added) {
        if (added.size() != test_.cols())
            throw DimensionMismatchError(test_.cols(), added.size());
        for (Eigen::Index d = 0; d < added.size(); ++d)
            if (added[d] < bounds_.lo || added[d] > bounds_.hi) return std::nullopt;

        const Eigen::Index mq = test_.rows();
        Eigen::ArrayXd fresh(mq), stale(mq), against_ref(ref_.rows());
        for (auto& term : terms_) {
            fresh.setOnes();
            stale.setOnes();
            against_ref.setOnes();
            for (const Eigen::Index d : term.dims) {
                fresh *= bounds_.hi - test_.col(d).cwiseMax(added[d]).array();
                stale *= bounds_.hi - test_.col(d).cwiseMax(test_(cursor_, d)).array();
                against_ref *= bounds_.hi - ref_.col(d).cwiseMax(added[d]).array();
            }
            double self = 1.0;
            for (const Eigen::Index d : term.dims)
                self *= bounds_.hi - added[d];
            term.row += (fresh - stale).matrix();
            term.row[cursor_] = fresh.sum() - fresh[cursor_] + self;
            term.cross[cursor_] = against_ref.sum();
        }
        test_.row(cursor_) = added.transpose();
        cursor_ = (cursor_ + 1) % mq;
        recompute_score();
        return score_;
    }

    /// Spec-shaped overload: the evicted row must match the oldest test row.
    std::optional<double> update(const Eigen::VectorXd& evicted,
                                 const Eigen::VectorXd& added) {
        if (evicted.size() != test_.cols())
            throw DimensionMismatchError(test_.cols(), evicted.size());
        if ((evicted - oldest_test_row()).cwiseAbs().maxCoeff() != 0.0)
            throw InvariantViolationError(
                "evicted row does not match the oldest test row");
        return update(added);
    }

private:
    DivergenceState(Eigen::MatrixXd ref, Eigen::MatrixXd test,
                    std::vector<ScoreTerm> terms, double delta, Bounds1D bounds)
        : ref_(std::move(ref)),
          test_(std::move(test)),
          terms_(std::move(terms)),
          delta_(delta),
          bounds_(bounds) {
        if (ref_.cols() != test_.cols())
            throw DimensionMismatchError(ref_.cols(), test_.cols());
        if (delta_ < (bounds_.hi - bounds_.lo) * (1.0 - 1e-12))
            throw InvariantViolationError("delta smaller than a dimension range");
        for (Eigen::Index d = 0; d < ref_.cols(); ++d) {
            detail::check_bounds(ref_.col(d), bounds_, "ref");
            detail::check_bounds(test_.col(d), bounds_, "test");
        }
        const Eigen::Index mp = ref_.rows();
        const Eigen::Index mq = test_.rows();
        Eigen::ArrayXd acc_p(mp), acc_q(mq);
        for (auto& term : terms_) {
            term.cross.resize(mq);
            term.row.resize(mq);
            term.ref_ref = 0.0;
            for (Eigen::Index s = 0; s < mp; ++s) {
                acc_p.setOnes();
                for (const Eigen::Index d : term.dims)
                    acc_p *= bounds_.hi - ref_.col(d).cwiseMax(ref_(s, d)).array();
                term.ref_ref += acc_p.sum();
            }
            for (Eigen::Index t = 0; t < mq; ++t) {
                acc_p.setOnes();
                acc_q.setOnes();
                for (const Eigen::Index d : term.dims) {
                    acc_p *= bounds_.hi - ref_.col(d).cwiseMax(test_(t, d)).array();
                    acc_q *= bounds_.hi - test_.col(d).cwiseMax(test_(t, d)).array();
                }
                term.cross[t] = acc_p.sum();
                term.row[t] = acc_q.sum();
            }
        }
        recompute_score();
    }

    void recompute_score() {
        const double mp = static_cast<double>(ref_.rows());
        const double mq = static_cast<double>(test_.rows());
        double total = 0.0;
        for (const auto& term : terms_) {
            const double value = term.ref_ref / (mp * mp) -
                                 2.0 * term.cross.sum() / (mp * mq) +
                                 term.row.sum() / (mq * mq);
            total += term.coeff * value;
        }
        if (total < 0.0 && total >= -1e-9) total = 0.0;
        score_ = total;
    }

    Eigen::MatrixXd ref_;
    Eigen::MatrixXd test_;
    Eigen::Index cursor_ = 0;
    std::vector<ScoreTerm> terms_;
    double delta_ = 0.0;
    Bounds1D bounds_;
    double score_ = 0.0;
};

/// Factorized score of two transformed windows over a tree, with the
/// state needed for incremental maintenance.
inline std::pair<double, DivergenceState> score(const Eigen::MatrixXd& ref_trans,
                                                const Eigen::MatrixXd& test_trans,
                                                const FactorTree& tree, double delta,
                                                Bounds1D bounds) {
    DivergenceState state =
        DivergenceState::from_tree(ref_trans, test_trans, tree, delta, bounds);
    return {state.score(), std::move(state)};
}

}  // namespace lightcd
