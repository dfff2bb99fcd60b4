#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "lightcd/errors.hpp"

namespace lightcd {

enum class BoundsSource { configured, inferred };

/// Per-dimension domain of the raw series: n and the [lower, upper] box
/// every sample is expected to live in.
struct SeriesMeta {
    Eigen::Index n = 0;
    Eigen::VectorXd lower_bounds;
    Eigen::VectorXd upper_bounds;
    BoundsSource bounds_source = BoundsSource::inferred;

    void validate() const {
        if (n < 1) throw ConfigError("series dimension must be >= 1");
        if (lower_bounds.size() != n || upper_bounds.size() != n)
            throw DimensionMismatchError(n, lower_bounds.size());
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(lower_bounds[i] <= upper_bounds[i]))
                throw ConfigError("lower bound exceeds upper bound at dimension " +
                                  std::to_string(i));
    }
};

/// One time instant of the stream.
struct Sample {
    std::int64_t t = 0;
    Eigen::VectorXd values;
};

/// Column-wise min/max of a window; bounds_source is marked inferred.
inline SeriesMeta infer_bounds(const Eigen::MatrixXd& window) {
    if (window.rows() == 0 || window.cols() == 0)
        throw DegenerateWindowError("cannot infer bounds from an empty window");
    SeriesMeta meta;
    meta.n = window.cols();
    meta.lower_bounds = window.colwise().minCoeff();
    meta.upper_bounds = window.colwise().maxCoeff();
    meta.bounds_source = BoundsSource::inferred;
    return meta;
}

/// Fixed reference window plus a ring-buffered test window of the m most
/// recent samples. The reference never changes within an epoch; the test
/// window slides one row per push.
class WindowPair {
public:
    WindowPair(Eigen::MatrixXd ref, Eigen::MatrixXd test, std::int64_t t_start,
               std::int64_t next_t)
        : ref_(std::move(ref)),
          test_(std::move(test)),
          t_start_(t_start),
          next_t_(next_t) {
        if (ref_.rows() != test_.rows() || ref_.cols() != test_.cols())
            throw DimensionMismatchError(ref_.cols(), test_.cols());
    }

    Eigen::Index size() const { return ref_.rows(); }
    Eigen::Index dims() const { return ref_.cols(); }
    std::int64_t t_start() const { return t_start_; }
    std::int64_t next_t() const { return next_t_; }

    const Eigen::MatrixXd& ref() const { return ref_; }

    /// Test row in logical order: 0 is the oldest, m-1 the newest.
    Eigen::MatrixXd::ConstRowXpr test_row(Eigen::Index i) const {
        return test_.row((cursor_ + i) % size());
    }

    Eigen::MatrixXd test_in_order() const {
        Eigen::MatrixXd out(size(), dims());
        for (Eigen::Index i = 0; i < size(); ++i) out.row(i) = test_row(i);
        return out;
    }

    /// Replaces the oldest test row with s and returns the evicted row.
    Eigen::VectorXd push(const Sample& s) {
        if (s.values.size() != dims())
            throw DimensionMismatchError(dims(), s.values.size());
        if (s.t != next_t_)
            throw InvariantViolationError("expected sample t=" +
                                          std::to_string(next_t_) + ", got t=" +
                                          std::to_string(s.t));
        Eigen::VectorXd evicted = test_.row(cursor_);
        test_.row(cursor_) = s.values.transpose();
        cursor_ = (cursor_ + 1) % size();
        ++next_t_;
        return evicted;
    }

private:
    Eigen::MatrixXd ref_;
    Eigen::MatrixXd test_;
    Eigen::Index cursor_ = 0;
    std::int64_t t_start_;
    std::int64_t next_t_;
};

}  // namespace lightcd
