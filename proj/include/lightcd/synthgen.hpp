#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lightcd/errors.hpp"
#include "lightcd/rng.hpp"

namespace lightcd {

enum class Family { gaussian, linear, nonlinear };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::gaussian: return "gaussian";
        case Family::linear: return "linear";
        case Family::nonlinear: return "nonlinear";
    }
    return "gaussian";
}

inline Family family_from_name(const std::string& name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "linear") return Family::linear;
    if (name == "nonlinear") return Family::nonlinear;
    throw ConfigError("unknown family '" + name + "'");
}

struct GenSpec {
    Eigen::Index n = 12;
    int segments = 100;
    Eigen::Index segment_len = 2000;
    Family family = Family::gaussian;
    double sigma_noise = 0.01;
    std::uint64_t seed = 0;

    Eigen::Index block() const { return n / 3; }  // l; structure spans 2l dims

    void validate() const {
        if (n < 3) throw ConfigError("n must be >= 3 so that l = floor(n/3) >= 1");
        if (segments < 1) throw ConfigError("segments must be >= 1");
        if (segment_len < 1) throw ConfigError("segment_len must be >= 1");
        if (sigma_noise < 0.0) throw ConfigError("sigma_noise must be >= 0");
    }
};

/// Streaming generator of the three benchmark families. The first 2l
/// dimensions carry the family's structure; the rest are i.i.d. standard
/// Gaussian. Changes happen at every segment boundary.
class SeriesGenerator {
public:
    explicit SeriesGenerator(GenSpec spec)
        : spec_(spec), rng_(derive_seed(spec.seed, "synthgen")) {
        spec_.validate();
        l_ = spec_.block();
        for (int s = 1; s < spec_.segments; ++s)
            change_points_.push_back(static_cast<std::int64_t>(s) *
                                     spec_.segment_len);
        init_family();
        schedule_.push_back(current_label());
    }

    const GenSpec& spec() const { return spec_; }
    std::int64_t total_rows() const {
        return static_cast<std::int64_t>(spec_.segments) * spec_.segment_len;
    }
    const std::vector<std::int64_t>& change_points() const { return change_points_; }

    /// Per-segment label: the active f index (linear/nonlinear) or the
    /// change type applied on segment entry (gaussian; first segment -1).
    const std::vector<int>& segment_schedule() const { return schedule_; }

    /// Fixed mixing matrices of the linear/nonlinear families.
    const Eigen::MatrixXd& mixing_a() const { return a_; }
    const Eigen::MatrixXd& mixing_b() const { return b_; }

    static double apply_f(Family family, int f_index, double x) {
        if (family == Family::linear)
            return f_index == 0 ? 2.0 * x + 1.0 : x / 3.0 - 4.0;
        switch (f_index) {
            case 0: return x * x - 2.0 * x;
            case 1: return x * x * x + 3.0 * x + 1.0;
            case 2: return std::log(std::abs(x) + 1.0);
            default: return std::sin(2.0 * x);
        }
    }

    bool next_row(Eigen::VectorXd& out) {
        if (row_ >= total_rows()) return false;
        if (row_ > 0 && row_ % spec_.segment_len == 0) {
            apply_change();
            schedule_.push_back(current_label());
        }
        emit(out);
        ++row_;
        return true;
    }

private:
    void init_family() {
        const Eigen::Index two_l = 2 * l_;
        if (spec_.family == Family::gaussian) {
            mean_.resize(two_l);
            for (Eigen::Index i = 0; i < two_l; ++i) mean_[i] = rng_.uniform(-1.0, 1.0);
            mixing_.resize(two_l, two_l);
            const double scale = 1.0 / std::sqrt(static_cast<double>(two_l));
            for (Eigen::Index i = 0; i < two_l; ++i)
                for (Eigen::Index j = 0; j < two_l; ++j)
                    mixing_(i, j) = scale * rng_.normal();
            var_doubled_.assign(static_cast<std::size_t>(two_l), false);
            change_type_ = -1;
        } else {
            a_.resize(l_, l_);
            b_.resize(l_, l_);
            for (Eigen::Index i = 0; i < l_; ++i)
                for (Eigen::Index j = 0; j < l_; ++j) a_(i, j) = rng_.uniform(0.0, 1.0);
            for (Eigen::Index i = 0; i < l_; ++i)
                for (Eigen::Index j = 0; j < l_; ++j) b_(i, j) = rng_.uniform(0.0, 0.5);
            f_index_ = 0;
        }
    }

    int current_label() const {
        return spec_.family == Family::gaussian ? change_type_ : f_index_;
    }

    void apply_change() {
        const Eigen::Index two_l = 2 * l_;
        if (spec_.family == Family::linear) {
            f_index_ = (f_index_ + 1) % 2;
            return;
        }
        if (spec_.family == Family::nonlinear) {
            f_index_ = (f_index_ + 1) % 4;
            return;
        }
        change_type_ = (change_type_ + 1) % 3;
        switch (change_type_) {
            case 0: {  // mean shift of 1.0 on a random half of the dims
                std::vector<Eigen::Index> dims = pick_half(two_l);
                for (const Eigen::Index d : dims) mean_[d] += 1.0;
                break;
            }
            case 1: {  // toggle doubled variance on a random half
                std::vector<Eigen::Index> dims = pick_half(two_l);
                const double up = std::sqrt(2.0);
                for (const Eigen::Index d : dims) {
                    const auto idx = static_cast<std::size_t>(d);
                    mixing_.row(d) *= var_doubled_[idx] ? 1.0 / up : up;
                    var_doubled_[idx] = !var_doubled_[idx];
                }
                break;
            }
            case 2: {  // re-rotate the mixing, preserving per-dim variances
                Eigen::MatrixXd g(two_l, two_l);
                for (Eigen::Index i = 0; i < two_l; ++i)
                    for (Eigen::Index j = 0; j < two_l; ++j) g(i, j) = rng_.normal();
                Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
                Eigen::MatrixXd q = qr.householderQ();
                Eigen::VectorXd before = mixing_.rowwise().norm();
                mixing_ = q * mixing_;
                for (Eigen::Index i = 0; i < two_l; ++i) {
                    const double now = mixing_.row(i).norm();
                    if (now > 0.0) mixing_.row(i) *= before[i] / now;
                }
                break;
            }
            default: break;
        }
    }

    std::vector<Eigen::Index> pick_half(Eigen::Index count) {
        std::vector<Eigen::Index> all(static_cast<std::size_t>(count));
        for (Eigen::Index i = 0; i < count; ++i) all[static_cast<std::size_t>(i)] = i;
        for (Eigen::Index i = count - 1; i > 0; --i) {
            const auto j = static_cast<Eigen::Index>(
                rng_.below(static_cast<std::uint64_t>(i + 1)));
            std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
        }
        all.resize(static_cast<std::size_t>(count / 2));
        return all;
    }

    void emit(Eigen::VectorXd& out) {
        out.resize(spec_.n);
        const Eigen::Index two_l = 2 * l_;
        if (spec_.family == Family::gaussian) {
            Eigen::VectorXd z(two_l);
            for (Eigen::Index i = 0; i < two_l; ++i) z[i] = rng_.normal();
            out.head(two_l) = mean_ + mixing_ * z;
        } else {
            Eigen::VectorXd z(l_);
            for (Eigen::Index i = 0; i < l_; ++i) z[i] = rng_.normal();
            Eigen::VectorXd x1 = a_ * z;
            Eigen::VectorXd w = b_ * x1;
            out.head(l_) = x1;
            for (Eigen::Index i = 0; i < l_; ++i)
                out[l_ + i] = apply_f(spec_.family, f_index_, w[i]) +
                              rng_.normal(0.0, spec_.sigma_noise);
        }
        for (Eigen::Index j = two_l; j < spec_.n; ++j) out[j] = rng_.normal();
    }

    GenSpec spec_;
    Rng rng_;
    Eigen::Index l_ = 0;
    std::int64_t row_ = 0;
    std::vector<std::int64_t> change_points_;
    std::vector<int> schedule_;

    // gaussian family
    Eigen::VectorXd mean_;
    Eigen::MatrixXd mixing_;
    std::vector<bool> var_doubled_;
    int change_type_ = -1;

    // linear / nonlinear families
    Eigen::MatrixXd a_, b_;
    int f_index_ = 0;
};

/// Materializes the full series; convenient at test scales.
inline std::pair<Eigen::MatrixXd, std::vector<std::int64_t>> generate(
    const GenSpec& spec) {
    SeriesGenerator gen(spec);
    Eigen::MatrixXd series(gen.total_rows(), spec.n);
    Eigen::VectorXd row;
    Eigen::Index i = 0;
    while (gen.next_row(row)) series.row(i++) = row.transpose();
    return {std::move(series), gen.change_points()};
}

}  // namespace lightcd
