#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "lightcd/core.hpp"
#include "lightcd/divergence.hpp"
#include "lightcd/errors.hpp"
#include "lightcd/factorization.hpp"
#include "lightcd/rng.hpp"
#include "lightcd/sampled_pca.hpp"

namespace lightcd {

enum class Variant { full, independent, no_factorization, no_pca };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::independent: return "independent";
        case Variant::no_factorization: return "no_factorization";
        case Variant::no_pca: return "no_pca";
    }
    return "full";
}

inline Variant variant_from_name(const std::string& name) {
    if (name == "full") return Variant::full;
    if (name == "independent" || name == "ind") return Variant::independent;
    if (name == "no_factorization" || name == "nf") return Variant::no_factorization;
    if (name == "no_pca" || name == "np") return Variant::no_pca;
    throw ConfigError("unknown variant '" + name + "'");
}

struct DetectorConfig {
    Eigen::Index m = 200;
    PcaConfig pca;
    SketchConfig factor;
    DivConfig div;
    double ph_lambda = 25.0;
    double ph_delta = -1.0;  // negative: adaptive, 0.005 x running score mean
    bool normalize_scores = true;
    bool normalize_input = false;
    Variant variant = Variant::full;
    std::uint64_t seed = 0;
    Eigen::VectorXd lower_bounds;  // optional; size 1 broadcasts, size 0 infers
    Eigen::VectorXd upper_bounds;

    void validate() const {
        if (m < 2) throw ConfigError("window size m must be >= 2");
        if (!(ph_lambda > 0.0)) throw ConfigError("ph_lambda must be > 0");
        if (div.subsample_threshold < 1)
            throw ConfigError("div.subsample_threshold must be >= 1");
        pca.validate();
        factor.validate();
    }
};

struct PageHinkleyState {
    long long count = 0;
    double running_mean = 0.0;
    double cumulative = 0.0;
    double minimum = 0.0;

    void reset() { *this = PageHinkleyState{}; }
};

struct PhResult {
    bool alarm = false;
    double statistic = 0.0;
};

/// One Page-Hinkley step: accumulate the deviation of the score from the
/// running mean of earlier scores, track the minimum, and alarm when the
/// gap to the minimum exceeds lambda. The first score seeds the mean.
inline PhResult ph_update(PageHinkleyState& state, double score, double lambda,
                          double drift) {
    const double mean_prev = state.count == 0 ? score : state.running_mean;
    state.cumulative += score - mean_prev - drift;
    state.minimum = std::min(state.minimum, state.cumulative);
    ++state.count;
    state.running_mean +=
        (score - state.running_mean) / static_cast<double>(state.count);
    const double statistic = state.cumulative - state.minimum;
    return {statistic > lambda, statistic};
}

struct ChangeEvent {
    std::int64_t t = 0;
    double score = 0.0;
    double ph_statistic = 0.0;
    std::int64_t epoch_start = 0;
};

struct StepRecord {
    std::int64_t t = 0;
    bool scored = false;
    double score = 0.0;
    double ph_statistic = 0.0;
    bool alarm = false;
};

/// Streaming change detector: fixes a reference window per epoch, projects
/// both windows into the sampled-PCA space, factorizes the reference
/// distribution over a dependency tree, and feeds the incrementally
/// maintained divergence score through a Page-Hinkley test.
class Detector {
public:
    explicit Detector(DetectorConfig cfg) : cfg_(std::move(cfg)) {
        cfg_.validate();
    }

    const DetectorConfig& config() const { return cfg_; }
    bool warm() const { return phase_ == Phase::active; }
    std::int64_t epoch_start() const { return epoch_start_; }
    const StepRecord& last() const { return last_; }
    const std::vector<ChangeEvent>& events() const { return events_; }
    double max_statistic() const { return max_statistic_; }
    Eigen::Index space_dims() const { return k_dims_; }
    const FactorTree* tree() const { return has_tree_ ? &tree_ : nullptr; }
    const ProjectionModel* model() const { return model_ ? &*model_ : nullptr; }

    std::optional<ChangeEvent> step(const Sample& sample) {
        if (n_ == 0) n_ = sample.values.size();
        if (sample.values.size() != n_)
            throw DimensionMismatchError(n_, sample.values.size());
        if (next_t_ >= 0 && sample.t != next_t_)
            throw InvariantViolationError("expected sample t=" +
                                          std::to_string(next_t_) + ", got t=" +
                                          std::to_string(sample.t));
        next_t_ = sample.t + 1;
        last_ = StepRecord{sample.t, false, 0.0, 0.0, false};

        Eigen::VectorXd x = normalize(sample.values);
        switch (phase_) {
            case Phase::warm_ref:
                ref_buf_.push_back(std::move(x));
                if (static_cast<Eigen::Index>(ref_buf_.size()) == cfg_.m)
                    phase_ = Phase::warm_test;
                return std::nullopt;
            case Phase::warm_test:
                test_buf_.push_back(std::move(x));
                if (static_cast<Eigen::Index>(test_buf_.size()) == cfg_.m)
                    activate(sample.t);
                return std::nullopt;
            case Phase::active:
                return slide(sample.t, x);
        }
        return std::nullopt;
    }

private:
    enum class Phase { warm_ref, warm_test, active };

    Eigen::VectorXd normalize(const Eigen::VectorXd& raw) {
        if (!cfg_.normalize_input || !meta_ready_) return raw;
        Eigen::VectorXd out(raw.size());
        for (Eigen::Index i = 0; i < raw.size(); ++i) {
            const double span = meta_.upper_bounds[i] - meta_.lower_bounds[i];
            out[i] = span > 0.0 ? (raw[i] - meta_.lower_bounds[i]) / span : 0.0;
        }
        return out;
    }

    Eigen::MatrixXd rows_to_matrix(const std::vector<Eigen::VectorXd>& rows) const {
        Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), n_);
        for (std::size_t i = 0; i < rows.size(); ++i)
            out.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
        return out;
    }

    void resolve_meta(const Eigen::MatrixXd& ref) {
        if (meta_ready_) return;
        if (cfg_.lower_bounds.size() > 0 && cfg_.upper_bounds.size() > 0) {
            meta_.n = n_;
            meta_.lower_bounds = cfg_.lower_bounds.size() == 1
                                     ? Eigen::VectorXd::Constant(n_, cfg_.lower_bounds[0])
                                     : cfg_.lower_bounds;
            meta_.upper_bounds = cfg_.upper_bounds.size() == 1
                                     ? Eigen::VectorXd::Constant(n_, cfg_.upper_bounds[0])
                                     : cfg_.upper_bounds;
            meta_.bounds_source = BoundsSource::configured;
            meta_.validate();
        } else {
            meta_ = infer_bounds(ref);
        }
        meta_ready_ = true;
        if (cfg_.normalize_input) {
            for (auto& row : ref_buf_) row = normalize(row);
            for (auto& row : test_buf_) row = normalize(row);
        }
    }

    Eigen::MatrixXd project(const Eigen::MatrixXd& window) const {
        if (cfg_.variant == Variant::no_pca)
            return window.rowwise() - col_means_.transpose();
        return transform(*model_, window);
    }

    Eigen::VectorXd project_row(const Eigen::VectorXd& row) const {
        if (cfg_.variant == Variant::no_pca) return row - col_means_;
        return transform_row(*model_, row);
    }

    void activate(std::int64_t t) {
        Eigen::MatrixXd ref_raw = rows_to_matrix(ref_buf_);
        if (!meta_ready_) {
            resolve_meta(ref_raw);
            if (cfg_.normalize_input) ref_raw = rows_to_matrix(ref_buf_);
        }
        Eigen::MatrixXd test_raw = rows_to_matrix(test_buf_);
        pair_.emplace(ref_raw, test_raw, epoch_start_, t + 1);
        ref_buf_.clear();
        test_buf_.clear();

        degenerate_ = false;
        model_.reset();
        has_tree_ = false;
        try {
            if (cfg_.variant == Variant::no_pca) {
                bool constant = true;
                for (Eigen::Index j = 0; j < ref_raw.cols() && constant; ++j)
                    constant = ref_raw.col(j).minCoeff() == ref_raw.col(j).maxCoeff();
                if (constant) throw DegenerateWindowError("constant reference window");
                col_means_ = ref_raw.colwise().mean();
                Eigen::MatrixXd centered = ref_raw.rowwise() - col_means_.transpose();
                r_ = r_bound_from_centered(centered);
                k_dims_ = n_;
            } else {
                FitResult fitres = fit_window(ref_raw, cfg_.pca);
                model_ = std::move(fitres.model);
                r_ = model_->r_bound;
                k_dims_ = model_->k;
            }
        } catch (const DegenerateWindowError&) {
            degenerate_ = true;
            steps_since_refit_ = 0;
            ph_.reset();
            reset_history();
            last_ = StepRecord{t, true, 0.0, 0.0, false};
            phase_ = Phase::active;
            ++epoch_index_;
            return;
        }

        Eigen::MatrixXd ref_trans = project(pair_->ref());
        Eigen::MatrixXd test_trans = project(pair_->test_in_order());
        double needed = r_;
        if (ref_trans.size() > 0)
            needed = std::max(needed, ref_trans.cwiseAbs().maxCoeff());
        if (test_trans.size() > 0)
            needed = std::max(needed, test_trans.cwiseAbs().maxCoeff());
        r_ = needed;

        const bool wants_tree = cfg_.variant == Variant::full ||
                                cfg_.variant == Variant::no_pca;
        if (wants_tree) {
            if (!cfg_.factor.exact &&
                (!basis_ || basis_->m() != pair_->size()))
                basis_.emplace(pair_->size(), cfg_.factor.s1, cfg_.factor.s2,
                               derive_seed(cfg_.seed, "factor") ^ cfg_.factor.seed);
            tree_ = build_structure(ref_trans, r_, cfg_.factor,
                                    cfg_.factor.exact ? nullptr : &*basis_);
            has_tree_ = true;
        }

        Eigen::MatrixXd ref_score = std::move(ref_trans);
        if (pair_->size() > cfg_.div.subsample_threshold) {
            const double eps = static_cast<double>(cfg_.div.subsample_threshold) /
                               static_cast<double>(pair_->size());
            ref_score = subsample(ref_score, eps,
                                  derive_seed(cfg_.seed ^ cfg_.div.seed, "div.epoch",
                                              static_cast<std::uint64_t>(epoch_index_)));
        }
        rebuild_state(std::move(ref_score), std::move(test_trans));

        ph_.reset();
        reset_history();
        const double initial = div_state_->score();
        const PhResult pr = feed(initial);
        last_ = StepRecord{t, true, initial, pr.statistic, false};
        phase_ = Phase::active;
        ++epoch_index_;
    }

    void rebuild_state(Eigen::MatrixXd ref_score, Eigen::MatrixXd test_trans) {
        const Bounds1D bounds{-r_, r_};
        const double delta = 2.0 * r_;
        switch (cfg_.variant) {
            case Variant::full:
            case Variant::no_pca:
                div_state_.emplace(DivergenceState::from_tree(
                    std::move(ref_score), std::move(test_trans), tree_, delta, bounds));
                break;
            case Variant::independent:
                div_state_.emplace(DivergenceState::independent(
                    std::move(ref_score), std::move(test_trans), delta, bounds));
                break;
            case Variant::no_factorization:
                div_state_.emplace(DivergenceState::joint(
                    std::move(ref_score), std::move(test_trans), bounds));
                break;
        }
    }

    std::optional<ChangeEvent> slide(std::int64_t t, const Eigen::VectorXd& x) {
        pair_->push(Sample{t, x});

        if (degenerate_) {
            const PhResult pr = feed(0.0);
            last_ = StepRecord{t, true, 0.0, pr.statistic, false};
            if (++steps_since_refit_ >= cfg_.m) {
                // retry with the freshest m samples as the next reference
                const Eigen::MatrixXd test_now = pair_->test_in_order();
                ref_buf_.clear();
                test_buf_.clear();
                for (Eigen::Index i = 0; i < test_now.rows(); ++i)
                    ref_buf_.push_back(test_now.row(i).transpose());
                epoch_start_ = t - cfg_.m;
                phase_ = Phase::warm_test;
            }
            return std::nullopt;
        }

        Eigen::VectorXd z = project_row(x);
        std::optional<double> updated = div_state_->update(z);
        if (!updated) {
            r_ = std::max(r_, z.cwiseAbs().maxCoeff()) * 1.05;
            rebuild_state(div_state_->ref(), div_state_->test_in_order());
            updated = div_state_->update(z);
            if (!updated)
                throw InvariantViolationError("bounds refresh failed to cover sample");
        }
        const double raw = *updated;
        const PhResult pr = feed(raw);
        last_ = StepRecord{t, true, raw, pr.statistic, pr.alarm};
        if (!pr.alarm) return std::nullopt;

        ChangeEvent event{t, raw, pr.statistic, epoch_start_};
        events_.push_back(event);
        begin_epoch(t);
        return event;
    }

    PhResult feed(double raw_score) {
        double fed = raw_score;
        if (cfg_.normalize_scores) {
            // z-score against the epoch history. A persistent level shift
            // keeps deviating from the epoch baseline, so it accumulates
            // until the test fires no matter how gradual the onset was. The
            // std floor keeps early, autocorrelated estimates from exploding.
            if (hist_count_ >= 30) {
                const double var = hist_m2_ / static_cast<double>(hist_count_ - 1);
                const double sd = std::max(std::sqrt(std::max(var, 0.0)),
                                           0.05 * std::abs(hist_mean_));
                fed = sd > 0.0 ? (raw_score - hist_mean_) / sd : 0.0;
            } else {
                fed = 0.0;
            }
        }
        // scores wander slowly as the window slides; the tolerance absorbs
        // wander-sized deviations so only real level shifts accumulate
        const double drift =
            cfg_.ph_delta >= 0.0
                ? cfg_.ph_delta
                : (cfg_.normalize_scores
                       ? 0.5
                       : 0.005 * (ph_.count > 0 ? std::abs(ph_.running_mean) : 0.0));
        const PhResult pr = ph_update(ph_, fed, cfg_.ph_lambda, drift);
        max_statistic_ = std::max(max_statistic_, pr.statistic);
        // the baseline freezes after the first 2m scored samples; otherwise
        // a change that was missed once would inflate the history variance
        // and mute every later deviation against the stale reference
        if (hist_count_ < std::max<long long>(30, 2 * cfg_.m)) {
            ++hist_count_;
            const double d1 = raw_score - hist_mean_;
            hist_mean_ += d1 / static_cast<double>(hist_count_);
            hist_m2_ += d1 * (raw_score - hist_mean_);
        }
        return pr;
    }

    void reset_history() {
        hist_count_ = 0;
        hist_mean_ = 0.0;
        hist_m2_ = 0.0;
    }

    void begin_epoch(std::int64_t t) {
        epoch_start_ = t;
        phase_ = Phase::warm_ref;
        ref_buf_.clear();
        test_buf_.clear();
        pair_.reset();
        div_state_.reset();
        model_.reset();
        has_tree_ = false;
        degenerate_ = false;
        ph_.reset();
        reset_history();
    }

    DetectorConfig cfg_;
    Eigen::Index n_ = 0;
    std::int64_t next_t_ = -1;
    Phase phase_ = Phase::warm_ref;
    std::int64_t epoch_start_ = -1;
    std::int64_t epoch_index_ = 0;

    std::vector<Eigen::VectorXd> ref_buf_, test_buf_;
    std::optional<WindowPair> pair_;
    std::optional<ProjectionModel> model_;
    Eigen::VectorXd col_means_;  // no_pca variant
    std::optional<SketchBasis> basis_;
    FactorTree tree_;
    bool has_tree_ = false;
    std::optional<DivergenceState> div_state_;
    double r_ = 0.0;
    Eigen::Index k_dims_ = 0;
    bool degenerate_ = false;
    Eigen::Index steps_since_refit_ = 0;

    SeriesMeta meta_;
    bool meta_ready_ = false;

    PageHinkleyState ph_;
    long long hist_count_ = 0;
    double hist_mean_ = 0.0;
    double hist_m2_ = 0.0;
    double max_statistic_ = 0.0;

    StepRecord last_;
    std::vector<ChangeEvent> events_;
};

}  // namespace lightcd
