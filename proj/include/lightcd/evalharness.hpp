#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "lightcd/detector.hpp"
#include "lightcd/errors.hpp"
#include "lightcd/rng.hpp"
#include "lightcd/synthgen.hpp"

namespace lightcd {

struct EvalResult {
    int true_positives = 0;
    int false_positives = 0;
    int false_negatives = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double runtime_seconds = 0.0;
};

/// Scores detections against ground truth: a detection d matches a change
/// point c iff c <= d < c + 2m, i.e. it fires before 2m samples of the new
/// distribution have arrived. Matching is one-to-one, greedy in time
/// order; duplicate detections collapse to one.
inline EvalResult match(const std::vector<std::int64_t>& detections,
                        const std::vector<std::int64_t>& truth, Eigen::Index m) {
    std::vector<std::int64_t> det = detections;
    std::sort(det.begin(), det.end());
    det.erase(std::unique(det.begin(), det.end()), det.end());

    const std::int64_t window = 2 * static_cast<std::int64_t>(m);
    std::vector<bool> used(truth.size(), false);
    EvalResult r;
    std::size_t base = 0;
    for (const std::int64_t d : det) {
        while (base < truth.size() && truth[base] + window <= d) ++base;
        bool matched = false;
        for (std::size_t c = base; c < truth.size() && truth[c] <= d; ++c) {
            if (used[c]) continue;
            used[c] = true;
            matched = true;
            break;
        }
        if (matched)
            ++r.true_positives;
        else
            ++r.false_positives;
    }
    r.false_negatives = static_cast<int>(truth.size()) - r.true_positives;
    const int predicted = r.true_positives + r.false_positives;
    r.precision = predicted > 0
                      ? static_cast<double>(r.true_positives) / predicted
                      : 0.0;
    r.recall = truth.empty() ? 0.0
                             : static_cast<double>(r.true_positives) /
                                   static_cast<double>(truth.size());
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

struct Calibration {
    double lambda = 1.0;
    double max_statistic = 0.0;
};

/// Runs the detector alarm-free over a label-free prefix and recommends
/// lambda as the maximum observed statistic times a safety factor.
template <typename RowSource>
Calibration calibrate(DetectorConfig cfg, RowSource&& next_row,
                      std::int64_t max_rows, double safety = 1.5) {
    cfg.ph_lambda = std::numeric_limits<double>::infinity();
    Detector det(cfg);
    Eigen::VectorXd row;
    std::int64_t t = 0;
    while (t < max_rows && next_row(row)) {
        det.step(Sample{t, row});
        ++t;
    }
    Calibration cal;
    cal.max_statistic = det.max_statistic();
    cal.lambda = cal.max_statistic > 0.0 ? cal.max_statistic * safety : 1.0;
    return cal;
}

struct BenchCell {
    Eigen::Index n = 60;
    Eigen::Index m = 100;
    Family family = Family::gaussian;
    Variant variant = Variant::full;
    std::uint64_t seed = 0;
};

struct BenchOptions {
    int segments = 8;
    Eigen::Index segment_len = 600;
    double sigma_noise = 0.01;
    double calibration_safety = 1.5;
    DetectorConfig base;  // m, variant and seed are overridden per cell
};

struct BenchRow {
    BenchCell cell;
    EvalResult result;
    double ph_lambda = 0.0;
    Eigen::Index space_dims = 0;
    std::vector<std::int64_t> detections;
    std::string error;
};

inline DetectorConfig cell_config(const BenchCell& cell, const BenchOptions& opt) {
    DetectorConfig cfg = opt.base;
    cfg.m = cell.m;
    cfg.variant = cell.variant;
    cfg.seed = derive_seed(opt.base.seed ^ cell.seed, "bench.cell");
    return cfg;
}

/// One benchmark cell: generate, calibrate on the first (stationary)
/// segment, detect over the full series, and score against the truth.
inline BenchRow run_cell(const BenchCell& cell, const BenchOptions& opt) {
    BenchRow row;
    row.cell = cell;
    GenSpec gspec;
    gspec.n = cell.n;
    gspec.segments = opt.segments;
    gspec.segment_len = opt.segment_len;
    gspec.family = cell.family;
    gspec.sigma_noise = opt.sigma_noise;
    gspec.seed = cell.seed;
    gspec.validate();

    DetectorConfig cfg = cell_config(cell, opt);

    SeriesGenerator calib_gen(gspec);
    const Calibration cal = calibrate(
        cfg, [&](Eigen::VectorXd& out) { return calib_gen.next_row(out); },
        gspec.segment_len, opt.calibration_safety);
    cfg.ph_lambda = cal.lambda;
    row.ph_lambda = cal.lambda;

    SeriesGenerator gen(gspec);
    Detector det(cfg);
    Eigen::VectorXd sample_row;
    std::int64_t t = 0;
    const auto start = std::chrono::steady_clock::now();
    while (gen.next_row(sample_row)) {
        det.step(Sample{t, sample_row});
        ++t;
    }
    const auto stop = std::chrono::steady_clock::now();
    for (const auto& e : det.events()) row.detections.push_back(e.t);
    row.result = match(row.detections, gen.change_points(), cell.m);
    row.result.runtime_seconds =
        std::chrono::duration<double>(stop - start).count();
    row.space_dims = det.space_dims();
    return row;
}

/// Runs every cell; per-cell failures are recorded and do not stop the run.
inline std::vector<BenchRow> run_benchmark(const std::vector<BenchCell>& cells,
                                           const BenchOptions& opt) {
    std::vector<BenchRow> rows;
    rows.reserve(cells.size());
    for (const auto& cell : cells) {
        try {
            rows.push_back(run_cell(cell, opt));
        } catch (const std::exception& e) {
            BenchRow failed;
            failed.cell = cell;
            failed.error = e.what();
            rows.push_back(std::move(failed));
        }
    }
    return rows;
}

inline void write_benchmark_csv(std::ostream& out,
                                const std::vector<BenchRow>& rows) {
    out << "n,m,family,variant,seed,tp,fp,fn,precision,recall,f1,"
           "runtime_seconds,ph_lambda,space_dims,error\n";
    for (const auto& r : rows) {
        out << r.cell.n << ',' << r.cell.m << ',' << family_name(r.cell.family)
            << ',' << variant_name(r.cell.variant) << ',' << r.cell.seed << ','
            << r.result.true_positives << ',' << r.result.false_positives << ','
            << r.result.false_negatives << ',' << r.result.precision << ','
            << r.result.recall << ',' << r.result.f1 << ','
            << r.result.runtime_seconds << ',' << r.ph_lambda << ','
            << r.space_dims << ',' << r.error << '\n';
    }
}

/// Plot-ready long format: one (cell, metric, value) row per metric.
inline void write_benchmark_long(std::ostream& out,
                                 const std::vector<BenchRow>& rows) {
    out << "n,m,family,variant,seed,metric,value\n";
    for (const auto& r : rows) {
        const auto prefix = [&](std::ostream& o) -> std::ostream& {
            o << r.cell.n << ',' << r.cell.m << ',' << family_name(r.cell.family)
              << ',' << variant_name(r.cell.variant) << ',' << r.cell.seed << ',';
            return o;
        };
        prefix(out) << "precision," << r.result.precision << '\n';
        prefix(out) << "recall," << r.result.recall << '\n';
        prefix(out) << "f1," << r.result.f1 << '\n';
        prefix(out) << "runtime_seconds," << r.result.runtime_seconds << '\n';
    }
}

}  // namespace lightcd
