// Command-line front end: detect / generate / calibrate / bench.

#include <chrono>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lightcd/lightcd.hpp"

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        const auto len = (comma == std::string::npos ? csv.size() : comma) - start;
        if (len > 0) out.push_back(csv.substr(start, len));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

struct CommonOptions {
    std::string config_path;
    std::vector<std::string> sets;
    std::int64_t m = -1;
    std::int64_t seed = -1;
    double lambda = -1.0;
    std::string variant;
};

void add_common(CLI::App* cmd, CommonOptions& opt, bool with_variant = true) {
    cmd->add_option("--config", opt.config_path, "flat key=value config file");
    cmd->add_option("--set", opt.sets, "override one config key, e.g. --set pca.c=100");
    cmd->add_option("-m,--window", opt.m, "window size m");
    cmd->add_option("--seed", opt.seed, "master seed");
    cmd->add_option("--lambda", opt.lambda, "Page-Hinkley alarm threshold");
    if (with_variant)
        cmd->add_option("--variant", opt.variant,
                        "full | independent | no_factorization | no_pca");
}

lightcd::DetectorConfig resolve_config(const CommonOptions& opt,
                                       lightcd::ConfigMap& effective) {
    lightcd::ConfigMap map;
    if (!opt.config_path.empty()) map = lightcd::parse_config_file(opt.config_path);
    lightcd::apply_env_overrides(map);
    for (const auto& kv : opt.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw lightcd::ConfigError("--set expects key=value, got '" + kv + "'");
        map[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    if (opt.m >= 0) map["m"] = std::to_string(opt.m);
    if (opt.seed >= 0) map["seed"] = std::to_string(opt.seed);
    if (opt.lambda >= 0.0) map["ph_lambda"] = std::to_string(opt.lambda);
    if (!opt.variant.empty()) map["variant"] = opt.variant;
    lightcd::DetectorConfig cfg = lightcd::detector_config_from(map);
    effective = lightcd::config_to_map(cfg);
    return cfg;
}

void write_manifest(const std::string& path, const std::string& command,
                    const lightcd::ConfigMap& config, const json& inputs,
                    const json& outputs, const json& timings) {
    json manifest;
    manifest["command"] = command;
    manifest["artifact_version"] = LIGHTCD_VERSION;
    manifest["config"] = config;
    manifest["inputs"] = inputs;
    manifest["outputs"] = outputs;
    manifest["timings"] = timings;
    std::ofstream out(path);
    if (!out) throw lightcd::Error("cannot write manifest: " + path);
    out << manifest.dump(2) << '\n';
}

int cmd_detect(const CommonOptions& common, const std::string& input,
               const std::string& out_prefix) {
    lightcd::ConfigMap effective;
    lightcd::DetectorConfig cfg = resolve_config(common, effective);

    const std::string scores_path = out_prefix + ".scores.jsonl";
    const std::string events_path = out_prefix + ".events.json";
    std::FILE* scores = std::fopen(scores_path.c_str(), "wb");
    if (scores == nullptr)
        throw lightcd::Error("cannot write scores file: " + scores_path);

    const auto start = Clock::now();
    lightcd::CsvReader reader(input);
    lightcd::Detector detector(cfg);
    Eigen::VectorXd row;
    std::int64_t t = 0;
    while (reader.next(row)) {
        detector.step(lightcd::Sample{t, row});
        const auto& rec = detector.last();
        if (rec.scored)
            std::fprintf(scores, "{\"t\":%" PRId64
                                 ",\"score\":%.17g,\"ph_statistic\":%.17g,"
                                 "\"alarm\":%s}\n",
                         rec.t, rec.score, rec.ph_statistic,
                         rec.alarm ? "true" : "false");
        ++t;
    }
    std::fclose(scores);

    json events = json::array();
    for (const auto& e : detector.events())
        events.push_back({{"t", e.t},
                          {"score", e.score},
                          {"ph_statistic", e.ph_statistic},
                          {"epoch_start", e.epoch_start}});
    json summary;
    summary["count"] = detector.events().size();
    summary["events"] = events;
    std::ofstream events_out(events_path);
    events_out << summary.dump(2) << '\n';

    write_manifest(out_prefix + ".manifest.json", "detect", effective,
                   json{{"input", input}, {"rows", t}},
                   json{{"scores", scores_path}, {"events", events_path}},
                   json{{"total_seconds", seconds_since(start)}});
    std::cout << "rows=" << t << " events=" << detector.events().size() << '\n';
    return 0;
}

int cmd_calibrate(const CommonOptions& common, const std::string& input,
                  std::int64_t prefix_rows, const std::string& out_prefix) {
    lightcd::ConfigMap effective;
    lightcd::DetectorConfig cfg = resolve_config(common, effective);

    const auto start = Clock::now();
    lightcd::CsvReader reader(input);
    const std::int64_t limit =
        prefix_rows > 0 ? prefix_rows : std::numeric_limits<std::int64_t>::max();
    const lightcd::Calibration cal = lightcd::calibrate(
        cfg, [&](Eigen::VectorXd& r) { return reader.next(r); }, limit);

    std::printf("max_statistic=%.17g\nrecommended_lambda=%.17g\n",
                cal.max_statistic, cal.lambda);
    if (!out_prefix.empty())
        write_manifest(out_prefix + ".manifest.json", "calibrate", effective,
                       json{{"input", input}, {"prefix_rows", prefix_rows}},
                       json{{"max_statistic", cal.max_statistic},
                            {"recommended_lambda", cal.lambda}},
                       json{{"total_seconds", seconds_since(start)}});
    return 0;
}

int cmd_generate(const lightcd::GenSpec& spec, const std::string& out_prefix) {
    spec.validate();
    const std::string csv_path = out_prefix + ".csv";
    const std::string truth_path = out_prefix + ".truth.txt";
    std::FILE* csv = std::fopen(csv_path.c_str(), "wb");
    if (csv == nullptr) throw lightcd::Error("cannot write series: " + csv_path);

    const auto start = Clock::now();
    lightcd::SeriesGenerator gen(spec);
    Eigen::VectorXd row;
    // row-buffered text to keep memory bounded in the series length
    std::string line;
    char field[40];
    while (gen.next_row(row)) {
        line.clear();
        for (Eigen::Index i = 0; i < row.size(); ++i) {
            std::snprintf(field, sizeof(field), "%.17g", row[i]);
            if (i > 0) line += ',';
            line += field;
        }
        line += '\n';
        std::fwrite(line.data(), 1, line.size(), csv);
    }
    std::fclose(csv);

    std::ofstream truth(truth_path);
    for (const auto cp : gen.change_points()) truth << cp << '\n';

    lightcd::ConfigMap genmap;
    genmap["family"] = lightcd::family_name(spec.family);
    genmap["n"] = std::to_string(spec.n);
    genmap["segments"] = std::to_string(spec.segments);
    genmap["segment_len"] = std::to_string(spec.segment_len);
    genmap["sigma_noise"] = std::to_string(spec.sigma_noise);
    genmap["seed"] = std::to_string(spec.seed);
    write_manifest(out_prefix + ".manifest.json", "generate", genmap, json::object(),
                   json{{"series", csv_path}, {"truth", truth_path}},
                   json{{"total_seconds", seconds_since(start)}});
    std::cout << "rows=" << gen.total_rows()
              << " change_points=" << gen.change_points().size() << '\n';
    return 0;
}

int cmd_bench(const CommonOptions& common, const std::string& n_list,
              const std::string& m_list, const std::string& families,
              const std::string& variants, const std::string& seeds,
              int segments, std::int64_t segment_len, const std::string& out_prefix) {
    lightcd::ConfigMap effective;
    lightcd::BenchOptions options;
    options.base = resolve_config(common, effective);
    options.segments = segments;
    options.segment_len = segment_len;

    std::vector<lightcd::BenchCell> cells;
    for (const auto& n : split_list(n_list))
        for (const auto& m : split_list(m_list))
            for (const auto& fam : split_list(families))
                for (const auto& var : split_list(variants))
                    for (const auto& seed : split_list(seeds)) {
                        lightcd::BenchCell cell;
                        cell.n = std::stoll(n);
                        cell.m = std::stoll(m);
                        cell.family = lightcd::family_from_name(fam);
                        cell.variant = lightcd::variant_from_name(var);
                        cell.seed = std::stoull(seed);
                        cells.push_back(cell);
                    }

    const auto start = Clock::now();
    const std::vector<lightcd::BenchRow> rows = lightcd::run_benchmark(cells, options);

    const std::string table_path = out_prefix + ".csv";
    const std::string long_path = out_prefix + ".long.csv";
    std::ofstream table(table_path);
    lightcd::write_benchmark_csv(table, rows);
    std::ofstream longfmt(long_path);
    lightcd::write_benchmark_long(longfmt, rows);

    write_manifest(out_prefix + ".manifest.json", "bench", effective,
                   json{{"cells", cells.size()},
                        {"segments", segments},
                        {"segment_len", segment_len}},
                   json{{"table", table_path}, {"long", long_path}},
                   json{{"total_seconds", seconds_since(start)}});
    for (const auto& r : rows)
        std::cout << "n=" << r.cell.n << " m=" << r.cell.m << " "
                  << lightcd::family_name(r.cell.family) << "/"
                  << lightcd::variant_name(r.cell.variant) << " seed=" << r.cell.seed
                  << " f1=" << r.result.f1
                  << " runtime=" << r.result.runtime_seconds << "s"
                  << (r.error.empty() ? "" : " error=" + r.error) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Change detection for very high dimensional time series"};
    app.set_version_flag("--version", LIGHTCD_VERSION);
    app.require_subcommand(1);

    CommonOptions common;

    auto* detect = app.add_subcommand("detect", "run the detector over a CSV stream");
    std::string input, out_prefix;
    detect->add_option("--input", input, "input CSV, one row per time instant")
        ->required();
    detect->add_option("--out", out_prefix, "output path prefix")->required();
    add_common(detect, common);

    auto* generate = app.add_subcommand("generate", "write a synthetic benchmark series");
    lightcd::GenSpec spec;
    std::string family = "gaussian", gen_out;
    std::int64_t gen_n = 12, gen_seglen = 2000, gen_seed = 0;
    int gen_segments = 100;
    double gen_sigma = 0.01;
    generate->add_option("--family", family, "gaussian | linear | nonlinear");
    generate->add_option("--n", gen_n, "dimension count (>= 3)");
    generate->add_option("--segments", gen_segments, "segment count");
    generate->add_option("--segment-len", gen_seglen, "steps per segment");
    generate->add_option("--sigma", gen_sigma, "noise sigma for f-mapped dims");
    generate->add_option("--seed", gen_seed, "generator seed");
    generate->add_option("--out", gen_out, "output path prefix")->required();

    auto* calibrate = app.add_subcommand(
        "calibrate", "report the alarm-free maximum statistic on a prefix");
    std::string cal_input, cal_out;
    std::int64_t prefix_rows = 0;
    calibrate->add_option("--input", cal_input, "input CSV")->required();
    calibrate->add_option("--prefix", prefix_rows, "rows to read (0 = all)");
    calibrate->add_option("--out", cal_out, "manifest path prefix");
    add_common(calibrate, common);

    auto* bench = app.add_subcommand("bench", "run a benchmark matrix");
    std::string n_list = "60", m_list = "100", fam_list = "gaussian",
                var_list = "full", seed_list = "1";
    int bench_segments = 8;
    std::int64_t bench_seglen = 600;
    std::string bench_out;
    bench->add_option("--n-list", n_list, "comma-separated dimension counts");
    bench->add_option("--m-list", m_list, "comma-separated window sizes");
    bench->add_option("--family", fam_list, "comma-separated families");
    bench->add_option("--variant", var_list, "comma-separated variants");
    bench->add_option("--seeds", seed_list, "comma-separated seeds");
    bench->add_option("--segments", bench_segments, "segments per series");
    bench->add_option("--segment-len", bench_seglen, "steps per segment");
    bench->add_option("--out", bench_out, "output path prefix")->required();
    add_common(bench, common, /*with_variant=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (detect->parsed()) return cmd_detect(common, input, out_prefix);
        if (generate->parsed()) {
            spec.family = lightcd::family_from_name(family);
            spec.n = gen_n;
            spec.segments = gen_segments;
            spec.segment_len = gen_seglen;
            spec.sigma_noise = gen_sigma;
            spec.seed = static_cast<std::uint64_t>(gen_seed);
            return cmd_generate(spec, gen_out);
        }
        if (calibrate->parsed())
            return cmd_calibrate(common, cal_input, prefix_rows, cal_out);
        if (bench->parsed())
            return cmd_bench(common, n_list, m_list, fam_list, var_list, seed_list,
                             bench_segments, bench_seglen, bench_out);
    } catch (const lightcd::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const lightcd::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
