#pragma once

#include <Eigen/Dense>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "lightcd/errors.hpp"

namespace lightcd {

namespace detail {

inline bool parse_double(std::string_view token, double& out) {
    // trim surrounding spaces
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t'))
        token.remove_prefix(1);
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                              token.back() == '\r'))
        token.remove_suffix(1);
    if (token.empty()) return false;
    const char* end = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(token.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace detail

/// Streaming reader for comma-separated numeric rows, one time instant per
/// line. A first line with any non-numeric token is treated as a header.
/// The dimension count is fixed by the first data row; any later row with
/// a different length or an unparseable field aborts with its line number.
class CsvReader {
public:
    explicit CsvReader(const std::string& path) : in_(path) {
        if (!in_) throw Error("cannot open input file: " + path);
    }

    Eigen::Index dims() const { return dims_; }
    std::size_t rows_read() const { return rows_; }

    /// Reads the next data row into `row`; returns false at end of file.
    bool next(Eigen::VectorXd& row) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_number_;
            if (line.empty() || line == "\r") continue;
            if (!parse_row(line, row)) continue;  // header skipped
            ++rows_;
            return true;
        }
        return false;
    }

private:
    bool parse_row(const std::string& line, Eigen::VectorXd& row) {
        fields_.clear();
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::size_t len =
                (comma == std::string::npos ? line.size() : comma) - start;
            fields_.emplace_back(line.data() + start, len);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (dims_ == 0 && rows_ == 0) {
            // first non-empty line: header if any field is non-numeric
            double v;
            for (const auto f : fields_)
                if (!detail::parse_double(f, v)) {
                    if (header_seen_)
                        throw ParseError(line_number_,
                                         "unparseable value '" + std::string(f) + "'");
                    header_seen_ = true;
                    return false;
                }
            dims_ = static_cast<Eigen::Index>(fields_.size());
        }
        if (static_cast<Eigen::Index>(fields_.size()) != dims_)
            throw ParseError(line_number_, "expected " + std::to_string(dims_) +
                                               " fields, got " +
                                               std::to_string(fields_.size()));
        row.resize(dims_);
        for (Eigen::Index i = 0; i < dims_; ++i) {
            double v;
            if (!detail::parse_double(fields_[static_cast<std::size_t>(i)], v))
                throw ParseError(
                    line_number_,
                    "unparseable value '" +
                        std::string(fields_[static_cast<std::size_t>(i)]) + "'");
            row[i] = v;
        }
        return true;
    }

    std::ifstream in_;
    Eigen::Index dims_ = 0;
    std::size_t rows_ = 0;
    std::size_t line_number_ = 0;
    bool header_seen_ = false;
    std::vector<std::string_view> fields_;
};

}  // namespace lightcd
