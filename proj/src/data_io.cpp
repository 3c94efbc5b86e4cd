#include "svbm/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "svbm/errors.hpp"

namespace svbm {
namespace {

constexpr double kMinStdDev = 1e-12;

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

double parse_real(const std::string& cell, std::size_t row, std::size_t col) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw DataError("unparseable cell '" + cell + "' at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
    }
    return value;
}

// Reads non-blank lines; row numbers reported to the user are 1-based file lines.
std::vector<std::pair<std::size_t, std::vector<std::string>>> read_rows(
    const std::filesystem::path& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = has_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
            line.erase(0, 3);
        }
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        auto fields = split_fields(line);
        if (!rows.empty() && fields.size() != rows.front().second.size()) {
            throw DataError("ragged row at line " + std::to_string(line_no) + ": expected " +
                            std::to_string(rows.front().second.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        rows.emplace_back(line_no, std::move(fields));
    }
    if (in.bad()) throw DataError("read failure on '" + path.string() + "'");
    if (rows.empty()) throw DataError("no data rows in '" + path.string() + "'");
    return rows;
}

}  // namespace

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.features = features.select_rows(indices);
    out.labels.reserve(indices.size());
    for (auto i : indices) out.labels.push_back(labels[i]);
    out.class_names = class_names;
    return out;
}

void Dataset::validate() const {
    if (features.rows() == 0 || features.cols() == 0) throw DataError("dataset is empty");
    if (labels.size() != features.rows()) throw DataError("label count does not match rows");
    if (class_names.size() < 2) throw DataError("fewer than 2 classes");
    std::vector<bool> seen(class_names.size(), false);
    for (int y : labels) {
        if (y < 0 || y >= num_classes()) throw DataError("label index out of range");
        seen[static_cast<std::size_t>(y)] = true;
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
        throw DataError("a class has no samples");
    }
    for (double v : features.values()) {
        if (!std::isfinite(v)) throw DataError("non-finite feature value");
    }
}

LabelColumn LabelColumn::parse(const std::string& text) {
    if (text == "last") return last();
    std::size_t index = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), index);
    if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
        throw std::invalid_argument("label column must be 'last' or a 0-based index, got '" +
                                    text + "'");
    }
    return at(index);
}

LabeledRows load_labeled_csv(const std::filesystem::path& path, LabelColumn label_column,
                             bool has_header) {
    const auto rows = read_rows(path, has_header);
    const std::size_t width = rows.front().second.size();
    if (width < 2) throw DataError("need at least one feature column and a label column");
    const std::size_t label_col = label_column.index.value_or(width - 1);
    if (label_col >= width) {
        throw DataError("label column " + std::to_string(label_col) + " out of range");
    }
    LabeledRows out;
    out.features = Matrix(rows.size(), width - 1);
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& [line_no, fields] = rows[r];
        std::size_t c_out = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_col) continue;
            out.features(r, c_out++) = parse_real(fields[c], line_no, c);
        }
        if (fields[label_col].empty()) {
            throw DataError("empty label at row " + std::to_string(line_no));
        }
        out.labels.push_back(fields[label_col]);
    }
    return out;
}

Dataset encode_labels(LabeledRows rows) {
    const std::set<std::string> distinct(rows.labels.begin(), rows.labels.end());
    if (distinct.size() < 2) throw DataError("fewer than 2 classes");
    Dataset data;
    data.class_names.assign(distinct.begin(), distinct.end());
    std::map<std::string, int> index;
    for (std::size_t k = 0; k < data.class_names.size(); ++k) {
        index.emplace(data.class_names[k], static_cast<int>(k));
    }
    data.labels.reserve(rows.labels.size());
    for (const auto& name : rows.labels) data.labels.push_back(index.at(name));
    data.features = std::move(rows.features);
    return data;
}

Dataset load_csv(const std::filesystem::path& path, LabelColumn label_column, bool has_header) {
    return encode_labels(load_labeled_csv(path, label_column, has_header));
}

Matrix load_feature_csv(const std::filesystem::path& path, bool has_header) {
    const auto rows = read_rows(path, has_header);
    const std::size_t width = rows.front().second.size();
    Matrix out(rows.size(), width);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            out(r, c) = parse_real(rows[r].second[c], rows[r].first, c);
        }
    }
    return out;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    char buf[32];
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (double v : data.features.row(r)) {
            const auto res = std::to_chars(buf, buf + sizeof buf, v);
            out.write(buf, res.ptr - buf);
            out.put(',');
        }
        out << data.class_names[static_cast<std::size_t>(data.labels[r])] << '\n';
    }
    if (!out) throw DataError("write failure on '" + path.string() + "'");
}

ScalerParams ScalerParams::identity(std::size_t dims) {
    return {std::vector<double>(dims, 0.0), std::vector<double>(dims, 1.0)};
}

ScalerParams fit_standardizer(const Matrix& features) {
    const std::size_t n = features.rows();
    const std::size_t d = features.cols();
    ScalerParams params{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
    if (n == 0) return params;
    for (std::size_t j = 0; j < d; ++j) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += features(i, j);
        const double mean = total / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = features(i, j) - mean;
            ss += diff * diff;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n));
        params.means[j] = mean;
        params.std_devs[j] = sd < kMinStdDev ? 1.0 : sd;
    }
    return params;
}

ScalerParams fit_standardizer(const Dataset& data) { return fit_standardizer(data.features); }

Matrix apply_standardizer(const Matrix& features, const ScalerParams& params) {
    if (features.cols() != params.dims()) {
        throw DataError("standardizer expects " + std::to_string(params.dims()) +
                        " features, data has " + std::to_string(features.cols()));
    }
    Matrix out = features;
    for (std::size_t i = 0; i < out.rows(); ++i) {
        auto row = out.row(i);
        for (std::size_t j = 0; j < row.size(); ++j) {
            row[j] = (row[j] - params.means[j]) / params.std_devs[j];
        }
    }
    return out;
}

std::vector<double> apply_standardizer(std::span<const double> x, const ScalerParams& params) {
    if (x.size() != params.dims()) {
        throw DataError("standardizer expects " + std::to_string(params.dims()) +
                        " features, input has " + std::to_string(x.size()));
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - params.means[j]) / params.std_devs[j];
    return out;
}

Dataset apply_standardizer(const Dataset& data, const ScalerParams& params) {
    Dataset out;
    out.features = apply_standardizer(data.features, params);
    out.labels = data.labels;
    out.class_names = data.class_names;
    return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split_indices(
    const Dataset& data, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw std::invalid_argument("test fraction must lie in (0, 1)");
    }
    std::vector<std::vector<std::size_t>> by_class(data.class_names.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        by_class.at(static_cast<std::size_t>(data.labels[i])).push_back(i);
    }
    // mt19937_64 output is fully specified; the shuffle below avoids the
    // implementation-defined std distributions so splits match across toolchains.
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t k = 0; k < by_class.size(); ++k) {
        auto& members = by_class[k];
        if (members.size() < 2) {
            throw DataError("class '" + data.class_names[k] +
                            "' needs at least 2 samples for a split");
        }
        for (std::size_t i = members.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(members[i], members[j]);
        }
        auto n_test = static_cast<std::size_t>(
            std::llround(test_fraction * static_cast<double>(members.size())));
        n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
        test.insert(test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        train.insert(train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
    const auto [train, test] = stratified_split_indices(data, test_fraction, seed);
    return {data.subset(train), data.subset(test)};
}

}  // namespace svbm
