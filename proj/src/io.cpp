#include "scb/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scb/errors.hpp"

namespace scb::io {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

std::optional<double> parse_number(std::string_view field) {
    if (!field.empty() && field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
    return value;
}

std::string location(std::size_t line, std::size_t column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

CurveTable parse_curve_csv(const std::string& text, const CurveCsvOptions& options) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> header;
    std::string header_line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header_line = line;
            break;
        }
    }
    if (header_line.empty()) fail(ErrorKind::Parse, "curve file is empty");
    header = split_fields(header_line);

    std::optional<std::size_t> label_index;
    if (options.label_column) {
        const auto it = std::find(header.begin(), header.end(), std::string_view(*options.label_column));
        if (it == header.end()) fail(ErrorKind::Parse, "label column '" + *options.label_column + "' not found in header");
        label_index = static_cast<std::size_t>(it - header.begin());
    }

    CurveTable table;
    std::vector<std::size_t> value_columns;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (label_index && c == *label_index) continue;
        const auto x = parse_number(header[c]);
        if (!x || !std::isfinite(*x))
            fail(ErrorKind::Parse, "header field '" + std::string(header[c]) + "' at " + location(line_no, c + 1) +
                                       " is not a design point");
        table.original_points.push_back(*x);
        value_columns.push_back(c);
    }
    if (table.original_points.size() < 2) fail(ErrorKind::Parse, "header needs at least two design points");

    std::vector<double> points = table.original_points;
    if (options.rescale) {
        const auto [lo, hi] = std::minmax_element(points.begin(), points.end());
        const double a = *lo;
        const double span = *hi - *lo;
        if (!(span > 0.0)) fail(ErrorKind::Parse, "cannot rescale: design points are all equal");
        for (double& x : points) x = (x - a) / span;
        points.front() = std::clamp(points.front(), 0.0, 1.0);
        points.back() = std::clamp(points.back(), 0.0, 1.0);
    }
    for (std::size_t k = 1; k < points.size(); ++k)
        if (!(points[k] > points[k - 1])) fail(ErrorKind::Parse, "design points in the header must be strictly increasing");
    if (points.front() < 0.0 || points.back() > 1.0)
        fail(ErrorKind::Parse, "design points must lie in [0,1]; pass --rescale to map them there");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size())
            fail(ErrorKind::Parse, "line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                       " fields, header has " + std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(value_columns.size());
        for (std::size_t c : value_columns) {
            const auto v = parse_number(fields[c]);
            if (!v || !std::isfinite(*v))
                fail(ErrorKind::Parse, "non-finite or malformed value '" + std::string(fields[c]) + "' at " +
                                           location(line_no, c + 1));
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
        if (label_index) table.labels.emplace_back(fields[*label_index]);
    }
    if (rows.empty()) fail(ErrorKind::Parse, "curve file has a header but no curves");

    const DesignGrid design = DesignGrid::from_grid(Grid::product({points}));
    table.sample = make_sample(design, rows);
    return table;
}

BasisTable parse_basis_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    BasisTable table;
    std::vector<std::vector<double>> rows;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (!have_header) {
            if (fields.size() < 2) fail(ErrorKind::Parse, "basis file needs an x column and at least one function");
            for (std::size_t c = 1; c < fields.size(); ++c) table.names.emplace_back(fields[c]);
            have_header = true;
            continue;
        }
        if (fields.size() != table.names.size() + 1)
            fail(ErrorKind::Parse, "basis file line " + std::to_string(line_no) + " has the wrong number of fields");
        std::vector<double> row;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            const auto v = parse_number(fields[c]);
            if (!v || !std::isfinite(*v))
                fail(ErrorKind::Parse, "malformed basis value '" + std::string(fields[c]) + "' at " + location(line_no, c + 1));
            row.push_back(*v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) fail(ErrorKind::Parse, "basis file needs at least two nodes");
    table.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(table.names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        table.nodes.push_back(rows[r][0]);
        for (std::size_t c = 0; c < table.names.size(); ++c)
            table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c + 1];
    }
    return table;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Parse, "cannot open '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::InvalidArgument, "cannot write '" + path.string() + "'");
    out << text;
    if (!out) fail(ErrorKind::InvalidArgument, "write to '" + path.string() + "' failed");
}

CurveTable read_curve_csv(const std::filesystem::path& path, const CurveCsvOptions& options) {
    return parse_curve_csv(read_text(path), options);
}

std::string curve_csv(const FunctionalSample& sample) {
    require(sample.design.dim() == 1, "curve CSV holds one-dimensional designs only");
    std::string out;
    const Grid& grid = sample.design.grid();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        if (j) out += ',';
        out += format_double(grid.point(j)[0]);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < sample.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < sample.values.cols(); ++j) {
            if (j) out += ',';
            out += format_double(sample.values(i, j));
        }
        out += '\n';
    }
    return out;
}

void write_curve_csv(const std::filesystem::path& path, const FunctionalSample& sample) {
    write_text(path, curve_csv(sample));
}

std::vector<std::pair<std::string, FunctionalSample>> split_by_label(const CurveTable& table) {
    require(table.labels.size() == table.sample.n(), "curve table has no labels");
    std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < table.labels.size(); ++i) {
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == table.labels[i]; });
        if (it == groups.end()) {
            groups.emplace_back(table.labels[i], std::vector<std::size_t>{});
            it = std::prev(groups.end());
        }
        it->second.push_back(i);
    }
    std::vector<std::pair<std::string, FunctionalSample>> out;
    for (const auto& [label, rows] : groups) out.emplace_back(label, select_rows(table.sample, rows));
    return out;
}

nlohmann::json number_or_null(double value) {
    if (!std::isfinite(value)) return nullptr;
    return value;
}

std::string band_csv(const BandResult& band, const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra_columns) {
    const Grid& grid = band.center.grid;
    const bool two_d = grid.dim() == 2;
    for (const auto& [name, col] : extra_columns)
        require(static_cast<std::size_t>(col.size()) == grid.size(), "extra column '" + name + "' has the wrong length");
    std::string out = two_d ? "x1,x2,center,lower,upper,half_width" : "x,center,lower,upper,half_width";
    for (const auto& extra : extra_columns) out += "," + extra.first;
    out += '\n';
    const Eigen::VectorXd lo = band.lower();
    const Eigen::VectorXd hi = band.upper();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const auto a = static_cast<Eigen::Index>(j);
        const Point x = grid.point(j);
        out += format_double(x[0]);
        if (two_d) out += "," + format_double(x[1]);
        out += "," + format_double(band.center.values(a)) + "," + format_double(lo(a)) + "," + format_double(hi(a)) +
               "," + format_double(band.half_width.values(a));
        for (const auto& extra : extra_columns) out += "," + format_double(extra.second(a));
        out += '\n';
    }
    return out;
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json out = nlohmann::json::array();
    for (Eigen::Index a = 0; a < v.size(); ++a) out.push_back(number_or_null(v(a)));
    return out;
}

nlohmann::json grid_json(const Grid& grid) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const Point x = grid.point(j);
        if (grid.dim() == 1) out.push_back(x[0]);
        else out.push_back({x[0], x[1]});
    }
    return out;
}

}  // namespace

nlohmann::json band_json(const BandResult& band) {
    return {
        {"level", band.level},
        {"method", to_string(band.method)},
        {"threshold", number_or_null(band.threshold)},
        {"threshold_standard_error", number_or_null(band.threshold_standard_error)},
        {"grid", grid_json(band.center.grid)},
        {"center", vector_json(band.center.values)},
        {"lower", vector_json(band.lower())},
        {"upper", vector_json(band.upper())},
        {"provenance",
         {{"bandwidth", band.provenance.bandwidth},
          {"kernel", band.provenance.kernel},
          {"paths", band.provenance.paths},
          {"seed", band.provenance.seed}}},
        {"diagnostics", {{"lambda", number_or_null(band.shrinkage_lambda)}, {"clipped_mass", band.clipped_mass}}},
    };
}

nlohmann::json gof_json(const GofReport& report) {
    return {
        {"T", number_or_null(report.statistic)},
        {"c_alpha", number_or_null(report.threshold)},
        {"alpha", report.alpha},
        {"reject", report.reject},
        {"band", band_json(report.band)},
        {"diagnostics", {{"lambda", number_or_null(report.shrinkage_lambda)}, {"clipped_mass", report.clipped_mass}}},
        {"warnings", report.warnings},
    };
}

nlohmann::json plrt_json(const PlrtReport& report) {
    return {
        {"F", number_or_null(report.f)},
        {"p_value", number_or_null(report.p_value)},
        {"alpha", report.alpha},
        {"reject", report.reject},
        {"covariance", to_string(report.mode)},
        {"cumulants", {number_or_null(report.cumulants[0]), number_or_null(report.cumulants[1]),
                       number_or_null(report.cumulants[2])}},
        {"fit", {{"a", number_or_null(report.a)}, {"b", number_or_null(report.b)}, {"c", number_or_null(report.c)}}},
        {"diagnostics", {{"normal_fallback", report.normal_fallback}}},
    };
}

std::string experiment_csv(const ExperimentTable& table, bool include_timing) {
    std::string out = "model,n,p,h,method,level,reps,completed,failures,rate,standard_error,median_threshold,"
                      "failure_flag,low_coverage_flag";
    if (include_timing) out += ",wall_seconds";
    out += '\n';
    for (const ExperimentRow& r : table.rows) {
        out += to_string(r.model) + "," + std::to_string(r.n) + "," + std::to_string(r.p) + "," + format_double(r.h) +
               "," + to_string(r.method) + "," + format_double(r.level) + "," + std::to_string(r.reps) + "," +
               std::to_string(r.completed) + "," + std::to_string(r.failures) + "," + format_double(r.rate) + "," +
               format_double(r.standard_error) + "," + format_double(r.median_threshold) + "," +
               (r.failure_flag ? "1" : "0") + "," + (r.low_coverage_flag ? "1" : "0");
        if (include_timing) out += "," + format_double(r.wall_seconds);
        out += '\n';
    }
    return out;
}

nlohmann::json experiment_json(const ExperimentTable& table, bool include_timing) {
    nlohmann::json rows = nlohmann::json::array();
    for (const ExperimentRow& r : table.rows) {
        nlohmann::json row = {
            {"model", to_string(r.model)},
            {"n", r.n},
            {"p", r.p},
            {"h", r.h},
            {"method", to_string(r.method)},
            {"level", r.level},
            {"reps", r.reps},
            {"completed", r.completed},
            {"failures", r.failures},
            {"rate", number_or_null(r.rate)},
            {"standard_error", number_or_null(r.standard_error)},
            {"median_threshold", number_or_null(r.median_threshold)},
            {"failure_flag", r.failure_flag},
            {"low_coverage_flag", r.low_coverage_flag},
        };
        if (!r.first_failure.empty()) row["first_failure"] = r.first_failure;
        if (include_timing) row["wall_seconds"] = r.wall_seconds;
        rows.push_back(std::move(row));
    }
    return {{"rows", rows}};
}

}  // namespace scb::io
