#pragma once

#include <filesystem>
#include <utility>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "scb/bands.hpp"
#include "scb/core_model.hpp"
#include "scb/gof.hpp"
#include "scb/plrt.hpp"
#include "scb/simlab.hpp"

namespace scb::io {

/// Shortest decimal that reads back to the same double.
std::string format_double(double value);

struct CurveCsvOptions {
    /// Column holding class labels; it is excluded from the design points.
    std::optional<std::string> label_column;
    /// Map header design points affinely onto [0,1] (min -> 0, max -> 1).
    bool rescale = false;
};

/// Wide curve table: the header lists the design points, each further row is
/// one curve. Blank lines are skipped.
struct CurveTable {
    FunctionalSample sample;
    std::vector<std::string> labels;  ///< one per row when a label column was given
    std::vector<double> original_points;  ///< header values before rescaling
};

CurveTable parse_curve_csv(const std::string& text, const CurveCsvOptions& options = {});
CurveTable read_curve_csv(const std::filesystem::path& path, const CurveCsvOptions& options = {});

std::string curve_csv(const FunctionalSample& sample);
void write_curve_csv(const std::filesystem::path& path, const FunctionalSample& sample);

/// Tabulated basis: header "x,name1,name2,...", then one row per node.
struct BasisTable {
    std::vector<double> nodes;
    Eigen::MatrixXd values;  ///< nodes x functions
    std::vector<std::string> names;
};

BasisTable parse_basis_csv(const std::string& text);

/// Splits rows by label, in order of first appearance.
std::vector<std::pair<std::string, FunctionalSample>> split_by_label(const CurveTable& table);

/// x (and x2 for d = 2), center, lower, upper, half_width; extra columns are appended.
std::string band_csv(const BandResult& band,
                     const std::vector<std::pair<std::string, Eigen::VectorXd>>& extra_columns = {});
nlohmann::json band_json(const BandResult& band);

nlohmann::json gof_json(const GofReport& report);
nlohmann::json plrt_json(const PlrtReport& report);

std::string experiment_csv(const ExperimentTable& table, bool include_timing = false);
nlohmann::json experiment_json(const ExperimentTable& table, bool include_timing = false);

/// NaN and infinities become null.
nlohmann::json number_or_null(double value);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace scb::io
