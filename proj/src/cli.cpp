#include "scb/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scb/bands.hpp"
#include "scb/errors.hpp"
#include "scb/gof.hpp"
#include "scb/io.hpp"
#include "scb/plrt.hpp"
#include "scb/simlab.hpp"
#include "scb/smoother.hpp"

namespace scb::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Settings {
    std::string command;
    std::vector<std::string> inputs;
    std::string test_input;
    std::string out;
    std::string h = "cv";
    std::string kernel = "epanechnikov";
    std::optional<double> level;
    std::optional<double> alpha;
    std::optional<std::uint64_t> seed;
    std::size_t paths = 0;
    std::size_t bootstraps = 2500;
    std::size_t grid_size = 100;
    unsigned threads = 1;
    std::string format = "both";
    std::string method;
    int degree = 1;
    std::string basis_file;
    bool also_plrt = false;
    std::string plrt_cov = "np";
    std::optional<std::string> label_column;
    bool rescale = false;
    std::string model;
    std::size_t n = 0;
    std::size_t p = 0;
    std::size_t reps = 2000;
    std::string hypothesis = "h0";
    bool timing = false;
    std::string config;
};

template <typename T>
T json_value(const json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::Parse, "config key '" + key + "' has the wrong type");
    }
}

std::string json_text(const json& value, const std::string& key) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number()) return io::format_double(value.get<double>());
    if (value.is_array()) {
        std::string joined;
        for (const auto& item : value) {
            if (!joined.empty()) joined += ",";
            joined += json_text(item, key);
        }
        return joined;
    }
    fail(ErrorKind::Parse, "config key '" + key + "' must be a string or number");
}

// Values in the config file take precedence over command-line flags.
void apply_config(const json& config, Settings& s) {
    if (!config.is_object()) fail(ErrorKind::Parse, "config file must hold a JSON object");
    for (const auto& [key, value] : config.items()) {
        if (key == "in") {
            s.inputs.clear();
            if (value.is_array())
                for (const auto& item : value) s.inputs.push_back(json_value<std::string>(item, key));
            else
                s.inputs.push_back(json_value<std::string>(value, key));
        } else if (key == "test") s.test_input = json_value<std::string>(value, key);
        else if (key == "out") s.out = json_value<std::string>(value, key);
        else if (key == "h") s.h = json_text(value, key);
        else if (key == "kernel") s.kernel = json_value<std::string>(value, key);
        else if (key == "level") s.level = json_value<double>(value, key);
        else if (key == "alpha") s.alpha = json_value<double>(value, key);
        else if (key == "seed") s.seed = json_value<std::uint64_t>(value, key);
        else if (key == "paths") s.paths = json_value<std::size_t>(value, key);
        else if (key == "B" || key == "bootstraps") s.bootstraps = json_value<std::size_t>(value, key);
        else if (key == "grid_size") s.grid_size = json_value<std::size_t>(value, key);
        else if (key == "threads") s.threads = json_value<unsigned>(value, key);
        else if (key == "format") s.format = json_value<std::string>(value, key);
        else if (key == "method") s.method = json_text(value, key);
        else if (key == "degree") s.degree = json_value<int>(value, key);
        else if (key == "basis_file") s.basis_file = json_value<std::string>(value, key);
        else if (key == "also_plrt") s.also_plrt = json_value<bool>(value, key);
        else if (key == "plrt_cov") s.plrt_cov = json_value<std::string>(value, key);
        else if (key == "label_column") s.label_column = json_value<std::string>(value, key);
        else if (key == "rescale") s.rescale = json_value<bool>(value, key);
        else if (key == "model") s.model = json_text(value, key);
        else if (key == "n") s.n = json_value<std::size_t>(value, key);
        else if (key == "p") s.p = json_value<std::size_t>(value, key);
        else if (key == "reps") s.reps = json_value<std::size_t>(value, key);
        else if (key == "hypothesis") s.hypothesis = json_value<std::string>(value, key);
        else if (key == "timing") s.timing = json_value<bool>(value, key);
        else fail(ErrorKind::Parse, "unknown config key '" + key + "'");
    }
}

double resolve_gamma(const Settings& s) {
    std::optional<double> gamma;
    if (s.level) {
        if (!(*s.level > 0.0 && *s.level < 1.0)) fail(ErrorKind::InvalidArgument, "--level must lie in (0,1)");
        gamma = 1.0 - *s.level;
    }
    if (s.alpha) {
        if (!(*s.alpha > 0.0 && *s.alpha < 1.0)) fail(ErrorKind::InvalidArgument, "--alpha must lie in (0,1)");
        if (gamma && std::abs(*gamma - *s.alpha) > 1e-12)
            fail(ErrorKind::InvalidArgument, "--level and --alpha disagree");
        gamma = *s.alpha;
    }
    return gamma.value_or(0.05);
}

std::uint64_t require_seed(const Settings& s) {
    if (!s.seed) fail(ErrorKind::InvalidArgument, "--seed is required for '" + s.command + "'");
    return *s.seed;
}

void check_format(const Settings& s) {
    if (s.format != "csv" && s.format != "json" && s.format != "both")
        fail(ErrorKind::InvalidArgument, "--format must be csv, json or both");
}

std::optional<double> parse_positive(const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
    return v;
}

io::CurveTable load_table(const std::string& path, const Settings& s, bool with_labels = false) {
    io::CurveCsvOptions options;
    options.rescale = s.rescale;
    if (with_labels) options.label_column = s.label_column;
    return io::read_curve_csv(path, options);
}

void require_curves(const FunctionalSample& sample, const std::string& what) {
    if (sample.n() < 2)
        fail(ErrorKind::Degenerate, "n ≥ 2 required (" + what + " has " + std::to_string(sample.n()) + " curve)");
}

FunctionalSample load_sample(const std::string& path, const Settings& s) {
    FunctionalSample sample = load_table(path, s).sample;
    require_curves(sample, path);
    return sample;
}

std::vector<double> default_candidates(const FunctionalSample& sample, const EvalGrid& eval, const Kernel& kernel) {
    const auto p = static_cast<double>(sample.p());
    const double lo = 0.5 / p;
    const double hi = 0.5;
    constexpr int count = 30;
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
        const double h = lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
        if (bandwidth_is_well_posed(sample.design.grid(), eval, Bandwidth(h), kernel)) out.push_back(h);
    }
    if (out.empty()) fail(ErrorKind::IllPosed, "no default bandwidth candidate is well posed on the evaluation grid");
    return out;
}

Bandwidth resolve_bandwidth(const FunctionalSample& sample, const EvalGrid& eval, const Kernel& kernel,
                            const Settings& s, std::ostream& err) {
    if (s.h == "cv") {
        const CvResult cv = cv_bandwidth(sample, kernel, default_candidates(sample, eval, kernel));
        for (const auto& w : cv.warnings) err << "warning: " << w << "\n";
        return cv.bandwidth;
    }
    const auto h = parse_positive(s.h);
    if (!h || !(*h > 0.0)) fail(ErrorKind::InvalidArgument, "--h must be a positive number or 'cv'");
    if (!bandwidth_is_well_posed(sample.design.grid(), eval, Bandwidth(*h), kernel))
        fail(ErrorKind::IllPosed, "bandwidth " + s.h + " leaves evaluation points with too few design points");
    return Bandwidth(*h);
}

std::string default_base(const Settings& s, const std::string& suffix) {
    if (!s.out.empty()) return s.out;
    if (s.inputs.empty()) return suffix;
    return fs::path(s.inputs.front()).stem().string() + "_" + suffix;
}

void write_outputs(const Settings& s, const std::string& base, const std::string& csv, const json& doc) {
    if (s.format == "csv" || s.format == "both") io::write_text(base + ".csv", csv);
    if (s.format == "json" || s.format == "both") io::write_text(base + ".json", doc.dump(2) + "\n");
}

void print_summary(std::ostream& out, const std::vector<std::pair<std::string, std::string>>& rows) {
    std::size_t width = 0;
    for (const auto& row : rows) width = std::max(width, row.first.size());
    for (const auto& [key, value] : rows) out << std::left << std::setw(static_cast<int>(width + 2)) << key << value << "\n";
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

std::vector<std::pair<std::string, std::string>> band_summary(const BandResult& band, std::size_t n, std::size_t p) {
    return {
        {"n", std::to_string(n)},
        {"p", std::to_string(p)},
        {"h", fmt(band.provenance.bandwidth.front())},
        {"kernel", band.provenance.kernel},
        {"method", to_string(band.method)},
        {"level", fmt(band.level)},
        {"c", fmt(band.threshold)},
        {"half-width min", fmt(band.half_width.values.minCoeff())},
        {"half-width max", fmt(band.half_width.values.maxCoeff())},
    };
}

int cmd_scb(const Settings& s, std::ostream& out, std::ostream& err) {
    if (s.inputs.size() != 1) fail(ErrorKind::InvalidArgument, "scb takes exactly one --in file");
    const double gamma = resolve_gamma(s);
    const std::uint64_t seed = require_seed(s);
    const FunctionalSample sample = load_sample(s.inputs.front(), s);
    const Kernel kernel = Kernel::from_name(s.kernel);
    const EvalGrid eval = Grid::equispaced(s.grid_size);
    const Bandwidth h = resolve_bandwidth(sample, eval, kernel, s, err);

    BandResult band;
    const std::string method = s.method.empty() ? "normal" : s.method;
    if (method == "bootstrap") {
        BootstrapOptions opt;
        opt.gamma = gamma;
        opt.resamples = s.bootstraps;
        opt.seed = seed;
        opt.threads = s.threads;
        band = bootstrap_scb(sample, eval, h, kernel, opt);
    } else if (method == "normal") {
        ScbOptions opt;
        opt.gamma = gamma;
        opt.paths = s.paths;
        opt.seed = seed;
        opt.threads = s.threads;
        band = normal_scb(sample, eval, h, kernel, opt);
    } else {
        fail(ErrorKind::InvalidArgument, "--method must be normal or bootstrap");
    }
    write_outputs(s, default_base(s, "band"), io::band_csv(band), io::band_json(band));
    print_summary(out, band_summary(band, sample.n(), sample.p()));
    return kOk;
}

BasisModel load_basis(const Settings& s) {
    if (!s.basis_file.empty()) {
        const io::BasisTable table = io::parse_basis_csv(io::read_text(s.basis_file));
        return BasisModel::tabulated(table.nodes, table.values);
    }
    if (s.degree < 0) fail(ErrorKind::InvalidArgument, "--degree must be >= 0");
    return BasisModel::polynomial(s.degree);
}

CovarianceMode plrt_mode(const std::string& name) {
    if (name == "np" || name == "nonparametric") return CovarianceMode::Nonparametric;
    if (name == "ar1" || name == "parametric") return CovarianceMode::ParametricAr1;
    fail(ErrorKind::InvalidArgument, "--plrt-cov must be np or ar1");
}

int cmd_gof(const Settings& s, std::ostream& out, std::ostream& err) {
    if (s.inputs.size() != 1) fail(ErrorKind::InvalidArgument, "gof takes exactly one --in file");
    const double alpha = resolve_gamma(s);
    const std::uint64_t seed = require_seed(s);
    const FunctionalSample sample = load_sample(s.inputs.front(), s);
    const Kernel kernel = Kernel::from_name(s.kernel);
    const EvalGrid eval = Grid::equispaced(s.grid_size);
    const Bandwidth h = resolve_bandwidth(sample, eval, kernel, s, err);
    const BasisModel model = load_basis(s);

    GofOptions opt;
    opt.alpha = alpha;
    opt.paths = s.paths;
    opt.seed = seed;
    opt.threads = s.threads;
    const GofReport report = scb_gof_test(sample, model, eval, h, kernel, opt);
    for (const auto& w : report.warnings) err << "warning: " << w << "\n";
    json doc = io::gof_json(report);

    std::vector<std::pair<std::string, std::string>> rows = {
        {"n", std::to_string(sample.n())},
        {"p", std::to_string(sample.p())},
        {"h", fmt(h[0])},
        {"basis size", std::to_string(model.size())},
        {"alpha", fmt(alpha)},
        {"SCB T", fmt(report.statistic)},
        {"SCB c_alpha", fmt(report.threshold)},
        {"SCB reject", report.reject ? "yes" : "no"},
    };
    if (s.also_plrt) {
        const PlrtReport plrt = plrt_test(sample, model, h, kernel, plrt_mode(s.plrt_cov), alpha);
        doc["plrt"] = io::plrt_json(plrt);
        rows.emplace_back("PLRT F", fmt(plrt.f));
        rows.emplace_back("PLRT p-value", fmt(plrt.p_value));
        rows.emplace_back("PLRT reject", plrt.reject ? "yes" : "no");
    }
    write_outputs(s, default_base(s, "gof"), io::band_csv(report.band), doc);
    print_summary(out, rows);
    return kOk;
}

int cmd_compare(const Settings& s, std::ostream& out, std::ostream& err) {
    const double alpha = resolve_gamma(s);
    const std::uint64_t seed = require_seed(s);
    std::vector<std::pair<std::string, FunctionalSample>> groups;
    if (s.inputs.size() == 2) {
        for (const auto& path : s.inputs) groups.emplace_back(fs::path(path).stem().string(), load_table(path, s).sample);
    } else if (s.inputs.size() == 1 && s.label_column) {
        groups = io::split_by_label(load_table(s.inputs.front(), s, true));
        if (groups.size() != 2)
            fail(ErrorKind::InvalidArgument, "label column must define exactly two groups, found " +
                                                 std::to_string(groups.size()));
    } else {
        fail(ErrorKind::InvalidArgument, "compare needs two --in files or one file with --label-column");
    }
    for (const auto& [label, sample] : groups) require_curves(sample, label);

    const Kernel kernel = Kernel::from_name(s.kernel);
    const EvalGrid eval = Grid::equispaced(s.grid_size);
    const Bandwidth ha = resolve_bandwidth(groups[0].second, eval, kernel, s, err);
    const Bandwidth hb = resolve_bandwidth(groups[1].second, eval, kernel, s, err);
    ScbOptions opt;
    opt.gamma = alpha;
    opt.paths = s.paths;
    opt.seed = seed;
    opt.threads = s.threads;
    const TwoSampleResult result = two_sample_scb(groups[0].second, groups[1].second, eval, ha, hb, kernel, opt);
    const Eigen::VectorXd mean_a = fit_mean(groups[0].second, eval, ha, kernel).mean.values;
    const Eigen::VectorXd mean_b = fit_mean(groups[1].second, eval, hb, kernel).mean.values;

    json doc = {
        {"reject", result.reject},
        {"statistic", io::number_or_null(result.statistic)},
        {"alpha", alpha},
        {"labels", {groups[0].first, groups[1].first}},
        {"band", io::band_json(result.band)},
    };
    write_outputs(s, default_base(s, "compare"), io::band_csv(result.band, {{"mean_a", mean_a}, {"mean_b", mean_b}}), doc);
    print_summary(out, {
                           {"sample a", groups[0].first + " (n=" + std::to_string(groups[0].second.n()) + ")"},
                           {"sample b", groups[1].first + " (n=" + std::to_string(groups[1].second.n()) + ")"},
                           {"h", fmt(ha[0]) + ", " + fmt(hb[0])},
                           {"alpha", fmt(alpha)},
                           {"statistic", fmt(result.statistic)},
                           {"c", fmt(result.band.threshold)},
                           {"reject", result.reject ? "yes" : "no"},
                       });
    return kOk;
}

int cmd_predict(const Settings& s, std::ostream& out, std::ostream& err) {
    std::string test_path = s.test_input;
    if (test_path.empty() && s.inputs.size() == 2) test_path = s.inputs[1];
    if (s.inputs.empty() || test_path.empty())
        fail(ErrorKind::InvalidArgument, "predict needs a training --in file and a --test file");
    const double gamma = resolve_gamma(s);
    const std::uint64_t seed = require_seed(s);
    const FunctionalSample train = load_sample(s.inputs.front(), s);
    const FunctionalSample test = load_table(test_path, s).sample;
    const Kernel kernel = Kernel::from_name(s.kernel);
    const EvalGrid eval = Grid::equispaced(s.grid_size);

    ScbOptions opt;
    opt.gamma = gamma;
    opt.paths = s.paths;
    opt.seed = seed;
    opt.threads = s.threads;
    std::optional<Bandwidth> h;
    if (s.h == "split") {
        const SplitHalfResult split = split_half_bandwidth(train, eval, default_candidates(train, eval, kernel), kernel, opt);
        for (const auto& w : split.warnings) err << "warning: " << w << "\n";
        h = split.bandwidth;
    } else {
        h = resolve_bandwidth(train, eval, kernel, s, err);
    }
    const BandResult band = prediction_band(train, eval, *h, kernel, opt);
    const double coverage = prediction_coverage(band, test, *h, kernel);

    json doc = io::band_json(band);
    doc["test_coverage"] = coverage;
    doc["test_curves"] = test.n();
    write_outputs(s, default_base(s, "prediction"), io::band_csv(band), doc);
    auto rows = band_summary(band, train.n(), train.p());
    rows.emplace_back("test curves", std::to_string(test.n()));
    rows.emplace_back("test coverage", fmt(coverage));
    print_summary(out, rows);
    return kOk;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_simulate(const Settings& s, std::ostream& out, std::ostream& /*err*/) {
    if (s.model.empty()) fail(ErrorKind::InvalidArgument, "--model is required");
    ModelSpec spec;
    spec.model = parse_model_id(s.model);
    if (spec.model == ModelId::M3H0 || spec.model == ModelId::M3Hn) {
        if (s.hypothesis == "hn" || s.hypothesis == "Hn" || s.hypothesis == "alt") spec.model = ModelId::M3Hn;
        else if (s.hypothesis != "h0" && s.hypothesis != "H0")
            fail(ErrorKind::InvalidArgument, "--hypothesis must be h0 or hn");
    }
    spec.n = s.n;
    spec.p = s.p;
    const auto h = parse_positive(s.h);
    if (!h) fail(ErrorKind::InvalidArgument, "simulate needs a numeric --h");
    spec.h = *h;
    spec.kernel = Kernel::from_name(s.kernel);
    spec.level = resolve_gamma(s);
    spec.reps = s.reps;
    spec.seed = require_seed(s);
    spec.grid_size = s.grid_size;
    spec.paths = s.paths;
    spec.bootstraps = s.bootstraps;
    spec.threads = s.threads;

    std::vector<ExperimentMethod> methods;
    const std::string method_text =
        s.method.empty() ? (spec.model == ModelId::M3H0 || spec.model == ModelId::M3Hn ? "gof-scb" : "normal-scb")
                         : s.method;
    for (const auto& name : split_list(method_text)) methods.push_back(parse_method(name));
    if (methods.empty()) fail(ErrorKind::InvalidArgument, "--method lists no methods");

    const ExperimentTable table = run_experiment(spec, methods);
    write_outputs(s, default_base(s, "experiment"), io::experiment_csv(table, s.timing),
                  io::experiment_json(table, s.timing));
    out << std::left << std::setw(7) << "model" << std::setw(6) << "n" << std::setw(6) << "p" << std::setw(8) << "h"
        << std::setw(15) << "method" << std::setw(10) << "rate" << std::setw(10) << "se" << std::setw(10) << "median_c"
        << "failures\n";
    for (const ExperimentRow& r : table.rows) {
        out << std::left << std::setw(7) << to_string(r.model) << std::setw(6) << r.n << std::setw(6) << r.p
            << std::setw(8) << fmt(r.h) << std::setw(15) << to_string(r.method) << std::setw(10) << fmt(r.rate)
            << std::setw(10) << fmt(r.standard_error) << std::setw(10) << fmt(r.median_threshold) << r.failures;
        if (r.failure_flag) out << " [failures > 1%]";
        if (r.low_coverage_flag) out << " [coverage < 0.85]";
        out << "\n";
    }
    return kOk;
}

void add_shared(CLI::App* sub, Settings& s) {
    sub->add_option("--in", s.inputs, "Input curve CSV (header = design points, one curve per row)");
    sub->add_option("--out", s.out, "Output path prefix; .csv and/or .json are appended");
    sub->add_option("--level", s.level, "Confidence level 1 - gamma");
    sub->add_option("--alpha", s.alpha, "Significance level");
    sub->add_option("--h", s.h, "Bandwidth: a number, 'cv', or 'split' (predict)");
    sub->add_option("--kernel", s.kernel, "epanechnikov | gauss");
    sub->add_option("--grid-size", s.grid_size, "Evaluation grid size");
    sub->add_option("--paths", s.paths, "Monte-Carlo sup-norm paths (0 = by design size)");
    sub->add_option("--B", s.bootstraps, "Bootstrap resamples");
    sub->add_option("--seed", s.seed, "Random seed (required)");
    sub->add_option("--threads", s.threads, "Worker threads");
    sub->add_option("--format", s.format, "csv | json | both");
    sub->add_option("--config", s.config, "JSON file whose values override flags");
    sub->add_flag("--rescale", s.rescale, "Map header design points onto [0,1]");
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Parse:
        case ErrorKind::InvalidArgument: return kBadInput;
        case ErrorKind::Degenerate: return kDegenerate;
        case ErrorKind::IllPosed: return kIllPosed;
        case ErrorKind::Numerical: return kFailure;
    }
    return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Settings s;
    CLI::App app{"Simultaneous confidence bands and sup-norm tests for functional data", "scbfd"};
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    auto* scb = app.add_subcommand("scb", "Simultaneous confidence band for the mean curve");
    add_shared(scb, s);
    scb->add_option("--method", s.method, "normal | bootstrap");

    auto* gof = app.add_subcommand("gof", "Sup-norm goodness-of-fit test of a basis model");
    add_shared(gof, s);
    gof->add_option("--degree", s.degree, "Polynomial null model degree");
    gof->add_option("--basis-file", s.basis_file, "Tabulated basis CSV (x, phi_1, ..., phi_L)");
    gof->add_flag("--also-plrt", s.also_plrt, "Also run the pseudo-likelihood ratio test");
    gof->add_option("--plrt-cov", s.plrt_cov, "PLRT covariance: np | ar1");

    auto* compare = app.add_subcommand("compare", "Two-sample comparison of mean curves");
    add_shared(compare, s);
    compare->add_option("--label-column", s.label_column, "Column splitting one file into two samples");

    auto* predict = app.add_subcommand("predict", "Prediction band for new curves");
    add_shared(predict, s);
    predict->add_option("--test", s.test_input, "Test curve CSV");

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo experiment on a simulation model");
    add_shared(simulate, s);
    simulate->add_option("--model", s.model, "1 | 2 | 3");
    simulate->add_option("--hypothesis", s.hypothesis, "h0 | hn (model 3)");
    simulate->add_option("--n", s.n, "Curves per sample");
    simulate->add_option("--p", s.p, "Design points");
    simulate->add_option("--reps", s.reps, "Replications");
    simulate->add_option("--method", s.method, "Comma list: normal-scb, bootstrap-scb, gof-scb, plrt-np, plrt-ar1, plrt-known");
    simulate->add_flag("--timing", s.timing, "Include wall time in outputs");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadInput;
    }

    try {
        for (auto* sub : app.get_subcommands()) s.command = sub->get_name();
        if (!s.config.empty()) {
            json config;
            try {
                config = json::parse(io::read_text(s.config));
            } catch (const json::parse_error& e) {
                fail(ErrorKind::Parse, "config file '" + s.config + "' is not valid JSON: " + e.what());
            }
            apply_config(config, s);
        }
        check_format(s);
        if (s.threads == 0) s.threads = 1;
        if (s.command == "scb") return cmd_scb(s, out, err);
        if (s.command == "gof") return cmd_gof(s, out, err);
        if (s.command == "compare") return cmd_compare(s, out, err);
        if (s.command == "predict") return cmd_predict(s, out, err);
        if (s.command == "simulate") return cmd_simulate(s, out, err);
        fail(ErrorKind::InvalidArgument, "unknown subcommand");
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace scb::cli
