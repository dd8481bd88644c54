#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "ufrkit/data.hpp"
#include "ufrkit/error.hpp"
#include "ufrkit/harness.hpp"
#include "ufrkit/interpret.hpp"
#include "ufrkit/random.hpp"
#include "ufrkit/stats.hpp"
#include "ufrkit/ufr.hpp"
#include "ufrkit/yield_forecast.hpp"

namespace ufrkit::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Options shared by every subcommand.
struct Common {
    std::uint64_t seed = 0;
    bool serial = false;
    std::string out_dir;
    std::string config;

    [[nodiscard]] Exec exec() const { return serial ? Exec::Serial : Exec::Parallel; }
};

struct ModelOptions {
    std::string kind = "ridge";
    double lambda = 1.0;
    double mu = 0.5;
    int components = 3;
    bool group_pc = false;
    int depth = 3;
    int min_leaf = 1;
    int trees = 100;
    double feature_frac = 1.0 / 3.0;
    int stages = 100;
    double eta = 0.1;
    double reg_lambda = 1.0;
    double gamma = 0.0;
    std::string arch = "yield_macro";
    std::vector<int> hidden{32, 16, 8};
    std::vector<int> group_hidden{4};
    int combiner = 3;
    double l2 = 1e-3;
    int epochs = 300;
    double lr = 1e-2;
    int batch = 0;

    [[nodiscard]] ModelSpec spec(std::uint64_t seed) const {
        ModelSpec s;
        s.kind = parse_model_kind(kind);
        s.lambda = lambda;
        s.mu = mu;
        s.components = components;
        s.group_pc_macro = group_pc;
        s.tree.max_depth = depth;
        s.tree.min_leaf = min_leaf;
        s.forest.trees = trees;
        s.forest.feature_frac = feature_frac;
        s.boost.stages = stages;
        s.boost.eta = eta;
        s.boost.reg_lambda = reg_lambda;
        s.boost.gamma = gamma;
        s.mlp.architecture = parse_architecture(arch);
        s.mlp.hidden = hidden;
        s.mlp.group_hidden = group_hidden;
        s.mlp.combiner_nodes = combiner;
        s.mlp.l2 = l2;
        s.mlp.epochs = epochs;
        s.mlp.learning_rate = lr;
        s.mlp.batch_size = batch;
        s.seed = seed;
        s.validate();
        return s;
    }
};

// Inputs of the forecasting subcommands.
struct PanelInputs {
    std::string yields;
    std::string macro;
    std::string groups;
    std::string ufr;
    std::string feature_set;
};

// Required options are checked after config files are merged, so a config file
// may supply them.
constexpr const char* kRequired = "Required";

/// Report numbers carry 10 significant digits; non-finite values become null.
Json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::stod(format_report(v));
}

void write_json(const fs::path& path, const Json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("io", "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

std::ofstream open_csv(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("io", "cannot write " + path.string());
    return out;
}

std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q.push_back('"');
        q.push_back(c);
    }
    return q + "\"";
}

Json report_json(const EvalReport& r) {
    Json j;
    j["rmse"] = num(r.rmse);
    j["mae"] = num(r.mae);
    j["r_oos"] = num(r.r_oos);
    j["cw_stat"] = num(r.cw_stat);
    j["cw_band"] = std::string(to_string(r.cw_band));
    j["cw_form"] = std::string(to_string(r.cw_form));
    j["n"] = r.n;
    return j;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "File of option = value lines; command-line flags take precedence");
    sub->add_option("--seed", c.seed, "Root seed for every random stream");
    sub->add_flag("--serial", c.serial, "Use the serial reference path instead of OpenMP");
    sub->add_option("--out-dir", c.out_dir, "Directory for the output files")->group(kRequired);
}

void add_model(CLI::App* sub, ModelOptions& m) {
    sub->add_option("--model", m.kind, "ols, ridge, lasso, enet, pcr, pls, tree, forest, gbrt, xgb or mlp");
    sub->add_option("--lambda", m.lambda, "Penalty of ridge, lasso and elastic net");
    sub->add_option("--mu", m.mu, "Elastic-net L1 share");
    sub->add_option("--components", m.components, "PCR / PLS components");
    sub->add_flag("--group-pc", m.group_pc, "Replace each macro group by its first principal component");
    sub->add_option("--depth", m.depth, "Tree depth");
    sub->add_option("--min-leaf", m.min_leaf, "Minimum rows per leaf");
    sub->add_option("--trees", m.trees, "Random-forest trees");
    sub->add_option("--feature-frac", m.feature_frac, "Random-forest feature fraction per split");
    sub->add_option("--stages", m.stages, "Boosting stages");
    sub->add_option("--eta", m.eta, "Boosting shrinkage");
    sub->add_option("--xgb-lambda", m.reg_lambda, "XGB leaf-weight penalty");
    sub->add_option("--gamma", m.gamma, "XGB split penalty");
    sub->add_option("--arch", m.arch, "MLP architecture: yield_only, yield_macro, hybrid, double, group_ensemble");
    sub->add_option("--hidden", m.hidden, "MLP hidden layer widths")->delimiter(',');
    sub->add_option("--group-hidden", m.group_hidden, "Group-ensemble subnet widths")->delimiter(',');
    sub->add_option("--combiner", m.combiner, "Group-ensemble combiner width");
    sub->add_option("--l2", m.l2, "MLP weight decay");
    sub->add_option("--epochs", m.epochs, "MLP epochs");
    sub->add_option("--lr", m.lr, "MLP learning rate");
    sub->add_option("--batch", m.batch, "MLP mini-batch size (0 = full batch)");
}

void add_panel(CLI::App* sub, PanelInputs& p) {
    sub->add_option("--yields", p.yields, "Yields CSV")->group(kRequired);
    sub->add_option("--ufr", p.ufr, "UFR series CSV (from the ufr command)")->group(kRequired);
    sub->add_option("--macro", p.macro, "Macro CSV");
    sub->add_option("--groups", p.groups, "Variable-to-group CSV, required with --macro");
    sub->add_option("--feature-set", p.feature_set, "yields_only or yields_plus_macro (default: macro when given)");
}

struct LoadedPanel {
    QuotePanel yields;
    std::optional<FeaturePanel> macro;
    UfrSeries ufr;  // aligned to yields.dates
    FeatureSet feature_set;
};

UfrSeries align_series(const UfrSeries& s, const std::vector<std::string>& dates) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < s.dates.size(); ++i) pos.emplace(s.dates[i], i);
    UfrSeries out;
    out.method = s.method;
    const bool has_alpha = s.alpha_path.size() == s.size();
    for (const auto& d : dates) {
        const auto it = pos.find(d);
        if (it == pos.end()) throw DataError("alignment", "UFR series has no value for date " + d);
        out.dates.push_back(d);
        out.f_inf.push_back(s.f_inf[it->second]);
        if (has_alpha) out.alpha_path.push_back(s.alpha_path[it->second]);
        out.failures.push_back(it->second < s.failures.size() ? s.failures[it->second] : std::string());
    }
    return out;
}

LoadedPanel load_panel(const PanelInputs& in) {
    auto yields = load_yields(in.yields);
    std::optional<FeaturePanel> macro;
    if (!in.macro.empty()) {
        if (in.groups.empty()) throw ValidationError("--macro requires --groups");
        auto joined = align(yields, load_macro(in.macro, load_groups(in.groups)));
        yields = std::move(joined.first);
        macro = std::move(joined.second);
    }
    FeatureSet fs = macro ? FeatureSet::YieldsPlusMacro : FeatureSet::YieldsOnly;
    if (!in.feature_set.empty()) fs = parse_feature_set(in.feature_set);
    if (fs == FeatureSet::YieldsPlusMacro && !macro)
        throw ValidationError("feature set yields_plus_macro needs --macro and --groups");
    auto ufr = align_series(load_ufr_series(in.ufr), yields.dates);
    return {std::move(yields), std::move(macro), std::move(ufr), fs};
}

// synth

struct SynthCmd {
    Common common;
    SynthConfig cfg;
};

void run_synth(const SynthCmd& c, std::ostream& out) {
    SynthConfig cfg = c.cfg;
    cfg.seed = c.common.seed;
    const auto data = synth_generate(cfg);
    const fs::path dir = c.common.out_dir;
    write_yields(dir / "yields.csv", data.yields);
    write_macro(dir / "macro.csv", data.macro);
    write_groups(dir / "groups.csv", data.macro);
    write_ufr_series(dir / "truth.csv", data.truth);
    out << "wrote " << data.yields.size() << " months to " << dir.string() << '\n';
}

// ufr

struct UfrCmd {
    Common common;
    std::string yields;
    std::string method = "sdf";
    ExtractOptions options;
};

void run_ufr(const UfrCmd& c, std::ostream& out) {
    const auto panel = load_yields(c.yields);
    const auto method = parse_method(c.method);
    c.options.zjw.validate();
    const auto s = extract_series(panel, method, c.options, c.common.exec());
    const fs::path dir = c.common.out_dir;
    const std::string tag(to_string(method));
    write_ufr_series(dir / ("ufr_" + tag + ".csv"), s);
    auto a = open_csv(dir / ("alpha_" + tag + ".csv"));
    a << "date,alpha,flagged\n";
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double alpha = method == UfrMethod::ZJW ? s.alpha_path[t] : c.options.alpha;
        const bool flagged = t < s.flagged.size() && s.flagged[t];
        a << csv_cell(s.dates[t]) << ',' << (std::isfinite(alpha) ? format_exact(alpha) : std::string()) << ','
          << (flagged ? 1 : 0) << '\n';
    }
    std::size_t failed = 0;
    for (const auto& f : s.failures) failed += f.empty() ? 0 : 1;
    out << "extracted " << s.size() << " dates with " << tag << " (" << failed << " failed)\n";
}

// calibrate-lambda

struct LambdaCmd {
    Common common;
    std::string yields;
    ExtractOptions options;
    LambdaSearch search;
};

void run_lambda(const LambdaCmd& c, std::ostream& out) {
    const auto panel = load_yields(c.yields);
    c.options.zjw.validate();
    const auto cal = calibrate_lambda(panel, c.options, c.search, c.common.exec());
    const fs::path dir = c.common.out_dir;
    Json j;
    j["lambda_star"] = num(cal.lambda_star);
    j["objective"] = num(cal.objective);
    j["degenerate"] = cal.degenerate;
    j["grid_points"] = cal.grid_lambdas.size();
    write_json(dir / "lambda.json", j);
    auto g = open_csv(dir / "lambda_grid.csv");
    g << "lambda,objective\n";
    for (std::size_t k = 0; k < cal.grid_lambdas.size(); ++k)
        g << format_exact(cal.grid_lambdas[k]) << ',' << format_exact(cal.grid_objective[k]) << '\n';
    out << "lambda* = " << format_report(cal.lambda_star) << (cal.degenerate ? " (degenerate objective)" : "") << '\n';
}

// stats

struct StatsCmd {
    Common common;
    std::string yields;
    std::vector<std::string> ufr;
};

void run_stats(const StatsCmd& c, std::ostream& out) {
    const auto panel = load_yields(c.yields);
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (const auto& path : c.ufr) {
        const auto s = align_series(load_ufr_series(path), panel.dates);
        std::string label = fs::path(path).stem().string();
        series.emplace_back(label, s.reported());
    }
    for (std::size_t j = 0; j < panel.grid.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        std::vector<double> v(panel.size());
        for (std::size_t t = 0; t < panel.size(); ++t) v[t] = panel.yields(static_cast<Eigen::Index>(t), col);
        series.emplace_back("y" + format_exact(panel.grid[j]), std::move(v));
    }
    const fs::path dir = c.common.out_dir;
    auto sum = open_csv(dir / "summary.csv");
    sum << "series,transform,n,min,max,mean,std,adf_stat,adf_lags,adf_band,pp_stat,pp_lags,pp_band\n";
    for (const auto& [name, values] : series) {
        for (int diff = 0; diff < 2; ++diff) {
            const auto v = diff ? difference(values) : values;
            const auto d = describe(v);
            const auto adf = adf_test(v);
            const auto pp = pp_test(v);
            sum << csv_cell(name) << ',' << (diff ? "diff" : "level") << ',' << v.size() << ',' << format_report(d.min)
                << ',' << format_report(d.max) << ',' << format_report(d.mean) << ',' << format_report(d.std) << ','
                << format_report(adf.statistic) << ',' << adf.lags << ',' << to_string(adf.band) << ','
                << format_report(pp.statistic) << ',' << pp.lags << ',' << to_string(pp.band) << '\n';
        }
    }
    Matrix data(static_cast<Eigen::Index>(panel.size()), static_cast<Eigen::Index>(series.size()));
    for (std::size_t k = 0; k < series.size(); ++k)
        for (std::size_t t = 0; t < panel.size(); ++t)
            data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = series[k].second[t];
    const auto cm = pearson_matrix(data);
    auto cor = open_csv(dir / "correlation.csv");
    cor << "a,b,r,p_value,significant\n";
    for (Eigen::Index a = 0; a < cm.r.rows(); ++a)
        for (Eigen::Index b = a + 1; b < cm.r.cols(); ++b)
            cor << csv_cell(series[static_cast<std::size_t>(a)].first) << ','
                << csv_cell(series[static_cast<std::size_t>(b)].first) << ',' << format_report(cm.r(a, b)) << ','
                << format_report(cm.p_value(a, b)) << ',' << (cm.significant(a, b) ? 1 : 0) << '\n';
    out << "summarized " << series.size() << " series\n";
}

// forecast

struct ForecastCmd {
    Common common;
    PanelInputs panel;
    ModelOptions model;
    double window_frac = 0.75;
    std::size_t window = 0;
    std::string cw_form = "clark_west";
};

void run_forecast(const ForecastCmd& c, std::ostream& out) {
    RollingConfig rc;
    rc.window_frac = c.window_frac;
    if (c.window > 0) rc.window_length = c.window;
    rc.model = c.model.spec(c.common.seed);
    const auto form = parse_cw_form(c.cw_form);
    rc.validate();
    const auto p = load_panel(c.panel);
    rc.feature_set = p.feature_set;
    const auto levels = p.ufr.reported();
    const auto design = build_design(p.yields, levels, p.macro ? &*p.macro : nullptr);
    const auto run = rolling_forecast(design.data, rc, design.target_dates, c.common.exec());
    const auto rep = evaluate(run, form);

    const fs::path dir = c.common.out_dir;
    write_forecast_run(dir / "forecast_run.csv", run);
    Json j = report_json(rep);
    j["model"] = std::string(to_string(rc.model.kind));
    j["feature_set"] = std::string(to_string(rc.feature_set));
    j["target"] = "ufr";
    j["ufr_method"] = std::string(to_string(p.ufr.method));
    j["window"] = run.window;
    write_json(dir / "report.json", j);
    out << to_string(rc.model.kind) << ": r_oos " << format_report(rep.r_oos) << ", CW " << format_report(rep.cw_stat)
        << " (" << to_string(rep.cw_band) << ")\n";
}

// curve-forecast

struct CurveCmd {
    Common common;
    std::string yields;
    std::string ufr;
    std::string run;
    double alpha = 0.1;
    std::string cw_form = "clark_west";
};

void run_curve(const CurveCmd& c, std::ostream& out) {
    const auto panel = load_yields(c.yields);
    const auto ufr = align_series(load_ufr_series(c.ufr), panel.dates);
    const auto run = load_forecast_run(c.run);
    const auto form = parse_cw_form(c.cw_form);
    if (run.dates.size() != run.size()) throw DataError("parse", c.run + ": forecast run has no target dates");
    std::map<std::string, std::size_t> pos;
    for (std::size_t t = 0; t < panel.size(); ++t) pos.emplace(panel.dates[t], t);
    std::vector<std::size_t> origins;
    for (const auto& d : run.dates) {
        const auto it = pos.find(d);
        if (it == pos.end() || it->second == 0)
            throw DataError("alignment", "forecast target date " + d + " has no origin date in the yields file");
        origins.push_back(it->second - 1);
    }
    ExtractOptions opt;
    opt.alpha = c.alpha;
    const auto alphas = projection_alphas(ufr, opt);
    auto rep = evaluate_curve_forecasts(panel, ufr, origins, run.predictions, alphas, c.common.exec());
    for (std::size_t j = 0; j < rep.maturities.size(); ++j) {
        const Vector pc = rep.predicted.col(static_cast<Eigen::Index>(j));
        const Vector bc = rep.benchmark.col(static_cast<Eigen::Index>(j));
        const Vector ac = rep.actual.col(static_cast<Eigen::Index>(j));
        const auto n = static_cast<std::size_t>(pc.size());
        rep.per_maturity[j] = evaluate(std::span<const double>(pc.data(), n), std::span<const double>(bc.data(), n),
                                       std::span<const double>(ac.data(), n), form);
    }

    const fs::path dir = c.common.out_dir;
    Json j;
    j["ufr_method"] = std::string(to_string(ufr.method));
    j["n"] = origins.size();
    Json per = Json::array();
    for (std::size_t k = 0; k < rep.maturities.size(); ++k) {
        Json m = report_json(rep.per_maturity[k]);
        m["maturity"] = num(rep.maturities[k]);
        per.push_back(m);
    }
    j["per_maturity"] = per;
    write_json(dir / "curve_report.json", j);
    auto f = open_csv(dir / "curve_forecasts.csv");
    f << "date,maturity,predicted,actual,benchmark\n";
    for (Eigen::Index t = 0; t < rep.predicted.rows(); ++t)
        for (Eigen::Index m = 0; m < rep.predicted.cols(); ++m)
            f << csv_cell(rep.dates[static_cast<std::size_t>(t)]) << ','
              << format_exact(rep.maturities[static_cast<std::size_t>(m)]) << ',' << format_exact(rep.predicted(t, m))
              << ',' << format_exact(rep.actual(t, m)) << ',' << format_exact(rep.benchmark(t, m)) << '\n';
    out << "projected " << origins.size() << " curves\n";
}

// explain

struct ExplainCmd {
    Common common;
    PanelInputs panel;
    ModelOptions model;
    std::size_t instances = 12;
    std::size_t background = 64;
    int permutations = 256;
};

void write_groups_csv(const fs::path& path, const std::vector<GroupScore>& scores) {
    auto f = open_csv(path);
    f << "group,total,mean\n";
    for (const auto& g : scores) f << csv_cell(g.group) << ',' << format_exact(g.total) << ',' << format_exact(g.mean) << '\n';
}

void run_explain(const ExplainCmd& c, std::ostream& out) {
    const auto spec = c.model.spec(c.common.seed);
    if (c.instances < 1) throw ValidationError("--instances must be at least 1");
    if (c.background < 1) throw ValidationError("--background must be at least 1");
    const auto p = load_panel(c.panel);
    const auto design = build_design(p.yields, p.ufr.reported(), p.macro ? &*p.macro : nullptr);
    Dataset ds = design.data;
    if (p.feature_set == FeatureSet::YieldsOnly) {
        const auto cols = ds.columns_in_group(kYieldGroup);
        ds = ds.select(cols);
    }
    const std::size_t n = ds.rows();
    if (c.instances + 20 > n)
        throw ValidationError("explain: " + std::to_string(c.instances) + " instances leave fewer than 20 training rows");
    const std::size_t train = n - c.instances;
    const auto model = fit_model(spec, ds.slice(0, train));

    // Evenly spaced training rows form the background distribution.
    const std::size_t nb = std::min(c.background, train);
    Matrix bg(static_cast<Eigen::Index>(nb), static_cast<Eigen::Index>(ds.cols()));
    for (std::size_t b = 0; b < nb; ++b) bg.row(static_cast<Eigen::Index>(b)) = ds.x.row(static_cast<Eigen::Index>(b * train / nb));
    const Matrix rows = ds.x.bottomRows(static_cast<Eigen::Index>(c.instances));
    ShapleyOptions so;
    so.permutations = c.permutations;
    so.seed = derive_seed(c.common.seed, "explain");
    const auto attrs = explain_rows(*model, bg, rows, so, c.common.exec());

    const fs::path dir = c.common.out_dir;
    auto f = open_csv(dir / "attributions.csv");
    f << "date,feature,group,value\n";
    auto inst = open_csv(dir / "instances.csv");
    inst << "date,prediction,baseline,exact,efficiency_se\n";
    for (std::size_t i = 0; i < attrs.size(); ++i) {
        const auto& date = design.target_dates[train + i];
        for (std::size_t j = 0; j < ds.cols(); ++j)
            f << csv_cell(date) << ',' << csv_cell(ds.names[j]) << ',' << csv_cell(ds.groups[j]) << ','
              << format_exact(attrs[i].values[j]) << '\n';
        inst << csv_cell(date) << ',' << format_exact(attrs[i].prediction) << ',' << format_exact(attrs[i].baseline)
             << ',' << (attrs[i].exact ? 1 : 0) << ',' << format_exact(attrs[i].efficiency_se) << '\n';
    }
    write_groups_csv(dir / "groups_abs.csv", group_aggregate(attrs, ds.groups, AggregateMode::Abs));
    write_groups_csv(dir / "groups_signed.csv", group_aggregate(attrs, ds.groups, AggregateMode::Signed));
    out << "explained " << attrs.size() << " forecasts over " << ds.cols() << " features\n";
}

void print_error(std::ostream& err, const std::string& kind, const std::string& message) {
    Json j;
    j["error"] = {{"kind", kind}, {"message", message}};
    err << j.dump() << '\n';
}

/// Fills options that were not given on the command line from a flat `key = value`
/// file (an optional [subcommand] section is accepted), then enforces the required
/// options.
void merge_config(CLI::App* sub, const std::string& path) {
    if (!path.empty()) {
        if (!fs::is_regular_file(path)) throw CLI::FileError::Missing(path);
        CLI::ConfigINI ini;
        for (const auto& item : ini.from_file(path)) {
            if (item.name == "++" || item.name == "--") continue;  // section markers
            if (!item.parents.empty() && item.parents != std::vector<std::string>{sub->get_name()})
                throw CLI::ConfigError::Extras(item.fullname());
            CLI::Option* opt = sub->get_option_no_throw("--" + item.name);
            if (opt == nullptr || item.name == "config") throw CLI::ConfigError::Extras(item.fullname());
            if (opt->count() > 0) continue;
            opt->add_result(item.inputs);
            opt->run_callback();
        }
    }
    for (const CLI::Option* opt : sub->get_options())
        if (opt->get_group() == kRequired && opt->count() == 0) throw CLI::RequiredError(opt->get_name());
}

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("UFRKIT_SEED");
    if (!v || !*v) return std::nullopt;
    std::uint64_t s = 0;
    const std::string text(v);
    const auto r = std::from_chars(text.data(), text.data() + text.size(), s);
    if (r.ec != std::errc() || r.ptr != text.data() + text.size())
        throw CLI::ValidationError("UFRKIT_SEED", "'" + text + "' is not an unsigned integer");
    return s;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"ufrkit: endogenous ultimate forward rates and UFR forecasting"};
    app.require_subcommand(1);

    SynthCmd synth;
    auto* s = app.add_subcommand("synth", "Write a synthetic yields / macro / groups / truth panel");
    add_common(s, synth.common);
    s->add_option("--months", synth.cfg.n_months, "Number of monthly dates");
    s->add_option("--ufr-start", synth.cfg.ufr_start, "Initial annual UFR");
    s->add_option("--drift", synth.cfg.ufr_drift, "Monthly drift of the continuous UFR");
    s->add_option("--vol", synth.cfg.ufr_vol, "Monthly volatility of the continuous UFR");
    s->add_option("--signal-strength", synth.cfg.signal_strength, "Share of UFR innovations predictable from macro");
    s->add_option("--xi-scale", synth.cfg.xi_scale, "Scale of the curve shape (0 gives flat curves)");
    s->add_option("--alpha", synth.cfg.alpha, "Smith-Wilson alpha of the generating curves");
    s->add_option("--vars-per-group", synth.cfg.vars_per_group, "Macro variables per group");
    s->add_option("--macro-noise", synth.cfg.macro_noise, "Noise on each macro variable");

    UfrCmd ufr;
    auto* u = app.add_subcommand("ufr", "Extract a UFR series and its alpha path");
    add_common(u, ufr.common);
    u->add_option("--yields", ufr.yields, "Yields CSV")->group(kRequired);
    u->add_option("--method", ufr.method, "sdf, sfr, syc or zjw")
        ->check(CLI::IsMember({"sdf", "sfr", "syc", "zjw"}, CLI::ignore_case));
    u->add_option("--alpha", ufr.options.alpha, "Fixed alpha for sdf / sfr / syc");
    u->add_option("--lambda", ufr.options.zjw.lambda, "ZJW penalty");
    u->add_option("--f-prior", ufr.options.zjw.f_prior, "ZJW prior (continuous)");

    LambdaCmd lam;
    auto* l = app.add_subcommand("calibrate-lambda", "Choose the ZJW penalty against SFR and SYC");
    add_common(l, lam.common);
    l->add_option("--yields", lam.yields, "Yields CSV")->group(kRequired);
    l->add_option("--alpha", lam.options.alpha, "Fixed alpha for SFR / SYC");
    l->add_option("--f-prior", lam.options.zjw.f_prior, "ZJW prior (continuous)");
    l->add_option("--lambda-lo", lam.search.lo, "Smallest lambda on the grid");
    l->add_option("--lambda-hi", lam.search.hi, "Largest lambda on the grid");
    l->add_option("--points", lam.search.points, "Log-spaced grid points");

    StatsCmd st;
    auto* a = app.add_subcommand("stats", "Descriptive statistics, unit-root tests and correlations");
    add_common(a, st.common);
    a->add_option("--yields", st.yields, "Yields CSV")->group(kRequired);
    a->add_option("--ufr", st.ufr, "UFR series CSV (repeatable)");

    ForecastCmd fc;
    auto* f = app.add_subcommand("forecast", "Rolling out-of-sample forecasts of the UFR change");
    add_common(f, fc.common);
    add_panel(f, fc.panel);
    add_model(f, fc.model);
    f->add_option("--window-frac", fc.window_frac, "Training window as a share of the rows");
    f->add_option("--window", fc.window, "Training window length in rows (overrides --window-frac)");
    f->add_option("--cw-form", fc.cw_form, "clark_west or printed");

    CurveCmd cc;
    auto* c = app.add_subcommand("curve-forecast", "Project next-month curves from forecast UFR changes");
    add_common(c, cc.common);
    c->add_option("--yields", cc.yields, "Yields CSV")->group(kRequired);
    c->add_option("--ufr", cc.ufr, "UFR series CSV")->group(kRequired);
    c->add_option("--run", cc.run, "forecast_run.csv from the forecast command")->group(kRequired);
    c->add_option("--alpha", cc.alpha, "Projection alpha for non-ZJW series");
    c->add_option("--cw-form", cc.cw_form, "clark_west or printed");

    ExplainCmd ex;
    auto* e = app.add_subcommand("explain", "Shapley attributions of a fitted forecaster");
    add_common(e, ex.common);
    add_panel(e, ex.panel);
    add_model(e, ex.model);
    e->add_option("--instances", ex.instances, "Final design rows to explain");
    e->add_option("--background", ex.background, "Background rows drawn from the training set");
    e->add_option("--permutations", ex.permutations, "Permutations per instance when sampling");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        const std::vector<std::pair<CLI::App*, Common*>> subs{{s, &synth.common}, {u, &ufr.common}, {l, &lam.common},
                                                              {a, &st.common},    {f, &fc.common},  {c, &cc.common},
                                                              {e, &ex.common}};
        for (const auto& [sub, common] : subs)
            if (sub->parsed()) merge_config(sub, common->config);
        if (const auto seed = env_seed()) {
            for (const auto& [sub, common] : subs) common->seed = *seed;
        }
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& pe) {
        print_error(err, "usage", pe.what());
        return kExitUsage;
    }

    try {
        if (s->parsed()) run_synth(synth, out);
        else if (u->parsed()) run_ufr(ufr, out);
        else if (l->parsed()) run_lambda(lam, out);
        else if (a->parsed()) run_stats(st, out);
        else if (f->parsed()) run_forecast(fc, out);
        else if (c->parsed()) run_curve(cc, out);
        else if (e->parsed()) run_explain(ex, out);
    } catch (const ValidationError& ve) {
        print_error(err, ve.kind(), ve.what());
        return kExitUsage;
    } catch (const Error& er) {
        print_error(err, er.kind(), er.what());
        return kExitRuntime;
    } catch (const std::exception& ex2) {
        print_error(err, "runtime", ex2.what());
        return kExitRuntime;
    }
    return kExitOk;
}

}  // namespace ufrkit::cli
