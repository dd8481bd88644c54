#include "ufrkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "ufrkit/error.hpp"

namespace ufrkit {

namespace fs = std::filesystem;

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // 1-based source line per row
};

std::string where(const fs::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

/// Splits one line on commas, honouring double-quoted fields.
std::vector<std::string> split_csv_line(const std::string& line, const fs::path& path, std::size_t lineno) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (quoted) throw DataError("parse", where(path, lineno) + ": unterminated quoted field");
    out.push_back(std::move(cur));
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

CsvTable read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("io", "cannot open " + path.string());
    CsvTable t;
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line, path, lineno);
        for (auto& c : cells) c = trim(std::move(c));
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw DataError("parse", where(path, lineno) + ": expected " + std::to_string(t.header.size()) +
                                         " cells, found " + std::to_string(cells.size()));
        }
        t.rows.push_back(std::move(cells));
        t.lines.push_back(lineno);
    }
    if (!have_header) throw DataError("header", path.string() + ": empty file, header row missing");
    return t;
}

double parse_number(const std::string& cell, const fs::path& path, std::size_t line, const std::string& column) {
    double v = 0.0;
    const char* b = cell.data();
    const char* e = b + cell.size();
    const auto r = std::from_chars(b, e, v);
    if (cell.empty() || r.ec != std::errc() || r.ptr != e || !std::isfinite(v)) {
        throw DataError("parse", where(path, line) + ": column '" + column + "': cannot parse '" + cell +
                                     "' as a finite number");
    }
    return v;
}

void require_date_header(const CsvTable& t, const fs::path& path) {
    if (t.header.empty() || t.header[0] != "date")
        throw DataError("header", path.string() + ": first column must be named 'date'");
}

void check_dates(const CsvTable& t, const fs::path& path) {
    std::set<std::string> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& d = t.rows[i][0];
        if (d.empty()) throw DataError("parse", where(path, t.lines[i]) + ": empty date");
        if (!seen.insert(d).second) throw DataError("duplicate_date", where(path, t.lines[i]) + ": duplicate date " + d);
        if (i > 0 && !(t.rows[i - 1][0] < d))
            throw DataError("parse", where(path, t.lines[i]) + ": dates must be in increasing order");
    }
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("io", "cannot write " + path.string());
    return out;
}

std::string maturity_label(double u) {
    return "y" + format_exact(u);
}

}  // namespace

std::string format_exact(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

std::string format_report(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void FeaturePanel::validate() const {
    if (static_cast<std::size_t>(values.rows()) != dates.size() ||
        static_cast<std::size_t>(values.cols()) != names.size() || groups.size() != names.size())
        throw DataError("shape", "FeaturePanel: dates/names/groups do not match the value matrix");
    if (!values.allFinite()) throw DataError("parse", "FeaturePanel: non-finite value");
}

QuotePanel load_yields(const fs::path& path) {
    const auto t = read_csv(path);
    require_date_header(t, path);
    if (t.header.size() < 2) throw DataError("header", path.string() + ": no maturity columns");
    std::vector<double> mats;
    for (std::size_t c = 1; c < t.header.size(); ++c) {
        const auto& h = t.header[c];
        double u = 0.0;
        const char* b = h.data() + 1;
        const char* e = h.data() + h.size();
        const bool ok = h.size() > 1 && h[0] == 'y' && std::from_chars(b, e, u).ptr == e && u > 0.0 && std::isfinite(u);
        if (!ok) throw DataError("header", path.string() + ": column '" + h + "' is not a maturity like y10");
        if (!mats.empty() && !(u > mats.back()))
            throw DataError("header", path.string() + ": maturity columns must be strictly increasing");
        mats.push_back(u);
    }
    check_dates(t, path);
    std::vector<std::string> dates;
    Matrix y(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(mats.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        dates.push_back(t.rows[i][0]);
        for (std::size_t c = 1; c < t.header.size(); ++c)
            y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c - 1)) =
                parse_number(t.rows[i][c], path, t.lines[i], t.header[c]);
    }
    return QuotePanel(std::move(dates), TermGrid(std::move(mats)), std::move(y));
}

GroupMap load_groups(const fs::path& path) {
    const auto t = read_csv(path);
    if (t.header.size() != 2 || t.header[0] != "variable" || t.header[1] != "group")
        throw DataError("header", path.string() + ": header must be 'variable,group'");
    GroupMap m;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& var = t.rows[i][0];
        const auto& grp = t.rows[i][1];
        if (var.empty()) throw DataError("parse", where(path, t.lines[i]) + ": empty variable name");
        if (grp == kYieldGroup || !is_known_group(grp))
            throw DataError("mapping", where(path, t.lines[i]) + ": unknown macro group '" + grp + "' for variable " + var);
        if (!m.emplace(var, grp).second)
            throw DataError("mapping", where(path, t.lines[i]) + ": variable " + var + " listed twice");
    }
    return m;
}

FeaturePanel load_macro(const fs::path& path, const GroupMap& groups) {
    const auto t = read_csv(path);
    require_date_header(t, path);
    FeaturePanel p;
    std::set<std::string> seen;
    for (std::size_t c = 1; c < t.header.size(); ++c) {
        const auto& name = t.header[c];
        if (name.empty()) throw DataError("header", path.string() + ": empty variable name in header");
        if (!seen.insert(name).second) throw DataError("header", path.string() + ": duplicate column " + name);
        const auto it = groups.find(name);
        if (it == groups.end())
            throw DataError("mapping", path.string() + ": macro variable '" + name + "' has no group in the groups file");
        p.names.push_back(name);
        p.groups.push_back(it->second);
    }
    check_dates(t, path);
    p.values.resize(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(p.names.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        p.dates.push_back(t.rows[i][0]);
        for (std::size_t c = 1; c < t.header.size(); ++c)
            p.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c - 1)) =
                parse_number(t.rows[i][c], path, t.lines[i], t.header[c]);
    }
    return p;
}

std::pair<QuotePanel, FeaturePanel> align(const QuotePanel& yields, const FeaturePanel& macro) {
    macro.validate();
    std::unordered_map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < macro.dates.size(); ++i) pos.emplace(macro.dates[i], i);
    std::vector<std::size_t> yi, mi;
    for (std::size_t i = 0; i < yields.dates.size(); ++i) {
        const auto it = pos.find(yields.dates[i]);
        if (it == pos.end()) continue;
        yi.push_back(i);
        mi.push_back(it->second);
    }
    if (yi.empty()) throw DataError("alignment", "yields and macro files share no dates");
    std::vector<std::string> dates;
    Matrix y(static_cast<Eigen::Index>(yi.size()), yields.yields.cols());
    FeaturePanel m;
    m.names = macro.names;
    m.groups = macro.groups;
    m.values.resize(static_cast<Eigen::Index>(yi.size()), macro.values.cols());
    for (std::size_t k = 0; k < yi.size(); ++k) {
        dates.push_back(yields.dates[yi[k]]);
        y.row(static_cast<Eigen::Index>(k)) = yields.yields.row(static_cast<Eigen::Index>(yi[k]));
        m.values.row(static_cast<Eigen::Index>(k)) = macro.values.row(static_cast<Eigen::Index>(mi[k]));
    }
    m.dates = dates;
    return {QuotePanel(std::move(dates), yields.grid, std::move(y)), std::move(m)};
}

void write_yields(const fs::path& path, const QuotePanel& panel) {
    auto out = open_out(path);
    out << "date";
    for (double u : panel.grid.maturities()) out << ',' << maturity_label(u);
    out << '\n';
    for (std::size_t t = 0; t < panel.size(); ++t) {
        out << quote(panel.dates[t]);
        for (Eigen::Index j = 0; j < panel.yields.cols(); ++j)
            out << ',' << format_exact(panel.yields(static_cast<Eigen::Index>(t), j));
        out << '\n';
    }
}

void write_macro(const fs::path& path, const FeaturePanel& panel) {
    panel.validate();
    auto out = open_out(path);
    out << "date";
    for (const auto& n : panel.names) out << ',' << quote(n);
    out << '\n';
    for (std::size_t t = 0; t < panel.size(); ++t) {
        out << quote(panel.dates[t]);
        for (Eigen::Index j = 0; j < panel.values.cols(); ++j)
            out << ',' << format_exact(panel.values(static_cast<Eigen::Index>(t), j));
        out << '\n';
    }
}

void write_groups(const fs::path& path, const FeaturePanel& panel) {
    auto out = open_out(path);
    out << "variable,group\n";
    for (std::size_t j = 0; j < panel.names.size(); ++j) out << quote(panel.names[j]) << ',' << quote(panel.groups[j]) << '\n';
}

void write_ufr_series(const fs::path& path, const UfrSeries& s) {
    auto out = open_out(path);
    out << "date,method,f_inf,ufr,alpha,flagged,failure\n";
    const bool zjw = s.alpha_path.size() == s.size();
    for (std::size_t t = 0; t < s.size(); ++t) {
        const double f = s.f_inf[t];
        out << quote(s.dates[t]) << ',' << to_string(s.method) << ',';
        if (std::isfinite(f)) out << format_exact(f) << ',' << format_exact(annual_from_continuous(f));
        else out << ',';
        out << ',';
        if (zjw && std::isfinite(s.alpha_path[t])) out << format_exact(s.alpha_path[t]);
        out << ',';
        if (t < s.flagged.size()) out << (s.flagged[t] ? 1 : 0);
        out << ',' << quote(t < s.failures.size() ? s.failures[t] : std::string()) << '\n';
    }
}

UfrSeries load_ufr_series(const fs::path& path) {
    const auto t = read_csv(path);
    const std::vector<std::string> expect{"date", "method", "f_inf", "ufr", "alpha", "flagged", "failure"};
    if (t.header != expect) throw DataError("header", path.string() + ": header must be " + "date,method,f_inf,ufr,alpha,flagged,failure");
    check_dates(t, path);
    UfrSeries s;
    bool any_alpha = false;
    bool any_flag = false;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const auto m = parse_method(r[1]);
        if (i == 0) s.method = m;
        else if (m != s.method) throw DataError("parse", where(path, t.lines[i]) + ": mixed methods in one series");
        s.dates.push_back(r[0]);
        s.f_inf.push_back(r[2].empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : parse_number(r[2], path, t.lines[i], "f_inf"));
        s.alpha_path.push_back(r[4].empty() ? std::numeric_limits<double>::quiet_NaN()
                                            : parse_number(r[4], path, t.lines[i], "alpha"));
        any_alpha = any_alpha || !r[4].empty();
        if (!r[5].empty() && r[5] != "0" && r[5] != "1")
            throw DataError("parse", where(path, t.lines[i]) + ": flagged must be 0 or 1");
        any_flag = any_flag || !r[5].empty();
        s.flagged.push_back(r[5] == "1");
        s.failures.push_back(r[6]);
    }
    if (!any_alpha) s.alpha_path.clear();
    if (!any_flag) s.flagged.clear();
    return s;
}

void write_forecast_run(const fs::path& path, const ForecastRun& run) {
    auto out = open_out(path);
    out << "date,row,prediction,actual,benchmark\n";
    for (std::size_t k = 0; k < run.size(); ++k) {
        out << quote(k < run.dates.size() ? run.dates[k] : std::string()) << ',' << run.rows[k] << ','
            << format_exact(run.predictions[k]) << ',' << format_exact(run.actuals[k]) << ','
            << format_exact(run.benchmark[k]) << '\n';
    }
}

ForecastRun load_forecast_run(const fs::path& path) {
    const auto t = read_csv(path);
    const std::vector<std::string> expect{"date", "row", "prediction", "actual", "benchmark"};
    if (t.header != expect) throw DataError("header", path.string() + ": header must be date,row,prediction,actual,benchmark");
    ForecastRun run;
    bool dated = false;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        dated = dated || !r[0].empty();
        run.dates.push_back(r[0]);
        std::size_t row = 0;
        const auto res = std::from_chars(r[1].data(), r[1].data() + r[1].size(), row);
        if (r[1].empty() || res.ec != std::errc() || res.ptr != r[1].data() + r[1].size())
            throw DataError("parse", where(path, t.lines[i]) + ": column 'row': cannot parse '" + r[1] + "'");
        run.rows.push_back(row);
        run.predictions.push_back(parse_number(r[2], path, t.lines[i], "prediction"));
        run.actuals.push_back(parse_number(r[3], path, t.lines[i], "actual"));
        run.benchmark.push_back(parse_number(r[4], path, t.lines[i], "benchmark"));
    }
    if (!dated) run.dates.clear();
    run.window = run.rows.empty() ? 0 : run.rows.front();
    return run;
}

ForecastDesign build_design(const QuotePanel& yields, std::span<const double> target_levels, const FeaturePanel* macro) {
    const std::size_t n = yields.size();
    if (n < 3) throw DomainError("build_design: at least three dates required");
    if (target_levels.size() != n) throw DomainError("build_design: target length differs from the panel");
    if (macro) {
        macro->validate();
        if (macro->dates != yields.dates) throw DomainError("build_design: macro dates are not aligned with yields");
    }
    for (std::size_t t = 0; t < n; ++t)
        if (!std::isfinite(target_levels[t]))
            throw DomainError("build_design: target level missing on " + yields.dates[t]);
    const auto m = static_cast<Eigen::Index>(yields.grid.size());
    const auto k = macro ? macro->values.cols() : Eigen::Index{0};
    const auto rows = static_cast<Eigen::Index>(n - 2);
    ForecastDesign d;
    d.data.x.resize(rows, m + k);
    d.data.y.resize(rows);
    for (Eigen::Index j = 0; j < m; ++j) {
        d.data.names.push_back("d" + maturity_label(yields.grid[static_cast<std::size_t>(j)]));
        d.data.groups.emplace_back(kYieldGroup);
    }
    if (macro) {
        d.data.names.insert(d.data.names.end(), macro->names.begin(), macro->names.end());
        d.data.groups.insert(d.data.groups.end(), macro->groups.begin(), macro->groups.end());
    }
    for (Eigen::Index i = 0; i < rows; ++i) {
        const Eigen::Index t = i + 1;
        d.data.x.row(i).head(m) = yields.yields.row(t) - yields.yields.row(t - 1);
        if (macro) d.data.x.row(i).tail(k) = macro->values.row(t);
        d.data.y[i] = target_levels[static_cast<std::size_t>(t + 1)] - target_levels[static_cast<std::size_t>(t)];
        d.origin.push_back(static_cast<std::size_t>(t));
        d.target_dates.push_back(yields.dates[static_cast<std::size_t>(t + 1)]);
    }
    d.data.validate();
    return d;
}

}  // namespace ufrkit
