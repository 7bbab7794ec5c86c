#include "ezlife/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>

#include "ezlife/errors.hpp"

namespace ezlife {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& tok, double& out) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + tok.size() && tok.size() > 0 && std::isfinite(out);
}

bool parse_int(const std::string& tok, long& out) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    out = std::strtol(begin, &end, 10);
    return end == begin + tok.size() && tok.size() > 0;
}

int find_column(const std::vector<std::string>& header, const std::string& want) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (lower(header[i]) == lower(want)) return int(i);
    return -1;
}

[[noreturn]] void fail_at(std::string_view name, int line, const std::string& what) {
    std::ostringstream os;
    os << name << ":" << line << ": " << what;
    throw io_error(os.str());
}

const char* sex_column(sex_kind sex) {
    switch (sex) {
        case sex_kind::male: return "Male";
        case sex_kind::female: return "Female";
        default: return "Total";
    }
}

} // namespace

cohort_series parse_hmd_cohort(std::istream& in, std::string_view name,
                               int cohort_year, sex_kind sex) {
    cohort_series out;
    out.cohort_year = cohort_year;
    out.sex = sex;
    out.source = std::string(name);

    std::string line, title;
    std::vector<std::string> header;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (find_column(toks, "Year") >= 0 && find_column(toks, "Age") >= 0) {
            header = toks;
            break;
        }
        if (title.empty()) title = trim(line);
        if (lineno > 20)
            throw io_error(std::string(name) +
                           ": no 'Year Age ...' header in the first 20 lines");
    }
    if (header.empty())
        throw io_error(std::string(name) + ": no 'Year Age ...' header found");

    const int col_year = find_column(header, "Year");
    const int col_age = find_column(header, "Age");
    const int col_val = find_column(header, sex_column(sex));
    if (col_val < 0)
        throw io_error(std::string(name) + ": header has no '" +
                       sex_column(sex) + "' column");
    const std::size_t need =
        std::size_t(std::max(col_year, std::max(col_age, col_val))) + 1;

    // Country label: the title line up to the first comma, e.g.
    // "Bulgaria, Cohort death rates ...".
    if (!title.empty()) out.country = trim(title.substr(0, title.find(',')));

    bool saw_cohort = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() < need)
            fail_at(name, lineno, "row has fewer columns than the header");
        long year = 0;
        if (!parse_int(toks[std::size_t(col_year)], year))
            fail_at(name, lineno, "unreadable Year '" + toks[std::size_t(col_year)] + "'");
        if (year != cohort_year) continue;
        saw_cohort = true;

        std::string age_tok = toks[std::size_t(col_age)];
        if (!age_tok.empty() && age_tok.back() == '+') age_tok.pop_back();
        long age = 0;
        if (!parse_int(age_tok, age))
            fail_at(name, lineno, "unreadable Age '" + toks[std::size_t(col_age)] + "'");

        const std::string& val_tok = toks[std::size_t(col_val)];
        if (val_tok == ".") continue; // explicit missing marker
        double rate = 0.0;
        if (!parse_number(val_tok, rate))
            fail_at(name, lineno, "unreadable rate '" + val_tok + "'");
        if (rate < 0.0)
            fail_at(name, lineno, "negative mortality rate");
        if (rate == 0.0) continue; // no observed deaths: no growth information
        if (!out.ages.empty() && double(age) <= out.ages.back())
            fail_at(name, lineno, "ages out of order within the cohort");
        out.ages.push_back(double(age));
        out.rates.push_back(rate);
    }
    if (!saw_cohort)
        throw io_error(std::string(name) + ": cohort " +
                       std::to_string(cohort_year) + " not present");
    if (out.ages.empty())
        throw io_error(std::string(name) + ": cohort " +
                       std::to_string(cohort_year) + " has no usable " +
                       sex_column(sex) + " values");
    return out;
}

cohort_series load_hmd_cohort(const std::string& path, int cohort_year, sex_kind sex) {
    std::ifstream in(path);
    if (!in) throw io_error(path + ": cannot open");
    return parse_hmd_cohort(in, path, cohort_year, sex);
}

cohort_series parse_csv_series(std::istream& in, std::string_view name) {
    cohort_series out;
    out.source = std::string(name);

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line))
        throw io_error(std::string(name) + ": empty file");
    ++lineno;
    {
        std::istringstream hs(line);
        std::string a, b, extra;
        if (!std::getline(hs, a, ',') || !std::getline(hs, b, ',') ||
            std::getline(hs, extra, ',') || lower(trim(a)) != "age" ||
            lower(trim(b)) != "rate")
            fail_at(name, lineno, "expected header 'age,rate'");
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream ls(line);
        std::string a, b, extra;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') ||
            std::getline(ls, extra, ','))
            fail_at(name, lineno, "expected two comma-separated fields");
        double age = 0.0, rate = 0.0;
        if (!parse_number(trim(a), age))
            fail_at(name, lineno, "unreadable age '" + trim(a) + "'");
        if (!parse_number(trim(b), rate))
            fail_at(name, lineno, "unreadable rate '" + trim(b) + "'");
        if (!(rate > 0.0))
            fail_at(name, lineno, "rate must be positive");
        if (!out.ages.empty() && age <= out.ages.back())
            fail_at(name, lineno, "ages must increase strictly");
        out.ages.push_back(age);
        out.rates.push_back(rate);
    }
    if (out.ages.empty())
        throw io_error(std::string(name) + ": no data rows");
    return out;
}

cohort_series load_csv_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error(path + ": cannot open");
    return parse_csv_series(in, path);
}

void write_series_csv(const cohort_series& series, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error(path + ": cannot open for writing");
    os << "age,rate\n";
    char buf[64];
    for (std::size_t i = 0; i < series.ages.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", series.ages[i],
                      series.rates[i]);
        os << buf;
    }
    if (!os.flush()) throw io_error(path + ": write failed");
}

namespace {

// Figure geometry, fixed for determinism.
constexpr double fig_w = 720.0, fig_h = 480.0;
constexpr double mg_l = 76.0, mg_r = 24.0, mg_t = 28.0, mg_b = 52.0;

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b"};

struct axis_info {
    bool log_scale = false;
    double lo = 0.0, hi = 1.0;
    std::vector<double> ticks;
};

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

axis_info linear_axis(double lo, double hi) {
    if (lo == hi) {
        const double pad = std::max(1e-6, std::fabs(lo) * 0.1);
        lo -= pad;
        hi += pad;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    const double step = (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0) * mag;
    axis_info ax;
    ax.lo = std::floor(lo / step) * step;
    ax.hi = std::ceil(hi / step) * step;
    for (double t = ax.lo; t <= ax.hi + 0.5 * step; t += step) ax.ticks.push_back(t);
    return ax;
}

axis_info log_axis(double lo, double hi) {
    if (!(lo > 0.0))
        throw invalid_parameter_error(
            "emit_figure: log-scale axis needs positive values");
    axis_info ax;
    ax.log_scale = true;
    const int dlo = int(std::floor(std::log10(lo) + 1e-12));
    const int dhi = int(std::ceil(std::log10(hi) - 1e-12));
    ax.lo = std::pow(10.0, dlo);
    ax.hi = std::pow(10.0, std::max(dhi, dlo + 1));
    for (int d = dlo; d <= std::max(dhi, dlo + 1); ++d)
        ax.ticks.push_back(std::pow(10.0, d));
    return ax;
}

double map_coord(double v, const axis_info& ax, double px_lo, double px_hi) {
    const double a = ax.log_scale ? std::log10(v) : v;
    const double lo = ax.log_scale ? std::log10(ax.lo) : ax.lo;
    const double hi = ax.log_scale ? std::log10(ax.hi) : ax.hi;
    return px_lo + (a - lo) / (hi - lo) * (px_hi - px_lo);
}

struct figure_labels {
    const char* x;
    const char* y;
    bool log_x;
    bool log_y;
};

figure_labels labels_for(figure_kind kind) {
    switch (kind) {
        case figure_kind::mortality_compare:
            return {"age (years)", "mortality rate (per year)", false, true};
        case figure_kind::efficacy:
            return {"fraction of wealth spent on healthcare", "growth reduction g(h)",
                    false, false};
        case figure_kind::healthcare_share:
            return {"age (years)", "share of total spending", false, false};
        case figure_kind::u_curve:
        default:
            return {"mortality rate m", "consumption-wealth ratio", true, false};
    }
}

std::string table_csv(figure_kind kind, const std::vector<figure_series>& series) {
    const char* xname = kind == figure_kind::efficacy ? "h"
                        : kind == figure_kind::u_curve ? "m"
                                                       : "age";
    std::vector<double> xs;
    for (const auto& s : series) xs.insert(xs.end(), s.x.begin(), s.x.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::ostringstream os;
    os << xname;
    for (const auto& s : series) os << "," << s.label;
    os << "\n";
    for (double x : xs) {
        os << fmt(x, "%.17g");
        for (const auto& s : series) {
            const auto it = std::lower_bound(s.x.begin(), s.x.end(), x);
            os << ",";
            if (it != s.x.end() && *it == x)
                os << fmt(s.y[std::size_t(it - s.x.begin())], "%.17g");
        }
        os << "\n";
    }
    return os.str();
}

} // namespace

void emit_figure(figure_kind kind, const std::vector<figure_series>& series,
                 const std::string& svg_path) {
    if (series.empty())
        throw invalid_parameter_error("emit_figure: no series given");
    for (const auto& s : series) {
        if (s.x.empty() || s.x.size() != s.y.size())
            throw invalid_parameter_error("emit_figure: series '" + s.label +
                                          "' has mismatched or empty columns");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                throw invalid_parameter_error("emit_figure: series '" + s.label +
                                              "' has non-finite values");
            if (i > 0 && !(s.x[i] > s.x[i - 1]))
                throw invalid_parameter_error("emit_figure: series '" + s.label +
                                              "' x values must increase strictly");
        }
    }

    const figure_labels lab = labels_for(kind);
    double xlo = series[0].x.front(), xhi = series[0].x.back();
    double ylo = series[0].y[0], yhi = series[0].y[0];
    for (const auto& s : series) {
        xlo = std::min(xlo, s.x.front());
        xhi = std::max(xhi, s.x.back());
        for (double v : s.y) {
            ylo = std::min(ylo, v);
            yhi = std::max(yhi, v);
        }
    }
    const axis_info ax = lab.log_x ? log_axis(xlo, xhi) : linear_axis(xlo, xhi);
    const axis_info ay = lab.log_y ? log_axis(ylo, yhi) : linear_axis(ylo, yhi);

    const double px_l = mg_l, px_r = fig_w - mg_r;
    const double py_t = mg_t, py_b = fig_h - mg_b;
    auto X = [&](double v) { return map_coord(v, ax, px_l, px_r); };
    auto Y = [&](double v) { return map_coord(v, ay, py_b, py_t); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << int(fig_w)
       << "\" height=\"" << int(fig_h) << "\" viewBox=\"0 0 " << int(fig_w) << " "
       << int(fig_h) << "\">\n";
    os << "<!-- data table\n" << table_csv(kind, series) << "-->\n";
    os << "<rect width=\"" << int(fig_w) << "\" height=\"" << int(fig_h)
       << "\" fill=\"white\"/>\n";

    // Axes, ticks, grid.
    os << "<g stroke=\"#303030\" stroke-width=\"1\" fill=\"none\">\n";
    os << "<path d=\"M" << fmt(px_l, "%.2f") << " " << fmt(py_t, "%.2f") << " V"
       << fmt(py_b, "%.2f") << " H" << fmt(px_r, "%.2f") << "\"/>\n";
    os << "</g>\n";
    os << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#303030\">\n";
    for (double t : ax.ticks) {
        const double px = X(t);
        os << "<line x1=\"" << fmt(px, "%.2f") << "\" y1=\"" << fmt(py_b, "%.2f")
           << "\" x2=\"" << fmt(px, "%.2f") << "\" y2=\"" << fmt(py_b + 5, "%.2f")
           << "\" stroke=\"#303030\"/>\n";
        os << "<text x=\"" << fmt(px, "%.2f") << "\" y=\"" << fmt(py_b + 18, "%.2f")
           << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double t : ay.ticks) {
        const double py = Y(t);
        os << "<line x1=\"" << fmt(px_l - 5, "%.2f") << "\" y1=\"" << fmt(py, "%.2f")
           << "\" x2=\"" << fmt(px_l, "%.2f") << "\" y2=\"" << fmt(py, "%.2f")
           << "\" stroke=\"#303030\"/>\n";
        os << "<line x1=\"" << fmt(px_l, "%.2f") << "\" y1=\"" << fmt(py, "%.2f")
           << "\" x2=\"" << fmt(px_r, "%.2f") << "\" y2=\"" << fmt(py, "%.2f")
           << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << fmt(px_l - 9, "%.2f") << "\" y=\"" << fmt(py + 4, "%.2f")
           << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
    }
    os << "<text x=\"" << fmt((px_l + px_r) / 2, "%.2f") << "\" y=\""
       << fmt(fig_h - 14, "%.2f") << "\" text-anchor=\"middle\">" << lab.x
       << "</text>\n";
    os << "<text x=\"18\" y=\"" << fmt((py_t + py_b) / 2, "%.2f")
       << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << fmt((py_t + py_b) / 2, "%.2f") << ")\">" << lab.y << "</text>\n";
    os << "</g>\n";

    // Curves.
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        os << "<polyline fill=\"none\" stroke=\""
           << palette[k % (sizeof(palette) / sizeof(palette[0]))]
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) os << " ";
            os << fmt(X(s.x[i]), "%.2f") << "," << fmt(Y(s.y[i]), "%.2f");
        }
        os << "\"/>\n";
    }

    // Legend.
    os << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#303030\">\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const double ly = py_t + 16.0 + 18.0 * double(k);
        os << "<line x1=\"" << fmt(px_l + 10, "%.2f") << "\" y1=\"" << fmt(ly, "%.2f")
           << "\" x2=\"" << fmt(px_l + 34, "%.2f") << "\" y2=\"" << fmt(ly, "%.2f")
           << "\" stroke=\"" << palette[k % (sizeof(palette) / sizeof(palette[0]))]
           << "\" stroke-width=\"1.5\"/>\n";
        os << "<text x=\"" << fmt(px_l + 40, "%.2f") << "\" y=\"" << fmt(ly + 4, "%.2f")
           << "\">" << series[k].label << "</text>\n";
    }
    os << "</g>\n</svg>\n";

    std::ofstream svg(svg_path);
    if (!svg) throw io_error(svg_path + ": cannot open for writing");
    svg << os.str();
    if (!svg.flush()) throw io_error(svg_path + ": write failed");

    const std::string csv_path =
        std::filesystem::path(svg_path).replace_extension(".csv").string();
    std::ofstream csv(csv_path);
    if (!csv) throw io_error(csv_path + ": cannot open for writing");
    csv << table_csv(kind, series);
    if (!csv.flush()) throw io_error(csv_path + ": write failed");
}

} // namespace ezlife
