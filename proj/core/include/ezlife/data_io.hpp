#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ezlife {

enum class sex_kind { total, male, female };

// One cohort's observed mortality rates by age. Missing source entries are
// dropped during parsing, never zero-filled, so ages may be sparse.
struct cohort_series {
    std::string country;
    int cohort_year = 0;
    std::vector<double> ages;  // strictly increasing, years
    std::vector<double> rates; // per year, positive
    sex_kind sex = sex_kind::total;
    std::string source; // file or stream name, for reports
};

// Reads the mortality-database cohort-rate text layout: optional title line
// naming the country, a header line with columns Year / Age / Female / Male /
// Total in any spacing, then whitespace-separated rows. Ages like "110+"
// map to 110; "." marks a missing value and the row is skipped for the
// requested column, as are zero rates (ages with no observed deaths carry no
// information for a growth fit). Throws io_error for a missing or malformed
// header, an absent cohort, or a cohort with no usable values.
cohort_series parse_hmd_cohort(std::istream& in, std::string_view name,
                               int cohort_year, sex_kind sex = sex_kind::total);
cohort_series load_hmd_cohort(const std::string& path, int cohort_year,
                              sex_kind sex = sex_kind::total);

// Two-column "age,rate" CSV with a header line. Strict: parse errors carry
// "name:line:" context, rates must be positive, ages strictly increasing.
cohort_series parse_csv_series(std::istream& in, std::string_view name);
cohort_series load_csv_series(const std::string& path);

// Writes a series as "age,rate" rows with 17 significant digits, so a
// parse round trip is exact.
void write_series_csv(const cohort_series& series, const std::string& path);

// One plotted curve.
struct figure_series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

// mortality_compare: rates vs age, log vertical axis.
// efficacy:          g(h) vs h, linear axes.
// healthcare_share:  spending share vs age, linear axes.
// u_curve:           consumption rate vs hazard, log horizontal axis.
enum class figure_kind { mortality_compare, efficacy, healthcare_share, u_curve };

// Emits a self-contained SVG (fixed layout, legend, embedded data comment)
// plus a sibling .csv holding the exact plotted numbers on the union of the
// x grids. Output is byte-deterministic for identical inputs.
void emit_figure(figure_kind kind, const std::vector<figure_series>& series,
                 const std::string& svg_path);

} // namespace ezlife
