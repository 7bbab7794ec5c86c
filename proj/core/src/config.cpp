#include "ezlife/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ezlife/errors.hpp"

namespace ezlife {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

[[noreturn]] void parse_fail(const std::filesystem::path& file, int line,
                             const std::string& msg) {
    std::ostringstream os;
    os << file.string() << ":" << line << ": " << msg;
    throw io_error(os.str());
}

} // namespace

std::map<std::string, double> read_kv_config(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in)
        throw io_error("cannot open config file: " + file.string());

    std::map<std::string, double> out;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            parse_fail(file, lineno, "expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            parse_fail(file, lineno, "empty key");
        if (val.empty())
            parse_fail(file, lineno, "empty value for key '" + key + "'");

        double scale = 1.0;
        if (val.back() == '%') {
            scale = 0.01;
            val = trim(val.substr(0, val.size() - 1));
        }
        size_t consumed = 0;
        double num = 0.0;
        try {
            num = std::stod(val, &consumed);
        } catch (const std::exception&) {
            parse_fail(file, lineno, "cannot parse value '" + val + "' for key '" + key + "'");
        }
        if (consumed != val.size())
            parse_fail(file, lineno, "trailing junk in value '" + val + "' for key '" + key + "'");
        if (!out.emplace(key, num * scale).second)
            parse_fail(file, lineno, "duplicate key '" + key + "'");
    }
    return out;
}

model_params params_from_config(const std::filesystem::path& file) {
    auto kv = read_kv_config(file);
    auto take = [&](const char* key) {
        auto it = kv.find(key);
        if (it == kv.end())
            throw io_error(file.string() + ": missing required key '" + std::string(key) + "'");
        const double v = it->second;
        kv.erase(it);
        return v;
    };

    preferences pref;
    pref.gamma = take("gamma");
    pref.psi   = take("psi");
    pref.delta = take("delta");
    pref.zeta  = take("zeta");

    market mkt;
    mkt.r     = take("r");
    mkt.mu    = take("mu");
    mkt.sigma = take("sigma");

    const double beta = take("beta");
    const double m0   = take("m0");

    std::optional<efficacy_power> eff;
    const bool has_a = kv.count("a") > 0, has_q = kv.count("q") > 0;
    if (has_a != has_q)
        throw io_error(file.string() + ": efficacy keys 'a' and 'q' must appear together");
    if (has_a) {
        eff = efficacy_power{kv.at("a"), kv.at("q")};
        kv.erase("a");
        kv.erase("q");
    }
    if (!kv.empty())
        throw io_error(file.string() + ": unknown key '" + kv.begin()->first + "'");

    return make_params(pref, mkt, beta, m0, eff);
}

void write_kv_report(const std::filesystem::path& file,
                     const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ofstream out(file);
    if (!out)
        throw io_error("cannot open report file for writing: " + file.string());
    for (const auto& [k, v] : entries)
        out << k << " = " << v << "\n";
    if (!out)
        throw io_error("short write to report file: " + file.string());
}

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace ezlife
