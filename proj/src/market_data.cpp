#include "shrinkpo/market_data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "shrinkpo/errors.hpp"

namespace shrinkpo {

namespace {

// RFC-4180 field splitting: quoted fields may contain commas, doubled quotes escape.
std::vector<std::string> split_csv_line(const std::string& line, long line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (in_quotes) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            if (!cur.empty())
                throw validation_error("malformed CSV: stray quote at line " + std::to_string(line_no));
            in_quotes = true;
        } else if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (in_quotes)
        throw validation_error("malformed CSV: unterminated quote at line " + std::to_string(line_no));
    fields.push_back(cur);
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.c_str();
    char* end = nullptr;
    out = std::strtod(begin, &end);
    if (end == begin) return false;
    while (*end == ' ' || *end == '\t') ++end;
    return *end == '\0' && std::isfinite(out);
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_table(std::istream& in, const char* what) {
    RawTable t;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line, line_no);
        if (t.header.empty()) {
            t.header = std::move(fields);
        } else {
            if (fields.size() != t.header.size())
                throw validation_error(std::string("malformed CSV: ") + what + " line " +
                                       std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                                       " fields, expected " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(fields));
        }
    }
    if (t.header.size() < 2)
        throw validation_error(std::string("malformed CSV: ") + what + " needs a date column and at least one asset");
    return t;
}

}  // namespace

PriceSeries parse_prices_csv(const std::string& csv_text, const IngestConfig& config) {
    std::istringstream in(csv_text);
    RawTable t = read_table(in, "price file");

    PriceSeries out;
    out.assets.assign(t.header.begin() + 1, t.header.end());
    const long p = static_cast<long>(out.assets.size());

    std::vector<std::string> dates;
    std::vector<double> cells;
    std::unordered_set<std::string> seen;
    for (const auto& row : t.rows) {
        bool incomplete = false;
        std::vector<double> vals(p);
        for (long j = 0; j < p; ++j) {
            const std::string& cell = row[j + 1];
            if (cell.empty()) {
                incomplete = true;
                break;
            }
            if (!parse_double(cell, vals[j]))
                throw validation_error("malformed CSV: unparsable price '" + cell + "' at date " + row[0]);
        }
        if (incomplete) {
            if (config.drop_incomplete_rows) continue;
            throw validation_error("missing price cell at date " + row[0] +
                                   " (set drop_incomplete_rows to skip such rows)");
        }
        for (long j = 0; j < p; ++j)
            if (vals[j] <= 0.0)
                throw validation_error("non-positive price for " + out.assets[j] + " at date " + row[0]);
        if (!seen.insert(row[0]).second)
            throw validation_error("duplicate date " + row[0]);
        dates.push_back(row[0]);
        cells.insert(cells.end(), vals.begin(), vals.end());
    }

    const long n = static_cast<long>(dates.size());
    if (n < 2) throw validation_error("price file needs at least 2 usable rows, got " + std::to_string(n));

    out.dates = std::move(dates);
    out.prices.resize(n, p);
    for (long i = 0; i < n; ++i)
        for (long j = 0; j < p; ++j) out.prices(i, j) = cells[static_cast<size_t>(i) * p + j];
    return out;
}

PriceSeries load_prices(const std::string& csv_path, const IngestConfig& config) {
    std::ifstream f(csv_path);
    if (!f) throw validation_error("cannot open price file: " + csv_path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_prices_csv(ss.str(), config);
}

ReturnsMatrix compute_returns(const PriceSeries& prices) {
    const long n_days = prices.n_days();
    const long p = prices.n_assets();
    if (n_days < 2) throw validation_error("need at least 2 price rows to compute returns");

    ReturnsMatrix out;
    out.assets = prices.assets;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.returns.resize(n_days - 1, p);
    for (long t = 0; t + 1 < n_days; ++t)
        for (long j = 0; j < p; ++j)
            out.returns(t, j) = prices.prices(t + 1, j) / prices.prices(t, j) - 1.0;
    return out;
}

WindowPlan plan_windows(const ReturnsMatrix& returns, long insample_len, long outsample_len) {
    if (insample_len < 1 || outsample_len < 1)
        throw validation_error("window lengths must be positive");
    const long n = returns.n_obs();
    if (n < insample_len + outsample_len)
        throw validation_error("insufficient data: n=" + std::to_string(n) + " < insample+outsample=" +
                               std::to_string(insample_len + outsample_len));

    WindowPlan plan;
    plan.insample_len = insample_len;
    plan.outsample_len = outsample_len;
    const long count = (n - insample_len) / outsample_len;
    plan.windows.reserve(count);
    for (long w = 0; w < count; ++w) {
        Window win;
        win.insample = {w * outsample_len, w * outsample_len + insample_len};
        win.outsample = {win.insample.end, win.insample.end + outsample_len};
        plan.windows.push_back(win);
    }
    return plan;
}

Eigen::MatrixXd slice_rows(const Eigen::MatrixXd& m, const IndexRange& range) {
    return m.middleRows(range.begin, range.size());
}

void write_returns_csv(const ReturnsMatrix& returns, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw validation_error("cannot write " + path);
    f << "date";
    for (const auto& a : returns.assets) f << ',' << a;
    f << '\n';
    char buf[40];
    for (long t = 0; t < returns.n_obs(); ++t) {
        f << returns.dates[t];
        for (long j = 0; j < returns.n_assets(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", returns.returns(t, j));
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw validation_error("write failed: " + path);
}

ReturnsMatrix load_returns_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open returns file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    std::istringstream in(ss.str());
    RawTable t = read_table(in, "returns file");

    ReturnsMatrix out;
    out.assets.assign(t.header.begin() + 1, t.header.end());
    const long p = static_cast<long>(out.assets.size());
    const long n = static_cast<long>(t.rows.size());
    if (n < 1) throw validation_error("returns file has no data rows");
    out.returns.resize(n, p);
    out.dates.reserve(n);
    for (long i = 0; i < n; ++i) {
        out.dates.push_back(t.rows[i][0]);
        for (long j = 0; j < p; ++j) {
            double v;
            if (!parse_double(t.rows[i][j + 1], v))
                throw validation_error("unparsable return '" + t.rows[i][j + 1] + "' at date " + t.rows[i][0]);
            if (v <= -1.0)
                throw validation_error("return <= -1 at date " + t.rows[i][0]);
            out.returns(i, j) = v;
        }
    }
    return out;
}

}  // namespace shrinkpo
