#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace shrinkpo {

struct IngestConfig {
    // When a row has an empty cell: drop the whole row if true, reject the file otherwise.
    bool drop_incomplete_rows = false;
};

// Daily closing prices, one column per asset, rows in trading-day order.
// Dates are opaque labels; row order is the time order.
struct PriceSeries {
    std::vector<std::string> dates;   // length n_days
    std::vector<std::string> assets;  // length p, header order preserved
    Eigen::MatrixXd prices;           // n_days x p, all entries > 0

    long n_days() const { return prices.rows(); }
    long n_assets() const { return prices.cols(); }
};

// Arithmetic daily returns: r[t][i] = P[t+1][i]/P[t][i] - 1.
struct ReturnsMatrix {
    std::vector<std::string> dates;   // length n (date of each return's close)
    std::vector<std::string> assets;  // length p
    Eigen::MatrixXd returns;          // n x p, each entry > -1

    long n_obs() const { return returns.rows(); }
    long n_assets() const { return returns.cols(); }
};

// Half-open index ranges into a ReturnsMatrix: [begin, end).
struct IndexRange {
    long begin = 0;
    long end = 0;
    long size() const { return end - begin; }
};

struct Window {
    IndexRange insample;
    IndexRange outsample;
};

// Rolling scheme: in-sample block immediately followed by its out-of-sample block,
// shifted forward by outsample_len until the data runs out.
struct WindowPlan {
    long insample_len = 0;
    long outsample_len = 0;
    std::vector<Window> windows;

    long count() const { return static_cast<long>(windows.size()); }
};

PriceSeries load_prices(const std::string& csv_path, const IngestConfig& config = {});

// Same parser over an in-memory document (used by tests and the synth round-trip).
PriceSeries parse_prices_csv(const std::string& csv_text, const IngestConfig& config = {});

ReturnsMatrix compute_returns(const PriceSeries& prices);

// count = floor((n - insample_len) / outsample_len); throws when count would be 0.
WindowPlan plan_windows(const ReturnsMatrix& returns, long insample_len, long outsample_len);

Eigen::MatrixXd slice_rows(const Eigen::MatrixXd& m, const IndexRange& range);

// Canonical returns artifact: header "date,ASSET1,...", full-precision cells.
void write_returns_csv(const ReturnsMatrix& returns, const std::string& path);
ReturnsMatrix load_returns_csv(const std::string& path);

}  // namespace shrinkpo
