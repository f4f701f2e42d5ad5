#include "shrinkpo/synth.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "shrinkpo/errors.hpp"

namespace shrinkpo {

double NormalStream::next_uniform() {
    // splitmix64, then 53-bit mantissa in [0,1).
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
    const double u1 = std::max(next_uniform(), 0x1.0p-53);
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

Eigen::MatrixXd synth_returns(const SynthConfig& config) {
    if (config.n_assets < 1) throw validation_error("synth: need at least 1 asset");
    if (config.n_days < 2) throw validation_error("synth: need at least 2 days");
    if (config.n_factors < 0) throw validation_error("synth: negative factor count");
    if (config.factor_vol < 0.0 || config.noise_vol <= 0.0)
        throw validation_error("synth: volatilities must be positive");

    const long p = config.n_assets;
    const long n = config.n_days - 1;
    const long k = config.n_factors;
    NormalStream rng(config.seed);

    Eigen::VectorXd mu(p);
    for (long i = 0; i < p; ++i) mu(i) = config.mean_level + config.mean_spread * rng.next();

    Eigen::MatrixXd loadings(p, k);
    for (long i = 0; i < p; ++i)
        for (long j = 0; j < k; ++j) loadings(i, j) = config.factor_vol * rng.next();

    Eigen::MatrixXd returns(n, p);
    Eigen::VectorXd factors(k);
    for (long t = 0; t < n; ++t) {
        for (long j = 0; j < k; ++j) factors(j) = rng.next();
        for (long i = 0; i < p; ++i) {
            const double systematic = (k > 0) ? loadings.row(i).dot(factors) : 0.0;
            returns(t, i) = mu(i) + systematic + config.noise_vol * rng.next();
        }
    }
    return returns;
}

PriceSeries synth_prices(const SynthConfig& config) {
    Eigen::MatrixXd returns = synth_returns(config);
    const long p = config.n_assets;
    const long n_days = config.n_days;
    if ((returns.array() <= -1.0).any())
        throw numeric_error("synth: drawn return at or below -100%, lower the volatilities");

    PriceSeries prices;
    prices.prices.resize(n_days, p);
    prices.prices.row(0).setConstant(100.0);
    for (long t = 1; t < n_days; ++t)
        prices.prices.row(t).array() =
            prices.prices.row(t - 1).array() * (returns.row(t - 1).array() + 1.0);

    char buf[32];
    prices.dates.reserve(n_days);
    for (long t = 0; t < n_days; ++t) {
        std::snprintf(buf, sizeof buf, "D%05ld", t + 1);
        prices.dates.emplace_back(buf);
    }
    prices.assets.reserve(p);
    for (long i = 0; i < p; ++i) {
        std::snprintf(buf, sizeof buf, "A%03ld", i + 1);
        prices.assets.emplace_back(buf);
    }
    return prices;
}

void write_prices_csv(const PriceSeries& prices, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw validation_error("cannot write " + path);
    f << "date";
    for (const auto& a : prices.assets) f << ',' << a;
    f << '\n';
    char buf[40];
    for (long t = 0; t < prices.n_days(); ++t) {
        f << prices.dates[t];
        for (long j = 0; j < prices.n_assets(); ++j) {
            std::snprintf(buf, sizeof buf, "%.12g", prices.prices(t, j));
            f << ',' << buf;
        }
        f << '\n';
    }
    if (!f) throw validation_error("write failed: " + path);
}

}  // namespace shrinkpo
