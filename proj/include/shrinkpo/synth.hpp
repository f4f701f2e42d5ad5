#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "shrinkpo/market_data.hpp"

namespace shrinkpo {

// Spiked-covariance factor model: r_t = mu + B f_t + noise_vol * eps_t with
// k factors, B entries ~ N(0, factor_vol^2). All randomness comes from an
// explicitly seeded generator with a pinned normal transform, so output is
// bit-stable for a given seed.
struct SynthConfig {
    long n_assets = 10;
    long n_days = 1000;        // price rows; returns rows = n_days - 1
    long n_factors = 2;
    std::uint64_t seed = 1;
    double factor_vol = 0.012;
    double noise_vol = 0.008;
    double mean_level = 3e-4;
    double mean_spread = 2e-4;
};

// (n_days - 1) x p matrix of arithmetic returns.
Eigen::MatrixXd synth_returns(const SynthConfig& config);

// Prices compounded from the synthetic returns, first close at 100.
PriceSeries synth_prices(const SynthConfig& config);

void write_prices_csv(const PriceSeries& prices, const std::string& path);

// Deterministic standard-normal stream used by the generator (exposed for
// tests that need raw draws).
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    double next();

private:
    double next_uniform();
    std::uint64_t state_;
};

}  // namespace shrinkpo
