#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gridimpact
{

/// Grid reinforcement price assumptions. Capacity is assumed to grow
/// linearly from today's level to the future level over `horizon_years`;
/// each year's increment pays the capital price once and the recurring
/// price every year thereafter until the end of the horizon.
struct PriceModel
{
    double recurring_per_kw_year = 0.0; ///< first-year O&M price, $/kW-yr
    double capital_per_kw = 0.0;        ///< first-year capital price, $/kW
    double inflation = 0.025;
    double discount = 0.025;
    int horizon_years = 25;
    double price_sigma_fraction = 0.20;

    void validate() const;
};

struct CostEstimate
{
    double mean = 0.0;
    double std = 0.0;
    std::pair<double, double> ci95{0.0, 0.0};
};

inline constexpr double kZ95 = 1.959963984540054;

/// Sum over years of (k-weighted, for recurring) inflated and discounted
/// factors, divided by the horizon: the present value of one $/kW of
/// first-year price per kW of total growth.
double recurring_pv_factor(PriceModel const& pm);
double capital_pv_factor(PriceModel const& pm);

/// Net present cost of a capacity growth of `growth_kw`.
double npv_cost(double growth_kw, PriceModel const& pm);

/// Gaussian cost with independent Gaussian prices whose standard deviations
/// are `price_sigma_fraction` of their means.
CostEstimate cost_distribution(double growth_kw, PriceModel const& pm);

CostEstimate make_estimate(double mean, double std);

struct DiscountPoint
{
    double discount = 0.0;
    CostEstimate cost;
};

std::vector<DiscountPoint> discount_rate_sweep(
    double growth_kw,
    PriceModel const& pm,
    std::span<double const> discount_rates);

/// Solve for the (recurring, capital) first-year price pair that yields the
/// given effective $/kW mean and 95% interval under `base`'s inflation,
/// discount and horizon. Two splits exist; the capital-dominant one is
/// returned. Throws when the interval is not reachable with two independent
/// prices at the configured sigma fraction.
PriceModel calibrate_prices(
    PriceModel base,
    double effective_mean_per_kw,
    double ci_low_per_kw,
    double ci_high_per_kw);

} // namespace gridimpact
