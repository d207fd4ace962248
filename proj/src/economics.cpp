#include "gridimpact/economics.hpp"

#include <cmath>
#include <stdexcept>

namespace gridimpact
{

void PriceModel::validate() const
{
    if (horizon_years < 1)
    {
        throw std::invalid_argument("price model: horizon must be at least one year");
    }
    if (recurring_per_kw_year < 0.0 || capital_per_kw < 0.0)
    {
        throw std::invalid_argument("price model: negative price");
    }
    if (!(1.0 + discount > 0.0))
    {
        throw std::invalid_argument("price model: discount rate must exceed -1");
    }
    if (price_sigma_fraction < 0.0)
    {
        throw std::invalid_argument("price model: negative sigma fraction");
    }
}

double recurring_pv_factor(PriceModel const& pm)
{
    pm.validate();
    double const ratio = (1.0 + pm.inflation) / (1.0 + pm.discount);
    double sum = 0.0;
    double g = 1.0;
    for (int k = 1; k <= pm.horizon_years; ++k)
    {
        g *= ratio;
        sum += k * g;
    }
    return sum / pm.horizon_years;
}

double capital_pv_factor(PriceModel const& pm)
{
    pm.validate();
    double const ratio = (1.0 + pm.inflation) / (1.0 + pm.discount);
    double sum = 0.0;
    double g = 1.0;
    for (int k = 1; k <= pm.horizon_years; ++k)
    {
        g *= ratio;
        sum += g;
    }
    return sum / pm.horizon_years;
}

double npv_cost(double growth_kw, PriceModel const& pm)
{
    if (growth_kw < 0.0)
    {
        throw std::invalid_argument("npv_cost: negative growth");
    }
    return growth_kw
        * (pm.recurring_per_kw_year * recurring_pv_factor(pm)
           + pm.capital_per_kw * capital_pv_factor(pm));
}

CostEstimate make_estimate(double mean, double std)
{
    return {mean, std, {mean - kZ95 * std, mean + kZ95 * std}};
}

CostEstimate cost_distribution(double growth_kw, PriceModel const& pm)
{
    if (growth_kw < 0.0)
    {
        throw std::invalid_argument("cost_distribution: negative growth");
    }
    double const rec = growth_kw * pm.recurring_per_kw_year * recurring_pv_factor(pm);
    double const cap = growth_kw * pm.capital_per_kw * capital_pv_factor(pm);
    double const f = pm.price_sigma_fraction;
    return make_estimate(rec + cap, f * std::hypot(rec, cap));
}

std::vector<DiscountPoint> discount_rate_sweep(
    double growth_kw,
    PriceModel const& pm,
    std::span<double const> discount_rates)
{
    if (discount_rates.empty())
    {
        throw std::invalid_argument("discount_rate_sweep: empty grid");
    }
    std::vector<DiscountPoint> out;
    out.reserve(discount_rates.size());
    for (double r : discount_rates)
    {
        PriceModel p = pm;
        p.discount = r;
        out.push_back({r, cost_distribution(growth_kw, p)});
    }
    return out;
}

PriceModel calibrate_prices(
    PriceModel base,
    double effective_mean_per_kw,
    double ci_low_per_kw,
    double ci_high_per_kw)
{
    double const m = effective_mean_per_kw;
    double const sigma = (ci_high_per_kw - ci_low_per_kw) / (2.0 * kZ95);
    double const f = base.price_sigma_fraction;
    if (!(m > 0.0) || !(sigma > 0.0) || !(f > 0.0))
    {
        throw std::invalid_argument("calibrate_prices: mean, interval and sigma fraction must be positive");
    }
    // capital share c and recurring share q of the effective price:
    // c + q = m, f^2 (c^2 + q^2) = sigma^2
    double const sum_sq = (sigma / f) * (sigma / f);
    double const disc = 2.0 * sum_sq - m * m;
    if (sum_sq > m * m || disc < 0.0)
    {
        throw std::invalid_argument("calibrate_prices: interval unreachable with two independent prices");
    }
    double const capital_share = 0.5 * (m + std::sqrt(disc));
    double const recurring_share = m - capital_share;
    base.capital_per_kw = capital_share / capital_pv_factor(base);
    base.recurring_per_kw_year = recurring_share / recurring_pv_factor(base);
    return base;
}

} // namespace gridimpact
