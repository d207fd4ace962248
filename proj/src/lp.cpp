#include "gridimpact/lp.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace gridimpact::lp
{

int Problem::add_variable(double lower, double upper, double cost, std::string name)
{
    if (std::isnan(lower) || std::isnan(upper) || !std::isfinite(cost))
    {
        throw std::invalid_argument("lp: NaN bound or non-finite cost");
    }
    if (lower > upper)
    {
        throw std::invalid_argument("lp: variable lower bound above upper bound");
    }
    int const id = static_cast<int>(cost_.size());
    cost_.push_back(cost);
    var_lo_.push_back(lower);
    var_hi_.push_back(upper);
    var_names_.push_back(name.empty() ? "C" + std::to_string(id) : std::move(name));
    return id;
}

void Problem::set_bounds(int var, double lower, double upper)
{
    if (lower > upper)
    {
        throw std::invalid_argument("lp: variable lower bound above upper bound");
    }
    var_lo_.at(static_cast<std::size_t>(var)) = lower;
    var_hi_.at(static_cast<std::size_t>(var)) = upper;
}

int Problem::add_row(std::vector<Term> terms, double lower, double upper, std::string name)
{
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
    {
        throw std::invalid_argument("lp: invalid row bounds");
    }
    for (auto const& t : terms)
    {
        if (t.var < 0 || static_cast<std::size_t>(t.var) >= cost_.size())
        {
            throw std::out_of_range("lp: row references unknown variable");
        }
        if (!std::isfinite(t.coef))
        {
            throw std::invalid_argument("lp: non-finite coefficient");
        }
    }
    int const id = static_cast<int>(rows_.size());
    rows_.push_back(std::move(terms));
    row_lo_.push_back(lower);
    row_hi_.push_back(upper);
    row_names_.push_back(name.empty() ? "R" + std::to_string(id) : std::move(name));
    linking_.push_back(0);
    return id;
}

std::size_t Problem::num_nonzeros() const
{
    std::size_t nnz = 0;
    for (auto const& r : rows_)
    {
        nnz += r.size();
    }
    return nnz;
}

double Problem::objective(std::vector<double> const& x) const
{
    double obj = 0.0;
    for (std::size_t j = 0; j < cost_.size(); ++j)
    {
        obj += cost_[j] * x[j];
    }
    return obj;
}

double Problem::max_violation(std::vector<double> const& x) const
{
    double worst = 0.0;
    for (std::size_t j = 0; j < cost_.size(); ++j)
    {
        worst = std::max({worst, var_lo_[j] - x[j], x[j] - var_hi_[j]});
    }
    for (std::size_t i = 0; i < rows_.size(); ++i)
    {
        double ax = 0.0;
        for (auto const& t : rows_[i])
        {
            ax += t.coef * x[static_cast<std::size_t>(t.var)];
        }
        worst = std::max({worst, row_lo_[i] - ax, ax - row_hi_[i]});
    }
    return worst;
}

namespace
{

std::string mps_name(std::string const& s)
{
    std::string out = s;
    for (auto& ch : out)
    {
        if (std::isspace(static_cast<unsigned char>(ch)))
        {
            ch = '_';
        }
    }
    return out;
}

} // namespace

void Problem::write_mps(std::ostream& os, std::string const& name) const
{
    auto const prec = os.precision(17);
    os << "NAME " << name << "\n";
    os << "ROWS\n";
    os << " N COST\n";
    std::vector<char> kind(rows_.size(), 'F');
    for (std::size_t i = 0; i < rows_.size(); ++i)
    {
        bool const lo = std::isfinite(row_lo_[i]);
        bool const hi = std::isfinite(row_hi_[i]);
        if (lo && hi && row_lo_[i] == row_hi_[i])
        {
            kind[i] = 'E';
        }
        else if (lo)
        {
            kind[i] = 'G';
        }
        else if (hi)
        {
            kind[i] = 'L';
        }
        if (kind[i] != 'F')
        {
            os << " " << kind[i] << " " << mps_name(row_names_[i]) << "\n";
        }
    }
    // column-major view
    std::vector<std::vector<std::pair<std::size_t, double>>> cols(cost_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i)
    {
        if (kind[i] == 'F')
        {
            continue;
        }
        for (auto const& t : rows_[i])
        {
            cols[static_cast<std::size_t>(t.var)].emplace_back(i, t.coef);
        }
    }
    os << "COLUMNS\n";
    for (std::size_t j = 0; j < cost_.size(); ++j)
    {
        auto const vn = mps_name(var_names_[j]);
        if (cost_[j] != 0.0 || cols[j].empty())
        {
            os << " " << vn << " COST " << cost_[j] << "\n";
        }
        for (auto const& [i, a] : cols[j])
        {
            os << " " << vn << " " << mps_name(row_names_[i]) << " " << a << "\n";
        }
    }
    os << "RHS\n";
    for (std::size_t i = 0; i < rows_.size(); ++i)
    {
        double rhs = 0.0;
        switch (kind[i])
        {
        case 'E':
        case 'G': rhs = row_lo_[i]; break;
        case 'L': rhs = row_hi_[i]; break;
        default: continue;
        }
        if (rhs != 0.0)
        {
            os << " RHS " << mps_name(row_names_[i]) << " " << rhs << "\n";
        }
    }
    bool ranges_header = false;
    for (std::size_t i = 0; i < rows_.size(); ++i)
    {
        if (kind[i] == 'G' && std::isfinite(row_hi_[i]))
        {
            if (!ranges_header)
            {
                os << "RANGES\n";
                ranges_header = true;
            }
            os << " RNG " << mps_name(row_names_[i]) << " " << (row_hi_[i] - row_lo_[i]) << "\n";
        }
    }
    os << "BOUNDS\n";
    for (std::size_t j = 0; j < cost_.size(); ++j)
    {
        auto const vn = mps_name(var_names_[j]);
        double const lo = var_lo_[j];
        double const hi = var_hi_[j];
        if (lo == hi)
        {
            os << " FX BND " << vn << " " << lo << "\n";
            continue;
        }
        if (!std::isfinite(lo) && !std::isfinite(hi))
        {
            os << " FR BND " << vn << "\n";
            continue;
        }
        if (!std::isfinite(lo))
        {
            os << " MI BND " << vn << "\n";
        }
        else if (lo != 0.0)
        {
            os << " LO BND " << vn << " " << lo << "\n";
        }
        if (std::isfinite(hi))
        {
            os << " UP BND " << vn << " " << hi << "\n";
        }
    }
    os << "ENDATA\n";
    os.precision(prec);
}

char const* to_string(Status s)
{
    switch (s)
    {
    case Status::Optimal: return "optimal";
    case Status::Stalled: return "stalled";
    case Status::IterationLimit: return "iteration-limit";
    case Status::Infeasible: return "infeasible";
    case Status::NumericalError: return "numerical-error";
    }
    return "unknown";
}

namespace
{

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

/// One standard-form column maps back to an original (or slack) column as
/// value = shift + sign * x_std.
struct ColumnMap
{
    int source;  // extended column (original variable, or n0 + slack index)
    double sign;
};

struct StandardForm
{
    SpMat a;
    Vec b, c, upper;
    std::vector<char> has_upper;
    std::vector<ColumnMap> columns;
    std::vector<double> shift;      // per extended column
    std::vector<int> row_of;        // standard row -> original row
    Vec row_scale, col_scale;
};

StandardForm to_standard_form(Problem const& p)
{
    std::size_t const n0 = p.num_variables();
    std::size_t const m0 = p.num_rows();

    // extended columns: originals then one slack per inequality row
    std::vector<double> lo(n0), hi(n0), cost(n0);
    for (std::size_t j = 0; j < n0; ++j)
    {
        lo[j] = p.var_lower(static_cast<int>(j));
        hi[j] = p.var_upper(static_cast<int>(j));
        cost[j] = p.cost(static_cast<int>(j));
    }
    std::vector<std::vector<Term>> rows(m0);
    std::vector<double> rhs(m0, 0.0);
    for (std::size_t i = 0; i < m0; ++i)
    {
        rows[i] = p.row(static_cast<int>(i));
        double const rl = p.row_lower(static_cast<int>(i));
        double const rh = p.row_upper(static_cast<int>(i));
        if (rl == rh)
        {
            rhs[i] = rl;
            continue;
        }
        int const s = static_cast<int>(lo.size());
        lo.push_back(rl);
        hi.push_back(rh);
        cost.push_back(0.0);
        rows[i].push_back({s, -1.0});
    }

    StandardForm sf;
    std::size_t const ne = lo.size();
    sf.shift.assign(ne, 0.0);
    std::vector<std::vector<std::pair<int, double>>> ext_to_std(ne); // (std col, sign)
    std::vector<double> std_cost, std_upper;
    std::vector<char> std_has_upper;
    for (std::size_t e = 0; e < ne; ++e)
    {
        auto add = [&](double sign, double upper) {
            int const k = static_cast<int>(sf.columns.size());
            sf.columns.push_back({static_cast<int>(e), sign});
            ext_to_std[e].emplace_back(k, sign);
            std_cost.push_back(sign * cost[e]);
            std_has_upper.push_back(std::isfinite(upper) ? 1 : 0);
            std_upper.push_back(std::isfinite(upper) ? upper : 0.0);
        };
        bool const flo = std::isfinite(lo[e]);
        bool const fhi = std::isfinite(hi[e]);
        if (flo && fhi && lo[e] == hi[e])
        {
            sf.shift[e] = lo[e];
        }
        else if (flo)
        {
            sf.shift[e] = lo[e];
            add(1.0, fhi ? hi[e] - lo[e] : kInf);
        }
        else if (fhi)
        {
            sf.shift[e] = hi[e];
            add(-1.0, kInf);
        }
        else
        {
            add(1.0, kInf);
            add(-1.0, kInf);
        }
    }

    std::vector<Eigen::Triplet<double>> trip;
    std::vector<double> b;
    for (std::size_t i = 0; i < m0; ++i)
    {
        double bi = rhs[i];
        bool any = false;
        for (auto const& t : rows[i])
        {
            auto const e = static_cast<std::size_t>(t.var);
            bi -= t.coef * sf.shift[e];
            for (auto const& [k, sign] : ext_to_std[e])
            {
                if (t.coef != 0.0)
                {
                    trip.emplace_back(static_cast<int>(sf.row_of.size()), k, sign * t.coef);
                    any = true;
                }
            }
        }
        if (!any)
        {
            if (std::abs(bi) > 1e-9 * (1.0 + std::abs(rhs[i])))
            {
                throw std::domain_error("lp: row " + p.row_name(static_cast<int>(i)) + " is infeasible");
            }
            continue;
        }
        sf.row_of.push_back(static_cast<int>(i));
        b.push_back(bi);
    }

    auto const m = static_cast<Eigen::Index>(sf.row_of.size());
    auto const n = static_cast<Eigen::Index>(sf.columns.size());
    sf.a.resize(m, n);
    sf.a.setFromTriplets(trip.begin(), trip.end());
    sf.a.makeCompressed();
    sf.b = Eigen::Map<Vec>(b.data(), m);
    sf.c = Eigen::Map<Vec>(std_cost.data(), n);
    sf.upper = Eigen::Map<Vec>(std_upper.data(), n);
    sf.has_upper = std_has_upper;

    // Ruiz equilibration
    sf.row_scale = Vec::Ones(m);
    sf.col_scale = Vec::Ones(n);
    for (int pass = 0; pass < 20; ++pass)
    {
        Vec rmax = Vec::Zero(m);
        Vec cmax = Vec::Zero(n);
        for (Eigen::Index k = 0; k < sf.a.outerSize(); ++k)
        {
            for (SpMat::InnerIterator it(sf.a, k); it; ++it)
            {
                double const v = std::abs(it.value());
                rmax[it.row()] = std::max(rmax[it.row()], v);
                cmax[it.col()] = std::max(cmax[it.col()], v);
            }
        }
        double dev = 0.0;
        Vec rs(m), cs(n);
        for (Eigen::Index i = 0; i < m; ++i)
        {
            rs[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;
            dev = std::max(dev, std::abs(1.0 - rmax[i]));
        }
        for (Eigen::Index j = 0; j < n; ++j)
        {
            cs[j] = cmax[j] > 0.0 ? 1.0 / std::sqrt(cmax[j]) : 1.0;
            if (cmax[j] > 0.0)
            {
                dev = std::max(dev, std::abs(1.0 - cmax[j]));
            }
        }
        if (dev < 1e-2)
        {
            break;
        }
        sf.a = rs.asDiagonal() * sf.a * cs.asDiagonal();
        sf.row_scale.array() *= rs.array();
        sf.col_scale.array() *= cs.array();
    }
    sf.a.makeCompressed();
    sf.b.array() *= sf.row_scale.array();
    sf.c.array() *= sf.col_scale.array();
    for (Eigen::Index j = 0; j < n; ++j)
    {
        if (sf.has_upper[static_cast<std::size_t>(j)])
        {
            sf.upper[j] /= sf.col_scale[j];
        }
    }
    return sf;
}

// best merit at which an unfinished run still counts as a usable point
constexpr double kStallAcceptance = 1e-6;

double max_step(Vec const& v, Vec const& dv)
{
    double alpha = 1.0;
    for (Eigen::Index j = 0; j < v.size(); ++j)
    {
        if (dv[j] < 0.0)
        {
            alpha = std::min(alpha, -v[j] / dv[j]);
        }
    }
    return alpha;
}

/// Solver for (A diag(theta) A') y = r.
class NormalEquations
{
  public:
    virtual ~NormalEquations() = default;
    virtual bool factor(Vec const& theta) = 0;
    virtual Vec solve_factored(Vec const& rhs) const = 0;

    Vec solve(Vec const& rhs) const
    {
        Vec x = solve_factored(rhs);
        // iterative refinement against the unshifted matrix
        Vec r = rhs - multiply(x);
        double rnorm = r.lpNorm<Eigen::Infinity>();
        double const target = 1e-14 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>());
        for (int step = 0; step < 6 && rnorm > target; ++step)
        {
            Vec const x1 = x + solve_factored(r);
            Vec r1 = rhs - multiply(x1);
            double const n1 = r1.lpNorm<Eigen::Infinity>();
            if (!(n1 < 0.5 * rnorm))
            {
                if (n1 < rnorm)
                {
                    x = x1;
                }
                break;
            }
            x = x1;
            r = std::move(r1);
            rnorm = n1;
        }
        return x;
    }

  protected:
    NormalEquations(SpMat const& a)
        : a_(a), at_(a.transpose())
    {
    }

    Vec multiply(Vec const& y) const
    {
        Vec t = at_ * y;
        t.array() *= theta_.array();
        return a_ * t;
    }

    SpMat const& a_;
    SpMat at_;
    Vec theta_;
};

class SparseNormalEquations final : public NormalEquations
{
  public:
    explicit SparseNormalEquations(SpMat const& a)
        : NormalEquations(a)
    {
    }

    bool factor(Vec const& theta) override
    {
        theta_ = theta;
        m_ = a_ * theta.asDiagonal() * at_;
        double maxdiag = 0.0;
        for (Eigen::Index i = 0; i < m_.rows(); ++i)
        {
            maxdiag = std::max(maxdiag, m_.coeff(i, i));
        }
        if (!analyzed_)
        {
            llt_.analyzePattern(m_);
            analyzed_ = true;
        }
        double reg = 1e-13 * std::max(1.0, maxdiag);
        for (int attempt = 0; attempt < 8; ++attempt)
        {
            llt_.setShift(reg);
            llt_.factorize(m_);
            if (llt_.info() == Eigen::Success)
            {
                return true;
            }
            reg *= 100.0;
        }
        return false;
    }

    Vec solve_factored(Vec const& rhs) const override { return llt_.solve(rhs); }

  private:
    SpMat m_;
    Eigen::SimplicialLLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
    bool analyzed_ = false;
};

/// Normal equations of a block-angular program: linking rows plus chains of
/// rows where consecutive rows share columns. Each chain block is tridiagonal;
/// the linking rows are solved through a dense Schur complement. Entries of a
/// chain inverse follow from its Cholesky factor by a one-term recurrence, so
/// the Schur complement costs O(chain length^2) per chain.
class ChainNormalEquations final : public NormalEquations
{
  public:
    static std::unique_ptr<ChainNormalEquations> try_create(SpMat const& a, std::vector<char> const& linking)
    {
        std::unique_ptr<ChainNormalEquations> ne(new ChainNormalEquations(a));
        if (!ne->setup(linking))
        {
            return nullptr;
        }
        return ne;
    }

    bool factor(Vec const& theta) override
    {
        theta_ = theta;
        auto const nb = chain_row_.size();
        std::fill(diag_.begin(), diag_.end(), 0.0);
        std::fill(off_.begin(), off_.end(), 0.0);
        std::fill(link_coef_.begin(), link_coef_.end(), 0.0);
        s_.setZero();
        for (Eigen::Index j = 0; j < a_.outerSize(); ++j)
        {
            double const th = theta[j];
            int b1 = -1, b2 = -1;
            double v1 = 0.0, v2 = 0.0;
            std::size_t nl = 0;
            for (SpMat::InnerIterator it(a_, j); it; ++it)
            {
                int const r = static_cast<int>(it.row());
                int const bi = chain_index_[static_cast<std::size_t>(r)];
                if (bi >= 0)
                {
                    (b1 < 0 ? (b1 = bi, v1) : (b2 = bi, v2)) = it.value();
                }
                else
                {
                    lrow_[nl] = link_index_[static_cast<std::size_t>(r)];
                    lval_[nl] = it.value();
                    ++nl;
                }
            }
            if (b1 >= 0)
            {
                diag_[static_cast<std::size_t>(b1)] += v1 * v1 * th;
            }
            if (b2 >= 0)
            {
                diag_[static_cast<std::size_t>(b2)] += v2 * v2 * th;
                off_[static_cast<std::size_t>(std::min(b1, b2))] += v1 * v2 * th;
            }
            for (std::size_t p = 0; p < nl; ++p)
            {
                if (b1 >= 0)
                {
                    link_coef_[static_cast<std::size_t>(b1)] += v1 * lval_[p] * th;
                }
                if (b2 >= 0)
                {
                    link_coef_[static_cast<std::size_t>(b2)] += v2 * lval_[p] * th;
                }
                for (std::size_t q = 0; q <= p; ++q)
                {
                    auto const hi = std::max(lrow_[p], lrow_[q]);
                    auto const lo = std::min(lrow_[p], lrow_[q]);
                    s_(hi, lo) += lval_[p] * lval_[q] * th;
                }
            }
        }

        // chain Cholesky: pivot l_i^2 and sub-diagonal m_i of L
        for (auto const& [begin, end] : chains_)
        {
            for (std::size_t i = begin; i < end; ++i)
            {
                double d = diag_[i];
                if (i > begin)
                {
                    double const m = off_[i - 1] / lfac_[i - 1];
                    sub_[i] = m;
                    d -= m * m;
                }
                // near-dependent rows get a relative pivot floor
                double const floor = diag_[i] > 0.0 ? 1e-12 * diag_[i] : 1e-300;
                lfac_[i] = std::sqrt(std::max(d, floor));
            }
        }

        // Schur complement on the linking rows, lower triangle
        for (auto const& [begin, end] : chains_)
        {
            if (end - begin == 0)
            {
                continue;
            }
            // X_ii from the bottom up; rho_i = -m_{i+1} / l_i
            double xmax = 0.0;
            for (std::size_t i = end; i-- > begin;)
            {
                double const inv = 1.0 / (lfac_[i] * lfac_[i]);
                if (i + 1 < end)
                {
                    rho_[i] = -sub_[i + 1] / lfac_[i];
                    xdiag_[i] = inv + rho_[i] * rho_[i] * xdiag_[i + 1];
                }
                else
                {
                    rho_[i] = 0.0;
                    xdiag_[i] = inv;
                }
                xmax = std::max(xmax, xdiag_[i]);
            }
            for (std::size_t j = begin; j < end; ++j)
            {
                int const lj = chain_link_[j];
                if (lj < 0)
                {
                    continue;
                }
                double const cj = link_coef_[j];
                double const cutoff = 1e-32 * xdiag_[j] * xmax;
                double x = xdiag_[j];
                s_(lj, lj) -= cj * cj * x;
                for (std::size_t i = j; i-- > begin;)
                {
                    x *= rho_[i];
                    if (x * x < cutoff)
                    {
                        break;
                    }
                    int const li = chain_link_[i];
                    if (li >= 0)
                    {
                        double const v = link_coef_[i] * cj * x;
                        s_(std::max(li, lj), std::min(li, lj)) -= li == lj ? 2.0 * v : v;
                    }
                }
            }
        }
        (void)nb;

        double const smax = s_.rows() ? s_.diagonal().cwiseAbs().maxCoeff() : 0.0;
        double reg = 0.0;
        for (int attempt = 0; attempt < 8; ++attempt)
        {
            Eigen::MatrixXd shifted = s_;
            shifted.diagonal().array() += reg;
            reg = reg == 0.0 ? 1e-14 * std::max(smax, 1e-300) : reg * 100.0;
            schur_.compute(shifted);
            if (schur_.info() == Eigen::Success)
            {
                return true;
            }
            reg *= 100.0;
        }
        return false;
    }

    Vec solve_factored(Vec const& rhs) const override
    {
        Vec y(rhs.size());
        std::vector<double> z(chain_row_.size());
        for (std::size_t i = 0; i < chain_row_.size(); ++i)
        {
            z[i] = rhs[chain_row_[i]];
        }
        chain_solve(z);
        Vec t(static_cast<Eigen::Index>(link_row_.size()));
        for (std::size_t l = 0; l < link_row_.size(); ++l)
        {
            t[static_cast<Eigen::Index>(l)] = rhs[link_row_[l]];
        }
        for (std::size_t i = 0; i < chain_row_.size(); ++i)
        {
            if (chain_link_[i] >= 0)
            {
                t[chain_link_[i]] -= link_coef_[i] * z[i];
            }
        }
        Vec const yl = t.size() ? Vec(schur_.solve(t)) : t;
        std::vector<double> w(chain_row_.size(), 0.0);
        for (std::size_t i = 0; i < chain_row_.size(); ++i)
        {
            if (chain_link_[i] >= 0)
            {
                w[i] = link_coef_[i] * yl[chain_link_[i]];
            }
        }
        chain_solve(w);
        for (std::size_t i = 0; i < chain_row_.size(); ++i)
        {
            y[chain_row_[i]] = z[i] - w[i];
        }
        for (std::size_t l = 0; l < link_row_.size(); ++l)
        {
            y[link_row_[l]] = yl[static_cast<Eigen::Index>(l)];
        }
        return y;
    }

  private:
    explicit ChainNormalEquations(SpMat const& a)
        : NormalEquations(a)
    {
    }

    void chain_solve(std::vector<double>& v) const
    {
        for (auto const& [begin, end] : chains_)
        {
            for (std::size_t i = begin; i < end; ++i)
            {
                if (i > begin)
                {
                    v[i] -= sub_[i] * v[i - 1];
                }
                v[i] /= lfac_[i];
            }
            for (std::size_t i = end; i-- > begin;)
            {
                if (i + 1 < end)
                {
                    v[i] -= sub_[i + 1] * v[i + 1];
                }
                v[i] /= lfac_[i];
            }
        }
    }

    bool setup(std::vector<char> const& linking)
    {
        auto const m = static_cast<std::size_t>(a_.rows());
        link_index_.assign(m, -1);
        for (std::size_t r = 0; r < m; ++r)
        {
            if (linking[r])
            {
                link_index_[r] = static_cast<int>(link_row_.size());
                link_row_.push_back(static_cast<Eigen::Index>(r));
            }
        }
        if (link_row_.empty())
        {
            return false;
        }

        // connected components of non-linking rows through shared columns
        std::vector<int> parent(m);
        for (std::size_t r = 0; r < m; ++r)
        {
            parent[r] = static_cast<int>(r);
        }
        auto find = [&](int r) {
            while (parent[static_cast<std::size_t>(r)] != r)
            {
                auto& p = parent[static_cast<std::size_t>(r)];
                p = parent[static_cast<std::size_t>(p)];
                r = p;
            }
            return r;
        };
        std::size_t max_links = 0;
        for (Eigen::Index j = 0; j < a_.outerSize(); ++j)
        {
            int first = -1;
            std::size_t nb = 0, nl = 0;
            for (SpMat::InnerIterator it(a_, j); it; ++it)
            {
                int const r = static_cast<int>(it.row());
                if (link_index_[static_cast<std::size_t>(r)] >= 0)
                {
                    ++nl;
                    continue;
                }
                if (++nb > 2)
                {
                    return false;
                }
                if (first < 0)
                {
                    first = r;
                }
                else
                {
                    parent[static_cast<std::size_t>(find(r))] = find(first);
                }
            }
            max_links = std::max(max_links, nl);
        }
        lrow_.resize(max_links);
        lval_.resize(max_links);

        std::vector<std::vector<int>> groups;
        std::vector<int> group_of(m, -1);
        for (std::size_t r = 0; r < m; ++r)
        {
            if (link_index_[r] >= 0)
            {
                continue;
            }
            int const root = find(static_cast<int>(r));
            auto& g = group_of[static_cast<std::size_t>(root)];
            if (g < 0)
            {
                g = static_cast<int>(groups.size());
                groups.emplace_back();
            }
            groups[static_cast<std::size_t>(g)].push_back(static_cast<int>(r));
        }
        chain_index_.assign(m, -1);
        for (auto const& g : groups)
        {
            std::size_t const begin = chain_row_.size();
            for (int r : g)
            {
                chain_index_[static_cast<std::size_t>(r)] = static_cast<int>(chain_row_.size());
                chain_row_.push_back(r);
            }
            chains_.emplace_back(begin, chain_row_.size());
        }

        // rows sharing a column must be adjacent in their chain; each chain
        // row may touch at most one linking row
        chain_link_.assign(chain_row_.size(), -1);
        for (Eigen::Index j = 0; j < a_.outerSize(); ++j)
        {
            int b1 = -1, b2 = -1;
            std::vector<int> links;
            for (SpMat::InnerIterator it(a_, j); it; ++it)
            {
                auto const r = static_cast<std::size_t>(it.row());
                if (link_index_[r] >= 0)
                {
                    links.push_back(link_index_[r]);
                }
                else
                {
                    (b1 < 0 ? b1 : b2) = chain_index_[r];
                }
            }
            if (b2 >= 0 && std::abs(b1 - b2) != 1)
            {
                return false;
            }
            for (int b : {b1, b2})
            {
                if (b < 0)
                {
                    continue;
                }
                for (int l : links)
                {
                    auto& cl = chain_link_[static_cast<std::size_t>(b)];
                    if (cl >= 0 && cl != l)
                    {
                        return false;
                    }
                    cl = l;
                }
            }
        }

        auto const nb = chain_row_.size();
        diag_.resize(nb);
        off_.resize(nb);
        link_coef_.resize(nb);
        lfac_.resize(nb);
        sub_.assign(nb, 0.0);
        rho_.resize(nb);
        xdiag_.resize(nb);
        auto const nl = static_cast<Eigen::Index>(link_row_.size());
        s_.resize(nl, nl);
        return true;
    }

    std::vector<int> link_index_;                 // row -> linking index or -1
    std::vector<Eigen::Index> link_row_;          // linking index -> row
    std::vector<int> chain_index_;                // row -> chain position or -1
    std::vector<Eigen::Index> chain_row_;         // chain position -> row
    std::vector<std::pair<std::size_t, std::size_t>> chains_;
    std::vector<int> chain_link_;                 // chain position -> linking index or -1
    std::vector<double> diag_, off_, link_coef_, lfac_, sub_, rho_, xdiag_;
    std::vector<int> lrow_;
    std::vector<double> lval_;
    Eigen::MatrixXd s_;
    Eigen::LLT<Eigen::MatrixXd> schur_;
};

std::unique_ptr<NormalEquations> make_normal_equations(SpMat const& a, std::vector<char> const& linking)
{
    if (auto chain = ChainNormalEquations::try_create(a, linking))
    {
        return chain;
    }
    return std::make_unique<SparseNormalEquations>(a);
}

} // namespace

Solution solve(Problem const& problem, Options const& opt)
{
    Solution sol;
    StandardForm sf = to_standard_form(problem);
    SpMat const& a = sf.a;
    Eigen::Index const m = a.rows();
    Eigen::Index const n = a.cols();

    Vec ub = sf.upper;
    Vec umask(n);
    for (Eigen::Index j = 0; j < n; ++j)
    {
        umask[j] = sf.has_upper[static_cast<std::size_t>(j)] ? 1.0 : 0.0;
    }
    auto const n_upper = umask.sum();

    Vec x(n), z(n), w = Vec::Zero(n), v = Vec::Zero(n), y = Vec::Zero(m);

    std::vector<char> linking(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i)
    {
        linking[static_cast<std::size_t>(i)] = problem.is_linking(sf.row_of[static_cast<std::size_t>(i)]) ? 1 : 0;
    }
    auto const ne_ptr = make_normal_equations(a, linking);
    auto& ne = *ne_ptr;

    // starting point (Mehrotra's heuristic, adapted to upper bounds)
    if (m > 0)
    {
        if (!ne.factor(Vec::Ones(n)))
        {
            sol.status = Status::NumericalError;
            return sol;
        }
        x = a.transpose() * ne.solve(sf.b);
        y = ne.solve(a * sf.c);
        z = sf.c - a.transpose() * y;
    }
    else
    {
        x = Vec::Ones(n);
        z = sf.c;
    }
    double const dx0 = std::max(-1.5 * (n > 0 ? x.minCoeff() : 0.0), 0.0);
    double const dz0 = std::max(-1.5 * (n > 0 ? z.minCoeff() : 0.0), 0.0);
    x.array() += dx0;
    z.array() += dz0;
    {
        double const xz = x.dot(z);
        double const sx = x.sum();
        double const sz = z.sum();
        if (sz > 0.0 && sx > 0.0)
        {
            x.array() += 0.5 * xz / sz;
            z.array() += 0.5 * xz / sx;
        }
    }
    for (Eigen::Index j = 0; j < n; ++j)
    {
        x[j] = std::max(x[j], 1e-2);
        z[j] = std::max(z[j], 1e-2);
        if (umask[j] > 0.0)
        {
            if (!(x[j] < 0.9 * ub[j]))
            {
                x[j] = 0.5 * ub[j];
            }
            x[j] = std::max(x[j], std::min(1e-2, 0.5 * ub[j]));
            w[j] = ub[j] - x[j];
            v[j] = z[j];
        }
    }

    double const bnorm = sf.b.size() ? sf.b.lpNorm<Eigen::Infinity>() : 0.0;
    double const cnorm = n ? sf.c.lpNorm<Eigen::Infinity>() : 0.0;
    double const unorm = n ? (ub.array() * umask.array()).abs().maxCoeff() : 0.0;
    double const denom = static_cast<double>(n) + n_upper;

    struct Iterate
    {
        double merit = std::numeric_limits<double>::infinity();
        Vec x, y;
        double pinf = 0.0, dinf = 0.0, gap = 0.0;
    } best;
    double best_merit = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int iter = 0; iter <= opt.max_iterations; ++iter)
    {
        Vec const rb = sf.b - a * x;
        Vec const ru = (umask.array() * (ub - x - w).array()).matrix();
        Vec const rc = sf.c - a.transpose() * y - z + v;
        double const mu = denom > 0 ? (x.dot(z) + w.dot(v)) / denom : 0.0;

        double const pobj = sf.c.dot(x);
        double const dobj = sf.b.dot(y) - (umask.array() * ub.array() * v.array()).sum();
        double const pinf = std::max(
            rb.size() ? rb.lpNorm<Eigen::Infinity>() / (1.0 + bnorm) : 0.0,
            n ? ru.lpNorm<Eigen::Infinity>() / (1.0 + unorm) : 0.0);
        double const dinf = n ? rc.lpNorm<Eigen::Infinity>() / (1.0 + cnorm) : 0.0;
        double const gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

        sol.iterations = iter;
        sol.primal_residual = pinf;
        sol.dual_residual = dinf;
        sol.relative_gap = gap;

        if (opt.verbose)
        {
            std::cerr << "ipm " << iter << " pobj " << pobj << " dobj " << dobj
                      << " pinf " << pinf << " dinf " << dinf << " gap " << gap
                      << " mu " << mu << "\n";
        }

        if (pinf <= opt.tolerance && dinf <= opt.tolerance && gap <= opt.tolerance)
        {
            sol.status = Status::Optimal;
            break;
        }
        double const merit = std::max({pinf, dinf, gap});
        if (merit < best.merit)
        {
            best = {merit, x, y, pinf, dinf, gap};
        }
        if (merit < 0.5 * best_merit)
        {
            best_merit = merit;
            since_best = 0;
        }
        else if (++since_best > 15)
        {
            sol.status = Status::Stalled;
            break;
        }
        if (!std::isfinite(mu) || mu > 1e30 || x.lpNorm<Eigen::Infinity>() > 1e30)
        {
            sol.status = Status::Infeasible;
            break;
        }
        if (iter == opt.max_iterations)
        {
            sol.status = Status::IterationLimit;
            break;
        }

        Vec d = (z.array() / x.array()).matrix();
        for (Eigen::Index j = 0; j < n; ++j)
        {
            if (umask[j] > 0.0)
            {
                d[j] += v[j] / w[j];
            }
        }
        Vec const theta = (1.0 / (d.array() + 1e-14)).matrix();
        if (m > 0 && !ne.factor(theta))
        {
            sol.status = Status::NumericalError;
            break;
        }

        struct Dir
        {
            Vec dx, dy, dz, dw, dv;
        };
        auto newton = [&](Vec const& rxz, Vec const& rwv) {
            Dir dir;
            Vec rhat = rc - (rxz.array() / x.array()).matrix();
            for (Eigen::Index j = 0; j < n; ++j)
            {
                if (umask[j] > 0.0)
                {
                    rhat[j] += (rwv[j] - v[j] * ru[j]) / w[j];
                }
            }
            if (m > 0)
            {
                Vec rhs = rb + a * (theta.array() * rhat.array()).matrix();
                dir.dy = ne.solve(rhs);
                dir.dx = (theta.array() * (a.transpose() * dir.dy - rhat).array()).matrix();
            }
            else
            {
                dir.dy = Vec::Zero(0);
                dir.dx = (theta.array() * (-rhat).array()).matrix();
            }
            dir.dz = ((rxz.array() - z.array() * dir.dx.array()) / x.array()).matrix();
            dir.dw = Vec::Zero(n);
            dir.dv = Vec::Zero(n);
            for (Eigen::Index j = 0; j < n; ++j)
            {
                if (umask[j] > 0.0)
                {
                    dir.dw[j] = ru[j] - dir.dx[j];
                    dir.dv[j] = (rwv[j] - v[j] * dir.dw[j]) / w[j];
                }
            }
            return dir;
        };

        // predictor
        Vec rxz = -(x.array() * z.array()).matrix();
        Vec rwv = -(w.array() * v.array()).matrix();
        Dir aff = newton(rxz, rwv);
        double const ap_aff = std::min(max_step(x, aff.dx), max_step(w, aff.dw));
        double const ad_aff = std::min(max_step(z, aff.dz), max_step(v, aff.dv));
        double const mu_aff = denom > 0
            ? ((x + ap_aff * aff.dx).dot(z + ad_aff * aff.dz)
               + (w + ap_aff * aff.dw).dot(v + ad_aff * aff.dv))
                / denom
            : 0.0;
        double const sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

        // corrector
        rxz = (sigma * mu - x.array() * z.array() - aff.dx.array() * aff.dz.array()).matrix();
        rwv = (umask.array()
               * (sigma * mu - w.array() * v.array() - aff.dw.array() * aff.dv.array()))
                  .matrix();
        Dir dir = newton(rxz, rwv);

        double const eta = std::max(0.9, 1.0 - 10.0 * mu);
        double const ap = std::min(1.0, eta * std::min(max_step(x, dir.dx), max_step(w, dir.dw)));
        double const ad = std::min(1.0, eta * std::min(max_step(z, dir.dz), max_step(v, dir.dv)));

        x += ap * dir.dx;
        w += ap * dir.dw;
        y += ad * dir.dy;
        z += ad * dir.dz;
        v += ad * dir.dv;
        // keep strictly interior against rounding
        for (Eigen::Index j = 0; j < n; ++j)
        {
            x[j] = std::max(x[j], 1e-300);
            z[j] = std::max(z[j], 1e-300);
            if (umask[j] > 0.0)
            {
                w[j] = std::max(w[j], 1e-300);
                v[j] = std::max(v[j], 1e-300);
            }
        }
    }

    // an unfinished run reports its best iterate
    if (sol.status != Status::Optimal && std::isfinite(best.merit))
    {
        x = best.x;
        y = best.y;
        sol.primal_residual = best.pinf;
        sol.dual_residual = best.dinf;
        sol.relative_gap = best.gap;
        if (best.merit <= kStallAcceptance)
        {
            sol.status = Status::Stalled;
        }
        else if (sol.status == Status::Stalled)
        {
            sol.status = Status::NumericalError;
        }
    }

    // map back to the original variables
    std::size_t const n0 = problem.num_variables();
    std::vector<double> ext(sf.shift);
    for (Eigen::Index k = 0; k < n; ++k)
    {
        auto const& cm = sf.columns[static_cast<std::size_t>(k)];
        ext[static_cast<std::size_t>(cm.source)] += cm.sign * x[k] * sf.col_scale[k];
    }
    sol.x.assign(ext.begin(), ext.begin() + static_cast<std::ptrdiff_t>(n0));
    for (std::size_t j = 0; j < n0; ++j)
    {
        sol.x[j] = std::clamp(
            sol.x[j], problem.var_lower(static_cast<int>(j)), problem.var_upper(static_cast<int>(j)));
    }
    sol.row_duals.assign(problem.num_rows(), 0.0);
    for (Eigen::Index i = 0; i < m; ++i)
    {
        sol.row_duals[static_cast<std::size_t>(sf.row_of[static_cast<std::size_t>(i)])] =
            y[i] * sf.row_scale[i];
    }
    sol.objective = problem.objective(sol.x);
    return sol;
}

} // namespace gridimpact::lp
