#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace gridimpact::lp
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term
{
    int var;
    double coef;
};

/// A linear program in bounded row form:
///   minimize  c'x
///   s.t.      row_lo <= A x <= row_hi
///             var_lo <= x <= var_hi
class Problem
{
  public:
    int add_variable(double lower, double upper, double cost, std::string name = {});
    int add_row(std::vector<Term> terms, double lower, double upper, std::string name = {});

    /// Mark a row as linking (coupling otherwise independent blocks of rows).
    /// The solver exploits the structure when the remaining rows form chains.
    void mark_linking(int r) { linking_.at(static_cast<std::size_t>(r)) = 1; }
    bool is_linking(int r) const { return linking_[static_cast<std::size_t>(r)] != 0; }

    void set_cost(int var, double cost) { cost_.at(static_cast<std::size_t>(var)) = cost; }
    void set_bounds(int var, double lower, double upper);

    std::size_t num_variables() const { return cost_.size(); }
    std::size_t num_rows() const { return rows_.size(); }
    std::size_t num_nonzeros() const;

    double cost(int var) const { return cost_[static_cast<std::size_t>(var)]; }
    double var_lower(int var) const { return var_lo_[static_cast<std::size_t>(var)]; }
    double var_upper(int var) const { return var_hi_[static_cast<std::size_t>(var)]; }
    std::vector<Term> const& row(int r) const { return rows_[static_cast<std::size_t>(r)]; }
    double row_lower(int r) const { return row_lo_[static_cast<std::size_t>(r)]; }
    double row_upper(int r) const { return row_hi_[static_cast<std::size_t>(r)]; }
    std::string const& var_name(int var) const { return var_names_[static_cast<std::size_t>(var)]; }
    std::string const& row_name(int r) const { return row_names_[static_cast<std::size_t>(r)]; }

    double objective(std::vector<double> const& x) const;
    /// Largest violation of any row or variable bound at x.
    double max_violation(std::vector<double> const& x) const;

    /// Free-format MPS.
    void write_mps(std::ostream& os, std::string const& name = "GRIDIMPACT") const;

  private:
    std::vector<double> cost_, var_lo_, var_hi_;
    std::vector<std::string> var_names_;
    std::vector<std::vector<Term>> rows_;
    std::vector<double> row_lo_, row_hi_;
    std::vector<std::string> row_names_;
    std::vector<char> linking_;
};

enum class Status
{
    Optimal,
    Stalled,        ///< stopped short of tolerance at a near-optimal point (merit <= 1e-6)
    IterationLimit,
    Infeasible,
    NumericalError,
};

char const* to_string(Status s);

struct Options
{
    double tolerance = 1e-8;
    int max_iterations = 200;
    bool verbose = false;
};

struct Solution
{
    Status status = Status::NumericalError;
    std::vector<double> x;
    std::vector<double> row_duals;
    double objective = 0.0;
    int iterations = 0;
    double primal_residual = 0.0; ///< relative, scaled problem
    double dual_residual = 0.0;
    double relative_gap = 0.0;
};

/// Primal-dual interior point method (Mehrotra predictor-corrector) on the
/// equilibrated standard form. The normal equations are solved by a Schur
/// complement on the linking rows when every other row belongs to a chain
/// (tridiagonal block), and by sparse Cholesky otherwise.
Solution solve(Problem const& problem, Options const& options = {});

} // namespace gridimpact::lp
