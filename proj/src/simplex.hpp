#pragma once

#include <chrono>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "uc/milp.hpp"

namespace uc::detail {

using Clock = std::chrono::steady_clock;

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit, time_limit };

/// Bounded-variable dual simplex over a dense tableau.
///
/// Rows are written as  A x - r = 0  with one logical column r_i per row;
/// the row sense and rhs become bounds on r_i. The slack basis is always a
/// valid starting point, and since bound changes never touch reduced costs
/// the last optimal basis stays dual feasible when structural bounds move.
/// Branch and bound relies on that to warm-start every node.
class DualSimplex {
public:
    explicit DualSimplex(const Model& model);

    void set_bounds(std::size_t j, double lb, double ub);
    double lower(std::size_t j) const { return lb_[j]; }
    double upper(std::size_t j) const { return ub_[j]; }

    LpStatus solve(Clock::time_point deadline = Clock::time_point::max());

    double objective() const;
    std::vector<double> structural_values() const;
    std::size_t iterations() const { return total_iterations_; }
    /// Largest wrong-signed reduced cost among nonbasic columns.
    double max_dual_infeasibility() const;

private:
    enum class State : std::uint8_t { basic, lower, upper, zero };

    void refactor();
    bool sparse_factor();
    bool dense_factor();
    bool tableau_consistent() const;
    void reset_to_slack_basis();
    void place_nonbasic(std::size_t j);
    void compute_basic_values();
    int choose_leaving_row() const;
    int choose_entering(int row, bool to_lower) const;
    void pivot(int row, int col, bool leave_to_lower);
    bool at_artificial_bound(std::size_t j) const;

    std::size_t n_ = 0;      // structural columns
    std::size_t m_ = 0;      // rows (= logical columns)
    std::size_t cols_ = 0;   // n_ + m_
    double obj_constant_ = 0.0;

    Eigen::MatrixXd a_;  // m x cols, original [A | -I]
    Eigen::SparseMatrix<double> a_sparse_;  // structural block of a_
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> tab_;  // B^-1 [A | -I]
    Eigen::VectorXd cost_;
    Eigen::VectorXd d_;  // reduced costs
    Eigen::VectorXd x_;

    std::vector<double> lb_, ub_;    // true bounds
    std::vector<double> wlb_, wub_;  // working bounds (may be boxed)
    std::vector<State> state_;
    std::vector<int> head_;  // basic column of each row
    std::vector<int> row_of_;  // row of a basic column, -1 otherwise

    std::size_t pivots_since_refactor_ = 0;
    std::size_t total_iterations_ = 0;
    bool bland_ = false;
};

}  // namespace uc::detail
