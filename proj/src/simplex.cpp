#include "simplex.hpp"

#include <algorithm>
#include <cmath>

namespace uc::detail {

namespace {

constexpr double kPrimalTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-7;
// Stand-in for an infinite bound that would otherwise make the slack basis
// dual infeasible. A solution resting on one signals unboundedness.
constexpr double kBox = 1e7;
constexpr std::size_t kRefactorInterval = 250;
constexpr int kStallIterations = 50;

}  // namespace

DualSimplex::DualSimplex(const Model& model)
    : n_(model.num_variables()), m_(model.num_constraints()), cols_(n_ + m_) {
    a_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(cols_));
    lb_.resize(cols_);
    ub_.resize(cols_);
    for (std::size_t j = 0; j < n_; ++j) {
        lb_[j] = model.variable(j).lb;
        ub_[j] = model.variable(j).ub;
    }
    for (std::size_t i = 0; i < m_; ++i) {
        const auto& c = model.constraints()[i];
        for (const auto& t : c.terms) a_(static_cast<Eigen::Index>(i), t.var.index) += t.coef;
        a_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(n_ + i)) = -1.0;
        const std::size_t j = n_ + i;
        switch (c.sense) {
        case Sense::le: lb_[j] = -kInf; ub_[j] = c.rhs; break;
        case Sense::ge: lb_[j] = c.rhs; ub_[j] = kInf; break;
        case Sense::eq: lb_[j] = ub_[j] = c.rhs; break;
        }
    }
    a_sparse_ = a_.leftCols(static_cast<Eigen::Index>(n_)).sparseView();
    cost_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols_));
    for (const auto& t : model.objective().terms()) cost_[t.var.index] += t.coef;
    obj_constant_ = model.objective().constant();

    wlb_ = lb_;
    wub_ = ub_;
    x_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cols_));
    state_.assign(cols_, State::lower);
    head_.assign(m_, -1);
    row_of_.assign(cols_, -1);
    reset_to_slack_basis();
}

void DualSimplex::set_bounds(std::size_t j, double lb, double ub) {
    lb_[j] = lb;
    ub_[j] = ub;
}

void DualSimplex::reset_to_slack_basis() {
    std::fill(row_of_.begin(), row_of_.end(), -1);
    for (std::size_t j = 0; j < n_; ++j) state_[j] = State::lower;
    for (std::size_t i = 0; i < m_; ++i) {
        head_[i] = static_cast<int>(n_ + i);
        row_of_[n_ + i] = static_cast<int>(i);
        state_[n_ + i] = State::basic;
    }
    refactor();
    // Crash free columns into the basis through equality rows. Once basic a
    // free column never leaves, which keeps the artificial boxes (and their
    // large values) out of the way.
    for (std::size_t j = 0; j < n_; ++j) {
        if (std::isfinite(lb_[j]) || std::isfinite(ub_[j])) continue;
        int best = -1;
        double best_abs = 1e-7;
        for (std::size_t i = 0; i < m_; ++i) {
            const auto h = static_cast<std::size_t>(head_[i]);
            if (h < n_ || lb_[h] != ub_[h]) continue;
            const double a = std::abs(tab_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            if (a > best_abs) {
                best_abs = a;
                best = static_cast<int>(i);
            }
        }
        if (best >= 0) pivot(best, static_cast<int>(j), true);
    }
}

void DualSimplex::refactor() {
    pivots_since_refactor_ = 0;
    const auto m = static_cast<Eigen::Index>(m_);
    if (m == 0) {
        tab_.resize(0, static_cast<Eigen::Index>(cols_));
        d_ = cost_;
        return;
    }
    if (!sparse_factor() && !dense_factor()) {
        // Numerically singular basis; the slack basis is -I and always safe.
        bool already_slack = true;
        for (std::size_t i = 0; i < m_; ++i) already_slack = already_slack && head_[i] == static_cast<int>(n_ + i);
        if (!already_slack) {
            reset_to_slack_basis();
            return;
        }
        tab_ = -a_;
    }
    Eigen::VectorXd cb(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const int j = head_[i];
        tab_.col(j).setZero();
        tab_(i, j) = 1.0;
        cb[i] = cost_[j];
    }
    d_ = cost_ - tab_.transpose() * cb;
    for (Eigen::Index i = 0; i < m; ++i) d_[head_[i]] = 0.0;
}

// Identity columns of the new tableau must come back as unit vectors.
bool DualSimplex::tableau_consistent() const {
    if (!tab_.allFinite()) return false;
    double err = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
        const auto j = static_cast<Eigen::Index>(head_[i]);
        for (std::size_t r = 0; r < m_; ++r) {
            const double target = r == i ? 1.0 : 0.0;
            err = std::max(err, std::abs(tab_(static_cast<Eigen::Index>(r), j) - target));
        }
    }
    return err <= 1e-7;
}

bool DualSimplex::sparse_factor() {
    const auto m = static_cast<Eigen::Index>(m_);
    std::vector<Eigen::Triplet<double>> entries;
    for (Eigen::Index i = 0; i < m; ++i) {
        const int j = head_[i];
        if (static_cast<std::size_t>(j) >= n_) {
            entries.emplace_back(static_cast<Eigen::Index>(j - static_cast<int>(n_)), i, -1.0);
            continue;
        }
        for (Eigen::SparseMatrix<double>::InnerIterator it(a_sparse_, j); it; ++it) {
            entries.emplace_back(it.row(), i, it.value());
        }
    }
    Eigen::SparseMatrix<double> basis(m, m);
    basis.setFromTriplets(entries.begin(), entries.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(basis);
    lu.factorize(basis);
    if (lu.info() != Eigen::Success) return false;
    const auto n = static_cast<Eigen::Index>(n_);
    tab_.resize(m, static_cast<Eigen::Index>(cols_));
    const Eigen::MatrixXd structural = lu.solve(Eigen::MatrixXd(a_.leftCols(n)));
    const Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(m, m));
    if (lu.info() != Eigen::Success) return false;
    tab_.leftCols(n) = structural;
    tab_.rightCols(m) = -inv;
    return tableau_consistent();
}

bool DualSimplex::dense_factor() {
    const auto m = static_cast<Eigen::Index>(m_);
    Eigen::MatrixXd basis(m, m);
    for (Eigen::Index i = 0; i < m; ++i) basis.col(i) = a_.col(head_[i]);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    if (!(lu.rcond() > 1e-14) || !(diag.minCoeff() > 1e-11 * diag.maxCoeff())) return false;
    const Eigen::MatrixXd inv = lu.inverse();
    const auto n = static_cast<Eigen::Index>(n_);
    tab_.resize(m, static_cast<Eigen::Index>(cols_));
    tab_.leftCols(n).noalias() = inv * a_sparse_;
    tab_.rightCols(m) = -inv;
    return tableau_consistent();
}

void DualSimplex::place_nonbasic(std::size_t j) {
    const double lo = lb_[j], hi = ub_[j], d = d_[static_cast<Eigen::Index>(j)];
    wlb_[j] = lo;
    wub_[j] = hi;
    State s;
    if (lo == hi) {
        s = State::lower;
    } else if (std::isfinite(lo) && std::isfinite(hi)) {
        s = d >= 0 ? State::lower : State::upper;
    } else if (std::isfinite(lo)) {
        s = State::lower;
        if (d < -kDualTol) {
            wub_[j] = lo + kBox;
            s = State::upper;
        }
    } else if (std::isfinite(hi)) {
        s = State::upper;
        if (d > kDualTol) {
            wlb_[j] = hi - kBox;
            s = State::lower;
        }
    } else if (std::abs(d) <= kDualTol) {
        s = State::zero;
    } else if (d > 0) {
        wlb_[j] = -kBox;
        s = State::lower;
    } else {
        wub_[j] = kBox;
        s = State::upper;
    }
    state_[j] = s;
    const auto jj = static_cast<Eigen::Index>(j);
    x_[jj] = s == State::lower ? wlb_[j] : (s == State::upper ? wub_[j] : 0.0);
}

void DualSimplex::compute_basic_values() {
    if (m_ == 0) return;
    Eigen::VectorXd xn = x_;
    for (std::size_t i = 0; i < m_; ++i) xn[head_[i]] = 0.0;
    const Eigen::VectorXd xb = -(tab_ * xn);
    for (std::size_t i = 0; i < m_; ++i) x_[head_[i]] = xb[static_cast<Eigen::Index>(i)];
}

int DualSimplex::choose_leaving_row() const {
    int best = -1;
    double best_inf = kPrimalTol;
    int best_col = static_cast<int>(cols_);
    for (std::size_t i = 0; i < m_; ++i) {
        const int j = head_[i];
        const double v = x_[j];
        const double inf = std::max(wlb_[j] - v, v - wub_[j]);
        if (inf <= kPrimalTol) continue;
        if (bland_) {
            if (j < best_col) {
                best_col = j;
                best = static_cast<int>(i);
            }
        } else if (inf > best_inf) {
            best_inf = inf;
            best = static_cast<int>(i);
        }
    }
    return best;
}

int DualSimplex::choose_entering(int row, bool increase) const {
    const auto alpha = tab_.row(row);
    // Harris two-pass ratio test.
    double theta_max = kInf;
    auto eligible = [&](std::size_t j, double a, double& dj) {
        if (state_[j] == State::basic || wlb_[j] == wub_[j] || std::abs(a) <= kPivotTol) return false;
        const double d = d_[static_cast<Eigen::Index>(j)];
        switch (state_[j]) {
        case State::lower:
            if (increase ? a >= 0 : a <= 0) return false;
            dj = d;
            break;
        case State::upper:
            if (increase ? a <= 0 : a >= 0) return false;
            dj = -d;
            break;
        default: dj = std::abs(d); break;
        }
        dj = std::max(dj, 0.0);
        return true;
    };
    for (std::size_t j = 0; j < cols_; ++j) {
        const double a = alpha[static_cast<Eigen::Index>(j)];
        double dj = 0;
        if (!eligible(j, a, dj)) continue;
        theta_max = std::min(theta_max, (dj + kDualTol) / std::abs(a));
    }
    if (theta_max == kInf) return -1;

    int best = -1;
    if (bland_) {
        double min_ratio = kInf;
        for (std::size_t j = 0; j < cols_; ++j) {
            const double a = alpha[static_cast<Eigen::Index>(j)];
            double dj = 0;
            if (eligible(j, a, dj)) min_ratio = std::min(min_ratio, dj / std::abs(a));
        }
        for (std::size_t j = 0; j < cols_; ++j) {
            const double a = alpha[static_cast<Eigen::Index>(j)];
            double dj = 0;
            if (eligible(j, a, dj) && dj / std::abs(a) <= min_ratio + 1e-12) return static_cast<int>(j);
        }
        return -1;
    }
    double best_abs = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        const double a = alpha[static_cast<Eigen::Index>(j)];
        double dj = 0;
        if (!eligible(j, a, dj)) continue;
        if (dj / std::abs(a) <= theta_max && std::abs(a) > best_abs) {
            best_abs = std::abs(a);
            best = static_cast<int>(j);
        }
    }
    return best;
}

void DualSimplex::pivot(int row, int col, bool leave_to_lower) {
    const int leaving = head_[row];
    Eigen::RowVectorXd prow = tab_.row(row);
    prow /= prow[col];
    const Eigen::VectorXd colq = tab_.col(col);
    for (Eigen::Index i = 0; i < tab_.rows(); ++i) {
        if (i == row || colq[i] == 0.0) continue;
        tab_.row(i).noalias() -= colq[i] * prow;
    }
    tab_.row(row) = prow;
    tab_.col(col).setZero();
    tab_(row, col) = 1.0;

    const double dq = d_[col];
    d_.noalias() -= dq * prow.transpose();
    d_[col] = 0.0;

    head_[row] = col;
    row_of_[col] = row;
    row_of_[leaving] = -1;
    state_[col] = State::basic;
    state_[leaving] = leave_to_lower ? State::lower : State::upper;
    x_[leaving] = leave_to_lower ? wlb_[leaving] : wub_[leaving];
    ++pivots_since_refactor_;
}

bool DualSimplex::at_artificial_bound(std::size_t j) const {
    if (state_[j] == State::lower) return wlb_[j] != lb_[j];
    if (state_[j] == State::upper) return wub_[j] != ub_[j];
    return false;
}

LpStatus DualSimplex::solve(Clock::time_point deadline) {
    auto place_all = [&] {
        for (std::size_t j = 0; j < cols_; ++j) {
            if (state_[j] == State::basic) {
                wlb_[j] = lb_[j];
                wub_[j] = ub_[j];
            } else {
                place_nonbasic(j);
            }
        }
    };
    place_all();
    bland_ = false;
    int stall = 0;
    double last_obj = -kInf;
    bool verified = false;
    const std::size_t max_iterations = 50 * (m_ + cols_) + 10000;
    std::size_t iterations = 0;

    for (;;) {
        if (pivots_since_refactor_ >= kRefactorInterval) {
            refactor();
            place_all();
        }
        compute_basic_values();
        const int row = choose_leaving_row();
        if (row < 0) {
            for (std::size_t j = 0; j < cols_; ++j) {
                if (state_[j] != State::basic && at_artificial_bound(j) && std::abs(d_[j]) > kDualTol) {
                    return LpStatus::unbounded;
                }
            }
            return LpStatus::optimal;
        }
        if (++iterations > max_iterations) return LpStatus::iteration_limit;
        ++total_iterations_;
        if ((iterations & 15) == 0 && Clock::now() > deadline) return LpStatus::time_limit;

        const int leaving = head_[row];
        const bool increase = x_[leaving] < wlb_[leaving];
        const int col = choose_entering(row, increase);
        if (col < 0) {
            // Confirm on a fresh factorization before trusting the verdict.
            if (!verified && pivots_since_refactor_ > 0) {
                verified = true;
                refactor();
                place_all();
                continue;
            }
            return LpStatus::infeasible;
        }

        double obj = 0.0;
        for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
        if (obj > last_obj + 1e-12 * (1.0 + std::abs(obj))) {
            last_obj = obj;
            stall = 0;
            bland_ = false;
        } else if (++stall > kStallIterations) {
            bland_ = true;
        }
        pivot(row, col, increase);
    }
}

double DualSimplex::objective() const {
    double obj = obj_constant_;
    for (std::size_t j = 0; j < n_; ++j) obj += cost_[j] * x_[j];
    return obj;
}

std::vector<double> DualSimplex::structural_values() const {
    std::vector<double> values(n_);
    for (std::size_t j = 0; j < n_; ++j) values[j] = x_[j];
    return values;
}

double DualSimplex::max_dual_infeasibility() const {
    double worst = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) {
        if (state_[j] == State::basic || lb_[j] == ub_[j]) continue;
        const double d = d_[j];
        switch (state_[j]) {
        case State::lower: worst = std::max(worst, -d); break;
        case State::upper: worst = std::max(worst, d); break;
        default: worst = std::max(worst, std::abs(d)); break;
        }
    }
    return worst;
}

}  // namespace uc::detail
