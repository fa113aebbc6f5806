#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <queue>
#include <vector>

#include "simplex.hpp"
#include "uc/milp.hpp"

namespace uc {

namespace {

using detail::Clock;
using detail::DualSimplex;
using detail::LpStatus;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// A node stores the fixing of every binary: -1 free, otherwise the value.
struct Node {
    double bound = -kInf;
    int depth = 0;
    std::uint64_t seq = 0;
    std::vector<std::int8_t> fix;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.seq > b.seq;
    }
};

class BranchAndBound {
public:
    BranchAndBound(const Model& model, const SolveOptions& options)
        : model_(model), options_(options), lp_(model) {
        for (std::size_t j = 0; j < model.num_variables(); ++j) {
            if (model.variable(j).kind == VarKind::binary) binaries_.push_back(j);
        }
    }

    SolveResult run();

private:
    void apply(const std::vector<std::int8_t>& fix) {
        for (std::size_t k = 0; k < binaries_.size(); ++k) {
            const auto& v = model_.variable(binaries_[k]);
            if (fix[k] < 0) {
                lp_.set_bounds(binaries_[k], v.lb, v.ub);
            } else {
                lp_.set_bounds(binaries_[k], fix[k], fix[k]);
            }
        }
    }

    LpStatus solve_lp() {
        const LpStatus status = lp_.solve(deadline_);
        if (status == LpStatus::optimal) {
            max_dual_infeasibility_ = std::max(max_dual_infeasibility_, lp_.max_dual_infeasibility());
        }
        return status;
    }

    // Index into binaries_ of the branching candidate, -1 if integral.
    int most_fractional(const std::vector<double>& x) const {
        int best = -1;
        double best_dist = 0.0;
        for (std::size_t k = 0; k < binaries_.size(); ++k) {
            const double v = x[binaries_[k]];
            const double frac = v - std::floor(v);
            const double dist = std::min(frac, 1.0 - frac);
            if (dist > kIntegralityTol && dist > best_dist) {
                best_dist = dist;
                best = static_cast<int>(k);
            }
        }
        return best;
    }

    double prune_threshold() const {
        return incumbent_ - 1e-9 * std::max(1.0, std::abs(incumbent_));
    }

    // Fixes every binary to its rounded value and re-solves; turns an
    // integral-within-tolerance relaxation into an exact incumbent.
    void polish(std::vector<std::int8_t> fix, const std::vector<double>& x) {
        for (std::size_t k = 0; k < binaries_.size(); ++k) {
            fix[k] = static_cast<std::int8_t>(std::lround(x[binaries_[k]]));
        }
        apply(fix);
        if (solve_lp() != LpStatus::optimal) return;
        const double obj = lp_.objective();
        if (obj < incumbent_) {
            incumbent_ = obj;
            incumbent_values_ = lp_.structural_values();
            for (std::size_t k = 0; k < binaries_.size(); ++k) incumbent_values_[binaries_[k]] = fix[k];
        }
    }

    void dive(std::vector<std::int8_t> fix);

    const Model& model_;
    SolveOptions options_;
    DualSimplex lp_;
    std::vector<std::size_t> binaries_;
    Clock::time_point deadline_;
    double incumbent_ = kInf;
    std::vector<double> incumbent_values_;
    double max_dual_infeasibility_ = 0.0;
    bool timed_out_ = false;
};

void BranchAndBound::dive(std::vector<std::int8_t> fix) {
    int last = -1;
    bool flipped = false;
    for (std::size_t step = 0; step <= binaries_.size() + 1; ++step) {
        apply(fix);
        const LpStatus status = solve_lp();
        if (status == LpStatus::time_limit) {
            timed_out_ = true;
            return;
        }
        if (status != LpStatus::optimal || lp_.objective() >= prune_threshold()) {
            if (status == LpStatus::infeasible && last >= 0 && !flipped) {
                fix[last] = static_cast<std::int8_t>(1 - fix[last]);
                flipped = true;
                continue;
            }
            return;
        }
        const auto x = lp_.structural_values();
        if (most_fractional(x) < 0) {
            polish(fix, x);
            return;
        }
        // Fix the fractional binary closest to integrality.
        int pick = -1;
        double pick_dist = kInf;
        for (std::size_t k = 0; k < binaries_.size(); ++k) {
            if (fix[k] >= 0) continue;
            const double v = x[binaries_[k]];
            const double dist = std::min(v - std::floor(v), std::ceil(v) - v);
            if (dist > kIntegralityTol && dist < pick_dist) {
                pick_dist = dist;
                pick = static_cast<int>(k);
            }
        }
        if (pick < 0) return;
        fix[pick] = static_cast<std::int8_t>(std::lround(x[binaries_[pick]]));
        last = pick;
        flipped = false;
    }
}

SolveResult BranchAndBound::run() {
    const auto start = Clock::now();
    const double limit = std::max(0.0, options_.time_limit_seconds);
    deadline_ = limit > 1e9 ? Clock::time_point::max()
                            : start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(limit));
    const double gap = std::max(0.0, options_.rel_mipgap);

    SolveResult result;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    std::uint64_t seq = 0;
    {
        Node root;
        root.fix.assign(binaries_.size(), -1);
        for (std::size_t k = 0; k < binaries_.size(); ++k) {
            const auto& v = model_.variable(binaries_[k]);
            if (v.lb == v.ub) root.fix[k] = static_cast<std::int8_t>(v.lb);
        }
        root.seq = seq++;
        open.push(std::move(root));
    }

    std::size_t nodes = 0;
    bool unbounded = false;
    while (!open.empty()) {
        if (incumbent_ < kInf) {
            const double rel = (incumbent_ - open.top().bound) / std::max(1.0, std::abs(incumbent_));
            if (rel <= gap) break;
        }
        if (timed_out_ || Clock::now() > deadline_) {
            timed_out_ = true;
            break;
        }
        Node node = open.top();
        open.pop();
        if (node.bound >= prune_threshold()) continue;

        apply(node.fix);
        const LpStatus status = solve_lp();
        ++nodes;
        if (status == LpStatus::time_limit) {
            open.push(std::move(node));
            timed_out_ = true;
            break;
        }
        if (status == LpStatus::unbounded) {
            if (node.depth == 0) {
                unbounded = true;
                break;
            }
            continue;
        }
        if (status != LpStatus::optimal) continue;

        const double obj = lp_.objective();
        if (obj >= prune_threshold()) continue;
        const auto x = lp_.structural_values();
        const int k = most_fractional(x);
        if (k < 0) {
            polish(node.fix, x);
            continue;
        }

        const double v = x[binaries_[k]];
        const bool up_first = v - std::floor(v) >= 0.5;
        for (int pass = 0; pass < 2; ++pass) {
            const bool up = (pass == 0) == up_first;
            Node child;
            child.bound = obj;
            child.depth = node.depth + 1;
            child.seq = seq++;
            child.fix = node.fix;
            child.fix[k] = up ? 1 : 0;
            open.push(std::move(child));
        }
        if (nodes == 1 || nodes % 1000 == 0) dive(node.fix);
    }

    result.nodes = nodes;
    result.lp_iterations = lp_.iterations();
    result.max_dual_infeasibility = max_dual_infeasibility_;
    result.solve_seconds = seconds_since(start);
    if (unbounded) {
        result.status = SolveStatus::unbounded;
        result.objective = -kInf;
        return result;
    }
    double best_bound = incumbent_;
    while (!open.empty()) {
        // Nodes already dominated by the incumbent do not hold the bound down.
        if (open.top().bound < prune_threshold()) {
            best_bound = std::min(best_bound, open.top().bound);
            break;
        }
        open.pop();
    }
    if (incumbent_ == kInf) {
        result.status = timed_out_ ? SolveStatus::no_incumbent : SolveStatus::infeasible;
        result.best_bound = timed_out_ ? best_bound : kInf;
        return result;
    }
    result.objective = incumbent_;
    result.best_bound = std::min(best_bound, incumbent_);
    result.values = std::move(incumbent_values_);
    result.gap_achieved = std::max(0.0, (incumbent_ - result.best_bound) / std::max(1.0, std::abs(incumbent_)));
    result.status = (timed_out_ && result.gap_achieved > gap) ? SolveStatus::feasible_gap_unmet : SolveStatus::optimal;
    return result;
}

}  // namespace

SolveResult solve_lp_relaxation(const Model& model) {
    const auto start = Clock::now();
    DualSimplex lp(model);
    SolveResult result;
    const LpStatus status = lp.solve();
    result.lp_iterations = lp.iterations();
    result.solve_seconds = seconds_since(start);
    switch (status) {
    case LpStatus::optimal:
        result.status = SolveStatus::optimal;
        result.objective = result.best_bound = lp.objective();
        result.gap_achieved = 0.0;
        result.values = lp.structural_values();
        result.max_dual_infeasibility = lp.max_dual_infeasibility();
        break;
    case LpStatus::infeasible: result.status = SolveStatus::infeasible; break;
    case LpStatus::unbounded:
        result.status = SolveStatus::unbounded;
        result.objective = -kInf;
        break;
    default: result.status = SolveStatus::no_incumbent; break;
    }
    return result;
}

SolveResult solve(const Model& model, const SolveOptions& options) {
    BranchAndBound bb(model, options);
    return bb.run();
}

}  // namespace uc
