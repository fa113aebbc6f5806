#include "uc/relu.hpp"

#include <algorithm>
#include <cmath>

#include "uc/error.hpp"

namespace uc {

FeatureBox storage_feature_box(const StorageUnit& unit, double dt) {
    FeatureBox box{};
    box[kTemp] = {unit.ambient_temp_c, unit.ambient_temp_c};
    box[kCRate] = {0.0, unit.p_max_mw / unit.e_max_mwh};
    box[kSoc] = {unit.e_min_mwh / unit.e_max_mwh, 1.0};
    box[kDod] = {0.0, std::min(1.0, dt * unit.p_max_mw / (unit.eff_discharge * unit.e_max_mwh))};
    box[kSoh] = {unit.soh_initial, unit.soh_initial};
    return box;
}

FeatureExpr feature_expressions(const VariableIndex& ix, const GridCase& grid, int s, int t) {
    if (s < 0 || static_cast<std::size_t>(s) >= grid.storage.size() || t < 0 || t >= grid.periods()) {
        throw Error(ErrorCode::invalid_argument, "feature_expressions: storage or period out of range");
    }
    const auto& unit = grid.storage[static_cast<std::size_t>(s)];
    const auto si = static_cast<std::size_t>(s), ti = static_cast<std::size_t>(t);
    const double dt = grid.horizon.dt_hours, emax = unit.e_max_mwh;

    FeatureExpr f;
    f.expr[kTemp] = LinExpr(unit.ambient_temp_c);
    f.expr[kSoh] = LinExpr(unit.soh_initial);
    f.expr[kCRate] = LinExpr(ix.p_disc[si][ti], 1.0 / emax).add(ix.p_char[si][ti], 1.0 / emax);
    LinExpr soc(ix.energy[si][ti], 0.5 / emax);
    if (t == 0) {
        soc.add_constant(0.5 * unit.e_initial_mwh / emax);
    } else {
        soc.add(ix.energy[si][ti - 1], 0.5 / emax);
    }
    f.expr[kSoc] = soc;
    f.expr[kDod] = LinExpr(ix.p_disc[si][ti], dt / (unit.eff_discharge * emax))
                       .add(ix.p_char[si][ti], dt * unit.eff_charge / emax);
    f.box = storage_feature_box(unit, dt);
    return f;
}

std::size_t NeuronBounds::unstable_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers)
        for (const auto& iv : layer)
            if (iv.lo < 0.0 && iv.hi > 0.0) ++n;
    return n;
}

std::vector<Interval> affine_bounds(const DenseLayer& layer, const std::vector<Interval>& inputs) {
    if (static_cast<Eigen::Index>(inputs.size()) != layer.w.rows()) {
        throw Error(ErrorCode::dimension_mismatch, "affine_bounds: input width does not match the layer");
    }
    std::vector<Interval> out(static_cast<std::size_t>(layer.w.cols()));
    for (Eigen::Index i = 0; i < layer.w.cols(); ++i) {
        double lo = layer.b[i], hi = layer.b[i];
        for (Eigen::Index j = 0; j < layer.w.rows(); ++j) {
            const double w = layer.w(j, i);
            const auto& in = inputs[static_cast<std::size_t>(j)];
            if (w > 0) {
                lo += w * in.lo;
                hi += w * in.hi;
            } else {
                lo += w * in.hi;
                hi += w * in.lo;
            }
        }
        out[static_cast<std::size_t>(i)] = {lo, hi};
    }
    return out;
}

NeuronBounds propagate_bounds(const DegradationNet& net, const FeatureBox& box) {
    NeuronBounds nb;
    nb.input_box = box;
    const auto& sc = net.scaler();
    std::vector<Interval> z(kFeatureCount);
    for (int j = 0; j < kFeatureCount; ++j) {
        z[static_cast<std::size_t>(j)] = {(box[j].lo - sc.offset[j]) / sc.scale[j], (box[j].hi - sc.offset[j]) / sc.scale[j]};
    }
    for (const auto& layer : net.layers()) {
        auto pre = affine_bounds(layer, z);
        z.clear();
        for (const auto& iv : pre) z.push_back({std::max(0.0, iv.lo), std::max(0.0, iv.hi)});
        nb.layers.push_back(std::move(pre));
    }
    return nb;
}

ReluEncoding encode_network(Model& model, const DegradationNet& net, const FeatureExpr& features,
                            const NeuronBounds& bounds, const std::string& prefix) {
    for (int j = 0; j < kFeatureCount; ++j) {
        const auto& have = features.box[j];
        const auto& assumed = bounds.input_box[j];
        const double tol = 1e-9 * std::max(1.0, std::abs(assumed.hi));
        if (have.lo < assumed.lo - tol || have.hi > assumed.hi + tol) {
            throw Error(ErrorCode::unsound_bounds, std::string("feature '") + feature_name(j) +
                                                       "' box exceeds the box the neuron bounds were computed for");
        }
    }
    const auto& layers = net.layers();
    if (bounds.layers.size() != layers.size()) {
        throw Error(ErrorCode::dimension_mismatch, "neuron bounds do not match the network");
    }

    const auto& sc = net.scaler();
    std::vector<LinExpr> act(kFeatureCount);
    for (int j = 0; j < kFeatureCount; ++j) {
        LinExpr z = features.expr[static_cast<std::size_t>(j)];
        z.add_constant(-sc.offset[j]);
        z *= 1.0 / sc.scale[j];
        act[static_cast<std::size_t>(j)] = std::move(z);
    }

    ReluEncoding enc;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const auto& layer = layers[l];
        const bool last = l + 1 == layers.size();
        std::vector<LinExpr> next;
        enc.kinds.emplace_back();
        enc.pre.emplace_back();
        for (Eigen::Index i = 0; i < layer.w.cols(); ++i) {
            const std::string tag = prefix + "_l" + std::to_string(l + 1) + "n" + std::to_string(i + 1);
            const auto& iv = bounds.layers[l].at(static_cast<std::size_t>(i));
            if (static_cast<std::size_t>(layer.w.rows()) != act.size()) {
                throw Error(ErrorCode::dimension_mismatch, "layer width mismatch while encoding");
            }
            LinExpr affine(layer.b[i]);
            for (Eigen::Index j = 0; j < layer.w.rows(); ++j) {
                if (layer.w(j, i) != 0.0) affine += layer.w(j, i) * act[static_cast<std::size_t>(j)];
            }
            const VarId x = model.add_variable(VarKind::continuous, -kInf, kInf, tag + "_x");
            model.add_constraint(LinExpr(x) - affine, Sense::eq, 0.0, tag + "_def");
            enc.pre.back().push_back(x);

            if (iv.hi <= 0.0) {
                enc.kinds.back().push_back(NeuronKind::pruned);
                next.emplace_back(0.0);
            } else if (iv.lo >= 0.0) {
                enc.kinds.back().push_back(NeuronKind::pass_through);
                next.emplace_back(x);
            } else {
                enc.kinds.back().push_back(NeuronKind::unstable);
                const VarId a = model.add_variable(VarKind::continuous, 0.0, iv.hi, tag + "_a");
                const VarId d = model.add_variable(VarKind::binary, 0.0, 1.0, tag + "_d");
                enc.indicators.push_back(d);
                model.add_constraint(LinExpr(a) - LinExpr(x), Sense::ge, 0.0, tag + "_lo");
                // a <= x - L (1 - d)
                model.add_constraint(LinExpr(a) - LinExpr(x) - iv.lo * LinExpr(d), Sense::le, -iv.lo, tag + "_hx");
                model.add_constraint(LinExpr(a) - iv.hi * LinExpr(d), Sense::le, 0.0, tag + "_hd");
                next.emplace_back(a);
            }
        }
        if (last) {
            const auto& out = next.at(0);
            if (out.terms().empty()) {
                enc.output = model.add_variable(VarKind::continuous, 0.0, 0.0, prefix + "_out");
            } else {
                enc.output = out.terms().front().var;
            }
        }
        act = std::move(next);
    }
    return enc;
}

double degradation_coefficient(const StorageUnit& unit) {
    return (unit.capital_cost - unit.salvage_value) / (1.0 - unit.soh_eol);
}

LbdModel build_lbdscuc(const GridCase& grid, const DegradationNet& net, const ScucOptions& options) {
    auto base = build_tscuc(grid, options);
    LbdModel out{std::move(base.model), std::move(base.index), {}, {}, {}};
    const auto trained = net.training_box();
    const double dt = grid.horizon.dt_hours;

    LinExpr obj = out.model.objective();
    for (std::size_t s = 0; s < grid.storage.size(); ++s) {
        const auto& unit = grid.storage[s];
        const FeatureBox box = storage_feature_box(unit, dt);
        for (int j = 0; j < kFeatureCount; ++j) {
            // The fitted range comes from samples; allow a sliver beyond it.
            const double tol = 1e-3 * trained[j].width();
            if (!trained[j].contains(box[j].lo, tol) || !trained[j].contains(box[j].hi, tol)) {
                throw Error(ErrorCode::box_containment,
                            "storage unit '" + unit.id + "': feature '" + feature_name(j) + "' range [" +
                                std::to_string(box[j].lo) + ", " + std::to_string(box[j].hi) +
                                "] leaves the training range [" + std::to_string(trained[j].lo) + ", " +
                                std::to_string(trained[j].hi) + "]");
            }
        }
        const NeuronBounds bounds = propagate_bounds(net, box);
        const double coeff = degradation_coefficient(unit);
        out.coefficients.push_back(coeff);
        out.unstable_neurons.push_back(bounds.unstable_count());
        out.degradation.emplace_back();
        for (int t = 0; t < grid.periods(); ++t) {
            const auto features = feature_expressions(out.index, grid, static_cast<int>(s), t);
            const auto enc = encode_network(out.model, net, features, bounds, "nn_" + unit.id + "_" + std::to_string(t + 1));
            out.degradation.back().push_back(enc.output);
            obj.add(enc.output, coeff);
        }
    }
    out.model.set_objective(obj);
    return out;
}

Schedule extract_lbd_schedule(const SolveResult& result, const LbdModel& lbd, const GridCase& grid,
                              const ScucOptions& options) {
    Schedule s = extract_schedule(result, lbd.index, grid, options);
    double deg = 0.0;
    for (std::size_t k = 0; k < lbd.degradation.size(); ++k) {
        double sum = 0.0;
        for (VarId x : lbd.degradation[k]) sum += std::max(0.0, result.value(x));
        deg += lbd.coefficients[k] * sum;
    }
    s.cost.degradation = deg;
    s.cost.total = s.cost.fuel + deg;
    return s;
}

}  // namespace uc
