#pragma once

#include <array>
#include <string>
#include <vector>

#include "uc/degradation.hpp"
#include "uc/grid.hpp"
#include "uc/milp.hpp"
#include "uc/scuc.hpp"

namespace uc {

/// Network inputs as linear expressions over model variables, with the
/// interval each one can reach in a feasible schedule.
struct FeatureExpr {
    std::array<LinExpr, kFeatureCount> expr;
    FeatureBox box{};
};

/// Inputs of storage unit s over period t (both 0-based):
///   temp   = ambient temperature, soh = initial SOH (constants)
///   c_rate = (P_disc + P_char) / e_max
///   soc    = (E_{t-1} + E_t) / (2 e_max), E_{-1} being the initial energy
///   dod    = dt (P_disc / eff_disc + P_char * eff_char) / e_max
/// Mode exclusivity zeroes one power term, so dod is the interval's |dSOC|.
FeatureExpr feature_expressions(const VariableIndex& index, const GridCase& grid, int s, int t);

/// Reachable feature box of one storage unit.
FeatureBox storage_feature_box(const StorageUnit& unit, double dt_hours);

/// Pre-activation interval of every neuron, per layer (hidden1, hidden2, output).
struct NeuronBounds {
    FeatureBox input_box{};
    std::vector<std::vector<Interval>> layers;

    std::size_t unstable_count() const;
};

/// Interval arithmetic through one affine layer.
std::vector<Interval> affine_bounds(const DenseLayer& layer, const std::vector<Interval>& inputs);

/// Scaler, then affine + ReLU per layer; sound for every input in the box.
NeuronBounds propagate_bounds(const DegradationNet& net, const FeatureBox& box);

enum class NeuronKind { unstable, pruned, pass_through };

struct ReluEncoding {
    VarId output;
    std::vector<std::vector<NeuronKind>> kinds;
    std::vector<std::vector<VarId>> pre;  // x per neuron, defined by an equality row
    std::vector<VarId> indicators;        // one binary per unstable neuron
};

/// Adds the exact big-M encoding of the net evaluated on `features`.
/// Unstable neurons (L < 0 < U) get a binary d with
///   a >= x,  a >= 0,  a <= x - L (1 - d),  a <= U d;
/// neurons with U <= 0 are the constant 0 and neurons with L >= 0 pass x
/// through. Throws ErrorCode::unsound_bounds when the feature box is not
/// inside the box the bounds were propagated over.
ReluEncoding encode_network(Model& model, const DegradationNet& net, const FeatureExpr& features,
                            const NeuronBounds& bounds, const std::string& name_prefix);

/// $ per unit of SOH lost: (capital - salvage) / (1 - soh_eol).
double degradation_coefficient(const StorageUnit& unit);

struct LbdModel {
    Model model;
    VariableIndex index;
    std::vector<std::vector<VarId>> degradation;  // [storage][period] network output
    std::vector<double> coefficients;             // per storage unit
    std::vector<std::size_t> unstable_neurons;    // per storage unit, per evaluation
};

/// Commitment model plus one embedded network evaluation per storage unit
/// and period; the objective adds coeff_s * sum_t output. Throws
/// ErrorCode::box_containment when a unit's reachable features leave the
/// region the net was trained on.
LbdModel build_lbdscuc(const GridCase& grid, const DegradationNet& net, const ScucOptions& options = {});

/// extract_schedule plus the degradation term read from the network outputs.
Schedule extract_lbd_schedule(const SolveResult& result, const LbdModel& lbd, const GridCase& grid,
                              const ScucOptions& options = {});

}  // namespace uc
