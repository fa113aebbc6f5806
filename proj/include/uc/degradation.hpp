#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace uc {

inline constexpr int kFeatureCount = 5;

// Input order of the degradation network.
enum Feature : int { kTemp = 0, kCRate = 1, kSoc = 2, kDod = 3, kSoh = 4 };

const char* feature_name(int feature);

struct FeatureVector {
    double temp_c = 25.0;
    double c_rate = 0.0;  // 1/h
    double soc = 0.5;
    double dod = 0.0;
    double soh = 1.0;

    std::array<double, kFeatureCount> as_array() const { return {temp_c, c_rate, soc, dod, soh}; }
    static FeatureVector from_array(const std::array<double, kFeatureCount>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

/// Throws ErrorCode::domain when soc/dod leave [0,1], soh leaves (0,1] or c_rate < 0.
void check_features(const FeatureVector& f);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double v, double tol = 0.0) const { return v >= lo - tol && v <= hi + tol; }
};

using FeatureBox = std::array<Interval, kFeatureCount>;

/// Ground-truth substitute for aging-test data. Returns SOH lost in one
/// interval (fraction, not percent).
///
///   d = k_ref * dod^alpha * (1 + beta*c_rate) * exp(k_T*(temp - 25)/10)
///             * (1 + gamma*(soc - 0.5)^2) * (2 - soh)
struct OracleConstants {
    double k_ref = 1e-4;
    double alpha = 1.3;
    double beta = 0.5;
    double k_temp = 0.7;
    double gamma = 0.8;
};

double oracle_degradation(const FeatureVector& f, const OracleConstants& k = {});

/// Sampling box of generate_dataset.
FeatureBox dataset_sampling_box();

struct Dataset {
    std::vector<FeatureVector> features;
    std::vector<double> labels;

    std::size_t size() const { return labels.size(); }
};

Dataset generate_dataset(std::size_t n, std::uint64_t seed);

// z = (raw - offset) / scale, mapping the training range onto [0, 1].
struct InputScaler {
    std::array<double, kFeatureCount> offset{};
    std::array<double, kFeatureCount> scale{1, 1, 1, 1, 1};

    /// Raw-feature range the scaler was fitted on.
    FeatureBox fitted_box() const;
};

// Row-vector convention: out = in * w + b, w is (fan_in x fan_out).
struct DenseLayer {
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
};

inline constexpr const char* kOutputUnits = "soh_fraction_per_interval";

/// Two-hidden-layer ReLU network mapping five degradation factors to the SOH
/// fraction lost over one dispatch interval. Every layer, output included,
/// is followed by ReLU, so predictions are nonnegative.
class DegradationNet {
public:
    DegradationNet(InputScaler scaler, std::vector<DenseLayer> layers);

    double forward(const FeatureVector& f) const;
    /// Pre-activations of every layer (hidden1, hidden2, output) for a raw input.
    std::vector<Eigen::VectorXd> pre_activations(const FeatureVector& f) const;

    const InputScaler& scaler() const { return scaler_; }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::array<int, 4> layer_sizes() const;
    FeatureBox training_box() const { return scaler_.fitted_box(); }

    bool operator==(const DegradationNet& o) const;

private:
    InputScaler scaler_;
    std::vector<DenseLayer> layers_;
};

nlohmann::json net_to_json(const DegradationNet& net);
DegradationNet net_from_json(const nlohmann::json& doc);
void save_net(const DegradationNet& net, const std::filesystem::path& path);
DegradationNet load_net(const std::filesystem::path& path);

struct TrainParams {
    int hidden1 = 16;
    int hidden2 = 16;
    int epochs = 1000;
    int batch_size = 64;
    double learning_rate = 3e-3;
    double holdout_fraction = 0.2;
    double rmse_target = 0.05;  // held-out RMSE relative to the mean held-out label
    std::uint64_t seed = 0;
};

struct TrainReport {
    double heldout_rmse = 0.0;
    double heldout_mean_label = 0.0;
    double train_rmse = 0.0;
    std::size_t train_samples = 0;
    std::size_t heldout_samples = 0;

    double relative_rmse() const { return heldout_mean_label > 0 ? heldout_rmse / heldout_mean_label : heldout_rmse; }
};

struct TrainedNet {
    DegradationNet net;
    TrainReport report;
};

/// Fits a net by minibatch Adam on MSE. Throws ErrorCode::convergence when
/// the held-out RMSE misses params.rmse_target; the message carries the
/// achieved value.
TrainedNet train(const Dataset& data, const TrainParams& params);

/// Same as train() without the convergence check.
TrainedNet fit(const Dataset& data, const TrainParams& params);

}  // namespace uc
