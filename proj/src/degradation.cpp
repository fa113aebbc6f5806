#include "uc/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "uc/error.hpp"

namespace uc {

using nlohmann::json;

const char* feature_name(int feature) {
    static constexpr const char* names[kFeatureCount] = {"temp", "c_rate", "soc", "dod", "soh"};
    return (feature >= 0 && feature < kFeatureCount) ? names[feature] : "?";
}

void check_features(const FeatureVector& f) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::domain, "feature out of domain: " + what); };
    if (!std::isfinite(f.temp_c) || !std::isfinite(f.c_rate) || !std::isfinite(f.soc) || !std::isfinite(f.dod) ||
        !std::isfinite(f.soh)) {
        fail("non-finite value");
    }
    if (f.soc < 0 || f.soc > 1) fail("soc=" + std::to_string(f.soc));
    if (f.dod < 0 || f.dod > 1) fail("dod=" + std::to_string(f.dod));
    if (f.soh <= 0 || f.soh > 1) fail("soh=" + std::to_string(f.soh));
    if (f.c_rate < 0) fail("c_rate=" + std::to_string(f.c_rate));
}

double oracle_degradation(const FeatureVector& f, const OracleConstants& k) {
    check_features(f);
    const double soc_dev = f.soc - 0.5;
    return k.k_ref * std::pow(f.dod, k.alpha) * (1.0 + k.beta * f.c_rate) *
           std::exp(k.k_temp * (f.temp_c - 25.0) / 10.0) * (1.0 + k.gamma * soc_dev * soc_dev) * (2.0 - f.soh);
}

FeatureBox dataset_sampling_box() {
    return {Interval{0.0, 45.0}, Interval{0.0, 2.0}, Interval{0.0, 1.0}, Interval{0.0, 1.0}, Interval{0.5, 1.0}};
}

Dataset generate_dataset(std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "generate_dataset: n must be at least 1");
    std::mt19937_64 rng(seed);
    const auto box = dataset_sampling_box();
    std::array<std::uniform_real_distribution<double>, kFeatureCount> dist;
    for (int j = 0; j < kFeatureCount; ++j) dist[j] = std::uniform_real_distribution<double>(box[j].lo, box[j].hi);

    Dataset data;
    data.features.reserve(n);
    data.labels.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::array<double, kFeatureCount> raw{};
        for (int j = 0; j < kFeatureCount; ++j) raw[j] = dist[j](rng);
        // soh is drawn from [0.5, 1) so it never hits the excluded 0 bound
        auto f = FeatureVector::from_array(raw);
        data.features.push_back(f);
        data.labels.push_back(oracle_degradation(f));
    }
    return data;
}

FeatureBox InputScaler::fitted_box() const {
    FeatureBox box{};
    for (int j = 0; j < kFeatureCount; ++j) box[j] = {offset[j], offset[j] + scale[j]};
    return box;
}

namespace {

Eigen::VectorXd relu(Eigen::VectorXd v) { return v.cwiseMax(0.0); }

void check_shapes(const InputScaler& scaler, const std::vector<DenseLayer>& layers) {
    if (layers.size() != 3) {
        throw Error(ErrorCode::validation, "degradation net needs exactly two hidden layers plus an output layer, got " +
                                               std::to_string(layers.size()) + " layers");
    }
    Eigen::Index fan_in = kFeatureCount;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& layer = layers[i];
        if (layer.w.rows() != fan_in) {
            throw Error(ErrorCode::shape_mismatch, "layer " + std::to_string(i) + ": weight matrix has " +
                                                       std::to_string(layer.w.rows()) + " rows, expected " +
                                                       std::to_string(fan_in));
        }
        if (layer.b.size() != layer.w.cols()) {
            throw Error(ErrorCode::shape_mismatch, "layer " + std::to_string(i) + ": bias length " +
                                                       std::to_string(layer.b.size()) + " does not match " +
                                                       std::to_string(layer.w.cols()) + " weight columns");
        }
        if (layer.w.cols() < 1) throw Error(ErrorCode::shape_mismatch, "layer " + std::to_string(i) + " is empty");
        if (!layer.w.allFinite() || !layer.b.allFinite()) {
            throw Error(ErrorCode::validation, "layer " + std::to_string(i) + " has non-finite parameters");
        }
        fan_in = layer.w.cols();
    }
    if (fan_in != 1) throw Error(ErrorCode::shape_mismatch, "output layer must have exactly one neuron");
    for (int j = 0; j < kFeatureCount; ++j) {
        if (!(scaler.scale[j] > 0) || !std::isfinite(scaler.scale[j]) || !std::isfinite(scaler.offset[j])) {
            throw Error(ErrorCode::validation, std::string("scaler scale for ") + feature_name(j) + " must be positive");
        }
    }
}

}  // namespace

DegradationNet::DegradationNet(InputScaler scaler, std::vector<DenseLayer> layers)
    : scaler_(scaler), layers_(std::move(layers)) {
    check_shapes(scaler_, layers_);
}

std::vector<Eigen::VectorXd> DegradationNet::pre_activations(const FeatureVector& f) const {
    const auto raw = f.as_array();
    Eigen::VectorXd a(kFeatureCount);
    for (int j = 0; j < kFeatureCount; ++j) a[j] = (raw[j] - scaler_.offset[j]) / scaler_.scale[j];
    std::vector<Eigen::VectorXd> pre;
    pre.reserve(layers_.size());
    for (const auto& layer : layers_) {
        Eigen::VectorXd x = layer.w.transpose() * a + layer.b;
        a = relu(x);
        pre.push_back(std::move(x));
    }
    return pre;
}

double DegradationNet::forward(const FeatureVector& f) const {
    return std::max(0.0, pre_activations(f).back()[0]);
}

std::array<int, 4> DegradationNet::layer_sizes() const {
    return {kFeatureCount, static_cast<int>(layers_[0].w.cols()), static_cast<int>(layers_[1].w.cols()), 1};
}

bool DegradationNet::operator==(const DegradationNet& o) const {
    if (scaler_.offset != o.scaler_.offset || scaler_.scale != o.scaler_.scale) return false;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (layers_[i].w != o.layers_[i].w || layers_[i].b != o.layers_[i].b) return false;
    }
    return true;
}

json net_to_json(const DegradationNet& net) {
    json doc;
    const auto sizes = net.layer_sizes();
    doc["layer_sizes"] = std::vector<int>(sizes.begin(), sizes.end());
    doc["scaler"] = {{"offset", net.scaler().offset}, {"scale", net.scaler().scale}};
    doc["layers"] = json::array();
    for (const auto& layer : net.layers()) {
        json w = json::array();
        for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
            std::vector<double> row(layer.w.cols());
            for (Eigen::Index c = 0; c < layer.w.cols(); ++c) row[c] = layer.w(r, c);
            w.push_back(row);
        }
        doc["layers"].push_back({{"w", w}, {"b", std::vector<double>(layer.b.data(), layer.b.data() + layer.b.size())}});
    }
    doc["output_units"] = kOutputUnits;
    return doc;
}

DegradationNet net_from_json(const json& doc) {
    try {
        const auto sizes = doc.at("layer_sizes").get<std::vector<int>>();
        const auto& layers_doc = doc.at("layers");
        if (sizes.size() != 4 || layers_doc.size() != 3) {
            throw Error(ErrorCode::validation, "degradation net must have exactly two hidden layers (layer_sizes [5,h1,h2,1])");
        }
        if (sizes.front() != kFeatureCount || sizes.back() != 1) {
            throw Error(ErrorCode::shape_mismatch, "layer_sizes must start with 5 inputs and end with 1 output");
        }
        if (doc.contains("output_units") && doc.at("output_units").get<std::string>() != kOutputUnits) {
            throw Error(ErrorCode::validation, "unsupported output_units '" + doc.at("output_units").get<std::string>() + "'");
        }
        InputScaler scaler;
        const auto offset = doc.at("scaler").at("offset").get<std::vector<double>>();
        const auto scale = doc.at("scaler").at("scale").get<std::vector<double>>();
        if (offset.size() != kFeatureCount || scale.size() != kFeatureCount) {
            throw Error(ErrorCode::shape_mismatch, "scaler offset/scale must have 5 entries");
        }
        std::copy(offset.begin(), offset.end(), scaler.offset.begin());
        std::copy(scale.begin(), scale.end(), scaler.scale.begin());

        std::vector<DenseLayer> layers;
        for (std::size_t i = 0; i < 3; ++i) {
            const auto rows = layers_doc[i].at("w").get<std::vector<std::vector<double>>>();
            const auto bias = layers_doc[i].at("b").get<std::vector<double>>();
            const auto fan_in = static_cast<std::size_t>(sizes[i]);
            const auto fan_out = static_cast<std::size_t>(sizes[i + 1]);
            if (rows.size() != fan_in) {
                throw Error(ErrorCode::shape_mismatch, "layer " + std::to_string(i) + ": w has " + std::to_string(rows.size()) +
                                                           " rows, layer_sizes says " + std::to_string(fan_in));
            }
            DenseLayer layer{Eigen::MatrixXd(fan_in, fan_out), Eigen::VectorXd(bias.size())};
            for (std::size_t r = 0; r < fan_in; ++r) {
                if (rows[r].size() != fan_out) {
                    throw Error(ErrorCode::shape_mismatch, "layer " + std::to_string(i) + ": w row " + std::to_string(r) +
                                                               " has " + std::to_string(rows[r].size()) + " entries, expected " +
                                                               std::to_string(fan_out));
                }
                for (std::size_t c = 0; c < fan_out; ++c) layer.w(r, c) = rows[r][c];
            }
            for (std::size_t c = 0; c < bias.size(); ++c) layer.b[c] = bias[c];
            layers.push_back(std::move(layer));
        }
        return DegradationNet(scaler, std::move(layers));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::parse, std::string("malformed weight file: ") + e.what());
    }
}

void save_net(const DegradationNet& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io, "cannot write weight file " + path.string());
    out << net_to_json(net).dump(2) << '\n';
}

DegradationNet load_net(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io, "cannot open weight file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, path.string() + ": " + e.what());
    }
    return net_from_json(doc);
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct AdamSlot {
    Eigen::MatrixXd m, v;

    explicit AdamSlot(Eigen::Index rows, Eigen::Index cols)
        : m(Eigen::MatrixXd::Zero(rows, cols)), v(Eigen::MatrixXd::Zero(rows, cols)) {}

    void step(Eigen::Ref<Eigen::MatrixXd> param, const Eigen::MatrixXd& grad, double lr, int t) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        m = beta1 * m + (1 - beta1) * grad;
        v = beta2 * v + (1 - beta2) * grad.cwiseProduct(grad);
        const double c1 = 1 - std::pow(beta1, t);
        const double c2 = 1 - std::pow(beta2, t);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    }
};

double rmse(const DegradationNet& net, const Dataset& data, const std::vector<std::size_t>& idx) {
    if (idx.empty()) return 0.0;
    double sq = 0.0;
    for (auto i : idx) {
        const double e = net.forward(data.features[i]) - data.labels[i];
        sq += e * e;
    }
    return std::sqrt(sq / static_cast<double>(idx.size()));
}

}  // namespace

TrainedNet fit(const Dataset& data, const TrainParams& params) {
    if (data.size() == 0) throw Error(ErrorCode::invalid_argument, "train: dataset is empty");
    if (params.hidden1 < 1 || params.hidden2 < 1) throw Error(ErrorCode::invalid_argument, "train: hidden sizes must be >= 1");
    if (params.epochs < 1 || params.batch_size < 1) throw Error(ErrorCode::invalid_argument, "train: epochs and batch size must be >= 1");
    for (double label : data.labels) {
        if (!std::isfinite(label) || label < 0) throw Error(ErrorCode::invalid_argument, "train: labels must be finite and >= 0");
    }

    std::mt19937_64 rng(params.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::size_t n_hold = 0;
    if (data.size() >= 2) {
        n_hold = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(params.holdout_fraction * data.size())));
        n_hold = std::min(n_hold, data.size() - 1);
    }
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_hold));
    std::vector<std::size_t> hold_idx(order.end() - static_cast<std::ptrdiff_t>(n_hold), order.end());

    InputScaler scaler;
    for (int j = 0; j < kFeatureCount; ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (auto i : train_idx) {
            const double v = data.features[i].as_array()[j];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        scaler.offset[j] = lo;
        scaler.scale[j] = hi > lo ? hi - lo : 1.0;
    }
    double label_scale = 0.0;
    for (auto i : train_idx) label_scale += data.labels[i];
    label_scale /= static_cast<double>(train_idx.size());
    if (!(label_scale > 0)) label_scale = 1.0;

    const auto n_train = static_cast<Eigen::Index>(train_idx.size());
    RowMatrix inputs(n_train, kFeatureCount);
    Eigen::VectorXd targets(n_train);
    for (Eigen::Index r = 0; r < n_train; ++r) {
        const auto raw = data.features[train_idx[r]].as_array();
        for (int j = 0; j < kFeatureCount; ++j) inputs(r, j) = (raw[j] - scaler.offset[j]) / scaler.scale[j];
        targets[r] = data.labels[train_idx[r]] / label_scale;
    }

    // PyTorch-style default init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
    const std::array<int, 4> sizes{kFeatureCount, params.hidden1, params.hidden2, 1};
    std::vector<Eigen::MatrixXd> w(3);
    std::vector<Eigen::MatrixXd> b(3);  // row vectors (1 x fan_out)
    for (int l = 0; l < 3; ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
        std::uniform_real_distribution<double> init(-bound, bound);
        w[l].resize(sizes[l], sizes[l + 1]);
        b[l].resize(1, sizes[l + 1]);
        for (Eigen::Index i = 0; i < w[l].size(); ++i) w[l].data()[i] = init(rng);
        for (Eigen::Index i = 0; i < b[l].size(); ++i) b[l].data()[i] = init(rng);
    }
    std::vector<AdamSlot> adam_w, adam_b;
    for (int l = 0; l < 3; ++l) {
        adam_w.emplace_back(w[l].rows(), w[l].cols());
        adam_b.emplace_back(b[l].rows(), b[l].cols());
    }

    // The output ReLU is left out of the training loss (a dead output unit
    // would stall every gradient); predictions apply it afterwards, which
    // can only move them toward the nonnegative labels.
    std::vector<Eigen::Index> perm(n_train);
    std::iota(perm.begin(), perm.end(), 0);
    int step = 0;
    constexpr double pi = 3.14159265358979323846;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        const double lr = 0.5 * params.learning_rate * (1.0 + std::cos(pi * epoch / params.epochs));
        std::shuffle(perm.begin(), perm.end(), rng);
        for (Eigen::Index start = 0; start < n_train; start += params.batch_size) {
            const Eigen::Index bs = std::min<Eigen::Index>(params.batch_size, n_train - start);
            RowMatrix x0(bs, kFeatureCount);
            Eigen::VectorXd y(bs);
            for (Eigen::Index r = 0; r < bs; ++r) {
                x0.row(r) = inputs.row(perm[start + r]);
                y[r] = targets[perm[start + r]];
            }
            const Eigen::MatrixXd z1 = (x0 * w[0]).rowwise() + b[0].row(0);
            const Eigen::MatrixXd a1 = z1.cwiseMax(0.0);
            const Eigen::MatrixXd z2 = (a1 * w[1]).rowwise() + b[1].row(0);
            const Eigen::MatrixXd a2 = z2.cwiseMax(0.0);
            const Eigen::MatrixXd out = (a2 * w[2]).rowwise() + b[2].row(0);

            const Eigen::MatrixXd d_out = 2.0 * (out.col(0) - y) / static_cast<double>(bs);
            const Eigen::MatrixXd g_w2 = a2.transpose() * d_out;
            const Eigen::MatrixXd g_b2 = d_out.colwise().sum();
            const Eigen::MatrixXd d_a2 = (d_out * w[2].transpose()).cwiseProduct((z2.array() > 0).cast<double>().matrix());
            const Eigen::MatrixXd g_w1 = a1.transpose() * d_a2;
            const Eigen::MatrixXd g_b1 = d_a2.colwise().sum();
            const Eigen::MatrixXd d_a1 = (d_a2 * w[1].transpose()).cwiseProduct((z1.array() > 0).cast<double>().matrix());
            const Eigen::MatrixXd g_w0 = Eigen::MatrixXd(x0).transpose() * d_a1;
            const Eigen::MatrixXd g_b0 = d_a1.colwise().sum();

            ++step;
            adam_w[2].step(w[2], g_w2, lr, step);
            adam_b[2].step(b[2], g_b2, lr, step);
            adam_w[1].step(w[1], g_w1, lr, step);
            adam_b[1].step(b[1], g_b1, lr, step);
            adam_w[0].step(w[0], g_w0, lr, step);
            adam_b[0].step(b[0], g_b0, lr, step);
        }
    }

    // Fold the label normalization into the output layer: relu(s*z) = s*relu(z).
    std::vector<DenseLayer> layers;
    for (int l = 0; l < 3; ++l) {
        DenseLayer layer{w[l], b[l].row(0).transpose()};
        if (l == 2) {
            layer.w *= label_scale;
            layer.b *= label_scale;
        }
        layers.push_back(std::move(layer));
    }
    DegradationNet net(scaler, std::move(layers));

    TrainReport report;
    report.train_samples = train_idx.size();
    report.heldout_samples = hold_idx.size();
    const auto& eval_idx = hold_idx.empty() ? train_idx : hold_idx;
    report.heldout_rmse = rmse(net, data, eval_idx);
    double mean = 0.0;
    for (auto i : eval_idx) mean += data.labels[i];
    report.heldout_mean_label = mean / static_cast<double>(eval_idx.size());
    report.train_rmse = rmse(net, data, train_idx);
    return {std::move(net), report};
}

TrainedNet train(const Dataset& data, const TrainParams& params) {
    auto result = fit(data, params);
    const double threshold = params.rmse_target * result.report.heldout_mean_label;
    if (result.report.heldout_rmse > threshold) {
        std::ostringstream msg;
        msg << "training missed the RMSE target: held-out RMSE " << result.report.heldout_rmse << " ("
            << result.report.relative_rmse() * 100 << "% of mean label), target " << params.rmse_target * 100 << "%";
        throw Error(ErrorCode::convergence, msg.str());
    }
    return result;
}

}  // namespace uc
