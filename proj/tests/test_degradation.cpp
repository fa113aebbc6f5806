#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "uc/degradation.hpp"
#include "uc/error.hpp"

using namespace uc;

namespace {

DegradationNet constant_net(double output_bias, int h1 = 2, int h2 = 2) {
    std::vector<DenseLayer> layers(3);
    layers[0] = {Eigen::MatrixXd::Zero(kFeatureCount, h1), Eigen::VectorXd::Zero(h1)};
    layers[1] = {Eigen::MatrixXd::Zero(h1, h2), Eigen::VectorXd::Zero(h2)};
    layers[2] = {Eigen::MatrixXd::Zero(h2, 1), Eigen::VectorXd::Constant(1, output_bias)};
    return DegradationNet(InputScaler{}, layers);
}

DegradationNet default_net() { return load_net(std::string(UC_TEST_DATA) + "/net_default.json"); }

}  // namespace

TEST_CASE("oracle values") {
    FeatureVector f{25.0, 0.5, 0.5, 1.0, 1.0};
    CHECK(oracle_degradation(f) == doctest::Approx(1.25e-4).epsilon(1e-12));
    f.dod = 0.0;
    CHECK(oracle_degradation(f) == 0.0);
}

TEST_CASE("oracle increases with depth of discharge") {
    std::mt19937_64 rng(3);
    const auto box = dataset_sampling_box();
    for (int k = 0; k < 200; ++k) {
        std::array<double, kFeatureCount> a{};
        for (int j = 0; j < kFeatureCount; ++j) a[j] = std::uniform_real_distribution<double>(box[j].lo, box[j].hi)(rng);
        auto f = FeatureVector::from_array(a);
        f.dod = std::min(f.dod, 0.9);
        auto g = f;
        g.dod += 0.05;
        CHECK(oracle_degradation(g) > oracle_degradation(f));
    }
}

TEST_CASE("oracle rejects out-of-domain features") {
    CHECK_THROWS_AS(oracle_degradation({25.0, 0.5, 1.5, 0.2, 1.0}), Error);
    CHECK_THROWS_AS(oracle_degradation({25.0, -0.1, 0.5, 0.2, 1.0}), Error);
    CHECK_THROWS_AS(oracle_degradation({25.0, 0.1, 0.5, 0.2, 0.0}), Error);
}

TEST_CASE("dataset is seeded") {
    const Dataset a = generate_dataset(1000, 7);
    const Dataset b = generate_dataset(1000, 7);
    CHECK(a.labels == b.labels);
    CHECK(a.features[999].as_array() == b.features[999].as_array());
    CHECK(generate_dataset(1000, 8).labels != a.labels);
}

TEST_CASE("dataset label mean matches the closed form") {
    // Factors are independent under uniform sampling, so the mean is a product of one-dimensional means.
    const auto box = dataset_sampling_box();
    const OracleConstants k;
    const double m_dod = 1.0 / (k.alpha + 1.0);
    const double m_rate = 1.0 + k.beta * 0.5 * (box[kCRate].lo + box[kCRate].hi);
    const double c = k.k_temp / 10.0;
    const double m_temp = (std::exp(c * (box[kTemp].hi - 25.0)) - std::exp(c * (box[kTemp].lo - 25.0))) /
                          (c * box[kTemp].width());
    const double m_soc = 1.0 + k.gamma / 12.0;
    const double m_soh = 2.0 - 0.5 * (box[kSoh].lo + box[kSoh].hi);
    const double expected = k.k_ref * m_dod * m_rate * m_temp * m_soc * m_soh;

    const Dataset d = generate_dataset(10000, 1);
    double mean = 0.0;
    for (double y : d.labels) mean += y;
    mean /= static_cast<double>(d.size());
    CHECK(mean >= 1e-5);
    CHECK(mean <= 5e-4);
    CHECK(mean == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("constant nets") {
    const FeatureVector f{30.0, 1.0, 0.2, 0.4, 0.9};
    CHECK(constant_net(0.5).forward(f) == 0.5);
    CHECK(constant_net(0.5).forward({}) == 0.5);
    CHECK(constant_net(-0.5).forward(f) == 0.0);
}

TEST_CASE("shape checks") {
    std::vector<DenseLayer> layers(3);
    layers[0] = {Eigen::MatrixXd::Zero(kFeatureCount, 8), Eigen::VectorXd::Zero(7)};
    layers[1] = {Eigen::MatrixXd::Zero(8, 8), Eigen::VectorXd::Zero(8)};
    layers[2] = {Eigen::MatrixXd::Zero(8, 1), Eigen::VectorXd::Zero(1)};
    try {
        DegradationNet net(InputScaler{}, layers);
        FAIL("expected a shape error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::shape_mismatch);
    }

    auto doc = net_to_json(constant_net(0.1, 8, 8));
    doc["layers"][0]["b"].erase(doc["layers"][0]["b"].size() - 1);
    try {
        net_from_json(doc);
        FAIL("expected a shape error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::shape_mismatch);
    }
}

TEST_CASE("three hidden layers are rejected") {
    auto doc = net_to_json(constant_net(0.1));
    doc["layer_sizes"] = {5, 2, 2, 2, 1};
    doc["layers"].insert(doc["layers"].begin() + 1, doc["layers"][1]);
    try {
        net_from_json(doc);
        FAIL("expected a validation error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::validation);
    }
}

TEST_CASE("weight file round trip") {
    const DegradationNet net = default_net();
    const auto path = std::filesystem::temp_directory_path() / "uc_net_roundtrip.json";
    save_net(net, path);
    const DegradationNet back = load_net(path);
    std::filesystem::remove(path);
    std::mt19937_64 rng(11);
    const auto box = net.training_box();
    for (int k = 0; k < 100; ++k) {
        std::array<double, kFeatureCount> a{};
        for (int j = 0; j < kFeatureCount; ++j) a[j] = std::uniform_real_distribution<double>(box[j].lo, box[j].hi)(rng);
        const auto f = FeatureVector::from_array(a);
        CHECK(std::abs(net.forward(f) - back.forward(f)) <= 1e-12);
    }
}

TEST_CASE("trained fixture tracks the oracle at the reference point") {
    const FeatureVector f{25.0, 0.5, 0.5, 1.0, 1.0};
    CHECK(default_net().forward(f) == doctest::Approx(1.25e-4).epsilon(0.05));
}

TEST_CASE("training is deterministic") {
    const Dataset d = generate_dataset(400, 5);
    TrainParams p;
    p.epochs = 20;
    p.seed = 9;
    const auto a = fit(d, p);
    const auto b = fit(d, p);
    CHECK(a.net == b.net);
    CHECK(net_to_json(a.net).dump() == net_to_json(b.net).dump());
}

TEST_CASE("duplicated samples are memorized") {
    Dataset d;
    for (int i = 0; i < 10; ++i) {
        d.features.push_back({20.0, 0.8, 0.4, 0.6, 0.9});
        d.labels.push_back(oracle_degradation(d.features.back()));
    }
    TrainParams p;
    p.hidden1 = p.hidden2 = 8;
    p.epochs = 2000;
    const auto t = fit(d, p);
    CHECK(t.report.train_rmse <= 0.01 * d.labels[0]);
}

TEST_CASE("an unreachable target raises a convergence error") {
    TrainParams p;
    p.epochs = 1;
    p.rmse_target = 1e-9;
    try {
        train(generate_dataset(200, 2), p);
        FAIL("expected a convergence error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::convergence);
    }
}
