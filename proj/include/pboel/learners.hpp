#pragma once

#include "pboel/bandit.hpp"
#include "pboel/sample.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pboel {

// Uniform contract for incremental base classifiers. Labels are 1..M.
class Learner {
public:
    virtual ~Learner() = default;

    // Posterior over classes; entries >= 0 and summing to 1.
    virtual std::vector<double> predict_confidence(const std::vector<double>& features) const = 0;

    virtual void update(const std::vector<double>& features, int label) = 0;

    // Rebuild from scratch on the buffer; prior stream history is discarded.
    virtual void retrain(const std::vector<StreamSample>& buffer) = 0;

    virtual std::size_t num_classes() const = 0;
    virtual std::size_t num_features() const = 0;
};

enum class AdviceMode { voting, confidence };

// Smallest class index attaining the maximum confidence, 1-based.
int argmax_class(const std::vector<double>& confidence);

// voting: one-hot at the argmax; confidence: the posterior itself.
AdviceVector advice_of(const Learner& learner, const std::vector<double>& features,
                       AdviceMode mode);

// Random-feature linear classifier: a frozen random hidden layer
// sigmoid(W x + b) concatenated with the raw features feeds a ridge readout
// maintained by recursive least squares, so sequential updates coincide with
// the closed-form batch ridge solution on the same data.
class RandomFeatureLinearLearner final : public Learner {
public:
    struct Options {
        std::size_t hidden = 64;
        double ridge = 0.1;
    };

    RandomFeatureLinearLearner(std::size_t num_features, std::size_t num_classes,
                               std::uint64_t seed, Options options);
    RandomFeatureLinearLearner(std::size_t num_features, std::size_t num_classes,
                               std::uint64_t seed)
        : RandomFeatureLinearLearner(num_features, num_classes, seed, Options{}) {}

    std::vector<double> predict_confidence(const std::vector<double>& features) const override;
    void update(const std::vector<double>& features, int label) override;
    void retrain(const std::vector<StreamSample>& buffer) override;
    std::size_t num_classes() const override { return num_classes_; }
    std::size_t num_features() const override { return num_features_; }

    // Reset the readout and run RLS over the samples (equals exact batch ridge).
    void fit(const std::vector<StreamSample>& samples);

    bool fitted() const { return fitted_; }
    const Eigen::MatrixXd& input_weights() const { return input_w_; }
    const Eigen::VectorXd& input_biases() const { return input_b_; }
    const Eigen::MatrixXd& readout() const { return readout_; }

private:
    void draw_input_layer(std::uint64_t seed);
    Eigen::VectorXd embed(const std::vector<double>& features) const;

    std::size_t num_features_;
    std::size_t num_classes_;
    std::size_t hidden_;
    double ridge_;
    std::uint64_t seed_;
    std::size_t retrain_count_ = 0;
    bool fitted_ = false;

    Eigen::MatrixXd input_w_;   // hidden x d, frozen after construction
    Eigen::VectorXd input_b_;   // hidden
    Eigen::MatrixXd readout_;   // (d + hidden) x M
    Eigen::MatrixXd precision_; // (d + hidden) square, (Z'Z + ridge I)^{-1}
};

// Gaussian naive Bayes with Welford running moments per class and feature.
class IncrementalGaussianNB final : public Learner {
public:
    IncrementalGaussianNB(std::size_t num_features, std::size_t num_classes,
                          double variance_floor = 1e-6);

    std::vector<double> predict_confidence(const std::vector<double>& features) const override;
    void update(const std::vector<double>& features, int label) override;
    void retrain(const std::vector<StreamSample>& buffer) override;
    std::size_t num_classes() const override { return num_classes_; }
    std::size_t num_features() const override { return num_features_; }

private:
    std::size_t num_features_;
    std::size_t num_classes_;
    double variance_floor_;
    std::size_t total_count_ = 0;
    std::vector<std::size_t> class_count_;
    std::vector<std::vector<double>> mean_;  // [class][feature]
    std::vector<std::vector<double>> m2_;    // [class][feature]
};

enum class LearnerKind { random_feature_linear, gaussian_nb };

LearnerKind learner_kind_from_string(const std::string& name);
std::string to_string(LearnerKind kind);

std::unique_ptr<Learner> make_learner(LearnerKind kind, std::size_t num_features,
                                      std::size_t num_classes, std::uint64_t seed,
                                      const RandomFeatureLinearLearner::Options& rvfl_options,
                                      double nb_variance_floor = 1e-6);

}  // namespace pboel
