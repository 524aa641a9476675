#include "pboel/learners.hpp"

#include "pboel/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pboel {

int argmax_class(const std::vector<double>& confidence) {
    if (confidence.empty()) throw std::invalid_argument("empty confidence vector");
    std::size_t best = 0;
    for (std::size_t i = 1; i < confidence.size(); ++i) {
        if (confidence[i] > confidence[best]) best = i;
    }
    return static_cast<int>(best) + 1;
}

AdviceVector advice_of(const Learner& learner, const std::vector<double>& features,
                       AdviceMode mode) {
    auto confidence = learner.predict_confidence(features);
    if (mode == AdviceMode::confidence) return confidence;
    AdviceVector one_hot(confidence.size(), 0.0);
    one_hot[static_cast<std::size_t>(argmax_class(confidence)) - 1] = 1.0;
    return one_hot;
}

RandomFeatureLinearLearner::RandomFeatureLinearLearner(std::size_t num_features,
                                                       std::size_t num_classes,
                                                       std::uint64_t seed, Options options)
    : num_features_(num_features),
      num_classes_(num_classes),
      hidden_(options.hidden),
      ridge_(options.ridge),
      seed_(seed) {
    if (num_features_ < 1 || num_classes_ < 2) {
        throw std::invalid_argument("learner needs >= 1 feature and >= 2 classes");
    }
    if (ridge_ <= 0.0) throw std::invalid_argument("ridge penalty must be positive");
    draw_input_layer(seed_);
    const auto dim = static_cast<Eigen::Index>(num_features_ + hidden_);
    readout_ = Eigen::MatrixXd::Zero(dim, static_cast<Eigen::Index>(num_classes_));
    precision_ = Eigen::MatrixXd::Identity(dim, dim) / ridge_;
}

void RandomFeatureLinearLearner::draw_input_layer(std::uint64_t seed) {
    auto rng = make_rng(seed, 7);
    input_w_.resize(static_cast<Eigen::Index>(hidden_), static_cast<Eigen::Index>(num_features_));
    input_b_.resize(static_cast<Eigen::Index>(hidden_));
    for (Eigen::Index i = 0; i < input_w_.rows(); ++i) {
        for (Eigen::Index j = 0; j < input_w_.cols(); ++j) {
            input_w_(i, j) = 2.0 * uniform01(rng) - 1.0;
        }
        input_b_(i) = 2.0 * uniform01(rng) - 1.0;
    }
}

Eigen::VectorXd RandomFeatureLinearLearner::embed(const std::vector<double>& features) const {
    if (features.size() != num_features_) {
        throw std::invalid_argument("feature vector has wrong dimension");
    }
    const auto d = static_cast<Eigen::Index>(num_features_);
    const auto h = static_cast<Eigen::Index>(hidden_);
    Eigen::VectorXd z(d + h);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double v = features[static_cast<std::size_t>(i)];
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
        z(i) = v;
    }
    if (h > 0) {
        Eigen::VectorXd pre = input_w_ * z.head(d) + input_b_;
        for (Eigen::Index i = 0; i < h; ++i) z(d + i) = 1.0 / (1.0 + std::exp(-pre(i)));
    }
    return z;
}

std::vector<double> RandomFeatureLinearLearner::predict_confidence(
    const std::vector<double>& features) const {
    if (!fitted_) throw std::logic_error("learner not fitted; warm start required");
    const Eigen::VectorXd z = embed(features);
    Eigen::VectorXd scores = readout_.transpose() * z;
    const double peak = scores.maxCoeff();
    double sum = 0.0;
    std::vector<double> confidence(num_classes_);
    for (std::size_t m = 0; m < num_classes_; ++m) {
        confidence[m] = std::exp(scores(static_cast<Eigen::Index>(m)) - peak);
        sum += confidence[m];
    }
    for (double& c : confidence) c /= sum;
    return confidence;
}

void RandomFeatureLinearLearner::update(const std::vector<double>& features, int label) {
    if (label < 1 || static_cast<std::size_t>(label) > num_classes_) {
        throw std::out_of_range("label out of range");
    }
    const Eigen::VectorXd z = embed(features);
    const Eigen::VectorXd pz = precision_.selfadjointView<Eigen::Lower>() * z;
    const double denom = 1.0 + z.dot(pz);
    const Eigen::VectorXd gain = pz / denom;

    Eigen::RowVectorXd target = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(num_classes_));
    target(static_cast<Eigen::Index>(label - 1)) = 1.0;
    const Eigen::RowVectorXd residual = target - z.transpose() * readout_;
    readout_.noalias() += gain * residual;
    precision_.selfadjointView<Eigen::Lower>().rankUpdate(pz, -1.0 / denom);
    fitted_ = true;
}

void RandomFeatureLinearLearner::fit(const std::vector<StreamSample>& samples) {
    if (samples.empty()) throw std::invalid_argument("cannot fit on an empty sample set");
    const auto dim = static_cast<Eigen::Index>(num_features_ + hidden_);
    readout_.setZero();
    precision_ = Eigen::MatrixXd::Identity(dim, dim) / ridge_;
    fitted_ = false;
    for (const auto& s : samples) update(s.features, s.label);
}

void RandomFeatureLinearLearner::retrain(const std::vector<StreamSample>& buffer) {
    if (buffer.empty()) throw std::invalid_argument("cannot retrain on an empty buffer");
    retrain_count_ += 1;
    draw_input_layer(mix_seed(seed_, 1000 + retrain_count_));
    fit(buffer);
}

IncrementalGaussianNB::IncrementalGaussianNB(std::size_t num_features, std::size_t num_classes,
                                             double variance_floor)
    : num_features_(num_features),
      num_classes_(num_classes),
      variance_floor_(variance_floor) {
    if (num_features_ < 1 || num_classes_ < 2) {
        throw std::invalid_argument("learner needs >= 1 feature and >= 2 classes");
    }
    if (variance_floor_ <= 0.0) throw std::invalid_argument("variance floor must be positive");
    class_count_.assign(num_classes_, 0);
    mean_.assign(num_classes_, std::vector<double>(num_features_, 0.0));
    m2_.assign(num_classes_, std::vector<double>(num_features_, 0.0));
}

std::vector<double> IncrementalGaussianNB::predict_confidence(
    const std::vector<double>& features) const {
    if (features.size() != num_features_) {
        throw std::invalid_argument("feature vector has wrong dimension");
    }
    if (total_count_ == 0) {
        return std::vector<double>(num_classes_, 1.0 / static_cast<double>(num_classes_));
    }
    std::vector<double> log_post(num_classes_, -std::numeric_limits<double>::infinity());
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < num_classes_; ++c) {
        if (class_count_[c] == 0) continue;
        double lp = std::log(static_cast<double>(class_count_[c]) /
                             static_cast<double>(total_count_));
        for (std::size_t i = 0; i < num_features_; ++i) {
            const double var = std::max(
                m2_[c][i] / static_cast<double>(class_count_[c]), variance_floor_);
            const double diff = features[i] - mean_[c][i];
            lp += -0.5 * std::log(2.0 * 3.14159265358979323846 * var) - diff * diff / (2.0 * var);
        }
        log_post[c] = lp;
        peak = std::max(peak, lp);
    }
    std::vector<double> confidence(num_classes_, 0.0);
    double sum = 0.0;
    for (std::size_t c = 0; c < num_classes_; ++c) {
        if (std::isfinite(log_post[c])) {
            confidence[c] = std::exp(log_post[c] - peak);
            sum += confidence[c];
        }
    }
    for (double& v : confidence) v /= sum;
    return confidence;
}

void IncrementalGaussianNB::update(const std::vector<double>& features, int label) {
    if (label < 1 || static_cast<std::size_t>(label) > num_classes_) {
        throw std::out_of_range("label out of range");
    }
    if (features.size() != num_features_) {
        throw std::invalid_argument("feature vector has wrong dimension");
    }
    const std::size_t c = static_cast<std::size_t>(label) - 1;
    class_count_[c] += 1;
    total_count_ += 1;
    const double n = static_cast<double>(class_count_[c]);
    for (std::size_t i = 0; i < num_features_; ++i) {
        const double delta = features[i] - mean_[c][i];
        mean_[c][i] += delta / n;
        m2_[c][i] += delta * (features[i] - mean_[c][i]);
    }
}

void IncrementalGaussianNB::retrain(const std::vector<StreamSample>& buffer) {
    if (buffer.empty()) throw std::invalid_argument("cannot retrain on an empty buffer");
    total_count_ = 0;
    class_count_.assign(num_classes_, 0);
    mean_.assign(num_classes_, std::vector<double>(num_features_, 0.0));
    m2_.assign(num_classes_, std::vector<double>(num_features_, 0.0));
    for (const auto& s : buffer) update(s.features, s.label);
}

LearnerKind learner_kind_from_string(const std::string& name) {
    if (name == "rvfl" || name == "random_feature_linear") {
        return LearnerKind::random_feature_linear;
    }
    if (name == "nb" || name == "gaussian_nb") return LearnerKind::gaussian_nb;
    throw std::invalid_argument("unknown learner kind: " + name);
}

std::string to_string(LearnerKind kind) {
    return kind == LearnerKind::random_feature_linear ? "rvfl" : "nb";
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, std::size_t num_features,
                                      std::size_t num_classes, std::uint64_t seed,
                                      const RandomFeatureLinearLearner::Options& rvfl_options,
                                      double nb_variance_floor) {
    if (kind == LearnerKind::random_feature_linear) {
        return std::make_unique<RandomFeatureLinearLearner>(num_features, num_classes, seed,
                                                            rvfl_options);
    }
    return std::make_unique<IncrementalGaussianNB>(num_features, num_classes, nb_variance_floor);
}

}  // namespace pboel
