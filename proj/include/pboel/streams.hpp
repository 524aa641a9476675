#pragma once

#include "pboel/sample.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pboel {

enum class StreamKind {
    sea,
    sea_abrupt,
    hyperplane,
    rbf,
    rbf_gradual,
    waveform,
    waveform_noisy,
    label_flip,
    csv,
};

StreamKind stream_kind_from_string(const std::string& name);
std::string to_string(StreamKind kind);

// Full description of a stream; (kind, parameters, seed) determines every
// sample. Kind-specific fields are ignored by kinds that do not use them.
struct StreamSpec {
    StreamKind kind = StreamKind::sea;
    std::size_t length = 20000;
    std::uint64_t seed = 1;

    double noise_rate = 0.0;       // class-noise probability (sea kinds, label_flip)
    double sea_threshold = 8.0;    // f1 + f2 <= threshold -> class 1
    double drift_speed = 0.001;    // hyperplane rotation / rbf centroid speed
    std::size_t centroids = 20;    // rbf kinds
    std::size_t flip_period = 2000;  // label_flip
    double feature_noise = 0.3;    // label_flip additive feature noise sigma

    std::string csv_path;          // csv kind
    std::string label_column = "label";
    std::optional<std::map<std::string, int>> class_map;

    std::size_t num_classes() const;
    std::size_t num_features() const;
    void validate() const;  // throws std::invalid_argument naming the field
};

// Deterministic single-consumer generator.
class StreamGenerator {
public:
    explicit StreamGenerator(StreamSpec spec);

    // nullopt once `length` samples have been produced.
    std::optional<StreamSample> next();

    const StreamSpec& spec() const { return spec_; }

private:
    struct Impl;
    StreamSpec spec_;
    std::size_t produced_ = 0;
    std::shared_ptr<Impl> impl_;
};

// Materializes the whole stream (csv kind reads the file).
std::vector<StreamSample> generate(const StreamSpec& spec);

// CSV ingestion: header row, numeric feature columns, one label column.
// Labels map through class_map when given, else first-appearance order.
std::vector<StreamSample> ingest_csv(const std::string& path,
                                     const std::string& label_column,
                                     const std::optional<std::map<std::string, int>>& class_map);

// Writes samples in the same CSV dialect ingest_csv reads (labels as integers).
void write_csv(const std::string& path, const std::vector<StreamSample>& samples,
               const std::string& label_column = "label");

}  // namespace pboel
