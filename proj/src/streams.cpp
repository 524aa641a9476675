#include "pboel/streams.hpp"

#include "pboel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace pboel {

namespace {

// Box-Muller with the usual pair cache; avoids std::normal_distribution so the
// draw sequence is pinned by this file alone.
struct NormalSource {
    bool has_cached = false;
    double cached = 0.0;

    double operator()(std::mt19937_64& rng) {
        if (has_cached) {
            has_cached = false;
            return cached;
        }
        double u1 = uniform01(rng);
        while (u1 <= 0.0) u1 = uniform01(rng);
        const double u2 = uniform01(rng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.14159265358979323846 * u2;
        cached = r * std::sin(a);
        has_cached = true;
        return r * std::cos(a);
    }
};

int flip_binary_label(int label) { return label == 1 ? 2 : 1; }

}  // namespace

StreamKind stream_kind_from_string(const std::string& name) {
    if (name == "sea") return StreamKind::sea;
    if (name == "sea_abrupt") return StreamKind::sea_abrupt;
    if (name == "hyperplane") return StreamKind::hyperplane;
    if (name == "rbf") return StreamKind::rbf;
    if (name == "rbf_gradual") return StreamKind::rbf_gradual;
    if (name == "waveform") return StreamKind::waveform;
    if (name == "waveform_noisy") return StreamKind::waveform_noisy;
    if (name == "label_flip") return StreamKind::label_flip;
    if (name == "csv") return StreamKind::csv;
    throw std::invalid_argument("unknown stream kind: " + name);
}

std::string to_string(StreamKind kind) {
    switch (kind) {
        case StreamKind::sea: return "sea";
        case StreamKind::sea_abrupt: return "sea_abrupt";
        case StreamKind::hyperplane: return "hyperplane";
        case StreamKind::rbf: return "rbf";
        case StreamKind::rbf_gradual: return "rbf_gradual";
        case StreamKind::waveform: return "waveform";
        case StreamKind::waveform_noisy: return "waveform_noisy";
        case StreamKind::label_flip: return "label_flip";
        case StreamKind::csv: return "csv";
    }
    return "unknown";
}

std::size_t StreamSpec::num_classes() const {
    switch (kind) {
        case StreamKind::sea:
        case StreamKind::sea_abrupt:
        case StreamKind::hyperplane:
        case StreamKind::label_flip: return 2;
        case StreamKind::waveform:
        case StreamKind::waveform_noisy: return 3;
        case StreamKind::rbf:
        case StreamKind::rbf_gradual: return 4;
        case StreamKind::csv: return 0;  // discovered on ingest
    }
    return 0;
}

std::size_t StreamSpec::num_features() const {
    switch (kind) {
        case StreamKind::sea:
        case StreamKind::sea_abrupt: return 3;
        case StreamKind::hyperplane:
        case StreamKind::rbf:
        case StreamKind::rbf_gradual:
        case StreamKind::label_flip: return 10;
        case StreamKind::waveform: return 21;
        case StreamKind::waveform_noisy: return 40;
        case StreamKind::csv: return 0;
    }
    return 0;
}

void StreamSpec::validate() const {
    if (length < 1) throw std::invalid_argument("stream.length must be >= 1");
    if (noise_rate < 0.0 || noise_rate > 1.0) {
        throw std::invalid_argument("stream.noise_rate must be in [0,1]");
    }
    if (feature_noise < 0.0) throw std::invalid_argument("stream.feature_noise must be >= 0");
    if (drift_speed < 0.0) throw std::invalid_argument("stream.drift_speed must be >= 0");
    switch (kind) {
        case StreamKind::label_flip:
            if (flip_period < 1) throw std::invalid_argument("stream.flip_period must be >= 1");
            break;
        case StreamKind::rbf:
        case StreamKind::rbf_gradual:
            if (centroids < 4) throw std::invalid_argument("stream.centroids must be >= 4");
            break;
        case StreamKind::csv:
            if (csv_path.empty()) throw std::invalid_argument("stream.csv_path is required");
            if (label_column.empty()) throw std::invalid_argument("stream.label_column is required");
            break;
        default: break;
    }
}

struct StreamGenerator::Impl {
    std::mt19937_64 rng;
    NormalSource normal;

    // hyperplane state
    std::vector<double> hyper_w;
    std::vector<double> hyper_dir;

    // rbf state
    struct Centroid {
        std::vector<double> center;
        std::vector<double> velocity;
        int label;
        double sigma;
    };
    std::vector<Centroid> rbf_centroids;
    std::vector<double> rbf_cumweight;

    // label_flip state
    std::vector<double> flip_w;

    // csv state
    std::vector<StreamSample> csv_rows;
};

StreamGenerator::StreamGenerator(StreamSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    impl_ = std::make_shared<Impl>();
    impl_->rng = make_rng(spec_.seed, static_cast<std::uint64_t>(spec_.kind));
    auto& rng = impl_->rng;

    switch (spec_.kind) {
        case StreamKind::hyperplane: {
            impl_->hyper_w.resize(10);
            impl_->hyper_dir.assign(10, 1.0);
            for (double& w : impl_->hyper_w) w = uniform01(rng);
            break;
        }
        case StreamKind::rbf:
        case StreamKind::rbf_gradual: {
            double cum = 0.0;
            for (std::size_t c = 0; c < spec_.centroids; ++c) {
                Impl::Centroid cen;
                cen.center.resize(10);
                for (double& v : cen.center) v = uniform01(rng);
                cen.label = static_cast<int>(c % 4) + 1;  // every class represented
                cen.sigma = 0.05 + 0.20 * uniform01(rng);
                const double weight = 0.2 + 0.8 * uniform01(rng);
                cen.velocity.resize(10);
                double norm = 0.0;
                for (double& v : cen.velocity) {
                    v = impl_->normal(rng);
                    norm += v * v;
                }
                norm = std::sqrt(std::max(norm, 1e-12));
                for (double& v : cen.velocity) v /= norm;
                cum += weight;
                impl_->rbf_centroids.push_back(std::move(cen));
                impl_->rbf_cumweight.push_back(cum);
            }
            break;
        }
        case StreamKind::label_flip: {
            impl_->flip_w.resize(10);
            double norm = 0.0;
            for (double& v : impl_->flip_w) {
                v = impl_->normal(rng);
                norm += v * v;
            }
            norm = std::sqrt(std::max(norm, 1e-12));
            for (double& v : impl_->flip_w) v /= norm;
            break;
        }
        case StreamKind::csv: {
            impl_->csv_rows = ingest_csv(spec_.csv_path, spec_.label_column, spec_.class_map);
            break;
        }
        default: break;
    }
}

std::optional<StreamSample> StreamGenerator::next() {
    if (produced_ >= spec_.length) return std::nullopt;
    const std::size_t t = produced_++;
    auto& rng = impl_->rng;
    StreamSample s;

    switch (spec_.kind) {
        case StreamKind::sea:
        case StreamKind::sea_abrupt: {
            s.features.resize(3);
            for (double& f : s.features) f = 10.0 * uniform01(rng);
            double theta = spec_.sea_threshold;
            if (spec_.kind == StreamKind::sea_abrupt) {
                static constexpr double kSchedule[4] = {8.0, 9.0, 7.0, 9.5};
                const std::size_t seg = std::min<std::size_t>(3, 4 * t / spec_.length);
                theta = kSchedule[seg];
            }
            s.label = (s.features[0] + s.features[1] <= theta) ? 1 : 2;
            if (spec_.noise_rate > 0.0 && uniform01(rng) < spec_.noise_rate) {
                s.label = flip_binary_label(s.label);
            }
            break;
        }
        case StreamKind::hyperplane: {
            auto& w = impl_->hyper_w;
            auto& dir = impl_->hyper_dir;
            s.features.resize(10);
            double dot = 0.0, wsum = 0.0;
            for (std::size_t i = 0; i < 10; ++i) {
                s.features[i] = uniform01(rng);
                dot += w[i] * s.features[i];
                wsum += w[i];
            }
            s.label = (dot >= 0.5 * wsum) ? 1 : 2;
            for (std::size_t i = 0; i < 10; ++i) {
                w[i] += spec_.drift_speed * dir[i];
                if (w[i] > 1.0 || w[i] < 0.0) {
                    dir[i] = -dir[i];
                    w[i] = std::clamp(w[i], 0.0, 1.0);
                }
            }
            break;
        }
        case StreamKind::rbf:
        case StreamKind::rbf_gradual: {
            const double total = impl_->rbf_cumweight.back();
            const double u = uniform01(rng) * total;
            const auto it = std::upper_bound(impl_->rbf_cumweight.begin(),
                                             impl_->rbf_cumweight.end(), u);
            const std::size_t idx = std::min<std::size_t>(
                static_cast<std::size_t>(it - impl_->rbf_cumweight.begin()),
                impl_->rbf_centroids.size() - 1);
            const auto& cen = impl_->rbf_centroids[idx];
            s.features.resize(10);
            for (std::size_t i = 0; i < 10; ++i) {
                s.features[i] = cen.center[i] + cen.sigma * impl_->normal(rng);
            }
            s.label = cen.label;
            if (spec_.kind == StreamKind::rbf_gradual) {
                for (auto& c : impl_->rbf_centroids) {
                    for (std::size_t i = 0; i < 10; ++i) {
                        c.center[i] += spec_.drift_speed * c.velocity[i];
                        if (c.center[i] > 1.0 || c.center[i] < 0.0) {
                            c.velocity[i] = -c.velocity[i];
                            c.center[i] = std::clamp(c.center[i], 0.0, 1.0);
                        }
                    }
                }
            }
            break;
        }
        case StreamKind::waveform:
        case StreamKind::waveform_noisy: {
            auto h = [](int wave, int i) {
                const int peak = wave == 0 ? 7 : (wave == 1 ? 15 : 11);
                return std::max(6.0 - std::abs(i - peak), 0.0);
            };
            static constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
            s.label = 1 + static_cast<int>(uniform01(rng) * 3.0);
            s.label = std::min(s.label, 3);
            const int a = kPairs[s.label - 1][0];
            const int b = kPairs[s.label - 1][1];
            const double u = uniform01(rng);
            const std::size_t d = spec_.num_features();
            s.features.resize(d);
            for (int i = 0; i < 21; ++i) {
                s.features[static_cast<std::size_t>(i)] =
                    u * h(a, i + 1) + (1.0 - u) * h(b, i + 1) + impl_->normal(rng);
            }
            for (std::size_t i = 21; i < d; ++i) s.features[i] = impl_->normal(rng);
            break;
        }
        case StreamKind::label_flip: {
            s.features.resize(10);
            double dot = 0.0;
            std::vector<double> clean(10);
            for (std::size_t i = 0; i < 10; ++i) {
                clean[i] = impl_->normal(rng);
                dot += impl_->flip_w[i] * clean[i];
            }
            s.label = dot >= 0.0 ? 1 : 2;
            if ((t / spec_.flip_period) % 2 == 1) s.label = flip_binary_label(s.label);
            for (std::size_t i = 0; i < 10; ++i) {
                s.features[i] = clean[i] + spec_.feature_noise * impl_->normal(rng);
            }
            if (spec_.noise_rate > 0.0 && uniform01(rng) < spec_.noise_rate) {
                s.label = flip_binary_label(s.label);
            }
            break;
        }
        case StreamKind::csv: {
            if (t >= impl_->csv_rows.size()) return std::nullopt;
            s = impl_->csv_rows[t];
            break;
        }
    }
    return s;
}

std::vector<StreamSample> generate(const StreamSpec& spec) {
    StreamGenerator gen(spec);
    std::vector<StreamSample> out;
    out.reserve(spec.length);
    while (auto s = gen.next()) out.push_back(std::move(*s));
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

std::vector<StreamSample> ingest_csv(const std::string& path,
                                     const std::string& label_column,
                                     const std::optional<std::map<std::string, int>>& class_map) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("CSV file has no header row: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) label_idx = i;
    }
    if (label_idx == header.size()) {
        throw std::runtime_error("label column '" + label_column + "' not found in " + path);
    }

    std::map<std::string, int> mapping;
    if (class_map) mapping = *class_map;
    int next_class = 1;
    for (const auto& [k, v] : mapping) {
        (void)k;
        next_class = std::max(next_class, v + 1);
    }

    std::vector<StreamSample> out;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++row;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                                     std::to_string(header.size()) + " columns, got " +
                                     std::to_string(cells.size()));
        }
        StreamSample s;
        s.features.reserve(header.size() - 1);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i == label_idx) continue;
            try {
                std::size_t pos = 0;
                const double v = std::stod(cells[i], &pos);
                if (pos != cells[i].size()) throw std::invalid_argument("trailing characters");
                s.features.push_back(v);
            } catch (const std::exception&) {
                throw std::runtime_error("row " + std::to_string(row) +
                                         ": non-numeric feature value '" + cells[i] +
                                         "' in column '" + header[i] + "'");
            }
        }
        const std::string& label_str = cells[label_idx];
        auto it = mapping.find(label_str);
        if (it == mapping.end()) {
            if (class_map) {
                throw std::runtime_error("row " + std::to_string(row) + ": unknown label value '" +
                                         label_str + "'");
            }
            it = mapping.emplace(label_str, next_class++).first;
        }
        s.label = it->second;
        out.push_back(std::move(s));
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<StreamSample>& samples,
               const std::string& label_column) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open CSV file for writing: " + path);
    const std::size_t d = samples.empty() ? 0 : samples.front().features.size();
    for (std::size_t i = 0; i < d; ++i) out << "f" << (i + 1) << ",";
    out << label_column << "\n";
    char buf[40];
    for (const auto& s : samples) {
        for (double f : s.features) {
            std::snprintf(buf, sizeof(buf), "%.17g", f);
            out << buf << ",";
        }
        out << s.label << "\n";
    }
    if (!out) throw std::runtime_error("write failure on CSV file: " + path);
}

}  // namespace pboel
