#include "mmlat/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

namespace mmlat {

namespace {

void require_paired(const Tensor& a, const Tensor& b, const char* op) {
    if (a.rank() != 2 || !a.same_shape(b)) {
        throw ConfigError(std::string(op) + ": expected equal-shape matrices, got " +
                          a.shape_str() + " vs " + b.shape_str());
    }
    if (a.rows() == 0) throw ConfigError(std::string(op) + ": empty batch");
}

double row_distance(const Tensor& a, const Tensor& b, std::size_t r) {
    double sq = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        double d = a.at(r, c) - b.at(r, c);
        sq += d * d;
    }
    return std::sqrt(sq);
}

}  // namespace

DataSlice slice_rows(const PairedDataset& ds, const std::vector<std::size_t>& rows) {
    DataSlice s;
    s.text = Tensor::zeros({rows.size(), ds.text.cols()});
    s.image = Tensor::zeros({rows.size(), ds.image.cols()});
    s.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t r = rows[i];
        if (r >= ds.size()) throw ConfigError("slice_rows: row index out of range");
        for (std::size_t c = 0; c < ds.text.cols(); ++c) s.text.at(i, c) = ds.text.at(r, c);
        for (std::size_t c = 0; c < ds.image.cols(); ++c) s.image.at(i, c) = ds.image.at(r, c);
        s.labels.push_back(ds.labels[r]);
    }
    return s;
}

double paired_gap(const Tensor& text, const Tensor& image) {
    require_paired(text, image, "paired_gap");
    double acc = 0.0;
    for (std::size_t r = 0; r < text.rows(); ++r) acc += row_distance(text, image, r);
    return acc / static_cast<double>(text.rows());
}

double centroid_gap(const Tensor& text, const Tensor& image) {
    require_paired(text, image, "centroid_gap");
    double sq = 0.0;
    for (std::size_t c = 0; c < text.cols(); ++c) {
        double mt = 0.0, mv = 0.0;
        for (std::size_t r = 0; r < text.rows(); ++r) {
            mt += text.at(r, c);
            mv += image.at(r, c);
        }
        double d = (mt - mv) / static_cast<double>(text.rows());
        sq += d * d;
    }
    return std::sqrt(sq);
}

double recall_at_k(const Tensor& query, const Tensor& gallery, std::size_t k) {
    require_paired(query, gallery, "recall_at_k");
    std::size_t n = query.rows();
    if (k < 1 || k > n) {
        throw ConfigError("recall_at_k: K=" + std::to_string(k) + " outside [1," +
                          std::to_string(n) + "]");
    }
    std::size_t hits = 0;
    std::vector<double> sims(n);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t g = 0; g < n; ++g) {
            double s = 0.0;
            for (std::size_t c = 0; c < query.cols(); ++c) s += query.at(j, c) * gallery.at(g, c);
            sims[g] = s;
        }
        // rank of the paired row: strictly better rows, then equal rows at
        // lower index
        std::size_t rank = 0;
        for (std::size_t g = 0; g < n; ++g) {
            if (sims[g] > sims[j] || (sims[g] == sims[j] && g < j)) ++rank;
        }
        if (rank < k) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n);
}

double zero_shot_accuracy(const TwoTowerModel& model, const DataSlice& eval_set,
                          const DataSlice& prototype_set) {
    if (eval_set.size() == 0 || prototype_set.size() == 0) {
        throw ConfigError("zero_shot: empty split");
    }
    std::uint32_t num_classes = 0;
    for (auto l : eval_set.labels) num_classes = std::max(num_classes, l + 1);
    for (auto l : prototype_set.labels) num_classes = std::max(num_classes, l + 1);

    Tensor proto_text = model.encode(prototype_set.text, Modality::Text, Head::Shared);
    std::size_t d = proto_text.cols();
    Tensor prototypes = Tensor::zeros({num_classes, d});
    std::vector<std::size_t> counts(num_classes, 0);
    for (std::size_t r = 0; r < prototype_set.size(); ++r) {
        std::uint32_t cls = prototype_set.labels[r];
        ++counts[cls];
        for (std::size_t c = 0; c < d; ++c) prototypes.at(cls, c) += proto_text.at(r, c);
    }
    for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
        if (counts[cls] == 0) {
            throw ConfigError("zero_shot: class " + std::to_string(cls) +
                              " has no prototype samples");
        }
        double norm = 0.0;
        for (std::size_t c = 0; c < d; ++c) norm += prototypes.at(cls, c) * prototypes.at(cls, c);
        norm = std::sqrt(norm);
        if (norm < 1e-12) throw NumericError("zero_shot: degenerate prototype for class " +
                                             std::to_string(cls));
        for (std::size_t c = 0; c < d; ++c) prototypes.at(cls, c) /= norm;
    }

    Tensor eval_image = model.encode(eval_set.image, Modality::Image, Head::Shared);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < eval_set.size(); ++r) {
        std::uint32_t best = 0;
        double best_sim = -2.0;
        for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += eval_image.at(r, c) * prototypes.at(cls, c);
            if (s > best_sim) {
                best_sim = s;
                best = cls;
            }
        }
        if (best == eval_set.labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(eval_set.size());
}

double linear_probe(const Tensor& train_features, const std::vector<std::uint32_t>& train_labels,
                    const Tensor& test_features, const std::vector<std::uint32_t>& test_labels,
                    const ProbeConfig& config) {
    if (train_features.rank() != 2 || train_features.rows() != train_labels.size()) {
        throw ConfigError("linear_probe: features and labels disagree");
    }
    if (test_features.cols() != train_features.cols() ||
        test_features.rows() != test_labels.size()) {
        throw ConfigError("linear_probe: test features and labels disagree");
    }
    std::set<std::uint32_t> distinct(train_labels.begin(), train_labels.end());
    if (distinct.size() < 2) throw ConfigError("linear_probe: training set has a single class");
    std::uint32_t num_classes = *distinct.rbegin() + 1;

    std::size_t n = train_features.rows();
    std::size_t d = train_features.cols();
    std::vector<double> weights(d * num_classes, 0.0);
    std::vector<double> bias(num_classes, 0.0);
    std::vector<double> logits(num_classes);
    std::vector<double> grad_w(d * num_classes);
    std::vector<double> grad_b(num_classes);

    for (std::size_t it = 0; it < config.iterations; ++it) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        std::fill(grad_b.begin(), grad_b.end(), 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            double max_logit = -1e300;
            for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
                double z = bias[cls];
                for (std::size_t c = 0; c < d; ++c)
                    z += train_features.at(r, c) * weights[c * num_classes + cls];
                logits[cls] = z;
                max_logit = std::max(max_logit, z);
            }
            double denom = 0.0;
            for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
                logits[cls] = std::exp(logits[cls] - max_logit);
                denom += logits[cls];
            }
            for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
                double err = logits[cls] / denom - (cls == train_labels[r] ? 1.0 : 0.0);
                grad_b[cls] += err;
                for (std::size_t c = 0; c < d; ++c)
                    grad_w[c * num_classes + cls] += err * train_features.at(r, c);
            }
        }
        double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            weights[i] -= config.step * (grad_w[i] * inv_n + config.ridge * weights[i]);
        }
        for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
            bias[cls] -= config.step * grad_b[cls] * inv_n;
        }
    }

    std::size_t correct = 0;
    for (std::size_t r = 0; r < test_features.rows(); ++r) {
        std::uint32_t best = 0;
        double best_z = -1e300;
        for (std::uint32_t cls = 0; cls < num_classes; ++cls) {
            double z = bias[cls];
            for (std::size_t c = 0; c < d; ++c)
                z += test_features.at(r, c) * weights[c * num_classes + cls];
            if (z > best_z) {
                best_z = z;
                best = cls;
            }
        }
        if (best == test_labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_features.rows());
}

std::pair<double, double> alignment_uniformity(const Tensor& text, const Tensor& image,
                                               double kernel_scale) {
    require_paired(text, image, "alignment_uniformity");
    std::size_t n = text.rows();

    double align = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        double d = row_distance(text, image, r);
        align += d * d;
    }
    align /= static_cast<double>(n);

    auto potential_sum = [&](const Tensor& z) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t k = 0; k < n; ++k) {
                double sq = 0.0;
                for (std::size_t c = 0; c < z.cols(); ++c) {
                    double d = z.at(j, c) - z.at(k, c);
                    sq += d * d;
                }
                acc += std::exp(-kernel_scale * sq);
            }
        }
        return acc;
    };
    double pooled = (potential_sum(text) + potential_sum(image)) /
                    (2.0 * static_cast<double>(n) * static_cast<double>(n));
    return {align, std::log(pooled)};
}

std::string MetricsReport::to_json() const {
    nlohmann::json j{{"paired_gap", paired_gap},
                     {"centroid_gap", centroid_gap},
                     {"r_at_1_i2t", r_at_1_i2t},
                     {"r_at_5_i2t", r_at_5_i2t},
                     {"r_at_10_i2t", r_at_10_i2t},
                     {"r_at_1_t2i", r_at_1_t2i},
                     {"r_at_5_t2i", r_at_5_t2i},
                     {"r_at_10_t2i", r_at_10_t2i},
                     {"zero_shot_accuracy", zero_shot_accuracy},
                     {"linear_probe_accuracy", linear_probe_accuracy},
                     {"alignment_stat", alignment_stat},
                     {"uniformity_stat", uniformity_stat}};
    return j.dump(2);
}

}  // namespace mmlat
