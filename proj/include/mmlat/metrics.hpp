#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mmlat/model.hpp"
#include "mmlat/synthdata.hpp"

namespace mmlat {

struct DataSlice {
    Tensor text;
    Tensor image;
    std::vector<std::uint32_t> labels;

    std::size_t size() const { return labels.size(); }
};

DataSlice slice_rows(const PairedDataset& ds, const std::vector<std::size_t>& rows);

struct ProbeConfig {
    std::size_t iterations = 500;
    double step = 0.1;
    double ridge = 1e-4;
};

struct MetricsReport {
    double paired_gap = 0.0;
    double centroid_gap = 0.0;
    double r_at_1_i2t = 0.0;
    double r_at_5_i2t = 0.0;
    double r_at_10_i2t = 0.0;
    double r_at_1_t2i = 0.0;
    double r_at_5_t2i = 0.0;
    double r_at_10_t2i = 0.0;
    double zero_shot_accuracy = 0.0;
    double linear_probe_accuracy = 0.0;
    double alignment_stat = 0.0;
    double uniformity_stat = 0.0;

    std::string to_json() const;  // flat snake_case object
};

// Mean Euclidean distance between paired rows; in [0,2] for unit rows.
double paired_gap(const Tensor& text, const Tensor& image);

// Distance between the two modality means.
double centroid_gap(const Tensor& text, const Tensor& image);

// Fraction of queries whose paired gallery row (same index) ranks within the
// top K by inner-product similarity; ties broken toward the lower index.
double recall_at_k(const Tensor& query, const Tensor& gallery, std::size_t k);

// Class prototypes are normalized means of encoded prototype-set text rows;
// predictions are argmax cosine of encoded eval-set image rows.
double zero_shot_accuracy(const TwoTowerModel& model, const DataSlice& eval_set,
                          const DataSlice& prototype_set);

// Multinomial logistic regression on frozen features, full-batch gradient
// descent from zero init; returns held-out accuracy.
double linear_probe(const Tensor& train_features, const std::vector<std::uint32_t>& train_labels,
                    const Tensor& test_features, const std::vector<std::uint32_t>& test_labels,
                    const ProbeConfig& config = {});

// (mean squared paired distance, log mean pairwise Gaussian potential pooled
// over both modalities).
std::pair<double, double> alignment_uniformity(const Tensor& text, const Tensor& image,
                                               double kernel_scale = 2.0);

}  // namespace mmlat
