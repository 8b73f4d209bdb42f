#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mmlat/tensor.hpp"

namespace mmlat {

struct GenConfig {
    std::size_t num_samples = 0;
    std::size_t num_classes = 0;  // C >= 2
    std::size_t dim_text = 0;     // D_T >= 4
    std::size_t dim_image = 0;    // D_V >= 4
    double shared_signal = 1.0;   // s_c
    double text_signal = 0.0;     // s_t
    double image_signal = 0.0;    // s_v
    double noise_std = 0.5;       // sigma > 0
    std::uint64_t seed = 0;

    void validate() const;
};

// Paired two-channel samples with balanced class labels and the generating
// config kept as provenance.
struct PairedDataset {
    Tensor text;                       // N x D_T
    Tensor image;                      // N x D_V
    std::vector<std::uint32_t> labels; // N, values in [0, C)
    GenConfig provenance;

    std::size_t size() const { return labels.size(); }
};

struct AugmentConfig {
    double noise_std = 0.0;
    double dropout = 0.0;  // per-coordinate zeroing probability, < 1
    std::uint64_t stream = 0;

    void validate() const;
};

// Class-conditional Gaussian construction: per class, a shared latent
// centroid and one modality-specific centroid per channel, mixed into data
// space through seeded orthonormal frames. Channel row =
//   s_c * (A mu_c) + s_channel * (B nu_c) + sigma * noise.
PairedDataset generate(const GenConfig& config);

// The exact class means the generator used, per channel (C x D). These are
// the parameters a Bayes-oracle classifier needs.
struct ClassMeans {
    Tensor text;   // C x D_T
    Tensor image;  // C x D_V
};
ClassMeans true_class_means(const GenConfig& config);

// Additive noise then independent coordinate dropout. Deterministic per
// (config.stream, call_index).
Tensor augment(const Tensor& x, const AugmentConfig& config, std::uint64_t call_index);

void save_dataset(const PairedDataset& dataset, const std::filesystem::path& path);
PairedDataset load_dataset(const std::filesystem::path& path);

}  // namespace mmlat
