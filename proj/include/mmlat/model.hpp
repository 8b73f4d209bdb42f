#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mmlat/graph.hpp"

namespace mmlat {

enum class Modality { Text, Image };
enum class Head { Shared, Independent };

struct EncoderConfig {
    std::size_t input_dim_text = 0;
    std::size_t input_dim_image = 0;
    std::vector<std::size_t> hidden;  // backbone widths, tanh between layers
    std::size_t embed_dim = 0;        // shared head output; independent head matches
    std::uint64_t seed = 0;

    void validate() const;
};

// All per-batch unit-norm feature matrices (N x embed_dim each).
struct FeatureBundle {
    Tensor text;            // z_T
    Tensor image;           // z_V
    Tensor text_aug;        // z_T^a
    Tensor image_aug;       // z_V^a
    Tensor text_indep;      // z_T^i
    Tensor image_indep;     // z_V^i
    Tensor text_indep_aug;  // z_T^ia
    Tensor image_indep_aug; // z_V^ia
};

struct RawBatch {
    Tensor text;   // N x input_dim_text
    Tensor image;  // N x input_dim_image
};

// Two MLP backbones with a shared-space projection head and an independent
// projection head per modality. Parameters live in one flat list whose order
// is the checkpoint serialization order: text backbone (W,b per layer), image
// backbone, shared heads (text, image), independent heads (text, image).
class TwoTowerModel {
public:
    TwoTowerModel() = default;
    explicit TwoTowerModel(const EncoderConfig& config);  // deterministic init from seed

    const EncoderConfig& config() const { return config_; }

    std::vector<Tensor>& params() { return params_; }
    const std::vector<Tensor>& params() const { return params_; }
    const std::vector<std::string>& param_names() const { return param_names_; }

    // Forward through graph-registered parameter variables (training path).
    // `vars` must align with params() order.
    Tensor encode_in_graph(Graph& g, std::span<const Tensor> vars, const Tensor& raw,
                           Modality modality, Head head) const;
    FeatureBundle bundle_in_graph(Graph& g, std::span<const Tensor> vars, const RawBatch& batch,
                                  const RawBatch& augmented) const;

    // Plain evaluation on the stored parameters.
    Tensor encode(const Tensor& raw, Modality modality, Head head) const;
    FeatureBundle forward_bundle(const RawBatch& batch, const RawBatch& augmented) const;

    // Backbone activations before any head, for instrumentation.
    Tensor backbone_output(const Tensor& raw, Modality modality) const;

    void save(const std::filesystem::path& path) const;
    static TwoTowerModel load(const std::filesystem::path& path);

private:
    struct Range {
        std::size_t first = 0;   // index of first tensor in params_
        std::size_t count = 0;   // W,b pairs: count tensors total
    };
    struct TowerIndex {
        Range backbone;
        Range shared_head;
        Range indep_head;
    };

    Tensor forward_tower(Graph& g, std::span<const Tensor> vars, const Tensor& raw,
                         const TowerIndex& tower, Head head) const;
    const TowerIndex& tower(Modality m) const { return m == Modality::Text ? text_ : image_; }

    EncoderConfig config_;
    std::vector<Tensor> params_;
    std::vector<std::string> param_names_;
    TowerIndex text_;
    TowerIndex image_;
};

}  // namespace mmlat
