#include "mmlat/model.hpp"

#include <cmath>

#include "mmlat/binio.hpp"
#include "mmlat/rng.hpp"

namespace mmlat {

namespace {
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr std::uint32_t kActivationTanh = 0;
}  // namespace

void EncoderConfig::validate() const {
    if (input_dim_text < 1 || input_dim_image < 1) {
        throw ConfigError("encoder: input dimensions must be >= 1");
    }
    if (embed_dim < 1) throw ConfigError("encoder: embed_dim must be >= 1");
    for (std::size_t w : hidden) {
        if (w < 1) throw ConfigError("encoder: hidden widths must be >= 1");
    }
}

TwoTowerModel::TwoTowerModel(const EncoderConfig& config) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(config_.seed);

    auto dense = [&](std::size_t fan_in, std::size_t fan_out, const std::string& name) {
        double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        Tensor w = Tensor::zeros({fan_in, fan_out});
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = uniform_in(rng, -bound, bound);
        params_.push_back(std::move(w));
        param_names_.push_back(name + ".weight");
        params_.push_back(Tensor::zeros({fan_out}));
        param_names_.push_back(name + ".bias");
    };

    auto backbone = [&](std::size_t input_dim, const std::string& prefix) {
        Range r;
        r.first = params_.size();
        std::size_t in = input_dim;
        for (std::size_t i = 0; i < config_.hidden.size(); ++i) {
            dense(in, config_.hidden[i], prefix + ".layer" + std::to_string(i));
            in = config_.hidden[i];
        }
        r.count = params_.size() - r.first;
        return r;
    };
    auto head = [&](std::size_t input_dim, const std::string& name) {
        Range r;
        r.first = params_.size();
        dense(input_dim, config_.embed_dim, name);
        r.count = 2;
        return r;
    };

    std::size_t text_feat = config_.hidden.empty() ? config_.input_dim_text : config_.hidden.back();
    std::size_t image_feat =
        config_.hidden.empty() ? config_.input_dim_image : config_.hidden.back();

    text_.backbone = backbone(config_.input_dim_text, "text.backbone");
    image_.backbone = backbone(config_.input_dim_image, "image.backbone");
    text_.shared_head = head(text_feat, "text.shared");
    image_.shared_head = head(image_feat, "image.shared");
    text_.indep_head = head(text_feat, "text.indep");
    image_.indep_head = head(image_feat, "image.indep");
}

Tensor TwoTowerModel::forward_tower(Graph& g, std::span<const Tensor> vars, const Tensor& raw,
                                    const TowerIndex& tower, Head head) const {
    if (raw.rank() != 2) {
        throw ConfigError("encode: raw batch must be a matrix, got " + raw.shape_str());
    }
    Tensor h = raw;
    for (std::size_t i = 0; i < tower.backbone.count; i += 2) {
        const Tensor& w = vars[tower.backbone.first + i];
        const Tensor& b = vars[tower.backbone.first + i + 1];
        h = g.tanh(g.add_bias(g.matmul(h, w), b));
    }
    const Range& hr = head == Head::Shared ? tower.shared_head : tower.indep_head;
    h = g.add_bias(g.matmul(h, vars[hr.first]), vars[hr.first + 1]);
    return g.row_normalize(h);
}

Tensor TwoTowerModel::encode_in_graph(Graph& g, std::span<const Tensor> vars, const Tensor& raw,
                                      Modality modality, Head head) const {
    if (vars.size() != params_.size()) {
        throw ConfigError("encode: expected " + std::to_string(params_.size()) +
                          " parameter tensors, got " + std::to_string(vars.size()));
    }
    std::size_t want =
        modality == Modality::Text ? config_.input_dim_text : config_.input_dim_image;
    if (raw.cols() != want) {
        throw ConfigError("encode: input width " + std::to_string(raw.cols()) +
                          " does not match configured dimension " + std::to_string(want));
    }
    return forward_tower(g, vars, raw, tower(modality), head);
}

FeatureBundle TwoTowerModel::bundle_in_graph(Graph& g, std::span<const Tensor> vars,
                                             const RawBatch& batch,
                                             const RawBatch& augmented) const {
    if (!batch.text.same_shape(augmented.text) || !batch.image.same_shape(augmented.image)) {
        throw ConfigError("forward_bundle: augmented batch shape differs from batch");
    }
    FeatureBundle b;
    b.text = encode_in_graph(g, vars, batch.text, Modality::Text, Head::Shared);
    b.image = encode_in_graph(g, vars, batch.image, Modality::Image, Head::Shared);
    b.text_aug = encode_in_graph(g, vars, augmented.text, Modality::Text, Head::Shared);
    b.image_aug = encode_in_graph(g, vars, augmented.image, Modality::Image, Head::Shared);
    b.text_indep = encode_in_graph(g, vars, batch.text, Modality::Text, Head::Independent);
    b.image_indep = encode_in_graph(g, vars, batch.image, Modality::Image, Head::Independent);
    b.text_indep_aug =
        encode_in_graph(g, vars, augmented.text, Modality::Text, Head::Independent);
    b.image_indep_aug =
        encode_in_graph(g, vars, augmented.image, Modality::Image, Head::Independent);
    return b;
}

Tensor TwoTowerModel::encode(const Tensor& raw, Modality modality, Head head) const {
    Graph g;
    return encode_in_graph(g, params_, raw, modality, head).detached();
}

FeatureBundle TwoTowerModel::forward_bundle(const RawBatch& batch,
                                            const RawBatch& augmented) const {
    Graph g;
    FeatureBundle b = bundle_in_graph(g, params_, batch, augmented);
    b.text = b.text.detached();
    b.image = b.image.detached();
    b.text_aug = b.text_aug.detached();
    b.image_aug = b.image_aug.detached();
    b.text_indep = b.text_indep.detached();
    b.image_indep = b.image_indep.detached();
    b.text_indep_aug = b.text_indep_aug.detached();
    b.image_indep_aug = b.image_indep_aug.detached();
    return b;
}

Tensor TwoTowerModel::backbone_output(const Tensor& raw, Modality modality) const {
    Graph g;
    const TowerIndex& t = tower(modality);
    Tensor h = raw.detached();
    for (std::size_t i = 0; i < t.backbone.count; i += 2) {
        h = g.tanh(g.add_bias(g.matmul(h, params_[t.backbone.first + i]),
                              params_[t.backbone.first + i + 1]));
    }
    return h.detached();
}

void TwoTowerModel::save(const std::filesystem::path& path) const {
    BinWriter w(path.string());
    w.magic("MMTW");
    w.u32(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(config_.input_dim_text));
    w.u32(static_cast<std::uint32_t>(config_.input_dim_image));
    w.u32(static_cast<std::uint32_t>(config_.hidden.size()));
    for (std::size_t h : config_.hidden) w.u32(static_cast<std::uint32_t>(h));
    w.u32(static_cast<std::uint32_t>(config_.embed_dim));
    w.u32(static_cast<std::uint32_t>(config_.embed_dim));  // independent dim == embed_dim
    w.u32(kActivationTanh);
    w.u64(config_.seed);
    for (const Tensor& p : params_) w.f64_array(p.storage());
    w.close();
}

TwoTowerModel TwoTowerModel::load(const std::filesystem::path& path) {
    BinReader r(path.string());
    r.expect_magic("MMTW");
    std::uint32_t version = r.u32();
    if (version != kCheckpointVersion) {
        throw FormatError(path.string() + ": unsupported checkpoint version " +
                          std::to_string(version));
    }
    EncoderConfig cfg;
    cfg.input_dim_text = r.u32();
    cfg.input_dim_image = r.u32();
    std::uint32_t n_hidden = r.u32();
    if (n_hidden > 64) {
        throw FormatError(path.string() + ": implausible hidden layer count " +
                          std::to_string(n_hidden));
    }
    cfg.hidden.resize(n_hidden);
    for (auto& h : cfg.hidden) h = r.u32();
    cfg.embed_dim = r.u32();
    std::uint32_t indep_dim = r.u32();
    if (indep_dim != cfg.embed_dim) {
        throw FormatError(path.string() + ": independent dim " + std::to_string(indep_dim) +
                          " != embed dim " + std::to_string(cfg.embed_dim));
    }
    std::uint32_t activation = r.u32();
    if (activation != kActivationTanh) {
        throw FormatError(path.string() + ": unknown activation kind " +
                          std::to_string(activation));
    }
    cfg.seed = r.u64();

    TwoTowerModel model(cfg);
    for (Tensor& p : model.params_) {
        std::vector<double> data = r.f64_array(p.size());
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (!std::isfinite(data[i])) {
                throw FormatError(path.string() + ": non-finite parameter value");
            }
            p[i] = data[i];
        }
    }
    r.expect_eof();
    return model;
}

}  // namespace mmlat
