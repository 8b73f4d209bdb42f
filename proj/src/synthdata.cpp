#include "mmlat/synthdata.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mmlat/binio.hpp"
#include "mmlat/rng.hpp"

namespace mmlat {

namespace {

constexpr std::uint32_t kDatasetVersion = 1;

std::size_t latent_dim(const GenConfig& c) { return std::min({c.dim_text, c.dim_image, std::size_t{8}}); }

// Columns of a D x k frame via Gram-Schmidt on Gaussian draws.
Tensor orthonormal_frame(NormalStream& normal, std::size_t dim, std::size_t k) {
    Tensor frame = Tensor::zeros({dim, k});
    for (std::size_t col = 0; col < k; ++col) {
        std::vector<double> v(dim);
        for (auto& x : v) x = normal.next();
        for (std::size_t prev = 0; prev < col; ++prev) {
            double dot = 0.0;
            for (std::size_t i = 0; i < dim; ++i) dot += v[i] * frame.at(i, prev);
            for (std::size_t i = 0; i < dim; ++i) v[i] -= dot * frame.at(i, prev);
        }
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        // a fresh Gaussian draw is never collinear with < dim previous columns
        for (std::size_t i = 0; i < dim; ++i) frame.at(i, col) = v[i] / norm;
    }
    return frame;
}

struct GenParams {
    std::size_t k = 0;
    std::vector<std::vector<double>> shared_centroids;  // C x k
    std::vector<std::vector<double>> text_centroids;    // C x k
    std::vector<std::vector<double>> image_centroids;   // C x k
    Tensor frame_text_shared;   // D_T x k
    Tensor frame_text_specific; // D_T x k
    Tensor frame_image_shared;  // D_V x k
    Tensor frame_image_specific;
};

GenParams draw_params(const GenConfig& c, NormalStream& normal) {
    GenParams p;
    p.k = latent_dim(c);
    auto draw_vec = [&](std::size_t n) {
        std::vector<double> v(n);
        for (auto& x : v) x = normal.next();
        return v;
    };
    for (std::size_t cls = 0; cls < c.num_classes; ++cls) {
        p.shared_centroids.push_back(draw_vec(p.k));
        p.text_centroids.push_back(draw_vec(p.k));
        p.image_centroids.push_back(draw_vec(p.k));
    }
    p.frame_text_shared = orthonormal_frame(normal, c.dim_text, p.k);
    p.frame_text_specific = orthonormal_frame(normal, c.dim_text, p.k);
    p.frame_image_shared = orthonormal_frame(normal, c.dim_image, p.k);
    p.frame_image_specific = orthonormal_frame(normal, c.dim_image, p.k);
    return p;
}

// mean_c = s_shared * (A mu_c) + s_specific * (B nu_c)
std::vector<double> class_mean(const GenParams& p, const Tensor& frame_shared,
                               const Tensor& frame_specific, const std::vector<double>& shared,
                               const std::vector<double>& specific, double s_shared,
                               double s_specific, std::size_t dim) {
    std::vector<double> mean(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < p.k; ++j) {
            acc += s_shared * frame_shared.at(i, j) * shared[j] +
                   s_specific * frame_specific.at(i, j) * specific[j];
        }
        mean[i] = acc;
    }
    return mean;
}

nlohmann::json config_to_json(const GenConfig& c) {
    return nlohmann::json{{"num_samples", c.num_samples},
                          {"num_classes", c.num_classes},
                          {"dim_text", c.dim_text},
                          {"dim_image", c.dim_image},
                          {"shared_signal", c.shared_signal},
                          {"text_signal", c.text_signal},
                          {"image_signal", c.image_signal},
                          {"noise_std", c.noise_std},
                          {"seed", c.seed}};
}

GenConfig config_from_json(const nlohmann::json& j) {
    GenConfig c;
    c.num_samples = j.at("num_samples").get<std::size_t>();
    c.num_classes = j.at("num_classes").get<std::size_t>();
    c.dim_text = j.at("dim_text").get<std::size_t>();
    c.dim_image = j.at("dim_image").get<std::size_t>();
    c.shared_signal = j.at("shared_signal").get<double>();
    c.text_signal = j.at("text_signal").get<double>();
    c.image_signal = j.at("image_signal").get<double>();
    c.noise_std = j.at("noise_std").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace

void GenConfig::validate() const {
    if (num_samples < 1) throw ConfigError("generator: num_samples must be >= 1");
    if (num_classes < 2) throw ConfigError("generator: num_classes must be >= 2");
    if (dim_text < 4 || dim_image < 4) throw ConfigError("generator: dimensions must be >= 4");
    for (double s : {shared_signal, text_signal, image_signal}) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw ConfigError("generator: signal strengths must be finite and >= 0");
        }
    }
    if (!(noise_std > 0.0)) throw ConfigError("generator: noise_std must be > 0");
}

void AugmentConfig::validate() const {
    if (!(noise_std >= 0.0)) throw ConfigError("augment: noise_std must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("augment: dropout must be in [0,1)");
}

PairedDataset generate(const GenConfig& config) {
    config.validate();
    NormalStream normal(config.seed);
    GenParams params = draw_params(config, normal);

    PairedDataset ds;
    ds.provenance = config;
    ds.text = Tensor::zeros({config.num_samples, config.dim_text});
    ds.image = Tensor::zeros({config.num_samples, config.dim_image});
    ds.labels.resize(config.num_samples);

    std::vector<std::vector<double>> text_means, image_means;
    for (std::size_t cls = 0; cls < config.num_classes; ++cls) {
        text_means.push_back(class_mean(params, params.frame_text_shared,
                                        params.frame_text_specific, params.shared_centroids[cls],
                                        params.text_centroids[cls], config.shared_signal,
                                        config.text_signal, config.dim_text));
        image_means.push_back(class_mean(params, params.frame_image_shared,
                                         params.frame_image_specific, params.shared_centroids[cls],
                                         params.image_centroids[cls], config.shared_signal,
                                         config.image_signal, config.dim_image));
    }

    for (std::size_t i = 0; i < config.num_samples; ++i) {
        std::size_t cls = i % config.num_classes;
        ds.labels[i] = static_cast<std::uint32_t>(cls);
        for (std::size_t d = 0; d < config.dim_text; ++d) {
            ds.text.at(i, d) = text_means[cls][d] + config.noise_std * normal.next();
        }
        for (std::size_t d = 0; d < config.dim_image; ++d) {
            ds.image.at(i, d) = image_means[cls][d] + config.noise_std * normal.next();
        }
    }
    return ds;
}

ClassMeans true_class_means(const GenConfig& config) {
    config.validate();
    NormalStream normal(config.seed);
    GenParams params = draw_params(config, normal);

    ClassMeans means;
    means.text = Tensor::zeros({config.num_classes, config.dim_text});
    means.image = Tensor::zeros({config.num_classes, config.dim_image});
    for (std::size_t cls = 0; cls < config.num_classes; ++cls) {
        auto t = class_mean(params, params.frame_text_shared, params.frame_text_specific,
                            params.shared_centroids[cls], params.text_centroids[cls],
                            config.shared_signal, config.text_signal, config.dim_text);
        auto v = class_mean(params, params.frame_image_shared, params.frame_image_specific,
                            params.shared_centroids[cls], params.image_centroids[cls],
                            config.shared_signal, config.image_signal, config.dim_image);
        for (std::size_t d = 0; d < config.dim_text; ++d) means.text.at(cls, d) = t[d];
        for (std::size_t d = 0; d < config.dim_image; ++d) means.image.at(cls, d) = v[d];
    }
    return means;
}

Tensor augment(const Tensor& x, const AugmentConfig& config, std::uint64_t call_index) {
    config.validate();
    if (!x.all_finite()) throw NumericError("augment: input contains non-finite values");
    NormalStream normal(mix_seed(config.stream, call_index));
    Tensor out = x.detached();
    if (config.noise_std > 0.0) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += config.noise_std * normal.next();
    }
    if (config.dropout > 0.0) {
        auto& rng = normal.engine();
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (uniform_unit(rng) < config.dropout) out[i] = 0.0;
        }
    }
    return out;
}

void save_dataset(const PairedDataset& dataset, const std::filesystem::path& path) {
    BinWriter w(path.string());
    w.magic("MMDS");
    w.u32(kDatasetVersion);
    w.u64(dataset.size());
    w.u32(static_cast<std::uint32_t>(dataset.text.cols()));
    w.u32(static_cast<std::uint32_t>(dataset.image.cols()));
    w.u32(static_cast<std::uint32_t>(dataset.provenance.num_classes));
    w.f64_array(dataset.text.storage());
    w.f64_array(dataset.image.storage());
    for (std::uint32_t label : dataset.labels) w.u32(label);
    w.close();

    std::ofstream meta(path.string() + ".meta");
    if (!meta) throw FormatError("cannot write sidecar: " + path.string() + ".meta");
    meta << config_to_json(dataset.provenance).dump(2) << "\n";
}

PairedDataset load_dataset(const std::filesystem::path& path) {
    BinReader r(path.string());
    r.expect_magic("MMDS");
    std::uint32_t version = r.u32();
    if (version != kDatasetVersion) {
        throw FormatError(path.string() + ": unsupported dataset version " +
                          std::to_string(version));
    }
    std::uint64_t n = r.u64();
    std::uint32_t dim_text = r.u32();
    std::uint32_t dim_image = r.u32();
    std::uint32_t classes = r.u32();

    PairedDataset ds;
    ds.text = Tensor({n, dim_text}, r.f64_array(n * dim_text));
    ds.image = Tensor({n, dim_image}, r.f64_array(n * dim_image));
    ds.labels.resize(n);
    for (auto& label : ds.labels) {
        label = r.u32();
        if (label >= classes) {
            throw FormatError(path.string() + ": label " + std::to_string(label) +
                              " out of range near byte " + std::to_string(r.offset()));
        }
    }
    r.expect_eof();

    std::ifstream meta(path.string() + ".meta");
    if (!meta) throw FormatError("missing sidecar: " + path.string() + ".meta");
    nlohmann::json j;
    try {
        meta >> j;
        ds.provenance = config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ".meta: " + e.what());
    }
    if (ds.provenance.num_classes != classes || ds.provenance.num_samples != n ||
        ds.provenance.dim_text != dim_text || ds.provenance.dim_image != dim_image) {
        throw FormatError(path.string() + ".meta: sidecar disagrees with binary header");
    }
    return ds;
}

}  // namespace mmlat
