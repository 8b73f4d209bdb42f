#include "mmlat/losses.hpp"

#include <string>

#include "mmlat/rng.hpp"

namespace mmlat {

namespace {

void require_batch(const Tensor& t, const char* op) {
    if (t.rank() != 2 || t.rows() < 1) {
        throw ConfigError(std::string(op) + ": expected a nonempty N x d matrix, got " +
                          t.shape_str());
    }
}

}  // namespace

void LossWeights::validate() const {
    if (!(tau > 0.0)) throw ConfigError("weights: tau must be > 0");
    if (!(bridge_time > 0.0 && bridge_time < 1.0)) {
        throw ConfigError("weights: bridge_time must lie in (0,1)");
    }
    if (!(kernel_scale > 0.0)) throw ConfigError("weights: kernel_scale must be > 0");
    if (!(align_epsilon > 0.0)) throw ConfigError("weights: align_epsilon must be > 0");
    for (double l : {lambda_con, lambda_align, lambda_sep, lambda_br, lambda_gc}) {
        if (!(l >= 0.0)) throw ConfigError("weights: loss weights must be >= 0");
    }
}

Tensor nce_term(Graph& g, const Tensor& anchors, const Tensor& positives,
                const Tensor& negatives, double tau) {
    require_batch(anchors, "nce_term");
    require_batch(positives, "nce_term");
    require_batch(negatives, "nce_term");
    if (anchors.rows() != positives.rows()) {
        throw ConfigError("nce_term: anchors and positives disagree on N");
    }
    Tensor pos = g.scale(g.row_dot(anchors, positives), 1.0 / tau);
    Tensor scores = g.scale(g.gram(anchors, negatives), 1.0 / tau);
    Tensor lse = g.logsumexp_rows(scores);
    return g.mean(g.sub(lse, pos));
}

Tensor contrastive_loss(Graph& g, const FeatureBundle& b, double tau) {
    Tensor v2t = nce_term(g, b.image, b.text, b.text, tau);
    Tensor t2v = nce_term(g, b.text, b.image, b.image, tau);
    Tensor v2v = nce_term(g, b.image, b.image_aug, b.image, tau);
    Tensor t2t = nce_term(g, b.text, b.text_aug, b.text, tau);
    return g.scale(g.add(g.add(v2t, t2v), g.add(v2v, t2t)), 0.25);
}

Tensor alignment_loss(Graph& g, const Tensor& text, const Tensor& image, double eps) {
    require_batch(text, "alignment_loss");
    // 1/c^2 written as exp(-2 log c); the clamp keeps c >= eps > 0.
    Tensor c = g.clamp_min(g.row_dot(text, image), eps);
    return g.mean(g.exp(g.scale(g.log(c), -2.0)));
}

Tensor orthogonality_loss(Graph& g, const Tensor& image, const Tensor& image_indep,
                          const Tensor& text, const Tensor& text_indep) {
    require_batch(image, "orthogonality_loss");
    Tensor iv = g.square(g.row_dot(image, image_indep));
    Tensor it = g.square(g.row_dot(text, text_indep));
    return g.mean(g.add(iv, it));
}

Tensor indep_contrastive_loss(Graph& g, const FeatureBundle& b, double tau) {
    Tensor v = nce_term(g, b.image_indep, b.image_indep_aug, b.image_indep, tau);
    Tensor t = nce_term(g, b.text_indep, b.text_indep_aug, b.text_indep, tau);
    return g.add(v, t);
}

Tensor uniformity_loss(Graph& g, const Tensor& image_indep, const Tensor& text_indep,
                       double kernel_scale) {
    require_batch(image_indep, "uniformity_loss");
    double n = static_cast<double>(image_indep.rows());
    Tensor gv = g.exp(g.scale(g.pairwise_sqdist(image_indep, image_indep), -kernel_scale));
    Tensor gt = g.exp(g.scale(g.pairwise_sqdist(text_indep, text_indep), -kernel_scale));
    Tensor pooled = g.add(g.sum(gv), g.sum(gt));
    return g.log(g.scale(pooled, 1.0 / n));
}

Tensor separation_loss(Graph& g, const FeatureBundle& b, double tau, double kernel_scale) {
    Tensor ortho = orthogonality_loss(g, b.image, b.image_indep, b.text, b.text_indep);
    Tensor con = indep_contrastive_loss(g, b, tau);
    Tensor uni = uniformity_loss(g, b.image_indep, b.text_indep, kernel_scale);
    return g.add(g.add(ortho, con), uni);
}

Tensor bridge_mean(Graph& g, const Tensor& image, const Tensor& text, double t) {
    require_batch(image, "bridge_mean");
    if (!image.same_shape(text)) throw ConfigError("bridge_mean: shape mismatch");
    Tensor mix = g.add(g.scale(image, t), g.scale(text, 1.0 - t));
    return g.row_normalize(mix);  // throws for the degenerate antipodal midpoint
}

Tensor bridge_loss(Graph& g, const Tensor& image_aug, const Tensor& image, const Tensor& text,
                   double t) {
    require_batch(image_aug, "bridge_loss");
    Tensor mu = bridge_mean(g, image, text, t);
    Tensor diff = g.sub(image_aug, mu);
    return g.mean(g.row_dot(diff, diff));
}

Tensor geometric_consistency_loss(Graph& g, const Tensor& image, const Tensor& text) {
    require_batch(image, "geometric_consistency_loss");
    if (!image.same_shape(text)) throw ConfigError("geometric_consistency_loss: shape mismatch");
    double n = static_cast<double>(image.rows());
    Tensor cross = g.gram(image, text);
    Tensor asym = g.sum(g.square(g.sub(cross, g.transpose(cross))));
    Tensor inmodal =
        g.sum(g.square(g.sub(g.gram(image, image), g.gram(text, text))));
    return g.scale(g.add(asym, inmodal), 1.0 / n);
}

Tensor augmented_geometric_consistency_loss(Graph& g, const FeatureBundle& b) {
    require_batch(b.image, "augmented_geometric_consistency_loss");
    double n = static_cast<double>(b.image.rows());
    Tensor dv = g.sum(g.square(g.sub(g.gram(b.image, b.image), g.gram(b.image_aug, b.image_aug))));
    Tensor dt = g.sum(g.square(g.sub(g.gram(b.text, b.text), g.gram(b.text_aug, b.text_aug))));
    Tensor paired = g.sum(
        g.square(g.sub(g.row_dot(b.image, b.text), g.row_dot(b.image_aug, b.text_aug))));
    return g.scale(g.add(g.add(dv, dt), paired), 1.0 / n);
}

LossBreakdown total_loss(Graph& g, const FeatureBundle& b, const LossWeights& weights,
                         std::mt19937_64* bridge_rng) {
    weights.validate();

    double t = weights.bridge_time;
    if (weights.bridge_time_mode == BridgeTimeMode::SampledUniform) {
        if (bridge_rng == nullptr) {
            throw ConfigError("total_loss: sampled bridge time requires a seeded stream");
        }
        // open interval; endpoints would collapse the bridge onto an endpoint
        do {
            t = uniform_unit(*bridge_rng);
        } while (t <= 0.0 || t >= 1.0);
    }

    LossBreakdown out;
    out.bridge_time = t;

    Tensor con = contrastive_loss(g, b, weights.tau);
    Tensor align = alignment_loss(g, b.text, b.image, weights.align_epsilon);
    Tensor ortho = orthogonality_loss(g, b.image, b.image_indep, b.text, b.text_indep);
    Tensor icon = indep_contrastive_loss(g, b, weights.tau);
    Tensor uni = uniformity_loss(g, b.image_indep, b.text_indep, weights.kernel_scale);
    Tensor sep = g.add(g.add(ortho, icon), uni);
    Tensor br = bridge_loss(g, b.image_aug, b.image, b.text, t);
    Tensor gc = geometric_consistency_loss(g, b.image, b.text);
    Tensor gca = augmented_geometric_consistency_loss(g, b);

    Tensor total = g.scale(con, weights.lambda_con);
    total = g.add(total, g.scale(align, weights.lambda_align));
    total = g.add(total, g.scale(sep, weights.lambda_sep));
    total = g.add(total, g.scale(br, weights.lambda_br));
    total = g.add(total, g.scale(g.add(gc, gca), weights.lambda_gc));

    out.contrastive = con.item();
    out.alignment = align.item();
    out.orthogonality = ortho.item();
    out.indep_contrastive = icon.item();
    out.uniformity = uni.item();
    out.separation = sep.item();
    out.bridge = br.item();
    out.geometric = gc.item();
    out.geometric_aug = gca.item();
    out.total = total.item();
    out.total_node = total;
    return out;
}

}  // namespace mmlat
