#pragma once

#include <random>

#include "mmlat/model.hpp"

namespace mmlat {

enum class BridgeTimeMode { Fixed, SampledUniform };

struct LossWeights {
    double lambda_con = 1.0;
    double lambda_align = 0.0;
    double lambda_sep = 0.0;
    double lambda_br = 0.0;
    double lambda_gc = 0.0;

    double tau = 0.07;            // contrastive temperature
    double bridge_time = 0.25;    // t in (0,1)
    BridgeTimeMode bridge_time_mode = BridgeTimeMode::Fixed;
    double kernel_scale = 2.0;    // Gaussian potential scale
    double align_epsilon = 1e-3;  // clamp floor for the paired inner product

    void validate() const;
};

struct LossBreakdown {
    double contrastive = 0.0;        // l_con
    double alignment = 0.0;          // l_align
    double orthogonality = 0.0;      // l_ortho
    double indep_contrastive = 0.0;  // l_con_i
    double uniformity = 0.0;         // l_uni_i
    double separation = 0.0;         // l_sep = ortho + con_i + uni_i
    double bridge = 0.0;             // l_br
    double geometric = 0.0;          // l_gc
    double geometric_aug = 0.0;      // l_gc_a
    double total = 0.0;
    double bridge_time = 0.0;  // t actually used this call

    Tensor total_node;  // graph scalar, for backward
};

// InfoNCE term: -(1/N) * sum_j log( exp(<a_j,p_j>/tau) / sum_k exp(<a_j,n_k>/tau) ).
// Denominators go through logsumexp, never a naive exp-sum.
Tensor nce_term(Graph& g, const Tensor& anchors, const Tensor& positives,
                const Tensor& negatives, double tau);

// Four-direction contrastive loss: (V2T + T2V + V2V + T2T) / 4.
Tensor contrastive_loss(Graph& g, const FeatureBundle& b, double tau);

// (1/N) * sum_j 1 / max(<z_T_j, z_V_j>, eps)^2.
Tensor alignment_loss(Graph& g, const Tensor& text, const Tensor& image, double eps);

// (1/N) * sum_j (<z_V_j, z_V_j^i>^2 + <z_T_j, z_T_j^i>^2).
Tensor orthogonality_loss(Graph& g, const Tensor& image, const Tensor& image_indep,
                          const Tensor& text, const Tensor& text_indep);

// In-modal contrastive loss on independent features; plain sum of both
// modalities (no 1/4).
Tensor indep_contrastive_loss(Graph& g, const FeatureBundle& b, double tau);

// log( (1/N) * sum_jk [G(z_V^i_j, z_V^i_k) + G(z_T^i_j, z_T^i_k)] ),
// G(u,v) = exp(-scale * ||u - v||^2).
Tensor uniformity_loss(Graph& g, const Tensor& image_indep, const Tensor& text_indep,
                       double kernel_scale);

Tensor separation_loss(Graph& g, const FeatureBundle& b, double tau, double kernel_scale);

// Row-wise (t * z_V + (1-t) * z_T) / ||.||; equals z_T at t=0 and z_V at t=1.
Tensor bridge_mean(Graph& g, const Tensor& image, const Tensor& text, double t);

// (1/N) * sum_j || z_V^a_j - mu(z_V_j, z_T_j, t) ||^2.
Tensor bridge_loss(Graph& g, const Tensor& image_aug, const Tensor& image, const Tensor& text,
                   double t);

// (1/N) * sum_jk [ (<zV_j,zT_k> - <zV_k,zT_j>)^2 + (<zV_j,zV_k> - <zT_j,zT_k>)^2 ].
Tensor geometric_consistency_loss(Graph& g, const Tensor& image, const Tensor& text);

// Gram matching between originals and augmentations plus the paired
// cross-modal term.
Tensor augmented_geometric_consistency_loss(Graph& g, const FeatureBundle& b);

// Weighted total: lambda_con*Con + lambda_align*Align + lambda_sep*Sep
// + lambda_br*Br + lambda_gc*(GC + GC_a). When bridge_time_mode is
// SampledUniform, t is drawn once per call from `bridge_rng` (required then).
LossBreakdown total_loss(Graph& g, const FeatureBundle& b, const LossWeights& weights,
                         std::mt19937_64* bridge_rng = nullptr);

}  // namespace mmlat
