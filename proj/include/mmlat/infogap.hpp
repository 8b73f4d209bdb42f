#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mmlat/errors.hpp"

namespace mmlat {

// Explicit probability table over finite (X_T, X_V, Y), row-major in that
// order. All information quantities are in nats.
struct JointDistribution {
    std::size_t n_text = 0;
    std::size_t n_image = 0;
    std::size_t n_label = 0;
    std::vector<double> p;  // n_text * n_image * n_label entries

    double at(std::size_t t, std::size_t v, std::size_t y) const {
        return p[(t * n_image + v) * n_label + y];
    }
    double& at(std::size_t t, std::size_t v, std::size_t y) {
        return p[(t * n_image + v) * n_label + y];
    }

    void validate() const;

    std::string to_json() const;
    static JointDistribution from_json(const std::string& text);
};

// Total map from an input alphabet onto a latent alphabet.
struct DeterministicEncoder {
    std::size_t domain = 0;
    std::size_t range = 0;
    std::vector<std::size_t> map;  // domain entries, each < range

    void validate() const;
};

struct EntropyReport {
    double h_label = 0.0;             // H(Y)
    double h_label_given_text = 0.0;  // H(Y|X_T)
    double h_label_given_image = 0.0; // H(Y|X_V)
    double h_label_given_both = 0.0;  // H(Y|X_T,X_V)
    double mi_text = 0.0;             // I(X_T;Y)
    double mi_image = 0.0;            // I(X_V;Y)
    double mi_joint = 0.0;            // I(X_T,X_V;Y)
};

EntropyReport entropy_and_mi(const JointDistribution& p);

// |I(X_T;Y) - I(X_V;Y)|
double information_gap(const JointDistribution& p);

// Pushforward of p through a pair of deterministic encoders onto
// (Z_T, Z_V, Y).
JointDistribution induce(const JointDistribution& p, const DeterministicEncoder& enc_text,
                         const DeterministicEncoder& enc_image);

// P[Z_T = Z_V] = 1 over the support of the induced distribution.
bool is_aligned(const JointDistribution& induced);

// The realized (z_T, z_V) support pairs form the graph of a bijection.
bool has_bijection(const DeterministicEncoder& enc_text, const DeterministicEncoder& enc_image,
                   const JointDistribution& p);

struct TheoremReport {
    double info_gap = 0.0;              // Delta_p of the input distribution
    double h_label_given_inputs = 0.0;  // H(Y|X_T,X_V)
    double h_label_given_features = 0.0;// H(Y|Z_T,Z_V)
    double slack = 0.0;  // (H(Y|Z) - H(Y|X)) - Delta_p
    bool aligned = false;
    bool bijective = false;
    // Intermediate proof quantities on the induced distribution.
    double mi_feature_text = 0.0;       // I(Z_T;Y)
    double mi_feature_image = 0.0;      // I(Z_V;Y)
    double mi_feature_joint = 0.0;      // I(Z_T,Z_V;Y)
    double cmi_image_given_text = 0.0;  // I(Z_V;Y|Z_T)
    double cmi_text_given_image = 0.0;  // I(Z_T;Y|Z_V)

    std::string to_json() const;
};

// Bound claim: whenever the encoder pair is aligned or bijective,
// H(Y|Z_T,Z_V) - H(Y|X_T,X_V) >= Delta_p, i.e. slack >= 0 up to rounding.
TheoremReport verify_theorem(const JointDistribution& p, const DeterministicEncoder& enc_text,
                             const DeterministicEncoder& enc_image);

struct EnumerationSummary {
    std::size_t latent_size = 0;
    std::size_t pairs_total = 0;
    std::size_t pairs_aligned = 0;
    std::size_t pairs_bijective = 0;
    std::size_t pairs_checked = 0;  // aligned or bijective
    std::size_t violations = 0;     // slack < -1e-9 among checked pairs
    double min_slack = 0.0;         // over checked pairs

    std::string to_json() const;
};

// Iterates every deterministic encoder pair into a latent alphabet of the
// given size and verifies the bound for each aligned-or-bijective pair.
// Refuses budgets above 1e7 pairs.
EnumerationSummary enumerate_verify(const JointDistribution& p, std::size_t latent_size);

}  // namespace mmlat
