#include "mmlat/infogap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

namespace mmlat {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr double kSlackTolerance = 1e-9;
constexpr std::size_t kEnumerationBudget = 10'000'000;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

void JointDistribution::validate() const {
    if (n_text < 1 || n_image < 1 || n_label < 1) {
        throw ConfigError("joint distribution: alphabet sizes must be >= 1");
    }
    if (p.size() != n_text * n_image * n_label) {
        throw ConfigError("joint distribution: table has " + std::to_string(p.size()) +
                          " entries, expected " + std::to_string(n_text * n_image * n_label));
    }
    double mass = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw ConfigError("joint distribution: negative entry");
        mass += v;
    }
    if (std::abs(mass - 1.0) > kMassTolerance) {
        throw ConfigError("joint distribution: mass " + std::to_string(mass) + " != 1");
    }
}

std::string JointDistribution::to_json() const {
    nlohmann::json j{{"alphabet_text", n_text},
                     {"alphabet_image", n_image},
                     {"alphabet_label", n_label},
                     {"p", p}};
    return j.dump(2);
}

JointDistribution JointDistribution::from_json(const std::string& text) {
    JointDistribution d;
    try {
        nlohmann::json j = nlohmann::json::parse(text);
        d.n_text = j.at("alphabet_text").get<std::size_t>();
        d.n_image = j.at("alphabet_image").get<std::size_t>();
        d.n_label = j.at("alphabet_label").get<std::size_t>();
        d.p = j.at("p").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("joint distribution JSON: ") + e.what());
    }
    d.validate();
    return d;
}

void DeterministicEncoder::validate() const {
    if (map.size() != domain) {
        throw ConfigError("encoder: map covers " + std::to_string(map.size()) +
                          " symbols, domain has " + std::to_string(domain));
    }
    for (std::size_t z : map) {
        if (z >= range) throw ConfigError("encoder: latent symbol out of range");
    }
}

EntropyReport entropy_and_mi(const JointDistribution& p) {
    p.validate();
    EntropyReport r;

    std::vector<double> p_y(p.n_label, 0.0);
    std::vector<double> p_t(p.n_text, 0.0);
    std::vector<double> p_v(p.n_image, 0.0);
    std::vector<double> p_ty(p.n_text * p.n_label, 0.0);
    std::vector<double> p_vy(p.n_image * p.n_label, 0.0);
    std::vector<double> p_tv(p.n_text * p.n_image, 0.0);

    for (std::size_t t = 0; t < p.n_text; ++t) {
        for (std::size_t v = 0; v < p.n_image; ++v) {
            for (std::size_t y = 0; y < p.n_label; ++y) {
                double m = p.at(t, v, y);
                p_y[y] += m;
                p_t[t] += m;
                p_v[v] += m;
                p_ty[t * p.n_label + y] += m;
                p_vy[v * p.n_label + y] += m;
                p_tv[t * p.n_image + v] += m;
            }
        }
    }

    auto entropy = [](const std::vector<double>& q) {
        double h = 0.0;
        for (double m : q) h -= xlogx(m);
        return h;
    };

    // H(Y|A) = H(A,Y) - H(A), applied with A = X_T, X_V and (X_T, X_V).
    double h_y = entropy(p_y);
    double h_t = entropy(p_t);
    double h_v = entropy(p_v);
    double h_tv = entropy(p_tv);
    double h_ty = entropy(p_ty);
    double h_vy = entropy(p_vy);
    double h_tvy = entropy(p.p);

    r.h_label = h_y;
    r.h_label_given_text = h_ty - h_t;
    r.h_label_given_image = h_vy - h_v;
    r.h_label_given_both = h_tvy - h_tv;
    r.mi_text = h_y - r.h_label_given_text;
    r.mi_image = h_y - r.h_label_given_image;
    r.mi_joint = h_y - r.h_label_given_both;
    return r;
}

double information_gap(const JointDistribution& p) {
    EntropyReport r = entropy_and_mi(p);
    return std::abs(r.mi_text - r.mi_image);
}

JointDistribution induce(const JointDistribution& p, const DeterministicEncoder& enc_text,
                         const DeterministicEncoder& enc_image) {
    p.validate();
    enc_text.validate();
    enc_image.validate();
    if (enc_text.domain != p.n_text || enc_image.domain != p.n_image) {
        throw ConfigError("induce: encoder domains do not match alphabet sizes");
    }
    JointDistribution out;
    out.n_text = enc_text.range;
    out.n_image = enc_image.range;
    out.n_label = p.n_label;
    out.p.assign(out.n_text * out.n_image * out.n_label, 0.0);
    for (std::size_t t = 0; t < p.n_text; ++t) {
        for (std::size_t v = 0; v < p.n_image; ++v) {
            for (std::size_t y = 0; y < p.n_label; ++y) {
                out.at(enc_text.map[t], enc_image.map[v], y) += p.at(t, v, y);
            }
        }
    }
    return out;
}

bool is_aligned(const JointDistribution& induced) {
    for (std::size_t t = 0; t < induced.n_text; ++t) {
        for (std::size_t v = 0; v < induced.n_image; ++v) {
            if (t == v) continue;
            for (std::size_t y = 0; y < induced.n_label; ++y) {
                if (induced.at(t, v, y) > 0.0) return false;
            }
        }
    }
    return true;
}

bool has_bijection(const DeterministicEncoder& enc_text, const DeterministicEncoder& enc_image,
                   const JointDistribution& p) {
    enc_text.validate();
    enc_image.validate();
    // realized (z_T, z_V) pairs over the support of (X_T, X_V)
    std::map<std::size_t, std::set<std::size_t>> forward;
    std::map<std::size_t, std::set<std::size_t>> backward;
    for (std::size_t t = 0; t < p.n_text; ++t) {
        for (std::size_t v = 0; v < p.n_image; ++v) {
            double mass = 0.0;
            for (std::size_t y = 0; y < p.n_label; ++y) mass += p.at(t, v, y);
            if (mass <= 0.0) continue;
            forward[enc_text.map[t]].insert(enc_image.map[v]);
            backward[enc_image.map[v]].insert(enc_text.map[t]);
        }
    }
    for (const auto& [zt, zvs] : forward) {
        if (zvs.size() != 1) return false;
    }
    for (const auto& [zv, zts] : backward) {
        if (zts.size() != 1) return false;
    }
    return true;
}

TheoremReport verify_theorem(const JointDistribution& p, const DeterministicEncoder& enc_text,
                             const DeterministicEncoder& enc_image) {
    EntropyReport input = entropy_and_mi(p);
    JointDistribution induced = induce(p, enc_text, enc_image);
    EntropyReport feature = entropy_and_mi(induced);

    TheoremReport r;
    r.info_gap = std::abs(input.mi_text - input.mi_image);
    r.h_label_given_inputs = input.h_label_given_both;
    r.h_label_given_features = feature.h_label_given_both;
    r.slack = (r.h_label_given_features - r.h_label_given_inputs) - r.info_gap;
    r.aligned = is_aligned(induced);
    r.bijective = has_bijection(enc_text, enc_image, p);
    r.mi_feature_text = feature.mi_text;
    r.mi_feature_image = feature.mi_image;
    r.mi_feature_joint = feature.mi_joint;
    // I(Z_V;Y|Z_T) = H(Y|Z_T) - H(Y|Z_T,Z_V), and symmetrically.
    r.cmi_image_given_text = feature.h_label_given_text - feature.h_label_given_both;
    r.cmi_text_given_image = feature.h_label_given_image - feature.h_label_given_both;
    return r;
}

std::string TheoremReport::to_json() const {
    nlohmann::json j{{"info_gap", info_gap},
                     {"h_label_given_inputs", h_label_given_inputs},
                     {"h_label_given_features", h_label_given_features},
                     {"slack", slack},
                     {"aligned", aligned},
                     {"bijective", bijective},
                     {"mi_feature_text", mi_feature_text},
                     {"mi_feature_image", mi_feature_image},
                     {"mi_feature_joint", mi_feature_joint},
                     {"cmi_image_given_text", cmi_image_given_text},
                     {"cmi_text_given_image", cmi_text_given_image}};
    return j.dump(2);
}

EnumerationSummary enumerate_verify(const JointDistribution& p, std::size_t latent_size) {
    p.validate();
    if (latent_size < 1) throw ConfigError("enumerate_verify: latent size must be >= 1");

    double budget = std::pow(static_cast<double>(latent_size),
                             static_cast<double>(p.n_text + p.n_image));
    if (budget > static_cast<double>(kEnumerationBudget)) {
        throw ConfigError("enumerate_verify: " + std::to_string(budget) +
                          " encoder pairs exceed the enumeration budget");
    }

    EnumerationSummary s;
    s.latent_size = latent_size;
    s.min_slack = std::numeric_limits<double>::infinity();

    DeterministicEncoder enc_text{p.n_text, latent_size,
                                  std::vector<std::size_t>(p.n_text, 0)};
    DeterministicEncoder enc_image{p.n_image, latent_size,
                                   std::vector<std::size_t>(p.n_image, 0)};

    auto advance = [&](std::vector<std::size_t>& digits) {
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (++digits[i] < latent_size) return true;
            digits[i] = 0;
        }
        return false;
    };

    do {
        std::fill(enc_image.map.begin(), enc_image.map.end(), 0);
        do {
            ++s.pairs_total;
            TheoremReport r = verify_theorem(p, enc_text, enc_image);
            if (r.aligned) ++s.pairs_aligned;
            if (r.bijective) ++s.pairs_bijective;
            if (r.aligned || r.bijective) {
                ++s.pairs_checked;
                s.min_slack = std::min(s.min_slack, r.slack);
                if (r.slack < -kSlackTolerance) ++s.violations;
            }
        } while (advance(enc_image.map));
    } while (advance(enc_text.map));

    return s;
}

std::string EnumerationSummary::to_json() const {
    nlohmann::json j{{"latent_size", latent_size},
                     {"pairs_total", pairs_total},
                     {"pairs_aligned", pairs_aligned},
                     {"pairs_bijective", pairs_bijective},
                     {"pairs_checked", pairs_checked},
                     {"violations", violations},
                     {"min_slack", min_slack}};
    return j.dump(2);
}

}  // namespace mmlat
