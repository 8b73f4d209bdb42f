#include "mmlat/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mmlat {

namespace {

constexpr double kRowNormFloor = 1e-12;

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                          b.shape_str());
    }
}

void require_matrix(const Tensor& a, const char* op) {
    if (a.rank() != 2) {
        throw ConfigError(std::string(op) + ": expected a matrix, got shape " + a.shape_str());
    }
}

// C += A * B, all row-major dense.
void matmul_accumulate(const double* a, const double* b, double* c, std::size_t m, std::size_t k,
                       std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            double av = arow[p];
            if (av == 0.0) continue;
            const double* brow = b + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C += A * B^T  (A: m x k, B: n x k, C: m x n).
void matmul_bt_accumulate(const double* a, const double* b, double* c, std::size_t m,
                          std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b + j * k;
            double acc = 0.0;
            for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C += A^T * B  (A: k x m, B: k x n, C: m x n).
void matmul_at_accumulate(const double* a, const double* b, double* c, std::size_t k,
                          std::size_t m, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a + p * m;
        const double* brow = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            double av = arow[i];
            if (av == 0.0) continue;
            double* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace

const char* op_name(OpKind k) {
    switch (k) {
        case OpKind::Input: return "input";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Mul: return "mul";
        case OpKind::Scale: return "scale";
        case OpKind::MatMul: return "matmul";
        case OpKind::Transpose: return "transpose";
        case OpKind::Exp: return "exp";
        case OpKind::Log: return "log";
        case OpKind::Square: return "square";
        case OpKind::Tanh: return "tanh";
        case OpKind::ClampMin: return "clamp_min";
        case OpKind::Sum: return "sum";
        case OpKind::Mean: return "mean";
        case OpKind::RowNormalize: return "row_normalize";
        case OpKind::RowDot: return "row_dot";
        case OpKind::Gram: return "gram";
        case OpKind::PairwiseSqDist: return "pairwise_sqdist";
        case OpKind::LogSumExpRows: return "logsumexp_rows";
        case OpKind::AddBias: return "add_bias";
    }
    return "?";
}

int Graph::record(OpKind kind, int in0, int in1, double attr, Tensor value) {
    Node node;
    node.kind = kind;
    node.inputs = {in0, in1};
    node.attr = attr;
    node.value = std::move(value);
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
}

int Graph::operand(const Tensor& t) {
    if (t.has_node()) {
        if (t.node() >= static_cast<int>(nodes_.size())) {
            throw ConfigError("tensor belongs to a different graph");
        }
        return t.node();
    }
    Tensor copy = t;
    return record(OpKind::Input, -1, -1, 0.0, std::move(copy));
}

Tensor Graph::make_result(int id) const {
    Tensor t = nodes_[static_cast<std::size_t>(id)].value;
    t.node_ = id;
    return t;
}

Tensor Graph::var(const Tensor& value) {
    Tensor copy = value;
    int id = record(OpKind::Input, -1, -1, 0.0, std::move(copy));
    return make_result(id);
}

Tensor Graph::add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    int ia = operand(a), ib = operand(b);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
    return make_result(record(OpKind::Add, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::sub(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "sub");
    int ia = operand(a), ib = operand(b);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
    return make_result(record(OpKind::Sub, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::mul(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mul");
    int ia = operand(a), ib = operand(b);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
    return make_result(record(OpKind::Mul, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::scale(const Tensor& a, double factor) {
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= factor;
    return make_result(record(OpKind::Scale, ia, -1, factor, std::move(out)));
}

Tensor Graph::matmul(const Tensor& a, const Tensor& b) {
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.cols() != b.rows()) {
        throw ConfigError("matmul: inner dimensions disagree " + a.shape_str() + " x " +
                          b.shape_str());
    }
    int ia = operand(a), ib = operand(b);
    Tensor out = Tensor::zeros({a.rows(), b.cols()});
    matmul_accumulate(a.data(), b.data(), out.data(), a.rows(), a.cols(), b.cols());
    return make_result(record(OpKind::MatMul, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::transpose(const Tensor& a) {
    require_matrix(a, "transpose");
    int ia = operand(a);
    Tensor out = Tensor::zeros({a.cols(), a.rows()});
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
    return make_result(record(OpKind::Transpose, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::exp(const Tensor& a) {
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
    return make_result(record(OpKind::Exp, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::log(const Tensor& a) {
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!(out[i] > 0.0)) {
            throw NumericError("log: non-positive input " + std::to_string(out[i]) +
                               " at flat index " + std::to_string(i));
        }
        out[i] = std::log(out[i]);
    }
    return make_result(record(OpKind::Log, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::square(const Tensor& a) {
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
    return make_result(record(OpKind::Square, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::tanh(const Tensor& a) {
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::tanh(out[i]);
    return make_result(record(OpKind::Tanh, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::clamp_min(const Tensor& a, double floor) {
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], floor);
    return make_result(record(OpKind::ClampMin, ia, -1, floor, std::move(out)));
}

Tensor Graph::sum(const Tensor& a) {
    int ia = operand(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    return make_result(record(OpKind::Sum, ia, -1, 0.0, Tensor::scalar(acc)));
}

Tensor Graph::mean(const Tensor& a) {
    if (a.size() == 0) throw ConfigError("mean: empty tensor");
    int ia = operand(a);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i];
    return make_result(
        record(OpKind::Mean, ia, -1, 0.0, Tensor::scalar(acc / static_cast<double>(a.size()))));
}

Tensor Graph::row_normalize(const Tensor& a) {
    require_matrix(a, "row_normalize");
    int ia = operand(a);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) sq += a.at(r, c) * a.at(r, c);
        double norm = std::sqrt(sq);
        if (!(norm > kRowNormFloor)) {
            throw NumericError("row_normalize: row " + std::to_string(r) + " has norm " +
                               std::to_string(norm));
        }
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) /= norm;
    }
    return make_result(record(OpKind::RowNormalize, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::row_dot(const Tensor& a, const Tensor& b) {
    require_matrix(a, "row_dot");
    require_same_shape(a, b, "row_dot");
    int ia = operand(a), ib = operand(b);
    Tensor out = Tensor::zeros({a.rows()});
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) acc += a.at(r, c) * b.at(r, c);
        out[r] = acc;
    }
    return make_result(record(OpKind::RowDot, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::gram(const Tensor& a, const Tensor& b) {
    require_matrix(a, "gram");
    require_matrix(b, "gram");
    if (a.cols() != b.cols()) {
        throw ConfigError("gram: feature dimensions disagree " + a.shape_str() + " vs " +
                          b.shape_str());
    }
    int ia = operand(a), ib = operand(b);
    Tensor out = Tensor::zeros({a.rows(), b.rows()});
    matmul_bt_accumulate(a.data(), b.data(), out.data(), a.rows(), a.cols(), b.rows());
    return make_result(record(OpKind::Gram, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::pairwise_sqdist(const Tensor& a, const Tensor& b) {
    require_matrix(a, "pairwise_sqdist");
    require_matrix(b, "pairwise_sqdist");
    if (a.cols() != b.cols()) {
        throw ConfigError("pairwise_sqdist: feature dimensions disagree " + a.shape_str() +
                          " vs " + b.shape_str());
    }
    int ia = operand(a), ib = operand(b);
    Tensor out = Tensor::zeros({a.rows(), b.rows()});
    for (std::size_t j = 0; j < a.rows(); ++j) {
        for (std::size_t k = 0; k < b.rows(); ++k) {
            double acc = 0.0;
            for (std::size_t c = 0; c < a.cols(); ++c) {
                double d = a.at(j, c) - b.at(k, c);
                acc += d * d;
            }
            out.at(j, k) = acc;
        }
    }
    return make_result(record(OpKind::PairwiseSqDist, ia, ib, 0.0, std::move(out)));
}

Tensor Graph::logsumexp_rows(const Tensor& a) {
    require_matrix(a, "logsumexp_rows");
    int ia = operand(a);
    Tensor out = Tensor::zeros({a.rows()});
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double m = a.at(r, 0);
        for (std::size_t c = 1; c < a.cols(); ++c) m = std::max(m, a.at(r, c));
        double acc = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) acc += std::exp(a.at(r, c) - m);
        out[r] = m + std::log(acc);
    }
    return make_result(record(OpKind::LogSumExpRows, ia, -1, 0.0, std::move(out)));
}

Tensor Graph::add_bias(const Tensor& a, const Tensor& bias) {
    require_matrix(a, "add_bias");
    if (bias.rank() != 1 || bias.size() != a.cols()) {
        throw ConfigError("add_bias: bias shape " + bias.shape_str() + " does not fit matrix " +
                          a.shape_str());
    }
    int ia = operand(a), ib = operand(bias);
    Tensor out = a;
    out.node_ = -1;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) += bias[c];
    return make_result(record(OpKind::AddBias, ia, ib, 0.0, std::move(out)));
}

std::vector<Tensor> Graph::gradients(const Tensor& output, std::span<const Tensor> wrt) {
    if (output.size() != 1) {
        throw ConfigError("gradients: output must be a scalar, got shape " + output.shape_str());
    }
    if (!output.has_node()) {
        throw ConfigError("gradients: output does not belong to this graph");
    }

    std::vector<std::vector<double>> adjoint(nodes_.size());
    auto touch = [&](int id) -> std::vector<double>& {
        auto& buf = adjoint[static_cast<std::size_t>(id)];
        if (buf.empty()) buf.assign(nodes_[static_cast<std::size_t>(id)].value.size(), 0.0);
        return buf;
    };

    touch(output.node())[0] = 1.0;

    for (int id = output.node(); id >= 0; --id) {
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        const auto& g = adjoint[static_cast<std::size_t>(id)];
        if (g.empty()) continue;

        const int i0 = node.inputs[0];
        const int i1 = node.inputs[1];
        const Tensor& out = node.value;

        switch (node.kind) {
            case OpKind::Input:
                break;
            case OpKind::Add: {
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] += g[i];
                }
                break;
            }
            case OpKind::Sub: {
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i];
                    gb[i] -= g[i];
                }
                break;
            }
            case OpKind::Mul: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                const Tensor& b = nodes_[static_cast<std::size_t>(i1)].value;
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                for (std::size_t i = 0; i < g.size(); ++i) {
                    ga[i] += g[i] * b[i];
                    gb[i] += g[i] * a[i];
                }
                break;
            }
            case OpKind::Scale: {
                auto& ga = touch(i0);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * node.attr;
                break;
            }
            case OpKind::MatMul: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                const Tensor& b = nodes_[static_cast<std::size_t>(i1)].value;
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                // dA += G * B^T ; dB += A^T * G
                matmul_bt_accumulate(g.data(), b.data(), ga.data(), a.rows(), b.cols(), a.cols());
                matmul_at_accumulate(a.data(), g.data(), gb.data(), a.rows(), a.cols(), b.cols());
                break;
            }
            case OpKind::Transpose: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                for (std::size_t r = 0; r < a.rows(); ++r)
                    for (std::size_t c = 0; c < a.cols(); ++c)
                        ga[r * a.cols() + c] += g[c * a.rows() + r];
                break;
            }
            case OpKind::Exp: {
                auto& ga = touch(i0);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * out[i];
                break;
            }
            case OpKind::Log: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / a[i];
                break;
            }
            case OpKind::Square: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += 2.0 * g[i] * a[i];
                break;
            }
            case OpKind::Tanh: {
                auto& ga = touch(i0);
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga[i] += g[i] * (1.0 - out[i] * out[i]);
                break;
            }
            case OpKind::ClampMin: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                for (std::size_t i = 0; i < g.size(); ++i)
                    if (a[i] > node.attr) ga[i] += g[i];
                break;
            }
            case OpKind::Sum: {
                auto& ga = touch(i0);
                for (double& v : ga) v += g[0];
                break;
            }
            case OpKind::Mean: {
                auto& ga = touch(i0);
                double s = g[0] / static_cast<double>(ga.size());
                for (double& v : ga) v += s;
                break;
            }
            case OpKind::RowNormalize: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                std::size_t d = a.cols();
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    double sq = 0.0;
                    for (std::size_t c = 0; c < d; ++c) sq += a.at(r, c) * a.at(r, c);
                    double norm = std::sqrt(sq);
                    double dot = 0.0;
                    for (std::size_t c = 0; c < d; ++c) dot += g[r * d + c] * out.at(r, c);
                    for (std::size_t c = 0; c < d; ++c)
                        ga[r * d + c] += (g[r * d + c] - out.at(r, c) * dot) / norm;
                }
                break;
            }
            case OpKind::RowDot: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                const Tensor& b = nodes_[static_cast<std::size_t>(i1)].value;
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                std::size_t d = a.cols();
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    for (std::size_t c = 0; c < d; ++c) {
                        ga[r * d + c] += g[r] * b.at(r, c);
                        gb[r * d + c] += g[r] * a.at(r, c);
                    }
                }
                break;
            }
            case OpKind::Gram: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                const Tensor& b = nodes_[static_cast<std::size_t>(i1)].value;
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                // out = A B^T ; dA += G B ; dB += G^T A
                matmul_accumulate(g.data(), b.data(), ga.data(), a.rows(), b.rows(), b.cols());
                matmul_at_accumulate(g.data(), a.data(), gb.data(), a.rows(), b.rows(), a.cols());
                break;
            }
            case OpKind::PairwiseSqDist: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                const Tensor& b = nodes_[static_cast<std::size_t>(i1)].value;
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                std::size_t d = a.cols();
                for (std::size_t j = 0; j < a.rows(); ++j) {
                    for (std::size_t k = 0; k < b.rows(); ++k) {
                        double w = 2.0 * g[j * b.rows() + k];
                        if (w == 0.0) continue;
                        for (std::size_t c = 0; c < d; ++c) {
                            double diff = a.at(j, c) - b.at(k, c);
                            ga[j * d + c] += w * diff;
                            gb[k * d + c] -= w * diff;
                        }
                    }
                }
                break;
            }
            case OpKind::LogSumExpRows: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                std::size_t m = a.cols();
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    for (std::size_t c = 0; c < m; ++c)
                        ga[r * m + c] += g[r] * std::exp(a.at(r, c) - out[r]);
                }
                break;
            }
            case OpKind::AddBias: {
                const Tensor& a = nodes_[static_cast<std::size_t>(i0)].value;
                auto& ga = touch(i0);
                auto& gb = touch(i1);
                std::size_t d = a.cols();
                for (std::size_t r = 0; r < a.rows(); ++r) {
                    for (std::size_t c = 0; c < d; ++c) {
                        ga[r * d + c] += g[r * d + c];
                        gb[c] += g[r * d + c];
                    }
                }
                break;
            }
        }
    }

    std::vector<Tensor> out;
    out.reserve(wrt.size());
    for (const Tensor& t : wrt) {
        Tensor grad = Tensor::zeros(t.shape());
        if (t.has_node()) {
            const auto& buf = adjoint[static_cast<std::size_t>(t.node())];
            if (!buf.empty()) {
                for (std::size_t i = 0; i < buf.size(); ++i) grad[i] = buf[i];
            }
        }
        out.push_back(std::move(grad));
    }
    return out;
}

}  // namespace mmlat
