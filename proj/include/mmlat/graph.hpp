#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mmlat/tensor.hpp"

namespace mmlat {

enum class OpKind {
    Input,
    Add,
    Sub,
    Mul,
    Scale,
    MatMul,
    Transpose,
    Exp,
    Log,
    Square,
    Tanh,
    ClampMin,
    Sum,
    Mean,
    RowNormalize,
    RowDot,
    Gram,
    PairwiseSqDist,
    LogSumExpRows,
    AddBias,
};

const char* op_name(OpKind k);

// Reverse-mode tape over eagerly evaluated primitives. A graph is built fresh
// for each training step and confined to one thread; tensors handed out are
// plain values tagged with the producing node id.
class Graph {
public:
    // Registers a differentiable leaf.
    Tensor var(const Tensor& value);

    Tensor add(const Tensor& a, const Tensor& b);
    Tensor sub(const Tensor& a, const Tensor& b);
    Tensor mul(const Tensor& a, const Tensor& b);
    Tensor scale(const Tensor& a, double factor);
    Tensor matmul(const Tensor& a, const Tensor& b);
    Tensor transpose(const Tensor& a);
    Tensor exp(const Tensor& a);
    Tensor log(const Tensor& a);
    Tensor square(const Tensor& a);
    Tensor tanh(const Tensor& a);
    Tensor clamp_min(const Tensor& a, double floor);
    Tensor sum(const Tensor& a);
    Tensor mean(const Tensor& a);
    // Divides every row by its Euclidean norm; norms below 1e-12 are a
    // numeric-domain error naming the row.
    Tensor row_normalize(const Tensor& a);
    // Row-wise inner products of two equal-shape matrices -> vector of N.
    Tensor row_dot(const Tensor& a, const Tensor& b);
    // A (N x d) x B (M x d) -> A B^T (N x M).
    Tensor gram(const Tensor& a, const Tensor& b);
    // D[j,k] = ||a_j - b_k||^2.
    Tensor pairwise_sqdist(const Tensor& a, const Tensor& b);
    // Per-row log sum exp with max shift -> vector of N.
    Tensor logsumexp_rows(const Tensor& a);
    // Matrix (N x d) plus a length-d bias vector added to every row.
    Tensor add_bias(const Tensor& a, const Tensor& bias);

    // Reverse-mode gradients of a scalar output with respect to the given
    // tensors. Tensors that never reached the output (or were never
    // registered) get zero gradients.
    std::vector<Tensor> gradients(const Tensor& output, std::span<const Tensor> wrt);

    std::size_t node_count() const { return nodes_.size(); }
    const Tensor& node_value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

private:
    struct Node {
        OpKind kind;
        std::array<int, 2> inputs{-1, -1};
        double attr = 0.0;
        Tensor value;
    };

    int record(OpKind kind, int in0, int in1, double attr, Tensor value);
    // Returns the node id for an operand, registering plain values as inputs.
    int operand(const Tensor& t);
    Tensor make_result(int id) const;

    std::vector<Node> nodes_;
};

}  // namespace mmlat
