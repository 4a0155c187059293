// SPDX-License-Identifier: Apache-2.0
//
// Dense neural network engine for the two-hop heterogeneous encoder and its
// classification head: typed mean aggregation with edge-weight concatenation,
// ReLU layers, sigmoid/BCE loss in numerically stable form, exact
// backpropagation, and mini-batch SGD training. The homogeneous ablation
// erases edge-type labels: all neighbors aggregate into a single class that
// flows through one shared neighbor matrix per hop, the remaining class
// slots staying empty.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "thzjcs/common.hpp"
#include "thzjcs/hetgraph.hpp"

namespace thzjcs::gnn {

using Vector = std::vector<double>;

struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    // y = M x
    void matvec(const double* x, double* y) const {
        for (std::size_t i = 0; i < rows; ++i) {
            double acc = 0.0;
            const double* row = &a[i * cols];
            for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
            y[i] = acc;
        }
    }
    // y += M^T g
    void add_transpose_matvec(const double* g, double* y) const {
        for (std::size_t i = 0; i < rows; ++i) {
            const double gi = g[i];
            const double* row = &a[i * cols];
            for (std::size_t j = 0; j < cols; ++j) y[j] += row[j] * gi;
        }
    }
    // M += g (outer) x
    void add_outer(const double* g, const double* x) {
        for (std::size_t i = 0; i < rows; ++i) {
            double* row = &a[i * cols];
            const double gi = g[i];
            for (std::size_t j = 0; j < cols; ++j) row[j] += gi * x[j];
        }
    }
    void add_scaled(const Matrix& other, double s) {
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * other.a[i];
    }
    void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

enum class GnnMode { Heterogeneous, Homogeneous };

inline const char* mode_name(GnnMode m) {
    return m == GnnMode::Heterogeneous ? "heterogeneous" : "homogeneous";
}

struct GnnHyperParams {
    std::size_t embedding_dim = 64;  // lambda0, divisible by 4
    std::size_t sample_first = 10;   // s1
    std::size_t sample_second = 10;  // s2
    std::size_t hop_count = 2;       // the architecture is two-hop
    std::vector<std::size_t> head_layer_sizes = {32, 64, 64};
    double learning_rate = 0.7;
    std::size_t batch_size = 64;
    std::size_t iterations = 20000;
    GnnMode mode = GnnMode::Heterogeneous;

    void validate() const {
        if (embedding_dim == 0 || embedding_dim % 4 != 0)
            throw std::invalid_argument("embedding_dim must be a positive multiple of 4");
        if (hop_count != 2)
            throw std::invalid_argument("hop_count must be 2 (fixed two-hop architecture)");
        if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be > 0");
        if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (head_layer_sizes.empty()) throw std::invalid_argument("head_layer_sizes must be nonempty");
    }
};

// Raw edge weights (L^A L^F)^-1 span many decades at THz frequencies; the
// encoder consumes them as path loss in dB scaled to O(1). Recorded in
// checkpoints as the input transform id.
inline constexpr const char* kEdgeInputTransform = "pathloss_db_over_100/1";
inline double edge_input_feature(double weight) { return -std::log10(weight) / 10.0; }

// One sampled neighbor, self-contained: edge type toward its parent, raw
// edge weight, and the neighbor's own node features.
struct SampleNode {
    hetgraph::EdgeType type = hetgraph::EdgeType::ServiceComm;
    double weight = 0.0;
    Vector features;
};

struct FirstHopNode {
    hetgraph::EdgeType type = hetgraph::EdgeType::ServiceComm;
    double weight = 0.0;
    Vector features;
    std::vector<SampleNode> second_hop;
};

struct TrainingSample {
    int spv = 0;  // global vehicle id of the source SPV
    Vector self_features;
    std::vector<FirstHopNode> first_hop;
    std::vector<std::uint8_t> label;  // length L+1; class L marks "serves nobody"
};

struct GnnModel {
    std::size_t feature_dim = 0;  // L
    std::size_t embedding_dim = 0;
    GnnMode mode = GnnMode::Heterogeneous;
    std::vector<std::size_t> head_sizes;
    Matrix w1, w2, w3, w4;  // hop 1: self (lambda0/4 x L), neighbors (lambda0/4 x L+1)
    Matrix w5, w6, w7, w8;  // hop 2: self (lambda0/4 x lambda0), neighbors (lambda0/4 x lambda0+1)
    std::vector<Matrix> head_w;  // head layers plus the output layer (L+1 logits)
    std::vector<Vector> head_b;

    std::size_t output_dim() const { return feature_dim + 1; }

    void check_shapes() const {
        const std::size_t q = embedding_dim / 4;
        auto expect = [](const Matrix& m, std::size_t r, std::size_t c, const char* name) {
            if (m.rows != r || m.cols != c)
                throw std::invalid_argument(std::string("model shape mismatch: ") + name);
            for (const double v : m.a)
                if (!std::isfinite(v))
                    throw std::invalid_argument(std::string("non-finite entries in ") + name);
        };
        expect(w1, q, feature_dim, "w1");
        expect(w2, q, feature_dim + 1, "w2");
        expect(w3, q, feature_dim + 1, "w3");
        expect(w4, q, feature_dim + 1, "w4");
        expect(w5, q, embedding_dim, "w5");
        expect(w6, q, embedding_dim + 1, "w6");
        expect(w7, q, embedding_dim + 1, "w7");
        expect(w8, q, embedding_dim + 1, "w8");
        if (head_w.size() != head_sizes.size() + 1 || head_b.size() != head_w.size())
            throw std::invalid_argument("model shape mismatch: head layer count");
        std::size_t in = embedding_dim;
        for (std::size_t i = 0; i < head_sizes.size(); ++i) {
            expect(head_w[i], head_sizes[i], in, "head");
            if (head_b[i].size() != head_sizes[i])
                throw std::invalid_argument("model shape mismatch: head bias");
            in = head_sizes[i];
        }
        expect(head_w.back(), output_dim(), in, "output layer");
        if (head_b.back().size() != output_dim())
            throw std::invalid_argument("model shape mismatch: output bias");
    }
};

namespace detail {

inline void init_uniform(Matrix& m, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(m.cols));
    for (double& v : m.a) v = uniform_double(rng, -bound, bound);
}

inline void init_uniform(Vector& b, std::size_t fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : b) v = uniform_double(rng, -bound, bound);
}

}  // namespace detail

// Uniform initialization on [-1/sqrt(fan_in), +1/sqrt(fan_in)], drawn in a
// fixed parameter order so a seed pins the whole model.
inline GnnModel make_model(const GnnHyperParams& hyper, std::size_t feature_dim,
                           std::uint64_t seed) {
    hyper.validate();
    if (feature_dim == 0) throw std::invalid_argument("feature_dim must be >= 1");
    GnnModel m;
    m.feature_dim = feature_dim;
    m.embedding_dim = hyper.embedding_dim;
    m.mode = hyper.mode;
    m.head_sizes = hyper.head_layer_sizes;
    const std::size_t q = m.embedding_dim / 4;
    m.w1 = Matrix(q, feature_dim);
    m.w2 = Matrix(q, feature_dim + 1);
    m.w3 = Matrix(q, feature_dim + 1);
    m.w4 = Matrix(q, feature_dim + 1);
    m.w5 = Matrix(q, m.embedding_dim);
    m.w6 = Matrix(q, m.embedding_dim + 1);
    m.w7 = Matrix(q, m.embedding_dim + 1);
    m.w8 = Matrix(q, m.embedding_dim + 1);
    Rng rng(seed);
    detail::init_uniform(m.w1, rng);
    detail::init_uniform(m.w2, rng);
    detail::init_uniform(m.w3, rng);
    detail::init_uniform(m.w4, rng);
    detail::init_uniform(m.w5, rng);
    detail::init_uniform(m.w6, rng);
    detail::init_uniform(m.w7, rng);
    detail::init_uniform(m.w8, rng);
    std::size_t in = m.embedding_dim;
    for (const std::size_t size : m.head_sizes) {
        m.head_w.emplace_back(size, in);
        m.head_b.emplace_back(size, 0.0);
        detail::init_uniform(m.head_w.back(), rng);
        detail::init_uniform(m.head_b.back(), in, rng);
        in = size;
    }
    m.head_w.emplace_back(m.output_dim(), in);
    m.head_b.emplace_back(m.output_dim(), 0.0);
    detail::init_uniform(m.head_w.back(), rng);
    detail::init_uniform(m.head_b.back(), in, rng);
    if (m.mode == GnnMode::Homogeneous) {
        // tied neighbor matrices per hop
        m.w3 = m.w2;
        m.w4 = m.w2;
        m.w7 = m.w6;
        m.w8 = m.w6;
    }
    m.check_shapes();
    return m;
}

// Mean over neighbors of [h_v' || g], output length d+1; the empty class
// aggregates to the zero vector. Members are summed in a canonical sorted
// order so the result is exactly permutation invariant.
inline Vector aggregate_typed(const std::vector<const Vector*>& hs,
                              const std::vector<double>& weights, std::size_t dim) {
    if (hs.size() != weights.size())
        throw std::invalid_argument("aggregate_typed: vector/weight count mismatch");
    Vector out(dim + 1, 0.0);
    if (hs.empty()) return out;
    std::vector<std::size_t> order(hs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (const auto* h : hs)
        if (h->size() != dim) throw std::invalid_argument("aggregate_typed: vector length mismatch");
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (*hs[x] != *hs[y]) return *hs[x] < *hs[y];
        return weights[x] < weights[y];
    });
    for (const std::size_t i : order) {
        for (std::size_t j = 0; j < dim; ++j) out[j] += (*hs[i])[j];
        out[dim] += weights[i];
    }
    const double inv = 1.0 / static_cast<double>(hs.size());
    for (double& v : out) v *= inv;
    return out;
}

namespace detail {

inline std::size_t bucket_of(GnnMode mode, hetgraph::EdgeType type) {
    return mode == GnnMode::Homogeneous ? 0 : static_cast<std::size_t>(type);
}

struct Layer1Cache {
    const Vector* self = nullptr;
    Vector agg[hetgraph::kEdgeTypeCount];  // each feature_dim + 1
    std::vector<std::size_t> members[hetgraph::kEdgeTypeCount];
    Vector pre;  // lambda0
    Vector h;    // lambda0
};

struct ForwardCache {
    Layer1Cache source;
    std::vector<Layer1Cache> first_hop;
    Vector agg2[hetgraph::kEdgeTypeCount];  // each lambda0 + 1
    std::vector<std::size_t> members2[hetgraph::kEdgeTypeCount];
    Vector pre2, h2;
    std::vector<Vector> head_in;   // input to each head layer
    std::vector<Vector> head_pre;  // pre-activation of each head layer
    Vector logits;
};

inline void relu_blocks(const GnnModel& m, const Vector& x,
                        const Vector agg[hetgraph::kEdgeTypeCount],
                        const Matrix& self_w, const Matrix& n0, const Matrix& n1,
                        const Matrix& n2, Vector& pre, Vector& h) {
    const std::size_t q = m.embedding_dim / 4;
    pre.assign(m.embedding_dim, 0.0);
    self_w.matvec(x.data(), pre.data());
    n0.matvec(agg[0].data(), pre.data() + q);
    n1.matvec(agg[1].data(), pre.data() + 2 * q);
    n2.matvec(agg[2].data(), pre.data() + 3 * q);
    h.resize(m.embedding_dim);
    for (std::size_t i = 0; i < m.embedding_dim; ++i) h[i] = pre[i] > 0.0 ? pre[i] : 0.0;
}

// Layer I for one node: typed aggregation of its neighbors' raw features
// followed by the four-block ReLU map.
template <typename NodeRange>
inline void layer1(const GnnModel& m, const Vector& self, const NodeRange& neighbors,
                   Layer1Cache& cache) {
    if (self.size() != m.feature_dim)
        throw std::invalid_argument("encode: node feature length does not match model");
    cache.self = &self;
    std::vector<const Vector*> hs[hetgraph::kEdgeTypeCount];
    std::vector<double> ws[hetgraph::kEdgeTypeCount];
    std::size_t idx = 0;
    for (const auto& nb : neighbors) {
        const std::size_t b = bucket_of(m.mode, nb.type);
        hs[b].push_back(&nb.features);
        ws[b].push_back(edge_input_feature(nb.weight));
        cache.members[b].push_back(idx);
        ++idx;
    }
    for (std::size_t b = 0; b < hetgraph::kEdgeTypeCount; ++b)
        cache.agg[b] = aggregate_typed(hs[b], ws[b], m.feature_dim);
    relu_blocks(m, self, cache.agg, m.w1, m.w2, m.w3, m.w4, cache.pre, cache.h);
}

inline void forward(const GnnModel& m, const TrainingSample& sample, ForwardCache& cache) {
    layer1(m, sample.self_features, sample.first_hop, cache.source);
    cache.first_hop.resize(sample.first_hop.size());
    for (std::size_t i = 0; i < sample.first_hop.size(); ++i)
        layer1(m, sample.first_hop[i].features, sample.first_hop[i].second_hop,
               cache.first_hop[i]);

    std::vector<const Vector*> hs[hetgraph::kEdgeTypeCount];
    std::vector<double> ws[hetgraph::kEdgeTypeCount];
    for (std::size_t i = 0; i < sample.first_hop.size(); ++i) {
        const std::size_t b = bucket_of(m.mode, sample.first_hop[i].type);
        hs[b].push_back(&cache.first_hop[i].h);
        ws[b].push_back(edge_input_feature(sample.first_hop[i].weight));
        cache.members2[b].push_back(i);
    }
    for (std::size_t b = 0; b < hetgraph::kEdgeTypeCount; ++b)
        cache.agg2[b] = aggregate_typed(hs[b], ws[b], m.embedding_dim);
    relu_blocks(m, cache.source.h, cache.agg2, m.w5, m.w6, m.w7, m.w8, cache.pre2, cache.h2);

    // Head: affine + ReLU per hidden layer, affine output.
    cache.head_in.clear();
    cache.head_pre.clear();
    Vector u = cache.h2;
    for (std::size_t l = 0; l + 1 < m.head_w.size(); ++l) {
        cache.head_in.push_back(u);
        Vector pre(m.head_w[l].rows, 0.0);
        m.head_w[l].matvec(u.data(), pre.data());
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += m.head_b[l][i];
        cache.head_pre.push_back(pre);
        u.resize(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) u[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    }
    cache.head_in.push_back(u);
    cache.logits.assign(m.head_w.back().rows, 0.0);
    m.head_w.back().matvec(u.data(), cache.logits.data());
    for (std::size_t i = 0; i < cache.logits.size(); ++i) cache.logits[i] += m.head_b.back()[i];
}

}  // namespace detail

// Two-hop embedding h_k^2 of the sample's source SPV, length lambda0.
inline Vector encode(const GnnModel& model, const TrainingSample& sample) {
    detail::ForwardCache cache;
    detail::layer1(model, sample.self_features, sample.first_hop, cache.source);
    cache.first_hop.resize(sample.first_hop.size());
    for (std::size_t i = 0; i < sample.first_hop.size(); ++i)
        detail::layer1(model, sample.first_hop[i].features, sample.first_hop[i].second_hop,
                       cache.first_hop[i]);
    std::vector<const Vector*> hs[hetgraph::kEdgeTypeCount];
    std::vector<double> ws[hetgraph::kEdgeTypeCount];
    for (std::size_t i = 0; i < sample.first_hop.size(); ++i) {
        const std::size_t b = detail::bucket_of(model.mode, sample.first_hop[i].type);
        hs[b].push_back(&cache.first_hop[i].h);
        ws[b].push_back(edge_input_feature(sample.first_hop[i].weight));
    }
    Vector agg2[hetgraph::kEdgeTypeCount];
    for (std::size_t b = 0; b < hetgraph::kEdgeTypeCount; ++b)
        agg2[b] = aggregate_typed(hs[b], ws[b], model.embedding_dim);
    Vector pre2, h2;
    detail::relu_blocks(model, cache.source.h, agg2, model.w5, model.w6, model.w7, model.w8,
                        pre2, h2);
    return h2;
}

// Head logits y_k, length L+1. Sigmoid is applied only inside the loss and
// when exporting probabilities.
inline Vector head_forward(const GnnModel& model, const Vector& embedding) {
    if (embedding.size() != model.embedding_dim)
        throw std::invalid_argument("head_forward: embedding length mismatch");
    Vector u = embedding;
    for (std::size_t l = 0; l + 1 < model.head_w.size(); ++l) {
        Vector pre(model.head_w[l].rows, 0.0);
        model.head_w[l].matvec(u.data(), pre.data());
        for (std::size_t i = 0; i < pre.size(); ++i) pre[i] += model.head_b[l][i];
        u.resize(pre.size());
        for (std::size_t i = 0; i < pre.size(); ++i) u[i] = pre[i] > 0.0 ? pre[i] : 0.0;
    }
    Vector y(model.head_w.back().rows, 0.0);
    model.head_w.back().matvec(u.data(), y.data());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += model.head_b.back()[i];
    return y;
}

inline double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Sum over classes of -z log s(y) - (1-z) log(1-s(y)), in softplus form.
inline double bce_loss(const Vector& logits, const std::vector<std::uint8_t>& label) {
    if (logits.size() != label.size())
        throw std::invalid_argument("bce_loss: length mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i)
        loss += label[i] ? softplus(-logits[i]) : softplus(logits[i]);
    return loss;
}

struct Gradients {
    Matrix w1, w2, w3, w4, w5, w6, w7, w8;
    std::vector<Matrix> head_w;
    std::vector<Vector> head_b;

    explicit Gradients(const GnnModel& m)
        : w1(m.w1.rows, m.w1.cols), w2(m.w2.rows, m.w2.cols), w3(m.w3.rows, m.w3.cols),
          w4(m.w4.rows, m.w4.cols), w5(m.w5.rows, m.w5.cols), w6(m.w6.rows, m.w6.cols),
          w7(m.w7.rows, m.w7.cols), w8(m.w8.rows, m.w8.cols) {
        for (const auto& w : m.head_w) head_w.emplace_back(w.rows, w.cols);
        for (const auto& b : m.head_b) head_b.emplace_back(b.size(), 0.0);
    }

    void reset() {
        for (Matrix* m : {&w1, &w2, &w3, &w4, &w5, &w6, &w7, &w8}) m->fill(0.0);
        for (auto& w : head_w) w.fill(0.0);
        for (auto& b : head_b) std::fill(b.begin(), b.end(), 0.0);
    }
};

// Exact gradients of bce_loss(head_forward(encode(sample))) accumulated into
// `grads`. The shared hop-1 matrices collect contributions from the source
// and from every first-hop node the layer-I map is applied to.
inline double backward(const GnnModel& m, const TrainingSample& sample, Gradients& grads) {
    detail::ForwardCache cache;
    detail::forward(m, sample, cache);
    const double loss = bce_loss(cache.logits, sample.label);

    // Output layer: dJ/dy = sigmoid(y) - z.
    Vector delta(cache.logits.size());
    for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] = sigmoid(cache.logits[i]) - static_cast<double>(sample.label[i]);

    // Head, output layer first.
    Vector down(m.head_w.back().cols, 0.0);
    grads.head_w.back().add_outer(delta.data(), cache.head_in.back().data());
    for (std::size_t i = 0; i < delta.size(); ++i) grads.head_b.back()[i] += delta[i];
    m.head_w.back().add_transpose_matvec(delta.data(), down.data());
    for (std::size_t l = m.head_w.size() - 1; l-- > 0;) {
        Vector dpre(m.head_w[l].rows);
        for (std::size_t i = 0; i < dpre.size(); ++i)
            dpre[i] = cache.head_pre[l][i] > 0.0 ? down[i] : 0.0;
        grads.head_w[l].add_outer(dpre.data(), cache.head_in[l].data());
        for (std::size_t i = 0; i < dpre.size(); ++i) grads.head_b[l][i] += dpre[i];
        down.assign(m.head_w[l].cols, 0.0);
        m.head_w[l].add_transpose_matvec(dpre.data(), down.data());
    }

    // Layer II blocks.
    const std::size_t q = m.embedding_dim / 4;
    Vector dpre2(m.embedding_dim);
    for (std::size_t i = 0; i < m.embedding_dim; ++i)
        dpre2[i] = cache.pre2[i] > 0.0 ? down[i] : 0.0;
    Vector dh1_source(m.embedding_dim, 0.0);
    grads.w5.add_outer(dpre2.data(), cache.source.h.data());
    m.w5.add_transpose_matvec(dpre2.data(), dh1_source.data());

    std::vector<Vector> dh1_fh(cache.first_hop.size(), Vector(m.embedding_dim, 0.0));
    const Matrix* w2nd[3] = {&m.w6, &m.w7, &m.w8};
    Matrix* g2nd[3] = {&grads.w6, &grads.w7, &grads.w8};
    for (std::size_t b = 0; b < hetgraph::kEdgeTypeCount; ++b) {
        const double* dpre_block = dpre2.data() + (b + 1) * q;
        g2nd[b]->add_outer(dpre_block, cache.agg2[b].data());
        if (cache.members2[b].empty()) continue;
        Vector dagg(m.embedding_dim + 1, 0.0);
        w2nd[b]->add_transpose_matvec(dpre_block, dagg.data());
        const double inv = 1.0 / static_cast<double>(cache.members2[b].size());
        for (const std::size_t i : cache.members2[b])
            for (std::size_t j = 0; j < m.embedding_dim; ++j)
                dh1_fh[i][j] += inv * dagg[j];
    }

    // Layer I, applied to the source and each first-hop node. Features are
    // inputs, so nothing propagates below the aggregates.
    Matrix* g1st[3] = {&grads.w2, &grads.w3, &grads.w4};
    auto layer1_backward = [&](const detail::Layer1Cache& c, const Vector& dh) {
        Vector dpre(m.embedding_dim);
        for (std::size_t i = 0; i < m.embedding_dim; ++i)
            dpre[i] = c.pre[i] > 0.0 ? dh[i] : 0.0;
        grads.w1.add_outer(dpre.data(), c.self->data());
        for (std::size_t b = 0; b < hetgraph::kEdgeTypeCount; ++b)
            g1st[b]->add_outer(dpre.data() + (b + 1) * q, c.agg[b].data());
    };
    layer1_backward(cache.source, dh1_source);
    for (std::size_t i = 0; i < cache.first_hop.size(); ++i)
        layer1_backward(cache.first_hop[i], dh1_fh[i]);
    return loss;
}

// Convenience pair of encode + head, as used at decision time.
inline Vector logits_of(const GnnModel& model, const TrainingSample& sample) {
    detail::ForwardCache cache;
    detail::forward(model, sample, cache);
    return cache.logits;
}

inline Vector predict_probabilities(const GnnModel& model, const TrainingSample& sample) {
    Vector y = logits_of(model, sample);
    for (double& v : y) v = sigmoid(v);
    return y;
}

// Self-contained sample (unlabeled) for one source node of a graph.
inline TrainingSample make_sample(const hetgraph::HeteroGraph& g,
                                  const hetgraph::SampledNeighborhood& nb) {
    TrainingSample s;
    s.spv = nb.source;
    s.self_features = g.features[nb.source];
    for (std::size_t i = 0; i < nb.first_hop.size(); ++i) {
        FirstHopNode fh;
        fh.type = nb.first_hop[i].type;
        fh.weight = nb.first_hop[i].weight;
        fh.features = g.features[nb.first_hop[i].node];
        for (const auto& sn : nb.second_hop[i])
            fh.second_hop.push_back({sn.type, sn.weight, g.features[sn.node]});
        s.first_hop.push_back(std::move(fh));
    }
    return s;
}

struct TrainResult {
    std::vector<double> loss_trace;  // mean batch loss per iteration
};

// Mini-batch SGD: every iteration draws batch_size samples with replacement,
// averages gradients, and applies one step of size learning_rate to every
// parameter. Deterministic for a fixed seed.
inline TrainResult train(GnnModel& model, const std::vector<TrainingSample>& dataset,
                         const GnnHyperParams& hyper, std::uint64_t seed) {
    hyper.validate();
    model.check_shapes();
    if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
    for (const auto& s : dataset) {
        if (s.self_features.size() != model.feature_dim)
            throw std::invalid_argument("train: sample feature length mismatch");
        if (s.label.size() != model.output_dim())
            throw std::invalid_argument("train: label length mismatch");
    }
    Rng rng(seed);
    TrainResult result;
    result.loss_trace.reserve(hyper.iterations);
    Gradients grads(model);
    const double step = hyper.learning_rate / static_cast<double>(hyper.batch_size);
    for (std::size_t t = 0; t < hyper.iterations; ++t) {
        grads.reset();
        double batch_loss = 0.0;
        for (std::size_t b = 0; b < hyper.batch_size; ++b) {
            const std::size_t idx = static_cast<std::size_t>(uniform_index(rng, dataset.size()));
            batch_loss += backward(model, dataset[idx], grads);
        }
        batch_loss /= static_cast<double>(hyper.batch_size);
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("train: loss diverged at iteration " + std::to_string(t + 1));
        result.loss_trace.push_back(batch_loss);
        model.w1.add_scaled(grads.w1, -step);
        model.w2.add_scaled(grads.w2, -step);
        model.w3.add_scaled(grads.w3, -step);
        model.w4.add_scaled(grads.w4, -step);
        model.w5.add_scaled(grads.w5, -step);
        model.w6.add_scaled(grads.w6, -step);
        model.w7.add_scaled(grads.w7, -step);
        model.w8.add_scaled(grads.w8, -step);
        for (std::size_t l = 0; l < model.head_w.size(); ++l) {
            model.head_w[l].add_scaled(grads.head_w[l], -step);
            for (std::size_t i = 0; i < model.head_b[l].size(); ++i)
                model.head_b[l][i] -= step * grads.head_b[l][i];
        }
    }
    if (model.mode == GnnMode::Homogeneous) {
        // the unused tied slots mirror the trained shared matrix
        model.w3 = model.w2;
        model.w4 = model.w2;
        model.w7 = model.w6;
        model.w8 = model.w6;
    }
    return result;
}

// --- checkpoint serialization ------------------------------------------------

inline nlohmann::ordered_json matrix_to_json(const Matrix& m) {
    nlohmann::ordered_json j;
    j["rows"] = m.rows;
    j["cols"] = m.cols;
    auto& rows = j["data"] = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < m.rows; ++i) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t c = 0; c < m.cols; ++c) row.push_back(m.at(i, c));
        rows.push_back(row);
    }
    return j;
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    const auto& rows = j.at("data");
    if (rows.size() != m.rows) throw std::runtime_error("matrix rows mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) {
        if (rows[i].size() != m.cols) throw std::runtime_error("matrix cols mismatch");
        for (std::size_t c = 0; c < m.cols; ++c) m.at(i, c) = rows[i][c].get<double>();
    }
    return m;
}

inline nlohmann::ordered_json to_json(const GnnModel& m, std::uint64_t init_seed) {
    nlohmann::ordered_json j;
    j["schema"] = "thzjcs.checkpoint/1";
    j["mode"] = mode_name(m.mode);
    j["feature_dim"] = m.feature_dim;
    j["embedding_dim"] = m.embedding_dim;
    j["head_sizes"] = m.head_sizes;
    j["init_seed"] = init_seed;
    j["edge_input_transform"] = kEdgeInputTransform;
    j["w1"] = matrix_to_json(m.w1);
    j["w2"] = matrix_to_json(m.w2);
    j["w3"] = matrix_to_json(m.w3);
    j["w4"] = matrix_to_json(m.w4);
    j["w5"] = matrix_to_json(m.w5);
    j["w6"] = matrix_to_json(m.w6);
    j["w7"] = matrix_to_json(m.w7);
    j["w8"] = matrix_to_json(m.w8);
    for (std::size_t l = 0; l < m.head_w.size(); ++l) {
        j["head_w_" + std::to_string(l)] = matrix_to_json(m.head_w[l]);
        j["head_b_" + std::to_string(l)] = m.head_b[l];
    }
    return j;
}

inline GnnModel model_from_json(const nlohmann::json& j) {
    GnnModel m;
    const std::string mode = j.at("mode").get<std::string>();
    m.mode = (mode == "homogeneous") ? GnnMode::Homogeneous : GnnMode::Heterogeneous;
    m.feature_dim = j.at("feature_dim").get<std::size_t>();
    m.embedding_dim = j.at("embedding_dim").get<std::size_t>();
    m.head_sizes = j.at("head_sizes").get<std::vector<std::size_t>>();
    m.w1 = matrix_from_json(j.at("w1"));
    m.w2 = matrix_from_json(j.at("w2"));
    m.w3 = matrix_from_json(j.at("w3"));
    m.w4 = matrix_from_json(j.at("w4"));
    m.w5 = matrix_from_json(j.at("w5"));
    m.w6 = matrix_from_json(j.at("w6"));
    m.w7 = matrix_from_json(j.at("w7"));
    m.w8 = matrix_from_json(j.at("w8"));
    for (std::size_t l = 0;; ++l) {
        const std::string key = "head_w_" + std::to_string(l);
        if (!j.contains(key)) break;
        m.head_w.push_back(matrix_from_json(j.at(key)));
        m.head_b.push_back(j.at("head_b_" + std::to_string(l)).get<Vector>());
    }
    m.check_shapes();
    return m;
}

}  // namespace thzjcs::gnn
