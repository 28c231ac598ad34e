#include "hornguide/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hornguide/parallel.hpp"
#include "hornguide/rng.hpp"

namespace hornguide {

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::Linear: return "linear";
        case Activation::Logistic: return "logistic";
    }
    return "?";
}

Activation activation_from_name(std::string_view s) {
    if (s == "relu") return Activation::Relu;
    if (s == "linear") return Activation::Linear;
    if (s == "logistic") return Activation::Logistic;
    throw MalformedInputError("unknown activation: " + std::string(s));
}

const char* rule_repr_name(RuleRepr r) {
    return r == RuleRepr::Head ? "head" : "head_body_mean";
}

RuleRepr rule_repr_from_name(std::string_view s) {
    if (s == "head") return RuleRepr::Head;
    if (s == "head_body_mean") return RuleRepr::HeadBodyMean;
    throw MalformedInputError("unknown rule representation: " + std::string(s));
}

DenseNet make_net(std::vector<int> dims, Activation hidden, Activation output) {
    if (dims.size() < 2) throw Error("net needs at least input and output dims");
    DenseNet net;
    net.dims = std::move(dims);
    net.hidden = hidden;
    net.output = output;
    for (std::size_t l = 0; l + 1 < net.dims.size(); ++l) {
        net.w.emplace_back(static_cast<std::size_t>(net.dims[l + 1]) * net.dims[l], 0.0);
        net.b.emplace_back(net.dims[l + 1], 0.0);
    }
    return net;
}

void init_weights(DenseNet& net, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        double fan_in = net.dims[l];
        double fan_out = net.dims[l + 1];
        double s = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& x : net.w[l]) x = rng.uniform(-s, s);
        for (double& x : net.b[l]) x = 0.0;
    }
}

namespace {

inline double activate(Activation a, double z) {
    switch (a) {
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Linear: return z;
        case Activation::Logistic: return 1.0 / (1.0 + std::exp(-z));
    }
    return z;
}

void ensure_ws(const DenseNet& net, NetWorkspace& ws) {
    const std::size_t L = net.w.size();
    ws.pre.resize(L);
    ws.act.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        ws.pre[l].assign(net.dims[l + 1], 0.0);
        ws.act[l].assign(net.dims[l + 1], 0.0);
    }
}

void forward_from_layer1(const DenseNet& net, NetWorkspace& ws) {
    const std::size_t L = net.w.size();
    for (std::size_t l = 0; l < L; ++l) {
        const int in = net.dims[l];
        const int out = net.dims[l + 1];
        const std::vector<double>& x = l == 0 ? ws.pre[0] /*unused*/ : ws.act[l - 1];
        if (l > 0) {
            const double* wl = net.w[l].data();
            for (int i = 0; i < out; ++i) {
                double z = net.b[l][i];
                const double* row = wl + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) z += row[j] * x[j];
                ws.pre[l][i] = z;
            }
        }
        Activation a = (l + 1 == L) ? net.output : net.hidden;
        for (int i = 0; i < out; ++i) ws.act[l][i] = activate(a, ws.pre[l][i]);
    }
}

}  // namespace

void forward(const DenseNet& net, std::span<const double> x, NetWorkspace& ws) {
    if (static_cast<int>(x.size()) != net.input_dim())
        throw Error("input size " + std::to_string(x.size()) + " != net input dim " +
                    std::to_string(net.input_dim()));
    ensure_ws(net, ws);
    const int out = net.dims[1];
    const int in = net.dims[0];
    const double* w0 = net.w[0].data();
    for (int i = 0; i < out; ++i) {
        double z = net.b[0][i];
        const double* row = w0 + static_cast<std::size_t>(i) * in;
        for (int j = 0; j < in; ++j) z += row[j] * x[j];
        ws.pre[0][i] = z;
    }
    forward_from_layer1(net, ws);
}

void forward_sparse(const DenseNet& net, std::span<const std::int32_t> active, NetWorkspace& ws) {
    ensure_ws(net, ws);
    const int out = net.dims[1];
    const int in = net.dims[0];
    const double* w0 = net.w[0].data();
    for (int i = 0; i < out; ++i) {
        double z = net.b[0][i];
        const double* row = w0 + static_cast<std::size_t>(i) * in;
        for (std::int32_t j : active) z += row[j];
        ws.pre[0][i] = z;
    }
    forward_from_layer1(net, ws);
}

std::vector<double> forward(const DenseNet& net, std::span<const double> x) {
    NetWorkspace ws;
    forward(net, x, ws);
    return ws.act.back();
}

void NetGrads::match(const DenseNet& net) {
    w.resize(net.w.size());
    b.resize(net.b.size());
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        w[l].assign(net.w[l].size(), 0.0);
        b[l].assign(net.b[l].size(), 0.0);
    }
}

void NetGrads::zero() {
    for (auto& v : w) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void NetGrads::add(const NetGrads& other) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (std::size_t i = 0; i < w[l].size(); ++i) w[l][i] += other.w[l][i];
        for (std::size_t i = 0; i < b[l].size(); ++i) b[l][i] += other.b[l][i];
    }
}

namespace {

// Shared backward core. `add_input_grad` accumulates dW for layer 0 given
// delta; dense and sparse inputs differ only there.
template <class AddInputGrad>
void backward_core(const DenseNet& net, const NetWorkspace& ws, std::span<const double> dz_out,
                   NetGrads& grads, AddInputGrad&& add_input_grad) {
    const int L = net.num_layers();
    std::vector<double> delta(dz_out.begin(), dz_out.end());
    for (int l = L - 1; l >= 0; --l) {
        const int in = net.dims[l];
        const int out = net.dims[l + 1];
        // parameter grads
        if (l > 0) {
            const std::vector<double>& a_prev = ws.act[l - 1];
            double* gw = grads.w[l].data();
            for (int i = 0; i < out; ++i) {
                const double d = delta[i];
                if (d == 0.0) continue;
                double* row = gw + static_cast<std::size_t>(i) * in;
                for (int j = 0; j < in; ++j) row[j] += d * a_prev[j];
            }
        } else {
            add_input_grad(delta);
        }
        for (int i = 0; i < out; ++i) grads.b[l][i] += delta[i];
        if (l == 0) break;
        // propagate: delta_prev = (W^T delta) * act'(pre_{l-1})
        std::vector<double> prev(in, 0.0);
        const double* wl = net.w[l].data();
        for (int i = 0; i < out; ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            const double* row = wl + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) prev[j] += d * row[j];
        }
        // hidden activation derivative
        for (int j = 0; j < in; ++j) {
            switch (net.hidden) {
                case Activation::Relu:
                    if (ws.pre[l - 1][j] <= 0.0) prev[j] = 0.0;
                    break;
                case Activation::Linear: break;
                case Activation::Logistic: {
                    double s = ws.act[l - 1][j];
                    prev[j] *= s * (1.0 - s);
                    break;
                }
            }
        }
        delta = std::move(prev);
    }
}

}  // namespace

void backward(const DenseNet& net, const NetWorkspace& ws, std::span<const double> x,
              std::span<const double> dz_out, NetGrads& grads) {
    backward_core(net, ws, dz_out, grads, [&](const std::vector<double>& delta) {
        const int in = net.dims[0];
        const int out = net.dims[1];
        double* gw = grads.w[0].data();
        for (int i = 0; i < out; ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            double* row = gw + static_cast<std::size_t>(i) * in;
            for (int j = 0; j < in; ++j) row[j] += d * x[j];
        }
    });
}

void backward_sparse(const DenseNet& net, const NetWorkspace& ws,
                     std::span<const std::int32_t> active, std::span<const double> dz_out,
                     NetGrads& grads) {
    backward_core(net, ws, dz_out, grads, [&](const std::vector<double>& delta) {
        const int in = net.dims[0];
        const int out = net.dims[1];
        double* gw = grads.w[0].data();
        for (int i = 0; i < out; ++i) {
            const double d = delta[i];
            if (d == 0.0) continue;
            double* row = gw + static_cast<std::size_t>(i) * in;
            for (std::int32_t j : active) row[j] += d;
        }
    });
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double triplet_loss(std::span<const double> ea, std::span<const double> ep,
                    std::span<const double> en, double margin) {
    if (ea.size() != ep.size() || ea.size() != en.size())
        throw Error("triplet loss requires equal embedding dims");
    double v = squared_distance(ea, ep) - squared_distance(ea, en) + margin;
    return v > 0.0 ? v : 0.0;
}

// ---- Gradient checks -----------------------------------------------------

namespace {

// dL/d(embedding) for the active hinge. Zero outside the hinge.
void triplet_output_grads(std::span<const double> ea, std::span<const double> ep,
                          std::span<const double> en, double margin, std::vector<double>& da,
                          std::vector<double>& dp, std::vector<double>& dn) {
    const std::size_t d = ea.size();
    da.assign(d, 0.0);
    dp.assign(d, 0.0);
    dn.assign(d, 0.0);
    double v = squared_distance(ea, ep) - squared_distance(ea, en) + margin;
    if (v <= 0.0) return;
    for (std::size_t i = 0; i < d; ++i) {
        da[i] = 2.0 * (en[i] - ep[i]);
        dp[i] = -2.0 * (ea[i] - ep[i]);
        dn[i] = 2.0 * (ea[i] - en[i]);
    }
}

double max_rel_err(double analytic, double numeric) {
    double diff = std::fabs(analytic - numeric);
    double scale = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return diff / scale;
}

template <class LossFn>
double numeric_vs_analytic(DenseNet& net, const NetGrads& analytic, LossFn&& loss, double eps) {
    double worst = 0.0;
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        std::pair<std::vector<double>*, const std::vector<double>*> slots[] = {
            {&net.w[l], &analytic.w[l]}, {&net.b[l], &analytic.b[l]}};
        for (auto& [params_ptr, grad_ptr] : slots) {
            std::vector<double>& params = *params_ptr;
            const std::vector<double>& grad = *grad_ptr;
            for (std::size_t i = 0; i < params.size(); ++i) {
                double keep = params[i];
                params[i] = keep + eps;
                double up = loss();
                params[i] = keep - eps;
                double down = loss();
                params[i] = keep;
                double numeric = (up - down) / (2.0 * eps);
                worst = std::max(worst, max_rel_err(grad[i], numeric));
            }
        }
    }
    return worst;
}

}  // namespace

double grad_check_triplet(DenseNet net, std::span<const double> a, std::span<const double> p,
                          std::span<const double> n, double margin, double epsilon) {
    NetWorkspace wa, wp, wn;
    forward(net, a, wa);
    forward(net, p, wp);
    forward(net, n, wn);
    std::vector<double> da, dp, dn;
    triplet_output_grads(wa.act.back(), wp.act.back(), wn.act.back(), margin, da, dp, dn);
    NetGrads grads;
    grads.match(net);
    // linear output: dz == d(activation)
    backward(net, wa, a, da, grads);
    backward(net, wp, p, dp, grads);
    backward(net, wn, n, dn, grads);
    auto loss = [&]() {
        return triplet_loss(forward(net, a), forward(net, p), forward(net, n), margin);
    };
    return numeric_vs_analytic(net, grads, loss, epsilon);
}

double grad_check_bce(DenseNet net, std::span<const double> x, double y, double epsilon) {
    NetWorkspace ws;
    forward(net, x, ws);
    double pr = ws.act.back()[0];
    NetGrads grads;
    grads.match(net);
    std::vector<double> dz{pr - y};  // logistic + BCE shortcut
    backward(net, ws, x, dz, grads);
    auto loss = [&]() {
        double p2 = forward(net, x)[0];
        p2 = std::min(std::max(p2, 1e-12), 1.0 - 1e-12);
        return -(y * std::log(p2) + (1.0 - y) * std::log(1.0 - p2));
    };
    return numeric_vs_analytic(net, grads, loss, epsilon);
}

// ---- Embedding training ------------------------------------------------------

namespace {

struct EncodedTriplet {
    std::vector<std::int32_t> a, p, n;
};

std::vector<EncodedTriplet> encode_all(const TripletDataset& data, const Vocabulary& v,
                                       VariableMode mode, bool parallel) {
    std::vector<EncodedTriplet> enc(data.triplets.size());
    parallel_for(data.triplets.size(), parallel, [&](std::size_t i) {
        const Triplet& t = data.triplets[i];
        enc[i].a = encode_atom_sparse(t.anchor, v, mode);
        enc[i].p = encode_atom_sparse(t.positive, v, mode);
        enc[i].n = encode_atom_sparse(t.negative, v, mode);
    });
    return enc;
}

// Per-triplet losses over an index subset, slot-per-index outputs.
std::vector<double> losses_over(const DenseNet& net, const std::vector<EncodedTriplet>& enc,
                                std::span<const std::uint32_t> idx, double margin,
                                bool parallel) {
    std::vector<double> out(idx.size(), 0.0);
    parallel_for(idx.size(), parallel, [&, margin](std::size_t k) {
        thread_local NetWorkspace wa, wp, wn;
        const EncodedTriplet& t = enc[idx[k]];
        forward_sparse(net, t.a, wa);
        forward_sparse(net, t.p, wp);
        forward_sparse(net, t.n, wn);
        out[k] = triplet_loss(wa.act.back(), wp.act.back(), wn.act.back(), margin);
    });
    return out;
}

struct ChunkBuffers {
    NetGrads grads;
    NetWorkspace wa, wp, wn;
    double loss_sum{0.0};
};

void check_finite(double loss, int epoch) {
    if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                            "; lower the learning rate");
}

}  // namespace

EmbeddingModel train_embedding(const TripletDataset& data, const Vocabulary& v,
                               const TrainConfig& cfg, TrainLog* log) {
    if (data.triplets.empty()) throw TrainingError("empty triplet dataset");
    if (!(cfg.hard_fraction > 0.0 && cfg.hard_fraction <= 1.0))
        throw TrainingError("hard_fraction must be in (0,1]");
    if (cfg.hard_period < 1) throw TrainingError("hard_period must be >= 1");

    EmbeddingModel model;
    model.vocab_hash = v.hash();
    model.net = make_net({encoding_width(v), 256, 128, 50}, Activation::Relu, Activation::Linear);
    init_weights(model.net, cfg.rng_seed);

    const auto enc = encode_all(data, v, model.variable_mode, cfg.parallel);
    const std::size_t n = enc.size();

    std::vector<std::uint32_t> active(n);
    std::iota(active.begin(), active.end(), 0u);
    std::vector<std::uint32_t> full = active;

    const int chunk = std::max(1, cfg.grad_chunk);
    const int max_chunks = (cfg.batch_size + chunk - 1) / chunk;
    std::vector<ChunkBuffers> bufs(std::max(1, max_chunks));
    for (auto& b : bufs) b.grads.match(model.net);
    NetGrads master;
    master.match(model.net);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        // Hard-subset refresh: entering epoch e with (e-1) a positive
        // multiple of hard_period, recompute losses over the full original
        // dataset and keep the top ceil(hard_fraction * N).
        if (cfg.hard_samples && epoch > 1 && (epoch - 1) % cfg.hard_period == 0 &&
            cfg.hard_fraction < 1.0) {
            std::vector<double> losses = losses_over(model.net, enc, full, cfg.margin,
                                                     cfg.parallel);
            std::size_t k = static_cast<std::size_t>(
                std::ceil(cfg.hard_fraction * static_cast<double>(n)));
            std::vector<std::uint32_t> order = full;
            std::stable_sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
                if (losses[x] != losses[y]) return losses[x] > losses[y];
                return x < y;
            });
            order.resize(k);
            std::sort(order.begin(), order.end());
            active = order;
            if (log) {
                RefreshEvent ev;
                ev.epoch = epoch;
                ev.losses = std::move(losses);
                ev.subset = active;
                log->refreshes.push_back(std::move(ev));
            }
        }

        std::vector<std::uint32_t> order = active;
        Rng::derive(cfg.rng_seed, 0x10000u + static_cast<std::uint64_t>(epoch)).shuffle(order);

        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, order.size() - start);
            const std::size_t nchunks = (bsz + chunk - 1) / chunk;
            parallel_for(nchunks, cfg.parallel, [&](std::size_t c) {
                ChunkBuffers& cb = bufs[c];
                cb.grads.zero();
                cb.loss_sum = 0.0;
                const std::size_t lo = start + c * chunk;
                const std::size_t hi = std::min(lo + chunk, start + bsz);
                std::vector<double> da, dp, dn;
                for (std::size_t s = lo; s < hi; ++s) {
                    const EncodedTriplet& t = enc[order[s]];
                    forward_sparse(model.net, t.a, cb.wa);
                    forward_sparse(model.net, t.p, cb.wp);
                    forward_sparse(model.net, t.n, cb.wn);
                    double l = triplet_loss(cb.wa.act.back(), cb.wp.act.back(),
                                            cb.wn.act.back(), cfg.margin);
                    cb.loss_sum += l;
                    if (l <= 0.0) continue;
                    triplet_output_grads(cb.wa.act.back(), cb.wp.act.back(), cb.wn.act.back(),
                                         cfg.margin, da, dp, dn);
                    backward_sparse(model.net, cb.wa, t.a, da, cb.grads);
                    backward_sparse(model.net, cb.wp, t.p, dp, cb.grads);
                    backward_sparse(model.net, cb.wn, t.n, dn, cb.grads);
                }
            });
            master.zero();
            for (std::size_t c = 0; c < nchunks; ++c) {
                master.add(bufs[c].grads);
                loss_sum += bufs[c].loss_sum;
            }
            const double step = cfg.learning_rate / static_cast<double>(bsz);
            for (std::size_t l = 0; l < model.net.w.size(); ++l) {
                double* wp = model.net.w[l].data();
                const double* gp = master.w[l].data();
                for (std::size_t i = 0; i < model.net.w[l].size(); ++i) wp[i] -= step * gp[i];
                double* bp = model.net.b[l].data();
                const double* gb = master.b[l].data();
                for (std::size_t i = 0; i < model.net.b[l].size(); ++i) bp[i] -= step * gb[i];
            }
        }
        double mean_loss = loss_sum / static_cast<double>(order.size());
        check_finite(mean_loss, epoch);
        if (log)
            log->epochs.push_back(
                EpochLogEntry{epoch, active.size() != n, mean_loss, active.size()});
    }
    return model;
}

std::vector<double> embed(const EmbeddingModel& m, const Atom& a, const Vocabulary& v) {
    if (m.vocab_hash != v.hash())
        throw VocabMismatchError("embedding model was trained on a different vocabulary");
    NetWorkspace ws;
    forward_sparse(m.net, encode_atom_sparse(a, v, m.variable_mode), ws);
    return ws.act.back();
}

std::vector<std::vector<double>> embed_batch(const EmbeddingModel& m, std::span<const Atom> atoms,
                                             const Vocabulary& v, bool parallel) {
    if (m.vocab_hash != v.hash())
        throw VocabMismatchError("embedding model was trained on a different vocabulary");
    std::vector<std::vector<double>> out(atoms.size());
    parallel_for(atoms.size(), parallel, [&](std::size_t i) {
        thread_local NetWorkspace ws;
        forward_sparse(m.net, encode_atom_sparse(atoms[i], v, m.variable_mode), ws);
        out[i] = ws.act.back();
    });
    return out;
}

std::vector<double> triplet_losses(const EmbeddingModel& m, const TripletDataset& data,
                                   const Vocabulary& v, double margin, bool parallel) {
    const auto enc = encode_all(data, v, m.variable_mode, parallel);
    std::vector<std::uint32_t> idx(enc.size());
    std::iota(idx.begin(), idx.end(), 0u);
    return losses_over(m.net, enc, idx, margin, parallel);
}

double mean_triplet_loss(const EmbeddingModel& m, const TripletDataset& data,
                         const Vocabulary& v, double margin, bool parallel) {
    auto losses = triplet_losses(m, data, v, margin, parallel);
    if (losses.empty()) return 0.0;
    double s = 0.0;
    for (double l : losses) s += l;
    return s / static_cast<double>(losses.size());
}

// ---- Scoring model -------------------------------------------------------------

std::vector<double> rule_repr_embedding(const EmbeddingModel& em, const Clause& rule,
                                        const Vocabulary& v, RuleRepr repr) {
    std::vector<double> head = embed(em, fold_into_pool(rule.head, v), v);
    if (repr == RuleRepr::Head || rule.body.empty()) return head;
    for (const Atom& a : rule.body) {
        std::vector<double> e = embed(em, fold_into_pool(a, v), v);
        for (std::size_t i = 0; i < head.size(); ++i) head[i] += e[i];
    }
    double inv = 1.0 / static_cast<double>(1 + rule.body.size());
    for (double& x : head) x *= inv;
    return head;
}

std::uint64_t net_hash(const DenseNet& net) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t x) {
        h ^= x;
        h *= 1099511628211ull;
    };
    for (int d : net.dims) mix(static_cast<std::uint64_t>(d));
    for (const auto& layer : net.w)
        for (double x : layer) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, 8);
            mix(bits);
        }
    for (const auto& layer : net.b)
        for (double x : layer) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, 8);
            mix(bits);
        }
    return h;
}

ScoringModel train_scorer(const std::vector<TrainingSample>& samples, const KnowledgeBase& kb,
                          const EmbeddingModel& em, const TrainConfig& cfg, RuleRepr repr,
                          TrainLog* log) {
    if (samples.empty()) throw TrainingError("empty scorer training set");
    const Vocabulary& v = kb.vocabulary;
    if (em.vocab_hash != v.hash())
        throw VocabMismatchError("embedding model does not match the KB vocabulary");

    const int edim = em.net.output_dim();
    ScoringModel model;
    model.vocab_hash = v.hash();
    model.embedding_hash = net_hash(em.net);
    model.rule_repr = repr;
    model.net = make_net({2 * edim, 64, 1}, Activation::Relu, Activation::Logistic);
    init_weights(model.net, cfg.rng_seed);

    // Precompute inputs: goal embedding ++ clause representation.
    std::vector<std::vector<double>> clause_emb(kb.clauses.size());
    for (std::size_t c = 0; c < kb.clauses.size(); ++c)
        clause_emb[c] = rule_repr_embedding(em, kb.clauses[c], v, repr);

    std::unordered_map<Atom, std::uint32_t, AtomHash> goal_ids;
    std::vector<std::vector<double>> goal_emb;
    std::vector<std::pair<std::uint32_t, std::uint32_t>> input_of(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const TrainingSample& s = samples[i];
        if (s.clause_index < 0 || s.clause_index >= static_cast<int>(kb.clauses.size()))
            throw TrainingError("sample clause index out of range");
        auto [it, fresh] = goal_ids.try_emplace(s.goal, static_cast<std::uint32_t>(goal_emb.size()));
        if (fresh) goal_emb.push_back(embed(em, s.goal, v));
        input_of[i] = {it->second, static_cast<std::uint32_t>(s.clause_index)};
    }

    const int chunk = std::max(1, cfg.grad_chunk);
    const int max_chunks = (cfg.batch_size + chunk - 1) / chunk;
    struct ScorerChunk {
        NetGrads grads;
        NetWorkspace ws;
        double loss_sum{0.0};
    };
    std::vector<ScorerChunk> bufs(std::max(1, max_chunks));
    for (auto& b : bufs) b.grads.match(model.net);
    NetGrads master;
    master.match(model.net);

    std::vector<std::uint32_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0u);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        Rng::derive(cfg.rng_seed, 0x20000u + static_cast<std::uint64_t>(epoch)).shuffle(order);
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t bsz = std::min<std::size_t>(cfg.batch_size, order.size() - start);
            const std::size_t nchunks = (bsz + chunk - 1) / chunk;
            parallel_for(nchunks, cfg.parallel, [&](std::size_t c) {
                ScorerChunk& cb = bufs[c];
                cb.grads.zero();
                cb.loss_sum = 0.0;
                const std::size_t lo = start + c * chunk;
                const std::size_t hi = std::min(lo + chunk, start + bsz);
                std::vector<double> x(2 * edim);
                for (std::size_t s = lo; s < hi; ++s) {
                    const std::uint32_t si = order[s];
                    const auto& [gi, ci] = input_of[si];
                    std::copy(goal_emb[gi].begin(), goal_emb[gi].end(), x.begin());
                    std::copy(clause_emb[ci].begin(), clause_emb[ci].end(), x.begin() + edim);
                    forward(model.net, x, cb.ws);
                    double p = cb.ws.act.back()[0];
                    double y = samples[si].score;
                    double pc = std::min(std::max(p, 1e-12), 1.0 - 1e-12);
                    cb.loss_sum += -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
                    std::vector<double> dz{p - y};
                    backward(model.net, cb.ws, x, dz, cb.grads);
                }
            });
            master.zero();
            for (std::size_t c = 0; c < nchunks; ++c) {
                master.add(bufs[c].grads);
                loss_sum += bufs[c].loss_sum;
            }
            const double step = cfg.learning_rate / static_cast<double>(bsz);
            for (std::size_t l = 0; l < model.net.w.size(); ++l) {
                for (std::size_t i = 0; i < model.net.w[l].size(); ++i)
                    model.net.w[l][i] -= step * master.w[l][i];
                for (std::size_t i = 0; i < model.net.b[l].size(); ++i)
                    model.net.b[l][i] -= step * master.b[l][i];
            }
        }
        double mean_loss = loss_sum / static_cast<double>(order.size());
        check_finite(mean_loss, epoch);
        if (log) log->epochs.push_back(EpochLogEntry{epoch, false, mean_loss, order.size()});
    }
    return model;
}

double score(const ScoringModel& sm, const EmbeddingModel& em, const Atom& goal,
             const Clause& rule, const Vocabulary& v) {
    if (sm.vocab_hash != v.hash() || em.vocab_hash != v.hash())
        throw VocabMismatchError("model/vocabulary mismatch in score()");
    if (sm.embedding_hash != net_hash(em.net))
        throw VocabMismatchError("scoring model was trained against a different embedding model");
    std::vector<double> x = embed(em, fold_into_pool(goal, v), v);
    std::vector<double> r = rule_repr_embedding(em, rule, v, sm.rule_repr);
    x.insert(x.end(), r.begin(), r.end());
    return forward(sm.net, x)[0];
}

// ---- Persistence -----------------------------------------------------------

namespace {

void write_net(std::FILE* f, const DenseNet& net) {
    std::fprintf(f, "layers %zu", net.dims.size());
    for (int d : net.dims) std::fprintf(f, " %d", d);
    std::fprintf(f, "\nhidden %s\noutput %s\n", activation_name(net.hidden),
                 activation_name(net.output));
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        std::fprintf(f, "weights %zu %d %d\n", l, net.dims[l + 1], net.dims[l]);
        const int in = net.dims[l];
        for (int i = 0; i < net.dims[l + 1]; ++i) {
            for (int j = 0; j < in; ++j)
                std::fprintf(f, j ? " %.17g" : "%.17g",
                             net.w[l][static_cast<std::size_t>(i) * in + j]);
            std::fputc('\n', f);
        }
        std::fprintf(f, "biases %zu %d\n", l, net.dims[l + 1]);
        for (int i = 0; i < net.dims[l + 1]; ++i)
            std::fprintf(f, i ? " %.17g" : "%.17g", net.b[l][i]);
        std::fputc('\n', f);
    }
}

DenseNet read_net(std::istream& is) {
    std::string tok;
    std::size_t ndims;
    if (!(is >> tok) || tok != "layers") throw ArtifactError("model file: expected 'layers'");
    is >> ndims;
    std::vector<int> dims(ndims);
    for (auto& d : dims) is >> d;
    std::string hidden, output;
    is >> tok >> hidden;  // hidden
    is >> tok >> output;  // output
    DenseNet net = make_net(dims, activation_from_name(hidden), activation_from_name(output));
    for (std::size_t l = 0; l < net.w.size(); ++l) {
        std::size_t li;
        int rows, cols;
        is >> tok >> li >> rows >> cols;
        if (tok != "weights" || li != l || rows != net.dims[l + 1] || cols != net.dims[l])
            throw ArtifactError("model file: bad weights header");
        for (double& x : net.w[l]) is >> x;
        is >> tok >> li >> rows;
        if (tok != "biases" || li != l || rows != net.dims[l + 1])
            throw ArtifactError("model file: bad biases header");
        for (double& x : net.b[l]) is >> x;
    }
    if (!is) throw ArtifactError("model file: truncated");
    return net;
}

std::FILE* open_cfile(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    if (!f) throw ArtifactError("cannot write " + path.string());
    return f;
}

}  // namespace

void save_embedding(const std::filesystem::path& path, const EmbeddingModel& m,
                    const std::string& config_hash) {
    std::FILE* f = open_cfile(path);
    std::fprintf(f, "hornguide-model v1\nkind embedding\nvocab_hash %016llx\n",
                 static_cast<unsigned long long>(m.vocab_hash));
    std::fprintf(f, "variable_mode %s\n",
                 m.variable_mode == VariableMode::Identity ? "identity" : "canonical");
    if (!config_hash.empty()) std::fprintf(f, "config %s\n", config_hash.c_str());
    write_net(f, m.net);
    std::fprintf(f, "end\n");
    std::fclose(f);
}

EmbeddingModel load_embedding(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read " + path.string());
    std::string magic, ver, tok, kind;
    is >> magic >> ver;
    if (magic != "hornguide-model") throw ArtifactError("not a model file: " + path.string());
    is >> tok >> kind;
    if (kind != "embedding") throw ArtifactError("expected embedding model in " + path.string());
    EmbeddingModel m;
    while (is >> tok) {
        if (tok == "vocab_hash") {
            std::string hex;
            is >> hex;
            m.vocab_hash = std::stoull(hex, nullptr, 16);
        } else if (tok == "variable_mode") {
            std::string mode;
            is >> mode;
            m.variable_mode =
                mode == "canonical" ? VariableMode::Canonical : VariableMode::Identity;
        } else if (tok == "config") {
            std::string ignore;
            is >> ignore;
        } else if (tok == "layers") {
            is.seekg(-static_cast<std::streamoff>(tok.size()), std::ios::cur);
            break;
        }
    }
    m.net = read_net(is);
    return m;
}

void save_scorer(const std::filesystem::path& path, const ScoringModel& m,
                 const std::string& config_hash) {
    std::FILE* f = open_cfile(path);
    std::fprintf(f,
                 "hornguide-model v1\nkind scorer\nvocab_hash %016llx\nembedding_hash %016llx\n"
                 "rule_repr %s\n",
                 static_cast<unsigned long long>(m.vocab_hash),
                 static_cast<unsigned long long>(m.embedding_hash), rule_repr_name(m.rule_repr));
    if (!config_hash.empty()) std::fprintf(f, "config %s\n", config_hash.c_str());
    write_net(f, m.net);
    std::fprintf(f, "end\n");
    std::fclose(f);
}

ScoringModel load_scorer(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ArtifactError("cannot read " + path.string());
    std::string magic, ver, tok, kind;
    is >> magic >> ver;
    if (magic != "hornguide-model") throw ArtifactError("not a model file: " + path.string());
    is >> tok >> kind;
    if (kind != "scorer") throw ArtifactError("expected scorer model in " + path.string());
    ScoringModel m;
    while (is >> tok) {
        if (tok == "vocab_hash") {
            std::string hex;
            is >> hex;
            m.vocab_hash = std::stoull(hex, nullptr, 16);
        } else if (tok == "embedding_hash") {
            std::string hex;
            is >> hex;
            m.embedding_hash = std::stoull(hex, nullptr, 16);
        } else if (tok == "rule_repr") {
            std::string r;
            is >> r;
            m.rule_repr = rule_repr_from_name(r);
        } else if (tok == "config") {
            std::string ignore;
            is >> ignore;
        } else if (tok == "layers") {
            is.seekg(-static_cast<std::streamoff>(tok.size()), std::ios::cur);
            break;
        }
    }
    m.net = read_net(is);
    return m;
}

void write_train_log(const std::filesystem::path& path, const TrainLog& log) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    os << "epoch,phase,mean_loss,subset_size\n";
    char buf[128];
    for (const EpochLogEntry& e : log.epochs) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.17g,%zu\n", e.epoch,
                      e.hard_phase ? "hard" : "full", e.mean_loss, e.subset_size);
        os << buf;
    }
}

}  // namespace hornguide
