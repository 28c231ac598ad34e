#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hornguide/encoder.hpp"
#include "hornguide/logic.hpp"
#include "hornguide/triplet.hpp"

namespace hornguide {

enum class Activation { Relu, Linear, Logistic };

const char* activation_name(Activation a);
Activation activation_from_name(std::string_view s);

// Plain fully connected net. Weights are row-major [out x in]; hidden layers
// share one activation, the output layer has its own.
struct DenseNet {
    std::vector<int> dims;
    Activation hidden{Activation::Relu};
    Activation output{Activation::Linear};
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;

    int num_layers() const { return static_cast<int>(w.size()); }
    int input_dim() const { return dims.front(); }
    int output_dim() const { return dims.back(); }
};

DenseNet make_net(std::vector<int> dims, Activation hidden, Activation output);
// Glorot-style symmetric uniform init, deterministic in the seed.
void init_weights(DenseNet& net, std::uint64_t seed);

// Per-layer pre-activations and activations retained for backprop.
struct NetWorkspace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> act;
};

void forward(const DenseNet& net, std::span<const double> x, NetWorkspace& ws);
// Input restricted to a 0/1 vector given by its active indices; skips the
// first-layer multiplies against zeros.
void forward_sparse(const DenseNet& net, std::span<const std::int32_t> active, NetWorkspace& ws);
std::vector<double> forward(const DenseNet& net, std::span<const double> x);

struct NetGrads {
    std::vector<std::vector<double>> w;
    std::vector<std::vector<double>> b;
    void match(const DenseNet& net);
    void zero();
    void add(const NetGrads& other);
};

// Backprop from dz_out = dL/d(output pre-activation); callers convert loss
// gradients through the output activation themselves (for logistic + BCE
// this is just p - y). Accumulates (does not zero) into grads.
void backward(const DenseNet& net, const NetWorkspace& ws, std::span<const double> x,
              std::span<const double> dz_out, NetGrads& grads);
void backward_sparse(const DenseNet& net, const NetWorkspace& ws,
                     std::span<const std::int32_t> active, std::span<const double> dz_out,
                     NetGrads& grads);

// max(0, ||ea-ep||^2 - ||ea-en||^2 + margin)
double triplet_loss(std::span<const double> ea, std::span<const double> ep,
                    std::span<const double> en, double margin);

double squared_distance(std::span<const double> a, std::span<const double> b);

// ---- Gradient checking ------------------------------------------------------

// Central finite differences over every weight and bias against the analytic
// gradient of the triplet loss on inputs (a, p, n). Returns the max relative
// error.
double grad_check_triplet(DenseNet net, std::span<const double> a, std::span<const double> p,
                          std::span<const double> n, double margin, double epsilon);

// Same for logistic output + binary cross-entropy on (x, y).
double grad_check_bce(DenseNet net, std::span<const double> x, double y, double epsilon);

// ---- Models -------------------------------------------------------------------

struct EmbeddingModel {
    DenseNet net;
    std::uint64_t vocab_hash{0};
    VariableMode variable_mode{VariableMode::Identity};
};

enum class RuleRepr { Head, HeadBodyMean };
const char* rule_repr_name(RuleRepr r);
RuleRepr rule_repr_from_name(std::string_view s);

struct ScoringModel {
    DenseNet net;
    std::uint64_t vocab_hash{0};
    std::uint64_t embedding_hash{0};
    RuleRepr rule_repr{RuleRepr::Head};
};

// Stable hash of a network's dims + weights; scoring models record the
// embedding they were trained against.
std::uint64_t net_hash(const DenseNet& net);

struct TrainConfig {
    int epochs{100};
    int batch_size{128};
    double learning_rate{1e-3};
    double margin{1.0};
    int hard_period{10};
    double hard_fraction{0.5};
    bool hard_samples{true};
    std::uint64_t rng_seed{0};
    // Fixed gradient-accumulation chunk: partial sums are computed per chunk
    // and merged in chunk order, so results do not depend on thread count.
    int grad_chunk{16};
    bool parallel{true};
};

struct EpochLogEntry {
    int epoch{0};
    bool hard_phase{false};
    double mean_loss{0.0};
    std::size_t subset_size{0};
};

struct RefreshEvent {
    int epoch{0};                     // refresh happened entering this epoch
    std::vector<double> losses;      // per-triplet loss over the full dataset
    std::vector<std::uint32_t> subset;  // selected indices, ascending
};

struct TrainLog {
    std::vector<EpochLogEntry> epochs;
    std::vector<RefreshEvent> refreshes;
};

// Architecture input -> 256 -> 128 -> 50, trained with mini-batch gradient
// descent on the triplet loss. Every hard_period epochs the per-triplet loss
// is recomputed over the full dataset and the next hard_period epochs train
// on the ceil(hard_fraction * N) highest-loss triplets.
EmbeddingModel train_embedding(const TripletDataset& data, const Vocabulary& v,
                               const TrainConfig& cfg, TrainLog* log = nullptr);

std::vector<double> embed(const EmbeddingModel& m, const Atom& a, const Vocabulary& v);
// Per-index output slots; `parallel=false` is the serial reference.
std::vector<std::vector<double>> embed_batch(const EmbeddingModel& m,
                                             std::span<const Atom> atoms, const Vocabulary& v,
                                             bool parallel = true);

// Per-triplet loss under the model, one slot per triplet.
std::vector<double> triplet_losses(const EmbeddingModel& m, const TripletDataset& data,
                                   const Vocabulary& v, double margin, bool parallel = true);

double mean_triplet_loss(const EmbeddingModel& m, const TripletDataset& data,
                         const Vocabulary& v, double margin, bool parallel = true);

struct TrainingSample {
    Atom goal;
    int clause_index{-1};
    int score{0};
};

// Input = embed(goal) ++ rule representation (head embedding, or mean of
// head and body atom embeddings); architecture 100 -> 64 -> 1 logistic,
// binary cross-entropy, embedding weights frozen.
ScoringModel train_scorer(const std::vector<TrainingSample>& samples, const KnowledgeBase& kb,
                          const EmbeddingModel& em, const TrainConfig& cfg,
                          RuleRepr repr = RuleRepr::Head, TrainLog* log = nullptr);

std::vector<double> rule_repr_embedding(const EmbeddingModel& em, const Clause& rule,
                                        const Vocabulary& v, RuleRepr repr);

double score(const ScoringModel& sm, const EmbeddingModel& em, const Atom& goal,
             const Clause& rule, const Vocabulary& v);

// ---- Persistence ----------------------------------------------------------
// Text format: version tag, kind, hashes, layer dims, activation names and
// row-major weight/bias arrays printed with 17 significant digits (doubles
// round-trip exactly).

void save_embedding(const std::filesystem::path& path, const EmbeddingModel& m,
                    const std::string& config_hash = {});
EmbeddingModel load_embedding(const std::filesystem::path& path);

void save_scorer(const std::filesystem::path& path, const ScoringModel& m,
                 const std::string& config_hash = {});
ScoringModel load_scorer(const std::filesystem::path& path);

void write_train_log(const std::filesystem::path& path, const TrainLog& log);

}  // namespace hornguide
