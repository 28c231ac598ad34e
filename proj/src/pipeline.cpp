#include "hornguide/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "hornguide/metrics.hpp"
#include "hornguide/parallel.hpp"
#include "hornguide/reasoner.hpp"
#include "hornguide/synth.hpp"

namespace hornguide {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t subseed(std::uint64_t seed, std::uint64_t tag) {
    return Rng::derive(seed, tag).next_u64();
}

// Stream tags for derived seeds; fixed so any stage can be rerun alone.
enum : std::uint64_t {
    kVocabTag = 0x1001,
    kKbTag = 0x2000,       // + kb index
    kQueryTag = 0x3000,    // + kb index
    kTripletTag = 0x4000,  // + embedding index
    kEmbedTag = 0x5000,    // + embedding index
    kHoldoutTag = 0x6000,
    kCollectTag = 0x7000,  // + kb index
    kScorerTag = 0x8000,   // + embedding index * 64 + kb index
    kEvalStdTag = 0x9000,  // + kb index
    kEvalGuidedTag = 0xA000,  // + embedding index * 64 + kb index
};

std::uint64_t file_fnv(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArtifactError("cannot read " + path.string());
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 14];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!is) break;
    }
    return h;
}

struct Ctx {
    Params cfg;
    fs::path dir;
    std::string chash;
    std::uint64_t seed{0};
    json manifest;

    explicit Ctx(const Params& p, const fs::path& out_dir) : cfg(p), dir(out_dir) {
        chash = cfg.hash_hex();
        seed = cfg.getu("seed");
        set_jobs(cfg.geti("jobs"));
        fs::create_directories(dir);
        fs::path mpath = manifest_path();
        if (fs::exists(mpath)) {
            std::ifstream is(mpath);
            is >> manifest;
            if (manifest.value("config_hash", "") != chash)
                throw ConfigError("output dir " + dir.string() +
                                  " holds a run with a different config; use a fresh dir");
        } else {
            manifest["tool"] = kToolVersion;
            manifest["config_hash"] = chash;
            for (const auto& [k, v] : cfg.entries()) manifest["config"][k] = v;
            manifest["stages"] = json::object();
        }
    }

    fs::path manifest_path() const { return dir / "manifest.json"; }

    void save_manifest() const {
        std::ofstream os(manifest_path());
        os << manifest.dump(2) << "\n";
    }

    bool artifacts_exist(const std::vector<fs::path>& paths) const {
        for (const fs::path& p : paths)
            if (!fs::exists(p)) return false;
        return !paths.empty();
    }

    // Runs fn unless every artifact already exists; records wall time and
    // artifact list in the manifest either way.
    template <class F>
    void stage(const std::string& name, const std::vector<fs::path>& artifacts, F&& fn) {
        json alist = json::array();
        for (const fs::path& p : artifacts) alist.push_back(fs::relative(p, dir).string());
        if (artifacts_exist(artifacts) && manifest["stages"].contains(name)) return;
        if (!artifacts_exist(artifacts)) {
            auto t0 = std::chrono::steady_clock::now();
            fn();
            auto t1 = std::chrono::steady_clock::now();
            manifest["stages"][name]["wall_s"] =
                std::chrono::duration<double>(t1 - t0).count();
        } else {
            manifest["stages"][name]["wall_s"] = 0.0;
        }
        manifest["stages"][name]["artifacts"] = alist;
        save_manifest();
    }

    // ---- derived config -----------------------------------------------
    int kb_count() const { return cfg.geti("kb_count"); }

    KbGenConfig kb_config(int i) const {
        KbGenConfig k;
        k.kb_size = cfg.geti("kb_size");
        k.num_predicates = cfg.geti("np");
        k.num_constants = cfg.geti("nc");
        k.num_variables = cfg.geti("nv");
        k.max_arity = cfg.geti("ma");
        k.fact_fraction = cfg.getd("fact_fraction");
        k.max_body_len = cfg.geti("max_body_len");
        k.vocab_seed = subseed(seed, kVocabTag);
        k.rng_seed = subseed(seed, kKbTag + i);
        return k;
    }

    Vocabulary make_vocab() const {
        Rng rng(subseed(seed, kVocabTag));
        return gen_vocabulary(cfg.geti("np"), cfg.geti("nc"), cfg.geti("nv"), cfg.geti("ma"),
                              rng);
    }

    TrainConfig embed_train_config(int embed_idx) const {
        TrainConfig t;
        t.epochs = cfg.geti("epochs");
        t.batch_size = cfg.geti("batch_size");
        t.learning_rate = cfg.getd("learning_rate");
        t.margin = cfg.getd("margin");
        t.hard_period = cfg.geti("hard_period");
        t.hard_fraction = cfg.getd("hard_fraction");
        t.hard_samples = cfg.getb("hard_samples");
        t.rng_seed = subseed(seed, kEmbedTag + embed_idx);
        return t;
    }

    TrainConfig scorer_train_config(int embed_idx, int kb_idx) const {
        TrainConfig t;
        t.epochs = cfg.geti("scorer_epochs");
        t.batch_size = cfg.geti("scorer_batch_size");
        t.learning_rate = cfg.getd("scorer_learning_rate");
        t.rng_seed = subseed(seed, kScorerTag + embed_idx * 64 + kb_idx);
        return t;
    }

    SearchConfig search_config(SearchMode mode, std::uint64_t tag) const {
        SearchConfig s;
        s.mode = mode;
        s.depth_limit = cfg.geti("depth_limit");
        s.node_cap = cfg.getll("node_cap");
        s.rng_seed = subseed(seed, tag);
        return s;
    }

    double effective_repeat_chance() const {
        return cfg.getb("repeated_terms") ? cfg.getd("repeat_chance") : 0.0;
    }

    TripletDataset make_triplets(const Vocabulary& v, std::uint64_t tseed) const {
        std::size_t n = static_cast<std::size_t>(cfg.getll("n_triplets"));
        if (cfg.getb("balanced_triplets")) {
            std::array<double, 3> mix{cfg.getd("mix_easy"), cfg.getd("mix_medium"),
                                      cfg.getd("mix_hard")};
            return gen_dataset(v, n, cfg.geti("tpa"), mix, effective_repeat_chance(), tseed);
        }
        return gen_dataset_legacy(v, n, tseed, effective_repeat_chance());
    }

    // ---- artifact paths --------------------------------------------------
    fs::path kb_path(int i) const { return dir / ("kb_" + std::to_string(i) + ".txt"); }
    fs::path derived_path(int i) const { return dir / ("derived_" + std::to_string(i) + ".txt"); }
    fs::path queries_path(int i) const { return dir / ("queries_" + std::to_string(i) + ".txt"); }
    fs::path triplets_path() const { return dir / "triplets.tsv"; }
    fs::path embed_path() const { return dir / "embed.model"; }
    fs::path embed_log_path() const { return dir / "embed_log.csv"; }
    fs::path samples_path(int i) const { return dir / ("samples_" + std::to_string(i) + ".tsv"); }
    fs::path scorer_path(int i) const { return dir / ("scorer_" + std::to_string(i) + ".model"); }
    fs::path scorer_log_path(int i) const {
        return dir / ("scorer_log_" + std::to_string(i) + ".csv");
    }
    fs::path results_path(const std::string& mode, int i) const {
        return dir / ("results_" + mode + "_" + std::to_string(i) + ".csv");
    }
    fs::path compare_path() const { return dir / "compare.csv"; }
    fs::path metrics_path() const { return dir / "metrics.csv"; }
    fs::path ablate_path() const { return dir / "ablate.csv"; }
    fs::path crosstest_path() const { return dir / "crosstest.csv"; }

    std::map<std::string, std::string> header_extra() const { return {{"config", chash}}; }

    // ---- loading -----------------------------------------------------------
    KnowledgeBase load_kb(int i) const {
        if (!fs::exists(kb_path(i)))
            throw ArtifactError("missing artifact " + kb_path(i).string() +
                                "; run the pipeline (or gen-kb) first");
        return read_kb(kb_path(i));
    }

    QuerySet load_queries(int i, Vocabulary& v) const {
        if (!fs::exists(queries_path(i)))
            throw ArtifactError("missing artifact " + queries_path(i).string() +
                                "; run gen-queries first");
        return read_queries(queries_path(i), v);
    }
};

// ---- stage bodies ------------------------------------------------------------

void do_gen_kb(Ctx& ctx) {
    std::vector<fs::path> artifacts;
    for (int i = 0; i < ctx.kb_count(); ++i) artifacts.push_back(ctx.kb_path(i));
    ctx.stage("gen-kb", artifacts, [&] {
        // KB-level parallelism with independent seeds.
        std::vector<KnowledgeBase> kbs(ctx.kb_count());
        parallel_for(ctx.kb_count(), true, [&](std::size_t i) {
            kbs[i] = gen_kb(ctx.kb_config(static_cast<int>(i)));
        });
        for (int i = 0; i < ctx.kb_count(); ++i) {
            auto extra = ctx.header_extra();
            extra["vocab_seed"] = std::to_string(subseed(ctx.seed, kVocabTag));
            extra["kb_seed"] = std::to_string(subseed(ctx.seed, kKbTag + i));
            write_kb(ctx.kb_path(i), kbs[i], extra);
        }
    });
}

void do_gen_queries(Ctx& ctx) {
    std::vector<fs::path> artifacts;
    for (int i = 0; i < ctx.kb_count(); ++i) {
        artifacts.push_back(ctx.derived_path(i));
        artifacts.push_back(ctx.queries_path(i));
    }
    ctx.stage("gen-queries", artifacts, [&] {
        for (int i = 0; i < ctx.kb_count(); ++i) {
            KnowledgeBase kb = ctx.load_kb(i);
            std::vector<Atom> derived =
                forward_chain(kb, static_cast<std::size_t>(ctx.cfg.getll("max_new_facts")));
            write_atoms(ctx.derived_path(i), derived, kb.vocabulary, ctx.header_extra());
            Rng rng(subseed(ctx.seed, kQueryTag + i));
            QuerySet qs = gen_queries(derived, ctx.cfg.geti("n_train"), ctx.cfg.geti("n_test"),
                                      ctx.cfg.getd("var_sub_prob"), rng);
            write_queries(ctx.queries_path(i), qs, kb.vocabulary, ctx.header_extra());
        }
    });
}

void do_gen_triplets(Ctx& ctx) {
    ctx.stage("gen-triplets", {ctx.triplets_path()}, [&] {
        Vocabulary v = ctx.make_vocab();
        TripletDataset ds = ctx.make_triplets(v, subseed(ctx.seed, kTripletTag));
        write_triplets(ctx.triplets_path(), ds, v, ctx.header_extra());
    });
}

void do_train_embed(Ctx& ctx) {
    ctx.stage("train-embed", {ctx.embed_path(), ctx.embed_log_path()}, [&] {
        Vocabulary v = ctx.make_vocab();
        if (!fs::exists(ctx.triplets_path()))
            throw ArtifactError("missing artifact " + ctx.triplets_path().string());
        TripletDataset ds = read_triplets(ctx.triplets_path(), v);
        TrainLog log;
        EmbeddingModel m = train_embedding(ds, v, ctx.embed_train_config(0), &log);
        save_embedding(ctx.embed_path(), m, ctx.chash);
        write_train_log(ctx.embed_log_path(), log);
    });
}

void do_collect(Ctx& ctx) {
    std::vector<fs::path> artifacts;
    for (int i = 0; i < ctx.kb_count(); ++i) artifacts.push_back(ctx.samples_path(i));
    ctx.stage("collect-training", artifacts, [&] {
        for (int i = 0; i < ctx.kb_count(); ++i) {
            KnowledgeBase kb = ctx.load_kb(i);
            QuerySet qs = ctx.load_queries(i, kb.vocabulary);
            std::vector<TrainingSample> samples =
                collect_training_data(kb, qs.train, ctx.cfg.geti("depth_limit"),
                                      ctx.cfg.getll("node_cap"),
                                      subseed(ctx.seed, kCollectTag + i));
            write_samples(ctx.samples_path(i), samples, kb, ctx.header_extra());
        }
    });
}

void do_train_scorer(Ctx& ctx) {
    std::vector<fs::path> artifacts;
    for (int i = 0; i < ctx.kb_count(); ++i) {
        artifacts.push_back(ctx.scorer_path(i));
        artifacts.push_back(ctx.scorer_log_path(i));
    }
    ctx.stage("train-scorer", artifacts, [&] {
        if (!fs::exists(ctx.embed_path()))
            throw ArtifactError("missing artifact " + ctx.embed_path().string());
        EmbeddingModel em = load_embedding(ctx.embed_path());
        RuleRepr repr = rule_repr_from_name(ctx.cfg.gets("rule_repr"));
        for (int i = 0; i < ctx.kb_count(); ++i) {
            KnowledgeBase kb = ctx.load_kb(i);
            std::vector<TrainingSample> samples = read_samples(ctx.samples_path(i), kb);
            TrainLog log;
            ScoringModel sm =
                train_scorer(samples, kb, em, ctx.scorer_train_config(0, i), repr, &log);
            save_scorer(ctx.scorer_path(i), sm, ctx.chash);
            write_train_log(ctx.scorer_log_path(i), log);
        }
    });
}

struct EvalCell {
    std::vector<ProofResult> standard_results;
    std::vector<ProofResult> guided_results;
    MatchStats match;
};

EvalCell evaluate_kb(Ctx& ctx, int i, const EmbeddingModel& em, int embed_idx,
                     const fs::path& std_csv, const fs::path& guided_csv,
                     const fs::path& scorer_file) {
    EvalCell cell;
    KnowledgeBase kb = ctx.load_kb(i);
    QuerySet qs = ctx.load_queries(i, kb.vocabulary);

    SearchConfig scfg = ctx.search_config(SearchMode::Standard, kEvalStdTag + i);
    std::vector<double> wall_std;
    cell.standard_results = run_query_set(kb, qs.test, scfg, nullptr, true, nullptr, &wall_std);
    std::map<std::string, std::string> hdr{{"config", ctx.chash},
                                           {"node_cap", std::to_string(scfg.node_cap)},
                                           {"mode", "standard"},
                                           {"kb", std::to_string(i)}};
    write_results_csv(std_csv, cell.standard_results, wall_std, hdr);

    ScoringModel sm = load_scorer(scorer_file);
    GuidedScorer scorer(em, sm, kb);
    SearchConfig gcfg =
        ctx.search_config(SearchMode::Guided, kEvalGuidedTag + embed_idx * 64 + i);
    std::vector<double> wall_guided;
    std::vector<std::vector<std::pair<Atom, int>>> attempts;
    cell.guided_results =
        run_query_set(kb, qs.test, gcfg, &scorer, true, &attempts, &wall_guided);
    hdr["mode"] = "guided";
    write_results_csv(guided_csv, cell.guided_results, wall_guided, hdr);

    // Semantic match: scorer training pairs vs the deduplicated test-time
    // (goal, clause) pairs the guided reasoner attempted.
    std::vector<TrainingSample> samples = read_samples(ctx.samples_path(i), kb);
    std::vector<std::pair<Atom, int>> train_pairs;
    train_pairs.reserve(samples.size());
    for (const TrainingSample& s : samples) train_pairs.emplace_back(s.goal, s.clause_index);
    struct PH {
        std::size_t operator()(const std::pair<Atom, int>& p) const {
            return AtomHash{}(p.first) * 31 + p.second;
        }
    };
    std::unordered_set<std::pair<Atom, int>, PH> dedup;
    std::vector<std::pair<Atom, int>> test_pairs;
    for (const auto& per_query : attempts)
        for (const auto& pair : per_query)
            if (dedup.insert(pair).second) test_pairs.push_back(pair);
    cell.match = semantic_match(train_pairs, test_pairs);
    return cell;
}

void write_compare_csv(const fs::path& path, const std::vector<CompareRow>& rows,
                       long long node_cap) {
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    os << "# node_cap=" << node_cap << "\n";
    os << "reasoner,size,mean_nodes,median_nodes,fails\n";
    char buf[160];
    for (const CompareRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%d,%.1f,%.1f,%.1f\n", r.reasoner.c_str(), r.size,
                      r.mean_nodes, r.median_nodes, r.fails);
        os << buf;
    }
}

struct MetricsRow {
    std::string model_id;
    std::string kb_id;
    double min, max, mean, stddev, median;
    int fails;
    double tv_dist;
    MatchStats match;
};

void write_metrics_csv(const fs::path& path, const std::vector<MetricsRow>& rows) {
    std::ofstream os(path);
    if (!os) throw ArtifactError("cannot write " + path.string());
    os << "model_id,kb_id,min,max,mean,stddev,median,fails,tv_dist,sem_match,exact_match\n";
    char buf[320];
    for (const MetricsRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%s,%.1f,%.1f,%.1f,%.1f,%.1f,%d,%.5f,",
                      r.model_id.c_str(), r.kb_id.c_str(), r.min, r.max, r.mean, r.stddev,
                      r.median, r.fails, r.tv_dist);
        os << buf;
        if (r.match.defined) {
            std::snprintf(buf, sizeof(buf), "%.2f,%.2f\n", r.match.semantic_pct,
                          r.match.exact_pct);
            os << buf;
        } else {
            os << ",\n";
        }
    }
}

MetricsRow cell_metrics(const std::string& model_id, const std::string& kb_id,
                        const std::vector<ProofResult>& guided, double tv,
                        const MatchStats& match) {
    std::vector<double> nodes;
    int fails = 0;
    for (const ProofResult& r : guided) {
        nodes.push_back(static_cast<double>(r.nodes_explored));
        if (r.outcome != Outcome::Proved) ++fails;
    }
    MetricsRow row{model_id, kb_id, 0, 0, 0, 0, 0, fails, tv, match};
    row.min = *std::min_element(nodes.begin(), nodes.end());
    row.max = *std::max_element(nodes.begin(), nodes.end());
    row.mean = mean_of(nodes);
    row.stddev = stddev_of(nodes);
    row.median = median_of(nodes);
    return row;
}

double holdout_tv(Ctx& ctx, const Vocabulary& v, const EmbeddingModel& em) {
    std::array<double, 3> mix{ctx.cfg.getd("mix_easy"), ctx.cfg.getd("mix_medium"),
                              ctx.cfg.getd("mix_hard")};
    TripletDataset holdout = gen_dataset(
        v, static_cast<std::size_t>(ctx.cfg.getll("holdout_triplets")), ctx.cfg.geti("tpa"),
        mix, ctx.cfg.getd("repeat_chance"), subseed(ctx.seed, kHoldoutTag));
    return tv_distance(similarity_pairs(em, holdout, v), ctx.cfg.geti("tv_bins"));
}

void do_evaluate(Ctx& ctx) {
    std::vector<fs::path> artifacts{ctx.compare_path(), ctx.metrics_path()};
    for (int i = 0; i < ctx.kb_count(); ++i) {
        artifacts.push_back(ctx.results_path("standard", i));
        artifacts.push_back(ctx.results_path("guided", i));
    }
    ctx.stage("evaluate", artifacts, [&] {
        EmbeddingModel em = load_embedding(ctx.embed_path());
        std::vector<std::vector<ProofResult>> std_per_kb, guided_per_kb;
        std::vector<MetricsRow> mrows;
        Vocabulary v = ctx.make_vocab();
        double tv = holdout_tv(ctx, v, em);
        for (int i = 0; i < ctx.kb_count(); ++i) {
            EvalCell cell =
                evaluate_kb(ctx, i, em, 0, ctx.results_path("standard", i),
                            ctx.results_path("guided", i), ctx.scorer_path(i));
            std_per_kb.push_back(cell.standard_results);
            guided_per_kb.push_back(cell.guided_results);
            mrows.push_back(
                cell_metrics("A", std::to_string(i), cell.guided_results, tv, cell.match));
        }
        NodeStats s_std = node_stats(std_per_kb);
        NodeStats s_gui = node_stats(guided_per_kb);
        int size = ctx.cfg.geti("kb_size");
        std::vector<CompareRow> rows{
            {"standard", size, s_std.mean_nodes, s_std.median_nodes, s_std.fails},
            {"guided", size, s_gui.mean_nodes, s_gui.median_nodes, s_gui.fails}};
        write_compare_csv(ctx.compare_path(), rows, ctx.cfg.getll("node_cap"));
        write_metrics_csv(ctx.metrics_path(), mrows);
    });
}

}  // namespace

// ---- public entry points -------------------------------------------------------

fs::path run_pipeline(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_gen_kb(ctx);
    do_gen_queries(ctx);
    do_gen_triplets(ctx);
    do_train_embed(ctx);
    do_collect(ctx);
    do_train_scorer(ctx);
    do_evaluate(ctx);
    return ctx.manifest_path();
}

void stage_gen_kb(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_gen_kb(ctx);
}
void stage_gen_queries(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_gen_queries(ctx);
}
void stage_gen_triplets(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_gen_triplets(ctx);
}
void stage_train_embed(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_train_embed(ctx);
}
void stage_collect(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_collect(ctx);
}
void stage_train_scorer(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_train_scorer(ctx);
}
void stage_evaluate(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_evaluate(ctx);
}

std::vector<CompareRow> run_compare(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    std::vector<std::vector<ProofResult>> std_per_kb, guided_per_kb;
    for (int i = 0; i < ctx.kb_count(); ++i) {
        if (!fs::exists(ctx.results_path("standard", i)) ||
            !fs::exists(ctx.results_path("guided", i)))
            throw ArtifactError("missing evaluation results; run the pipeline first");
        std_per_kb.push_back(read_results_csv(ctx.results_path("standard", i)));
        guided_per_kb.push_back(read_results_csv(ctx.results_path("guided", i)));
    }
    NodeStats s_std = node_stats(std_per_kb);
    NodeStats s_gui = node_stats(guided_per_kb);
    int size = cfg.geti("kb_size");
    std::vector<CompareRow> rows{
        {"standard", size, s_std.mean_nodes, s_std.median_nodes, s_std.fails},
        {"guided", size, s_gui.mean_nodes, s_gui.median_nodes, s_gui.fails}};
    write_compare_csv(ctx.compare_path(), rows, cfg.getll("node_cap"));
    return rows;
}

namespace {

struct ArmSpec {
    std::string name;
    std::string slug;
    bool repeated_terms;
    bool balanced_triplets;
    bool hard_samples;
};

const std::vector<ArmSpec>& ablation_arms() {
    static const std::vector<ArmSpec> arms{
        {"Baseline", "baseline", false, false, false},
        {"Hard Samples", "hard_samples", false, false, true},
        {"Triplet Difficulty", "triplet_difficulty", false, true, false},
        {"Repeated Terms", "repeated_terms", true, false, false},
        {"All", "all", true, true, true},
    };
    return arms;
}

Params arm_params(const Params& base, const ArmSpec& arm) {
    Params p = base;
    p.set("repeated_terms", arm.repeated_terms ? "on" : "off");
    p.set("balanced_triplets", arm.balanced_triplets ? "on" : "off");
    p.set("hard_samples", arm.hard_samples ? "on" : "off");
    return p;
}

}  // namespace

std::vector<AblateRow> run_ablate(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    // Shared environment: same KBs, queries and exhaustive training data for
    // every arm (collection does not depend on any model).
    do_gen_kb(ctx);
    do_gen_queries(ctx);
    do_collect(ctx);

    // Arms must differ from the base config only in the three toggles.
    for (const ArmSpec& arm : ablation_arms()) {
        Params p = arm_params(cfg, arm);
        for (const auto& [k, v] : p.entries()) {
            if (k == "repeated_terms" || k == "balanced_triplets" || k == "hard_samples")
                continue;
            if (v != cfg.gets(k))
                throw ConfigError("ablation arm config drifted on key " + k);
        }
    }

    std::vector<std::uint64_t> kb_hashes, query_hashes;
    for (int i = 0; i < ctx.kb_count(); ++i) {
        kb_hashes.push_back(file_fnv(ctx.kb_path(i)));
        query_hashes.push_back(file_fnv(ctx.queries_path(i)));
    }

    std::vector<AblateRow> rows;
    for (const ArmSpec& arm : ablation_arms()) {
        // Shared inputs must be byte-identical across arms.
        for (int i = 0; i < ctx.kb_count(); ++i) {
            if (file_fnv(ctx.kb_path(i)) != kb_hashes[i] ||
                file_fnv(ctx.queries_path(i)) != query_hashes[i])
                throw ArtifactError("shared KB/query artifacts changed between ablation arms");
        }
        Params p = arm_params(cfg, arm);
        fs::path arm_dir = out_dir / "arms" / arm.slug;
        fs::create_directories(arm_dir);
        Ctx arm_ctx(p, arm_dir);

        arm_ctx.stage("gen-triplets", {arm_ctx.triplets_path()}, [&] {
            Vocabulary v = arm_ctx.make_vocab();
            TripletDataset ds = arm_ctx.make_triplets(v, subseed(arm_ctx.seed, kTripletTag));
            write_triplets(arm_ctx.triplets_path(), ds, v, arm_ctx.header_extra());
        });
        arm_ctx.stage("train-embed", {arm_ctx.embed_path(), arm_ctx.embed_log_path()}, [&] {
            Vocabulary v = arm_ctx.make_vocab();
            TripletDataset ds = read_triplets(arm_ctx.triplets_path(), v);
            TrainLog log;
            EmbeddingModel m = train_embedding(ds, v, arm_ctx.embed_train_config(0), &log);
            save_embedding(arm_ctx.embed_path(), m, arm_ctx.chash);
            write_train_log(arm_ctx.embed_log_path(), log);
        });

        std::vector<fs::path> arm_artifacts;
        for (int i = 0; i < ctx.kb_count(); ++i) {
            arm_artifacts.push_back(arm_ctx.scorer_path(i));
            arm_artifacts.push_back(arm_ctx.results_path("guided", i));
        }
        arm_ctx.stage("evaluate", arm_artifacts, [&] {
            EmbeddingModel em = load_embedding(arm_ctx.embed_path());
            RuleRepr repr = rule_repr_from_name(p.gets("rule_repr"));
            for (int i = 0; i < ctx.kb_count(); ++i) {
                KnowledgeBase kb = ctx.load_kb(i);
                std::vector<TrainingSample> samples = read_samples(ctx.samples_path(i), kb);
                TrainLog slog;
                ScoringModel sm =
                    train_scorer(samples, kb, em, arm_ctx.scorer_train_config(0, i), repr, &slog);
                save_scorer(arm_ctx.scorer_path(i), sm, arm_ctx.chash);
                write_train_log(arm_ctx.scorer_log_path(i), slog);
                QuerySet qs = ctx.load_queries(i, kb.vocabulary);
                GuidedScorer scorer(em, sm, kb);
                SearchConfig gcfg =
                    arm_ctx.search_config(SearchMode::Guided, kEvalGuidedTag + i);
                std::vector<double> wall;
                auto results = run_query_set(kb, qs.test, gcfg, &scorer, true, nullptr, &wall);
                write_results_csv(arm_ctx.results_path("guided", i), results, wall,
                                  {{"config", arm_ctx.chash}, {"arm", arm.name}});
            }
        });

        std::vector<std::vector<ProofResult>> per_kb;
        for (int i = 0; i < ctx.kb_count(); ++i)
            per_kb.push_back(read_results_csv(arm_ctx.results_path("guided", i)));
        NodeStats stats = node_stats(per_kb);
        rows.push_back(AblateRow{arm.name, stats.mean_nodes});
    }

    std::ofstream os(ctx.ablate_path());
    if (!os) throw ArtifactError("cannot write " + ctx.ablate_path().string());
    os << "arm,mean_nodes\n";
    char buf[128];
    for (const AblateRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.1f\n", r.arm.c_str(), r.mean_nodes);
        os << buf;
    }
    return rows;
}

std::vector<CrosstestRow> run_crosstest(const Params& cfg, const fs::path& out_dir) {
    Ctx ctx(cfg, out_dir);
    do_gen_kb(ctx);
    do_gen_queries(ctx);
    do_collect(ctx);

    const int n_embed = cfg.geti("n_embeddings");
    const int n_kb = ctx.kb_count();
    Vocabulary vocab = ctx.make_vocab();
    RuleRepr repr = rule_repr_from_name(cfg.gets("rule_repr"));

    auto emb_path = [&](int e) { return out_dir / ("emb_" + std::to_string(e) + ".model"); };
    auto emb_log = [&](int e) { return out_dir / ("emb_" + std::to_string(e) + "_log.csv"); };
    auto cell_scorer = [&](int e, int k) {
        return out_dir / ("scorer_e" + std::to_string(e) + "_kb" + std::to_string(k) + ".model");
    };
    auto cell_results = [&](int e, int k) {
        return out_dir /
               ("results_guided_e" + std::to_string(e) + "_kb" + std::to_string(k) + ".csv");
    };

    // Independent training runs: separate triplet data and init seeds.
    for (int e = 0; e < n_embed; ++e) {
        ctx.stage("train-embed-" + std::to_string(e), {emb_path(e), emb_log(e)}, [&] {
            TripletDataset ds = ctx.make_triplets(vocab, subseed(ctx.seed, kTripletTag + e));
            TrainLog log;
            EmbeddingModel m = train_embedding(ds, vocab, ctx.embed_train_config(e), &log);
            save_embedding(emb_path(e), m, ctx.chash);
            write_train_log(emb_log(e), log);
        });
    }

    std::vector<MetricsRow> mrows;
    std::vector<CrosstestRow> rows;
    for (int e = 0; e < n_embed; ++e) {
        EmbeddingModel em = load_embedding(emb_path(e));
        double tv = holdout_tv(ctx, vocab, em);
        std::vector<double> kb_means;
        std::vector<double> sem_values;
        std::string model_id(1, static_cast<char>('A' + e));
        for (int k = 0; k < n_kb; ++k) {
            std::vector<fs::path> artifacts{cell_scorer(e, k), cell_results(e, k)};
            ctx.stage("cell-e" + std::to_string(e) + "-kb" + std::to_string(k), artifacts, [&] {
                KnowledgeBase kb = ctx.load_kb(k);
                std::vector<TrainingSample> samples = read_samples(ctx.samples_path(k), kb);
                TrainLog slog;
                ScoringModel sm =
                    train_scorer(samples, kb, em, ctx.scorer_train_config(e, k), repr, &slog);
                save_scorer(cell_scorer(e, k), sm, ctx.chash);
                QuerySet qs = ctx.load_queries(k, kb.vocabulary);
                GuidedScorer scorer(em, sm, kb);
                SearchConfig gcfg =
                    ctx.search_config(SearchMode::Guided, kEvalGuidedTag + e * 64 + k);
                std::vector<double> wall;
                std::vector<std::vector<std::pair<Atom, int>>> attempts;
                auto results = run_query_set(kb, qs.test, gcfg, &scorer, true, &attempts, &wall);
                write_results_csv(cell_results(e, k), results, wall,
                                  {{"config", ctx.chash},
                                   {"model", model_id},
                                   {"kb", std::to_string(k)}});
            });
            // Re-run the lightweight parts needed for metrics from artifacts.
            KnowledgeBase kb = ctx.load_kb(k);
            std::vector<TrainingSample> samples = read_samples(ctx.samples_path(k), kb);
            QuerySet qs = ctx.load_queries(k, kb.vocabulary);
            ScoringModel sm = load_scorer(cell_scorer(e, k));
            GuidedScorer scorer(em, sm, kb);
            SearchConfig gcfg =
                ctx.search_config(SearchMode::Guided, kEvalGuidedTag + e * 64 + k);
            std::vector<std::vector<std::pair<Atom, int>>> attempts;
            auto results = run_query_set(kb, qs.test, gcfg, &scorer, true, &attempts, nullptr);
            std::vector<std::pair<Atom, int>> train_pairs, test_pairs;
            for (const TrainingSample& s : samples) train_pairs.emplace_back(s.goal, s.clause_index);
            struct PH {
                std::size_t operator()(const std::pair<Atom, int>& p) const {
                    return AtomHash{}(p.first) * 31 + p.second;
                }
            };
            std::unordered_set<std::pair<Atom, int>, PH> dedup;
            for (const auto& per_query : attempts)
                for (const auto& pr : per_query)
                    if (dedup.insert(pr).second) test_pairs.push_back(pr);
            MatchStats match = semantic_match(train_pairs, test_pairs);
            mrows.push_back(cell_metrics(model_id, std::to_string(k), results, tv, match));
            std::vector<double> nodes;
            for (const ProofResult& r : results)
                nodes.push_back(static_cast<double>(r.nodes_explored));
            kb_means.push_back(mean_of(nodes));
            if (match.defined) sem_values.push_back(match.semantic_pct);
        }
        CrosstestRow row;
        row.model = "Model " + model_id;
        row.min = *std::min_element(kb_means.begin(), kb_means.end());
        row.max = *std::max_element(kb_means.begin(), kb_means.end());
        row.mean = mean_of(kb_means);
        row.stddev = stddev_of(kb_means);
        row.tv_dist = tv;
        row.sem_match = mean_of(sem_values);
        rows.push_back(row);
    }

    write_metrics_csv(ctx.metrics_path(), mrows);
    std::ofstream os(ctx.crosstest_path());
    if (!os) throw ArtifactError("cannot write " + ctx.crosstest_path().string());
    os << "model,min,max,mean,stddev,tv_dist,sem_match\n";
    char buf[256];
    for (const CrosstestRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%s,%.1f,%.1f,%.1f,%.1f,%.5f,%.2f\n", r.model.c_str(),
                      r.min, r.max, r.mean, r.stddev, r.tv_dist, r.sem_match);
        os << buf;
    }
    return rows;
}

}  // namespace hornguide
