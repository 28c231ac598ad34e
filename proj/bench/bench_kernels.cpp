// Serial reference vs OpenMP kernels: triplet generation, batch embedding,
// full-dataset loss scans, and query-set evaluation. Prints wall times and
// verifies the two paths produce identical results while timing them.

#include <chrono>
#include <cstdio>
#include <cstring>

#include "hornguide/metrics.hpp"
#include "hornguide/parallel.hpp"
#include "hornguide/reasoner.hpp"
#include "hornguide/synth.hpp"

using namespace hornguide;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <class F>
double timed(F&& f) {
    auto t0 = Clock::now();
    f();
    return seconds_since(t0);
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-24s serial %8.3fs   parallel %8.3fs   speedup %5.2fx   identical %s\n", name,
                serial_s, parallel_s, serial_s / parallel_s, identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    int jobs = 0;
    std::size_t n_triplets = 40000;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--jobs") && i + 1 < argc) jobs = std::atoi(argv[++i]);
        if (!std::strcmp(argv[i], "--triplets") && i + 1 < argc)
            n_triplets = std::strtoull(argv[++i], nullptr, 10);
    }
    set_jobs(jobs);
    std::printf("jobs=%d\n", effective_jobs());

    Rng vrng(7);
    Vocabulary vocab = gen_vocabulary(20, 200, 10, 2, vrng);

    // triplet generation
    TripletDataset ds_serial, ds_parallel;
    double t_ser = timed([&] { ds_serial = gen_dataset(vocab, n_triplets, 20,
                                                       {0.4, 0.5, 0.1}, 0.15, 11, false); });
    double t_par = timed([&] { ds_parallel = gen_dataset(vocab, n_triplets, 20,
                                                         {0.4, 0.5, 0.1}, 0.15, 11, true); });
    bool same = ds_serial.triplets.size() == ds_parallel.triplets.size();
    for (std::size_t i = 0; same && i < ds_serial.triplets.size(); ++i)
        same = ds_serial.triplets[i].anchor == ds_parallel.triplets[i].anchor &&
               ds_serial.triplets[i].positive == ds_parallel.triplets[i].positive &&
               ds_serial.triplets[i].negative == ds_parallel.triplets[i].negative;
    report("gen_dataset", t_ser, t_par, same);

    // short training run to get a model for the inference kernels
    TrainConfig tc;
    tc.epochs = 2;
    tc.rng_seed = 3;
    EmbeddingModel em = train_embedding(ds_serial, vocab, tc);

    std::vector<Atom> atoms;
    for (const Triplet& t : ds_serial.triplets) atoms.push_back(t.anchor);
    std::vector<std::vector<double>> emb_s, emb_p;
    t_ser = timed([&] { emb_s = embed_batch(em, atoms, vocab, false); });
    t_par = timed([&] { emb_p = embed_batch(em, atoms, vocab, true); });
    report("embed_batch", t_ser, t_par, emb_s == emb_p);

    std::vector<double> loss_s, loss_p;
    t_ser = timed([&] { loss_s = triplet_losses(em, ds_serial, vocab, 1.0, false); });
    t_par = timed([&] { loss_p = triplet_losses(em, ds_serial, vocab, 1.0, true); });
    report("triplet_losses", t_ser, t_par, loss_s == loss_p);

    // query evaluation on a small KB
    KbGenConfig kc;
    kc.kb_size = 250;
    kc.vocab_seed = 5;
    kc.rng_seed = 6;
    KnowledgeBase kb = gen_kb(kc);
    std::vector<Atom> derived = forward_chain(kb, 5000);
    Rng qrng(9);
    QuerySet qs = gen_queries(derived, 25, 25, 0.5, qrng);
    SearchConfig sc;
    sc.mode = SearchMode::Standard;
    sc.node_cap = 100000;
    std::vector<ProofResult> r_s, r_p;
    t_ser = timed([&] { r_s = run_query_set(kb, qs.test, sc, nullptr, false); });
    t_par = timed([&] { r_p = run_query_set(kb, qs.test, sc, nullptr, true); });
    same = r_s.size() == r_p.size();
    for (std::size_t i = 0; same && i < r_s.size(); ++i)
        same = r_s[i].outcome == r_p[i].outcome &&
               r_s[i].nodes_explored == r_p[i].nodes_explored;
    report("run_query_set", t_ser, t_par, same);
    return 0;
}
