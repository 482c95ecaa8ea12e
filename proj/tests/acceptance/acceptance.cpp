// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include <httplib.h>

#include "gnssrag/codec.hpp"
#include "gnssrag/dataset.hpp"
#include "gnssrag/embedder.hpp"
#include "gnssrag/error.hpp"
#include "gnssrag/kernels.hpp"
#include "gnssrag/projection.hpp"
#include "gnssrag/service.hpp"
#include "gnssrag/tasks.hpp"
#include "gnssrag/vectorstore.hpp"
#include "test_support.hpp"

using namespace gnssrag;
using Json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Accumulates failures with a short reason each.
struct Checker {
    std::vector<std::string> failures;
    void require(bool ok, const std::string& what) {
        if (!ok && failures.size() < 5) failures.push_back(what);
        if (!ok) ++failed;
    }
    std::size_t failed = 0;
    Outcome outcome(std::string detail) const {
        Outcome o{failed == 0, std::move(detail)};
        for (const auto& f : failures) o.detail += "; " + f;
        if (failed > failures.size()) o.detail += "; +" + std::to_string(failed - failures.size()) + " more";
        return o;
    }
};

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------- vector store

std::vector<std::uint64_t> brute_force(const std::vector<std::vector<float>>& rows, const std::vector<std::uint64_t>& ids,
                                       const std::vector<float>& q, Metric metric, std::size_t k) {
    std::vector<std::pair<long double, std::uint64_t>> scored;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        long double s = 0.0L;
        for (std::size_t d = 0; d < q.size(); ++d) {
            const long double a = rows[i][d], b = q[d];
            s += metric == Metric::Cosine ? a * b : (a - b) * (a - b);
        }
        // Larger is better for cosine, smaller distance for L2.
        scored.emplace_back(metric == Metric::Cosine ? -s : s, ids[i]);
    }
    std::sort(scored.begin(), scored.end());
    std::vector<std::uint64_t> out;
    for (std::size_t i = 0; i < std::min(k, scored.size()); ++i) out.push_back(scored[i].second);
    return out;
}

Outcome vectorstore_oracle() {
    Checker check;
    gnssrag::Rng rng(4242);
    std::size_t total_records = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const auto metric = trial % 2 ? Metric::L2 : Metric::Cosine;
        // Log-uniform sizes between 1 and 10^4, with both ends pinned.
        std::size_t n = static_cast<std::size_t>(std::lround(std::pow(10.0, 4.0 * rng.uniform())));
        if (trial == 0) n = 1;
        if (trial == 1) n = 10000;
        n = std::clamp<std::size_t>(n, 1, 10000);
        const std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, 50));
        VectorIndex index(metric);
        std::vector<std::vector<float>> rows;
        std::vector<std::uint64_t> ids;
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint64_t id = static_cast<std::uint64_t>(rng.uniform_int(0, 1'000'000'000));
            if (index.find(id)) continue;
            rows.push_back(testing::random_unit(rng, kEmbeddingDim));
            ids.push_back(id);
            index.add(id, rows.back(), testing::random_spec(rng, InterferenceType::Chirp));
        }
        total_records += rows.size();
        const auto q = testing::random_unit(rng, kEmbeddingDim);
        std::vector<std::uint64_t> got;
        for (const auto& h : index.search(q, k)) got.push_back(h.id);
        check.require(got == brute_force(rows, ids, q, metric, k),
                      "trial " + std::to_string(trial) + " (n=" + std::to_string(rows.size()) + ", k=" + std::to_string(k) + ")");
    }
    return check.outcome("200 trials, " + std::to_string(total_records) + " records, both metrics");
}

Outcome persistence() {
    Checker check;
    testing::TempDir dir;
    gnssrag::Rng rng(77);
    VectorIndex index;
    for (std::uint64_t id = 0; id < 10000; ++id)
        index.add(id * 3 + 1, testing::random_unit(rng, kEmbeddingDim), testing::random_spec(rng, kAllTypes[id % kAllTypes.size()]));
    const auto path = dir / "big.gvix";
    save_index(index, path);
    const auto loaded = load_index(path);
    check.require(loaded == index, "round trip differs");
    const auto bytes = codec::read_file(path.string());
    check.require(encode_index(loaded) == bytes, "re-encoding differs");
    for (std::size_t offset : {bytes.size() / 2, bytes.size() - 10, std::size_t{40}}) {
        auto corrupt = bytes;
        corrupt[offset] ^= 0x20;
        codec::write_file((dir / "bad.gvix").string(), corrupt);
        bool rejected = false;
        try {
            load_index(dir / "bad.gvix");
        } catch (const FormatError& e) {
            rejected = std::string(e.what()).find("checksum") != std::string::npos;
        }
        check.require(rejected, "flipped byte at " + std::to_string(offset) + " not rejected by checksum");
    }
    return check.outcome("10000 records, " + std::to_string(bytes.size()) + " bytes, 3 corruptions rejected");
}

// ----------------------------------------------------------------- generator

double in_band_fraction(const Snapshot& snap, const ChannelBand& band) {
    double in = 0.0, total = 0.0;
    for (std::size_t c = 0; c < kChannels; ++c)
        for (std::size_t t = 0; t < kTimeBins; ++t) {
            const double p = snap.layers->interference[c * kTimeBins + t];
            total += p;
            if (c >= band.first && c < band.end()) in += p;
        }
    return in / total;
}

// R^2 of the per-bin power-weighted centre channel against time; nullopt for a stationary centre.
std::optional<double> chirp_r2(const Snapshot& snap) {
    std::vector<double> y;
    for (std::size_t t = 0; t < kTimeBins; ++t) {
        double w = 0.0, m = 0.0;
        for (std::size_t c = 0; c < kChannels; ++c) {
            const double p = snap.layers->interference[c * kTimeBins + t];
            w += p;
            m += p * (static_cast<double>(c) + 0.5);
        }
        y.push_back(m / w);
    }
    const double n = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        sx += static_cast<double>(i);
        sy += y[i];
        sxx += static_cast<double>(i * i);
        sxy += static_cast<double>(i) * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icpt = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        ss_res += std::pow(y[i] - icpt - slope * static_cast<double>(i), 2);
        ss_tot += std::pow(y[i] - sy / n, 2);
    }
    if (ss_tot == 0.0) return std::nullopt;
    return 1.0 - ss_res / ss_tot;
}

Outcome generator_properties() {
    Checker check;
    gnssrag::Rng rng(2025);
    constexpr int kSpecs = 120;
    std::array<int, 5> counted{};  // determinism, confinement, power, multipath, chirp
    double worst_fraction = 1.0, worst_r2 = 1.0;
    int stationary = 0;

    for (int i = 0; i < kSpecs; ++i) {
        const auto type = kAllTypes[static_cast<std::size_t>(i) % kAllTypes.size()];
        const auto spec = testing::random_spec(rng, type);
        const auto a = generate_snapshot(spec);
        const auto b = generate_snapshot(spec);
        check.require(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0, "non-deterministic spec");
        ++counted[0];
    }
    // Confinement holds for every family except the gated one, whose sidelobes leave the band.
    const std::vector<InterferenceType> confined{InterferenceType::Chirp, InterferenceType::FreqHopper,
                                                 InterferenceType::Modulated, InterferenceType::Multitone,
                                                 InterferenceType::Noise};
    for (int i = 0; i < kSpecs; ++i) {
        const auto spec = testing::random_spec(rng, confined[static_cast<std::size_t>(i) % confined.size()]);
        const double f = in_band_fraction(generate_snapshot(spec), interference_band(spec));
        worst_fraction = std::min(worst_fraction, f);
        check.require(f >= 0.99, "in-band fraction " + fmt(f) + " for " + std::string(to_string(spec.intf_type)));
        ++counted[1];
    }
    for (int i = 0; i < kSpecs; ++i) {
        const auto type = kAllTypes[1 + static_cast<std::size_t>(i) % (kAllTypes.size() - 1)];
        auto spec = testing::random_spec(rng, type);
        spec.power = -10.0 + 19.0 * rng.uniform();
        auto louder = spec;
        louder.power = spec.power + 0.01 + (kMaxPower - spec.power - 0.01) * rng.uniform();
        check.require(peak_interference_db(generate_snapshot(louder)) > peak_interference_db(generate_snapshot(spec)),
                      "power not monotone");
        ++counted[2];
    }
    for (int i = 0; i < kSpecs; ++i) {
        const auto type = kAllTypes[1 + static_cast<std::size_t>(i) % (kAllTypes.size() - 1)];
        auto spec = testing::random_spec(rng, type);
        double previous = std::numeric_limits<double>::infinity();
        for (int s = 1; s <= kMaxScenario; ++s) {
            spec.scenario = s;
            const double peak = peak_interference_db(generate_snapshot(spec));
            check.require(peak <= previous, "peak rises at scenario " + std::to_string(s));
            previous = peak;
        }
        ++counted[3];
    }
    for (int i = 0; i < kSpecs; ++i) {
        const auto spec = testing::random_spec(rng, InterferenceType::Chirp);
        const auto r2 = chirp_r2(generate_snapshot(spec));
        ++counted[4];
        if (!r2) {
            // A single-channel chirp has nowhere to sweep.
            check.require(occupied_channels(spec.bandwidth) == 1, "stationary multi-channel chirp");
            ++stationary;
            continue;
        }
        worst_r2 = std::min(worst_r2, *r2);
        check.require(*r2 >= 0.99, "chirp R^2 " + fmt(*r2));
    }
    return check.outcome(std::to_string(counted[0]) + "/" + std::to_string(counted[1]) + "/" + std::to_string(counted[2]) + "/" +
                         std::to_string(counted[3]) + "/" + std::to_string(counted[4]) +
                         " specs; worst in-band " + fmt(worst_fraction, 6) + " (Pulsed excluded), worst chirp R^2 " +
                         fmt(worst_r2, 6) + ", " + std::to_string(stationary) + " single-channel chirps");
}

// ---------------------------------------------------------------- desk scale

std::vector<LabeledEmbedding> embed_plan(const DatasetConfig& config) {
    const auto manifest = plan_dataset(config);
    std::vector<LabeledEmbedding> out(manifest.entries.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const auto& e = manifest.entries[i];
        out[i] = {embed_baseline(generate_snapshot(e.spec, e.id)), e.spec};
    }
    return out;
}

Outcome desk_scale() {
    Checker check;
    const auto train = embed_plan(DatasetConfig::uniform(200, 0));
    const auto test = embed_plan(DatasetConfig::uniform(50, 1'000'000));
    VectorIndex index;
    for (const auto& t : train) index.add(t.embedding, t.spec);

    const auto eval = evaluate(index, test, 5);
    check.require(eval.metrics.type_accuracy >= 90.0, "type accuracy " + fmt(eval.metrics.type_accuracy));

    // Leave-one-in: every training record queried against its own index at k = 1.
    std::size_t self_correct = 0;
    double self_sq = 0.0;
    for (const auto& t : train) {
        const auto p = predict(index, t.embedding.vector, 1, t.embedding.snapshot_id);
        const bool same = p.intf_type == t.spec.intf_type && p.subjammer == t.spec.subjammer();
        self_correct += same;
        if (t.spec.intf_type != InterferenceType::None && p.power) {
            self_sq += std::pow(normalize_power(*p.power) - normalize_power(t.spec.power), 2) +
                       std::pow(normalize_bandwidth(*p.bandwidth) - normalize_bandwidth(t.spec.bandwidth), 2);
        }
    }
    const double self_acc = 100.0 * static_cast<double>(self_correct) / static_cast<double>(train.size());
    check.require(self_acc == 100.0, "leave-one-in accuracy " + fmt(self_acc));
    check.require(self_sq == 0.0, "leave-one-in squared error " + fmt(self_sq));

    // Unanimous-parameter neighbourhoods: all k neighbours share one (power, bandwidth) label.
    double power_sq = 0.0, bw_sq = 0.0;
    std::size_t unanimous = 0;
    for (const auto& t : test) {
        if (t.spec.intf_type == InterferenceType::None) continue;
        const auto hits = index.search(t.embedding.vector, 5);
        const auto& first = hits.front().metadata;
        const bool same = first.intf_type != InterferenceType::None &&
                          std::all_of(hits.begin(), hits.end(), [&](const SearchHit& h) {
                              return h.metadata.intf_type != InterferenceType::None && h.metadata.power == first.power &&
                                     h.metadata.bandwidth == first.bandwidth;
                          });
        if (!same) continue;
        const auto est = knn_regress(index, t.embedding.vector, 5);
        power_sq += std::pow(normalize_power(est.power) - normalize_power(t.spec.power), 2);
        bw_sq += std::pow(normalize_bandwidth(est.bandwidth) - normalize_bandwidth(t.spec.bandwidth), 2);
        ++unanimous;
    }
    const double power_mse = unanimous ? power_sq / static_cast<double>(unanimous) : 0.0;
    const double bw_mse = unanimous ? bw_sq / static_cast<double>(unanimous) : 0.0;
    check.require(unanimous >= 20, "only " + std::to_string(unanimous) + " unanimous neighbourhoods");
    check.require(power_mse <= 0.05, "unanimous power MSE " + fmt(power_mse));
    check.require(bw_mse <= 0.05, "unanimous bandwidth MSE " + fmt(bw_mse));

    return check.outcome("type acc " + fmt(eval.metrics.type_accuracy) + "%, subjammer " +
                         fmt(eval.metrics.subjammer_accuracy) + "%, leave-one-in " + fmt(self_acc) + "%, unanimous n=" +
                         std::to_string(unanimous) + " power MSE " + fmt(power_mse) + " bw MSE " + fmt(bw_mse) +
                         " (all-rows power MSE " + fmt(eval.metrics.power_mse) + ", bw MSE " + fmt(eval.metrics.bandwidth_mse) +
                         ")");
}

// ---------------------------------------------------------------------- t-SNE

std::vector<double> sq_dist(const std::vector<double>& x, std::size_t n, std::size_t dim) {
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t c = 0; c < dim; ++c) d[i * n + j] += std::pow(x[i * dim + c] - x[j * dim + c], 2);
    return d;
}

double kl_oracle(const std::vector<double>& p, const std::vector<double>& y, std::size_t n) {
    auto w = [&](std::size_t i, std::size_t j) {
        return 1.0 / (1.0 + std::pow(y[2 * i] - y[2 * j], 2) + std::pow(y[2 * i + 1] - y[2 * j + 1], 2));
    };
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) z += w(i, j);
    double kl = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && p[i * n + j] > 0.0) kl += p[i * n + j] * std::log(p[i * n + j] * z / w(i, j));
    return kl;
}

// Lloyd's k-means with several seeded restarts; returns the best assignment.
std::vector<std::size_t> kmeans(const std::vector<double>& pts, std::size_t n, std::size_t k, std::uint64_t seed) {
    gnssrag::Rng rng(seed);
    std::vector<std::size_t> best;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < 10; ++restart) {
        std::vector<double> cx(k), cy(k);
        for (std::size_t c = 0; c < k; ++c) {
            const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
            cx[c] = pts[2 * i];
            cy[c] = pts[2 * i + 1];
        }
        std::vector<std::size_t> assign(n, 0);
        double cost = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            cost = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double bd = std::numeric_limits<double>::infinity();
                for (std::size_t c = 0; c < k; ++c) {
                    const double d = std::pow(pts[2 * i] - cx[c], 2) + std::pow(pts[2 * i + 1] - cy[c], 2);
                    if (d < bd) bd = d, assign[i] = c;
                }
                cost += bd;
            }
            for (std::size_t c = 0; c < k; ++c) {
                double sx = 0, sy = 0, m = 0;
                for (std::size_t i = 0; i < n; ++i)
                    if (assign[i] == c) sx += pts[2 * i], sy += pts[2 * i + 1], ++m;
                if (m > 0) cx[c] = sx / m, cy[c] = sy / m;
            }
        }
        if (cost < best_cost) best_cost = cost, best = assign;
    }
    return best;
}

// Best agreement over all label permutations.
double agreement(const std::vector<std::size_t>& truth, const std::vector<std::size_t>& found, std::size_t k) {
    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::size_t best = 0;
    do {
        std::size_t ok = 0;
        for (std::size_t i = 0; i < truth.size(); ++i) ok += perm[found[i]] == truth[i];
        best = std::max(best, ok);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return static_cast<double>(best) / static_cast<double>(truth.size());
}

Outcome tsne_suite() {
    Checker check;
    gnssrag::Rng rng(303);

    // Calibration at perplexity 30.
    const std::size_t n_cal = 200, dim_cal = 16;
    std::vector<double> x(n_cal * dim_cal);
    for (auto& v : x) v = rng.normal();
    const auto cal = calibrate_perplexity(sq_dist(x, n_cal, dim_cal), n_cal, 30.0);
    double worst_entropy = 0.0;
    for (std::size_t i = 0; i < n_cal; ++i) {
        double h = 0.0;
        for (std::size_t j = 0; j < n_cal; ++j)
            if (const double p = cal.conditional[i * n_cal + j]; p > 0.0) h -= p * std::log2(p);
        worst_entropy = std::max(worst_entropy, std::abs(h - std::log2(30.0)));
    }
    check.require(worst_entropy <= 1e-5, "entropy error " + fmt(worst_entropy));

    // Gradient against central differences of an independently coded KL.
    double worst_grad = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t n = 10;
        std::vector<double> xs(n * 5), y(n * 2);
        for (auto& v : xs) v = rng.normal();
        for (auto& v : y) v = rng.normal();
        const auto p = symmetrize(calibrate_perplexity(sq_dist(xs, n, 5), n, 3.0).conditional, n);
        std::vector<double> grad(2 * n);
        kernels::parallel::tsne_gradient(p, y, n, 1.0, grad);
        double diff = 0.0, norm = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            auto yp = y, ym = y;
            yp[k] += 1e-6;
            ym[k] -= 1e-6;
            const double fd = (kl_oracle(p, yp, n) - kl_oracle(p, ym, n)) / 2e-6;
            diff += std::pow(fd - grad[k], 2);
            norm += fd * fd;
        }
        worst_grad = std::max(worst_grad, std::sqrt(diff / norm));
    }
    check.require(worst_grad <= 1e-4, "gradient relative error " + fmt(worst_grad));

    // Three separated Gaussian clusters of 30 points at perplexity 30 ((n-1)/3 = 29.67 caps it).
    const std::size_t per = 30, dim = 20;
    std::vector<double> pts;
    std::vector<std::size_t> truth;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < per; ++i) {
            truth.push_back(c);
            for (std::size_t d = 0; d < dim; ++d) pts.push_back((d == c ? 25.0 : 0.0) + rng.normal());
        }
    TsneParams params;
    params.seed = 5;
    const auto out = tsne(pts, 3 * per, dim, params);
    const double agree = agreement(truth, kmeans(out.coords, out.size(), 3, 17), 3);
    check.require(agree >= 0.95, "cluster agreement " + fmt(agree));
    check.require(out.final_kl < out.initial_kl, "cluster KL did not decrease");
    const auto again = tsne(pts, 3 * per, dim, params);
    check.require(again.coords == out.coords && again.final_kl == out.final_kl, "fixed seed not bit-identical");

    // Embeddings of four jammer families, the figure setting.
    const std::vector<InterferenceType> families{InterferenceType::Chirp, InterferenceType::FreqHopper,
                                                 InterferenceType::Multitone, InterferenceType::Noise};
    std::vector<double> emb;
    for (std::size_t f = 0; f < families.size(); ++f)
        for (std::uint64_t s = 0; s < 60; ++s) {
            const auto e = embed_baseline(generate_snapshot(testing::random_spec(rng, families[f])));
            emb.insert(emb.end(), e.vector.begin(), e.vector.end());
        }
    const auto fig = tsne(emb, families.size() * 60, kEmbeddingDim, params);
    check.require(fig.final_kl < fig.initial_kl, "embedding KL did not decrease");

    return check.outcome("entropy err " + fmt(worst_entropy, 3) + ", grad rel err " + fmt(worst_grad, 3) + ", cluster agreement " +
                         fmt(agree) + ", KL " + fmt(out.initial_kl) + "->" + fmt(out.final_kl) + ", 240 embeddings KL " +
                         fmt(fig.initial_kl) + "->" + fmt(fig.final_kl));
}

// -------------------------------------------------------------------- prompts

Outcome goldens() {
    Checker check;
    std::size_t files = 0;
    for (const auto& [name, text] : testing::render_goldens()) {
        check.require(testing::matches_golden(GNSSRAG_GOLDEN_DIR, name, text), name + " differs from golden");
        ++files;
    }
    gnssrag::Rng rng(808);
    VectorIndex index;
    for (std::uint64_t id = 0; id < 500; ++id)
        index.add(id, testing::random_unit(rng, kEmbeddingDim), testing::random_spec(rng, kAllTypes[id % kAllTypes.size()]));
    double worst = 0.0;
    std::size_t compared = 0;
    for (int q = 0; q < 200; ++q) {
        const Embedding e{100000, testing::random_unit(rng, kEmbeddingDim), EmbeddingSource::Baseline};
        const std::size_t k = 1 + static_cast<std::size_t>(q % 9);
        const auto ctx = retrieve_context(index, e, {"q", DetailLevel::General}, k);
        const auto c = characterize(assemble_in_context(ctx, "snapshot:q", {"q", DetailLevel::General}));
        if (!c || c->intf_type == InterferenceType::None || !c->power) continue;
        const auto est = knn_regress(index, e.vector, k);
        worst = std::max({worst, std::abs(*c->power - est.power), std::abs(*c->bandwidth - est.bandwidth)});
        ++compared;
    }
    check.require(worst <= 1e-9, "describer vs regression gap " + fmt(worst));
    check.require(compared >= 100, "only " + std::to_string(compared) + " comparable queries");
    return check.outcome(std::to_string(files) + " golden files, " + std::to_string(compared) +
                         " describer/regression comparisons, max gap " + fmt(worst, 3));
}

// -------------------------------------------------------------------- latency

Outcome latency() {
    Checker check;
    gnssrag::Rng rng(9);
    VectorIndex index;
    for (std::uint64_t id = 0; id < 42592; ++id)
        index.add(id, testing::random_unit(rng, kEmbeddingDim), testing::random_spec(rng, kAllTypes[id % kAllTypes.size()]));
    std::vector<Snapshot> queries;
    for (std::uint64_t i = 0; i < 100; ++i)
        queries.push_back(generate_snapshot(testing::random_spec(rng, kAllTypes[i % kAllTypes.size()])));
    embed_baseline(queries.front());  // builds the projection matrix once
    std::vector<double> ms;
    for (const auto& snap : queries) {
        const auto start = std::chrono::steady_clock::now();
        const auto e = embed_baseline(snap);
        const auto hits = index.search(e.vector, 5);
        ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
        check.require(hits.size() == 5, "short result");
    }
    std::sort(ms.begin(), ms.end());
    const double median = (ms[49] + ms[50]) / 2.0;
    check.require(median < 50.0, "median " + fmt(median) + " ms");
    return check.outcome("median " + fmt(median) + " ms, p95 " + fmt(ms[94]) + " ms over 100 queries, 42592 records, " +
                         std::to_string(kernels::max_threads()) + " threads");
}

// --------------------------------------------------------------------- parity

Outcome parity() {
    Checker check;
    testing::TempDir dir;
    const auto corpus = testing::build_corpus(dir.path(), 5, 3000);
    std::ofstream(dir / "p.conf") << testing::corpus_config(corpus);
    auto pipeline = std::make_shared<Pipeline>(Pipeline::open(load_config(dir / "p.conf")));
    Service service(pipeline);
    httplib::Client client("127.0.0.1", service.start_background());
    client.set_read_timeout(30, 0);
    std::size_t compared = 0;
    for (std::uint64_t id : {3000, 3007, 3013, 3021, 3029}) {
        for (auto level : kAllDetailLevels) {
            const std::string question = "Which interference affects this snapshot?";
            const auto cli = testing::run_command(std::string(GNSSRAG_CLI_PATH) + " query --config " + (dir / "p.conf").string() +
                                                  " --snapshot-id " + std::to_string(id) + " --question '" + question +
                                                  "' --detail-level " + std::string(to_string(level)) + " --json 2>/dev/null");
            auto r = client.Post("/query",
                                 Json{{"snapshot_id", id}, {"question", question}, {"detail_level", to_string(level)}}.dump(),
                                 "application/json");
            if (cli.status != 0 || !r || r->status != 200) {
                check.require(false, "query failed for id " + std::to_string(id));
                continue;
            }
            const auto a = Json::parse(cli.out), b = Json::parse(r->body);
            check.require(a["description"] == b["description"], "description differs for id " + std::to_string(id));
            check.require(a["context"] == b["context"], "context differs for id " + std::to_string(id));
            ++compared;
        }
    }
    return check.outcome(std::to_string(compared) + " CLI/HTTP query pairs identical");
}

struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"vector store matches brute-force scan", 60, vectorstore_oracle},
        {"index persistence round trip and checksum", 10, persistence},
        {"generator properties", 60, generator_properties},
        {"desk-scale classification", 300, desk_scale},
        {"t-SNE suite", 180, tsne_suite},
        {"prompt and describer goldens", 0, goldens},
        {"query latency", 0, latency},
        {"CLI/HTTP parity", 0, parity},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt(secs, 3) + " s";
        if (c.budget_s > 0) {
            timing += " / " + fmt(c.budget_s, 3) + " s";
            if (secs >= c.budget_s) {
                o.pass = false;
                o.detail += "; over time budget";
            }
        }
        std::printf("%s  %s: %s [%s]\n", o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), timing.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
