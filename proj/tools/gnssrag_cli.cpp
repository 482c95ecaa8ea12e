// gnssrag: command-line entry point for the snapshot -> embedding -> index ->
// prompt -> description pipeline.
//
// Exit codes: 0 success, 1 usage, 2 IO/load, 3 backend.

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "gnssrag/dataset.hpp"
#include "gnssrag/error.hpp"
#include "gnssrag/pipeline.hpp"
#include "gnssrag/projection.hpp"
#include "gnssrag/service.hpp"
#include "gnssrag/tasks.hpp"

namespace fs = std::filesystem;
using namespace gnssrag;

namespace {

struct PipelineOptions {
    std::optional<fs::path> config;
    std::string index;
    std::string dataset;
    std::string encoder_url;
    std::string describer_url;
    std::optional<std::size_t> k;
};

void add_pipeline_options(CLI::App* cmd, PipelineOptions& o) {
    cmd->add_option("--config", o.config, "Key/value config file (default: $GNSSRAG_CONFIG)");
    cmd->add_option("--index", o.index, "Vector index file (.gvix)");
    cmd->add_option("--dataset", o.dataset, "Dataset directory used to resolve snapshot ids");
    cmd->add_option("--encoder-url", o.encoder_url, "Use a remote encoder instead of the baseline featurizer");
    cmd->add_option("--describer-url", o.describer_url, "Use a remote describer instead of the templated one");
    cmd->add_option("-k,--k", o.k, "Neighbours to retrieve");
}

PipelineConfig build_config(const PipelineOptions& o) {
    PipelineConfig config;
    if (const auto path = resolve_config_path(o.config)) config = load_config(*path);
    if (!o.index.empty()) config.index_path = o.index;
    if (!o.dataset.empty()) config.dataset_dir = o.dataset;
    if (!o.encoder_url.empty()) {
        config.embedder = EmbedderKind::External;
        config.encoder.url = o.encoder_url;
    }
    if (!o.describer_url.empty()) {
        config.describer = DescriberKind::Remote;
        config.describer_endpoint.url = o.describer_url;
    }
    if (o.k) {
        if (*o.k == 0) throw ParameterError("k", "must be at least 1");
        config.k = *o.k;
    }
    return config;
}

Snapshot resolve_snapshot(const Pipeline& pipeline, const std::string& file, const std::optional<std::uint64_t>& id) {
    if (!file.empty()) {
        try {
            return read_snapshot(file);
        } catch (const Error& e) {
            throw StageError("load", e);
        }
    }
    if (id) return pipeline.lookup_snapshot(*id);
    throw ParameterError("snapshot", "pass --snapshot FILE or --snapshot-id ID");
}

std::vector<double> parse_number_list(const std::string& text, const char* field) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ParameterError(field, "bad number '" + item + "'");
        }
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
}

// Embeds every manifest entry of a dataset directory with the baseline featurizer.
std::vector<LabeledEmbedding> embed_dataset(const fs::path& dir, const DatasetManifest& manifest,
                                            const Pipeline* pipeline) {
    std::vector<LabeledEmbedding> out(manifest.entries.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(out.size()); ++i) {
        const auto& entry = manifest.entries[static_cast<std::size_t>(i)];
        try {
            const Snapshot snap = read_snapshot(dir / entry.file);
            out[static_cast<std::size_t>(i)] = {pipeline ? pipeline->embed(snap) : embed_baseline(snap), entry.spec};
        } catch (...) {
#pragma omp critical
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GNSS interference characterization toolkit"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Synthesize a labelled snapshot dataset");
    std::string gen_out;
    std::size_t per_class = 10;
    std::map<std::string, std::size_t> class_counts;
    std::string bandwidths, powers, scenarios;
    std::uint64_t gen_seed = 0;
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--per-class", per_class, "Snapshots per class");
    gen->add_option("--count", class_counts, "Per-class override, TYPE=N (repeatable)");
    gen->add_option("--bandwidths", bandwidths, "Comma-separated bandwidth grid");
    gen->add_option("--powers", powers, "Comma-separated power grid");
    gen->add_option("--scenarios", scenarios, "Comma-separated scenario grid");
    gen->add_option("--seed", gen_seed, "Base seed; entry i uses seed + i");

    // embed
    auto* emb = app.add_subcommand("embed", "Embed one snapshot file");
    std::string emb_snapshot, emb_encoder;
    emb->add_option("--snapshot", emb_snapshot, "Snapshot file (.gsnp)")->required();
    emb->add_option("--encoder-url", emb_encoder, "Remote encoder endpoint");

    // index
    auto* idx = app.add_subcommand("index", "Embed a dataset and build a vector index");
    std::string idx_dataset, idx_out, idx_metric = "cosine", idx_encoder;
    idx->add_option("--dataset", idx_dataset, "Dataset directory")->required();
    idx->add_option("--out", idx_out, "Index file to write")->required();
    idx->add_option("--metric", idx_metric, "cosine or l2");
    idx->add_option("--encoder-url", idx_encoder, "Remote encoder endpoint");

    // query
    auto* qry = app.add_subcommand("query", "Describe a snapshot using retrieved context");
    PipelineOptions q_opts;
    add_pipeline_options(qry, q_opts);
    std::string q_snapshot, q_question, q_level = "signal_info_general";
    std::optional<std::uint64_t> q_snapshot_id;
    double q_temperature = GenParams::kDefaultTemperature;
    int q_top_k = GenParams::kDefaultTopK, q_max_tokens = GenParams::kMaxTokensLimit;
    bool q_json = false;
    qry->add_option("--snapshot", q_snapshot, "Snapshot file (.gsnp)");
    qry->add_option("--snapshot-id", q_snapshot_id, "Snapshot id inside --dataset");
    qry->add_option("--question", q_question, "User question")->required();
    qry->add_option("--detail-level", q_level,
                    "general | signal_info_general | signal_info_detailed | general_with_interpretation");
    auto* opt_temp = qry->add_option("--temperature", q_temperature, "Sampling temperature [0, 1]");
    auto* opt_topk = qry->add_option("--top-k", q_top_k, "Sampling top_k (1 < k < 100)");
    auto* opt_maxtok = qry->add_option("--max-tokens", q_max_tokens, "Token budget (<= 500)");
    qry->add_flag("--json", q_json, "Print JSON");

    // classify
    auto* cls = app.add_subcommand("classify", "Predict type, subjammer, power and bandwidth");
    PipelineOptions c_opts;
    add_pipeline_options(cls, c_opts);
    std::string c_snapshot;
    std::optional<std::uint64_t> c_snapshot_id;
    cls->add_option("--snapshot", c_snapshot, "Snapshot file (.gsnp)");
    cls->add_option("--snapshot-id", c_snapshot_id, "Snapshot id inside --dataset");

    // bench
    auto* bench = app.add_subcommand("bench", "Score retrieval predictions on a held-out dataset");
    std::string b_index, b_test, b_dump, b_report, b_score;
    std::size_t b_k = kDefaultNeighbors;
    bench->add_option("--index", b_index, "Index built from the training split");
    bench->add_option("--test", b_test, "Held-out dataset directory");
    bench->add_option("-k,--k", b_k, "Neighbours");
    bench->add_option("--dump", b_dump, "Write per-item prediction CSV");
    bench->add_option("--report", b_report, "Write metrics JSON");
    bench->add_option("--score", b_score, "Score an existing prediction CSV instead");

    // tsne
    auto* ts = app.add_subcommand("tsne", "Project dataset embeddings to 2-D");
    std::string t_dataset, t_out;
    TsneParams t_params;
    std::vector<std::string> t_types{"Chirp", "FreqHopper", "Multitone", "Noise"};
    std::size_t t_limit = 0;
    ts->add_option("--dataset", t_dataset, "Dataset directory")->required();
    ts->add_option("--out", t_out, "Output prefix (writes .csv, .json, .svg)")->required();
    ts->add_option("--types", t_types, "Interference types to include");
    ts->add_option("--limit", t_limit, "Maximum points per type (0 = all)");
    ts->add_option("--perplexity", t_params.perplexity);
    ts->add_option("--iterations", t_params.iterations);
    ts->add_option("--learning-rate", t_params.learning_rate);
    ts->add_option("--seed", t_params.seed);

    // serve
    auto* srv = app.add_subcommand("serve", "Serve /query, /classify and /healthz over HTTP");
    PipelineOptions s_opts;
    add_pipeline_options(srv, s_opts);
    std::string s_host = "127.0.0.1";
    int s_port = 8080;
    srv->add_option("--host", s_host);
    srv->add_option("--port", s_port);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            DatasetConfig config = DatasetConfig::uniform(per_class, gen_seed);
            for (const auto& [name, n] : class_counts) config.counts[parse_interference_type(name)] = n;
            if (!bandwidths.empty()) config.bandwidths = parse_number_list(bandwidths, "bandwidths");
            if (!powers.empty()) config.powers = parse_number_list(powers, "powers");
            if (!scenarios.empty()) {
                config.scenarios.clear();
                for (double s : parse_number_list(scenarios, "scenarios")) config.scenarios.push_back(static_cast<int>(s));
            }
            const auto manifest = generate_dataset(config, gen_out);
            std::cout << "wrote " << manifest.entries.size() << " snapshots to " << gen_out << "\n";
        } else if (*emb) {
            const Snapshot snap = read_snapshot(emb_snapshot);
            const Embedding e = emb_encoder.empty() ? embed_baseline(snap) : embed_external(snap, {emb_encoder});
            std::cout << nlohmann::json{{"snapshot_id", e.snapshot_id},
                                        {"source", std::string(to_string(e.source))},
                                        {"vector", e.vector}}
                             .dump()
                      << "\n";
        } else if (*idx) {
            const auto manifest = load_manifest(fs::path(idx_dataset) / "manifest.json");
            std::optional<Pipeline> remote;
            std::vector<LabeledEmbedding> items;
            if (idx_encoder.empty()) {
                items = embed_dataset(idx_dataset, manifest, nullptr);
            } else {
                PipelineConfig pc;
                pc.embedder = EmbedderKind::External;
                pc.encoder.url = idx_encoder;
                remote.emplace(pc, VectorIndex());
                items = embed_dataset(idx_dataset, manifest, &*remote);
            }
            VectorIndex index(parse_metric(idx_metric));
            for (const auto& item : items) index.add(item.embedding, item.spec);
            save_index(index, idx_out);
            std::cout << "indexed " << index.size() << " snapshots into " << idx_out << "\n";
        } else if (*qry) {
            PipelineConfig config = build_config(q_opts);
            GenParams params(opt_temp->count() ? q_temperature : config.params.temperature(),
                             opt_topk->count() ? q_top_k : config.params.top_k(),
                             opt_maxtok->count() ? q_max_tokens : config.params.max_tokens());
            const Pipeline pipeline = Pipeline::open(config);
            const Snapshot snap = resolve_snapshot(pipeline, q_snapshot, q_snapshot_id);
            const QueryResult r =
                pipeline.query(snap, {q_question, parse_detail_level(q_level)}, config.k, params);
            std::cerr << "latency_ms embed=" << r.latency.embed_ms << " retrieve=" << r.latency.retrieve_ms
                      << " assemble=" << r.latency.assemble_ms << " describe=" << r.latency.describe_ms
                      << " total=" << r.latency.total_ms << "\n";
            if (q_json)
                std::cout << to_json(r, false).dump(2) << "\n";
            else
                std::cout << r.description.text << "\n";
        } else if (*cls) {
            const Pipeline pipeline = Pipeline::open(build_config(c_opts));
            const Snapshot snap = resolve_snapshot(pipeline, c_snapshot, c_snapshot_id);
            std::cout << to_json(pipeline.classify(snap, pipeline.config().k)).dump(2) << "\n";
        } else if (*bench) {
            Metrics metrics;
            if (!b_score.empty()) {
                std::ifstream in(b_score);
                if (!in) throw IoError("cannot read '" + b_score + "'");
                const auto rows = read_predictions_csv(in);
                metrics = score_predictions(rows);
                metrics.k = b_k;
            } else {
                if (b_index.empty() || b_test.empty()) throw ParameterError("bench", "--index and --test are required");
                const VectorIndex index = load_index(b_index);
                const auto manifest = load_manifest(fs::path(b_test) / "manifest.json");
                const auto test = embed_dataset(b_test, manifest, nullptr);
                const Evaluation eval = evaluate(index, test, b_k);
                metrics = eval.metrics;
                if (!b_dump.empty()) {
                    std::ofstream out(b_dump);
                    if (!out) throw IoError("cannot write '" + b_dump + "'");
                    write_predictions_csv(eval.rows, out);
                }
            }
            const std::string report = to_json(metrics).dump(2) + "\n";
            if (!b_report.empty()) write_text(b_report, report);
            std::cout << report;
        } else if (*ts) {
            const auto manifest = load_manifest(fs::path(t_dataset) / "manifest.json");
            std::map<InterferenceType, std::size_t> taken;
            DatasetManifest subset;
            for (const auto& name : t_types) subset.counts[parse_interference_type(name)] = 0;
            for (const auto& e : manifest.entries) {
                if (!subset.counts.contains(e.spec.intf_type)) continue;
                if (t_limit && taken[e.spec.intf_type] >= t_limit) continue;
                ++taken[e.spec.intf_type];
                ++subset.counts[e.spec.intf_type];
                subset.entries.push_back(e);
            }
            const auto items = embed_dataset(t_dataset, subset, nullptr);
            std::vector<double> points;
            std::vector<std::string> labels;
            std::vector<std::uint64_t> ids;
            for (const auto& item : items) {
                points.insert(points.end(), item.embedding.vector.begin(), item.embedding.vector.end());
                labels.emplace_back(to_string(item.spec.intf_type));
                ids.push_back(item.embedding.snapshot_id);
            }
            const auto projected = tsne(points, items.size(), kEmbeddingDim, t_params, labels);
            std::ofstream csv(t_out + ".csv");
            write_projection_csv(projected, ids, csv);
            write_text(t_out + ".json",
                       projection_report(projected, t_params,
                                         "classes are synthetic interference types standing in for the four "
                                         "unnamed classes of the reference figure")
                               .dump(2) +
                           "\n");
            std::ofstream svg(t_out + ".svg");
            write_projection_svg(projected, svg);
            std::cout << "projected " << items.size() << " points, final KL " << projected.final_kl << "\n";
        } else if (*srv) {
            auto pipeline = std::make_shared<const Pipeline>(Pipeline::open(build_config(s_opts)));
            Service service(pipeline);
            std::cerr << "serving on http://" << s_host << ":" << s_port << "\n";
            if (!service.listen(s_host, s_port)) throw IoError("cannot listen on " + s_host + ":" + std::to_string(s_port));
        }
    } catch (const StageError& e) {
        std::cerr << "error [" << e.stage() << "]: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
