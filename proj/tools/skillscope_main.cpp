// skillscope: end-to-end pipeline over tagged course/program descriptions.
// Stages (ingest -> preprocess -> fit -> scan -> topics -> profile) hand off
// through artifacts in a run directory; the manifest records digests so a
// stage refuses to run on stale upstream outputs.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "skillscope/common.hpp"
#include "skillscope/corpus.hpp"
#include "skillscope/csv.hpp"
#include "skillscope/ctm.hpp"
#include "skillscope/lda.hpp"
#include "skillscope/lsa.hpp"
#include "skillscope/manifest.hpp"
#include "skillscope/model_selection.hpp"
#include "skillscope/preprocess.hpp"
#include "skillscope/profiles.hpp"

namespace {

using namespace skillscope;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

void print_warnings(const std::vector<Warning>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w.message << "\n";
}

struct StageContext {
    std::string run_dir;
    std::uint64_t seed = 42;
};

void run_ingest(const StageContext& ctx, const std::string& input, const std::string& format) {
    CorpusFormat fmt;
    if (format == "csv") fmt = CorpusFormat::Csv;
    else if (format == "jsonl") fmt = CorpusFormat::Jsonl;
    else throw CLI::ValidationError("--format must be csv or jsonl");

    RunManifest manifest(ctx.run_dir);
    RunLock lock(manifest.root());
    auto result = read_documents(input, fmt);
    print_warnings(result.warnings);
    auto stats = corpus_stats(result.set);

    csv::write_file(manifest.artifact("documents.jsonl").string(), documents_to_jsonl(result.set));
    csv::write_file(manifest.artifact("corpus_stats.csv").string(), corpus_stats_csv(stats));

    manifest.set_seed(ctx.seed);
    std::string cfg = "ingest:" + format + ":" + file_digest(input);
    manifest.record_stage("ingest", hex_digest(fnv1a(cfg)), {{input, file_digest(input)}},
                          {"documents.jsonl", "corpus_stats.csv"});
    std::cout << "ingested " << stats.total_documents << " documents, " << stats.distinct_programs << " programs, "
              << stats.distinct_institutions << " institutions\n";
}

void run_preprocess(const StageContext& ctx, const std::string& config_path, std::optional<int> min_doc_freq) {
    if (config_path.empty()) throw CLI::ValidationError("preprocess requires --config");
    RunManifest manifest(ctx.run_dir);
    RunLock lock(manifest.root());
    manifest.require_upstream("preprocess");

    PreprocessConfig config = load_preprocess_config(config_path);
    if (min_doc_freq) {
        if (*min_doc_freq < 1) throw CLI::ValidationError("--min-doc-freq must be >= 1");
        config.min_doc_freq = static_cast<std::uint32_t>(*min_doc_freq);
    }

    auto docs = read_documents(manifest.artifact("documents.jsonl").string(), CorpusFormat::Jsonl);
    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> token_lists;
    ids.reserve(docs.set.size());
    for (const auto& doc : docs.set.documents) {
        ids.push_back(doc.id);
        token_lists.push_back(tokenize(doc.text, config));
    }
    Vocabulary vocab = build_vocabulary(token_lists, config.min_doc_freq);
    BowCorpus corpus = build_bow_corpus(ids, token_lists, vocab);
    print_warnings(corpus.flagged_empty);

    auto tf = term_frequency_table(corpus.documents, vocab);
    std::string tf_tsv = "term\tcount\n";
    for (const auto& tc : tf) tf_tsv += tc.term + "\t" + std::to_string(tc.count) + "\n";

    csv::write_file(manifest.artifact("vocabulary.tsv").string(), vocab.to_tsv());
    csv::write_file(manifest.artifact("corpus.bow").string(), bow_to_text(corpus.documents));
    csv::write_file(manifest.artifact("term_frequency.tsv").string(), tf_tsv);

    std::string cfg = "preprocess:" + file_digest(config_path) + ":" + std::to_string(config.min_doc_freq);
    manifest.record_stage("preprocess", hex_digest(fnv1a(cfg)), {{config_path, file_digest(config_path)}},
                          {"vocabulary.tsv", "corpus.bow", "term_frequency.tsv"});
    std::cout << "vocabulary " << vocab.size() << " terms, " << corpus.documents.size() << " documents retained, "
              << corpus.flagged_empty.size() << " empty documents excluded\n";
}

ModelConfig make_model_config(const StageContext& ctx, int k, int max_em_iters, int inner_max_iters,
                              const std::string& init) {
    ModelConfig config;
    config.k = k;
    config.seed = ctx.seed;
    config.max_em_iters = max_em_iters;
    config.inner_max_iters = inner_max_iters;
    config.init = init == "lda" ? InitMode::FromLda : InitMode::SeededRandom;
    return config;
}

void run_fit(const StageContext& ctx, const std::string& model_name, int k, int max_em_iters, int inner_max_iters,
             const std::string& init, int threads) {
    RunManifest manifest(ctx.run_dir);
    RunLock lock(manifest.root());
    manifest.require_upstream("fit");

    Vocabulary vocab = Vocabulary::from_tsv(csv::read_file(manifest.artifact("vocabulary.tsv").string()));
    auto corpus = bow_from_text(csv::read_file(manifest.artifact("corpus.bow").string()));

    nlohmann::json model_json;
    if (model_name == "ctm") {
        ModelConfig config = make_model_config(ctx, k, max_em_iters, inner_max_iters, init);
        CtmModel model = fit_ctm(corpus, vocab, config, FitOptions{threads});
        model_json = ctm_to_json(model);
        std::cout << "ctm fit: k=" << k << " elbo=" << format_double(model.diagnostics.final_elbo)
                  << " iterations=" << model.diagnostics.em_iterations << "\n";
    } else if (model_name == "lda") {
        ModelConfig config = make_model_config(ctx, k, max_em_iters, inner_max_iters, "random");
        LdaModel model = fit_lda(corpus, vocab, config, LdaOptions{0.0, false, threads});
        model_json = lda_to_json(model);
        std::cout << "lda fit: k=" << k << " elbo=" << format_double(model.diagnostics.final_elbo)
                  << " iterations=" << model.diagnostics.em_iterations << "\n";
    } else if (model_name == "lsa") {
        LsaModel model = fit_lsa(corpus, vocab, k);
        model_json = lsa_to_json(model);
        std::cout << "lsa fit: k=" << k << " leading singular value=" << format_double(model.singular_values(0))
                  << "\n";
    } else {
        throw CLI::ValidationError("--model must be ctm, lda or lsa");
    }
    csv::write_file(manifest.artifact("model.json").string(), model_json.dump(2) + "\n");

    std::string cfg = "fit:" + model_name + ":" + std::to_string(k) + ":" + std::to_string(ctx.seed) + ":" +
                      std::to_string(max_em_iters) + ":" + std::to_string(inner_max_iters) + ":" + init;
    manifest.set_seed(ctx.seed);
    manifest.record_stage("fit", hex_digest(fnv1a(cfg)), {}, {"model.json"});
}

void run_scan(const StageContext& ctx, int k_min, int k_max, int restarts, int threads) {
    RunManifest manifest(ctx.run_dir);
    RunLock lock(manifest.root());
    manifest.require_upstream("scan");
    if (restarts < 1) throw CLI::ValidationError("--restarts must be >= 1");

    Vocabulary vocab = Vocabulary::from_tsv(csv::read_file(manifest.artifact("vocabulary.tsv").string()));
    auto corpus = bow_from_text(csv::read_file(manifest.artifact("corpus.bow").string()));

    ModelConfig base;
    base.seed = ctx.seed;
    FitOptions options{threads};
    CoherenceCurve curve;
    if (restarts == 1) {
        curve = scan_k(corpus, vocab, k_min, k_max, base, options, [](const CoherenceEntry& e) {
            if (e.ok)
                std::cout << "k=" << e.k << " coherence=" << format_double(e.mean_coherence) << "\n";
            else
                std::cout << "k=" << e.k << " failed: " << e.error << "\n";
            std::cout.flush();
        });
    } else {
        // seed-averaged variant; the single-fit curve above is the default
        curve.k_min = k_min;
        curve.k_max = k_max;
        for (int k = k_min; k <= k_max; ++k) {
            CoherenceEntry entry;
            entry.k = k;
            entry.seed = base.seed + static_cast<std::uint64_t>(k);
            double total = 0.0;
            int ok_count = 0;
            for (int r = 0; r < restarts; ++r) {
                ModelConfig config = base;
                config.k = k;
                config.seed = base.seed + static_cast<std::uint64_t>(k) + 7919ull * static_cast<std::uint64_t>(r);
                try {
                    CtmModel model = fit_ctm(corpus, vocab, config, options);
                    int top_n = std::min(10, model.v);
                    auto tops = topic_top_words(model, vocab, top_n);
                    std::vector<std::vector<std::string>> words(tops.size());
                    for (std::size_t i = 0; i < tops.size(); ++i)
                        for (const auto& t : tops[i]) words[i].push_back(t.term);
                    total += umass_coherence(words, corpus, vocab, static_cast<std::size_t>(top_n)).mean;
                    ++ok_count;
                } catch (const std::exception& e) {
                    entry.error = e.what();
                }
            }
            entry.ok = ok_count > 0;
            if (entry.ok) entry.mean_coherence = total / ok_count;
            std::cout << "k=" << k << (entry.ok ? " coherence=" + format_double(entry.mean_coherence)
                                                : " failed: " + entry.error)
                      << "\n";
            std::cout.flush();
            curve.entries.push_back(std::move(entry));
        }
    }

    csv::write_file(manifest.artifact("scan.csv").string(), scan_csv(curve));
    std::size_t failures = 0;
    for (const auto& e : curve.entries)
        if (!e.ok) ++failures;

    nlohmann::json summary;
    summary["k_min"] = k_min;
    summary["k_max"] = k_max;
    summary["failed_fits"] = failures;
    try {
        ElbowResult elbow = detect_elbow(curve);
        summary["k_elbow"] = elbow.k_elbow;
        summary["k_argmax"] = elbow.k_argmax;
        std::cout << "k_argmax=" << elbow.k_argmax << " k_elbow=" << elbow.k_elbow
                  << " (choose between them; the curve is in scan.csv)\n";
    } catch (const DataError& e) {
        std::cerr << "warning: " << e.what() << "\n";
    }
    if (failures > 0) std::cerr << "warning: " << failures << " of " << curve.entries.size() << " fits failed\n";
    csv::write_file(manifest.artifact("scan_summary.json").string(), summary.dump(2) + "\n");

    std::string cfg = "scan:" + std::to_string(k_min) + ":" + std::to_string(k_max) + ":" + std::to_string(ctx.seed) +
                      ":" + std::to_string(restarts);
    manifest.set_seed(ctx.seed);
    manifest.record_stage("scan", hex_digest(fnv1a(cfg)), {}, {"scan.csv", "scan_summary.json"});
}

void run_topics(const StageContext& ctx, int top_n) {
    RunManifest manifest(ctx.run_dir);
    RunLock lock(manifest.root());
    manifest.require_upstream("topics");

    Vocabulary vocab = Vocabulary::from_tsv(csv::read_file(manifest.artifact("vocabulary.tsv").string()));
    nlohmann::json mj = nlohmann::json::parse(csv::read_file(manifest.artifact("model.json").string()));
    std::string kind = mj.value("model", "");

    std::vector<std::vector<TopicTerm>> topics;
    if (kind == "ctm") {
        topics = topic_top_words(ctm_from_json(mj), vocab, top_n);
    } else if (kind == "lda") {
        topics = top_terms_by_weight(lda_from_json(mj).beta, vocab, top_n);
    } else if (kind == "lsa") {
        auto comps = lsa_top_terms(lsa_from_json(mj), vocab, top_n);
        topics.reserve(comps.size());
        for (const auto& comp : comps) {
            std::vector<TopicTerm> t;
            for (const auto& lt : comp) t.push_back({lt.term, lt.loading});
            topics.push_back(std::move(t));
        }
    } else {
        throw DataError("model.json has unknown model kind '" + kind + "'");
    }
    csv::write_file(manifest.artifact("topics.tsv").string(), top_words_tsv(topics));
    for (std::size_t i = 0; i < topics.size(); ++i) {
        std::cout << "topic " << i << ":";
        for (const auto& t : topics[i]) std::cout << " " << t.term;
        std::cout << "\n";
    }

    manifest.record_stage("topics", hex_digest(fnv1a("topics:" + std::to_string(top_n))), {}, {"topics.tsv"});
}

void run_profile(const StageContext& ctx, const std::string& group_by, const std::string& labels_path, bool flat,
                 int threads) {
    if (group_by != "institution") throw CLI::ValidationError("--group-by currently supports only 'institution'");
    RunManifest manifest(ctx.run_dir);
    RunLock lock(manifest.root());
    manifest.require_upstream("profile");

    nlohmann::json mj = nlohmann::json::parse(csv::read_file(manifest.artifact("model.json").string()));
    if (mj.value("model", "") != std::string("ctm"))
        throw DataError("profile requires a ctm model; re-run fit with --model ctm");
    CtmModel model = ctm_from_json(mj);
    Vocabulary vocab = Vocabulary::from_tsv(csv::read_file(manifest.artifact("vocabulary.tsv").string()));
    if (!model.vocab_digest.empty() && model.vocab_digest != vocab.digest())
        throw DataError("model.json was fit on a different vocabulary; re-run fit");
    auto corpus = bow_from_text(csv::read_file(manifest.artifact("corpus.bow").string()));
    auto docs = read_documents(manifest.artifact("documents.jsonl").string(), CorpusFormat::Jsonl);

    std::map<int, std::string> labels;
    std::string labels_digest = "none";
    if (!labels_path.empty()) {
        nlohmann::json lj = nlohmann::json::parse(csv::read_file(labels_path), nullptr, false);
        if (lj.is_discarded() || !lj.is_object()) throw DataError("label map is not a JSON object: " + labels_path);
        for (const auto& [key, value] : lj.items()) labels[std::stoi(key)] = value.get<std::string>();
        labels_digest = file_digest(labels_path);
    }

    ModelConfig config;
    config.k = model.k;
    config.seed = manifest.seed();
    auto posteriors = document_posteriors(model, corpus, config, FitOptions{threads});
    auto profiles = institution_profile(posteriors, docs.set, flat);

    csv::write_file(manifest.artifact("profiles.csv").string(), profiles_csv(profiles));
    csv::write_file(manifest.artifact("ranking.tsv").string(), ranking_tsv(profiles, labels));
    auto svgs = export_profiles(profiles, ProfileExportFormat::Svg, manifest.root().string(), labels);

    std::vector<std::string> outputs = {"profiles.csv", "ranking.tsv"};
    for (const auto& path : svgs) outputs.push_back(std::filesystem::path(path).filename().string());

    std::cout << profiles.size() << " institution profiles (" << kProfileScopeNote << ")\n";
    for (const auto& p : profiles) {
        auto ranked = rank_topics(p, labels);
        print_warnings(ranked.warnings);
        std::cout << p.institution << ":";
        for (const auto& label : ranked.labels) std::cout << " " << label;
        std::cout << "\n";
    }

    std::string cfg = "profile:" + group_by + ":" + labels_digest + ":" + (flat ? "flat" : "two-stage");
    manifest.record_stage("profile", hex_digest(fnv1a(cfg)), {}, outputs);
}

void run_report(const StageContext& ctx) {
    auto manifest_path = std::filesystem::path(ctx.run_dir) / "manifest.json";
    if (!std::filesystem::exists(manifest_path))
        throw DataError("no manifest in run directory '" + ctx.run_dir + "'; nothing to report");
    RunManifest manifest(ctx.run_dir);

    std::cout << "run directory: " << ctx.run_dir << "\n";
    std::cout << "seed: " << manifest.seed() << "\n";
    if (manifest.has_stage("ingest")) {
        std::cout << "\n== corpus ==\n";
        std::cout << csv::read_file(manifest.artifact("corpus_stats.csv").string());
    }
    if (manifest.has_stage("fit")) {
        nlohmann::json mj = nlohmann::json::parse(csv::read_file(manifest.artifact("model.json").string()));
        std::cout << "\n== model ==\n";
        std::cout << "kind: " << mj.value("model", "?") << "  k: " << mj.value("k", 0);
        if (mj.contains("diagnostics"))
            std::cout << "  final elbo: " << format_double(mj["diagnostics"].value("final_elbo", 0.0))
                      << "  em iterations: " << mj["diagnostics"].value("em_iterations", 0);
        std::cout << "\n";
    }
    if (manifest.has_stage("scan")) {
        nlohmann::json sj = nlohmann::json::parse(csv::read_file(manifest.artifact("scan_summary.json").string()));
        std::cout << "\n== scan ==\n";
        if (sj.contains("k_argmax"))
            std::cout << "k_argmax: " << sj["k_argmax"] << "  k_elbow: " << sj["k_elbow"] << "\n";
        std::cout << csv::read_file(manifest.artifact("scan.csv").string());
    }
    if (manifest.has_stage("topics")) {
        std::cout << "\n== top words ==\n";
        std::cout << csv::read_file(manifest.artifact("topics.tsv").string());
    }
    if (manifest.has_stage("profile")) {
        std::cout << "\n== profiles (" << kProfileScopeNote << ") ==\n";
        std::cout << csv::read_file(manifest.artifact("profiles.csv").string());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"skillscope: topic structure mining over tagged text corpora"};
    app.require_subcommand(1);
    app.fallthrough(true);

    StageContext ctx;
    ctx.run_dir = "run";
    if (const char* env = std::getenv("SKILLSCOPE_RUN_DIR")) ctx.run_dir = env;
    app.add_option("--run-dir", ctx.run_dir, "run directory holding stage artifacts");
    app.add_option("--seed", ctx.seed, "seed for every random choice in the run");
    std::string global_config;
    app.add_option("--config", global_config, "preprocess config file (JSON)");

    auto* ingest = app.add_subcommand("ingest", "load and validate a document collection");
    std::string input;
    std::string format = "csv";
    ingest->add_option("--input", input, "corpus file")->required();
    ingest->add_option("--format", format, "csv or jsonl");

    auto* preprocess = app.add_subcommand("preprocess", "tokenize and build the bag-of-words corpus");
    std::string pp_config;
    preprocess->add_option("--config", pp_config, "preprocess config file (JSON)");
    std::optional<int> min_doc_freq;
    preprocess->add_option("--min-doc-freq", min_doc_freq, "minimum document frequency for vocabulary terms");

    auto* fit = app.add_subcommand("fit", "fit a topic model on the preprocessed corpus");
    std::string model_name = "ctm";
    int fit_k = 7;
    int max_em_iters = 100;
    int inner_max_iters = 50;
    std::string init = "random";
    int threads = 0;
    fit->add_option("--model", model_name, "ctm, lda or lsa");
    fit->add_option("--k", fit_k, "topic count");
    fit->add_option("--max-em-iters", max_em_iters, "EM iteration cap");
    fit->add_option("--inner-max-iters", inner_max_iters, "per-document sweep cap");
    fit->add_option("--init", init, "ctm initialization: random or lda");
    fit->add_option("--threads", threads, "worker threads (0 = auto); does not change results");

    auto* scan = app.add_subcommand("scan", "coherence scan over a range of topic counts");
    int k_min = 2;
    int k_max = 30;
    int restarts = 1;
    int scan_threads = 0;
    scan->add_option("--kmin", k_min, "smallest topic count");
    scan->add_option("--kmax", k_max, "largest topic count");
    scan->add_option("--restarts", restarts, "fits per K averaged over seeds (default 1)");
    scan->add_option("--threads", scan_threads, "worker threads (0 = auto); does not change results");

    auto* topics = app.add_subcommand("topics", "write the top-terms report for the fitted model");
    int top_n = 10;
    topics->add_option("--top", top_n, "terms per topic");

    auto* profile = app.add_subcommand("profile", "aggregate document posteriors into institution profiles");
    std::string group_by = "institution";
    std::string labels_path;
    bool flat = false;
    int profile_threads = 0;
    profile->add_option("--group-by", group_by, "grouping key (institution)");
    profile->add_option("--labels", labels_path, "JSON map of topic index to label");
    profile->add_flag("--flat", flat, "plain document mean instead of two-stage averaging");
    profile->add_option("--threads", profile_threads, "worker threads (0 = auto); does not change results");

    auto* report = app.add_subcommand("report", "print a human-readable summary of the run");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (ingest->parsed()) run_ingest(ctx, input, format);
        else if (preprocess->parsed()) run_preprocess(ctx, pp_config.empty() ? global_config : pp_config, min_doc_freq);
        else if (fit->parsed()) run_fit(ctx, model_name, fit_k, max_em_iters, inner_max_iters, init, threads);
        else if (scan->parsed()) run_scan(ctx, k_min, k_max, restarts, scan_threads);
        else if (topics->parsed()) run_topics(ctx, top_n);
        else if (profile->parsed()) run_profile(ctx, group_by, labels_path, flat, profile_threads);
        else if (report->parsed()) run_report(ctx);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitOk;
}
