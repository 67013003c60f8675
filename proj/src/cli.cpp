#include "mlceval/cli.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_set>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlceval/confusion.hpp"
#include "mlceval/dataset.hpp"
#include "mlceval/gateway.hpp"
#include "mlceval/metrics.hpp"
#include "mlceval/report.hpp"
#include "mlceval/rng.hpp"
#include "mlceval/splitter.hpp"
#include "mlceval/synth.hpp"

namespace mlceval::cli {

namespace {

using ojson = nlohmann::ordered_json;

LabelSchema schema_from_option(const std::string& schema_path) {
    if (schema_path.empty()) return LabelSchema::suicidality();
    return load_schema_file(schema_path);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file \"" + path + "\"");
    out << content;
}

ojson read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file \"" + path + "\"");
    try {
        return ojson::parse(in);
    } catch (const std::exception& e) {
        throw ParseError("file \"" + path + "\": invalid JSON (" + e.what() + ")");
    }
}

PromptTemplate template_from_option(const std::string& name) {
    if (name.empty() || name == "zero") return PromptTemplate::zero_default();
    if (name == "guide") return PromptTemplate::guide_default();
    return PromptTemplate::load_file(name);
}

std::vector<LabelGroup> groups_from_option(const std::string& name,
                                           const LabelSchema& schema) {
    if (name.empty() || name == "si-sa") return si_sa_groups(schema);
    const ojson doc = read_json_file(name);
    if (!doc.contains("groups")) throw ParseError("group file must contain \"groups\"");
    std::vector<LabelGroup> groups;
    for (const auto& g : doc["groups"])
        groups.push_back(LabelGroup{g.value("name", ""),
                                    parse_pattern(g.at("pattern").get<std::string>(), schema)});
    return groups;
}

void print_warnings(std::ostream& err, const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) err << "warning: " << w << "\n";
}

ojson distribution_to_json(const DistributionSummary& stats, const LabelSchema& schema) {
    const PowerSetOrder order(schema.size());
    ojson doc;
    doc["n"] = stats.n;
    doc["total_single_labels"] = stats.total_single_labels;
    ojson labels;
    for (std::size_t i = 0; i < schema.size(); ++i)
        labels[schema.label(i)] = ojson{{"count", stats.label_counts[i]},
                                        {"proportion", stats.label_proportions[i]}};
    doc["labels"] = std::move(labels);
    ojson sets;
    for (std::size_t k = 0; k < order.size(); ++k)
        if (stats.set_counts[k] > 0)
            sets[format_binary_code(order.at(k), schema)] = stats.set_counts[k];
    doc["sets"] = std::move(sets);
    doc["cardinality_histogram"] = stats.cardinality_histogram;
    ojson unobs = ojson::array();
    for (std::size_t k : stats.unobserved_sets)
        unobs.push_back(format_binary_code(order.at(k), schema));
    doc["unobserved_sets"] = std::move(unobs);
    return doc;
}

enum class FailurePolicy { exclude, empty_set };

FailurePolicy failure_policy_from_string(const std::string& text) {
    if (text == "exclude") return FailurePolicy::exclude;
    if (text == "empty-set") return FailurePolicy::empty_set;
    throw ValidationError("unknown failure policy \"" + text +
                          "\" (expected exclude or empty-set)");
}

// Joins corpus and prediction files; applies the failure policy; returns the
// aligned pairs plus the manifest of the first file and the failure count.
struct EvalInput {
    AlignedPairs pairs;
    RunManifest manifest;
    std::int64_t failures = 0;
};

EvalInput load_eval_input(const Corpus& corpus, const std::vector<std::string>& pred_paths,
                          FailurePolicy policy, bool lenient, std::ostream& err) {
    std::vector<PredictionRecord> predictions;
    std::unordered_set<std::string> failed_ids;
    std::int64_t failures = 0;
    RunManifest manifest;
    bool first = true;
    std::optional<int> common_fold;
    for (const auto& path : pred_paths) {
        PredictionFile file = load_predictions_file(path, corpus.schema());
        print_warnings(err, file.warnings);
        if (first) {
            manifest = file.manifest;
            common_fold = file.manifest.fold;
            first = false;
        } else if (common_fold != file.manifest.fold) {
            manifest.fold.reset();  // pooled across folds
        }
        for (auto& rec : file.records) predictions.push_back(std::move(rec));
        for (auto& f : file.failures) {
            ++failures;
            if (policy == FailurePolicy::empty_set)
                predictions.push_back(
                    PredictionRecord{f.id, LabelSet(corpus.schema().size()), f.raw});
            else
                failed_ids.insert(f.id);
        }
    }

    const Corpus* effective = &corpus;
    std::optional<Corpus> reduced;
    if (!failed_ids.empty()) {
        std::vector<AnnotatedInstance> kept;
        for (const auto& inst : corpus.instances())
            if (!failed_ids.count(inst.id)) kept.push_back(inst);
        if (kept.empty())
            throw ValidationError("all instances failed parsing; nothing to evaluate");
        reduced.emplace(corpus.schema(), std::move(kept));
        effective = &*reduced;
        err << "warning: excluding " << failed_ids.size()
            << " instances with failed predictions\n";
    }

    AlignResult aligned =
        align(*effective, predictions, lenient ? AlignMode::lenient : AlignMode::strict);
    if (!aligned.dropped_corpus_ids.empty())
        err << "warning: dropped " << aligned.dropped_corpus_ids.size()
            << " corpus ids without predictions\n";
    if (!aligned.dropped_prediction_ids.empty())
        err << "warning: dropped " << aligned.dropped_prediction_ids.size()
            << " predictions without corpus ids\n";
    return EvalInput{std::move(aligned.pairs), std::move(manifest), failures};
}

// Subcommand configuration, bound to CLI11 options.
struct Options {
    std::string corpus_path;
    std::string schema_path;
    std::string json_out;

    int k = 5;
    int repeats = 1;
    std::string policy = "label-set";
    std::uint64_t seed = 42;
    std::string out_path;
    std::string groups;
    std::string export_dir;
    std::string template_name;

    std::string preset;
    std::string spec_path;
    std::string kernel_path;
    std::string fixture_path;
    std::string pred_out;
    std::string dump_spec;
    std::string model = "synthetic";

    std::string endpoint;
    std::string base_path = "/v1";
    std::string credential_env = "MLCEVAL_API_KEY";
    double temperature = 0.0;
    int timeout_ms = 30000;
    int concurrency = 4;
    int attempts = 3;
    double backoff_ms = 250.0;
    int repeat = 0;
    std::optional<int> fold;
    std::optional<std::uint64_t> run_seed;
    std::string strategy;

    std::vector<std::string> pred_paths;
    std::string failure_policy = "exclude";
    bool lenient = false;
    std::string tsv_out;
    std::string per_fold_dir;

    std::string matrix_out;
    std::string svg_out;
    bool textual = false;
    bool compact = false;
    std::vector<std::string> drilldowns;
    std::vector<std::string> queries;

    std::vector<std::string> report_paths;
    std::string aggregate_path;
};

int cmd_stats(const Options& opt, std::ostream& out, std::ostream& err) {
    const LabelSchema schema = schema_from_option(opt.schema_path);
    std::vector<std::string> warnings;
    const Corpus corpus = load_corpus_file(opt.corpus_path, schema, &warnings);
    print_warnings(err, warnings);
    const DistributionSummary stats = corpus_stats(corpus);
    out << render_distribution(stats, schema);
    if (!opt.json_out.empty())
        write_text_file(opt.json_out, distribution_to_json(stats, schema).dump(2) + "\n");
    return kExitOk;
}

int cmd_split(const Options& opt, std::ostream& out, std::ostream& err) {
    const LabelSchema schema = schema_from_option(opt.schema_path);
    std::vector<std::string> warnings;
    const Corpus corpus = load_corpus_file(opt.corpus_path, schema, &warnings);
    print_warnings(err, warnings);

    const StratifyPolicy policy = stratify_policy_from_string(opt.policy);
    std::vector<LabelGroup> groups;
    const std::vector<LabelGroup>* groups_ptr = nullptr;
    if (policy == StratifyPolicy::group_pattern) {
        groups = groups_from_option(opt.groups, schema);
        groups_ptr = &groups;
    }
    const SplitPlan plan =
        make_splits(corpus, opt.k, opt.repeats, policy, opt.seed, groups_ptr);
    if (!opt.out_path.empty())
        write_text_file(opt.out_path, plan.to_json().dump(2) + "\n");

    if (!opt.export_dir.empty()) {
        const PromptTemplate tmpl = template_from_option(opt.template_name);
        for (int r = 0; r < plan.repeats; ++r) {
            for (int f = 0; f < plan.k; ++f) {
                const std::string path = opt.export_dir + "/finetune-r" +
                                         std::to_string(r) + "-f" + std::to_string(f) +
                                         ".jsonl";
                std::ofstream file(path);
                if (!file) throw ValidationError("cannot write file \"" + path + "\"");
                const std::size_t n = export_finetune(corpus, plan, r, f, tmpl, file);
                out << "wrote " << n << " training records to " << path << "\n";
            }
        }
    }
    out << "split plan: k=" << plan.k << " repeats=" << plan.repeats << " policy=" <<
        to_string(plan.policy) << " seed=" << plan.seed << "\n";
    return kExitOk;
}

int cmd_synth(const Options& opt, std::ostream& out, std::ostream& err) {
    // Dump a preset's config-file form.
    if (!opt.dump_spec.empty()) {
        if (is_distribution_preset(opt.preset))
            write_text_file(opt.dump_spec, paper_corpus_spec().to_json().dump(2) + "\n");
        else if (is_fixture_preset(opt.preset))
            write_text_file(opt.dump_spec, figure4_fixture_spec().to_json().dump(2) + "\n");
        else
            throw ValidationError("--dump-spec requires a known preset name");
        return kExitOk;
    }

    // Perturb an existing corpus with a noise kernel.
    if (!opt.kernel_path.empty()) {
        if (opt.corpus_path.empty() || opt.pred_out.empty())
            throw ValidationError("perturbation requires --corpus and --pred-out");
        const LabelSchema schema = schema_from_option(opt.schema_path);
        std::vector<std::string> warnings;
        const Corpus corpus = load_corpus_file(opt.corpus_path, schema, &warnings);
        print_warnings(err, warnings);
        const NoiseKernel kernel = NoiseKernel::from_json(read_json_file(opt.kernel_path), schema);
        const auto predictions = perturb(corpus, kernel, opt.seed);
        RunManifest manifest;
        manifest.model = opt.model;
        manifest.strategy = Strategy::zero;
        manifest.seed = opt.seed;
        manifest.rng = DeterministicRng::kId;
        std::ofstream file(opt.pred_out);
        if (!file) throw ValidationError("cannot write file \"" + opt.pred_out + "\"");
        write_predictions(file, schema, manifest, predictions);
        out << "wrote " << predictions.size() << " predictions to " << opt.pred_out << "\n";
        return kExitOk;
    }

    // Fixture: corpus plus aligned prediction file.
    const bool fixture = is_fixture_preset(opt.preset) || !opt.fixture_path.empty();
    if (fixture) {
        const FixtureSpec spec = !opt.fixture_path.empty()
                                     ? FixtureSpec::from_json(read_json_file(opt.fixture_path))
                                     : figure4_fixture_spec();
        if (opt.out_path.empty() && opt.pred_out.empty())
            throw ValidationError("fixture generation requires --out and/or --pred-out");
        if (!opt.out_path.empty()) {
            const Corpus corpus = fixture_corpus(spec);
            std::ofstream file(opt.out_path);
            if (!file) throw ValidationError("cannot write file \"" + opt.out_path + "\"");
            write_corpus(file, corpus);
            out << "wrote " << corpus.size() << " instances to " << opt.out_path << "\n";
        }
        if (!opt.pred_out.empty()) {
            const auto predictions = fixture_predictions(spec);
            RunManifest manifest;
            manifest.model = opt.model;
            manifest.strategy = Strategy::zero;
            std::ofstream file(opt.pred_out);
            if (!file) throw ValidationError("cannot write file \"" + opt.pred_out + "\"");
            write_predictions(file, spec.schema, manifest, predictions);
            out << "wrote " << predictions.size() << " predictions to " << opt.pred_out
                << "\n";
        }
        return kExitOk;
    }

    // Corpus generation from a distribution spec or preset.
    DistributionSpec spec = [&] {
        if (!opt.spec_path.empty())
            return DistributionSpec::from_json(read_json_file(opt.spec_path));
        if (is_distribution_preset(opt.preset)) return paper_corpus_spec();
        throw ValidationError("synth requires --preset, --spec, --fixture or --kernel");
    }();
    if (opt.out_path.empty()) throw ValidationError("corpus generation requires --out");
    const Corpus corpus = sample_corpus(spec, opt.seed);
    std::ofstream file(opt.out_path);
    if (!file) throw ValidationError("cannot write file \"" + opt.out_path + "\"");
    write_corpus(file, corpus);
    out << "wrote " << corpus.size() << " instances to " << opt.out_path << "\n";
    return kExitOk;
}

int cmd_predict(const Options& opt, std::ostream& out, std::ostream& err) {
    const LabelSchema schema = schema_from_option(opt.schema_path);
    std::vector<std::string> warnings;
    const Corpus corpus = load_corpus_file(opt.corpus_path, schema, &warnings);
    print_warnings(err, warnings);

    const PromptTemplate tmpl = template_from_option(opt.template_name);
    BackendConfig cfg;
    cfg.endpoint = opt.endpoint;
    cfg.base_path = opt.base_path;
    cfg.model = opt.model;
    cfg.credential_env = opt.credential_env;
    cfg.temperature = opt.temperature;
    cfg.timeout_ms = opt.timeout_ms;
    cfg.max_in_flight = opt.concurrency;
    cfg.retry.max_attempts = opt.attempts;
    cfg.retry.backoff_base_ms = opt.backoff_ms;

    RunInfo info;
    info.repeat = opt.repeat;
    info.fold = opt.fold;
    info.seed = opt.run_seed;
    if (!opt.strategy.empty()) info.strategy = strategy_from_string(opt.strategy);

    const BatchResult result = classify_batch(corpus, tmpl, cfg, info);
    if (result.predictions.empty() && !result.failures.empty())
        throw BackendError("no instance produced a usable prediction; first failure: " +
                           result.failures.front().reason);

    std::ofstream file(opt.out_path);
    if (!file) throw ValidationError("cannot write file \"" + opt.out_path + "\"");
    write_predictions(file, schema, result.manifest, result.predictions, result.failures);
    out << "wrote " << result.predictions.size() << " predictions ("
        << result.failures.size() << " failures) to " << opt.out_path << "\n";
    out << "requests: " << result.telemetry.requests
        << ", retries: " << result.telemetry.retries << "\n";
    if (!result.failures.empty())
        err << "warning: " << result.failures.size() << " instances failed; first: "
            << result.failures.front().id << " (" << result.failures.front().reason << ")\n";
    return kExitOk;
}

int cmd_evaluate(const Options& opt, std::ostream& out, std::ostream& err) {
    const LabelSchema schema = schema_from_option(opt.schema_path);
    std::vector<std::string> warnings;
    const Corpus corpus = load_corpus_file(opt.corpus_path, schema, &warnings);
    print_warnings(err, warnings);
    const FailurePolicy policy = failure_policy_from_string(opt.failure_policy);

    if (!opt.per_fold_dir.empty()) {
        for (std::size_t i = 0; i < opt.pred_paths.size(); ++i) {
            EvalInput input = load_eval_input(corpus, {opt.pred_paths[i]}, policy, true, err);
            EvalOptions options;
            options.manifest = input.manifest;
            options.parse_failures = input.failures;
            const EvalReport report = evaluate(input.pairs, options);
            const std::string name = opt.per_fold_dir + "/report-" + std::to_string(i) +
                                     "-r" + std::to_string(report.manifest.repeat) + "-f" +
                                     (report.manifest.fold
                                          ? std::to_string(*report.manifest.fold)
                                          : std::string("x")) +
                                     ".json";
            write_text_file(name, report.to_json().dump(2) + "\n");
            out << "wrote per-fold report to " << name << "\n";
        }
        if (opt.out_path.empty()) return kExitOk;
    }

    EvalInput input = load_eval_input(corpus, opt.pred_paths, policy, opt.lenient, err);
    EvalOptions options;
    options.manifest = input.manifest;
    options.parse_failures = input.failures;
    const EvalReport report = evaluate(input.pairs, options);
    if (!opt.out_path.empty())
        write_text_file(opt.out_path, report.to_json().dump(2) + "\n");
    if (!opt.tsv_out.empty()) write_text_file(opt.tsv_out, report.to_tsv());
    out << render_overall_table(report);
    return kExitOk;
}

int cmd_confusion(const Options& opt, std::ostream& out, std::ostream& err) {
    const LabelSchema schema = schema_from_option(opt.schema_path);
    std::vector<std::string> warnings;
    const Corpus corpus = load_corpus_file(opt.corpus_path, schema, &warnings);
    print_warnings(err, warnings);
    const FailurePolicy policy = failure_policy_from_string(opt.failure_policy);
    EvalInput input = load_eval_input(corpus, opt.pred_paths, policy, opt.lenient, err);

    const PowerSetOrder order = enumerate_powerset(schema);
    const PowerSetConfusion confusion = build_confusion(input.pairs, order);
    out << render_taxonomy(taxonomy_summary(input.pairs, order));
    out << "trace: " << confusion.trace() << " of " << confusion.n() << "\n";

    if (!opt.matrix_out.empty())
        write_text_file(opt.matrix_out,
                        confusion_to_table(confusion, schema, opt.textual, opt.compact));
    if (!opt.svg_out.empty())
        write_text_file(opt.svg_out, confusion_to_svg(confusion, schema, opt.compact));

    for (const auto& label : opt.drilldowns)
        out << render_drilldown(label_drilldown(input.pairs, label), label, schema);
    for (const auto& query : opt.queries) {
        const std::size_t arrow = query.find("->");
        if (arrow == std::string::npos)
            throw ValidationError("query \"" + query +
                                  "\" must have the form TRUE-PATTERN->PREDICTED-PATTERN");
        const LabelSetPattern truth_pat = parse_pattern(query.substr(0, arrow), schema);
        const LabelSetPattern pred_pat = parse_pattern(query.substr(arrow + 2), schema);
        out << "query " << truth_pat.to_string() << " -> " << pred_pat.to_string() << ": "
            << group_query(input.pairs, truth_pat, pred_pat) << "\n";
    }
    return kExitOk;
}

int cmd_aggregate(const Options& opt, std::ostream& out, std::ostream&) {
    std::vector<EvalReport> reports;
    for (const auto& path : opt.report_paths)
        reports.push_back(EvalReport::from_json(read_json_file(path)));
    const AggregateReport agg = aggregate_runs(reports);
    if (!opt.out_path.empty())
        write_text_file(opt.out_path, agg.to_json().dump(2) + "\n");
    if (!opt.tsv_out.empty()) write_text_file(opt.tsv_out, agg.to_tsv());
    out << render_overall_table(agg);
    return kExitOk;
}

int cmd_report(const Options& opt, std::ostream& out, std::ostream& err) {
    std::ostringstream text;
    if (!opt.aggregate_path.empty()) {
        const AggregateReport agg = AggregateReport::from_json(read_json_file(opt.aggregate_path));
        text << render_overall_table(agg);
    }
    if (!opt.report_paths.empty()) {
        std::vector<EvalReport> reports;
        for (const auto& path : opt.report_paths)
            reports.push_back(EvalReport::from_json(read_json_file(path)));
        if (reports.size() == 1) {
            const EvalReport& rep = reports.front();
            text << render_overall_table(rep) << "\n"
                 << render_label_table(rep) << "\n"
                 << render_set_table(rep);
        } else {
            const AggregateReport agg = aggregate_runs(reports);
            std::vector<std::string> codes;
            for (const auto& e : reports.front().per_set) codes.push_back(e.binary);
            text << render_overall_table(agg) << "\n"
                 << render_label_table(agg, reports.front().labels) << "\n"
                 << render_set_table(agg, codes);
        }
    }
    if (!opt.corpus_path.empty() && !opt.pred_paths.empty()) {
        const LabelSchema schema = schema_from_option(opt.schema_path);
        const Corpus corpus = load_corpus_file(opt.corpus_path, schema);
        EvalInput input = load_eval_input(
            corpus, opt.pred_paths, failure_policy_from_string(opt.failure_policy),
            opt.lenient, err);
        const PowerSetConfusion confusion =
            build_confusion(input.pairs, enumerate_powerset(schema));
        text << render_taxonomy(taxonomy_summary(input.pairs, enumerate_powerset(schema)));
        if (!opt.svg_out.empty())
            write_text_file(opt.svg_out, confusion_to_svg(confusion, schema, opt.compact));
    }
    if (text.str().empty())
        throw ValidationError("report requires --aggregate, --report or --corpus/--pred");
    if (!opt.out_path.empty())
        write_text_file(opt.out_path, text.str());
    else
        out << text.str();
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"label-set evaluation toolkit for multi-label classification"};
    app.require_subcommand(1);
    Options opt;

    auto add_schema = [&](CLI::App* cmd) {
        cmd->add_option("--schema", opt.schema_path,
                        "schema file (default: built-in SI/SA/ES/NSSI)");
    };

    CLI::App* stats = app.add_subcommand("stats", "corpus distribution statistics");
    stats->add_option("--corpus", opt.corpus_path, "corpus file")->required();
    add_schema(stats);
    stats->add_option("--json", opt.json_out, "write the summary as JSON");

    CLI::App* split = app.add_subcommand("split", "cross-validation splits and exports");
    split->add_option("--corpus", opt.corpus_path, "corpus file")->required();
    add_schema(split);
    split->add_option("--k", opt.k, "fold count")->default_val(5);
    split->add_option("--repeats", opt.repeats, "repeat count")->default_val(1);
    split->add_option("--policy", opt.policy, "none | label-set | group-pattern")
        ->default_val("label-set");
    split->add_option("--seed", opt.seed, "random seed")->default_val(42);
    split->add_option("--out", opt.out_path, "split plan file");
    split->add_option("--groups", opt.groups, "group preset (si-sa) or pattern file");
    split->add_option("--export-dir", opt.export_dir,
                      "write fine-tune training files per repeat and fold");
    split->add_option("--template", opt.template_name, "zero | guide | template file")
        ->default_val("zero");

    CLI::App* synth = app.add_subcommand("synth", "synthetic corpora, fixtures and noise");
    synth->add_option("--preset", opt.preset, "paper-corpus | figure4-fixture");
    synth->add_option("--spec", opt.spec_path, "distribution spec file");
    synth->add_option("--fixture", opt.fixture_path, "fixture spec file");
    synth->add_option("--kernel", opt.kernel_path, "noise kernel file (perturbs --corpus)");
    synth->add_option("--corpus", opt.corpus_path, "corpus to perturb");
    add_schema(synth);
    synth->add_option("--seed", opt.seed, "random seed")->default_val(42);
    synth->add_option("--out", opt.out_path, "corpus output file");
    synth->add_option("--pred-out", opt.pred_out, "prediction output file");
    synth->add_option("--model", opt.model, "model name recorded in the manifest")
        ->default_val("synthetic");
    synth->add_option("--dump-spec", opt.dump_spec, "write the preset's spec file");

    CLI::App* predict = app.add_subcommand("predict", "classify a corpus via a chat endpoint");
    predict->add_option("--corpus", opt.corpus_path, "corpus file")->required();
    add_schema(predict);
    predict->add_option("--template", opt.template_name, "zero | guide | template file")
        ->default_val("zero");
    predict->add_option("--endpoint", opt.endpoint, "backend base URL")->required();
    predict->add_option("--base-path", opt.base_path, "API base path")->default_val("/v1");
    predict->add_option("--model", opt.model, "model identifier")->required();
    predict->add_option("--credential-env", opt.credential_env,
                        "environment variable holding the bearer token")
        ->default_val("MLCEVAL_API_KEY");
    predict->add_option("--temperature", opt.temperature, "decoding temperature")
        ->default_val(0.0);
    predict->add_option("--timeout-ms", opt.timeout_ms, "request timeout")->default_val(30000);
    predict->add_option("--concurrency", opt.concurrency, "max in-flight requests")
        ->default_val(4);
    predict->add_option("--attempts", opt.attempts, "max attempts per request")->default_val(3);
    predict->add_option("--backoff-ms", opt.backoff_ms, "backoff base")->default_val(250.0);
    predict->add_option("--repeat", opt.repeat, "repeat index")->default_val(0);
    predict->add_option("--fold", opt.fold, "fold index");
    predict->add_option("--run-seed", opt.run_seed, "seed recorded in the manifest");
    predict->add_option("--strategy", opt.strategy, "override recorded strategy");
    predict->add_option("--out", opt.out_path, "prediction output file")->required();

    CLI::App* evaluate = app.add_subcommand("evaluate", "score predictions against a corpus");
    evaluate->add_option("--corpus", opt.corpus_path, "corpus file")->required();
    add_schema(evaluate);
    evaluate->add_option("--pred", opt.pred_paths, "prediction file (repeat to pool folds)")
        ->required();
    evaluate->add_option("--out", opt.out_path, "report output file");
    evaluate->add_option("--tsv", opt.tsv_out, "flat tabular output file");
    evaluate->add_option("--failure-policy", opt.failure_policy, "exclude | empty-set")
        ->default_val("exclude");
    evaluate->add_flag("--lenient", opt.lenient, "drop unmatched ids with a warning");
    evaluate->add_option("--per-fold-dir", opt.per_fold_dir,
                         "also write one report per prediction file");

    CLI::App* confusion = app.add_subcommand("confusion", "power-set confusion analysis");
    confusion->add_option("--corpus", opt.corpus_path, "corpus file")->required();
    add_schema(confusion);
    confusion->add_option("--pred", opt.pred_paths, "prediction file")->required();
    confusion->add_option("--matrix", opt.matrix_out, "matrix table output (TSV)");
    confusion->add_option("--svg", opt.svg_out, "heat table output (SVG)");
    confusion->add_flag("--textual", opt.textual, "include textual codes in the table");
    confusion->add_flag("--compact", opt.compact, "hide empty rows and columns");
    confusion->add_option("--drilldown", opt.drilldowns, "single-label error drilldown");
    confusion->add_option("--query", opt.queries,
                          "group transition count, e.g. 0-1-0-*->1-1-0-*");
    confusion->add_option("--failure-policy", opt.failure_policy, "exclude | empty-set")
        ->default_val("exclude");
    confusion->add_flag("--lenient", opt.lenient, "drop unmatched ids with a warning");

    CLI::App* aggregate = app.add_subcommand("aggregate", "mean/std across run reports");
    aggregate->add_option("--report", opt.report_paths, "evaluation report file")->required();
    aggregate->add_option("--out", opt.out_path, "aggregate output file");
    aggregate->add_option("--tsv", opt.tsv_out, "flat tabular output file");

    CLI::App* report = app.add_subcommand("report", "human-readable tables and graphics");
    report->add_option("--report", opt.report_paths, "evaluation report file(s)");
    report->add_option("--aggregate", opt.aggregate_path, "aggregate report file");
    report->add_option("--corpus", opt.corpus_path, "corpus file (for the matrix)");
    add_schema(report);
    report->add_option("--pred", opt.pred_paths, "prediction file (for the matrix)");
    report->add_option("--svg", opt.svg_out, "heat table output (SVG)");
    report->add_flag("--compact", opt.compact, "hide empty rows and columns");
    report->add_option("--failure-policy", opt.failure_policy, "exclude | empty-set")
        ->default_val("exclude");
    report->add_flag("--lenient", opt.lenient, "drop unmatched ids with a warning");
    report->add_option("--out", opt.out_path, "text output file");

    std::vector<const char*> argv;
    argv.push_back("mlceval");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (stats->parsed()) return cmd_stats(opt, out, err);
        if (split->parsed()) return cmd_split(opt, out, err);
        if (synth->parsed()) return cmd_synth(opt, out, err);
        if (predict->parsed()) return cmd_predict(opt, out, err);
        if (evaluate->parsed()) return cmd_evaluate(opt, out, err);
        if (confusion->parsed()) return cmd_confusion(opt, out, err);
        if (aggregate->parsed()) return cmd_aggregate(opt, out, err);
        if (report->parsed()) return cmd_report(opt, out, err);
        err << "usage error: no subcommand\n";
        return kExitUsage;
    } catch (const BackendError& e) {
        err << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace mlceval::cli
