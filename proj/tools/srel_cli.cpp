// Command-line front end: dataset preparation, experiment runs,
// evaluation, comparison, simulation studies, and transcript inspection.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 partial failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srel/client.hpp"
#include "srel/dataset.hpp"
#include "srel/eval.hpp"
#include "srel/parse.hpp"
#include "srel/prompting.hpp"
#include "srel/runner.hpp"
#include "srel/scene.hpp"
#include "srel/simlvlm.hpp"
#include "srel/validate.hpp"

namespace {

using namespace srel;

// Flat "key = value" config file; '#' starts a comment. Every key is
// mirrored by a CLI flag and flags win.
std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string{};
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": empty key");
        kv[key] = value;
    }
    return kv;
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else if (c != ' ')
            cur += c;
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

AdjudicationPolicy parse_policy(const std::string& s) {
    if (s == "trust_model") return AdjudicationPolicy::TrustModel;
    if (s == "derive_last_ab") return AdjudicationPolicy::DeriveLastAb;
    if (s == "derive_transitive") return AdjudicationPolicy::DeriveTransitive;
    if (s == "majority") return AdjudicationPolicy::Majority;
    throw std::runtime_error("unknown adjudication policy: " + s);
}

ReportFormat parse_format(const std::string& s) {
    if (s == "markdown") return ReportFormat::MarkdownTable;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw std::runtime_error("unknown report format: " + s);
}

void write_or_print(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << content;
}

// ---------------------------------------------------------------------------

struct PrepareArgs {
    std::string captions_path;
    std::string items_path;
    std::string out_dir = "data";
    std::string source = "other";
    std::string sidecar_path;
    int min_objects = 5;
    std::size_t n_test = 600;
    std::size_t n_val = 200;
    std::uint64_t seed = 0;
    std::size_t synthetic = 0;  // generate this many synthetic questions
    std::size_t objects = 5;    // objects per synthetic scene
};

int cmd_prepare(const PrepareArgs& args) {
    const RelationLexicon lexicon = RelationLexicon::standard();
    std::vector<VqaItem> items;
    std::optional<SceneStore> scenes;
    if (args.synthetic > 0) {
        StudyParams params;
        params.n_questions = args.synthetic;
        params.n_objects = args.objects;
        params.seed = args.seed;
        scenes.emplace();
        for (const auto& sq : gen_study(params)) {
            items.push_back(sq.item);
            scenes->put(sq.item.image_ref, sq.scene);
        }
    } else if (!args.captions_path.empty()) {
        std::ifstream in(args.captions_path);
        if (!in)
            throw std::runtime_error("cannot open captions: " + args.captions_path);
        std::vector<std::string> captions;
        std::string line;
        while (std::getline(in, line))
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                captions.push_back(line);
        items = items_from_captions(captions, lexicon, args.source);
    } else if (!args.items_path.empty()) {
        auto loaded = load_items(args.items_path, lexicon);
        if (!loaded.errors.empty()) {
            for (const auto& e : loaded.errors)
                std::cerr << args.items_path << ":" << e.line << ": " << e.reason
                          << "\n";
            return 1;
        }
        items = std::move(loaded.items);
    } else {
        std::cerr << "prepare: need --captions, --items or --synthetic\n";
        return 1;
    }

    if (!args.sidecar_path.empty())
        items = filter_items(
            items, object_count_predicate(args.sidecar_path, args.min_objects));

    const Splits splits =
        balanced_sample(items, {args.n_test, args.n_val, args.seed});

    std::filesystem::create_directories(args.out_dir);
    save_items(args.out_dir + "/test.jsonl", splits.test);
    save_items(args.out_dir + "/val.jsonl", splits.val);
    if (scenes) scenes->save(args.out_dir + "/scenes.jsonl");

    auto balance = [](const std::vector<VqaItem>& v) {
        std::size_t yes = 0;
        for (const auto& it : v)
            if (it.gold == Gold::Yes) ++yes;
        return std::pair(yes, v.size() - yes);
    };
    const auto [ty, tn] = balance(splits.test);
    const auto [vy, vn] = balance(splits.val);
    nlohmann::json manifest = {
        {"source_items", items.size()},
        {"seed", args.seed},
        {"test", {{"path", "test.jsonl"}, {"yes", ty}, {"no", tn}}},
        {"val", {{"path", "val.jsonl"}, {"yes", vy}, {"no", vn}}}};
    std::ofstream mf(args.out_dir + "/manifest.json");
    mf << manifest.dump(2) << "\n";

    std::cout << "test: " << splits.test.size() << " items (" << ty << " yes / "
              << tn << " no)\n"
              << "val: " << splits.val.size() << " items (" << vy << " yes / "
              << vn << " no)\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string config_path;
    std::vector<std::string> datasets;  // id=path
    std::string methods_csv;
    std::size_t trials = 0;  // 0: take from config / default
    bool trials_set = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    std::string backend_kind;
    std::string endpoint;
    std::string model;
    std::string cache_root;
    std::string scene_store;
    std::string policy;
};

HarnessConfig build_harness_config(const RunArgs& args) {
    std::map<std::string, std::string> kv;
    if (!args.config_path.empty()) kv = read_config_file(args.config_path);
    auto get = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };

    HarnessConfig cfg;
    const std::string kind = !args.backend_kind.empty()
                                 ? args.backend_kind
                                 : get("backend.kind", "simulated");
    if (kind == "simulated")
        cfg.backend.kind = BackendKind::Simulated;
    else if (kind == "http_chat")
        cfg.backend.kind = BackendKind::HttpChat;
    else
        throw std::runtime_error("backend.kind must be simulated or http_chat");

    cfg.backend.endpoint =
        !args.endpoint.empty() ? args.endpoint : get("backend.endpoint", "");
    cfg.backend.model =
        !args.model.empty() ? args.model : get("backend.model", "simulated");
    cfg.backend.temperature = std::stod(get("backend.temperature", "1e-15"));
    cfg.backend.top_p = std::stod(get("backend.top_p", "1e-15"));
    cfg.backend.seed = std::stoull(get("backend.seed", "0"));
    cfg.backend.max_retries = std::stoi(get("backend.max_retries", "3"));
    cfg.backend.api_key_env = get("backend.api_key_env", "LVLM_API_KEY");
    cfg.backend.cache_root = !args.cache_root.empty()
                                 ? args.cache_root
                                 : get("backend.cache_root", "");
    cfg.backend.scene_store_path = !args.scene_store.empty()
                                       ? args.scene_store
                                       : get("backend.scene_store", "");
    cfg.backend.prices.input_per_1k = std::stod(get("prices.input_per_1k", "0"));
    cfg.backend.prices.output_per_1k =
        std::stod(get("prices.output_per_1k", "0"));
    cfg.backend.error_model.eps_query = std::stod(get("error.eps_query", "0.3"));
    cfg.backend.error_model.eps_ref_min =
        std::stod(get("error.eps_ref_min", "0.02"));
    cfg.backend.error_model.eps_ref_max =
        std::stod(get("error.eps_ref_max", "0.1"));
    cfg.backend.error_model.rho = std::stod(get("error.rho", "0.9"));
    cfg.backend.error_model.dir_bias = std::stod(get("error.dir_bias", "0"));
    cfg.backend.error_model.seed = std::stoull(get("error.seed", "0"));

    cfg.trials = args.trials_set ? args.trials
                                 : std::stoull(get("trials", "5"));
    cfg.seed = args.seed_set ? args.seed : std::stoull(get("seed", "0"));
    cfg.policy = parse_policy(!args.policy.empty() ? args.policy
                                                   : get("policy", "trust_model"));
    cfg.out_dir = !args.out_dir.empty() ? args.out_dir : get("out_dir", "out");
    cfg.template_dir = get("template_dir", "");
    cfg.concurrency = std::stoi(get("concurrency", "1"));

    const std::string methods = !args.methods_csv.empty()
                                    ? args.methods_csv
                                    : get("methods",
                                          "vanilla,cot_structure,"
                                          "bidirectional:BA_AB,"
                                          "transitivity:random,"
                                          "combined:BA_AB:random");
    for (const auto& id : split_csv(methods))
        cfg.methods.push_back(parse_method_id(id));

    for (const auto& [key, value] : kv)
        if (key.rfind("dataset.", 0) == 0) cfg.datasets[key.substr(8)] = value;
    for (const auto& spec : args.datasets) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--dataset expects id=path, got " + spec);
        cfg.datasets[spec.substr(0, eq)] = spec.substr(eq + 1);
    }
    return cfg;
}

int cmd_run(const RunArgs& args) {
    const HarnessConfig cfg = build_harness_config(args);
    const RunSummary summary = run_experiment(cfg);
    return summary.fully_complete() ? 0 : 2;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
    std::string out_dir = "out";
    std::string dataset;
    std::string methods_csv =
        "vanilla,cot_structure,bidirectional:BA_AB,transitivity:random,"
        "combined:BA_AB:random";
    std::vector<std::string> baselines;
    std::size_t trials = 5;
    std::string format = "markdown";
    std::string report_path;
    double price_in = 0, price_out = 0;
};

int cmd_eval(const EvalArgs& args) {
    if (args.dataset.empty()) {
        std::cerr << "eval: --dataset is required\n";
        return 1;
    }
    const PriceTable prices{args.price_in, args.price_out};
    std::vector<MetricsReport> reports;
    for (const auto& id : split_csv(args.methods_csv))
        reports.push_back(evaluate_method(args.out_dir, args.dataset, id,
                                          args.trials, args.baselines, &prices));
    write_or_print(emit_report(reports, parse_format(args.format)),
                   args.report_path);
    return 0;
}

struct CompareArgs {
    std::string out_dir = "out";
    std::string dataset;
    std::string method;
    std::vector<std::string> baselines;
    std::size_t trials = 5;
};

int cmd_compare(const CompareArgs& args) {
    if (args.dataset.empty() || args.method.empty() || args.baselines.empty()) {
        std::cerr << "compare: --dataset, --method and --baseline are required\n";
        return 1;
    }
    const MetricsReport report = evaluate_method(
        args.out_dir, args.dataset, args.method, args.trials, args.baselines);
    std::cout << "method " << args.method << " on " << args.dataset
              << ": mean accuracy " << detail::pct(report.metrics.mean.accuracy)
              << "\n";
    for (const auto& c : report.comparisons) {
        const MetricsReport base = evaluate_method(args.out_dir, args.dataset,
                                                   c.baseline_id, args.trials);
        std::cout << "  vs " << c.baseline_id << " ("
                  << detail::pct(base.metrics.mean.accuracy) << "): t="
                  << c.test.t << " df=" << c.test.df << " p=" << c.test.p
                  << (c.test.p < 0.05 ? " *" : "") << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::size_t questions = 2000;
    std::size_t objects = 5;
    std::uint64_t seed = 7;
    std::size_t trials = 5;
    double eps_query = 0.3;
    double eps_ref_min = 0.02;
    double eps_ref_max = 0.1;
    double rho = 0.9;
    double dir_bias = 0.0;
    std::string methods_csv =
        "vanilla,cot_structure,bidirectional:BA_AB,transitivity:random,"
        "combined:BA_AB:random";
    std::string report_path;
    std::string format = "markdown";
};

int cmd_simulate(const SimulateArgs& args) {
    StudyParams params;
    params.n_questions = args.questions;
    params.n_objects = args.objects;
    params.seed = args.seed;
    const auto study = gen_study(params);

    ErrorModel base_err;
    base_err.eps_query = args.eps_query;
    base_err.eps_ref_min = args.eps_ref_min;
    base_err.eps_ref_max = args.eps_ref_max;
    base_err.rho = args.rho;
    base_err.dir_bias = args.dir_bias;
    base_err.validate();

    struct Row {
        std::string method;
        double oracle;
        double mc_mean;
        std::vector<double> trial_acc;
    };
    std::vector<Row> rows;
    for (const auto& id : split_csv(args.methods_csv)) {
        const MethodSpec spec = parse_method_id(id);
        Row row;
        row.method = id;
        double oracle_sum = 0;
        for (const auto& sq : study)
            oracle_sum +=
                answer_correct_prob(spec, sq.item, sq.scene, base_err);
        row.oracle = oracle_sum / static_cast<double>(study.size());

        for (std::size_t t = 0; t < args.trials; ++t) {
            ErrorModel err = base_err;
            err.seed = trial_seed(args.seed, t);
            std::size_t correct = 0;
            for (const auto& sq : study) {
                const SimResponse resp = respond(spec, sq.item, sq.scene, err);
                if ((resp.answer == Gold::Yes) == (sq.item.gold == Gold::Yes))
                    ++correct;
            }
            row.trial_acc.push_back(100.0 * static_cast<double>(correct) /
                                    static_cast<double>(study.size()));
        }
        double s = 0;
        for (double a : row.trial_acc) s += a;
        row.mc_mean = s / static_cast<double>(row.trial_acc.size());
        rows.push_back(std::move(row));
    }

    auto find_row = [&](const std::string& prefix) -> const Row* {
        for (const auto& r : rows)
            if (r.method == prefix || r.method.rfind(prefix + ":", 0) == 0)
                return &r;
        return nullptr;
    };
    const Row* vanilla = find_row("vanilla");

    std::ostringstream out;
    if (args.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json j = {{"method", r.method},
                                {"oracle_accuracy", r.oracle * 100.0},
                                {"mc_mean_accuracy", r.mc_mean},
                                {"trial_accuracies", r.trial_acc}};
            if (vanilla && &rows[0] != nullptr && r.method != vanilla->method &&
                r.trial_acc.size() >= 2) {
                const auto t = one_sided_t(r.trial_acc, vanilla->trial_acc);
                j["p_vs_vanilla"] = t.p;
            }
            arr.push_back(j);
        }
        out << arr.dump(2) << "\n";
    } else {
        out << "| Method | Oracle | MC mean | Delta | p vs vanilla |\n";
        out << "|---|---|---|---|---|\n";
        for (const auto& r : rows) {
            out << "| " << r.method << " | " << detail::pct(r.oracle * 100.0)
                << " | " << detail::pct(r.mc_mean) << " | "
                << detail::pct(r.mc_mean - r.oracle * 100.0) << " | ";
            if (vanilla && r.method != vanilla->method &&
                r.trial_acc.size() >= 2) {
                const auto t = one_sided_t(r.trial_acc, vanilla->trial_acc);
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.4g", t.p);
                out << buf << (t.p < 0.05 ? " *" : "");
            } else {
                out << "-";
            }
            out << " |\n";
        }
    }
    write_or_print(out.str(), args.report_path);
    return 0;
}

// ---------------------------------------------------------------------------

struct InspectArgs {
    std::string items_path;
    std::string item_id;
    std::string method = "combined:BA_AB:random";
    std::string run_records;
};

int cmd_inspect(const InspectArgs& args) {
    const RelationLexicon lexicon = RelationLexicon::standard();
    auto loaded = load_items(args.items_path, lexicon);
    const VqaItem* item = nullptr;
    for (const auto& it : loaded.items)
        if (it.id == args.item_id) item = &it;
    if (!item) {
        std::cerr << "inspect: item not found: " << args.item_id << "\n";
        return 1;
    }
    const MethodSpec spec = parse_method_id(args.method);
    const auto prompt =
        build_prompt(spec, normalize_question(*item, lexicon));
    std::cout << "=== item " << item->id << " (gold " << to_string(item->gold)
              << ") ===\n=== prompt (" << spec.id() << ") ===\n"
              << prompt.text << "\n";

    if (args.run_records.empty()) return 0;
    for (const auto& rec : load_run_records(args.run_records)) {
        if (rec.item_id != args.item_id) continue;
        std::cout << "=== response ===\n" << rec.response_text << "\n";
        const auto parsed = parse_response(rec.response_text, spec, lexicon);
        std::cout << "=== parse ===\nanswer: "
                  << (parsed.answer ? to_string(*parsed.answer) : "(none)")
                  << "\nstatements: " << parsed.statements.size() << "\n";
        for (const auto& d : parsed.diagnostics)
            std::cout << "diagnostic: " << to_string(d.kind) << " " << d.detail
                      << "\n";
        const auto report = validate_response(parsed, spec, *item);
        if (report.bidirectional_ok)
            std::cout << "bidirectional_ok: "
                      << (*report.bidirectional_ok ? "true" : "false") << "\n";
        if (report.transitivity)
            std::cout << "transitivity: " << to_string(*report.transitivity)
                      << "\n";
        if (report.network)
            std::cout << "network_consistent: "
                      << (report.network->consistent ? "true" : "false") << "\n";
        return 0;
    }
    std::cerr << "inspect: no record for item " << args.item_id << " in "
              << args.run_records << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constraint-aware prompting harness for spatial-relation VQA"};
    app.require_subcommand(1);

    PrepareArgs prepare;
    auto* prep = app.add_subcommand("prepare", "Build balanced dataset splits");
    prep->add_option("--captions", prepare.captions_path,
                     "Caption lines: '<Object> is <Relation> <Object>.'");
    prep->add_option("--items", prepare.items_path, "Existing VQA JSONL");
    prep->add_option("--out", prepare.out_dir, "Output directory");
    prep->add_option("--source", prepare.source, "Source tag for new items");
    prep->add_option("--object-count-sidecar", prepare.sidecar_path,
                     "JSON {image_ref: object count} filter input");
    prep->add_option("--min-objects", prepare.min_objects,
                     "Minimum object count when filtering");
    prep->add_option("--n-test", prepare.n_test, "Test split size (even)");
    prep->add_option("--n-val", prepare.n_val, "Validation split size (even)");
    prep->add_option("--seed", prepare.seed, "Sampling seed");
    prep->add_option("--synthetic", prepare.synthetic,
                     "Generate this many synthetic scene questions");
    prep->add_option("--objects", prepare.objects,
                     "Objects per synthetic scene");

    RunArgs run;
    auto* runc = app.add_subcommand("run", "Run the experiment grid");
    runc->add_option("--config", run.config_path, "Flat key=value config file");
    runc->add_option("--dataset", run.datasets, "Dataset as id=path (repeatable)");
    runc->add_option("--methods", run.methods_csv, "Comma-separated method ids");
    runc->add_option("--trials", run.trials, "Trial count")
        ->each([&](const std::string&) { run.trials_set = true; });
    runc->add_option("--seed", run.seed, "Master seed")
        ->each([&](const std::string&) { run.seed_set = true; });
    runc->add_option("--out", run.out_dir, "Output directory");
    runc->add_option("--backend-kind", run.backend_kind,
                     "simulated or http_chat");
    runc->add_option("--endpoint", run.endpoint, "Chat-completion endpoint URL");
    runc->add_option("--model", run.model, "Model name");
    runc->add_option("--cache-root", run.cache_root, "Exchange cache directory");
    runc->add_option("--scene-store", run.scene_store,
                     "Scene JSONL for the simulated backend");
    runc->add_option("--policy", run.policy,
                     "trust_model|derive_last_ab|derive_transitive|majority");

    EvalArgs eval;
    auto* evalc = app.add_subcommand("eval", "Compute metrics from run records");
    evalc->add_option("--out-dir", eval.out_dir, "Run output directory");
    evalc->add_option("--dataset", eval.dataset, "Dataset id")->required();
    evalc->add_option("--methods", eval.methods_csv, "Comma-separated method ids");
    evalc->add_option("--baseline", eval.baselines,
                      "Baseline method id for t-tests (repeatable)");
    evalc->add_option("--trials", eval.trials, "Trial count");
    evalc->add_option("--format", eval.format, "markdown|csv|json");
    evalc->add_option("--report", eval.report_path, "Write report to file");
    evalc->add_option("--price-in", eval.price_in, "$ per 1k input tokens");
    evalc->add_option("--price-out", eval.price_out, "$ per 1k output tokens");

    CompareArgs compare;
    auto* cmpc = app.add_subcommand("compare",
                                    "One-sided t-test of a method vs baselines");
    cmpc->add_option("--out-dir", compare.out_dir, "Run output directory");
    cmpc->add_option("--dataset", compare.dataset, "Dataset id")->required();
    cmpc->add_option("--method", compare.method, "Method id")->required();
    cmpc->add_option("--baseline", compare.baselines, "Baseline id (repeatable)")
        ->required();
    cmpc->add_option("--trials", compare.trials, "Trial count");

    SimulateArgs sim;
    auto* simc = app.add_subcommand("simulate", "Offline simulator study");
    simc->add_option("--questions", sim.questions, "Questions per study");
    simc->add_option("--objects", sim.objects, "Objects per scene");
    simc->add_option("--seed", sim.seed, "Study seed");
    simc->add_option("--trials", sim.trials, "Monte Carlo trials");
    simc->add_option("--eps-query", sim.eps_query, "Direct-pair error rate");
    simc->add_option("--eps-ref-min", sim.eps_ref_min,
                     "Reference error at maximal salience");
    simc->add_option("--eps-ref-max", sim.eps_ref_max,
                     "Reference error at minimal salience");
    simc->add_option("--rho", sim.rho, "Replay probability for repeat pairs");
    simc->add_option("--dir-bias", sim.dir_bias,
                     "Extra error on A-before-B direction");
    simc->add_option("--methods", sim.methods_csv, "Comma-separated method ids");
    simc->add_option("--report", sim.report_path, "Write report to file");
    simc->add_option("--format", sim.format, "markdown|json");

    InspectArgs inspect;
    auto* insc = app.add_subcommand("inspect",
                                    "Pretty-print one item's prompt/transcript");
    insc->add_option("--items", inspect.items_path, "Items JSONL")->required();
    insc->add_option("--id", inspect.item_id, "Item id")->required();
    insc->add_option("--method", inspect.method, "Method id");
    insc->add_option("--run-records", inspect.run_records,
                     "Run record JSONL to show the transcript from");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prep->parsed()) return cmd_prepare(prepare);
        if (runc->parsed()) return cmd_run(run);
        if (evalc->parsed()) return cmd_eval(eval);
        if (cmpc->parsed()) return cmd_compare(compare);
        if (simc->parsed()) return cmd_simulate(sim);
        if (insc->parsed()) return cmd_inspect(inspect);
    } catch (const MissingRuns& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
