#pragma once

// Experiment orchestration: seeded trials, append-only JSONL run
// records, resumable runs, and record-based evaluation / comparison.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srel/client.hpp"
#include "srel/dataset.hpp"
#include "srel/eval.hpp"
#include "srel/parse.hpp"
#include "srel/prompting.hpp"
#include "srel/validate.hpp"

namespace srel {

// Inverse of MethodSpec::id(): "combined:BA_AB:random:no_cot" etc.
inline MethodSpec parse_method_id(const std::string& id) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : id) {
        if (c == ':') {
            parts.push_back(cur);
            cur.clear();
        } else
            cur += c;
    }
    parts.push_back(cur);

    MethodSpec spec;
    const std::string& kind = parts[0];
    if (kind == "vanilla")
        spec = MethodSpec::vanilla();
    else if (kind == "cot_structure")
        spec = MethodSpec::cot_structure();
    else if (kind == "bidirectional")
        spec = MethodSpec::bidirectional();
    else if (kind == "transitivity")
        spec = MethodSpec::transitivity();
    else if (kind == "combined")
        spec = MethodSpec::combined();
    else
        throw InvalidSpec("unknown method kind: " + kind);

    auto parse_order = [](const std::string& s) -> std::optional<RelationOrder> {
        if (s == "AB") return RelationOrder::AB;
        if (s == "BA") return RelationOrder::BA;
        if (s == "AB_BA") return RelationOrder::AB_BA;
        if (s == "BA_AB") return RelationOrder::BA_AB;
        return std::nullopt;
    };
    auto parse_ref = [](const std::string& s) -> std::optional<ReferenceStrategy> {
        if (s == "random") return ReferenceStrategy::Random;
        if (s == "largest") return ReferenceStrategy::Largest;
        if (s == "smallest") return ReferenceStrategy::Smallest;
        if (s == "most_top") return ReferenceStrategy::MostTop;
        if (s == "central") return ReferenceStrategy::Central;
        if (s == "most_obvious") return ReferenceStrategy::MostObvious;
        return std::nullopt;
    };

    for (std::size_t i = 1; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (p == "no_cot")
            spec.cot = false;
        else if (p == "no_structure")
            spec.structure = false;
        else if (auto o = parse_order(p))
            spec.order = *o;
        else if (auto r = parse_ref(p))
            spec.reference = *r;
        else
            throw InvalidSpec("unknown method id segment: " + p);
    }
    spec.validate();
    return spec;
}

struct ItemRecord {
    std::string item_id;
    std::string request_hash;
    std::string response_text;
    std::optional<Gold> predicted;  // nullopt: no extractable answer
    Gold gold = Gold::Yes;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    bool tokens_estimated = false;
    std::size_t diagnostic_count = 0;
    std::optional<bool> bidirectional_ok;
    std::optional<std::string> transitivity;
    std::optional<bool> network_consistent;
};

inline nlohmann::json to_json(const ItemRecord& r) {
    nlohmann::json j = {{"item_id", r.item_id},
                        {"request_hash", r.request_hash},
                        {"response_text", r.response_text},
                        {"gold", to_string(r.gold)},
                        {"input_tokens", r.input_tokens},
                        {"output_tokens", r.output_tokens},
                        {"tokens_estimated", r.tokens_estimated},
                        {"diagnostics", r.diagnostic_count}};
    j["predicted"] = r.predicted ? to_string(*r.predicted) : "";
    if (r.bidirectional_ok) j["bidirectional_ok"] = *r.bidirectional_ok;
    if (r.transitivity) j["transitivity"] = *r.transitivity;
    if (r.network_consistent) j["network_consistent"] = *r.network_consistent;
    return j;
}

inline ItemRecord item_record_from_json(const nlohmann::json& j) {
    ItemRecord r;
    r.item_id = j.at("item_id").get<std::string>();
    r.request_hash = j.value("request_hash", "");
    r.response_text = j.value("response_text", "");
    const std::string pred = j.value("predicted", "");
    if (pred == "yes")
        r.predicted = Gold::Yes;
    else if (pred == "no")
        r.predicted = Gold::No;
    r.gold = j.at("gold").get<std::string>() == "yes" ? Gold::Yes : Gold::No;
    r.input_tokens = j.value("input_tokens", std::uint64_t{0});
    r.output_tokens = j.value("output_tokens", std::uint64_t{0});
    r.tokens_estimated = j.value("tokens_estimated", false);
    r.diagnostic_count = j.value("diagnostics", std::size_t{0});
    if (j.contains("bidirectional_ok"))
        r.bidirectional_ok = j.at("bidirectional_ok").get<bool>();
    if (j.contains("transitivity"))
        r.transitivity = j.at("transitivity").get<std::string>();
    if (j.contains("network_consistent"))
        r.network_consistent = j.at("network_consistent").get<bool>();
    return r;
}

struct HarnessConfig {
    BackendConfig backend;
    std::map<std::string, std::string> datasets;  // id -> items JSONL path
    std::vector<MethodSpec> methods;
    std::size_t trials = 5;
    std::uint64_t seed = 0;
    AdjudicationPolicy policy = AdjudicationPolicy::TrustModel;
    std::string out_dir = "out";
    std::string template_dir;  // empty: built-in templates
    int concurrency = 1;

    void validate() const {
        backend.validate();
        if (trials == 0) throw std::invalid_argument("config: trials must be >= 1");
        if (methods.empty())
            throw std::invalid_argument("config: no methods selected");
        if (datasets.empty())
            throw std::invalid_argument("config: no datasets configured");
        if (concurrency < 1)
            throw std::invalid_argument("config: concurrency must be >= 1");
    }
};

// Every trial derives its seed from the master seed by hashing, so a
// five-trial experiment is reproducible from one number.
inline std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
    return mix(master_seed, 0x7215a1ULL + trial);
}

namespace detail {

inline std::string fs_safe(std::string s) {
    for (char& c : s)
        if (c == ':' || c == '/' || c == '\\') c = '-';
    return s;
}

}  // namespace detail

inline std::filesystem::path run_record_path(const std::string& out_dir,
                                             const std::string& dataset_id,
                                             const std::string& method_id,
                                             std::size_t trial) {
    return std::filesystem::path(out_dir) / "runs" / detail::fs_safe(dataset_id) /
           detail::fs_safe(method_id) / ("trial-" + std::to_string(trial) + ".jsonl");
}

inline std::vector<ItemRecord> load_run_records(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open run records: " + path.string());
    std::vector<ItemRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        out.push_back(item_record_from_json(nlohmann::json::parse(line)));
    }
    return out;
}

struct MissingRuns : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunSummary {
    std::size_t completed = 0;  // items answered during this invocation
    std::size_t resumed = 0;    // items skipped because a record existed
    std::size_t failed = 0;     // items that raised and were left unrecorded
    CostReport cost;

    bool fully_complete() const { return failed == 0; }
};

// Runs the configured (method x dataset x trial) grid. Appends one
// JSONL record per item; items whose record already exists are skipped,
// which makes interrupted runs restartable without duplicates.
inline RunSummary run_experiment(const HarnessConfig& config,
                                 std::ostream& log = std::cerr) {
    config.validate();
    const RelationLexicon lexicon = RelationLexicon::standard();
    const TemplateStore templates = config.template_dir.empty()
                                        ? TemplateStore::builtin()
                                        : TemplateStore::from_directory(
                                              config.template_dir);
    LvlmClient client(config.backend);

    RunSummary summary;
    std::vector<Exchange> exchanges;
    for (const auto& [dataset_id, path] : config.datasets) {
        auto loaded = load_items(path, lexicon);
        if (!loaded.errors.empty()) {
            for (const auto& e : loaded.errors)
                log << "schema error " << path << ":" << e.line << ": "
                    << e.reason << "\n";
            throw IoError("dataset " + dataset_id + " has malformed lines");
        }
        for (const auto& spec : config.methods) {
            for (std::size_t trial = 0; trial < config.trials; ++trial) {
                const auto record_path = run_record_path(
                    config.out_dir, dataset_id, spec.id(), trial);
                std::filesystem::create_directories(record_path.parent_path());
                std::set<std::string> done;
                if (std::filesystem::exists(record_path))
                    for (const auto& r : load_run_records(record_path))
                        done.insert(r.item_id);

                std::ofstream out(record_path, std::ios::app);
                if (!out)
                    throw IoError("cannot append to " + record_path.string());
                const std::uint64_t salt = trial_seed(config.seed, trial);

                for (const auto& item : loaded.items) {
                    if (done.contains(item.id)) {
                        ++summary.resumed;
                        continue;
                    }
                    try {
                        const auto prompt = build_prompt(
                            spec, normalize_question(item, lexicon), templates);
                        const Exchange e =
                            client.complete(prompt, item.image_ref, salt);
                        exchanges.push_back(e);
                        const auto parsed =
                            parse_response(e.response_text, spec, lexicon);
                        const auto report = validate_response(parsed, spec, item);
                        const auto verdict =
                            adjudicate(parsed, item, config.policy);

                        ItemRecord rec;
                        rec.item_id = item.id;
                        rec.request_hash = e.request_hash;
                        rec.response_text = e.response_text;
                        if (verdict != Adjudication::Indeterminate)
                            rec.predicted = verdict == Adjudication::Yes
                                                ? Gold::Yes
                                                : Gold::No;
                        rec.gold = item.gold;
                        rec.input_tokens = e.input_tokens;
                        rec.output_tokens = e.output_tokens;
                        rec.tokens_estimated = e.tokens_estimated;
                        rec.diagnostic_count = parsed.diagnostics.size();
                        rec.bidirectional_ok = report.bidirectional_ok;
                        if (report.transitivity)
                            rec.transitivity = to_string(*report.transitivity);
                        if (report.network)
                            rec.network_consistent = report.network->consistent;
                        out << to_json(rec).dump() << "\n";
                        out.flush();
                        ++summary.completed;
                    } catch (const std::exception& e) {
                        ++summary.failed;
                        log << "item " << item.id << " (" << spec.id() << ", "
                            << dataset_id << ", trial " << trial
                            << ") failed: " << e.what() << "\n";
                    }
                }
                log << dataset_id << " / " << spec.id() << " / trial " << trial
                    << ": done\n";
            }
        }
    }
    summary.cost = cost_of(exchanges, config.backend.prices,
                           summary.completed ? summary.completed : 1);
    log << "completed " << summary.completed << ", resumed " << summary.resumed
        << ", failed " << summary.failed << ", cost $" << summary.cost.total_usd
        << "\n";
    return summary;
}

// Unanswered items score as incorrect: the miss lands in the cell that
// makes the prediction wrong for the item's gold class, and the
// unanswered count is tracked separately.
inline Confusion confusion_from_records(const std::vector<ItemRecord>& records) {
    Confusion c;
    for (const auto& r : records) {
        if (!r.predicted) {
            ++c.unanswered;
            if (r.gold == Gold::Yes)
                ++c.fn;
            else
                ++c.fp;
            continue;
        }
        const bool pred_yes = *r.predicted == Gold::Yes;
        const bool gold_yes = r.gold == Gold::Yes;
        if (pred_yes && gold_yes)
            ++c.tp;
        else if (pred_yes)
            ++c.fp;
        else if (gold_yes)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

// Per-trial confusions for one (method, dataset) cell of a finished run.
inline TrialSeries load_trial_series(const std::string& out_dir,
                                     const std::string& dataset_id,
                                     const std::string& method_id,
                                     std::size_t trials) {
    TrialSeries series;
    series.method_id = method_id;
    series.dataset_id = dataset_id;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto path = run_record_path(out_dir, dataset_id, method_id, t);
        if (!std::filesystem::exists(path))
            throw MissingRuns("no run records at " + path.string());
        series.trials.push_back(confusion_from_records(load_run_records(path)));
    }
    return series;
}

inline CostSummary cost_summary_from_records(const std::string& out_dir,
                                             const std::string& dataset_id,
                                             const std::string& method_id,
                                             std::size_t trials,
                                             const PriceTable& prices) {
    std::vector<Exchange> exchanges;
    std::size_t questions = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        const auto path = run_record_path(out_dir, dataset_id, method_id, t);
        for (const auto& r : load_run_records(path)) {
            Exchange e;
            e.input_tokens = r.input_tokens;
            e.output_tokens = r.output_tokens;
            e.tokens_estimated = r.tokens_estimated;
            exchanges.push_back(e);
            ++questions;
        }
    }
    const CostReport rep = cost_of(exchanges, prices, questions);
    return CostSummary{rep.total_usd, rep.per_100_questions_usd,
                       rep.tokens_estimated};
}

// MetricsReport for one (method, dataset), with one-sided tests of this
// method's trial accuracies against each named baseline's.
inline MetricsReport evaluate_method(const std::string& out_dir,
                                     const std::string& dataset_id,
                                     const std::string& method_id,
                                     std::size_t trials,
                                     const std::vector<std::string>& baselines = {},
                                     const PriceTable* prices = nullptr) {
    const TrialSeries series =
        load_trial_series(out_dir, dataset_id, method_id, trials);
    MetricsReport report;
    report.method_id = method_id;
    report.dataset_id = dataset_id;
    report.metrics = aggregate(series);
    for (const auto& baseline : baselines) {
        const TrialSeries base =
            load_trial_series(out_dir, dataset_id, baseline, trials);
        // a t-test needs at least two trials per side; single-trial runs
        // report the means without a significance claim
        if (series.trials.size() >= 2 && base.trials.size() >= 2)
            report.comparisons.push_back(
                {baseline, one_sided_t(series.accuracies(), base.accuracies())});
        else
            report.comparisons.push_back(
                {baseline, TTestResult{0.0, 0.0, 1.0}});
    }
    if (prices)
        report.cost = cost_summary_from_records(out_dir, dataset_id, method_id,
                                                trials, *prices);
    return report;
}

}  // namespace srel
