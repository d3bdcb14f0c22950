#pragma once

// Metrics, multi-trial aggregation, one-sided Welch significance
// testing, and report emission (markdown / CSV / JSON).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <string>
#include <vector>

#include <json.hpp>

namespace srel {

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    // Items with no extractable answer; already folded into the counts
    // above as incorrect negative predictions, tracked for the report.
    std::size_t unanswered = 0;

    std::size_t total() const { return tp + fp + tn + fn; }

    Confusion& operator+=(const Confusion& o) {
        tp += o.tp;
        fp += o.fp;
        tn += o.tn;
        fn += o.fn;
        unanswered += o.unanswered;
        return *this;
    }
};

// All values are percentages in [0, 100].
struct Metrics {
    double accuracy = 0;
    double precision = 0;
    double recall = 0;
    double f1 = 0;
    double unanswered_rate = 0;
    // Set when a denominator was zero and the value was defined as 0.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

inline double f1_of(double precision_pct, double recall_pct) {
    const double s = precision_pct + recall_pct;
    return s == 0 ? 0.0 : 2.0 * precision_pct * recall_pct / s;
}

inline Metrics metrics(const Confusion& c) {
    if (c.total() == 0) throw std::invalid_argument("metrics: empty confusion");
    Metrics m;
    const double all = static_cast<double>(c.total());
    m.accuracy = 100.0 * static_cast<double>(c.tp + c.tn) / all;
    if (c.tp + c.fp == 0)
        m.precision_undefined = true;
    else
        m.precision = 100.0 * static_cast<double>(c.tp) /
                      static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn == 0)
        m.recall_undefined = true;
    else
        m.recall =
            100.0 * static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (m.precision + m.recall == 0)
        m.f1_undefined = true;
    else
        m.f1 = f1_of(m.precision, m.recall);
    m.unanswered_rate = 100.0 * static_cast<double>(c.unanswered) / all;
    return m;
}

namespace detail {

// Regularized incomplete beta I_x(a, b) via the standard continued
// fraction (Lentz's algorithm).
inline double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-15, kFpMin = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= kEps) break;
    }
    return h;
}

inline double inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) -
                            std::lgamma(b) + a * std::log(x) +
                            b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Upper-tail probability P(T_df > t) of Student's t distribution.
inline double student_t_upper_tail(double t, double df) {
    if (df <= 0) throw std::invalid_argument("student_t_upper_tail: df <= 0");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double x = df / (df + t * t);
    const double half = 0.5 * detail::inc_beta(df / 2.0, 0.5, x);
    return t >= 0 ? half : 1.0 - half;
}

struct TTestResult {
    double t = 0;
    double df = 0;
    double p = 0.5;  // one-sided: P(mean_a <= mean_b observed by chance)
};

// One-sided Welch two-sample test of H1: mean(a) > mean(b).
// Degenerate inputs: identical constant samples give t=0, p=0.5;
// distinct constant samples give t=+/-inf, p=0 or 1 by the sign of the
// mean difference.
inline TTestResult one_sided_t(const std::vector<double>& a,
                               const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("one_sided_t: each sample needs >= 2 values");
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto var = [&](const std::vector<double>& v, double m) {
        double s = 0;
        for (double x : v) s += (x - m) * (x - m);
        return s / static_cast<double>(v.size() - 1);
    };
    const double ma = mean(a), mb = mean(b);
    const double va = var(a, ma), vb = var(b, mb);
    const double na = static_cast<double>(a.size()),
                 nb = static_cast<double>(b.size());
    const double sa = va / na, sb = vb / nb;

    TTestResult r;
    if (sa + sb == 0.0) {
        if (ma == mb) {
            r.t = 0.0;
            r.df = na + nb - 2.0;
            r.p = 0.5;
        } else {
            r.t = ma > mb ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
            r.df = na + nb - 2.0;
            r.p = ma > mb ? 0.0 : 1.0;
        }
        return r;
    }
    r.t = (ma - mb) / std::sqrt(sa + sb);
    // Welch–Satterthwaite degrees of freedom.
    r.df = (sa + sb) * (sa + sb) /
           (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.p = student_t_upper_tail(r.t, r.df);
    return r;
}

struct TrialSeries {
    std::string method_id;
    std::string dataset_id;
    std::vector<Confusion> trials;

    std::vector<double> accuracies() const {
        std::vector<double> out;
        for (const auto& c : trials) out.push_back(metrics(c).accuracy);
        return out;
    }
};

struct AggregateMetrics {
    Metrics mean;                      // arithmetic mean over trials
    std::vector<Metrics> per_trial;    // retained for the report
};

inline AggregateMetrics aggregate(const TrialSeries& series) {
    if (series.trials.empty())
        throw std::invalid_argument("aggregate: no trials");
    AggregateMetrics agg;
    for (const auto& c : series.trials) agg.per_trial.push_back(metrics(c));
    const double n = static_cast<double>(agg.per_trial.size());
    for (const auto& m : agg.per_trial) {
        agg.mean.accuracy += m.accuracy / n;
        agg.mean.precision += m.precision / n;
        agg.mean.recall += m.recall / n;
        agg.mean.f1 += m.f1 / n;
        agg.mean.unanswered_rate += m.unanswered_rate / n;
        agg.mean.precision_undefined |= m.precision_undefined;
        agg.mean.recall_undefined |= m.recall_undefined;
        agg.mean.f1_undefined |= m.f1_undefined;
    }
    return agg;
}

struct BaselineComparison {
    std::string baseline_id;
    TTestResult test;
};

struct CostSummary {
    double total_usd = 0;
    double per_100_questions_usd = 0;
    bool tokens_estimated = false;  // char-count heuristic was used
};

struct MetricsReport {
    std::string method_id;
    std::string dataset_id;
    AggregateMetrics metrics;
    std::vector<BaselineComparison> comparisons;
    std::optional<CostSummary> cost;
};

enum class ReportFormat : std::uint8_t { MarkdownTable, Csv, Json };

namespace detail {

// Fixed presentation order: the constraint methods after their
// baselines, datasets in corpus order with the cross-dataset average
// last; anything unknown goes after, alphabetically.
inline int method_rank(const std::string& id) {
    static const std::vector<std::string> order = {
        "vanilla", "cot_structure", "bidirectional", "transitivity", "combined"};
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& p = order[i];
        if (id == p || id.rfind(p + ":", 0) == 0) return static_cast<int>(i);
    }
    return static_cast<int>(order.size());
}

inline int dataset_rank(const std::string& id) {
    static const std::vector<std::string> order = {"ARO", "GQA", "MMRel",
                                                   "Average"};
    for (std::size_t i = 0; i < order.size(); ++i)
        if (id == order[i]) return static_cast<int>(i);
    return static_cast<int>(order.size());
}

inline std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline bool significant(const MetricsReport& r) {
    for (const auto& c : r.comparisons)
        if (c.test.p < 0.05) return true;
    return false;
}

inline std::vector<const MetricsReport*> sorted_reports(
    const std::vector<MetricsReport>& reports) {
    std::vector<const MetricsReport*> ptrs;
    for (const auto& r : reports) ptrs.push_back(&r);
    std::stable_sort(ptrs.begin(), ptrs.end(),
                     [](const MetricsReport* a, const MetricsReport* b) {
                         const auto ka = std::tuple(method_rank(a->method_id),
                                                    a->method_id,
                                                    dataset_rank(a->dataset_id),
                                                    a->dataset_id);
                         const auto kb = std::tuple(method_rank(b->method_id),
                                                    b->method_id,
                                                    dataset_rank(b->dataset_id),
                                                    b->dataset_id);
                         return ka < kb;
                     });
    return ptrs;
}

}  // namespace detail

inline nlohmann::json to_json(const MetricsReport& r) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto& m : r.metrics.per_trial)
        trials.push_back({{"accuracy", m.accuracy},
                          {"precision", m.precision},
                          {"recall", m.recall},
                          {"f1", m.f1},
                          {"unanswered_rate", m.unanswered_rate}});
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : r.comparisons)
        comps.push_back({{"baseline", c.baseline_id},
                         {"t", c.test.t},
                         {"df", c.test.df},
                         {"p", c.test.p},
                         {"significant", c.test.p < 0.05}});
    nlohmann::json j = {{"method", r.method_id},
                        {"dataset", r.dataset_id},
                        {"mean",
                         {{"accuracy", r.metrics.mean.accuracy},
                          {"precision", r.metrics.mean.precision},
                          {"recall", r.metrics.mean.recall},
                          {"f1", r.metrics.mean.f1},
                          {"unanswered_rate", r.metrics.mean.unanswered_rate}}},
                        {"trials", trials},
                        {"comparisons", comps}};
    if (r.cost)
        j["cost"] = {{"total_usd", r.cost->total_usd},
                     {"per_100_questions_usd", r.cost->per_100_questions_usd},
                     {"tokens_estimated", r.cost->tokens_estimated}};
    return j;
}

// Renders reports in a deterministic order. Markdown and CSV mark
// mean accuracy with '*' when any baseline comparison has p < 0.05.
inline std::string emit_report(const std::vector<MetricsReport>& reports,
                               ReportFormat format) {
    const auto sorted = detail::sorted_reports(reports);
    std::string out;
    switch (format) {
        case ReportFormat::Json: {
            nlohmann::json arr = nlohmann::json::array();
            for (const auto* r : sorted) arr.push_back(to_json(*r));
            return arr.dump(2) + "\n";
        }
        case ReportFormat::Csv: {
            out = "method,dataset,accuracy,precision,recall,f1,unanswered_rate,"
                  "significant,cost_per_100_usd\n";
            for (const auto* r : sorted) {
                const auto& m = r->metrics.mean;
                out += r->method_id + "," + r->dataset_id + "," +
                       detail::pct(m.accuracy) + "," + detail::pct(m.precision) +
                       "," + detail::pct(m.recall) + "," + detail::pct(m.f1) +
                       "," + detail::pct(m.unanswered_rate) + "," +
                       (detail::significant(*r) ? "1" : "0") + "," +
                       (r->cost ? detail::pct(r->cost->per_100_questions_usd)
                                : std::string("")) +
                       "\n";
            }
            return out;
        }
        case ReportFormat::MarkdownTable: {
            out = "| Method | Dataset | Acc | Precision | Recall | F1 | "
                  "Unanswered |\n";
            out += "|---|---|---|---|---|---|---|\n";
            for (const auto* r : sorted) {
                const auto& m = r->metrics.mean;
                out += "| " + r->method_id + " | " + r->dataset_id + " | " +
                       detail::pct(m.accuracy) +
                       (detail::significant(*r) ? "*" : "") + " | " +
                       detail::pct(m.precision) + " | " + detail::pct(m.recall) +
                       " | " + detail::pct(m.f1) + " | " +
                       detail::pct(m.unanswered_rate) + " |\n";
            }
            return out;
        }
    }
    return out;
}

}  // namespace srel
