#pragma once

// Consistency checks over a parsed structured response: bidirectional
// agreement, transitive entailment through the reference object, and
// answer adjudication policies.

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "srel/dataset.hpp"
#include "srel/parse.hpp"
#include "srel/prompting.hpp"
#include "srel/relalg.hpp"

namespace srel {

struct MissingDirection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingReference : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Last stated relation for the directed pair (subj, obj) on `axis`; a
// later restatement overrides an earlier one.
inline std::optional<AxisRelation> last_relation(const ParsedResponse& parsed,
                                                 char subj, char obj, Axis axis) {
    std::optional<AxisRelation> out;
    for (const auto& st : parsed.statements)
        if (st.subject.size() == 1 && st.object.size() == 1 &&
            st.subject[0] == subj && st.object[0] == obj && st.axis == axis)
            out = st.relation;
    return out;
}

// As above but accepts either direction, converting B->A claims into
// their A->B converse.
inline std::optional<AxisRelation> last_ab_relation(const ParsedResponse& parsed,
                                                    Axis axis) {
    std::optional<AxisRelation> out;
    for (const auto& st : parsed.statements) {
        if (st.axis != axis || st.subject.size() != 1 || st.object.size() != 1)
            continue;
        if (st.subject[0] == 'A' && st.object[0] == 'B')
            out = st.relation;
        else if (st.subject[0] == 'B' && st.object[0] == 'A')
            out = converse(st.relation);
    }
    return out;
}

}  // namespace detail

struct BidirectionalCheck {
    // Per axis: true/false when both directions were stated, otherwise
    // absent from the map.
    std::map<Axis, bool> per_axis;
    bool overall = true;  // conjunction over the axes present

    bool checked() const { return !per_axis.empty(); }
};

// Verifies that every axis stated in both directions satisfies
// rel(B,A) == converse(rel(A,B)). Throws when no axis has both
// directions, since the check is then meaningless.
inline BidirectionalCheck check_bidirectional(const ParsedResponse& parsed) {
    BidirectionalCheck out;
    for (auto axis : kAllAxes) {
        const auto ab = detail::last_relation(parsed, 'A', 'B', axis);
        const auto ba = detail::last_relation(parsed, 'B', 'A', axis);
        if (!ab || !ba) continue;
        const bool ok = (*ba == converse(*ab));
        out.per_axis[axis] = ok;
        out.overall = out.overall && ok;
    }
    if (out.per_axis.empty())
        throw MissingDirection(
            "no axis has statements in both directions between A and B");
    return out;
}

enum class TransitivityStatus : std::uint8_t {
    Entailed,
    ConsistentNotEntailed,
    Violated,
    NotApplicable
};

inline const char* to_string(TransitivityStatus s) {
    switch (s) {
        case TransitivityStatus::Entailed: return "Entailed";
        case TransitivityStatus::ConsistentNotEntailed:
            return "ConsistentNotEntailed";
        case TransitivityStatus::Violated: return "Violated";
        case TransitivityStatus::NotApplicable: return "NotApplicable";
    }
    return "?";
}

// Compares the A->B conclusion against what the reference legs
// (A->C, B->C) entail on `axis`. When no explicit A/B statement exists
// but an answer was given, a non-singleton derived set means the answer
// could not have been entailed by the stated relations.
inline TransitivityStatus check_transitivity(const ParsedResponse& parsed,
                                             Axis axis) {
    const auto ac = detail::last_relation(parsed, 'A', 'C', axis);
    const auto bc = detail::last_relation(parsed, 'B', 'C', axis);
    if (!ac || !bc)
        throw MissingReference("missing A-C or B-C statement on axis " +
                               std::string(to_string(axis)));
    const RelationSet derived = derive_ab(*ac, *bc);
    const auto reported = detail::last_ab_relation(parsed, axis);
    if (reported) {
        if (!derived.contains(*reported)) return TransitivityStatus::Violated;
        if (derived.singleton()) return TransitivityStatus::Entailed;
        return TransitivityStatus::ConsistentNotEntailed;
    }
    if (derived.singleton()) return TransitivityStatus::Entailed;
    if (parsed.answer) return TransitivityStatus::ConsistentNotEntailed;
    return TransitivityStatus::NotApplicable;
}

enum class Adjudication : std::uint8_t { Yes, No, Indeterminate };

inline const char* to_string(Adjudication a) {
    switch (a) {
        case Adjudication::Yes: return "yes";
        case Adjudication::No: return "no";
        case Adjudication::Indeterminate: return "indeterminate";
    }
    return "?";
}

enum class AdjudicationPolicy : std::uint8_t {
    TrustModel,           // the model's own Answer: line
    DeriveLastAb,         // last stated A/B relation on the queried axis
    DeriveTransitive,     // reference entailment, falling back to A/B
    Majority              // vote among the three above
};

namespace detail {

inline Adjudication from_bool(bool yes) {
    return yes ? Adjudication::Yes : Adjudication::No;
}

inline Adjudication adjudicate_last_ab(const ParsedResponse& parsed,
                                       const VqaItem& item) {
    const auto rel = last_ab_relation(parsed, item.queried_axis);
    if (!rel) return Adjudication::Indeterminate;
    return from_bool(*rel == item.queried_relation);
}

inline Adjudication adjudicate_transitive(const ParsedResponse& parsed,
                                          const VqaItem& item) {
    const auto ac = last_relation(parsed, 'A', 'C', item.queried_axis);
    const auto bc = last_relation(parsed, 'B', 'C', item.queried_axis);
    if (ac && bc) {
        const RelationSet derived = derive_ab(*ac, *bc);
        if (derived.singleton())
            return from_bool(derived.only() == item.queried_relation);
    }
    return adjudicate_last_ab(parsed, item);
}

}  // namespace detail

inline Adjudication adjudicate(const ParsedResponse& parsed, const VqaItem& item,
                               AdjudicationPolicy policy) {
    switch (policy) {
        case AdjudicationPolicy::TrustModel:
            if (!parsed.answer) return Adjudication::Indeterminate;
            return detail::from_bool(*parsed.answer == Gold::Yes);
        case AdjudicationPolicy::DeriveLastAb:
            return detail::adjudicate_last_ab(parsed, item);
        case AdjudicationPolicy::DeriveTransitive:
            return detail::adjudicate_transitive(parsed, item);
        case AdjudicationPolicy::Majority: {
            int yes = 0, no = 0;
            for (auto p : {AdjudicationPolicy::TrustModel,
                           AdjudicationPolicy::DeriveLastAb,
                           AdjudicationPolicy::DeriveTransitive}) {
                switch (adjudicate(parsed, item, p)) {
                    case Adjudication::Yes: ++yes; break;
                    case Adjudication::No: ++no; break;
                    default: break;
                }
            }
            if (yes > no) return Adjudication::Yes;
            if (no > yes) return Adjudication::No;
            return Adjudication::Indeterminate;
        }
    }
    return Adjudication::Indeterminate;
}

// Everything the evaluator records about one response's internal
// consistency. Checks that a method's format does not call for are left
// unset rather than failed.
struct ValidationReport {
    std::optional<bool> bidirectional_ok;
    std::optional<TransitivityStatus> transitivity;
    // Model answer vs the relation content of its own statements.
    std::optional<bool> answer_consistent;
    std::optional<PathConsistencyResult> network;
    std::size_t diagnostic_count = 0;
};

inline ValidationReport validate_response(const ParsedResponse& parsed,
                                          const MethodSpec& spec,
                                          const VqaItem& item) {
    ValidationReport rep;
    rep.diagnostic_count = parsed.diagnostics.size();

    if (spec.uses_order() &&
        (spec.order == RelationOrder::AB_BA || spec.order == RelationOrder::BA_AB)) {
        try {
            rep.bidirectional_ok = check_bidirectional(parsed).overall;
        } catch (const MissingDirection&) {
        }
    }
    if (spec.uses_reference()) {
        try {
            rep.transitivity = check_transitivity(parsed, item.queried_axis);
        } catch (const MissingReference&) {
        }
    }
    if (parsed.answer) {
        const auto derived = adjudicate(parsed, item,
                                        AdjudicationPolicy::DeriveTransitive);
        if (derived != Adjudication::Indeterminate)
            rep.answer_consistent =
                (derived == Adjudication::Yes) == (*parsed.answer == Gold::Yes);
    }
    if (!parsed.statements.empty())
        rep.network = path_consistent(extract_network(parsed));
    return rep;
}

}  // namespace srel
