#pragma once

// VQA record ingestion: JSONL loading with per-line error reporting,
// canonical question rendering, balanced seeded sampling, and the
// caption-to-question converter.

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srel/lexicon.hpp"
#include "srel/relalg.hpp"

namespace srel {

enum class Gold : std::uint8_t { Yes, No };

inline const char* to_string(Gold g) { return g == Gold::Yes ? "yes" : "no"; }

struct VqaItem {
    std::string id;
    std::string image_ref;
    std::string object_a;  // stored verbatim, articles included
    std::string object_b;
    Axis queried_axis = Axis::Horizontal;
    AxisRelation queried_relation = AxisRelation::Follows;
    std::string relation_phrase;  // surface form, must resolve in the lexicon
    Gold gold = Gold::Yes;
    std::string source = "other";
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError {
    std::size_t line = 0;
    std::string reason;
};

struct InsufficientItems : std::runtime_error {
    InsufficientItems(const std::string& cls, std::size_t needed,
                      std::size_t available)
        : std::runtime_error("not enough \"" + cls + "\" items: need " +
                             std::to_string(needed) + ", have " +
                             std::to_string(available)) {}
};

struct OddSplitSize : std::runtime_error {
    explicit OddSplitSize(std::size_t n)
        : std::runtime_error("balanced split size must be even, got " +
                             std::to_string(n)) {}
};

struct LoadResult {
    std::vector<VqaItem> items;
    std::vector<SchemaError> errors;  // unparseable lines, never dropped silently
};

inline nlohmann::json to_json(const VqaItem& it) {
    return nlohmann::json{{"id", it.id},
                          {"image_ref", it.image_ref},
                          {"object_a", it.object_a},
                          {"object_b", it.object_b},
                          {"relation_phrase", it.relation_phrase},
                          {"gold", to_string(it.gold)},
                          {"source", it.source}};
}

inline VqaItem item_from_json(const nlohmann::json& j,
                              const RelationLexicon& lexicon) {
    VqaItem it;
    for (const char* field :
         {"id", "image_ref", "object_a", "object_b", "relation_phrase", "gold"})
        if (!j.contains(field))
            throw std::runtime_error(std::string("missing field ") + field);
    it.id = j.at("id").get<std::string>();
    it.image_ref = j.at("image_ref").get<std::string>();
    it.object_a = j.at("object_a").get<std::string>();
    it.object_b = j.at("object_b").get<std::string>();
    it.relation_phrase = j.at("relation_phrase").get<std::string>();
    it.source = j.value("source", "other");
    if (it.object_a == it.object_b)
        throw std::runtime_error("object_a equals object_b");
    const std::string g = lowercased(j.at("gold").get<std::string>());
    if (g == "yes")
        it.gold = Gold::Yes;
    else if (g == "no")
        it.gold = Gold::No;
    else
        throw std::runtime_error("gold must be yes or no");
    const LexiconEntry entry = lexicon.require(it.relation_phrase);
    if (!entry.axis)
        throw std::runtime_error("relation phrase \"" + it.relation_phrase +
                                 "\" does not determine an axis");
    it.queried_axis = *entry.axis;
    it.queried_relation = entry.relation;
    return it;
}

inline LoadResult load_items(const std::string& path,
                             const RelationLexicon& lexicon) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    LoadResult out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.items.push_back(item_from_json(nlohmann::json::parse(line), lexicon));
        } catch (const std::exception& e) {
            out.errors.push_back({lineno, e.what()});
        }
    }
    return out;
}

inline void save_items(const std::string& path,
                       const std::vector<VqaItem>& items) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& it : items) out << to_json(it).dump() << "\n";
}

// "Is there {object_a} {relation phrase} {object_b} in the image?"
// The stored relation phrase is used verbatim; articles live inside the
// object phrases. Idempotent by construction.
inline std::string normalize_question(
    const VqaItem& item,
    const RelationLexicon& lexicon = RelationLexicon::standard()) {
    lexicon.require(item.relation_phrase);  // throws UnknownRelationPhrase
    return "Is there " + item.object_a + " " + item.relation_phrase + " " +
           item.object_b + " in the image?";
}

struct SamplePlan {
    std::size_t n_test = 600;
    std::size_t n_val = 200;
    std::uint64_t seed = 0;
};

struct Splits {
    std::vector<VqaItem> test;
    std::vector<VqaItem> val;
};

// Deterministic 1:1 yes/no sampling; test and val are disjoint.
inline Splits balanced_sample(const std::vector<VqaItem>& items,
                              const SamplePlan& plan) {
    if (plan.n_test % 2 != 0) throw OddSplitSize(plan.n_test);
    if (plan.n_val % 2 != 0) throw OddSplitSize(plan.n_val);
    std::vector<VqaItem> yes, no;
    for (const auto& it : items)
        (it.gold == Gold::Yes ? yes : no).push_back(it);
    const std::size_t per_class = (plan.n_test + plan.n_val) / 2;
    if (yes.size() < per_class)
        throw InsufficientItems("yes", per_class, yes.size());
    if (no.size() < per_class)
        throw InsufficientItems("no", per_class, no.size());

    std::mt19937_64 rng(plan.seed);
    std::shuffle(yes.begin(), yes.end(), rng);
    std::shuffle(no.begin(), no.end(), rng);

    Splits s;
    auto take = [](std::vector<VqaItem>& from, std::size_t offset,
                   std::size_t count, std::vector<VqaItem>& to) {
        to.insert(to.end(), from.begin() + offset, from.begin() + offset + count);
    };
    take(yes, 0, plan.n_test / 2, s.test);
    take(no, 0, plan.n_test / 2, s.test);
    take(yes, plan.n_test / 2, plan.n_val / 2, s.val);
    take(no, plan.n_test / 2, plan.n_val / 2, s.val);
    return s;
}

struct PredicateError : std::runtime_error {
    PredicateError(const std::string& item_id, const std::string& why)
        : std::runtime_error("predicate failed on item " + item_id + ": " + why) {}
};

// Order-preserving filter; predicate failures carry the item id.
inline std::vector<VqaItem> filter_items(
    const std::vector<VqaItem>& items,
    const std::function<bool(const VqaItem&)>& predicate) {
    std::vector<VqaItem> out;
    for (const auto& it : items) {
        bool keep;
        try {
            keep = predicate(it);
        } catch (const std::exception& e) {
            throw PredicateError(it.id, e.what());
        }
        if (keep) out.push_back(it);
    }
    return out;
}

// Predicate backed by a sidecar {"image_ref": object count} JSON file,
// the pluggable stand-in for the external five-object vision filter.
inline std::function<bool(const VqaItem&)> object_count_predicate(
    const std::string& sidecar_path, int min_objects = 5) {
    std::ifstream in(sidecar_path);
    if (!in) throw IoError("cannot open " + sidecar_path);
    nlohmann::json counts = nlohmann::json::parse(in);
    return [counts, min_objects](const VqaItem& it) {
        if (!counts.contains(it.image_ref))
            throw std::runtime_error("no object count for " + it.image_ref);
        return counts.at(it.image_ref).get<int>() >= min_objects;
    };
}

// Caption lines of the form "<Object> is <Relation> <Object>." become a
// gold-yes question; a gold-no twin swaps the relation for its converse
// phrase, reproducing the balanced binary design.
inline std::vector<VqaItem> items_from_captions(
    const std::vector<std::string>& captions, const RelationLexicon& lexicon,
    const std::string& source = "other", bool with_negatives = true) {
    std::vector<VqaItem> out;
    std::size_t n = 0;
    for (const auto& caption : captions) {
        auto m = lexicon.find_in(caption);
        if (!m || !m->entry.axis)
            throw UnknownRelationPhrase(caption);
        std::string left = caption.substr(0, m->pos);
        std::string right = caption.substr(m->pos + m->len);
        auto strip = [](std::string s) {
            while (!s.empty() && (s.back() == ' ' || s.back() == '.')) s.pop_back();
            std::size_t b = s.find_first_not_of(' ');
            return b == std::string::npos ? std::string{} : s.substr(b);
        };
        // drop the copula that precedes the relation phrase
        if (left.size() >= 4 && left.substr(left.size() - 4) == " is ")
            left = left.substr(0, left.size() - 4);
        else if (left == "is ")
            left.clear();
        left = strip(left);
        right = strip(right);
        if (left.empty() || right.empty())
            throw std::runtime_error("cannot split caption: " + caption);

        VqaItem yes;
        yes.id = source + "-" + std::to_string(n++);
        yes.image_ref = "caption:" + yes.id;
        yes.object_a = left;
        yes.object_b = right;
        yes.relation_phrase = caption.substr(m->pos, m->len);
        yes.queried_axis = *m->entry.axis;
        yes.queried_relation = m->entry.relation;
        yes.gold = Gold::Yes;
        yes.source = source;
        out.push_back(yes);

        if (with_negatives && m->entry.relation != AxisRelation::Same) {
            VqaItem no = yes;
            no.id = source + "-" + std::to_string(n++);
            no.image_ref = yes.image_ref;
            no.queried_relation = converse(m->entry.relation);
            no.relation_phrase =
                RelationLexicon::question_phrase(no.queried_axis, no.queried_relation);
            no.gold = Gold::No;
            out.push_back(no);
        }
    }
    return out;
}

}  // namespace srel
