#pragma once

// Surface-phrase lexicon shared by the dataset loader, the prompt
// renderer, and the response parser. Phrases map to an (axis, relation)
// pair; coincidence phrases ("at the same level as") carry no axis of
// their own and inherit the axis of their context.

#include <algorithm>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "srel/relalg.hpp"

namespace srel {

struct LexiconEntry {
    std::string phrase;
    std::optional<Axis> axis;  // nullopt: axis-agnostic (Same phrases)
    AxisRelation relation = AxisRelation::Same;
};

struct UnknownRelationPhrase : std::runtime_error {
    explicit UnknownRelationPhrase(const std::string& phrase)
        : std::runtime_error("unknown relation phrase: \"" + phrase + "\"") {}
};

inline std::string lowercased(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

class RelationLexicon {
public:
    static RelationLexicon standard() {
        RelationLexicon lx;
        auto add = [&](const char* p, std::optional<Axis> a, AxisRelation r) {
            lx.entries_.push_back({p, a, r});
        };
        // Horizontal
        add("to the left of", Axis::Horizontal, AxisRelation::Precedes);
        add("on the left of", Axis::Horizontal, AxisRelation::Precedes);
        add("left of", Axis::Horizontal, AxisRelation::Precedes);
        add("left", Axis::Horizontal, AxisRelation::Precedes);
        add("to the right of", Axis::Horizontal, AxisRelation::Follows);
        add("on the right of", Axis::Horizontal, AxisRelation::Follows);
        add("right of", Axis::Horizontal, AxisRelation::Follows);
        add("right", Axis::Horizontal, AxisRelation::Follows);
        // Vertical
        add("above", Axis::Vertical, AxisRelation::Precedes);
        add("over", Axis::Vertical, AxisRelation::Precedes);
        add("on top of", Axis::Vertical, AxisRelation::Precedes);
        add("below", Axis::Vertical, AxisRelation::Follows);
        add("under", Axis::Vertical, AxisRelation::Follows);
        add("beneath", Axis::Vertical, AxisRelation::Follows);
        // Depth
        add("in front of", Axis::Depth, AxisRelation::Precedes);
        add("behind", Axis::Depth, AxisRelation::Follows);
        add("at the same depth as", Axis::Depth, AxisRelation::Same);
        // Coincidence, axis taken from context
        add("at the same level as", std::nullopt, AxisRelation::Same);
        // Longest match first so "to the left of" beats "left of".
        std::stable_sort(lx.entries_.begin(), lx.entries_.end(),
                         [](const LexiconEntry& a, const LexiconEntry& b) {
                             return a.phrase.size() > b.phrase.size();
                         });
        return lx;
    }

    std::optional<LexiconEntry> lookup(const std::string& phrase) const {
        const std::string p = lowercased(trim(phrase));
        for (const auto& e : entries_)
            if (e.phrase == p) return e;
        return std::nullopt;
    }

    LexiconEntry require(const std::string& phrase) const {
        auto e = lookup(phrase);
        if (!e) throw UnknownRelationPhrase(phrase);
        return *e;
    }

    // Canonical phrase used when the harness renders a question.
    static std::string question_phrase(Axis axis, AxisRelation r) {
        if (r == AxisRelation::Same) return same_phrase(axis);
        switch (axis) {
            case Axis::Horizontal:
                return r == AxisRelation::Precedes ? "on the left of"
                                                   : "on the right of";
            case Axis::Vertical:
                return r == AxisRelation::Precedes ? "above" : "below";
            default:
                return r == AxisRelation::Precedes ? "in front of" : "behind";
        }
    }

    // Canonical phrase used inside structured relation statements,
    // matching the register of the template output ("B is right of A").
    static std::string statement_phrase(Axis axis, AxisRelation r) {
        if (r == AxisRelation::Same) return same_phrase(axis);
        switch (axis) {
            case Axis::Horizontal:
                return r == AxisRelation::Precedes ? "left of" : "right of";
            case Axis::Vertical:
                return r == AxisRelation::Precedes ? "above" : "below";
            default:
                return r == AxisRelation::Precedes ? "in front of" : "behind";
        }
    }

    // Finds the leftmost, longest relation phrase inside `text`; returns
    // (begin offset, matched length, entry).
    struct Match {
        std::size_t pos = 0;
        std::size_t len = 0;
        LexiconEntry entry;
    };
    std::optional<Match> find_in(const std::string& text) const {
        const std::string hay = lowercased(text);
        std::optional<Match> best;
        for (const auto& e : entries_) {
            std::size_t pos = hay.find(e.phrase);
            while (pos != std::string::npos) {
                if (word_bounded(hay, pos, e.phrase.size())) {
                    if (!best || pos < best->pos ||
                        (pos == best->pos && e.phrase.size() > best->len))
                        best = Match{pos, e.phrase.size(), e};
                    break;
                }
                pos = hay.find(e.phrase, pos + 1);
            }
        }
        return best;
    }

    const std::vector<LexiconEntry>& entries() const { return entries_; }

private:
    static std::string same_phrase(Axis axis) {
        return axis == Axis::Depth ? "at the same depth as"
                                   : "at the same level as";
    }
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }
    static bool word_bounded(const std::string& hay, std::size_t pos,
                             std::size_t len) {
        auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)); };
        if (pos > 0 && alnum(hay[pos - 1])) return false;
        if (pos + len < hay.size() && alnum(hay[pos + len])) return false;
        return true;
    }

    std::vector<LexiconEntry> entries_;
};

}  // namespace srel
