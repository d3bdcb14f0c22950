#pragma once

// Tolerant parser for structured LVLM replies. Parsing never fails on
// arbitrary input: every deviation from the expected format becomes a
// diagnostic, and the answer may simply be absent.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srel/dataset.hpp"
#include "srel/lexicon.hpp"
#include "srel/prompting.hpp"
#include "srel/relalg.hpp"

namespace srel {

enum class DiagnosticKind : std::uint8_t {
    MissingSection,
    LabelSwap,
    VocabularyAxisMismatch,
    UnknownRelationPhrase,
    ExtraStatements,
    MissingAnswer,
    OrderMismatch
};

inline const char* to_string(DiagnosticKind k) {
    switch (k) {
        case DiagnosticKind::MissingSection: return "MissingSection";
        case DiagnosticKind::LabelSwap: return "LabelSwap";
        case DiagnosticKind::VocabularyAxisMismatch: return "VocabularyAxisMismatch";
        case DiagnosticKind::UnknownRelationPhrase: return "UnknownRelationPhrase";
        case DiagnosticKind::ExtraStatements: return "ExtraStatements";
        case DiagnosticKind::MissingAnswer: return "MissingAnswer";
        case DiagnosticKind::OrderMismatch: return "OrderMismatch";
    }
    return "?";
}

struct Diagnostic {
    DiagnosticKind kind;
    std::size_t line = 0;  // 1-based; 0 when the problem is not line-local
    std::string detail;
};

struct ParsedResponse {
    std::optional<std::string> question_echo;
    std::map<char, std::string> labels;  // 'A','B','C' -> noun phrase
    std::vector<Statement> statements;   // subjects/objects are role letters
    std::optional<std::string> thinking;
    std::optional<Gold> answer;
    std::vector<Diagnostic> diagnostics;

    bool has_diagnostic(DiagnosticKind k) const {
        for (const auto& d : diagnostics)
            if (d.kind == k) return true;
        return false;
    }
};

namespace detail {

inline std::string strip_markup(std::string line) {
    // markdown bold/italic markers and backticks are noise
    std::string out;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '*' || line[i] == '`') continue;
        out += line[i];
    }
    // trim
    std::size_t b = out.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = out.find_last_not_of(" \t\r");
    return out.substr(b, e - b + 1);
}

inline bool starts_with_ci(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size()) return false;
    return lowercased(s.substr(0, prefix.size())) == lowercased(prefix);
}

inline std::string after_colon(const std::string& line) {
    std::size_t pos = line.find(':');
    if (pos == std::string::npos) return "";
    std::size_t b = line.find_first_not_of(" \t", pos + 1);
    return b == std::string::npos ? "" : line.substr(b);
}

inline std::optional<Gold> normalize_answer(const std::string& raw) {
    std::string t = lowercased(raw);
    // keep only letters to tolerate punctuation and emphasis
    std::string letters;
    for (char c : t)
        if (std::isalpha(static_cast<unsigned char>(c))) letters += c;
    if (letters == "yes") return Gold::Yes;
    if (letters == "no") return Gold::No;
    if (starts_with_ci(t, "yes")) return Gold::Yes;
    if (starts_with_ci(t, "no")) return Gold::No;
    return std::nullopt;
}

// "Horizontal relation between Object B and A: ..." -> (axis, 'B', 'A')
struct StatementHeader {
    Axis axis;
    char subject;
    char object;
};

inline std::optional<StatementHeader> match_statement_header(
    const std::string& line) {
    static const std::pair<const char*, Axis> axes[] = {
        {"horizontal relation", Axis::Horizontal},
        {"vertical relation", Axis::Vertical},
        {"depth relation", Axis::Depth}};
    const std::string low = lowercased(line);
    for (const auto& [name, axis] : axes) {
        if (!starts_with_ci(low, name)) continue;
        const std::string marker = "between object ";
        std::size_t pos = low.find(marker);
        if (pos == std::string::npos) return std::nullopt;
        pos += marker.size();
        // pattern: "<X> and <Y>:"
        if (pos + 6 > low.size()) return std::nullopt;
        const char x = static_cast<char>(std::toupper(
            static_cast<unsigned char>(low[pos])));
        std::size_t and_pos = low.find(" and ", pos);
        if (and_pos == std::string::npos) return std::nullopt;
        const std::size_t ypos = and_pos + 5;
        if (ypos >= low.size()) return std::nullopt;
        const char y = static_cast<char>(std::toupper(
            static_cast<unsigned char>(low[ypos])));
        if ((x != 'A' && x != 'B' && x != 'C') ||
            (y != 'A' && y != 'B' && y != 'C'))
            return std::nullopt;
        return StatementHeader{axis, x, y};
    }
    return std::nullopt;
}

// Splits a canonical question into (first object, relation phrase,
// second object); nullopt when no known relation phrase is present.
struct QuestionSplit {
    std::string first;
    std::string phrase;
    std::string second;
};

inline std::optional<QuestionSplit> split_question(const std::string& question,
                                                   const RelationLexicon& lexicon) {
    std::string body = question;
    if (starts_with_ci(body, "is there "))
        body = body.substr(std::string("is there ").size());
    const std::string tail = " in the image?";
    if (body.size() > tail.size() &&
        lowercased(body.substr(body.size() - tail.size())) == tail)
        body = body.substr(0, body.size() - tail.size());
    auto m = lexicon.find_in(body);
    if (!m) return std::nullopt;
    auto trim = [](std::string s) {
        std::size_t b = s.find_first_not_of(" \t");
        if (b == std::string::npos) return std::string{};
        std::size_t e = s.find_last_not_of(" \t");
        return s.substr(b, e - b + 1);
    };
    QuestionSplit qs;
    qs.first = trim(body.substr(0, m->pos));
    qs.phrase = body.substr(m->pos, m->len);
    qs.second = trim(body.substr(m->pos + m->len));
    if (qs.first.empty() || qs.second.empty()) return std::nullopt;
    return qs;
}

inline std::string strip_article_lc(const std::string& phrase) {
    std::string p = lowercased(phrase);
    for (const char* art : {"a ", "an ", "the "})
        if (p.rfind(art, 0) == 0) return p.substr(std::string(art).size());
    return p;
}

}  // namespace detail

inline ParsedResponse parse_response(
    const std::string& text, const MethodSpec& spec,
    const RelationLexicon& lexicon = RelationLexicon::standard()) {
    ParsedResponse out;
    std::vector<std::string> raw_lines;
    {
        std::string cur;
        for (char c : text) {
            if (c == '\n') {
                raw_lines.push_back(cur);
                cur.clear();
            } else
                cur += c;
        }
        raw_lines.push_back(cur);
    }

    bool in_thinking = false;
    for (std::size_t i = 0; i < raw_lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string line = detail::strip_markup(raw_lines[i]);
        if (line.empty() || line.rfind("```", 0) == 0 || line.rfind("##", 0) == 0)
            continue;

        if (auto header = detail::match_statement_header(line)) {
            in_thinking = false;
            const std::string tail = detail::after_colon(line);
            auto m = lexicon.find_in(tail);
            if (!m) {
                out.diagnostics.push_back({DiagnosticKind::UnknownRelationPhrase,
                                           lineno, tail});
                continue;
            }
            if (m->entry.axis && *m->entry.axis != header->axis) {
                // e.g. "behind" under a Vertical header; keep the header's
                // axis and the phrase's relation value, but flag it.
                out.diagnostics.push_back(
                    {DiagnosticKind::VocabularyAxisMismatch, lineno, line});
            }
            Statement st;
            st.subject = std::string(1, header->subject);
            st.object = std::string(1, header->object);
            st.axis = header->axis;
            st.relation = m->entry.relation;
            out.statements.push_back(st);
            continue;
        }

        if (detail::starts_with_ci(line, "question:")) {
            in_thinking = false;
            out.question_echo = detail::after_colon(line);
        } else if (detail::starts_with_ci(line, "object a:")) {
            in_thinking = false;
            out.labels['A'] = detail::after_colon(line);
        } else if (detail::starts_with_ci(line, "object b:")) {
            in_thinking = false;
            out.labels['B'] = detail::after_colon(line);
        } else if (detail::starts_with_ci(line, "object c:")) {
            in_thinking = false;
            out.labels['C'] = detail::after_colon(line);
        } else if (detail::starts_with_ci(line, "thinking process:")) {
            out.thinking = detail::after_colon(line);
            in_thinking = true;
        } else if (detail::starts_with_ci(line, "answer:")) {
            in_thinking = false;
            out.answer = detail::normalize_answer(detail::after_colon(line));
            if (!out.answer)
                out.diagnostics.push_back(
                    {DiagnosticKind::MissingAnswer, lineno,
                     "Answer line present but not yes/no: " + line});
        } else if (in_thinking) {
            *out.thinking += "\n" + line;
        }
        // other unrecognized lines are tolerated silently
    }

    // A bare yes/no reply (the vanilla baseline) is a valid answer.
    if (!out.answer) {
        std::string whole = detail::strip_markup(text);
        if (auto a = detail::normalize_answer(whole);
            a && whole.size() <= 8)
            out.answer = a;
    }
    if (!out.answer && !out.has_diagnostic(DiagnosticKind::MissingAnswer))
        out.diagnostics.push_back(
            {DiagnosticKind::MissingAnswer, 0, "no Answer: line found"});

    // Label order must match the question's mention order.
    if (out.question_echo && out.labels.contains('A') && out.labels.contains('B')) {
        if (auto qs = detail::split_question(*out.question_echo, lexicon)) {
            const std::string first = detail::strip_article_lc(qs->first);
            const std::string second = detail::strip_article_lc(qs->second);
            const std::string la = detail::strip_article_lc(out.labels.at('A'));
            const std::string lb = detail::strip_article_lc(out.labels.at('B'));
            if (la == second && lb == first && first != second)
                out.diagnostics.push_back(
                    {DiagnosticKind::LabelSwap, 0,
                     "Object A is \"" + out.labels.at('A') +
                         "\" but the question mentions \"" + qs->first +
                         "\" first"});
        }
    }

    // Structural conformance against the method's expected format.
    spec.validate();
    if (spec.structure && spec.kind != MethodKind::Vanilla) {
        for (const auto& [role, name] :
             std::vector<std::pair<char, const char*>>{{'A', "Object A:"},
                                                       {'B', "Object B:"}})
            if (!out.labels.contains(role))
                out.diagnostics.push_back(
                    {DiagnosticKind::MissingSection, 0, name});
        if (spec.uses_reference() && !out.labels.contains('C'))
            out.diagnostics.push_back(
                {DiagnosticKind::MissingSection, 0, "Object C:"});

        if (spec.kind != MethodKind::CotStructure) {
            const auto slots = expected_statement_slots(spec);
            if (out.statements.size() > slots.size())
                out.diagnostics.push_back(
                    {DiagnosticKind::ExtraStatements, 0,
                     std::to_string(out.statements.size()) + " statements, " +
                         std::to_string(slots.size()) + " expected"});
            const std::size_t n = std::min(out.statements.size(), slots.size());
            bool mismatch = out.statements.size() < slots.size();
            for (std::size_t i = 0; i < n && !mismatch; ++i) {
                const auto& st = out.statements[i];
                const auto& slot = slots[i];
                mismatch = st.subject[0] != slot.subject ||
                           st.object[0] != slot.object || st.axis != slot.axis;
            }
            if (mismatch)
                out.diagnostics.push_back(
                    {DiagnosticKind::OrderMismatch, 0,
                     "statement blocks disagree with the expected format"});
        }
    }
    return out;
}

struct EmptyStatements : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bridge to the algebra: statements become network edges; duplicate
// statements about the same (pair, axis) intersect, which can produce an
// empty edge for path_consistent to catch.
inline ConstraintNetwork extract_network(const ParsedResponse& parsed) {
    if (parsed.statements.empty())
        throw EmptyStatements("no statements to build a network from");
    ConstraintNetwork net;
    for (const auto& st : parsed.statements) net.add_statement(st);
    return net;
}

}  // namespace srel
