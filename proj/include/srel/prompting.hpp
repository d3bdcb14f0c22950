#pragma once

// Deterministic prompt rendering for the full method matrix: two
// baselines, the three constraint methods, relation-order variants,
// reference-selection attributes, and the CoT / structure ablations.
// Templates live as text assets (embedded at build time, overridable
// from a directory at runtime).

#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "srel/relalg.hpp"
#include "srel/templates.inc"

namespace srel {

enum class MethodKind : std::uint8_t {
    Vanilla,
    CotStructure,
    Bidirectional,
    Transitivity,
    Combined
};

enum class RelationOrder : std::uint8_t { AB, BA, AB_BA, BA_AB };

enum class ReferenceStrategy : std::uint8_t {
    Random,
    Largest,
    Smallest,
    MostTop,
    Central,
    MostObvious
};

inline const char* to_string(MethodKind k) {
    switch (k) {
        case MethodKind::Vanilla: return "vanilla";
        case MethodKind::CotStructure: return "cot_structure";
        case MethodKind::Bidirectional: return "bidirectional";
        case MethodKind::Transitivity: return "transitivity";
        case MethodKind::Combined: return "combined";
    }
    return "?";
}

inline const char* to_string(RelationOrder o) {
    switch (o) {
        case RelationOrder::AB: return "AB";
        case RelationOrder::BA: return "BA";
        case RelationOrder::AB_BA: return "AB_BA";
        case RelationOrder::BA_AB: return "BA_AB";
    }
    return "?";
}

inline const char* to_string(ReferenceStrategy s) {
    switch (s) {
        case ReferenceStrategy::Random: return "random";
        case ReferenceStrategy::Largest: return "largest";
        case ReferenceStrategy::Smallest: return "smallest";
        case ReferenceStrategy::MostTop: return "most_top";
        case ReferenceStrategy::Central: return "central";
        case ReferenceStrategy::MostObvious: return "most_obvious";
    }
    return "?";
}

struct InvalidSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoStructuredOutput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MethodSpec {
    MethodKind kind = MethodKind::Vanilla;
    std::optional<RelationOrder> order;          // bidirectional / combined
    std::optional<ReferenceStrategy> reference;  // transitivity / combined
    bool cot = false;
    bool structure = false;

    static MethodSpec vanilla() { return {MethodKind::Vanilla, {}, {}, false, false}; }
    static MethodSpec cot_structure() {
        return {MethodKind::CotStructure, {}, {}, true, true};
    }
    static MethodSpec bidirectional(RelationOrder o = RelationOrder::BA_AB,
                                    bool cot = true, bool structure = true) {
        return {MethodKind::Bidirectional, o, {}, cot, structure};
    }
    static MethodSpec transitivity(ReferenceStrategy r = ReferenceStrategy::Random,
                                   bool cot = true, bool structure = true) {
        return {MethodKind::Transitivity, {}, r, cot, structure};
    }
    static MethodSpec combined(RelationOrder o = RelationOrder::BA_AB,
                               ReferenceStrategy r = ReferenceStrategy::Random,
                               bool cot = true, bool structure = true) {
        return {MethodKind::Combined, o, r, cot, structure};
    }

    bool uses_reference() const {
        return kind == MethodKind::Transitivity || kind == MethodKind::Combined;
    }
    bool uses_order() const {
        return kind == MethodKind::Bidirectional || kind == MethodKind::Combined;
    }

    void validate() const {
        switch (kind) {
            case MethodKind::Vanilla:
                if (order || reference || cot || structure)
                    throw InvalidSpec("vanilla forbids order/reference/cot/structure");
                break;
            case MethodKind::CotStructure:
                if (order || reference || !cot || !structure)
                    throw InvalidSpec("cot_structure forces cot and structure only");
                break;
            case MethodKind::Bidirectional:
                if (!order || reference)
                    throw InvalidSpec("bidirectional needs an order, no reference");
                break;
            case MethodKind::Transitivity:
                if (order || !reference)
                    throw InvalidSpec("transitivity needs a reference, no order");
                break;
            case MethodKind::Combined:
                if (!order || !reference)
                    throw InvalidSpec("combined needs both order and reference");
                break;
        }
    }

    std::string id() const {
        std::string s = to_string(kind);
        if (order) s += std::string(":") + to_string(*order);
        if (reference) s += std::string(":") + to_string(*reference);
        if (uses_order() || uses_reference()) {
            if (!cot) s += ":no_cot";
            if (!structure) s += ":no_structure";
        }
        return s;
    }

    bool operator==(const MethodSpec&) const = default;
};

struct StatementSlot {
    char subject;  // 'A', 'B' or 'C'
    char object;
    Axis axis;
    bool operator==(const StatementSlot&) const = default;
};

inline std::vector<std::pair<char, char>> directed_pairs(const MethodSpec& spec) {
    std::vector<std::pair<char, char>> pairs;
    if (spec.uses_reference()) {
        pairs.push_back({'A', 'C'});
        pairs.push_back({'B', 'C'});
    }
    if (spec.uses_order()) {
        switch (*spec.order) {
            case RelationOrder::AB: pairs.push_back({'A', 'B'}); break;
            case RelationOrder::BA: pairs.push_back({'B', 'A'}); break;
            case RelationOrder::AB_BA:
                pairs.push_back({'A', 'B'});
                pairs.push_back({'B', 'A'});
                break;
            case RelationOrder::BA_AB:
                pairs.push_back({'B', 'A'});
                pairs.push_back({'A', 'B'});
                break;
        }
    }
    return pairs;
}

// Ordered relation-line slots of the structured output format.
inline std::vector<StatementSlot> expected_statement_slots(const MethodSpec& spec) {
    spec.validate();
    if (!spec.structure || spec.kind == MethodKind::Vanilla)
        throw NoStructuredOutput("method has no structured output format");
    std::vector<StatementSlot> slots;
    for (auto [s, o] : directed_pairs(spec))
        for (auto ax : kAllAxes) slots.push_back({s, o, ax});
    return slots;
}

struct PromptText {
    std::string text;
    std::vector<std::string> expected_sections;
    // Retained for downstream consumers (simulated backend, run records).
    MethodSpec spec;
    std::string question;
};

class TemplateStore {
public:
    static const TemplateStore& builtin() {
        static TemplateStore store{{
            {MethodKind::Vanilla, detail::kTemplate_vanilla},
            {MethodKind::CotStructure, detail::kTemplate_cot_structure},
            {MethodKind::Bidirectional, detail::kTemplate_bidirectional},
            {MethodKind::Transitivity, detail::kTemplate_transitivity},
            {MethodKind::Combined, detail::kTemplate_combined},
        }};
        return store;
    }

    static TemplateStore from_directory(const std::string& dir) {
        TemplateStore store;
        for (auto kind : {MethodKind::Vanilla, MethodKind::CotStructure,
                          MethodKind::Bidirectional, MethodKind::Transitivity,
                          MethodKind::Combined}) {
            std::ifstream in(dir + "/" + to_string(kind) + ".txt");
            if (!in)
                throw std::runtime_error(std::string("missing template asset: ") +
                                         to_string(kind));
            std::ostringstream ss;
            ss << in.rdbuf();
            store.templates_[kind] = ss.str();
        }
        return store;
    }

    const std::string& get(MethodKind kind) const { return templates_.at(kind); }

private:
    TemplateStore() = default;
    explicit TemplateStore(std::map<MethodKind, std::string> t)
        : templates_(std::move(t)) {}
    std::map<MethodKind, std::string> templates_;
};

namespace detail {

inline std::string pair_phrase(const std::pair<char, char>& p) {
    return std::string("between Object ") + p.first + " and " + p.second;
}

inline std::string order_phrase(RelationOrder o) {
    switch (o) {
        case RelationOrder::AB: return "between Object A and B";
        case RelationOrder::BA: return "between Object B and A";
        case RelationOrder::AB_BA:
            return "between Object A and B and between Object B and A";
        case RelationOrder::BA_AB:
            return "between Object B and A and between Object A and B";
    }
    return {};
}

inline std::string selector_phrase(ReferenceStrategy s) {
    switch (s) {
        case ReferenceStrategy::Random: return "an";
        case ReferenceStrategy::Largest: return "the largest";
        case ReferenceStrategy::Smallest: return "the smallest";
        case ReferenceStrategy::MostTop: return "the most top";
        case ReferenceStrategy::Central: return "the central";
        case ReferenceStrategy::MostObvious: return "the most obvious";
    }
    return {};
}

inline const char* axis_title(Axis a) {
    switch (a) {
        case Axis::Horizontal: return "Horizontal";
        case Axis::Vertical: return "Vertical";
        default: return "Depth";
    }
}

inline std::string relation_line(const StatementSlot& slot) {
    std::string line = std::string(axis_title(slot.axis)) +
                       " relation between Object " + slot.subject + " and " +
                       slot.object + ": ";
    line += slot.subject;
    line += " is <relation> ";
    line += slot.object;
    return line;
}

inline void replace_all(std::string& s, const std::string& from,
                        const std::string& to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
}

inline std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : s) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) lines.push_back(cur);
    return lines;
}

}  // namespace detail

// Renders the prompt for a method spec. The rendering is pure: the same
// spec and question always produce byte-identical text.
inline PromptText build_prompt(const MethodSpec& spec, const std::string& question,
                               const TemplateStore& store = TemplateStore::builtin()) {
    spec.validate();
    std::string text = store.get(spec.kind);

    if (spec.uses_order())
        detail::replace_all(text, "{pairs}", detail::order_phrase(*spec.order));
    if (spec.uses_reference()) {
        detail::replace_all(text, "{selector}",
                            detail::selector_phrase(*spec.reference));
        detail::replace_all(text, "{ref_pairs}",
                            "between Object A and C and between Object B and C");
    }
    detail::replace_all(text, "{cot}", spec.cot ? "think step by step to " : "");

    if (text.find("{relation_lines}") != std::string::npos) {
        std::string lines;
        bool first = true;
        if (spec.structure) {
            for (const auto& slot : expected_statement_slots(spec)) {
                if (!first) lines += "\n";
                lines += detail::relation_line(slot);
                first = false;
            }
        }
        detail::replace_all(text, "{relation_lines}", lines);
    }

    if (!spec.structure && spec.kind != MethodKind::Vanilla) {
        // Ablation: drop the output-format block and convey the structured
        // requirements as descriptive instruction steps instead.
        auto lines = detail::split_lines(text);
        std::vector<std::string> kept;
        bool in_format = false;
        for (const auto& line : lines) {
            if (line == "## Please output in the following format ##") {
                in_format = true;
                continue;
            }
            if (in_format) {
                if (line == "## Question ##") in_format = false;
                else continue;
            }
            kept.push_back(line);
        }
        // Re-extract numbered steps, insert the descriptive ones, renumber.
        std::vector<std::string> steps;
        std::size_t first_step = kept.size(), after_steps = kept.size();
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const auto& l = kept[i];
            if (l.size() > 2 && std::isdigit(static_cast<unsigned char>(l[0])) &&
                l[1] == '.' && l[2] == ' ') {
                if (steps.empty()) first_step = i;
                steps.push_back(l.substr(3));
                after_steps = i + 1;
            }
        }
        std::size_t last_describe = 0;
        for (std::size_t i = 0; i < steps.size(); ++i)
            if (steps[i].find("escribe the relative position") != std::string::npos)
                last_describe = i;
        steps.insert(steps.begin() + last_describe + 1,
                     "When describing relative positions, analyze the horizontal "
                     "relation, the vertical relation, and the depth relation "
                     "between the objects.");
        steps.push_back(
            "Write the final answer on its own line in the form 'Answer: yes' "
            "or 'Answer: no'.");

        std::vector<std::string> rebuilt(kept.begin(), kept.begin() + first_step);
        for (std::size_t i = 0; i < steps.size(); ++i)
            rebuilt.push_back(std::to_string(i + 1) + ". " + steps[i]);
        rebuilt.insert(rebuilt.end(), kept.begin() + after_steps, kept.end());
        text.clear();
        for (const auto& l : rebuilt) text += l + "\n";
    }

    detail::replace_all(text, "{question}", question);

    PromptText out;
    out.text = std::move(text);
    out.spec = spec;
    out.question = question;
    if (spec.structure) {
        out.expected_sections = {"Question:", "Object A:", "Object B:"};
        if (spec.uses_reference()) out.expected_sections.push_back("Object C:");
        if (spec.kind != MethodKind::CotStructure)
            for (const auto& slot : expected_statement_slots(spec)) {
                std::string prefix = std::string(detail::axis_title(slot.axis)) +
                                     " relation between Object " + slot.subject +
                                     " and " + slot.object + ":";
                out.expected_sections.push_back(prefix);
            }
        out.expected_sections.push_back("Thinking process:");
        out.expected_sections.push_back("Answer:");
    } else if (spec.kind != MethodKind::Vanilla) {
        out.expected_sections = {"Answer:"};
    }
    return out;
}

// The main study configurations: both baselines, the three
// main constraint methods, the extra order variants, the extra reference
// strategies, and the CoT / structure off-variants.
inline std::vector<MethodSpec> enumerate_method_matrix() {
    std::vector<MethodSpec> specs;
    specs.push_back(MethodSpec::vanilla());
    specs.push_back(MethodSpec::cot_structure());
    specs.push_back(MethodSpec::bidirectional());
    specs.push_back(MethodSpec::transitivity());
    specs.push_back(MethodSpec::combined());
    for (auto o : {RelationOrder::AB, RelationOrder::BA, RelationOrder::AB_BA}) {
        specs.push_back(MethodSpec::bidirectional(o));
        specs.push_back(MethodSpec::combined(o));
    }
    for (auto r : {ReferenceStrategy::Largest, ReferenceStrategy::Smallest,
                   ReferenceStrategy::MostTop, ReferenceStrategy::Central,
                   ReferenceStrategy::MostObvious}) {
        specs.push_back(MethodSpec::transitivity(r));
        specs.push_back(MethodSpec::combined(RelationOrder::BA_AB, r));
    }
    for (auto kind : {MethodKind::Bidirectional, MethodKind::Transitivity,
                      MethodKind::Combined}) {
        MethodSpec no_cot =
            kind == MethodKind::Bidirectional ? MethodSpec::bidirectional()
            : kind == MethodKind::Transitivity ? MethodSpec::transitivity()
                                               : MethodSpec::combined();
        MethodSpec no_structure = no_cot;
        no_cot.cot = false;
        no_structure.structure = false;
        specs.push_back(no_cot);
        specs.push_back(no_structure);
    }
    return specs;
}

// The five rows of the main results table.
inline std::vector<MethodSpec> main_experiment_specs() {
    return {MethodSpec::vanilla(), MethodSpec::cot_structure(),
            MethodSpec::bidirectional(), MethodSpec::transitivity(),
            MethodSpec::combined()};
}

}  // namespace srel
