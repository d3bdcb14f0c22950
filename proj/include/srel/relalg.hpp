#pragma once

// Qualitative point algebra over three independent spatial axes.
// Relations are read subject-first: Precedes means the subject comes
// earlier along the axis (left / above / in front).

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace srel {

enum class AxisRelation : std::uint8_t { Precedes = 0, Same = 1, Follows = 2 };

enum class Axis : std::uint8_t { Horizontal = 0, Vertical = 1, Depth = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::Horizontal, Axis::Vertical,
                                              Axis::Depth};
inline constexpr std::array<AxisRelation, 3> kAllRelations{
    AxisRelation::Precedes, AxisRelation::Same, AxisRelation::Follows};

inline const char* to_string(Axis a) {
    switch (a) {
        case Axis::Horizontal: return "horizontal";
        case Axis::Vertical: return "vertical";
        case Axis::Depth: return "depth";
    }
    return "?";
}

inline const char* to_string(AxisRelation r) {
    switch (r) {
        case AxisRelation::Precedes: return "precedes";
        case AxisRelation::Same: return "same";
        case AxisRelation::Follows: return "follows";
    }
    return "?";
}

constexpr AxisRelation converse(AxisRelation r) {
    switch (r) {
        case AxisRelation::Precedes: return AxisRelation::Follows;
        case AxisRelation::Follows: return AxisRelation::Precedes;
        default: return AxisRelation::Same;
    }
}

// Non-empty subset of {Precedes, Same, Follows}; the full set means
// "indeterminate".
class RelationSet {
public:
    constexpr RelationSet() : bits_(0) {}
    constexpr RelationSet(AxisRelation r) : bits_(bit(r)) {}

    static constexpr RelationSet full() { return from_bits(0b111); }
    static constexpr RelationSet empty_set() { return from_bits(0); }

    constexpr bool contains(AxisRelation r) const { return bits_ & bit(r); }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr bool is_full() const { return bits_ == 0b111; }
    constexpr bool singleton() const {
        return bits_ == 0b001 || bits_ == 0b010 || bits_ == 0b100;
    }
    constexpr int size() const {
        return (bits_ & 1) + ((bits_ >> 1) & 1) + ((bits_ >> 2) & 1);
    }

    // Precondition: singleton().
    constexpr AxisRelation only() const {
        if (bits_ == 0b001) return AxisRelation::Precedes;
        if (bits_ == 0b010) return AxisRelation::Same;
        return AxisRelation::Follows;
    }

    constexpr RelationSet& insert(AxisRelation r) {
        bits_ |= bit(r);
        return *this;
    }
    constexpr RelationSet operator|(RelationSet o) const {
        return from_bits(bits_ | o.bits_);
    }
    constexpr RelationSet operator&(RelationSet o) const {
        return from_bits(bits_ & o.bits_);
    }
    constexpr bool operator==(const RelationSet&) const = default;

    constexpr RelationSet conversed() const {
        RelationSet out;
        for (auto r : kAllRelations)
            if (contains(r)) out.insert(converse(r));
        return out;
    }

    std::string to_string() const {
        std::string s = "{";
        for (auto r : kAllRelations) {
            if (!contains(r)) continue;
            if (s.size() > 1) s += ",";
            s += srel::to_string(r);
        }
        return s + "}";
    }

private:
    static constexpr std::uint8_t bit(AxisRelation r) {
        return static_cast<std::uint8_t>(1u << static_cast<int>(r));
    }
    static constexpr RelationSet from_bits(std::uint8_t b) {
        RelationSet s;
        s.bits_ = b;
        return s;
    }
    std::uint8_t bits_;
};

// Composition r1 (A->C) with r2 (C->B), yielding the possible A->B
// relations. Opposite strict relations compose to the full set.
constexpr RelationSet compose(AxisRelation r1, AxisRelation r2) {
    if (r1 == AxisRelation::Same) return RelationSet(r2);
    if (r2 == AxisRelation::Same) return RelationSet(r1);
    if (r1 == r2) return RelationSet(r1);
    return RelationSet::full();
}

constexpr RelationSet compose(RelationSet s1, RelationSet s2) {
    RelationSet out;
    for (auto r1 : kAllRelations) {
        if (!s1.contains(r1)) continue;
        for (auto r2 : kAllRelations) {
            if (!s2.contains(r2)) continue;
            out = out | compose(r1, r2);
        }
    }
    return out;
}

// A->C and B->C reference relations constrain A->B: compose with the
// converse of the B->C leg. A singleton result is an entailment.
constexpr RelationSet derive_ab(AxisRelation r_ac, AxisRelation r_bc) {
    return compose(r_ac, converse(r_bc));
}

struct RelationTriple {
    RelationSet horizontal;
    RelationSet vertical;
    RelationSet depth;

    RelationSet& axis(Axis a) {
        switch (a) {
            case Axis::Horizontal: return horizontal;
            case Axis::Vertical: return vertical;
            default: return depth;
        }
    }
    const RelationSet& axis(Axis a) const {
        return const_cast<RelationTriple*>(this)->axis(a);
    }
    bool operator==(const RelationTriple&) const = default;
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
    double axis(Axis a) const {
        switch (a) {
            case Axis::Horizontal: return x;
            case Axis::Vertical: return y;
            default: return z;
        }
    }
};

// Ground truth per axis: |delta| <= eps is Same, negative delta Precedes.
inline RelationTriple relations_from_coords(const Vec3& a, const Vec3& b,
                                            double eps = 0.0) {
    if (eps < 0) throw std::invalid_argument("relations_from_coords: eps < 0");
    RelationTriple t;
    for (auto ax : kAllAxes) {
        const double d = a.axis(ax) - b.axis(ax);
        AxisRelation r = AxisRelation::Same;
        if (d < -eps)
            r = AxisRelation::Precedes;
        else if (d > eps)
            r = AxisRelation::Follows;
        t.axis(ax) = RelationSet(r);
    }
    return t;
}

struct Statement {
    std::string subject;
    std::string object;
    Axis axis = Axis::Horizontal;
    AxisRelation relation = AxisRelation::Same;
    bool operator==(const Statement&) const = default;
};

struct InconsistencyWitness {
    std::string i, k, j;
    Axis axis = Axis::Horizontal;
};

struct PathConsistencyResult {
    bool consistent = true;
    std::optional<InconsistencyWitness> witness;
};

// Constraint network over labeled points; edge(i,j) is kept as the
// element-wise converse of edge(j,i).
class ConstraintNetwork {
public:
    using EdgeKey = std::tuple<std::string, std::string, Axis>;

    void add_node(const std::string& label) { nodes_.insert(label); }

    // Intersects with any existing edge; maintains the converse edge.
    void constrain(const std::string& i, const std::string& j, Axis axis,
                   RelationSet s) {
        if (i == j) throw std::invalid_argument("constrain: self edge");
        nodes_.insert(i);
        nodes_.insert(j);
        RelationSet fwd = get(i, j, axis) & s;
        edges_[{i, j, axis}] = fwd;
        edges_[{j, i, axis}] = fwd.conversed();
    }

    void add_statement(const Statement& st) {
        constrain(st.subject, st.object, st.axis, RelationSet(st.relation));
    }

    RelationSet get(const std::string& i, const std::string& j,
                    Axis axis) const {
        auto it = edges_.find({i, j, axis});
        return it == edges_.end() ? RelationSet::full() : it->second;
    }

    bool has_edge(const std::string& i, const std::string& j, Axis axis) const {
        return edges_.contains({i, j, axis});
    }

    const std::set<std::string>& nodes() const { return nodes_; }
    std::size_t edge_count() const { return edges_.size(); }

private:
    std::set<std::string> nodes_;
    std::map<EdgeKey, RelationSet> edges_;
};

// PC-1 fixpoint: tighten edge(i,j) by compose(edge(i,k), edge(k,j)) for
// every k until nothing changes. An empty edge is an inconsistency and
// the (i,k,j) that produced it is reported.
inline PathConsistencyResult path_consistent(const ConstraintNetwork& net) {
    std::vector<std::string> nodes(net.nodes().begin(), net.nodes().end());
    const std::size_t n = nodes.size();
    if (n < 3) {
        // An explicitly empty pairwise edge can still be inconsistent.
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (auto ax : kAllAxes)
                    if (i != j && net.get(nodes[i], nodes[j], ax).empty())
                        return {false,
                                InconsistencyWitness{nodes[i], nodes[i], nodes[j], ax}};
        return {true, std::nullopt};
    }

    for (auto axis : kAllAxes) {
        std::vector<std::vector<RelationSet>> e(
            n, std::vector<RelationSet>(n, RelationSet::full()));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) e[i][j] = net.get(nodes[i], nodes[j], axis);

        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t j = 0; j < n; ++j) {
                        if (i == j || i == k || j == k) continue;
                        RelationSet tightened =
                            e[i][j] & compose(e[i][k], e[k][j]);
                        if (tightened == e[i][j]) continue;
                        e[i][j] = tightened;
                        e[j][i] = tightened.conversed();
                        changed = true;
                        if (tightened.empty())
                            return {false, InconsistencyWitness{
                                               nodes[i], nodes[k], nodes[j], axis}};
                    }
        }
    }
    return {true, std::nullopt};
}

}  // namespace srel
