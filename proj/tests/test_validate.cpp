#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "srel/parse.hpp"
#include "srel/validate.hpp"

using namespace srel;

namespace {

Statement stmt(char subj, char obj, Axis axis, AxisRelation rel) {
    Statement s;
    s.subject = std::string(1, subj);
    s.object = std::string(1, obj);
    s.axis = axis;
    s.relation = rel;
    return s;
}

VqaItem query_item(Axis axis = Axis::Horizontal,
                   AxisRelation rel = AxisRelation::Precedes) {
    VqaItem it;
    it.id = "q";
    it.image_ref = "img";
    it.object_a = "a cat";
    it.object_b = "the dog";
    it.queried_axis = axis;
    it.queried_relation = rel;
    it.relation_phrase = "to the left of";
    it.gold = Gold::Yes;
    return it;
}

}  // namespace

TEST_CASE("bidirectional agreement per axis") {
    ParsedResponse p;
    p.statements = {
        stmt('B', 'A', Axis::Horizontal, AxisRelation::Follows),
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'A', Axis::Vertical, AxisRelation::Same),
        stmt('A', 'B', Axis::Vertical, AxisRelation::Same),
    };
    const auto check = check_bidirectional(p);
    CHECK(check.overall);
    CHECK(check.per_axis.at(Axis::Horizontal));
    CHECK(check.per_axis.at(Axis::Vertical));
    CHECK(!check.per_axis.contains(Axis::Depth));  // only one direction absent

    // contradiction on one axis fails the whole check
    p.statements.push_back(stmt('B', 'A', Axis::Depth, AxisRelation::Precedes));
    p.statements.push_back(stmt('A', 'B', Axis::Depth, AxisRelation::Precedes));
    const auto check2 = check_bidirectional(p);
    CHECK(!check2.overall);
    CHECK(!check2.per_axis.at(Axis::Depth));
    CHECK(check2.per_axis.at(Axis::Horizontal));

    ParsedResponse one_way;
    one_way.statements = {stmt('A', 'B', Axis::Horizontal, AxisRelation::Same)};
    CHECK_THROWS_AS(check_bidirectional(one_way), MissingDirection);
}

TEST_CASE("later restatements override earlier ones") {
    ParsedResponse p;
    p.statements = {
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'A', Axis::Horizontal, AxisRelation::Follows),
        // the model changes its mind
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Follows),
    };
    CHECK(!check_bidirectional(p).overall);
    CHECK(*detail::last_ab_relation(p, Axis::Horizontal) ==
          AxisRelation::Follows);
}

TEST_CASE("transitivity status covers all four outcomes") {
    // A left of C, B right of C, reported A right of B: contradiction
    ParsedResponse p;
    p.statements = {
        stmt('A', 'C', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'C', Axis::Horizontal, AxisRelation::Follows),
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Follows),
    };
    CHECK(check_transitivity(p, Axis::Horizontal) ==
          TransitivityStatus::Violated);

    // same legs, conclusion matches the single entailed relation
    p.statements[2] = stmt('A', 'B', Axis::Horizontal, AxisRelation::Precedes);
    CHECK(check_transitivity(p, Axis::Horizontal) ==
          TransitivityStatus::Entailed);

    // both left of C: any conclusion is consistent but not entailed
    p.statements[1] = stmt('B', 'C', Axis::Horizontal, AxisRelation::Precedes);
    CHECK(check_transitivity(p, Axis::Horizontal) ==
          TransitivityStatus::ConsistentNotEntailed);

    // no explicit conclusion and no answer: nothing to judge
    ParsedResponse legs_only;
    legs_only.statements = {
        stmt('A', 'C', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'C', Axis::Horizontal, AxisRelation::Precedes),
    };
    CHECK(check_transitivity(legs_only, Axis::Horizontal) ==
          TransitivityStatus::NotApplicable);
    // ... but with an answer the model asserted more than it derived
    legs_only.answer = Gold::Yes;
    CHECK(check_transitivity(legs_only, Axis::Horizontal) ==
          TransitivityStatus::ConsistentNotEntailed);
    // entailment needs no explicit conclusion when the legs pin it down
    legs_only.statements[1] =
        stmt('B', 'C', Axis::Horizontal, AxisRelation::Follows);
    CHECK(check_transitivity(legs_only, Axis::Horizontal) ==
          TransitivityStatus::Entailed);

    ParsedResponse missing;
    missing.statements = {
        stmt('A', 'C', Axis::Horizontal, AxisRelation::Precedes)};
    CHECK_THROWS_AS(check_transitivity(missing, Axis::Horizontal),
                    MissingReference);
    CHECK_THROWS_AS(check_transitivity(p, Axis::Vertical), MissingReference);

    // a B->A conclusion counts via its converse
    ParsedResponse conversed;
    conversed.statements = {
        stmt('A', 'C', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'C', Axis::Horizontal, AxisRelation::Follows),
        stmt('B', 'A', Axis::Horizontal, AxisRelation::Follows),
    };
    CHECK(check_transitivity(conversed, Axis::Horizontal) ==
          TransitivityStatus::Entailed);
}

TEST_CASE("adjudication policies") {
    const VqaItem item = query_item();

    ParsedResponse p;
    p.answer = Gold::Yes;
    p.statements = {
        stmt('A', 'C', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'C', Axis::Horizontal, AxisRelation::Follows),
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Follows),
    };
    // the model says yes, its last A/B statement says no, the reference
    // legs entail yes
    CHECK(adjudicate(p, item, AdjudicationPolicy::TrustModel) ==
          Adjudication::Yes);
    CHECK(adjudicate(p, item, AdjudicationPolicy::DeriveLastAb) ==
          Adjudication::No);
    CHECK(adjudicate(p, item, AdjudicationPolicy::DeriveTransitive) ==
          Adjudication::Yes);
    CHECK(adjudicate(p, item, AdjudicationPolicy::Majority) ==
          Adjudication::Yes);

    // non-singleton legs: the transitive policy falls back to the last A/B
    p.statements[1] = stmt('B', 'C', Axis::Horizontal, AxisRelation::Precedes);
    CHECK(adjudicate(p, item, AdjudicationPolicy::DeriveTransitive) ==
          Adjudication::No);

    ParsedResponse empty;
    CHECK(adjudicate(empty, item, AdjudicationPolicy::TrustModel) ==
          Adjudication::Indeterminate);
    CHECK(adjudicate(empty, item, AdjudicationPolicy::DeriveLastAb) ==
          Adjudication::Indeterminate);
    CHECK(adjudicate(empty, item, AdjudicationPolicy::Majority) ==
          Adjudication::Indeterminate);

    // B->A statements adjudicate through their converse
    ParsedResponse ba;
    ba.statements = {stmt('B', 'A', Axis::Horizontal, AxisRelation::Follows)};
    CHECK(adjudicate(ba, item, AdjudicationPolicy::DeriveLastAb) ==
          Adjudication::Yes);
}

TEST_CASE("validation report fills only what the method calls for") {
    const VqaItem item = query_item();

    // vanilla: no statements, nothing checkable
    ParsedResponse bare;
    bare.answer = Gold::Yes;
    const auto rep0 = validate_response(bare, MethodSpec::vanilla(), item);
    CHECK(!rep0.bidirectional_ok.has_value());
    CHECK(!rep0.transitivity.has_value());
    CHECK(!rep0.network.has_value());

    // bidirectional with both directions agreeing
    ParsedResponse bi;
    bi.answer = Gold::Yes;
    bi.statements = {
        stmt('B', 'A', Axis::Horizontal, AxisRelation::Follows),
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Precedes),
    };
    const auto rep1 = validate_response(bi, MethodSpec::bidirectional(), item);
    REQUIRE(rep1.bidirectional_ok.has_value());
    CHECK(*rep1.bidirectional_ok);
    CHECK(!rep1.transitivity.has_value());
    REQUIRE(rep1.answer_consistent.has_value());
    CHECK(*rep1.answer_consistent);
    REQUIRE(rep1.network.has_value());
    CHECK(rep1.network->consistent);

    // single-direction orders skip the bidirectional check
    MethodSpec ab = MethodSpec::bidirectional();
    ab.order = RelationOrder::AB;
    const auto rep2 = validate_response(bi, ab, item);
    CHECK(!rep2.bidirectional_ok.has_value());

    // combined: transitivity judged, inconsistent answer flagged
    ParsedResponse comb;
    comb.answer = Gold::No;
    comb.statements = {
        stmt('A', 'C', Axis::Horizontal, AxisRelation::Precedes),
        stmt('B', 'C', Axis::Horizontal, AxisRelation::Follows),
        stmt('B', 'A', Axis::Horizontal, AxisRelation::Follows),
        stmt('A', 'B', Axis::Horizontal, AxisRelation::Precedes),
    };
    const auto rep3 = validate_response(comb, MethodSpec::combined(), item);
    REQUIRE(rep3.transitivity.has_value());
    CHECK(*rep3.transitivity == TransitivityStatus::Entailed);
    REQUIRE(rep3.answer_consistent.has_value());
    CHECK(!*rep3.answer_consistent);  // statements entail yes, model said no

    // missing reference legs leave transitivity unset instead of throwing
    const auto rep4 = validate_response(bi, MethodSpec::combined(), item);
    CHECK(!rep4.transitivity.has_value());

    // an internally contradictory network is caught
    ParsedResponse contra;
    contra.answer = Gold::Yes;
    contra.statements = {
        stmt('A', 'B', Axis::Vertical, AxisRelation::Precedes),
        stmt('A', 'B', Axis::Vertical, AxisRelation::Follows),
    };
    const auto rep5 = validate_response(contra, ab, item);
    REQUIRE(rep5.network.has_value());
    CHECK(!rep5.network->consistent);
}
