#include <catch2/catch_amalgamated.hpp>

#include "fam/fm_text.hpp"
#include "fam/oracle.hpp"
#include "fam/reasoner.hpp"

#include "support.hpp"

using namespace fam;
using fam::testing::config;

namespace {

Space fm(const std::string& text) { return Space{parse_fm(text)}; }

std::vector<Configuration> oracle(const Space& s) {
    auto all = enumerate(s, 1u << 20);
    return {all.begin(), all.end()};
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("no error raised");
    return ErrorKind::parse;
}

} // namespace

TEST_CASE("bdd arena is reduced and hash-consed", "[bdd]") {
    bdd::Manager m(3, 1000);
    auto x = m.var(0), y = m.var(1);
    CHECK(m.make(2, x, x) == x);
    CHECK(m.conj(x, y) == m.conj(y, x));
    CHECK(m.disj(m.conj(x, y), m.conj(x, m.negate(y))) == x);
    CHECK(m.negate(m.negate(y)) == y);
    CHECK(m.sat_count(bdd::true_node) == 8);
    CHECK(m.sat_count(bdd::false_node) == 0);
    CHECK(m.sat_count(x) == 4);
    CHECK(m.sat_count(m.conj(x, y)) == 2);
    CHECK(m.exists(m.conj(x, y), {false, true, false}) == x);
    CHECK(m.restrict(m.conj(x, y), 0, true) == y);
    CHECK(m.apply(bdd::Op::iff, x, x) == bdd::true_node);
    CHECK(m.apply(bdd::Op::implies, x, m.disj(x, y)) == bdd::true_node);
}

TEST_CASE("bdd node budget", "[bdd]") {
    bdd::Manager m(40, 16);
    bdd::NodeId acc = bdd::true_node;
    CHECK(kind_of([&] {
              for (unsigned v = 0; v < 40; ++v) acc = m.conj(acc, m.disj(m.var(v), m.var((v + 1) % 40)));
          }) == ErrorKind::capacity_exceeded);
}

TEST_CASE("build", "[reasoner]") {
    Settings s;
    auto single = build(fm("FM (A : ;)"), s);
    CHECK(single.root() == single.arena().var(0));
    auto contradiction = build(fm("FM (A : B ; !B ;)"), s);
    CHECK(contradiction.root() == bdd::false_node);

    Settings tiny;
    tiny.max_bdd_nodes = 4;
    CHECK(kind_of([&] { build(fm("FM (A : (B|C|D) [E] ; E -> C ;)"), tiny); }) ==
          ErrorKind::capacity_exceeded);
}

TEST_CASE("counting", "[reasoner]") {
    CHECK(counting(fm("FM (A : B [C] ;)")) == 2);
    CHECK(counting(fm("FM (A : B ; !B ;)")) == 0);
    CHECK(counting(fm(fam::testing::optional_chain(49))) == BigInt("562949953421312"));
    CHECK(counting(Space{FlatModel::make({"A", "B", "C"}, Formula::truth())}) == 8);
    CHECK(counting(Space{FlatModel::make({"A", "B", "C"}, Formula::falsity())}) == 0);
}

TEST_CASE("is_valid", "[reasoner]") {
    CHECK(is_valid(fm("FM (A : B [C] ;)")));
    CHECK_FALSE(is_valid(fm("FM (A : B ; !B ;)")));
    CHECK(is_valid(Space{FlatModel::make({"A"}, Formula::truth())}));
}

TEST_CASE("cores and deads", "[reasoner]") {
    CHECK(cores(fm("FM (A : B [C] ;)")) == std::vector<std::string>{"A", "B"});
    CHECK(deads(fm("FM (A : B [C] ;)")).empty());
    CHECK(deads(fm("FM (A : (B|C) ; !C ;)")) == std::vector<std::string>{"C"});
    CHECK(cores(fm("FM (A : (B|C) ; !C ;)")) == std::vector<std::string>{"A", "B"});
    CHECK(cores(fm("FM (A : ;)")) == std::vector<std::string>{"A"});
    CHECK(kind_of([] { cores(fm("FM (A : B ; !B ;)")); }) == ErrorKind::invalid_model);
}

TEST_CASE("propagate", "[reasoner]") {
    auto xor_model = fm("FM (A : (B|C) ;)");
    auto t = propagate(xor_model, user_decisions(alphabet(xor_model), {{"B", true}}));
    CHECK_FALSE(t.conflict);
    CHECK(*t.find("A") == FeatureStatus{"A", Status::selected, Origin::propagated});
    CHECK(*t.find("B") == FeatureStatus{"B", Status::selected, Origin::user});
    CHECK(*t.find("C") == FeatureStatus{"C", Status::deselected, Origin::propagated});

    auto opt = fm("FM (A : B [C] ;)");
    auto initial = propagate(opt, user_decisions(alphabet(opt), {}));
    CHECK(initial.find("A")->status == Status::selected);
    CHECK(initial.find("B")->status == Status::selected);
    CHECK(initial.find("B")->origin == Origin::propagated);
    CHECK(*initial.find("C") == FeatureStatus{"C", Status::undecided, Origin::initial});

    auto dead = fm("FM (A : B ; !B ;)");
    auto decisions = user_decisions(alphabet(dead), {{"B", true}});
    auto conflict = propagate(dead, decisions);
    CHECK(conflict.conflict);
    CHECK(conflict.features == decisions.features);

    CHECK(kind_of([&] { user_decisions(alphabet(opt), {{"Z", true}}); }) == ErrorKind::unknown_feature);
    TriState stray;
    stray.features.push_back({"Z", Status::selected, Origin::user});
    CHECK(kind_of([&] { propagate(opt, stray); }) == ErrorKind::unknown_feature);
}

TEST_CASE("slice", "[reasoner]") {
    auto a = slice(fm("FM (A : B [C] ;)"), SliceMode::including, {"A", "C"});
    CHECK(a.alphabet == std::vector<std::string>{"A", "C"});
    CHECK(oracle(Space{a}) == std::vector{config({"A"}), config({"A", "C"})});
    CHECK(counting(Space{a}) == 2);

    auto b = slice(fm("FM (A : (B|C) ;)"), SliceMode::including, {"A"});
    CHECK(counting(Space{b}) == 1);
    CHECK(oracle(Space{b}) == std::vector{config({"A"})});

    auto model = fm("FM (A : (B|C)+ [D] ; D -> B ;)");
    auto identity = slice(model, SliceMode::including, alphabet(model));
    CHECK(oracle(Space{identity}) == oracle(model));

    auto ex = slice(fm("FM (A : B [C] ;)"), SliceMode::excluding, {"B"});
    CHECK(ex.alphabet == std::vector<std::string>{"A", "C"});
    CHECK(counting(Space{ex}) == 2);

    CHECK(kind_of([&] { slice(model, SliceMode::including, {"Q"}); }) == ErrorKind::unknown_feature);
}

TEST_CASE("merge", "[reasoner]") {
    auto x = fm("FM (A : (B|C) ;)");
    auto o = fm("FM (A : (B|C)+ ;)");
    auto u = merge(MergeMode::sunion, {x, o});
    CHECK(oracle(Space{u}) == std::vector{config({"A", "B"}), config({"A", "B", "C"}), config({"A", "C"})});
    CHECK(counting(Space{u}) == 3);
    auto i = merge(MergeMode::sinter, {x, o});
    CHECK(oracle(Space{i}) == std::vector{config({"A", "B"}), config({"A", "C"})});
    CHECK(counting(Space{i}) == 2);
    CHECK(oracle(Space{merge(MergeMode::sinter, {o, o})}) == oracle(o));
    auto d = merge(MergeMode::sdiff, {o, x});
    CHECK(oracle(Space{d}) == std::vector{config({"A", "B", "C"})});

    // Differing alphabets: absent features are deselected.
    auto p = fm("FM (A : [B] ;)");
    auto q = fm("FM (A : [C] ;)");
    auto pq = merge(MergeMode::sunion, {p, q});
    CHECK(pq.alphabet == std::vector<std::string>{"A", "B", "C"});
    CHECK(oracle(Space{pq}) == std::vector{config({"A"}), config({"A", "B"}), config({"A", "C"})});

    CHECK(kind_of([&] { merge(MergeMode::sdiff, {x, o, p}); }) == ErrorKind::arity);
    CHECK(kind_of([&] { merge(MergeMode::sunion, {x}); }) == ErrorKind::arity);
}

TEST_CASE("configs", "[reasoner]") {
    CHECK(configs(fm("FM (A : B [C] ;)"), 10) == std::vector{config({"A", "B"}), config({"A", "B", "C"})});
    CHECK(configs(fm("FM (A : ;)"), 10) == std::vector{config({"A"})});
    try {
        configs(fm(fam::testing::optional_chain(49)), 4096);
        FAIL("expected LimitExceeded");
    } catch (const LimitExceeded& e) {
        CHECK(e.count() == BigInt("562949953421312"));
    }
}

TEST_CASE("reasoner agrees with the enumeration oracle", "[reasoner]") {
    fam::testing::ModelGenerator gen(2024);
    for (int i = 0; i < 60; ++i) {
        Space s{gen.next(10)};
        auto expected = oracle(s);
        Analysis an(s);
        REQUIRE(an.counting() == expected.size());
        CHECK(an.configurations({}, 1u << 12) == expected);
        if (expected.empty()) continue;
        for (const auto& name : alphabet(s)) {
            bool always = std::all_of(expected.begin(), expected.end(),
                                      [&](const Configuration& c) { return c.selected.count(name) == 1; });
            bool never = std::none_of(expected.begin(), expected.end(),
                                      [&](const Configuration& c) { return c.selected.count(name) == 1; });
            auto c = an.cores();
            auto d = an.deads();
            CHECK((std::find(c.begin(), c.end(), name) != c.end()) == always);
            CHECK((std::find(d.begin(), d.end(), name) != d.end()) == never);
        }
    }
}

TEST_CASE("hash-consing gives canonical roots", "[reasoner]") {
    // Same configuration set written two ways, compiled into one arena.
    Bdd b({"A", "B", "C"}, Settings{});
    auto r1 = compile_space(b, fm("FM (A : (B|C) ;)"));
    auto r2 = compile_space(b, Space{FlatModel::make({"A", "B", "C"}, parse_formula("A & (B <-> !C)"))});
    CHECK(r1 == r2);
}

TEST_CASE("merge bounds on random pairs", "[reasoner]") {
    fam::testing::ModelGenerator gen(77);
    for (int i = 0; i < 25; ++i) {
        Space a{gen.next(8)}, b{gen.next(8)};
        auto ca = counting(a), cb = counting(b);
        auto u = counting(Space{merge(MergeMode::sunion, {a, b})});
        auto n = counting(Space{merge(MergeMode::sinter, {a, b})});
        CHECK(u >= std::max(ca, cb));
        CHECK(n <= std::min(ca, cb));
    }
}

TEST_CASE("propagate is monotone", "[reasoner]") {
    fam::testing::ModelGenerator gen(31);
    for (int i = 0; i < 30; ++i) {
        Space s{gen.next(10)};
        Analysis an(s);
        if (!an.is_valid()) continue;
        std::vector<Decision> ds;
        TriState prev = an.propagate(user_decisions(an.alphabet(), ds));
        for (int step = 0; step < 3; ++step) {
            std::vector<std::string> open;
            for (const auto& f : prev.features)
                if (f.status == Status::undecided) open.push_back(f.name);
            if (open.empty()) break;
            ds.push_back({open[gen.pick(0, open.size() - 1)], gen.pick(0, 1) == 1});
            TriState next = an.propagate(user_decisions(an.alphabet(), ds));
            REQUIRE_FALSE(next.conflict);
            for (std::size_t k = 0; k < prev.features.size(); ++k)
                if (prev.features[k].status != Status::undecided)
                    CHECK(next.features[k].status == prev.features[k].status);
            prev = next;
        }
    }
}
