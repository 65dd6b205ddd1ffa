#include "kkfilt/tower.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <atomic>
#include <thread>

using namespace kkf;

namespace {

GroupExpr gx(const std::string& s) { return parse_group_expr(s); }

IntMatrix m1(long v) { return IntMatrix::from_rows({{v}}); }

}  // namespace

TEST_CASE("catalog towers produce the announced stages and maps") {
    DirectTower st = tower_stable(FgGroup(1, {4}));
    CHECK(st.stage(5).str() == "Z + Z/4");
    CHECK(st.map(2).m.is_identity());
    CHECK(st.stable_from() == 1);

    DirectTower pr = tower_prufer(2);
    CHECK(pr.stage(3) == FgGroup::cyclic(8));
    CHECK(is_injective(pr.map(2)));
    CHECK(image_subgroup(pr.map(2)) == Subgroup::multiples(FgGroup::cyclic(8), 2));

    DirectTower el = tower_elementary(3, 2);
    CHECK(el.stage(2).str() == "Z/9 + Z/9");
    CHECK(is_injective(el.map(1)));

    CHECK(tower_free(2).stage(3) == FgGroup::free(6));

    DirectTower af = tower_affine(2, 1, 0);
    CHECK(af.stage(3).str() == "Z/2 + Z/4 + Z/8");
    CHECK(is_injective(af.map(3)));

    DirectTower ex = tower_explicit({FgGroup::cyclic(2), FgGroup::cyclic(4)},
                                    {FgHom(FgGroup::cyclic(2), FgGroup::cyclic(4), m1(2))});
    CHECK(ex.stage(1) == FgGroup::cyclic(2));
    CHECK(ex.stage(2) == FgGroup::cyclic(4));
    CHECK(ex.stage(7) == FgGroup::cyclic(4));  // constant tail
    CHECK(ex.map(4).m.is_identity());
    CHECK(ex.stable_from() == 2);

    CHECK(st.shift_invariant());
    CHECK(pr.shift_invariant());
    CHECK(af.shift_invariant());
}

TEST_CASE("tower constructors validate their inputs") {
    CHECK_THROWS_AS(tower_prufer(4), std::invalid_argument);
    CHECK_THROWS_AS(tower_elementary(2, 0), std::invalid_argument);
    CHECK_THROWS_AS(tower_affine(2, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(tower_free(0), std::invalid_argument);
    // non-injective structure map
    CHECK_THROWS_AS(tower_explicit({FgGroup::cyclic(4), FgGroup::cyclic(2)},
                                   {FgHom(FgGroup::cyclic(4), FgGroup::cyclic(2), m1(1))}),
                    std::invalid_argument);
    DirectTower bad_endpoints = tower_custom(
        "bad", [](int) { return FgGroup::cyclic(2); },
        [](int) { return FgHom::identity(FgGroup::cyclic(4)); }, true);
    CHECK_THROWS_AS(bad_endpoints.map(1), std::invalid_argument);
    DirectTower not_injective = tower_custom(
        "zero-maps", [](int) { return FgGroup::cyclic(2); },
        [](int) { return FgHom::zero(FgGroup::cyclic(2), FgGroup::cyclic(2)); }, true);
    CHECK_THROWS_AS(not_injective.map(1), std::invalid_argument);
    CHECK_THROWS_AS(tower_prufer(2).stage(0), std::invalid_argument);
}

TEST_CASE("colimits of the catalog towers") {
    CHECK(colimit_group(tower_stable(FgGroup(1, {4}))).value.str() == "Sum(Z,Z/4)");
    CHECK(colimit_group(tower_prufer(3)).value.str() == "Prufer(3)");
    CHECK(colimit_group(tower_elementary(2, 3)).value.str() == "InfSum(2; 3)");
    CHECK(colimit_group(tower_free(2)).value.str() == "InfSum(Z)");
    CHECK(colimit_group(tower_affine(2, 1, 0)).value.str() == "InfSum(2; n)");
    CHECK(colimit_group(tower_affine(3, 2, 1)).value.str() == "InfSum(3; 2*n+1)");
    DirectTower ex = tower_explicit({FgGroup::cyclic(2), FgGroup::cyclic(4)},
                                    {FgHom(FgGroup::cyclic(2), FgGroup::cyclic(4), m1(2))});
    CHECK(colimit_group(ex).value.str() == "Z/4");
    ColimitResult unknown = colimit_group(tower_custom(
        "opaque", [](int i) { return FgGroup::free(i); },
        [](int i) {
            IntMatrix m(i + 1, i);
            for (int j = 0; j < i; ++j) m.at(j, j) = 1;
            return FgHom(FgGroup::free(i), FgGroup::free(i + 1), m);
        }));
    CHECK_FALSE(unknown.known);
    CHECK(unknown.note.find("not recognized") != std::string::npos);
}

TEST_CASE("finite-support truncations and their inclusions") {
    CHECK(truncate_expr(gx("InfSum(2; n)"), 3)->str() == "Z/2 + Z/4 + Z/8");
    CHECK(*truncate_expr(gx("Prufer(3)"), 2) == FgGroup::cyclic(9));
    // note Sum(Z,InfSum(Z)) canonicalizes to InfSum(Z): rank is absorbed
    CHECK(*truncate_expr(gx("Sum(Z,InfSum(Z))"), 2) == FgGroup::free(2));
    CHECK((*truncate_expr(gx("Sum(Z/2,InfSum(Z))"), 3) == FgGroup(3, {2})));
    CHECK(*truncate_expr(gx("Z/6"), 5) == FgGroup::cyclic(6));
    CHECK_FALSE(truncate_expr(gx("InfProduct(Z/2)"), 3).has_value());
    CHECK_FALSE(truncate_expr(gx("Padic(2; Z)"), 3).has_value());

    // finitely generated expressions truncate to themselves
    FgHom id_inc = truncation_inclusion(gx("Z/6"), 2, 4);
    CHECK(is_injective(id_inc));
    CHECK(is_surjective(id_inc));

    // the level-1 quasicyclic stage lands on the p^(l2-l1) multiples
    FgHom pr_inc = truncation_inclusion(gx("Prufer(2)"), 1, 3);
    CHECK(is_injective(pr_inc));
    CHECK(image_subgroup(pr_inc) == Subgroup::multiples(FgGroup::cyclic(8), 4));

    FgHom sum_inc = truncation_inclusion(gx("InfSum(2; n)"), 1, 2);
    CHECK(is_injective(sum_inc));
    CHECK(image_subgroup(sum_inc).order() == 2);

    GroupExpr mixed = gx("Sum(Z/2,InfSum(2; n),InfSum(Z),Prufer(3))");
    FgHom i12 = truncation_inclusion(mixed, 1, 2);
    FgHom i23 = truncation_inclusion(mixed, 2, 3);
    FgHom i13 = truncation_inclusion(mixed, 1, 3);
    CHECK(i23.compose(i12).m == i13.m);
    for (int l = 1; l <= 4; ++l)
        CHECK(is_injective(truncation_inclusion(mixed, l, l + 2)));
    CHECK_THROWS_AS(truncation_inclusion(gx("Padic(2; Z)"), 1, 2), std::invalid_argument);
    CHECK_THROWS_AS(truncation_inclusion(gx("Z"), 3, 2), std::invalid_argument);
}

TEST_CASE("quotient towers: stages, reduction maps, completion limit") {
    InverseTower q = quotient_tower(gx("Sum(Z,Z/12)"), 2);
    CHECK(q.stage_expr(1).str() == "Sum(Z/2,Z/2)");
    CHECK(q.stage_expr(2).str() == "Sum(Z/4,Z/4)");
    CHECK(q.stage_expr(3).str() == "Sum(Z/4,Z/8)");
    CHECK(q.model_stage(1, 5) == FgGroup(0, {2, 2}));
    CHECK(q.model_stage(1, 5) == *q.stage_expr(1).as_fg());

    FgHom red = q.model_map(1, 5);
    CHECK(is_surjective(red));
    CHECK(kernel_subgroup(red).order() == 4);

    LimResult lim = lim_group(q, kDefaultWindow);
    REQUIRE(lim.known);
    CHECK(lim.value.str() == "Sum(Z/4,Padic(2; Z))");
    CHECK(lim.certificate.kind == Certificate::Kind::RuleBacked);
    CHECK(lim.certificate.shift == "quotient-completion");
    CHECK(verify_certificate(q, lim.certificate));

    InverseTower qs = quotient_tower(gx("InfSum(2; n)"), 2);
    LimResult lim2 = lim_group(qs, kDefaultWindow);
    REQUIRE(lim2.known);
    CHECK(lim2.value.str() == "Padic(2; InfSum(2; n))");

    CHECK_THROWS_AS(quotient_tower(gx("Z"), 6), std::invalid_argument);
}

TEST_CASE("hom towers restrict along the structure maps") {
    // target Z/4: restriction along multiplication by two on a cyclic source
    InverseTower t = apply_hom(tower_prufer(2), gx("Z/4"));
    CHECK_FALSE(t.truncated());
    CHECK(t.model_stage(1, 3) == FgGroup::cyclic(2));
    CHECK(t.model_stage(2, 3) == FgGroup::cyclic(4));
    CHECK(t.model_stage(5, 3) == FgGroup::cyclic(4));
    CHECK(is_surjective(t.model_map(1, 3)));
    FgHom deep = t.model_map(2, 3);
    CHECK(image_subgroup(deep).order() == 2);
    CHECK(kernel_subgroup(deep).order() == 2);
    CHECK(t.stage_expr(2).str() == "Z/4");

    InverseTower ext = apply_ext(tower_elementary(2, 1), gx("Z"));
    CHECK(ext.model_stage(3, 1) == FgGroup(0, {2, 2, 2}));
    CHECK(is_surjective(ext.model_map(3, 1)));
    CHECK(ext.stage_expr(2).str() == "Sum(Z/2,Z/2)");

    CHECK_THROWS_AS(apply_hom(tower_free(1), gx("InfProduct(Z/2)")).model_stage(1, 4),
                    std::invalid_argument);
}

TEST_CASE("image chains agree with element enumeration on small models") {
    InverseTower t = apply_hom(tower_prufer(2), gx("InfSum(2; n)"));
    auto chain = image_chain(t, 1, 4, 8);
    REQUIRE(chain.size() == 5);

    FgGroup model = t.model_stage(1, 8);
    REQUIRE(model == FgGroup(0, std::vector<Integer>(8, 2)));

    // second route: walk all 256 elements and count the members of each image
    for (int k = 0; k <= 4; ++k) {
        long members = 0;
        for (int bits = 0; bits < 256; ++bits) {
            std::vector<Integer> v(8);
            for (int j = 0; j < 8; ++j) v[j] = (bits >> j) & 1;
            if (chain[k].contains(v)) ++members;
        }
        Integer expected = Integer(1) << (8 - k);
        CHECK(chain[k].order() == expected);
        CHECK(Integer(members) == expected);
    }
    for (size_t k = 0; k + 1 < chain.size(); ++k) CHECK(chain[k].contains(chain[k + 1]));
}

TEST_CASE("window scans classify stabilization patterns") {
    Certificate constant =
        ml_status(apply_hom(tower_stable(FgGroup::cyclic(8)), gx("Z/2")), kDefaultWindow);
    CHECK(constant.kind == Certificate::Kind::MLStabilized);
    CHECK(constant.stage == 0);
    REQUIRE(constant.evidence.size() == 4);
    for (const auto& ev : constant.evidence) CHECK(ev.stabilized_at == 0);

    Certificate descent =
        ml_status(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), kDefaultWindow);
    CHECK(descent.kind == Certificate::Kind::SelfSimilarStrictDescent);
    for (const auto& ev : descent.evidence) CHECK(ev.stabilized_at == -1);

    // probes disagree: small stages die inside the window, deep ones do not
    InverseTower mixed = inverse_custom(
        "geometric", [](int i) { return FgGroup::cyclic(Integer(1) << (3 * i)); },
        [](int i) {
            return FgHom(FgGroup::cyclic(Integer(1) << (3 * i + 3)),
                         FgGroup::cyclic(Integer(1) << (3 * i)), m1(2));
        },
        true);
    Certificate mc = ml_status(mixed, kDefaultWindow);
    CHECK(mc.kind == Certificate::Kind::InconclusiveWindow);
    CHECK(mc.shift.find("mixed") != std::string::npos);

    // the same observations without a shift rule certify nothing
    InverseTower unshifted = inverse_custom(
        "constant", [](int) { return FgGroup::cyclic(2); },
        [](int) { return FgHom::identity(FgGroup::cyclic(2)); }, false);
    Certificate uc = ml_status(unshifted, kDefaultWindow);
    CHECK(uc.kind == Certificate::Kind::InconclusiveWindow);
    CHECK(uc.shift.find("no stage-shift rule") != std::string::npos);

    Certificate nomodel =
        ml_status(apply_hom(tower_free(1), gx("InfProduct(Z/2)")), kDefaultWindow);
    CHECK(nomodel.kind == Certificate::Kind::InconclusiveWindow);
    CHECK(nomodel.shift.find("no finite-support models") != std::string::npos);

    CHECK_THROWS_AS(ml_status(unshifted, 3), std::invalid_argument);
}

TEST_CASE("limit recognition: eventually constant systems") {
    InverseTower t = apply_hom(tower_stable(FgGroup::cyclic(4)), gx("Z/2"));
    LimResult lim = lim_group(t, kDefaultWindow);
    REQUIRE(lim.known);
    CHECK(lim.value.str() == "Z/2");
    CHECK(lim.certificate.kind == Certificate::Kind::RuleBacked);
    CHECK(lim.certificate.shift == "eventually-constant");
    CHECK(lim.certificate.stage == 1);
    CHECK(verify_certificate(t, lim.certificate));

    // constant towers with infinite stage values use the closed form
    GroupExpr h = gx("Sum(Z/4,InfSum(2; n))");
    InverseTower ts = apply_hom(tower_stable(FgGroup(1, {8})), h);
    LimResult lims = lim_group(ts, kDefaultWindow);
    REQUIRE(lims.known);
    CHECK(lims.value == hom_from_fg(FgGroup(1, {8}), h));

    InverseTower ex = inverse_explicit(
        {FgGroup::cyclic(2), FgGroup::cyclic(4), FgGroup::cyclic(4)},
        {FgHom(FgGroup::cyclic(4), FgGroup::cyclic(2), m1(1)),
         FgHom::identity(FgGroup::cyclic(4))});
    LimResult lime = lim_group(ex, kDefaultWindow);
    REQUIRE(lime.known);
    CHECK(lime.value.str() == "Z/4");
    CHECK(lime.certificate.stage == 3);
    CHECK(verify_certificate(ex, lime.certificate));
}

TEST_CASE("limit recognition: completions and homocyclic products") {
    InverseTower ep = apply_ext(tower_prufer(2), gx("Z"));
    LimResult limp = lim_group(ep, kDefaultWindow);
    REQUIRE(limp.known);
    CHECK(limp.value.str() == "Padic(2; Z)");
    CHECK(limp.certificate.shift == "quotient-completion");
    CHECK(verify_certificate(ep, limp.certificate));

    InverseTower e2 = apply_ext(tower_elementary(2, 1), gx("Z"));
    LimResult lim2 = lim_group(e2, kDefaultWindow);
    REQUIRE(lim2.known);
    CHECK(lim2.value.str() == "InfProduct(Z/2)");
    CHECK(lim2.certificate.shift == "surjective-homocyclic-product");
    CHECK(verify_certificate(e2, lim2.certificate));

    InverseTower e9 = apply_ext(tower_elementary(3, 2), gx("Z"));
    LimResult lim9 = lim_group(e9, kDefaultWindow);
    REQUIRE(lim9.known);
    CHECK(lim9.value.str() == "InfProduct(Z/9)");

    // mixed-exponent stages stay opaque: the product rule must not fire
    InverseTower ea = apply_ext(tower_affine(2, 1, 0), gx("Z"));
    LimResult lima = lim_group(ea, kDefaultWindow);
    CHECK_FALSE(lima.known);
    CHECK(lima.pro_note.find("pro-object") != std::string::npos);
}

TEST_CASE("limit recognition: vanishing by approximant death") {
    InverseTower t = apply_hom(tower_prufer(2), gx("InfSum(2; n)"));
    LimResult lim = lim_group(t, kDefaultWindow);
    REQUIRE(lim.known);
    CHECK(lim.value.is_trivial());
    CHECK(lim.certificate.shift == "zero-intersection");
    REQUIRE_FALSE(lim.certificate.evidence.empty());
    bool has_approx = false;
    for (const auto& ev : lim.certificate.evidence)
        if (ev.approx_level > 0) has_approx = true;
    CHECK(has_approx);
    CHECK(verify_certificate(t, lim.certificate));

    // projections of growing free stages never die: opaque pro-object
    InverseTower fr = apply_hom(tower_free(1), gx("Z"));
    LimResult limf = lim_group(fr, kDefaultWindow);
    CHECK_FALSE(limf.known);
    CHECK(limf.certificate.kind == Certificate::Kind::MLStabilized);
}

TEST_CASE("verdicts are stable when the window widens") {
    InverseTower a = apply_hom(tower_prufer(2), gx("InfSum(2; n)"));
    CHECK(ml_status(a, 12).kind == ml_status(a, 20).kind);
    LimResult l12 = lim_group(a, 12), l20 = lim_group(a, 20);
    CHECK(l12.known == l20.known);
    CHECK(l12.value == l20.value);

    InverseTower b = apply_ext(tower_elementary(2, 1), gx("Z"));
    CHECK(lim_group(b, 12).value == lim_group(b, 20).value);

    InverseTower c = quotient_tower(gx("Sum(Z,Z/12)"), 2);
    CHECK(lim_group(c, 12).value == lim_group(c, 20).value);

    PextResult p12 = pext(tower_prufer(2), gx("InfSum(2; n)"), 12);
    PextResult p20 = pext(tower_prufer(2), gx("InfSum(2; n)"), 20);
    CHECK(p12.verdict == p20.verdict);
}

TEST_CASE("derived limits: surjective systems vanish, strict descent does not") {
    Lim1Result zq = lim1(quotient_tower(gx("Z"), 2), kDefaultWindow);
    CHECK(zq.verdict == TowerVerdict::Zero);
    REQUIRE(zq.value_hint.has_value());
    CHECK(zq.value_hint->is_trivial());

    Lim1Result nz = lim1(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), kDefaultWindow);
    CHECK(nz.verdict == TowerVerdict::NonzeroCertified);
    CHECK(nz.certificate.kind == Certificate::Kind::SelfSimilarStrictDescent);

    CHECK(lim1(apply_hom(tower_free(1), gx("Z")), kDefaultWindow).verdict ==
          TowerVerdict::Zero);

    Lim1Result inc = lim1(apply_hom(tower_free(1), gx("InfProduct(Z/2)")), kDefaultWindow);
    CHECK(inc.verdict == TowerVerdict::Inconclusive);

    // stagewise surjectivity always forces a vanishing derived limit
    std::vector<InverseTower> surjective = {
        quotient_tower(gx("Z"), 3), quotient_tower(gx("Sum(Z,Z/12)"), 2),
        apply_ext(tower_elementary(2, 1), gx("Z")), apply_ext(tower_prufer(2), gx("Z"))};
    for (const auto& t : surjective) {
        bool all = true;
        for (int i = 1; i <= 8; ++i)
            all = all && is_surjective(t.model_map(i, kDefaultWindow + kTruncationMargin));
        REQUIRE(all);
        CHECK(lim1(t, kDefaultWindow).verdict == TowerVerdict::Zero);
    }
}

TEST_CASE("pure-extension verdicts combine window evidence with structure rules") {
    // colimit is a sum of cyclics: vanishing, confirmed by the window
    PextResult a = pext(tower_elementary(2, 1), gx("Z"), kDefaultWindow);
    CHECK(a.verdict == TowerVerdict::Zero);
    CHECK(a.rule_note == "window and rule agree: vanishing");

    PextResult b = pext(tower_stable(FgGroup::cyclic(12)), gx("Z/5"), kDefaultWindow);
    CHECK(b.verdict == TowerVerdict::Zero);

    // quasicyclic colimit against an unbounded reduced sum: certified nonzero
    PextResult c = pext(tower_prufer(2), gx("InfSum(2; n)"), kDefaultWindow);
    CHECK(c.verdict == TowerVerdict::NonzeroCertified);
    CHECK_FALSE(c.divisible_hint);
    CHECK(c.certificate.kind == Certificate::Kind::SelfSimilarStrictDescent);
    CHECK(verify_certificate(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), c.certificate));

    // rule fires where the window is blind (no models for a full product)
    PextResult d = pext(tower_free(1), gx("InfProduct(Z/2)"), kDefaultWindow);
    CHECK(d.verdict == TowerVerdict::Zero);
    CHECK(d.rule_note == "vanishing by rule; window alone was inconclusive");
    CHECK(d.certificate.kind == Certificate::Kind::RuleBacked);
    CHECK(d.certificate.shift.rfind("pext-rule:", 0) == 0);
    CHECK(verify_certificate(apply_hom(tower_free(1), gx("InfProduct(Z/2)")), d.certificate));

    // torsionfree target: vanishing window plus a divisibility hint
    PextResult e = pext(tower_prufer(2), gx("Z"), kDefaultWindow);
    CHECK(e.verdict == TowerVerdict::Zero);
    CHECK(e.divisible_hint);
    CHECK(e.rule_note == "torsionfree input: the value is divisible");

    CHECK(pext_rules(invariants(gx("InfSum(2; 1)")), invariants(gx("Z/8"))) ==
          PextRule::Zero);
    CHECK(pext_rules(invariants(gx("Prufer(2)")), invariants(gx("InfSum(2; n)"))) ==
          PextRule::NoVerdict);
    CHECK(pext_rules(invariants(gx("Prufer(2)")), invariants(gx("Z"))) ==
          PextRule::Divisible);
}

TEST_CASE("multiples-closure of the Ext value cross-checks the pure part") {
    PextResult zero;
    zero.verdict = TowerVerdict::Zero;
    PextResult zero_div = zero;
    zero_div.divisible_hint = true;
    PextResult nonzero;
    nonzero.verdict = TowerVerdict::NonzeroCertified;

    ZadicReport a = zadic_closure_check(gx("Sum(Z/8,Prufer(2))"), nonzero);
    CHECK(a.closure.str() == "Prufer(2)");
    CHECK_FALSE(a.trivial);
    CHECK(a.consistent);

    ZadicReport b = zadic_closure_check(gx("Z/8"), zero);
    CHECK(b.trivial);
    CHECK(b.note == "intersection reached at n = 8");
    CHECK(b.consistent);

    ZadicReport c = zadic_closure_check(gx("InfProduct(Z/4)"), zero);
    CHECK(c.trivial);
    CHECK(c.note == "intersection reached at n = 4");

    ZadicReport d = zadic_closure_check(gx("InfSum(2; n)"), zero);
    CHECK(d.trivial);
    CHECK(d.note == "no divisible summands: intersection vanishes");

    ZadicReport e = zadic_closure_check(gx("Prufer(3)"), zero_div);
    CHECK_FALSE(e.trivial);
    CHECK(e.consistent);

    CHECK_THROWS_AS(zadic_closure_check(gx("Prufer(3)"), zero), internal_error);
    CHECK_THROWS_AS(zadic_closure_check(gx("Z/4"), nonzero), internal_error);
}

TEST_CASE("restriction kernels along the tower") {
    auto all_trivial = [](const std::vector<KernelDescriptor>& ks, TriBool want) {
        for (const auto& k : ks)
            if (k.trivial != want) return false;
        return true;
    };

    auto stable = jensen_kernel_profile(tower_stable(FgGroup::cyclic(4)), gx("Z/2"), 4);
    REQUIRE(stable.size() == 4);
    CHECK(all_trivial(stable, TriBool::Yes));

    // stabilized tower, infinite target: still isomorphisms stage by stage
    auto stable_inf =
        jensen_kernel_profile(tower_stable(FgGroup::cyclic(4)), gx("InfSum(2; n)"), 4);
    CHECK(all_trivial(stable_inf, TriBool::Yes));

    DirectTower ex = tower_explicit({FgGroup::cyclic(2), FgGroup::cyclic(4)},
                                    {FgHom(FgGroup::cyclic(2), FgGroup::cyclic(4), m1(2))});
    auto expl = jensen_kernel_profile(ex, gx("Z"), 4);
    REQUIRE(expl.size() == 4);
    CHECK(expl[0].trivial == TriBool::No);
    CHECK(expl[0].note == "kernel of the stage-1 restriction has order 2");
    CHECK(expl[1].trivial == TriBool::Yes);
    CHECK(expl[3].trivial == TriBool::Yes);

    // growing surjective system: every stage restriction has a kernel
    auto grow = jensen_kernel_profile(tower_elementary(2, 1), gx("Z"), 6);
    REQUIRE(grow.size() == 6);
    CHECK(all_trivial(grow, TriBool::No));
    for (const auto& k : grow) CHECK(k.note.find("InfProduct(Z/2) tail") != std::string::npos);

    auto trunc = jensen_kernel_profile(tower_prufer(2), gx("InfSum(2; n)"), 4);
    CHECK(all_trivial(trunc, TriBool::Unknown));
    CHECK(trunc[0].note == "stage values exceed finite-support models");

    auto prz = jensen_kernel_profile(tower_prufer(2), gx("Z"), 5);
    CHECK(all_trivial(prz, TriBool::No));
}

TEST_CASE("certificates replay and tampering is detected") {
    InverseTower q = quotient_tower(gx("Z"), 2);
    Certificate mq = ml_status(q, kDefaultWindow);
    REQUIRE(mq.kind == Certificate::Kind::MLStabilized);
    CHECK(verify_certificate(q, mq));

    Certificate bad_orders = mq;
    bad_orders.evidence[0].orders[1] += 1;
    CHECK_FALSE(verify_certificate(q, bad_orders));

    Certificate bad_images = mq;
    bad_images.evidence[0].images[0] = "[[7]]";
    CHECK_FALSE(verify_certificate(q, bad_images));

    Certificate bad_kind = mq;
    bad_kind.kind = Certificate::Kind::SelfSimilarStrictDescent;
    CHECK_FALSE(verify_certificate(q, bad_kind));

    // certificates are bound to their tower
    InverseTower other = apply_hom(tower_prufer(2), gx("InfSum(2; n)"));
    CHECK_FALSE(verify_certificate(other, mq));
    Certificate mo = ml_status(other, kDefaultWindow);
    CHECK(verify_certificate(other, mo));
    CHECK_FALSE(verify_certificate(q, mo));

    // rule-backed limits: forged rule names and stages fail the replay
    LimResult lime = lim_group(
        inverse_explicit({FgGroup::cyclic(2), FgGroup::cyclic(4), FgGroup::cyclic(4)},
                         {FgHom(FgGroup::cyclic(4), FgGroup::cyclic(2), m1(1)),
                          FgHom::identity(FgGroup::cyclic(4))}),
        kDefaultWindow);
    InverseTower exq = inverse_explicit(
        {FgGroup::cyclic(2), FgGroup::cyclic(4), FgGroup::cyclic(4)},
        {FgHom(FgGroup::cyclic(4), FgGroup::cyclic(2), m1(1)),
         FgHom::identity(FgGroup::cyclic(4))});
    CHECK(verify_certificate(exq, lime.certificate));
    Certificate bad_stage = lime.certificate;
    bad_stage.stage = 1;  // the stage-1 map is not an isomorphism
    CHECK_FALSE(verify_certificate(exq, bad_stage));
    Certificate bad_rule = lime.certificate;
    bad_rule.shift = "surjective-homocyclic-product";
    CHECK_FALSE(verify_certificate(exq, bad_rule));
    Certificate unknown_rule = lime.certificate;
    unknown_rule.shift = "unheard-of rule";
    CHECK_FALSE(verify_certificate(exq, unknown_rule));

    // a completion claim must come from a quotient-shaped tower
    LimResult limp = lim_group(apply_ext(tower_prufer(2), gx("Z")), kDefaultWindow);
    CHECK_FALSE(verify_certificate(apply_hom(tower_stable(FgGroup::cyclic(4)), gx("Z/2")),
                                   limp.certificate));

    LimResult limz = lim_group(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), 12);
    Certificate bad_death = limz.certificate;
    bad_death.evidence[0].orders.back() = 5;
    CHECK_FALSE(
        verify_certificate(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), bad_death));
    Certificate no_evidence = limz.certificate;
    no_evidence.evidence.clear();
    CHECK_FALSE(
        verify_certificate(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), no_evidence));

    // the structural rule certificate re-derives the profile facts
    PextResult d = pext(tower_free(1), gx("InfProduct(Z/2)"), kDefaultWindow);
    CHECK(verify_certificate(apply_hom(tower_free(1), gx("InfProduct(Z/2)")), d.certificate));
    // replay against a pair the rule cannot decide (divisible source over an
    // unbounded reduced sum, where the pure part is in fact nonzero)
    CHECK_FALSE(
        verify_certificate(apply_hom(tower_prufer(2), gx("InfSum(2; n)")), d.certificate));

    CHECK(mq.str().find("MLStabilized") == 0);
    CHECK(mo.str().find("SelfSimilarStrictDescent") == 0);
    CHECK(lime.certificate.str().find("RuleBacked(eventually-constant)") == 0);
}

TEST_CASE("shared towers are safe to probe concurrently") {
    InverseTower t = apply_hom(tower_prufer(2), gx("Z/8"));
    auto reference = image_chain(t, 2, 8);
    std::vector<Integer> ref_orders;
    for (const auto& s : reference) ref_orders.push_back(s.order());

    std::atomic<int> mismatches{0};
    auto worker = [&](int seed) {
        for (int rep = 0; rep < 3; ++rep) {
            auto chain = image_chain(t, 2, 8);
            if (chain.size() != reference.size()) {
                ++mismatches;
                continue;
            }
            for (size_t k = 0; k < chain.size(); ++k)
                if (chain[k].order() != ref_orders[k]) ++mismatches;
            FgGroup s = t.model_stage(1 + (seed + rep) % 4, 6);
            if (s.gens() < 0) ++mismatches;
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < 4; ++i) pool.emplace_back(worker, i);
    for (auto& th : pool) th.join();
    CHECK(mismatches.load() == 0);
}
