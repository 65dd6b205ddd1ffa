#include "kkfilt/tower.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>

namespace kkf {

namespace {

bool is_prime(const Integer& p) {
    return p >= 2 && boost::multiprecision::miller_rabin_test(p, 25);
}

Integer pow_int(const Integer& p, const Integer& e) {
    Integer r = 1;
    for (Integer i = 0; i < e; ++i) r *= p;
    return r;
}

}  // namespace

// ----------------------------------------------------------- direct towers

struct DirectTower::Impl {
    Rule rule = Rule::Custom;
    std::string name;
    Integer p = 0, a = 0, b = 0;
    int k = 0, step = 0;
    FgGroup base;
    std::vector<FgGroup> stages;
    std::vector<FgHom> maps;
    std::function<FgGroup(int)> stage_fn;
    std::function<FgHom(int)> map_fn;
    bool shift_inv = false;
    int stable_from = 0;

    mutable std::mutex mu;
    mutable std::vector<std::optional<FgGroup>> stage_memo;
    mutable std::vector<std::optional<FgHom>> map_memo;

    FgGroup compute_stage(int i) const {
        switch (rule) {
            case Rule::Stable: return base;
            case Rule::Prufer: return FgGroup::cyclic(pow_int(p, i));
            case Rule::Elementary:
                return FgGroup(0, std::vector<Integer>(i, pow_int(p, k)));
            case Rule::Free: return FgGroup::free(i * step);
            case Rule::Affine: {
                std::vector<Integer> fac;
                for (Integer n = 1; n <= i; ++n) fac.push_back(pow_int(p, a * n + b));
                return FgGroup(0, fac);
            }
            case Rule::ExplicitFinite:
                return stages[std::min<size_t>(i, stages.size()) - 1];
            case Rule::Custom: return stage_fn(i);
        }
        throw internal_error("unreachable tower rule");
    }

    FgHom compute_map(int i) const {
        FgGroup src = compute_stage(i), tgt = compute_stage(i + 1);
        switch (rule) {
            case Rule::Stable: return FgHom::identity(base);
            case Rule::Prufer: {
                IntMatrix m(1, 1);
                m.at(0, 0) = p;
                return FgHom(src, tgt, m);
            }
            case Rule::Elementary:
            case Rule::Free:
            case Rule::Affine: {
                // coordinate inclusion: new summands sit in the last positions
                IntMatrix m(tgt.gens(), src.gens());
                for (int j = 0; j < src.gens(); ++j) m.at(j, j) = 1;
                return FgHom(src, tgt, m);
            }
            case Rule::ExplicitFinite:
                if (i < static_cast<int>(maps.size()) + 1 &&
                    i <= static_cast<int>(stages.size()) - 1)
                    return maps[i - 1];
                return FgHom::identity(stages.back());
            case Rule::Custom: {
                FgHom f = map_fn(i);
                if (f.source != src || f.target != tgt)
                    throw std::invalid_argument("custom tower map endpoints disagree with stages");
                if (!is_injective(f))
                    throw std::invalid_argument("tower structure maps must be injective");
                return f;
            }
        }
        throw internal_error("unreachable tower rule");
    }
};

FgGroup DirectTower::stage(int i) const {
    if (i < 1) throw std::invalid_argument("tower stages are indexed from 1");
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto& memo = impl_->stage_memo;
    if (static_cast<int>(memo.size()) < i) memo.resize(i);
    if (!memo[i - 1]) memo[i - 1] = impl_->compute_stage(i);
    return *memo[i - 1];
}

FgHom DirectTower::map(int i) const {
    if (i < 1) throw std::invalid_argument("tower stages are indexed from 1");
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto& memo = impl_->map_memo;
    if (static_cast<int>(memo.size()) < i) memo.resize(i);
    if (!memo[i - 1]) memo[i - 1] = impl_->compute_map(i);
    return *memo[i - 1];
}

DirectTower::Rule DirectTower::rule() const { return impl_->rule; }
const std::string& DirectTower::name() const { return impl_->name; }
bool DirectTower::shift_invariant() const { return impl_->shift_inv; }
int DirectTower::stable_from() const { return impl_->stable_from; }
const Integer& DirectTower::p() const { return impl_->p; }
const Integer& DirectTower::a() const { return impl_->a; }
const Integer& DirectTower::b() const { return impl_->b; }

namespace {

DirectTower finish(std::shared_ptr<DirectTower::Impl> impl) {
    return DirectTower(std::shared_ptr<const DirectTower::Impl>(std::move(impl)));
}

}  // namespace

DirectTower tower_stable(const FgGroup& g) {
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::Stable;
    impl->base = g;
    impl->name = "stable(" + g.str() + ")";
    impl->shift_inv = true;
    impl->stable_from = 1;
    return finish(std::move(impl));
}

DirectTower tower_prufer(const Integer& p) {
    if (!is_prime(p)) throw std::invalid_argument("prufer tower: p must be prime");
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::Prufer;
    impl->p = p;
    std::ostringstream os;
    os << "prufer(" << p << ")";
    impl->name = os.str();
    impl->shift_inv = true;
    return finish(std::move(impl));
}

DirectTower tower_elementary(const Integer& p, int k) {
    if (!is_prime(p)) throw std::invalid_argument("elementary tower: p must be prime");
    if (k < 1) throw std::invalid_argument("elementary tower: k must be >= 1");
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::Elementary;
    impl->p = p;
    impl->k = k;
    std::ostringstream os;
    os << "elementary(" << p << "," << k << ")";
    impl->name = os.str();
    impl->shift_inv = true;
    return finish(std::move(impl));
}

DirectTower tower_free(int step) {
    if (step < 1) throw std::invalid_argument("free tower: step must be >= 1");
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::Free;
    impl->step = step;
    impl->name = "free(" + std::to_string(step) + ")";
    impl->shift_inv = true;
    return finish(std::move(impl));
}

DirectTower tower_affine(const Integer& p, const Integer& a, const Integer& b) {
    if (!is_prime(p)) throw std::invalid_argument("affine tower: p must be prime");
    if (a < 0 || a + b < 1)
        throw std::invalid_argument("affine tower: exponent rule must be >= 1 from n = 1 on");
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::Affine;
    impl->p = p;
    impl->a = a;
    impl->b = b;
    std::ostringstream os;
    os << "affine(" << p << "; " << a << "*n+" << b << ")";
    impl->name = os.str();
    impl->shift_inv = true;
    return finish(std::move(impl));
}

DirectTower tower_explicit(const std::vector<FgGroup>& stages, const std::vector<FgHom>& maps) {
    if (stages.empty()) throw std::invalid_argument("explicit tower needs at least one stage");
    if (maps.size() + 1 != stages.size())
        throw std::invalid_argument("explicit tower: need exactly one map per adjacent pair");
    for (size_t i = 0; i < maps.size(); ++i) {
        if (maps[i].source != stages[i] || maps[i].target != stages[i + 1])
            throw std::invalid_argument("explicit tower: map endpoints disagree with stages");
        if (!is_injective(maps[i]))
            throw std::invalid_argument("tower structure maps must be injective");
    }
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::ExplicitFinite;
    impl->stages = stages;
    impl->maps = maps;
    impl->name = "explicit(" + std::to_string(stages.size()) + " stages)";
    impl->shift_inv = true;  // identity tail
    impl->stable_from = static_cast<int>(stages.size());
    return finish(std::move(impl));
}

DirectTower tower_custom(std::string name, std::function<FgGroup(int)> stage_fn,
                         std::function<FgHom(int)> map_fn, bool shift_invariant) {
    auto impl = std::make_shared<DirectTower::Impl>();
    impl->rule = DirectTower::Rule::Custom;
    impl->stage_fn = std::move(stage_fn);
    impl->map_fn = std::move(map_fn);
    impl->name = std::move(name);
    impl->shift_inv = shift_invariant;
    return finish(std::move(impl));
}

ColimitResult colimit_group(const DirectTower& t) {
    ColimitResult out;
    switch (t.rule()) {
        case DirectTower::Rule::Stable:
            out.known = true;
            out.value = expr_from_fg(t.stage(1));
            return out;
        case DirectTower::Rule::Prufer:
            out.known = true;
            out.value = expr_prufer(t.p());
            return out;
        case DirectTower::Rule::Elementary: {
            out.known = true;
            // exponent is constant: the colimit is the countable constant sum
            Integer k = valuation(t.stage(1).torsion[0], t.p());
            out.value = expr_inf_sum(t.p(), 0, k);
            return out;
        }
        case DirectTower::Rule::Free:
            out.known = true;
            out.value = expr_inf_free();
            return out;
        case DirectTower::Rule::Affine:
            out.known = true;
            out.value = expr_inf_sum(t.p(), t.a(), t.b());
            return out;
        case DirectTower::Rule::ExplicitFinite:
            out.known = true;
            out.value = expr_from_fg(t.stage(t.stable_from()));
            return out;
        case DirectTower::Rule::Custom:
            out.known = false;
            out.note = "custom tail: colimit not recognized";
            return out;
    }
    throw internal_error("unreachable tower rule");
}

// ------------------------------------------------- finite-support truncation

namespace {

// Deterministic generator layout of a truncated expression: f.g. generators
// first, then per atom / per copy / per term.
struct TruncLayout {
    std::vector<Integer> orders;  // 0 = free generator
    std::vector<int> atom_offset;  // start slot of each atom
    int level = 0;
    bool ok = false;

    int terms_per_copy(const ExprAtom& at) const {
        switch (at.kind) {
            case ExprAtom::Kind::Prufer: return 1;
            case ExprAtom::Kind::InfSum:
            case ExprAtom::Kind::InfFree: return level;
            default: return 0;
        }
    }
};

TruncLayout layout_of(const GroupExpr& h, int level) {
    TruncLayout lay;
    lay.level = level;
    for (int r = 0; r < h.fg.rank; ++r) lay.orders.push_back(0);
    for (const Integer& d : h.fg.torsion) lay.orders.push_back(d);
    for (const ExprAtom& at : h.atoms) {
        lay.atom_offset.push_back(static_cast<int>(lay.orders.size()));
        switch (at.kind) {
            case ExprAtom::Kind::Prufer:
                for (int c = 0; c < at.count; ++c) lay.orders.push_back(pow_int(at.p, level));
                break;
            case ExprAtom::Kind::InfSum:
                for (int c = 0; c < at.count; ++c)
                    for (Integer n = 1; n <= level; ++n)
                        lay.orders.push_back(pow_int(at.p, at.a * n + at.b));
                break;
            case ExprAtom::Kind::InfFree:
                for (int n = 0; n < level; ++n) lay.orders.push_back(0);
                break;
            default:
                return lay;  // products/completions admit no finite-support model
        }
    }
    lay.ok = true;
    return lay;
}

PresentedGroup presented_of(const TruncLayout& lay) {
    int n = static_cast<int>(lay.orders.size());
    std::vector<int> torsion_slots;
    for (int i = 0; i < n; ++i)
        if (lay.orders[i] != 0) torsion_slots.push_back(i);
    IntMatrix rel(n, static_cast<int>(torsion_slots.size()));
    for (size_t j = 0; j < torsion_slots.size(); ++j)
        rel.at(torsion_slots[j], static_cast<int>(j)) = lay.orders[torsion_slots[j]];
    return cokernel(rel, n);
}

}  // namespace

std::optional<FgGroup> truncate_expr(const GroupExpr& h, int level) {
    if (level < 1) throw std::invalid_argument("truncation level must be >= 1");
    TruncLayout lay = layout_of(h, level);
    if (!lay.ok) return std::nullopt;
    return presented_of(lay).group;
}

FgHom truncation_inclusion(const GroupExpr& h, int l1, int l2) {
    if (l1 < 1 || l1 > l2) throw std::invalid_argument("truncation levels must satisfy 1 <= l1 <= l2");
    TruncLayout a = layout_of(h, l1), b = layout_of(h, l2);
    if (!a.ok || !b.ok)
        throw std::invalid_argument("expression has no finite-support truncation");
    PresentedGroup pa = presented_of(a), pb = presented_of(b);
    int fg_gens = h.fg.gens();
    IntMatrix inc(static_cast<int>(b.orders.size()), static_cast<int>(a.orders.size()));
    for (int j = 0; j < fg_gens; ++j) inc.at(j, j) = 1;
    for (size_t ai = 0; ai < h.atoms.size(); ++ai) {
        const ExprAtom& at = h.atoms[ai];
        int off_a = a.atom_offset[ai], off_b = b.atom_offset[ai];
        int ta = a.terms_per_copy(at), tb = b.terms_per_copy(at);
        for (int c = 0; c < at.count; ++c)
            for (int n = 0; n < ta; ++n) {
                int col = off_a + c * ta + n;
                int row = off_b + c * tb + n;
                // the level-l1 quasicyclic stage sits inside the level-l2 one
                // as the p^(l2-l1) multiples
                inc.at(row, col) = at.kind == ExprAtom::Kind::Prufer
                                       ? pow_int(at.p, l2 - l1)
                                       : Integer(1);
            }
    }
    IntMatrix m = pb.to_canonical * inc * pa.from_canonical;
    return FgHom(pa.group, pb.group, m);
}

// ----------------------------------------------------------- inverse towers

struct InverseTower::Impl {
    Prov prov = Prov::Custom;
    std::string name;
    std::optional<DirectTower> base;
    GroupExpr h;
    Integer p = 0;
    std::vector<FgGroup> stages;
    std::vector<FgHom> maps;
    std::function<FgGroup(int)> stage_fn;
    std::function<FgHom(int)> map_fn;
    bool shift_inv = false;
    int stable_from = 0;
    bool models = true;

    mutable std::mutex mu;
    mutable std::map<std::pair<int, int>, HomGroup> hom_memo;
    mutable std::map<std::pair<int, int>, ExtGroup> ext_memo;
    mutable std::map<int, std::pair<FgGroup, FgHom>> quot_memo;  // per (i) at fixed level
    mutable std::map<int, FgGroup> trunc_memo;                    // level -> model of h
    mutable int quot_level = 0;

    FgGroup trunc(int level) const {  // callers hold mu
        auto it = trunc_memo.find(level);
        if (it != trunc_memo.end()) return it->second;
        auto g = truncate_expr(h, level);
        if (!g) throw internal_error("truncation requested for a non-truncatable expression");
        trunc_memo.emplace(level, *g);
        return *g;
    }

    const HomGroup& hom_data(int i, int level) const {
        auto key = std::make_pair(i, level);
        auto it = hom_memo.find(key);
        if (it != hom_memo.end()) return it->second;
        return hom_memo.emplace(key, hom_group(base->stage(i), trunc(level))).first->second;
    }

    const ExtGroup& ext_data(int i, int level) const {
        auto key = std::make_pair(i, level);
        auto it = ext_memo.find(key);
        if (it != ext_memo.end()) return it->second;
        return ext_memo.emplace(key, ext_group(base->stage(i), trunc(level))).first->second;
    }

    const std::pair<FgGroup, FgHom>& quot_data(int i, int level) const {
        if (level != quot_level) {
            quot_memo.clear();
            quot_level = level;
        }
        auto it = quot_memo.find(i);
        if (it != quot_memo.end()) return it->second;
        FgGroup hl = trunc(level);
        Subgroup sub = Subgroup::multiples(hl, pow_int(p, i));
        return quot_memo.emplace(i, sub.quotient()).first->second;
    }
};

InverseTower::Prov InverseTower::provenance() const { return impl_->prov; }
const std::string& InverseTower::name() const { return impl_->name; }
bool InverseTower::shift_invariant() const { return impl_->shift_inv; }
int InverseTower::stable_from() const { return impl_->stable_from; }
const GroupExpr& InverseTower::h() const { return impl_->h; }
const Integer& InverseTower::p() const { return impl_->p; }
const DirectTower* InverseTower::base_tower() const {
    return impl_->base ? &*impl_->base : nullptr;
}
bool InverseTower::models_available() const { return impl_->models; }
bool InverseTower::truncated() const {
    return impl_->models && !impl_->h.atoms.empty() &&
           (impl_->prov == Prov::HomOfTower || impl_->prov == Prov::ExtOfTower ||
            impl_->prov == Prov::QuotientModP);
}

GroupExpr InverseTower::stage_expr(int i) const {
    if (i < 1) throw std::invalid_argument("tower stages are indexed from 1");
    switch (impl_->prov) {
        case Prov::HomOfTower: return hom_from_fg(impl_->base->stage(i), impl_->h);
        case Prov::ExtOfTower: return ext_from_fg(impl_->base->stage(i), impl_->h);
        case Prov::QuotientModP: return quotient_by(impl_->h, pow_int(impl_->p, i));
        case Prov::ExplicitFg:
        case Prov::Custom: return expr_from_fg(model_stage(i, 1));
    }
    throw internal_error("unreachable tower provenance");
}

FgGroup InverseTower::model_stage(int i, int level) const {
    if (i < 1) throw std::invalid_argument("tower stages are indexed from 1");
    if (!impl_->models)
        throw std::invalid_argument("tower stages have no finite-support models");
    std::lock_guard<std::mutex> lock(impl_->mu);
    switch (impl_->prov) {
        case Prov::HomOfTower: return impl_->hom_data(i, level).group;
        case Prov::ExtOfTower: return impl_->ext_data(i, level).group;
        case Prov::QuotientModP: return impl_->quot_data(i, level).first;
        case Prov::ExplicitFg:
            return impl_->stages[std::min<size_t>(i, impl_->stages.size()) - 1];
        case Prov::Custom: return impl_->stage_fn(i);
    }
    throw internal_error("unreachable tower provenance");
}

FgHom InverseTower::model_map(int i, int level) const {
    if (i < 1) throw std::invalid_argument("tower stages are indexed from 1");
    if (!impl_->models)
        throw std::invalid_argument("tower stages have no finite-support models");
    std::lock_guard<std::mutex> lock(impl_->mu);
    switch (impl_->prov) {
        case Prov::HomOfTower:
            return hom_restrict(impl_->hom_data(i + 1, level), impl_->hom_data(i, level),
                                impl_->base->map(i));
        case Prov::ExtOfTower:
            return ext_restrict(impl_->ext_data(i + 1, level), impl_->ext_data(i, level),
                                impl_->base->map(i));
        case Prov::QuotientModP: {
            // H/p^(i+1) -> H/p^i by lifting each generator through the finer
            // projection and pushing it down the coarser one
            const auto& fine = impl_->quot_data(i + 1, level);
            const auto& coarse = impl_->quot_data(i, level);
            const FgGroup& q1 = fine.first;
            Lattice rel = relation_lattice(q1);
            IntMatrix lift(fine.second.source.gens(), q1.gens());
            for (int j = 0; j < q1.gens(); ++j) {
                std::vector<Integer> e(q1.gens(), 0);
                e[j] = 1;
                auto x = solve_mod(fine.second.m, rel, e);
                if (!x) throw internal_error("quotient projection is not surjective");
                for (int r = 0; r < lift.rows(); ++r) lift.at(r, j) = (*x)[r];
            }
            return FgHom(q1, coarse.first, coarse.second.m * lift);
        }
        case Prov::ExplicitFg: {
            int nstages = static_cast<int>(impl_->stages.size());
            if (i < nstages) return impl_->maps[i - 1];
            return FgHom::identity(impl_->stages.back());
        }
        case Prov::Custom: {
            FgHom f = impl_->map_fn(i);
            if (f.source != impl_->stage_fn(i + 1) || f.target != impl_->stage_fn(i))
                throw std::invalid_argument("custom tower map endpoints disagree with stages");
            return f;
        }
    }
    throw internal_error("unreachable tower provenance");
}

namespace {

InverseTower finish_inv(std::shared_ptr<InverseTower::Impl> impl) {
    return InverseTower(std::shared_ptr<const InverseTower::Impl>(std::move(impl)));
}

bool expr_truncatable(const GroupExpr& h) { return truncate_expr(h, 1).has_value(); }

}  // namespace

InverseTower apply_hom(const DirectTower& t, const GroupExpr& h) {
    auto impl = std::make_shared<InverseTower::Impl>();
    impl->prov = InverseTower::Prov::HomOfTower;
    impl->base = t;
    impl->h = h;
    impl->name = "Hom(" + t.name() + ", " + h.str() + ")";
    impl->shift_inv = t.shift_invariant();
    impl->stable_from = t.stable_from();
    impl->models = expr_truncatable(h);
    return finish_inv(std::move(impl));
}

InverseTower apply_ext(const DirectTower& t, const GroupExpr& h) {
    auto impl = std::make_shared<InverseTower::Impl>();
    impl->prov = InverseTower::Prov::ExtOfTower;
    impl->base = t;
    impl->h = h;
    impl->name = "Ext(" + t.name() + ", " + h.str() + ")";
    impl->shift_inv = t.shift_invariant();
    impl->stable_from = t.stable_from();
    impl->models = expr_truncatable(h);
    return finish_inv(std::move(impl));
}

InverseTower quotient_tower(const GroupExpr& h, const Integer& p) {
    if (!is_prime(p)) throw std::invalid_argument("quotient tower: p must be prime");
    auto impl = std::make_shared<InverseTower::Impl>();
    impl->prov = InverseTower::Prov::QuotientModP;
    impl->h = h;
    impl->p = p;
    std::ostringstream os;
    os << h.str() << " mod " << p << "^n";
    impl->name = os.str();
    impl->shift_inv = true;
    impl->models = expr_truncatable(h);
    InvariantProfile pr = invariants(h);
    if (pr.exponent.finite) {
        long v = valuation(pr.exponent.value, p);
        impl->stable_from = std::max<long>(1, v);
    }
    return finish_inv(std::move(impl));
}

InverseTower inverse_explicit(const std::vector<FgGroup>& stages,
                              const std::vector<FgHom>& maps) {
    if (stages.empty()) throw std::invalid_argument("explicit tower needs at least one stage");
    if (maps.size() + 1 != stages.size())
        throw std::invalid_argument("explicit tower: need exactly one map per adjacent pair");
    for (size_t i = 0; i < maps.size(); ++i)
        if (maps[i].source != stages[i + 1] || maps[i].target != stages[i])
            throw std::invalid_argument("explicit tower: map endpoints disagree with stages");
    auto impl = std::make_shared<InverseTower::Impl>();
    impl->prov = InverseTower::Prov::ExplicitFg;
    impl->stages = stages;
    impl->maps = maps;
    impl->name = "explicit(" + std::to_string(stages.size()) + " stages)";
    impl->shift_inv = true;  // identity tail
    impl->stable_from = static_cast<int>(stages.size());
    return finish_inv(std::move(impl));
}

InverseTower inverse_custom(std::string name, std::function<FgGroup(int)> stage_fn,
                            std::function<FgHom(int)> map_fn, bool shift_invariant) {
    auto impl = std::make_shared<InverseTower::Impl>();
    impl->prov = InverseTower::Prov::Custom;
    impl->stage_fn = std::move(stage_fn);
    impl->map_fn = std::move(map_fn);
    impl->name = std::move(name);
    impl->shift_inv = shift_invariant;
    return finish_inv(std::move(impl));
}

// ------------------------------------------------------------ image chains

std::vector<Subgroup> image_chain(const InverseTower& t, int stage, int window, int level) {
    if (stage < 1 || window < 0) throw std::invalid_argument("bad image chain request");
    std::vector<Subgroup> chain;
    FgGroup s0 = t.model_stage(stage, level);
    chain.push_back(Subgroup::full(s0));
    std::optional<FgHom> composed;
    for (int k = 1; k <= window; ++k) {
        FgHom step = t.model_map(stage + k - 1, level);
        composed = composed ? composed->compose(step) : step;
        Subgroup img = image_subgroup(*composed);
        if (!chain.back().contains(img))
            throw internal_error("image chain failed to decrease at stage " +
                                 std::to_string(stage) + ", step " + std::to_string(k));
        chain.push_back(img);
    }
    return chain;
}

std::vector<Subgroup> image_chain(const InverseTower& t, int stage, int window) {
    return image_chain(t, stage, window, window + kTruncationMargin);
}

// ------------------------------------------------------------- certificates

namespace {

std::string lattice_str(const Subgroup& s) { return s.lattice().basis().str(); }

Certificate::ChainEvidence evidence_of(int stage, const std::vector<Subgroup>& chain) {
    Certificate::ChainEvidence ev;
    ev.stage = stage;
    for (const Subgroup& s : chain) {
        ev.images.push_back(lattice_str(s));
        ev.orders.push_back(s.order());
    }
    int w = static_cast<int>(chain.size()) - 1;
    int s = w;
    while (s > 0 && chain[s - 1] == chain[w]) --s;
    bool strict = true;
    for (int k = 0; k < w; ++k)
        if (chain[k + 1] == chain[k]) strict = false;
    ev.stabilized_at = (strict && w > 0) ? -1 : s;
    return ev;
}

struct WindowScan {
    std::vector<Certificate::ChainEvidence> evidence;
    bool all_stabilized = true;
    bool all_strict = true;
    int max_stabilized = 0;
};

WindowScan scan_probes(const InverseTower& t, int window, int level) {
    WindowScan ws;
    for (int i = 1; i <= kTruncationMargin; ++i) {
        auto ev = evidence_of(i, image_chain(t, i, window, level));
        if (ev.stabilized_at == -1) {
            ws.all_stabilized = false;
        } else {
            ws.all_strict = false;
            if (ev.stabilized_at > window - 2) ws.all_stabilized = false;
            ws.max_stabilized = std::max(ws.max_stabilized, ev.stabilized_at);
        }
        ws.evidence.push_back(std::move(ev));
    }
    return ws;
}

bool same_shape(const WindowScan& x, const WindowScan& y) {
    if (x.evidence.size() != y.evidence.size()) return false;
    for (size_t i = 0; i < x.evidence.size(); ++i)
        if (x.evidence[i].stabilized_at != y.evidence[i].stabilized_at) return false;
    return true;
}

}  // namespace

Certificate ml_status(const InverseTower& t, int window) {
    Certificate cert;
    cert.window = window;
    if (window < 4) throw std::invalid_argument("window too small for a verdict");
    if (!t.models_available()) {
        cert.shift = "no finite-support models for the stages";
        return cert;
    }
    int level = window + kTruncationMargin;
    WindowScan ws = scan_probes(t, window, level);
    if (t.truncated()) {
        WindowScan check = scan_probes(t, window, level + 2);
        if (!same_shape(ws, check)) {
            cert.shift = "image pattern not stable under deeper truncation";
            return cert;
        }
    }
    cert.evidence = ws.evidence;
    if (!t.shift_invariant()) {
        cert.shift = "no stage-shift rule declared; window observations do not extend";
        return cert;
    }
    if (ws.all_stabilized) {
        cert.kind = Certificate::Kind::MLStabilized;
        cert.stage = ws.max_stabilized;
        cert.shift = "stage shift of " + t.name() + " reproduces the stabilized pattern";
        return cert;
    }
    if (ws.all_strict) {
        cert.kind = Certificate::Kind::SelfSimilarStrictDescent;
        cert.shift = "stage shift of " + t.name() + " reproduces the strict descent";
        return cert;
    }
    cert.shift = "mixed stabilization pattern inside the window";
    return cert;
}

std::string Certificate::str() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::MLStabilized:
            os << "MLStabilized(stage " << stage << ", window " << window << ")";
            break;
        case Kind::SelfSimilarStrictDescent:
            os << "SelfSimilarStrictDescent(window " << window << ")";
            break;
        case Kind::InconclusiveWindow: os << "InconclusiveWindow(" << window << ")"; break;
        case Kind::RuleBacked: os << "RuleBacked(" << shift << ")"; break;
    }
    return os.str();
}

namespace {

bool replay_plain_evidence(const InverseTower& t, const Certificate& c) {
    int level = c.window + kTruncationMargin;
    for (const auto& ev : c.evidence) {
        std::vector<Subgroup> chain;
        if (ev.approx_level > 0) continue;  // handled by the zero-intersection replay
        chain = image_chain(t, ev.stage, c.window, level);
        auto fresh = evidence_of(ev.stage, chain);
        if (fresh.images != ev.images || fresh.orders != ev.orders ||
            fresh.stabilized_at != ev.stabilized_at)
            return false;
    }
    return true;
}

std::optional<Subgroup> approximant_subgroup(const InverseTower& t, int stage, int level,
                                             int approx);

bool replay_approx_evidence(const InverseTower& t, const Certificate& c) {
    int level = c.window + kTruncationMargin;
    for (const auto& ev : c.evidence) {
        if (ev.approx_level == 0) continue;
        auto s = approximant_subgroup(t, ev.stage, level, ev.approx_level);
        if (!s) return false;
        auto chain = image_chain(t, ev.stage, c.window, level);
        std::vector<std::string> images;
        std::vector<Integer> orders;
        for (const Subgroup& im : chain) {
            Subgroup cut = im.intersect(*s);
            images.push_back(lattice_str(cut));
            orders.push_back(cut.order());
        }
        if (images != ev.images || orders != ev.orders) return false;
        if (ev.stabilized_at < 0 || ev.stabilized_at > c.window) return false;
        for (int k = ev.stabilized_at; k <= c.window; ++k)
            if (orders[k] != 1) return false;
    }
    return true;
}

}  // namespace

// --------------------------------------------------------------- lim / lim1

namespace {

// Subgroup of Hom(G_stage, trunc(h, level)) formed by the maps that land in
// the level-`approx` truncation of h.
std::optional<Subgroup> approximant_subgroup(const InverseTower& t, int stage, int level,
                                             int approx) {
    if (t.provenance() != InverseTower::Prov::HomOfTower) return std::nullopt;
    const DirectTower* base = t.base_tower();
    FgGroup g = base->stage(stage);
    auto hl = truncate_expr(t.h(), level);
    auto ha = truncate_expr(t.h(), approx);
    if (!hl || !ha) return std::nullopt;
    HomGroup big = hom_group(g, *hl);
    HomGroup small = hom_group(g, *ha);
    FgHom inc = truncation_inclusion(t.h(), approx, level);
    return image_subgroup(hom_push(small, big, inc));
}

bool atoms_all_direct_sum(const GroupExpr& h) {
    for (const ExprAtom& at : h.atoms)
        if (at.kind != ExprAtom::Kind::InfSum && at.kind != ExprAtom::Kind::InfFree)
            return false;
    return true;
}

// towers of the form H/p^n: literal quotients, or Ext over a quasicyclic base
bool quotient_shaped(const InverseTower& t, Integer* p_out) {
    if (t.provenance() == InverseTower::Prov::QuotientModP) {
        if (p_out) *p_out = t.p();
        return true;
    }
    if (t.provenance() == InverseTower::Prov::ExtOfTower && t.base_tower() &&
        t.base_tower()->rule() == DirectTower::Rule::Prufer) {
        if (p_out) *p_out = t.base_tower()->p();
        return true;
    }
    return false;
}

bool stagewise_surjective(const InverseTower& t, int window, int level) {
    for (int i = 1; i <= window; ++i)
        if (!is_surjective(t.model_map(i, level))) return false;
    return true;
}

// stages all of the shape (Z/e)^(n_i) with n_i strictly increasing
bool homocyclic_growing(const InverseTower& t, int window, int level, Integer* e_out) {
    Integer e = 0;
    std::vector<size_t> counts;
    for (int i = 1; i <= window; ++i) {
        FgGroup s = t.model_stage(i, level);
        if (s.rank != 0 || s.torsion.empty()) return false;
        for (const Integer& d : s.torsion) {
            if (e == 0) e = d;
            if (d != e) return false;
        }
        counts.push_back(s.torsion.size());
    }
    for (size_t i = 0; i + 1 < counts.size(); ++i)
        if (counts[i + 1] <= counts[i]) return false;
    if (e_out) *e_out = e;
    return true;
}

// eventually-constant recognition: structure maps are isomorphisms from s on
std::optional<int> constant_from(const InverseTower& t, int window) {
    int level = window + kTruncationMargin;
    int start = t.stable_from() > 0 ? t.stable_from() : 1;
    if (t.stable_from() == 0 && t.truncated()) return std::nullopt;
    if (start > window) return std::nullopt;
    for (int s = start; s <= window; ++s) {
        bool ok = true;
        for (int i = s; i < s + window && ok; ++i) {
            FgHom f = t.model_map(i, level);
            ok = is_injective(f) && is_surjective(f);
        }
        if (ok) return s;
        if (t.stable_from() > 0) break;  // declared point failed: do not guess
    }
    return std::nullopt;
}

}  // namespace

LimResult lim_group(const InverseTower& t, int window) {
    LimResult out;
    out.certificate.window = window;

    // 1. eventually-constant towers
    if (t.models_available()) {
        if (auto s = constant_from(t, window)) {
            out.known = true;
            out.value = t.stage_expr(*s);
            out.certificate.kind = Certificate::Kind::RuleBacked;
            out.certificate.stage = *s;
            out.certificate.shift = "eventually-constant";
            for (int i = 1; i <= kTruncationMargin; ++i)
                out.certificate.evidence.push_back(
                    evidence_of(i, image_chain(t, i, window)));
            return out;
        }
    }

    // 2. p-power quotient towers complete the base
    Integer qp = 0;
    if (quotient_shaped(t, &qp) && t.models_available()) {
        int level = window + kTruncationMargin;
        if (stagewise_surjective(t, window, level)) {
            const Integer& p = qp;
            out.known = true;
            out.value = expr_padic(p, t.h());
            out.certificate.kind = Certificate::Kind::RuleBacked;
            out.certificate.shift = "quotient-completion";
            for (int i = 1; i <= kTruncationMargin; ++i)
                out.certificate.evidence.push_back(
                    evidence_of(i, image_chain(t, i, window)));
            return out;
        }
    }

    // 3. surjective homocyclic systems of unbounded rank give full products
    if (t.models_available() && !t.truncated() && t.shift_invariant()) {
        int level = window + kTruncationMargin;
        Integer e = 0;
        if (homocyclic_growing(t, window, level, &e) &&
            stagewise_surjective(t, window, level)) {
            out.known = true;
            out.value = expr_inf_product(FgGroup::cyclic(e));
            out.certificate.kind = Certificate::Kind::RuleBacked;
            out.certificate.shift = "surjective-homocyclic-product";
            for (int i = 1; i <= kTruncationMargin; ++i)
                out.certificate.evidence.push_back(
                    evidence_of(i, image_chain(t, i, window)));
            return out;
        }
    }

    // 4. vanishing: every finite-support approximant leaves the images
    if (t.provenance() == InverseTower::Prov::HomOfTower && t.models_available() &&
        t.shift_invariant() && atoms_all_direct_sum(t.h())) {
        int level = window + kTruncationMargin;
        bool dead = true;
        std::vector<Certificate::ChainEvidence> evidence;
        for (int i = 1; i <= kTruncationMargin && dead; ++i) {
            auto chain = image_chain(t, i, window, level);
            for (int l = 1; l <= kTruncationMargin && dead; ++l) {
                auto s = approximant_subgroup(t, i, level, l);
                if (!s) {
                    dead = false;
                    break;
                }
                Certificate::ChainEvidence ev;
                ev.stage = i;
                ev.approx_level = l;
                int death = -1;
                for (int k = 0; k <= window; ++k) {
                    Subgroup cut = chain[k].intersect(*s);
                    ev.images.push_back(lattice_str(cut));
                    ev.orders.push_back(cut.order());
                    if (death == -1 && cut.is_zero()) death = k;
                }
                if (death == -1 || death > window - 2) {
                    dead = false;
                    break;
                }
                ev.stabilized_at = death;
                evidence.push_back(std::move(ev));
            }
        }
        if (dead) {
            out.known = true;
            out.value = expr_trivial();
            out.certificate.kind = Certificate::Kind::RuleBacked;
            out.certificate.shift = "zero-intersection";
            out.certificate.evidence = std::move(evidence);
            return out;
        }
    }

    // 5. opaque pro-object
    out.known = false;
    out.certificate = ml_status(t, window);
    std::ostringstream os;
    os << "pro-object; stages:";
    for (int i = 1; i <= 3; ++i) os << " " << t.stage_expr(i).str();
    out.pro_note = os.str();
    return out;
}

std::string verdict_str(TowerVerdict v) {
    switch (v) {
        case TowerVerdict::Zero: return "Zero";
        case TowerVerdict::NonzeroCertified: return "NonzeroCertified";
        default: return "Inconclusive";
    }
}

Lim1Result lim1(const InverseTower& t, int window) {
    Lim1Result out;
    out.certificate = ml_status(t, window);
    if (out.certificate.kind == Certificate::Kind::MLStabilized) {
        out.verdict = TowerVerdict::Zero;
        out.value_hint = expr_trivial();
        return out;
    }
    if (out.certificate.kind == Certificate::Kind::SelfSimilarStrictDescent) {
        // the non-vanishing dichotomy needs countable stages
        bool countable = true;
        for (int i = 1; i <= kTruncationMargin && countable; ++i)
            countable = invariants(t.stage_expr(i)).cardinality.kind !=
                        Cardinality::Kind::Continuum;
        if (countable) {
            out.verdict = TowerVerdict::NonzeroCertified;
            return out;
        }
    }
    out.verdict = TowerVerdict::Inconclusive;
    return out;
}

// ------------------------------------------------------------------- pext

PextRule pext_rules(const InvariantProfile& gprofile, const InvariantProfile& hprofile) {
    if (gprofile.sum_of_cyclics == TriBool::Yes ||
        hprofile.algebraically_compact == TriBool::Yes)
        return PextRule::Zero;
    if (gprofile.torsionfree || hprofile.torsionfree) return PextRule::Divisible;
    return PextRule::NoVerdict;
}

PextResult pext(const DirectTower& t, const GroupExpr& h, int window) {
    PextResult out;
    Lim1Result window_res = lim1(apply_hom(t, h), window);
    ColimitResult colim = colimit_group(t);
    PextRule rule = PextRule::NoVerdict;
    if (colim.known) rule = pext_rules(invariants(colim.value), invariants(h));

    if (rule == PextRule::Zero) {
        if (window_res.verdict == TowerVerdict::NonzeroCertified)
            throw internal_error(
                "pure-extension rule engine says Zero but the window certified nonzero "
                "(tower " + t.name() + ")");
        out.verdict = TowerVerdict::Zero;
        out.value_hint = expr_trivial();
        if (window_res.verdict == TowerVerdict::Zero) {
            out.certificate = window_res.certificate;
            out.rule_note = "window and rule agree: vanishing";
        } else {
            out.certificate.kind = Certificate::Kind::RuleBacked;
            out.certificate.window = window;
            out.certificate.shift = "pext-rule: cyclic-sum source or compact target";
            out.rule_note = "vanishing by rule; window alone was inconclusive";
        }
        return out;
    }

    out.verdict = window_res.verdict;
    out.value_hint = window_res.value_hint;
    out.certificate = window_res.certificate;
    if (rule == PextRule::Divisible) {
        out.divisible_hint = true;
        out.rule_note = "torsionfree input: the value is divisible";
    }
    return out;
}

// ------------------------------------------------------- certificate replay

bool verify_certificate(const InverseTower& t, const Certificate& c) {
    switch (c.kind) {
        case Certificate::Kind::InconclusiveWindow:
            return true;
        case Certificate::Kind::MLStabilized: {
            if (!t.shift_invariant() || !t.models_available()) return false;
            if (!replay_plain_evidence(t, c)) return false;
            for (const auto& ev : c.evidence)
                if (ev.stabilized_at < 0 || ev.stabilized_at > c.window - 2) return false;
            return !c.evidence.empty();
        }
        case Certificate::Kind::SelfSimilarStrictDescent: {
            if (!t.shift_invariant() || !t.models_available()) return false;
            if (!replay_plain_evidence(t, c)) return false;
            for (const auto& ev : c.evidence)
                if (ev.stabilized_at != -1) return false;
            return !c.evidence.empty();
        }
        case Certificate::Kind::RuleBacked: {
            if (c.shift == "eventually-constant") {
                if (!t.models_available()) return false;
                int level = c.window + kTruncationMargin;
                for (int i = c.stage; i < c.stage + c.window; ++i) {
                    FgHom f = t.model_map(i, level);
                    if (!is_injective(f) || !is_surjective(f)) return false;
                }
                return replay_plain_evidence(t, c);
            }
            if (c.shift == "quotient-completion") {
                if (!quotient_shaped(t, nullptr) || !t.models_available()) return false;
                int level = c.window + kTruncationMargin;
                if (!stagewise_surjective(t, c.window, level)) return false;
                return replay_plain_evidence(t, c);
            }
            if (c.shift == "surjective-homocyclic-product") {
                if (!t.models_available() || t.truncated() || !t.shift_invariant())
                    return false;
                int level = c.window + kTruncationMargin;
                if (!homocyclic_growing(t, c.window, level, nullptr) ||
                    !stagewise_surjective(t, c.window, level))
                    return false;
                return replay_plain_evidence(t, c);
            }
            if (c.shift == "zero-intersection") {
                if (!t.shift_invariant()) return false;
                return !c.evidence.empty() && replay_approx_evidence(t, c);
            }
            if (c.shift.rfind("pext-rule:", 0) == 0) {
                if (t.provenance() != InverseTower::Prov::HomOfTower || !t.base_tower())
                    return false;
                ColimitResult colim = colimit_group(*t.base_tower());
                if (!colim.known) return false;
                return pext_rules(invariants(colim.value), invariants(t.h())) ==
                       PextRule::Zero;
            }
            return false;
        }
    }
    return false;
}

// ------------------------------------------------------------ z-adic check

ZadicReport zadic_closure_check(const GroupExpr& ext_value, const PextResult& pr) {
    ZadicReport rep;
    // the intersection of all n*E: divisible atoms survive, everything else
    // (reduced sums, bounded products, complete modules) meets it trivially
    GroupExpr closure;
    for (const ExprAtom& at : ext_value.atoms)
        if (at.kind == ExprAtom::Kind::Prufer) closure.atoms.push_back(at);
    rep.closure = closure;
    rep.trivial = closure.is_trivial();
    InvariantProfile pe = invariants(ext_value);
    if (rep.trivial) {
        std::ostringstream os;
        if (pe.exponent.finite)
            os << "intersection reached at n = " << pe.exponent.value;
        else
            os << "no divisible summands: intersection vanishes";
        rep.note = os.str();
        rep.consistent = pr.verdict != TowerVerdict::NonzeroCertified;
        if (!rep.consistent)
            throw internal_error(
                "multiples of the Ext value intersect trivially, yet the pure part was "
                "certified nonzero");
    } else {
        rep.note = "divisible summands keep the intersection nontrivial: " + closure.str();
        rep.consistent = !(pr.verdict == TowerVerdict::Zero && !pr.divisible_hint);
        if (!rep.consistent)
            throw internal_error(
                "Ext value has a divisible part but the pure part was reported zero "
                "without a divisibility rule");
    }
    return rep;
}

// ------------------------------------------------------------ Jensen kernels

std::vector<KernelDescriptor> jensen_kernel_profile(const DirectTower& t, const GroupExpr& h,
                                                    int window) {
    std::vector<KernelDescriptor> out;
    InverseTower ext_t = apply_ext(t, h);
    ColimitResult colim = colimit_group(t);
    int level = window + kTruncationMargin;

    // finitely generated colimit: kernels are exactly computable
    if (colim.known && colim.value.as_fg() && t.stable_from() > 0 && !ext_t.truncated() &&
        ext_t.models_available()) {
        int s = t.stable_from();
        FgGroup gfull = t.stage(s);
        auto hfg = truncate_expr(h, 1);
        ExtGroup ext_full = ext_group(gfull, *hfg);
        for (int i = 1; i <= window; ++i) {
            KernelDescriptor kd;
            kd.stage = i;
            if (i >= s) {
                kd.trivial = TriBool::Yes;
                kd.note = "restriction is an isomorphism from the stabilization stage";
            } else {
                FgHom inc = t.map(i);
                for (int j = i + 1; j < s; ++j) inc = t.map(j).compose(inc);
                ExtGroup ext_i = ext_group(t.stage(i), *hfg);
                Subgroup ker = kernel_subgroup(ext_restrict(ext_full, ext_i, inc));
                kd.trivial = ker.is_zero() ? TriBool::Yes : TriBool::No;
                std::ostringstream os;
                os << "kernel of the stage-" << i << " restriction has order " << ker.order();
                kd.note = os.str();
            }
            out.push_back(kd);
        }
        return out;
    }

    // infinite colimit: surjectivity and cardinality accounting
    bool exact_models = ext_t.models_available() && !ext_t.truncated();
    bool surjective = exact_models;
    std::vector<Integer> orders;
    if (exact_models) {
        for (int i = 1; i <= window + 1 && surjective; ++i)
            surjective = i > window || is_surjective(ext_t.model_map(i, level));
        for (int i = 1; i <= window + 1; ++i) orders.push_back(ext_t.model_stage(i, level).order());
    }
    std::string product_tail;
    if (exact_models && surjective) {
        LimResult lim = lim_group(ext_t, window);
        if (lim.known && !lim.value.atoms.empty() &&
            lim.value.atoms[0].kind == ExprAtom::Kind::InfProduct)
            product_tail = "InfProduct(" + lim.value.atoms[0].base.str() + ") tail";
    }
    for (int i = 1; i <= window; ++i) {
        KernelDescriptor kd;
        kd.stage = i;
        if (t.stable_from() > 0 && i >= t.stable_from()) {
            kd.trivial = TriBool::Yes;
            kd.note = "restriction is an isomorphism from the stabilization stage";
        } else if (exact_models && surjective) {
            bool grows = false;
            for (int j = i; j < static_cast<int>(orders.size()); ++j)
                if (orders[j] != orders[i - 1] &&
                    (orders[i - 1] == 0 ? false : (orders[j] == 0 || orders[j] > orders[i - 1])))
                    grows = true;
            if (grows) {
                kd.trivial = TriBool::No;
                std::ostringstream os;
                os << "surjective restrictions with growing stage groups force a kernel";
                if (!product_tail.empty()) os << "; " << product_tail;
                kd.note = os.str();
            } else {
                kd.trivial = TriBool::Unknown;
                kd.note = "no growth detected inside the window";
            }
        } else {
            kd.trivial = TriBool::Unknown;
            kd.note = "stage values exceed finite-support models";
        }
        out.push_back(kd);
    }
    return out;
}

}  // namespace kkf
