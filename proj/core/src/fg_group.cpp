#include "kkfilt/fg_group.hpp"

#include "kkfilt/smith.hpp"

#include <algorithm>
#include <sstream>

namespace kkf {

FgGroup::FgGroup(int r, std::vector<Integer> t) : rank(r), torsion(std::move(t)) {
    if (rank < 0) throw std::invalid_argument("negative rank");
    for (size_t i = 0; i < torsion.size(); ++i) {
        if (torsion[i] < 2) throw std::invalid_argument("invariant factor < 2");
        if (i + 1 < torsion.size() && torsion[i + 1] % torsion[i] != 0)
            throw std::invalid_argument("invariant factors must form a divisibility chain");
    }
}

FgGroup FgGroup::cyclic(const Integer& d) {
    if (d == 0) return free(1);
    if (d == 1) return trivial();
    return FgGroup(0, {d});
}

Integer FgGroup::order() const {
    if (rank > 0) return 0;
    Integer o = 1;
    for (const auto& d : torsion) o *= d;
    return o;
}

Integer FgGroup::exponent() const {
    if (rank > 0) return 0;
    return torsion.empty() ? Integer(1) : torsion.back();
}

Integer FgGroup::gen_order(int i) const {
    return i < rank ? Integer(0) : torsion[i - rank];
}

std::vector<Integer> FgGroup::reduce(std::vector<Integer> x) const {
    if (static_cast<int>(x.size()) != gens()) throw std::invalid_argument("element length mismatch");
    for (size_t t = 0; t < torsion.size(); ++t) {
        Integer& c = x[rank + t];
        c %= torsion[t];
        if (c < 0) c += torsion[t];
    }
    return x;
}

bool FgGroup::is_zero_element(const std::vector<Integer>& x) const {
    auto r = reduce(x);
    return std::all_of(r.begin(), r.end(), [](const Integer& c) { return c == 0; });
}

std::vector<std::vector<Integer>> FgGroup::elements(size_t cap) const {
    if (rank > 0) throw std::invalid_argument("cannot enumerate an infinite group");
    Integer o = order();
    if (o > Integer(cap)) throw std::invalid_argument("group too large to enumerate");
    std::vector<std::vector<Integer>> out;
    out.reserve(static_cast<size_t>(o));
    std::vector<Integer> cur(torsion.size(), 0);
    for (;;) {
        out.push_back(cur);
        int t = static_cast<int>(torsion.size()) - 1;
        while (t >= 0) {
            if (++cur[t] < torsion[t]) break;
            cur[t] = 0;
            --t;
        }
        if (t < 0) break;
    }
    return out;
}

std::string FgGroup::str() const {
    if (is_trivial()) return "0";
    std::ostringstream os;
    bool first = true;
    if (rank == 1) {
        os << "Z";
        first = false;
    } else if (rank > 1) {
        os << "Z^" << rank;
        first = false;
    }
    for (const auto& d : torsion) {
        os << (first ? "" : " + ") << "Z/" << d;
        first = false;
    }
    return os.str();
}

std::vector<Integer> canonical_invariant_factors(std::vector<Integer> orders) {
    std::erase_if(orders, [](const Integer& d) { return d == 1; });
    for (const auto& d : orders)
        if (d < 1) throw std::invalid_argument("cyclic order must be positive");
    // gcd/lcm exchange until the multiset forms a divisibility chain
    bool changed = true;
    while (changed) {
        changed = false;
        std::sort(orders.begin(), orders.end());
        for (size_t i = 0; i + 1 < orders.size(); ++i)
            for (size_t j = i + 1; j < orders.size(); ++j) {
                if (orders[j] % orders[i] == 0) continue;
                Integer g = gcd(orders[i], orders[j]);
                Integer l = orders[i] / g * orders[j];
                orders[i] = g;
                orders[j] = l;
                changed = true;
            }
    }
    std::erase_if(orders, [](const Integer& d) { return d == 1; });
    return orders;
}

FgGroup direct_sum(const FgGroup& a, const FgGroup& b) {
    std::vector<Integer> all = a.torsion;
    all.insert(all.end(), b.torsion.begin(), b.torsion.end());
    return FgGroup(a.rank + b.rank, canonical_invariant_factors(std::move(all)));
}

FgHom::FgHom(FgGroup src, FgGroup tgt, IntMatrix mat, bool check)
    : source(std::move(src)), target(std::move(tgt)), m(std::move(mat)) {
    if (m.rows() != target.gens() || m.cols() != source.gens())
        throw std::invalid_argument("hom matrix shape mismatch");
    reduce_rows();
    if (check && !well_defined()) throw std::invalid_argument("matrix does not define a homomorphism");
}

void FgHom::reduce_rows() {
    for (int t = 0; t < target.torsion_count(); ++t) {
        const Integer& d = target.torsion[t];
        for (int j = 0; j < m.cols(); ++j) {
            Integer& c = m.at(target.rank + t, j);
            c %= d;
            if (c < 0) c += d;
        }
    }
}

FgHom FgHom::zero(const FgGroup& src, const FgGroup& tgt) {
    return FgHom(src, tgt, IntMatrix(tgt.gens(), src.gens()), false);
}

FgHom FgHom::identity(const FgGroup& g) {
    return FgHom(g, g, IntMatrix::identity(g.gens()), false);
}

bool FgHom::well_defined() const {
    // d_j * f(gen_j) must vanish in the target for every torsion generator j
    for (int j = source.rank; j < source.gens(); ++j) {
        const Integer& d = source.gen_order(j);
        for (int i = 0; i < target.gens(); ++i) {
            Integer v = d * m.at(i, j);
            const Integer& e = target.gen_order(i);
            if (e == 0 ? v != 0 : v % e != 0) return false;
        }
    }
    return true;
}

std::vector<Integer> FgHom::apply(const std::vector<Integer>& x) const {
    return target.reduce(m.apply(source.reduce(x)));
}

FgHom FgHom::compose(const FgHom& inner) const {
    if (inner.target != source) throw std::invalid_argument("composition type mismatch");
    return FgHom(inner.source, target, m * inner.m, false);
}

bool FgHom::operator==(const FgHom& o) const {
    return source == o.source && target == o.target && m == o.m;
}

PresentedGroup cokernel(const IntMatrix& relation_columns, int n_generators) {
    if (relation_columns.rows() != 0 && relation_columns.rows() != n_generators)
        throw std::invalid_argument("relation column length mismatch");
    IntMatrix rel = relation_columns.rows() ? relation_columns : IntMatrix(n_generators, 0);
    SmithResult sm = smith_normal_form(rel);
    int n = n_generators;
    int diag = std::min(rel.rows(), rel.cols());
    std::vector<Integer> d(n, 0);
    for (int i = 0; i < diag; ++i) d[i] = sm.s.at(i, i);

    std::vector<int> free_idx, tors_idx;
    for (int i = 0; i < n; ++i) {
        if (d[i] == 0) free_idx.push_back(i);
        else if (d[i] >= 2) tors_idx.push_back(i);
    }
    // SNF diagonal is a divisibility chain, so tors_idx is already in
    // increasing invariant-factor order.
    std::vector<Integer> torsion;
    for (int i : tors_idx) torsion.push_back(d[i]);
    FgGroup g(static_cast<int>(free_idx.size()), std::move(torsion));

    std::vector<int> sel = free_idx;
    sel.insert(sel.end(), tors_idx.begin(), tors_idx.end());

    IntMatrix to_c(g.gens(), n), from_c(n, g.gens());
    for (int l = 0; l < g.gens(); ++l)
        for (int j = 0; j < n; ++j) {
            to_c.at(l, j) = sm.u.at(sel[l], j);
            from_c.at(j, l) = sm.u_inv.at(j, sel[l]);
        }
    return PresentedGroup{std::move(g), std::move(to_c), std::move(from_c)};
}

std::vector<Integer> PresentedGroup::canonical_of(const std::vector<Integer>& pres_coords) const {
    return group.reduce(to_canonical.apply(pres_coords));
}

FgGroup fg_from_presentation(const IntMatrix& relations) {
    return cokernel(relations.transposed(), relations.cols()).group;
}

}  // namespace kkf
