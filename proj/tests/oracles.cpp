#include "oracles.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>

namespace kkf::oracle {

namespace {

void extend_chain(long max_order, long product, std::vector<Integer>& chain,
                  std::vector<FgGroup>& out) {
    out.emplace_back(0, chain);
    long start = chain.empty() ? 2 : static_cast<long>(chain.back());
    for (long d = start; product * d <= max_order; ++d) {
        if (!chain.empty() && d % static_cast<long>(chain.back()) != 0) continue;
        chain.push_back(d);
        extend_chain(max_order, product * d, chain, out);
        chain.pop_back();
    }
}

// Small-int element model of a finite group: tuples mod the torsion vector.
struct Model {
    std::vector<long> mods;
    std::vector<std::vector<long>> elems;
    long order = 1;

    explicit Model(const FgGroup& g) {
        if (!g.is_finite()) throw std::invalid_argument("oracle model needs a finite group");
        for (const auto& d : g.torsion) mods.push_back(static_cast<long>(d));
        for (long m : mods) order *= m;
        std::vector<long> cur(mods.size(), 0);
        elems.push_back(cur);
        while (true) {
            size_t i = 0;
            while (i < mods.size() && cur[i] + 1 == mods[i]) cur[i++] = 0;
            if (i == mods.size()) break;
            ++cur[i];
            elems.push_back(cur);
        }
    }

    std::vector<long> add(const std::vector<long>& a, const std::vector<long>& b) const {
        std::vector<long> r(mods.size());
        for (size_t i = 0; i < mods.size(); ++i) r[i] = (a[i] + b[i]) % mods[i];
        return r;
    }
    std::vector<long> sub(const std::vector<long>& a, const std::vector<long>& b) const {
        std::vector<long> r(mods.size());
        for (size_t i = 0; i < mods.size(); ++i) r[i] = ((a[i] - b[i]) % mods[i] + mods[i]) % mods[i];
        return r;
    }
    std::vector<long> scale(long n, const std::vector<long>& a) const {
        std::vector<long> r(mods.size());
        for (size_t i = 0; i < mods.size(); ++i) r[i] = ((a[i] * n) % mods[i] + mods[i]) % mods[i];
        return r;
    }
    bool is_zero(const std::vector<long>& a) const {
        return std::all_of(a.begin(), a.end(), [](long v) { return v == 0; });
    }
    long elem_order(const std::vector<long>& a) const {
        long o = 1;
        for (size_t i = 0; i < mods.size(); ++i) o = std::lcm(o, mods[i] / std::gcd(a[i], mods[i]));
        return o;
    }
};

}  // namespace

std::vector<FgGroup> all_finite_groups(long max_order) {
    std::vector<FgGroup> out;
    std::vector<Integer> chain;
    extend_chain(max_order, 1, chain, out);
    return out;
}

FgGroup group_from_orders(const std::vector<long>& orders) {
    long n = static_cast<long>(orders.size());
    if (n <= 0) throw std::invalid_argument("empty order multiset");
    if (n == 1) return FgGroup::trivial();
    // primes dividing the group order
    std::vector<long> primes;
    long m = n;
    for (long p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            primes.push_back(p);
            while (m % p == 0) m /= p;
        }
    if (m > 1) primes.push_back(m);

    // per prime: exponent multiset (descending) via conjugate partition of
    // b_k = v_p(N_k) - v_p(N_{k-1}), N_k = #{x : p^k x = 0}
    std::map<long, std::vector<long>> exps;
    for (long p : primes) {
        std::vector<long> b;
        long prev_v = 0;
        for (long k = 1;; ++k) {
            long pk = 1;
            for (long t = 0; t < k; ++t) pk *= p;
            long count = 0;
            for (long o : orders)
                if (pk % o == 0) ++count;
            long v = 0;
            long c = count;
            while (c % p == 0) {
                c /= p;
                ++v;
            }
            b.push_back(v - prev_v);
            prev_v = v;
            // done once every p-power-order element is counted
            long total = 0;
            for (long o : orders) {
                bool ppow = true;
                long oo = o;
                while (oo % p == 0) oo /= p;
                ppow = (oo == 1);
                if (ppow) ++total;
            }
            if (count == total) break;
        }
        std::vector<long> e;
        for (long r = 0; r < b[0]; ++r) {
            long cnt = 0;
            for (long v : b)
                if (v > r) ++cnt;
            e.push_back(cnt);
        }
        std::sort(e.begin(), e.end(), std::greater<long>());
        exps[p] = e;
    }

    size_t slots = 0;
    for (auto& [p, e] : exps) slots = std::max(slots, e.size());
    std::vector<Integer> factors;
    for (size_t s = 0; s < slots; ++s) {
        Integer d = 1;
        for (auto& [p, e] : exps)
            if (s < e.size()) {
                for (long t = 0; t < e[s]; ++t) d *= p;
            }
        factors.push_back(d);
    }
    std::reverse(factors.begin(), factors.end());
    return FgGroup(0, factors);
}

FgGroup hom_of_finite(const FgGroup& g, const FgGroup& h) {
    Model mh(h);
    std::vector<std::vector<std::vector<long>>> candidates;
    long total = 1;
    for (const auto& dI : g.torsion) {
        long d = static_cast<long>(dI);
        std::vector<std::vector<long>> c;
        for (const auto& y : mh.elems)
            if (mh.is_zero(mh.scale(d, y))) c.push_back(y);
        total *= static_cast<long>(c.size());
        if (total > (1 << 21)) throw std::invalid_argument("hom oracle: too many maps");
        candidates.push_back(std::move(c));
    }
    std::vector<long> orders;
    std::vector<size_t> idx(candidates.size(), 0);
    while (true) {
        long o = 1;
        for (size_t j = 0; j < candidates.size(); ++j)
            o = std::lcm(o, mh.elem_order(candidates[j][idx[j]]));
        orders.push_back(o);
        size_t i = 0;
        while (i < idx.size() && idx[i] + 1 == candidates[i].size()) idx[i++] = 0;
        if (i == idx.size()) break;
        ++idx[i];
    }
    return group_from_orders(orders);
}

bool ext_of_cyclic_feasible(long a, const FgGroup& h) {
    if (!h.is_finite() || a < 2) return false;
    double budget = 1;
    long n = static_cast<long>(h.order());
    for (long i = 0; i + 1 < a; ++i) {
        budget *= n;
        if (budget > 20000) return false;
    }
    return true;
}

FgGroup ext_of_cyclic(long a, const FgGroup& h) {
    if (!ext_of_cyclic_feasible(a, h)) throw std::invalid_argument("ext oracle out of budget");
    Model mh(h);
    // carry(r, s) for the standard section of Z/a
    auto carry = [a](long r, long s) { return (r + s) >= a ? 1 : 0; };

    // D = all g such that g*carry is a coboundary; found by enumerating every
    // normalized 1-cochain u : {1..a-1} -> h.
    std::set<std::vector<long>> d_set;
    size_t nu = static_cast<size_t>(a) - 1;
    std::vector<size_t> idx(nu, 0);
    const std::vector<long> zero(mh.mods.size(), 0);
    while (true) {
        // u(0) = 0, u(i) = elems[idx[i-1]]
        auto u = [&](long i) -> const std::vector<long>& {
            return i == 0 ? zero : mh.elems[idx[static_cast<size_t>(i) - 1]];
        };
        bool consistent = true;
        bool have_g = false;
        std::vector<long> gval;
        for (long r = 0; r < a && consistent; ++r)
            for (long s = 0; s < a && consistent; ++s) {
                std::vector<long> du = mh.sub(mh.add(u(r), u(s)), u((r + s) % a));
                if (carry(r, s) == 0) {
                    if (!mh.is_zero(du)) consistent = false;
                } else if (!have_g) {
                    gval = du;
                    have_g = true;
                } else if (du != gval) {
                    consistent = false;
                }
            }
        if (consistent && have_g) d_set.insert(gval);
        if (consistent && !have_g) d_set.insert(std::vector<long>(mh.mods.size(), 0));

        size_t i = 0;
        while (i < nu && idx[i] + 1 == mh.elems.size()) idx[i++] = 0;
        if (i == nu) break;
        ++idx[i];
        if (nu == 0) break;
    }
    if (nu == 0) d_set.insert(std::vector<long>(mh.mods.size(), 0));

    // element orders of h / D
    std::vector<long> orders;
    std::set<std::vector<long>> seen;  // one representative per coset
    for (const auto& x : mh.elems) {
        bool dup = false;
        for (const auto& d : d_set)
            if (seen.count(mh.sub(x, d))) {
                dup = true;
                break;
            }
        if (dup) continue;
        seen.insert(x);
        long o = 1;
        while (!d_set.count(mh.scale(o, x))) ++o;
        orders.push_back(o);
    }
    return group_from_orders(orders);
}

}  // namespace kkf::oracle
