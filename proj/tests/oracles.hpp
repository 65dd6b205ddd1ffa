#pragma once

// Brute-force reference computations for cross-checking the library. These
// deliberately avoid the presentation/Smith machinery: groups are recovered
// from element-order counts, extensions from explicit cocycle searches.

#include "kkfilt/fg_group.hpp"

#include <map>
#include <vector>

namespace kkf::oracle {

// Every finite abelian group of order <= max_order, one per isomorphism class.
std::vector<FgGroup> all_finite_groups(long max_order);

// Reconstruct the isomorphism type from the multiset of element orders
// (partition conjugation per prime; no gcd/lcm normalization shared with the
// library's canonical-form code).
FgGroup group_from_orders(const std::vector<long>& orders);
// Same, from an order -> multiplicity histogram (for large enumerations).
FgGroup group_from_order_counts(const std::map<long, long>& counts);

// Hom(g, h) for finite g, h by enumerating all generator images.
FgGroup hom_of_finite(const FgGroup& g, const FgGroup& h);

// Ext(Z/a, h) for finite h by classifying carry cocycles Z/a x Z/a -> h up to
// coboundary, entirely by search. Requires |h|^(a-1) within budget.
FgGroup ext_of_cyclic(long a, const FgGroup& h);
bool ext_of_cyclic_feasible(long a, const FgGroup& h);

}  // namespace kkf::oracle
