#pragma once

#include "kkfilt/group_expr.hpp"
#include "kkfilt/hom_ext.hpp"
#include "kkfilt/subgroup.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace kkf {

inline constexpr int kDefaultWindow = 12;
// finite-support truncation level = window + margin; also the probe depth
inline constexpr int kTruncationMargin = 4;

// Increasing system G_1 -> G_2 -> ... with injective structure maps.
// Immutable; stages are memoized and safe to request concurrently.
class DirectTower {
public:
    enum class Rule { Stable, Prufer, Elementary, Free, Affine, ExplicitFinite, Custom };

    FgGroup stage(int i) const;  // 1-based
    FgHom map(int i) const;      // stage(i) -> stage(i+1)

    Rule rule() const;
    const std::string& name() const;
    // a stage-shift morphism commuting with the structure maps exists (all
    // catalog rules; custom towers only when declared)
    bool shift_invariant() const;
    // maps are identities from this stage on (0 = no such stage known)
    int stable_from() const;
    const Integer& p() const;
    const Integer& a() const;
    const Integer& b() const;

    struct Impl;
    explicit DirectTower(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

DirectTower tower_stable(const FgGroup& g);
DirectTower tower_prufer(const Integer& p);
DirectTower tower_elementary(const Integer& p, int k);
DirectTower tower_free(int step);
DirectTower tower_affine(const Integer& p, const Integer& a, const Integer& b);
DirectTower tower_explicit(const std::vector<FgGroup>& stages, const std::vector<FgHom>& maps);
DirectTower tower_custom(std::string name, std::function<FgGroup(int)> stage_fn,
                         std::function<FgHom(int)> map_fn, bool shift_invariant = false);

struct ColimitResult {
    bool known = false;
    GroupExpr value;
    std::string note;
};
ColimitResult colimit_group(const DirectTower& t);

// Finite-support truncation of an expression: atom terms up to `level`.
// Empty when the expression has product/completion atoms.
std::optional<FgGroup> truncate_expr(const GroupExpr& h, int level);
// Inclusion of the level-l1 truncation into the level-l2 one (l1 <= l2),
// aligned atom coordinate by atom coordinate.
FgHom truncation_inclusion(const GroupExpr& h, int l1, int l2);

// Decreasing system H_1 <- H_2 <- ... . Stages carry closed-form expressions;
// finite models (exact, or finite-support truncations at a level) back the
// image computations.
class InverseTower {
public:
    enum class Prov { HomOfTower, ExtOfTower, QuotientModP, ExplicitFg, Custom };

    Prov provenance() const;
    const std::string& name() const;
    GroupExpr stage_expr(int i) const;

    bool models_available() const;  // finite models exist at every level
    bool truncated() const;         // models are finite-support truncations
    FgGroup model_stage(int i, int level) const;
    FgHom model_map(int i, int level) const;  // model_stage(i+1) -> model_stage(i)

    bool shift_invariant() const;
    int stable_from() const;
    const GroupExpr& h() const;
    const Integer& p() const;
    const DirectTower* base_tower() const;  // Hom/Ext provenance only

    struct Impl;
    explicit InverseTower(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

InverseTower apply_hom(const DirectTower& t, const GroupExpr& h);
InverseTower apply_ext(const DirectTower& t, const GroupExpr& h);
InverseTower quotient_tower(const GroupExpr& h, const Integer& p);
InverseTower inverse_explicit(const std::vector<FgGroup>& stages,
                              const std::vector<FgHom>& maps);
InverseTower inverse_custom(std::string name, std::function<FgGroup(int)> stage_fn,
                            std::function<FgHom(int)> map_fn, bool shift_invariant = false);

// Im(H_{stage+k} -> H_stage) for k = 0..window, as exact subgroups of the
// stage model. Weakly decreasing by construction (checked).
std::vector<Subgroup> image_chain(const InverseTower& t, int stage, int window);
std::vector<Subgroup> image_chain(const InverseTower& t, int stage, int window, int level);

// Finite witness for a tower-level claim. Replayable: verify_certificate
// recomputes the recorded chains and confirms the verdict without trusting
// the original run.
struct Certificate {
    enum class Kind { MLStabilized, SelfSimilarStrictDescent, InconclusiveWindow, RuleBacked };
    Kind kind = Kind::InconclusiveWindow;
    int window = 0;
    int stage = 0;      // MLStabilized: images constant from this chain index on
    std::string shift;  // shift-rule / backing-rule description

    struct ChainEvidence {
        int stage = 0;        // probed stage
        int approx_level = 0; // nonzero: chain intersected with this approximant
        std::vector<std::string> images;  // HNF bases, k = 0..window
        std::vector<Integer> orders;      // image orders (0 = infinite)
        int stabilized_at = -1;           // -1 = strictly descending through window
    };
    std::vector<ChainEvidence> evidence;

    std::string str() const;
};

Certificate ml_status(const InverseTower& t, int window);
bool verify_certificate(const InverseTower& t, const Certificate& c);

struct LimResult {
    bool known = false;   // false: opaque pro-object
    GroupExpr value;
    std::string pro_note;
    Certificate certificate;
};
LimResult lim_group(const InverseTower& t, int window);

enum class TowerVerdict { Zero, NonzeroCertified, Inconclusive };
std::string verdict_str(TowerVerdict v);

struct Lim1Result {
    TowerVerdict verdict = TowerVerdict::Inconclusive;
    std::optional<GroupExpr> value_hint;
    Certificate certificate;
};
Lim1Result lim1(const InverseTower& t, int window);

enum class PextRule { Zero, Divisible, NoVerdict };
PextRule pext_rules(const InvariantProfile& gprofile, const InvariantProfile& hprofile);

struct PextResult {
    TowerVerdict verdict = TowerVerdict::Inconclusive;
    std::optional<GroupExpr> value_hint;
    bool divisible_hint = false;  // the value is divisible (torsionfree input)
    std::string rule_note;
    Certificate certificate;
};
PextResult pext(const DirectTower& t, const GroupExpr& h, int window);

struct ZadicReport {
    GroupExpr closure;  // intersection of n*E over all n
    bool trivial = false;
    bool consistent = false;
    std::string note;
};
// Cross-checks the intersection-of-multiples closure of the Ext value against
// the Pext verdict; disagreement is a fatal diagnostic.
ZadicReport zadic_closure_check(const GroupExpr& ext_value, const PextResult& pr);

struct KernelDescriptor {
    int stage = 0;
    TriBool trivial = TriBool::Unknown;
    std::string note;
};
std::vector<KernelDescriptor> jensen_kernel_profile(const DirectTower& t, const GroupExpr& h,
                                                    int window);

}  // namespace kkf
