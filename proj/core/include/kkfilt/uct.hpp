#pragma once

#include "kkfilt/tower.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kkf {

// Graded K-theory input. The A side is an increasing tower per degree (stage
// groups are the K-groups along a filtration by subalgebras with f.g.
// K-theory), the B side a closed-form group per degree. Degree arithmetic is
// mod 2 throughout; the assembled invariants depend only on these four groups.
struct KTheoryData {
    DirectTower ka0, ka1;
    GroupExpr kb0, kb1;
    std::string name;
};

struct ExtensionDescriptor;

enum class Split { Yes, No, Unknown };
std::string split_str(Split s);

// A group-valued answer at a diagram node.
//   Expr:      closed form; `profile` is exact.
//   Pro:       value not identified (opaque pro-object, or certified facts
//              only); `note` and `certificates` carry the evidence.
//   Extension: known as the middle of a short exact sequence (see
//              `extension`); summary invariants are derived from the ends
//              where sound, so `cardinality`/`exponent` may be engaged while
//              the full `profile` is not.
struct GroupValue {
    enum class Shape { Expr, Pro, Extension };
    Shape shape = Shape::Expr;
    GroupExpr expr;                                         // Expr shape
    std::shared_ptr<const ExtensionDescriptor> extension;   // Extension shape
    std::string note;
    TriBool nonzero = TriBool::Unknown;
    std::optional<InvariantProfile> profile;   // engaged only when every field is exact
    std::optional<Cardinality> cardinality;    // may be engaged without `profile`
    std::optional<ExponentInfo> exponent;
    std::vector<Certificate> certificates;

    std::string str() const;
};

// 0 -> sub -> (the described group) -> quotient -> 0. A Yes/No `split`
// verdict carries its reason; No additionally carries the literature
// citation the verdict is imported from.
struct ExtensionDescriptor {
    GroupValue sub, quotient;
    Split split = Split::Unknown;
    std::string reason, citation;
};

// KK_n(A_i, B) at a finite stage: the split sum
// (+)_j Hom(K_j(A_i), K_{j+n}(B)) (+) (+)_j Ext(K_j(A_i), K_{j+n+1}(B)).
// Always a closed form since stage groups are f.g.
GroupValue stage_kk(const KTheoryData& data, int i, int n);

// KK_n(A, B). When the fine-structure subgroup vanishes and the component
// limits are identified this is a closed form; otherwise it is described by
// 0 -> (closure of zero) -> KK_n -> (maximal Hausdorff quotient) -> 0.
GroupValue kk_group(const KTheoryData& data, int n, int window = kDefaultWindow);

// Fine structure subgroup Z_n = closure of zero in KK_n: the sum over j of
// the pure parts Pext(K_j(A), K_{j+n+1}(B)).
struct FineStructureReport {
    int degree = 0;
    TowerVerdict verdict = TowerVerdict::Inconclusive;  // combined over components
    GroupValue value;
    std::vector<std::string> labels;  // component names, aligned with `parts`
    std::vector<PextResult> parts;
};
FineStructureReport fine_structure(const KTheoryData& data, int n, int window = kDefaultWindow);

// KL_n = KK_n / Z_n, computed as the limit of the stage-KK tower (limits
// commute with the finite graded sum, so componentwise).
GroupValue kl_group(const KTheoryData& data, int n, int window = kDefaultWindow);

// Symbolic arrow of the six-group diagram; `matrix` is engaged only on
// finite models, where the groups are explicit.
struct MapDescriptor {
    std::string name;        // sigma rho delta gamma psi phi lim-delta gamma-tilde
    std::string from, to;    // node keys
    std::string kind;        // provenance, e.g. "inclusion of the Ext summand"
    std::optional<FgHom> matrix;
};

enum class NodeStatus { Verified, RuleDerived, Unchecked };
std::string node_status_str(NodeStatus s);

struct SequenceStatus {
    std::string name;  // milnor-row uct-row jensen-column limit-column
    NodeStatus status = NodeStatus::Unchecked;
    std::string note;
};

struct ObstructionReport {
    enum class Verdict { Vanishes, NonzeroCited, Unknown };
    std::string which;  // "milnor" | "jensen"
    Verdict verdict = Verdict::Unknown;
    std::string reason;
    std::string citation;    // engaged for NonzeroCited
    std::string order_note;  // extra cited metadata (e.g. infinite order)
    std::vector<std::string> component_notes;
};
std::string obstruction_verdict_str(ObstructionReport::Verdict v);

// m: class of the row 0 -> lim1 KK_{n+1} -> KK_n -> lim KK_n -> 0.
// j: class of the column 0 -> Z_n -> Ext -> lim Ext -> 0.
// Vanishing is decided by the pure-part rules (zero or divisible kernel);
// nonvanishing is asserted only on the divisible-torsion pattern whose
// non-splitting is imported from the literature. A Vanishes(m) verdict with
// j not vanishing contradicts j = (lim delta_i)^* m and is fatal.
ObstructionReport milnor_obstruction(const KTheoryData& data, int window = kDefaultWindow);
ObstructionReport jensen_obstruction(const KTheoryData& data, int window = kDefaultWindow);

struct TopologyReport {
    int degree = 0;
    TriBool hausdorff_kk = TriBool::Unknown;        // iff the closure of zero vanishes
    TriBool zadic_discrete_ext = TriBool::Unknown;  // iff the Ext part has finite exponent
    TriBool jensen_discrete = TriBool::Unknown;     // iff restriction kernels die out
    // per Ext component: restriction-kernel profile along the tower
    std::vector<std::pair<std::string, std::vector<KernelDescriptor>>> kernels;
    std::vector<std::string> notes;
};
TopologyReport topology_report(const KTheoryData& data, int n, int window = kDefaultWindow);

// The six-group diagram in degree n:
//
//                                   0 -> lim Ext
//                                            |  lim-delta
//   0 -> lim1 KK  --sigma-->  KK  --rho-->  lim KK  -> 0      (Milnor row)
//            | psi            | id           |  gamma-tilde
//   0 ->    Ext   --delta-->  KK  --gamma-> Hom     -> 0      (UCT row)
//            | phi
//           lim Ext -> 0
//
// Node keys: lim1-kk kk lim-kk lim-ext ext hom. Exactness per sequence is
// Verified on finite models (element level), RuleDerived when the standard
// identifications apply with decided endpoints, Unchecked otherwise.
struct DiagramReport {
    int degree = 0;
    std::vector<std::pair<std::string, GroupValue>> nodes;
    std::vector<MapDescriptor> maps;
    std::vector<SequenceStatus> sequences;
    ObstructionReport milnor, jensen;
    TopologyReport topology;

    const GroupValue* node(const std::string& key) const;
    const MapDescriptor* map_named(const std::string& name) const;
    const SequenceStatus* sequence(const std::string& name) const;
};
DiagramReport kk_filtration_diagram(const KTheoryData& data, int n, int window = kDefaultWindow);

// Algebraic shadow of the lim1-comparison isomorphism: the Ext restriction
// towers are stagewise surjective (so their derived limit vanishes), hence
// the derived limit of the stage-KK tower must agree with that of the Hom
// tower. Both sides are computed independently and compared per degree.
struct Lim1GammaReport {
    int window = 0;
    struct Entry {
        int degree = 0;
        bool ext_surjective = false;
        TowerVerdict kk_lim1 = TowerVerdict::Inconclusive;
        TowerVerdict hom_lim1 = TowerVerdict::Inconclusive;
        bool match = false;
        std::vector<std::string> notes;
    };
    std::vector<Entry> entries;  // degrees 0 and 1
    bool all_match = false;
};
Lim1GammaReport lim1_gamma_check(const KTheoryData& data, int window = kDefaultWindow);

// Element-level verification on stable data with finite stage groups and
// finite kB: builds every diagram group as an explicit FgGroup, then checks
// commutativity, exactness of all rows/columns, and the pullback property of
// the right-hand square (unique mediator through Ext for every compatible
// pair). The exact lattice route always runs; element enumeration also runs
// when |KK| * |lim Ext| stays small.
struct FiniteModelReport {
    bool pass = false;
    struct Degree {
        int degree = 0;
        FgGroup kk, hom, ext;
        bool commutes = false;
        bool rows_exact = false;
        bool columns_exact = false;
        bool pullback = false;
        bool pullback_unique = false;
        Integer pairs_checked;  // compatible pairs enumerated; 0 = lattice route only
        std::string failure;    // first counterexample, empty when clean
    };
    std::vector<Degree> degrees;
};
FiniteModelReport finite_model_check(const KTheoryData& data);

}  // namespace kkf
