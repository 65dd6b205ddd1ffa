#include "report.hpp"

#include "kkfilt/hom_ext.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

namespace kkf::cli {
namespace {

// ---- serializers ------------------------------------------------------
// Verdict-like fields are serialized through `mark`, which trips the strict
// gate on Inconclusive/Unknown. Informational tribools (profile fields) are
// serialized directly and never trip it.

std::string tri(TriBool t) { return tribool_str(t); }

std::string mark(Report& rep, TriBool t) {
    if (t == TriBool::Unknown) rep.inconclusive = true;
    return tri(t);
}

std::string mark(Report& rep, TowerVerdict v) {
    if (v == TowerVerdict::Inconclusive) rep.inconclusive = true;
    return verdict_str(v);
}

std::string mark(Report& rep, ObstructionReport::Verdict v) {
    if (v == ObstructionReport::Verdict::Unknown) rep.inconclusive = true;
    return obstruction_verdict_str(v);
}

std::string mark(Report& rep, Split s) {
    if (s == Split::Unknown) rep.inconclusive = true;
    return split_str(s);
}

std::string mark(Report& rep, NodeStatus s) {
    if (s == NodeStatus::Unchecked) rep.inconclusive = true;
    return node_status_str(s);
}

std::string kind_str(Certificate::Kind k) {
    switch (k) {
        case Certificate::Kind::MLStabilized: return "ml-stabilized";
        case Certificate::Kind::SelfSimilarStrictDescent: return "self-similar-strict-descent";
        case Certificate::Kind::InconclusiveWindow: return "inconclusive-window";
        case Certificate::Kind::RuleBacked: return "rule-backed";
    }
    return "inconclusive-window";
}

std::string rule_str(DirectTower::Rule r) {
    switch (r) {
        case DirectTower::Rule::Stable: return "stable";
        case DirectTower::Rule::Prufer: return "prufer";
        case DirectTower::Rule::Elementary: return "elementary";
        case DirectTower::Rule::Free: return "free";
        case DirectTower::Rule::Affine: return "affine";
        case DirectTower::Rule::ExplicitFinite: return "explicit";
        case DirectTower::Rule::Custom: return "custom";
    }
    return "custom";
}

ordered_json cardinality_json(const Cardinality& c) {
    ordered_json j;
    switch (c.kind) {
        case Cardinality::Kind::Finite:
            j["kind"] = "finite";
            j["value"] = c.value.str();
            break;
        case Cardinality::Kind::CountablyInfinite: j["kind"] = "countably-infinite"; break;
        case Cardinality::Kind::Continuum: j["kind"] = "continuum"; break;
    }
    return j;
}

ordered_json exponent_json(const ExponentInfo& e) {
    ordered_json j;
    j["finite"] = e.finite;
    if (e.finite) j["value"] = e.value.str();
    return j;
}

ordered_json profile_json(const InvariantProfile& p) {
    ordered_json j;
    j["cardinality"] = cardinality_json(p.cardinality);
    j["exponent"] = exponent_json(p.exponent);
    j["divisible"] = p.divisible;
    j["torsionfree"] = p.torsionfree;
    j["reduced"] = tri(p.reduced);
    j["sum-of-cyclics"] = tri(p.sum_of_cyclics);
    j["algebraically-compact"] = tri(p.algebraically_compact);
    return j;
}

ordered_json cert_json(const Certificate& c) {
    ordered_json j;
    j["kind"] = kind_str(c.kind);
    j["window"] = c.window;
    j["stage"] = c.stage;
    if (!c.shift.empty()) j["shift"] = c.shift;
    ordered_json ev = ordered_json::array();
    for (const auto& e : c.evidence) {
        ordered_json je;
        je["stage"] = e.stage;
        if (e.approx_level) je["approx-level"] = e.approx_level;
        je["images"] = e.images;
        ordered_json orders = ordered_json::array();
        for (const Integer& o : e.orders) orders.push_back(o.str());
        je["orders"] = orders;
        je["stabilized-at"] = e.stabilized_at;
        ev.push_back(je);
    }
    if (!ev.empty()) j["evidence"] = ev;
    return j;
}

ordered_json fg_json(const FgGroup& g) {
    ordered_json j;
    j["value"] = expr_from_fg(g).str();
    j["rank"] = g.rank;
    ordered_json t = ordered_json::array();
    for (const Integer& d : g.torsion) t.push_back(d.str());
    j["invariant-factors"] = t;
    if (g.is_finite()) j["order"] = g.order().str();
    return j;
}

ordered_json value_json(Report& rep, const GroupValue& v) {
    ordered_json j;
    switch (v.shape) {
        case GroupValue::Shape::Expr: j["shape"] = "expr"; break;
        case GroupValue::Shape::Pro: j["shape"] = "pro"; break;
        case GroupValue::Shape::Extension: j["shape"] = "extension"; break;
    }
    j["value"] = v.str();
    if (!v.note.empty()) j["note"] = v.note;
    j["nonzero"] = tri(v.nonzero);
    if (v.cardinality) j["cardinality"] = cardinality_json(*v.cardinality);
    if (v.exponent) j["exponent"] = exponent_json(*v.exponent);
    if (v.profile) j["profile"] = profile_json(*v.profile);
    if (v.shape == GroupValue::Shape::Extension && v.extension) {
        ordered_json e;
        e["sub"] = value_json(rep, v.extension->sub);
        e["quotient"] = value_json(rep, v.extension->quotient);
        e["split"] = mark(rep, v.extension->split);
        e["reason"] = v.extension->reason;
        if (!v.extension->citation.empty()) e["citation"] = v.extension->citation;
        j["extension"] = e;
    }
    if (!v.certificates.empty()) {
        ordered_json cs = ordered_json::array();
        for (const Certificate& c : v.certificates) cs.push_back(cert_json(c));
        j["certificates"] = cs;
    }
    return j;
}

ordered_json pext_json(Report& rep, const PextResult& pr) {
    ordered_json j;
    j["verdict"] = mark(rep, pr.verdict);
    if (pr.value_hint) j["value-hint"] = pr.value_hint->str();
    j["divisible-hint"] = pr.divisible_hint;
    if (!pr.rule_note.empty()) j["rule-note"] = pr.rule_note;
    j["certificate"] = cert_json(pr.certificate);
    return j;
}

ordered_json kernel_json(const std::vector<KernelDescriptor>& ks) {
    ordered_json arr = ordered_json::array();
    for (const KernelDescriptor& k : ks) {
        ordered_json j;
        j["stage"] = k.stage;
        j["trivial"] = tri(k.trivial);
        j["note"] = k.note;
        arr.push_back(j);
    }
    return arr;
}

ordered_json topology_json(Report& rep, const TopologyReport& t) {
    ordered_json j;
    j["degree"] = t.degree;
    j["hausdorff-kk"] = mark(rep, t.hausdorff_kk);
    j["multiples-discrete-ext"] = mark(rep, t.zadic_discrete_ext);
    j["kernel-filtration-discrete"] = mark(rep, t.jensen_discrete);
    ordered_json ks = ordered_json::array();
    for (const auto& [label, profile] : t.kernels) {
        ordered_json e;
        e["component"] = label;
        e["profile"] = kernel_json(profile);
        ks.push_back(e);
    }
    j["kernels"] = ks;
    j["notes"] = t.notes;
    return j;
}

ordered_json obstruction_json(Report& rep, const ObstructionReport& o) {
    ordered_json j;
    j["which"] = o.which;
    j["verdict"] = mark(rep, o.verdict);
    j["reason"] = o.reason;
    if (!o.citation.empty()) j["citation"] = o.citation;
    if (!o.order_note.empty()) j["order-note"] = o.order_note;
    j["components"] = o.component_notes;
    return j;
}

ordered_json fine_json(Report& rep, const FineStructureReport& f) {
    ordered_json j;
    j["verdict"] = mark(rep, f.verdict);
    j["value"] = value_json(rep, f.value);
    ordered_json parts = ordered_json::array();
    for (size_t i = 0; i < f.parts.size(); ++i) {
        ordered_json p;
        p["component"] = f.labels[i];
        p["pext"] = pext_json(rep, f.parts[i]);
        parts.push_back(p);
    }
    j["parts"] = parts;
    return j;
}

ordered_json inverse_tower_json(Report& rep, const InverseTower& t, int window) {
    ordered_json j;
    ordered_json stages = ordered_json::array();
    for (int i = 1; i <= 4; ++i) stages.push_back(t.stage_expr(i).str());
    j["stages"] = stages;
    j["models"] = t.models_available();
    j["truncated"] = t.truncated();
    LimResult lim = lim_group(t, window);
    ordered_json jl;
    jl["known"] = lim.known;
    if (lim.known)
        jl["value"] = lim.value.str();
    else
        jl["pro-note"] = lim.pro_note;
    jl["certificate"] = cert_json(lim.certificate);
    j["limit"] = jl;
    Lim1Result l1 = lim1(t, window);
    ordered_json j1;
    j1["verdict"] = mark(rep, l1.verdict);
    if (l1.value_hint) j1["value-hint"] = l1.value_hint->str();
    j1["certificate"] = cert_json(l1.certificate);
    j["lim1"] = j1;
    return j;
}

ordered_json direct_tower_json(const DirectTower& t) {
    ordered_json j;
    j["text"] = tower_text(t);
    j["rule"] = rule_str(t.rule());
    j["shift-invariant"] = t.shift_invariant();
    j["stable-from"] = t.stable_from();
    ordered_json stages = ordered_json::array();
    for (int i = 1; i <= 4; ++i) stages.push_back(expr_from_fg(t.stage(i)).str());
    j["stages"] = stages;
    ColimitResult colim = colimit_group(t);
    ordered_json jc;
    jc["known"] = colim.known;
    if (colim.known) jc["value"] = colim.value.str();
    if (!colim.note.empty()) jc["note"] = colim.note;
    j["colimit"] = jc;
    return j;
}

ordered_json diagram_json(Report& rep, const DiagramReport& d) {
    ordered_json j;
    j["degree"] = d.degree;
    ordered_json nodes = ordered_json::array();
    for (const auto& [key, value] : d.nodes) {
        ordered_json n;
        n["key"] = key;
        n["group"] = value_json(rep, value);
        nodes.push_back(n);
    }
    j["nodes"] = nodes;
    ordered_json maps = ordered_json::array();
    for (const MapDescriptor& m : d.maps) {
        ordered_json jm;
        jm["name"] = m.name;
        jm["from"] = m.from;
        jm["to"] = m.to;
        jm["kind"] = m.kind;
        if (m.matrix) jm["matrix"] = m.matrix->m.str();
        maps.push_back(jm);
    }
    j["maps"] = maps;
    ordered_json seqs = ordered_json::array();
    for (const SequenceStatus& s : d.sequences) {
        ordered_json js;
        js["name"] = s.name;
        js["status"] = mark(rep, s.status);
        js["note"] = s.note;
        seqs.push_back(js);
    }
    j["sequences"] = seqs;
    ordered_json obs;
    obs["milnor"] = obstruction_json(rep, d.milnor);
    obs["jensen"] = obstruction_json(rep, d.jensen);
    j["obstructions"] = obs;
    j["topology"] = topology_json(rep, d.topology);
    return j;
}

ordered_json lim1_gamma_json(Report& rep, const Lim1GammaReport& r) {
    ordered_json j;
    j["window"] = r.window;
    ordered_json es = ordered_json::array();
    for (const auto& e : r.entries) {
        ordered_json je;
        je["degree"] = e.degree;
        je["ext-restrictions-surjective"] = e.ext_surjective;
        je["stage-kk-lim1"] = mark(rep, e.kk_lim1);
        je["hom-lim1"] = mark(rep, e.hom_lim1);
        je["match"] = e.match;
        je["notes"] = e.notes;
        es.push_back(je);
    }
    j["entries"] = es;
    j["all-match"] = r.all_match;
    return j;
}

ordered_json kdata_json(const KTheoryData& d) {
    ordered_json j;
    j["K0A"] = tower_text(d.ka0);
    j["K1A"] = tower_text(d.ka1);
    j["K0B"] = d.kb0.str();
    j["K1B"] = d.kb1.str();
    return j;
}

// ---- per-command handlers ---------------------------------------------

void run_fg_pair(const JobSpec& spec, Report& rep, ordered_json& res) {
    bool is_hom = spec.command == "fg-hom";
    const FgGroup g = *spec.source->as_fg();
    res["source"] = spec.source->str();
    res["target"] = spec.target->str();
    std::optional<FgGroup> h = spec.target->as_fg();
    ordered_json body;
    if (h) {
        FgGroup value = is_hom ? hom_group(g, *h).group : ext_group(g, *h).group;
        body = fg_json(value);
    } else {
        GroupExpr value = is_hom ? hom_from_fg(g, *spec.target) : ext_from_fg(g, *spec.target);
        body["value"] = value.str();
        body["profile"] = profile_json(invariants(value));
    }
    res[is_hom ? "hom" : "ext"] = body;
    rep.summary = (is_hom ? std::string("Hom(") : std::string("Ext(")) + spec.source->str() +
                  ", " + spec.target->str() + ") = " + body["value"].get<std::string>() + "\n";
}

// the intersection-of-multiples cross-check runs whenever the Ext value
// itself is identified: directly for f.g. colimits, and through the limit
// when the pure part is zero (the Jensen sequence then collapses)
std::optional<GroupExpr> decidable_ext_value(const DirectTower& t, const GroupExpr& h,
                                             const PextResult& pr, int window) {
    ColimitResult colim = colimit_group(t);
    if (colim.known && colim.value.as_fg()) return ext_from_fg(*colim.value.as_fg(), h);
    if (pr.verdict == TowerVerdict::Zero) {
        LimResult lim = lim_group(apply_ext(t, h), window);
        if (lim.known) return lim.value;
    }
    return std::nullopt;
}

void run_tower_analyze(const JobSpec& spec, Report& rep, ordered_json& res) {
    res["tower"] = direct_tower_json(*spec.tower);
    std::ostringstream sum;
    sum << "tower " << tower_text(*spec.tower) << "\n";
    if (spec.target) {
        res["target"] = spec.target->str();
        InverseTower ht = apply_hom(*spec.tower, *spec.target);
        InverseTower et = apply_ext(*spec.tower, *spec.target);
        res["hom-tower"] = inverse_tower_json(rep, ht, spec.window);
        res["ext-tower"] = inverse_tower_json(rep, et, spec.window);
        // image-chain sample at the requested truncation level
        int level = spec.truncation ? spec.truncation : spec.window + kTruncationMargin;
        auto chain_json = [&](const InverseTower& it) {
            ordered_json arr = ordered_json::array();
            if (!it.models_available()) return arr;
            std::vector<Subgroup> chain = it.truncated()
                                              ? image_chain(it, 1, spec.window, level)
                                              : image_chain(it, 1, spec.window);
            for (const Subgroup& s : chain) arr.push_back(s.order().str());
            return arr;
        };
        res["hom-tower"]["stage1-image-orders"] = chain_json(ht);
        res["ext-tower"]["stage1-image-orders"] = chain_json(et);
        auto lim_text = [&](const char* key) {
            const ordered_json& jl = res[key]["limit"];
            return jl["known"].get<bool>() ? jl["value"].get<std::string>()
                                           : std::string("(pro-object)");
        };
        sum << "  lim Hom = " << lim_text("hom-tower")
            << ", lim1 Hom: " << res["hom-tower"]["lim1"]["verdict"].get<std::string>() << "\n";
        sum << "  lim Ext = " << lim_text("ext-tower")
            << ", lim1 Ext: " << res["ext-tower"]["lim1"]["verdict"].get<std::string>() << "\n";
    } else {
        sum << "  colimit: "
            << (res["tower"]["colimit"]["known"].get<bool>()
                    ? res["tower"]["colimit"]["value"].get<std::string>()
                    : std::string("(not identified)"))
            << "\n";
    }
    rep.summary = sum.str();
}

void run_pext(const JobSpec& spec, Report& rep, ordered_json& res) {
    res["tower"] = direct_tower_json(*spec.tower);
    res["target"] = spec.target->str();
    PextResult pr = pext(*spec.tower, *spec.target, spec.window);
    res["pext"] = pext_json(rep, pr);
    if (std::optional<GroupExpr> ext = decidable_ext_value(*spec.tower, *spec.target, pr,
                                                           spec.window)) {
        ZadicReport z = zadic_closure_check(*ext, pr);
        ordered_json jz;
        jz["ext-value"] = ext->str();
        jz["closure"] = z.closure.str();
        jz["trivial"] = z.trivial;
        jz["consistent"] = z.consistent;
        jz["note"] = z.note;
        res["multiples-closure"] = jz;
    }
    res["kernel-profile"] = kernel_json(jensen_kernel_profile(*spec.tower, *spec.target,
                                                              spec.window));
    rep.summary = "Pext over " + tower_text(*spec.tower) + " with target " + spec.target->str() +
                  ": " + verdict_str(pr.verdict) + "\n";
}

void run_uct_report(const JobSpec& spec, Report& rep, ordered_json& res) {
    const KTheoryData& d = *spec.kdata;
    res["input"] = kdata_json(d);
    std::ostringstream sum;
    ordered_json degrees = ordered_json::array();
    for (int n = 0; n < 2; ++n) {
        ordered_json jd;
        jd["degree"] = n;
        GroupValue kk = kk_group(d, n, spec.window);
        GroupValue kl = kl_group(d, n, spec.window);
        FineStructureReport fine = fine_structure(d, n, spec.window);
        jd["kk"] = value_json(rep, kk);
        jd["fine-structure"] = fine_json(rep, fine);
        jd["hausdorff-quotient"] = value_json(rep, kl);
        ordered_json stages = ordered_json::array();
        for (int i = 1; i <= 3; ++i) stages.push_back(stage_kk(d, i, n).str());
        jd["stage-samples"] = stages;
        jd["topology"] = topology_json(rep, topology_report(d, n, spec.window));
        degrees.push_back(jd);
        sum << "degree " << n << ": KK = " << kk.str() << "; fine structure "
            << verdict_str(fine.verdict) << "; KK/closure = " << kl.str() << "\n";
    }
    res["degrees"] = degrees;
    ordered_json obs;
    ObstructionReport m = milnor_obstruction(d, spec.window);
    ObstructionReport jo = jensen_obstruction(d, spec.window);
    obs["milnor"] = obstruction_json(rep, m);
    obs["jensen"] = obstruction_json(rep, jo);
    res["obstructions"] = obs;
    res["lim1-comparison"] = lim1_gamma_json(rep, lim1_gamma_check(d, spec.window));
    sum << "milnor: " << obstruction_verdict_str(m.verdict)
        << "; jensen: " << obstruction_verdict_str(jo.verdict) << "\n";
    rep.summary = sum.str();
}

void run_diagram_check(const JobSpec& spec, Report& rep, ordered_json& res) {
    const KTheoryData& d = *spec.kdata;
    res["input"] = kdata_json(d);
    std::ostringstream sum;
    ordered_json degrees = ordered_json::array();
    for (int n = 0; n < 2; ++n) {
        DiagramReport dr = kk_filtration_diagram(d, n, spec.window);
        degrees.push_back(diagram_json(rep, dr));
        sum << "degree " << n << ":";
        for (const SequenceStatus& s : dr.sequences)
            sum << " " << s.name << "=" << node_status_str(s.status);
        sum << "\n";
    }
    res["degrees"] = degrees;
    rep.summary = sum.str();
}

}  // namespace

Report run_job(const JobSpec& spec) {
    if (spec.command == "catalog-run") return run_catalog(spec.catalog, spec.window);
    Report rep;
    JobSpec echo = spec;  // emission options do not belong in the payload
    echo.strict = false;
    echo.summary = false;
    echo.out.clear();
    rep.payload["schema"] = 1;
    rep.payload["command"] = spec.command;
    rep.payload["job"] = echo.canonical_text();
    ordered_json opts;
    opts["window"] = spec.window;
    opts["truncation"] = spec.truncation ? spec.truncation : spec.window + kTruncationMargin;
    rep.payload["options"] = opts;
    ordered_json res;
    if (spec.command == "fg-hom" || spec.command == "fg-ext")
        run_fg_pair(spec, rep, res);
    else if (spec.command == "tower-analyze")
        run_tower_analyze(spec, rep, res);
    else if (spec.command == "pext")
        run_pext(spec, rep, res);
    else if (spec.command == "uct-report")
        run_uct_report(spec, rep, res);
    else
        run_diagram_check(spec, rep, res);
    rep.payload["result"] = res;
    return rep;
}

int execute(const JobSpec& spec, std::ostream& out_stream, std::ostream& err_stream) {
    Report rep;
    try {
        rep = run_job(spec);
    } catch (const CliError& e) {
        err_stream << "error: " << e.what() << " (column " << e.column << ")\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err_stream << "error: " << e.what() << "\n";
        return 1;
    } catch (const internal_error& e) {
        err_stream << "internal invariant violation: " << e.what() << "\n";
        return 3;
    }

    std::string text = rep.payload.dump(2) + "\n";
    if (!spec.out.empty()) {
        std::ofstream f(spec.out, std::ios::binary);
        f << text;
        if (!f) {
            err_stream << "error: cannot write report to '" << spec.out << "'\n";
            return 4;
        }
        if (spec.summary) out_stream << rep.summary;
    } else {
        out_stream << text;
        if (spec.summary) err_stream << rep.summary;
    }
    if (!out_stream) return 4;

    if (rep.mismatch && !spec.summary) err_stream << rep.summary;  // the expected/got diff
    return exit_code(rep, spec.strict);
}

int exit_code(const Report& rep, bool strict) {
    if (rep.mismatch) return 3;
    if (strict && rep.inconclusive) return 2;
    return 0;
}

}  // namespace kkf::cli
