#include "jobspec.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>
#include <vector>

namespace kkf::cli {
namespace {

struct Token {
    std::string text;
    int column;  // 1-based start position in the job line
};

bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

// Whitespace-separated tokens; parentheses and brackets protect their
// interior, so "InfSum(2; n)" or "[1 0, 0 1]" stay single tokens.
std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int depth = 0;
    size_t start = std::string::npos;
    for (size_t i = 0; i <= text.size(); ++i) {
        char c = i < text.size() ? text[i] : ' ';
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') {
            --depth;
            if (depth < 0) throw CliError("unbalanced ')' in job text", static_cast<int>(i) + 1);
        }
        bool space = (c == ' ' || c == '\t' || c == '\n') && depth == 0;
        if (!space && start == std::string::npos) start = i;
        if (space && start != std::string::npos) {
            out.push_back({text.substr(start, i - start), static_cast<int>(start) + 1});
            start = std::string::npos;
        }
    }
    if (depth != 0) throw CliError("unbalanced '(' in job text", static_cast<int>(text.size()));
    return out;
}

// Top-level split of an argument list on `sep`, honoring nesting.
std::vector<std::string> split_args(const std::string& body, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == sep && depth == 0) {
            parts.push_back(trim(body.substr(start, i - start)));
            start = i + 1;
        }
    }
    parts.push_back(trim(body.substr(start)));
    return parts;
}

// Strip an optional leading `name=` so named tower arguments like
// prufer(p=3) parse the same as prufer(3).
std::string strip_name(const std::string& arg) {
    size_t i = 0;
    while (i < arg.size() && ident_char(arg[i])) ++i;
    if (i > 0 && i < arg.size() && arg[i] == '=') return trim(arg.substr(i + 1));
    return arg;
}

Integer parse_int(const std::string& s, int col, const std::string& what) {
    std::string t = strip_name(trim(s));
    if (t.empty() || t.find_first_not_of("0123456789-") != std::string::npos ||
        (t.size() > 1 && t.find('-', 1) != std::string::npos))
        throw CliError("expected an integer for " + what + ", got '" + t + "'", col);
    try {
        return Integer(t);
    } catch (const std::exception&) {
        throw CliError("expected an integer for " + what + ", got '" + t + "'", col);
    }
}

GroupExpr parse_expr_at(const std::string& text, int col) {
    try {
        return parse_group_expr(text);
    } catch (const std::invalid_argument& e) {
        // the expression parser reports its own offset; fold it into the
        // absolute job-line column
        std::string msg = e.what();
        int inner = 0;
        size_t at = msg.find("at position ");
        if (at != std::string::npos) inner = std::atoi(msg.c_str() + at + 12);
        throw CliError(msg, col + std::max(inner - 1, 0));
    }
}

FgGroup parse_fg_at(const std::string& text, int col, const std::string& what) {
    GroupExpr e = parse_expr_at(text, col);
    std::optional<FgGroup> g = e.as_fg();
    if (!g) throw CliError(what + " must be a finitely generated group, got '" + text + "'", col);
    return *g;
}

// Affine exponent body: a*n+b | a*n | n+b | n | b.
std::pair<Integer, Integer> parse_affine_body(std::string s, int col) {
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    Integer a = 0, b = 0;
    size_t n = s.find('n');
    if (n == std::string::npos) {
        b = parse_int(s, col, "the affine exponent");
        return {a, b};
    }
    std::string head = s.substr(0, n), tail = s.substr(n + 1);
    if (head.empty())
        a = 1;
    else if (head.back() == '*')
        a = parse_int(head.substr(0, head.size() - 1), col, "the exponent slope");
    else
        throw CliError("expected 'a*n+b' in the affine exponent, got '" + s + "'", col);
    if (!tail.empty()) {
        if (tail[0] != '+' && tail[0] != '-')
            throw CliError("expected '+b' after 'n' in the affine exponent, got '" + s + "'", col);
        b = parse_int(tail[0] == '+' ? tail.substr(1) : tail, col, "the exponent offset");
    }
    return {a, b};
}

// Matrix literal: [r00 r01, r10 r11]; [] is the empty 0x0 matrix.
IntMatrix parse_matrix(const std::string& text, int col) {
    std::string t = trim(text);
    if (t.size() < 2 || t.front() != '[' || t.back() != ']')
        throw CliError("expected a bracketed matrix literal, got '" + t + "'", col);
    std::string body = trim(t.substr(1, t.size() - 2));
    std::vector<std::vector<Integer>> rows;
    if (!body.empty()) {
        for (const std::string& row : split_args(body, ',')) {
            std::vector<Integer> r;
            std::istringstream is(row);
            std::string cell;
            while (is >> cell) r.push_back(parse_int(cell, col, "a matrix entry"));
            rows.push_back(std::move(r));
        }
    }
    try {
        return IntMatrix::from_rows(rows);
    } catch (const std::invalid_argument& e) {
        throw CliError(std::string("bad matrix literal: ") + e.what(), col);
    }
}

DirectTower parse_tower_at(const std::string& raw, int col) {
    std::string text = trim(raw);
    if (text.empty()) throw CliError("expected a tower expression", col);
    size_t open = text.find('(');
    std::string head = open == std::string::npos ? text : trim(text.substr(0, open));
    static const std::set<std::string> kNames = {"stable", "prufer", "elementary",
                                                 "free",   "affine", "explicit"};
    if (open == std::string::npos || !kNames.count(head)) {
        // bare group expression: the constant tower on that group
        return tower_stable(parse_fg_at(text, col, "a constant tower"));
    }
    if (text.back() != ')') throw CliError("expected ')' closing '" + head + "(...'", col);
    std::string body = text.substr(open + 1, text.size() - open - 2);
    int bcol = col + static_cast<int>(open) + 1;
    try {
        if (head == "stable") return tower_stable(parse_fg_at(strip_name(body), bcol, "a stable stage"));
        if (head == "prufer") return tower_prufer(parse_int(body, bcol, "the prime"));
        if (head == "elementary") {
            std::vector<std::string> args = split_args(body, ',');
            if (args.size() != 2) throw CliError("elementary(p, k) takes two arguments", bcol);
            Integer k = parse_int(args[1], bcol, "the exponent");
            return tower_elementary(parse_int(args[0], bcol, "the prime"),
                                    static_cast<int>(k.convert_to<long>()));
        }
        if (head == "free") {
            Integer s = parse_int(body, bcol, "the rank step");
            return tower_free(static_cast<int>(s.convert_to<long>()));
        }
        if (head == "affine") {
            std::vector<std::string> args = split_args(body, ';');
            if (args.size() != 2) throw CliError("affine(p; a*n+b) takes 'p; a*n+b'", bcol);
            auto [a, b] = parse_affine_body(strip_name(args[1]), bcol);
            return tower_affine(parse_int(args[0], bcol, "the prime"), a, b);
        }
        // explicit(G1; [map]; G2; ...; Gk) -- k stages, k-1 bracketed maps,
        // constant from stage k on
        std::vector<std::string> args = split_args(body, ';');
        if (args.size() % 2 == 0 || args.empty())
            throw CliError("explicit(...) alternates groups and [maps], ending with a group", bcol);
        std::vector<FgGroup> stages;
        std::vector<IntMatrix> mats;
        for (size_t i = 0; i < args.size(); ++i) {
            if (i % 2 == 0)
                stages.push_back(parse_fg_at(strip_name(args[i]), bcol, "an explicit stage"));
            else
                mats.push_back(parse_matrix(args[i], bcol));
        }
        std::vector<FgHom> maps;
        for (size_t i = 0; i < mats.size(); ++i)
            maps.emplace_back(stages[i], stages[i + 1], mats[i]);
        return tower_explicit(stages, maps);
    } catch (const CliError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        // semantic rejection from the library (shape mismatch, non-injective
        // structure map, composite prime, ...)
        throw CliError(e.what(), bcol);
    }
}

const std::set<std::string> kCommands = {"fg-hom",     "fg-ext",        "tower-analyze", "pext",
                                         "uct-report", "diagram-check", "catalog-run"};
const std::set<std::string> kCatalogNames = {"remark24", "remark46", "example53", "thm52-suite",
                                             "finite-models"};

int parse_flag_int(const std::vector<Token>& toks, size_t& i, const std::string& name) {
    if (i + 1 >= toks.size()) throw CliError(name + " needs a value", toks[i].column);
    Integer v = parse_int(toks[i + 1].text, toks[i + 1].column, name);
    ++i;
    return static_cast<int>(v.convert_to<long>());
}

}  // namespace

DirectTower parse_tower(const std::string& text) { return parse_tower_at(text, 1); }

std::string tower_text(const DirectTower& t) {
    switch (t.rule()) {
        case DirectTower::Rule::Stable:
            return "stable(" + expr_from_fg(t.stage(1)).str() + ")";
        case DirectTower::Rule::Prufer:
        case DirectTower::Rule::Elementary:
        case DirectTower::Rule::Free:
        case DirectTower::Rule::Affine:
            return t.name();  // already printed in the input grammar
        case DirectTower::Rule::ExplicitFinite: {
            int last = std::max(t.stable_from(), 1);
            std::string out = "explicit(";
            for (int i = 1; i <= last; ++i) {
                if (i > 1) {
                    const IntMatrix& m = t.map(i - 1).m;
                    out += "; [";
                    for (int r = 0; r < m.rows(); ++r) {
                        if (r) out += ", ";
                        for (int c = 0; c < m.cols(); ++c) {
                            if (c) out += " ";
                            out += m.at(r, c).str();
                        }
                    }
                    out += "]; ";
                }
                out += expr_from_fg(t.stage(i)).str();
            }
            return out + ")";
        }
        case DirectTower::Rule::Custom:
            break;
    }
    throw std::invalid_argument("a custom tower has no input-grammar rendering");
}

JobSpec parse_input(const std::string& text) {
    std::vector<Token> toks = tokenize(text);
    if (toks.empty()) throw CliError("empty job text", 1);
    JobSpec spec;
    spec.command = toks[0].text;
    if (!kCommands.count(spec.command))
        throw CliError("unknown command '" + spec.command + "'", toks[0].column);

    std::vector<Token> positional;
    // named K-theory fields, collected then assembled
    std::optional<Token> k0a, k1a, k0b, k1b;
    int source_col = toks[0].column;

    for (size_t i = 1; i < toks.size(); ++i) {
        const Token& tk = toks[i];
        const std::string& s = tk.text;
        if (s == "--window") {
            spec.window = parse_flag_int(toks, i, "--window");
            if (spec.window < 4) throw CliError("--window must be at least 4", tk.column);
        } else if (s == "--truncation") {
            spec.truncation = parse_flag_int(toks, i, "--truncation");
            if (spec.truncation < 1) throw CliError("--truncation must be positive", tk.column);
        } else if (s == "--strict") {
            spec.strict = true;
        } else if (s == "--summary") {
            spec.summary = true;
        } else if (s == "--out") {
            if (i + 1 >= toks.size()) throw CliError("--out needs a path", tk.column);
            spec.out = toks[++i].text;
        } else if (s == "--source" || s == "--target" || s == "--tower" || s == "--name") {
            if (i + 1 >= toks.size()) throw CliError(s + " needs a value", tk.column);
            const Token& v = toks[i + 1];
            ++i;
            if (s == "--source") {
                source_col = v.column;
                spec.source = parse_expr_at(v.text, v.column);
            }
            if (s == "--target") spec.target = parse_expr_at(v.text, v.column);
            if (s == "--tower") spec.tower = parse_tower_at(v.text, v.column);
            if (s == "--name") spec.catalog = v.text;
        } else if (s.rfind("K0A=", 0) == 0 || s.rfind("K1A=", 0) == 0 || s.rfind("K0B=", 0) == 0 ||
                   s.rfind("K1B=", 0) == 0) {
            Token v{s.substr(4), tk.column + 4};
            if (s[1] == '0' && s[2] == 'A') k0a = v;
            if (s[1] == '1' && s[2] == 'A') k1a = v;
            if (s[1] == '0' && s[2] == 'B') k0b = v;
            if (s[1] == '1' && s[2] == 'B') k1b = v;
        } else if (s.rfind("--", 0) == 0) {
            throw CliError("unknown option '" + s + "'", tk.column);
        } else {
            positional.push_back(tk);
        }
    }

    if (spec.command == "fg-hom" || spec.command == "fg-ext") {
        if (!spec.source && !positional.empty()) {
            source_col = positional[0].column;
            spec.source = parse_expr_at(positional[0].text, positional[0].column);
            positional.erase(positional.begin());
        }
        if (!spec.target && !positional.empty()) {
            spec.target = parse_expr_at(positional[0].text, positional[0].column);
            positional.erase(positional.begin());
        }
        if (!spec.source || !spec.target)
            throw CliError(spec.command + " needs a source and a target group", toks[0].column);
        if (!spec.source->as_fg())
            throw CliError("the source group must be finitely generated", source_col);
    } else if (spec.command == "tower-analyze" || spec.command == "pext") {
        if (!spec.tower && !positional.empty()) {
            spec.tower = parse_tower_at(positional[0].text, positional[0].column);
            positional.erase(positional.begin());
        }
        if (!spec.target && !positional.empty()) {
            spec.target = parse_expr_at(positional[0].text, positional[0].column);
            positional.erase(positional.begin());
        }
        if (!spec.tower) throw CliError(spec.command + " needs a tower", toks[0].column);
        if (spec.command == "pext" && !spec.target)
            throw CliError("pext needs a target group", toks[0].column);
    } else if (spec.command == "uct-report" || spec.command == "diagram-check") {
        if (!k0a || !k1a || !k0b || !k1b)
            throw CliError(spec.command + " needs all four K-theory fields K0A, K1A, K0B, K1B",
                           toks[0].column);
        spec.kdata = KTheoryData{parse_tower_at(k0a->text, k0a->column),
                                 parse_tower_at(k1a->text, k1a->column),
                                 parse_expr_at(k0b->text, k0b->column),
                                 parse_expr_at(k1b->text, k1b->column), "job"};
    } else {  // catalog-run
        int name_col = toks[0].column;
        if (spec.catalog.empty() && !positional.empty()) {
            spec.catalog = positional[0].text;
            name_col = positional[0].column;
            positional.erase(positional.begin());
        }
        if (!spec.catalog.empty() && !kCatalogNames.count(spec.catalog))
            throw CliError("unknown catalog entry '" + spec.catalog +
                               "' (expected remark24, remark46, example53, thm52-suite, or "
                               "finite-models)",
                           name_col);
    }
    if (!positional.empty())
        throw CliError("unexpected argument '" + positional[0].text + "' for " + spec.command,
                       positional[0].column);
    return spec;
}

std::string JobSpec::canonical_text() const {
    std::string s = command;
    if (command == "fg-hom" || command == "fg-ext") {
        s += " --source " + source->str() + " --target " + target->str();
    } else if (command == "tower-analyze" || command == "pext") {
        s += " --tower " + tower_text(*tower);
        if (target) s += " --target " + target->str();
    } else if (command == "uct-report" || command == "diagram-check") {
        s += " K0A=" + tower_text(kdata->ka0) + " K1A=" + tower_text(kdata->ka1) +
             " K0B=" + kdata->kb0.str() + " K1B=" + kdata->kb1.str();
    } else if (!catalog.empty()) {
        s += " " + catalog;
    }
    s += " --window " + std::to_string(window);
    if (truncation) s += " --truncation " + std::to_string(truncation);
    if (strict) s += " --strict";
    if (summary) s += " --summary";
    if (!out.empty()) s += " --out " + out;
    return s;
}

}  // namespace kkf::cli
