#pragma once

#include "kkfilt/uct.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace kkf::cli {

// Diagnostic with a 1-based column into the job text. Thrown for both syntax
// and semantic problems; the driver maps it to exit code 1.
struct CliError : std::runtime_error {
    int column;
    CliError(const std::string& what, int col) : std::runtime_error(what), column(col) {}
};

// One parsed job. `canonical_text()` prints it back in the input grammar;
// parsing that text again yields an equivalent spec.
struct JobSpec {
    std::string command;

    std::optional<GroupExpr> source, target;
    std::optional<DirectTower> tower;
    std::optional<KTheoryData> kdata;
    std::string catalog;  // catalog-run: empty = every entry

    int window = kDefaultWindow;
    int truncation = 0;  // 0 = window + margin default
    bool strict = false;
    bool summary = false;
    std::string out;  // empty = stdout

    std::string canonical_text() const;
};

// Tower grammar: stable(<group>) | prufer(p) | elementary(p,k) | free(s) |
//                affine(p; a*n+b) | explicit(G1; [rows]; G2; ...) | <group>
// A bare group expression is shorthand for the constant tower on that group.
// Argument tokens may carry `name=` prefixes (stripped before parsing).
DirectTower parse_tower(const std::string& text);
std::string tower_text(const DirectTower& t);

// One job per line: command, then positional/named inputs and options.
// Tokens split on whitespace at parenthesis/bracket depth zero, so group and
// tower literals may contain spaces.
JobSpec parse_input(const std::string& text);

}  // namespace kkf::cli
