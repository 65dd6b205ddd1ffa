#include "report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>

namespace {

struct Inputs {
    std::string source, target, tower, name;
    std::vector<std::string> positional;
    int window = kkf::kDefaultWindow;
    int truncation = 0;
    bool strict = false, summary = false;
    std::string out;
};

void add_common(CLI::App* cmd, Inputs& in) {
    cmd->add_option("--window", in.window, "probe window for tower computations")
        ->default_val(kkf::kDefaultWindow);
    cmd->add_option("--truncation", in.truncation,
                    "finite-support truncation level for models (default: window + 4)");
    cmd->add_flag("--strict", in.strict, "exit 2 when any reported verdict is inconclusive");
    cmd->add_flag("--summary", in.summary, "also print a human-readable summary");
    cmd->add_option("--out", in.out, "write the JSON report to this path instead of stdout");
}

// The subcommand front end only collects strings; the line grammar in
// jobspec.cpp is the single semantic parser, so flag handling, diagnostics,
// and round-tripping cannot drift apart.
std::string job_line(const std::string& command, const Inputs& in) {
    std::string line = command;
    if (!in.source.empty()) line += " --source " + in.source;
    if (!in.target.empty()) line += " --target " + in.target;
    if (!in.tower.empty()) line += " --tower " + in.tower;
    if (!in.name.empty()) line += " --name " + in.name;
    for (const std::string& p : in.positional) line += " " + p;
    line += " --window " + std::to_string(in.window);
    if (in.truncation) line += " --truncation " + std::to_string(in.truncation);
    if (in.strict) line += " --strict";
    if (in.summary) line += " --summary";
    if (!in.out.empty()) line += " --out " + in.out;
    return line;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact Hom/Ext/Pext and tower-limit calculus with replayable certificates"};
    app.require_subcommand(1);
    std::map<std::string, Inputs> inputs;

    auto* hom = app.add_subcommand("fg-hom", "Hom(G, H) for a f.g. source");
    hom->add_option("groups", inputs["fg-hom"].positional, "source and target groups");
    hom->add_option("--source", inputs["fg-hom"].source, "source group expression");
    hom->add_option("--target", inputs["fg-hom"].target, "target group expression");

    auto* ext = app.add_subcommand("fg-ext", "Ext(G, H) for a f.g. source");
    ext->add_option("groups", inputs["fg-ext"].positional, "source and target groups");
    ext->add_option("--source", inputs["fg-ext"].source, "source group expression");
    ext->add_option("--target", inputs["fg-ext"].target, "target group expression");

    auto* ta = app.add_subcommand("tower-analyze",
                                  "stages, colimit, and (with --target) lim/lim1 of the induced "
                                  "Hom and Ext towers");
    ta->add_option("args", inputs["tower-analyze"].positional, "tower, then optional target");
    ta->add_option("--tower", inputs["tower-analyze"].tower, "tower expression");
    ta->add_option("--target", inputs["tower-analyze"].target, "coefficient group expression");

    auto* px = app.add_subcommand("pext", "pure-extension part of Ext(colim, target)");
    px->add_option("args", inputs["pext"].positional, "tower, then target");
    px->add_option("--tower", inputs["pext"].tower, "tower expression");
    px->add_option("--target", inputs["pext"].target, "coefficient group expression");

    auto* uct = app.add_subcommand("uct-report",
                                   "graded KK assembly: values, fine structure, topology flags");
    uct->add_option("kdata", inputs["uct-report"].positional,
                    "K-theory data as K0A=<tower> K1A=<tower> K0B=<group> K1B=<group>");

    auto* dc = app.add_subcommand("diagram-check",
                                  "six-group filtration diagram with exactness status per row "
                                  "and column");
    dc->add_option("kdata", inputs["diagram-check"].positional,
                   "K-theory data as K0A=<tower> K1A=<tower> K0B=<group> K1B=<group>");

    auto* cat = app.add_subcommand("catalog-run", "run golden scenarios and compare");
    cat->add_option("entry", inputs["catalog-run"].positional,
                    "remark24 | remark46 | example53 | thm52-suite | finite-models (all when "
                    "omitted)");
    cat->add_option("--name", inputs["catalog-run"].name, "catalog entry name");

    for (CLI::App* cmd : {hom, ext, ta, px, uct, dc, cat}) add_common(cmd, inputs[cmd->get_name()]);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    const std::string& command = app.get_subcommands().front()->get_name();
    std::string line = job_line(command, inputs[command]);
    try {
        kkf::cli::JobSpec spec = kkf::cli::parse_input(line);
        return kkf::cli::execute(spec, std::cout, std::cerr);
    } catch (const kkf::cli::CliError& e) {
        std::cerr << "error: " << e.what() << "\n  in: " << line << "\n  at column " << e.column
                  << "\n";
        return 1;
    }
}
