#include <CLI11.hpp>

#include <fstream>

#include "run_config.hpp"

namespace {

void add_common(CLI::App* cmd, dktool::CommonOptions& c) {
    cmd->add_option("--config", c.config_file,
                    "flat key=value file; flags override file keys");
    cmd->add_option("--preset", c.preset, "problem preset: exp1 | exp2 | exp3");
    cmd->add_option("--scheme", c.scheme, "sl | nn");
    cmd->add_option("--optimizer", c.optimizer, "lm | lbfgs | br (nn scheme)");
    cmd->add_option("--n", c.n, "time steps");
    cmd->add_option("--l", c.l, "space cells");
    cmd->add_option("--m", c.m, "simplex cells (multi-scenario presets)");
    cmd->add_option("--hidden", c.hidden, "hidden units (nn scheme)");
    cmd->add_option("--seed", c.seed, "run seed (nn scheme)");
    cmd->add_option("--out", c.out_dir, "output directory");
    cmd->add_option("--convexify", c.convexify, "1/0 force, -1 decide from preset");
    cmd->add_option("--clamp", c.clamp, "1/0 force, -1 decide from preset");
}

// Fills options that were not given on the command line from a flat
// key=value file (keys are the long flag names without dashes, '#' starts a
// full-line comment). Returns 0 on success, 2 on a bad file or key.
int apply_config(CLI::App* cmd, const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "cannot open config file '%s'\n", path.c_str());
        return 2;
    }
    auto trim = [](std::string s) {
        const char* ws = " \t\r";
        s.erase(0, s.find_first_not_of(ws));
        s.erase(s.find_last_not_of(ws) + 1);
        return s;
    };
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "%s:%d: expected key=value\n", path.c_str(), line_no);
            return 2;
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "config") continue;  // no nested config files
        CLI::Option* op = cmd->get_option_no_throw("--" + key);
        if (op == nullptr) {
            std::fprintf(stderr, "%s:%d: unknown key '%s'\n", path.c_str(), line_no,
                         key.c_str());
            return 2;
        }
        if (op->count() > 0) continue;  // command-line flag wins
        op->add_result(value);
        try {
            op->run_callback();
        } catch (const CLI::ParseError& e) {
            std::fprintf(stderr, "%s:%d: bad value for '%s': %s\n", path.c_str(),
                         line_no, key.c_str(), e.what());
            return 2;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynkin-game double-obstacle solver"};
    app.require_subcommand(1);

    dktool::CommonOptions run_opts;
    CLI::App* run = app.add_subcommand("run", "solve once and export the field");
    add_common(run, run_opts);

    dktool::TableOptions table_opts;
    CLI::App* table = app.add_subcommand("table", "halving refinement study");
    add_common(table, table_opts.common);
    table->add_option("--axis", table_opts.axis, "refined axis: t | x | p");
    table->add_option("--coarse", table_opts.coarse, "coarsest size (0 = preset default)");
    table->add_option("--rows", table_opts.rows, "number of refinement rows");
    table->add_option("--fixed", table_opts.fixed, "size of pinned axes (0 = finest row)");

    dktool::BoundaryOptions boundary_opts;
    CLI::App* boundary = app.add_subcommand("boundary", "active-set extraction");
    add_common(boundary, boundary_opts.common);
    boundary->add_option("--p", boundary_opts.p, "belief level in [0, 1]");
    boundary->add_option("--tol", boundary_opts.tol, "contact tolerance");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad flags or config parse → 2
    }

    CLI::App* cmd = run->parsed() ? run : table->parsed() ? table : boundary;
    const dktool::CommonOptions& common = run->parsed()    ? run_opts
                                          : table->parsed() ? table_opts.common
                                                            : boundary_opts.common;
    if (!common.config_file.empty()) {
        int rc = apply_config(cmd, common.config_file);
        if (rc != 0) return rc;
    }

    try {
        if (run->parsed()) return dktool::cmd_run(run_opts);
        if (table->parsed()) return dktool::cmd_table(table_opts);
        if (boundary->parsed()) return dktool::cmd_boundary(boundary_opts);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
