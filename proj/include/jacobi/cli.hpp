#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "jacobi/eigensolve.hpp"
#include "jacobi/experiments.hpp"
#include "jacobi/io.hpp"
#include "jacobi/measures.hpp"

namespace jacobi::cli {

enum class Verb { Spectrum, Measure, Relation, Experiment, Counterexample, Carleman, Help };

/// Bad command line. Maps to exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Command {
    Verb verb = Verb::Help;
    std::optional<std::string> input;
    std::optional<std::string> output;
    std::optional<std::string> config;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::optional<index_t> site;
    std::optional<index_t> size;
    bool matrix = false;
};

inline constexpr const char* usage_text =
    "usage: jacobi <verb> [options]\n"
    "verbs:\n"
    "  spectrum        --input M.json [--output E.json]\n"
    "  measure         --input M.json --site N [--matrix] [--output MU.csv]\n"
    "  relation        --input M.json --site N [--output R.json]\n"
    "  experiment      --config C.json [--seed U64] [--trials U64] [--output R.json]\n"
    "  counterexample  [--size ODD] [--output R.json]\n"
    "  carleman        --config C.json [--output S.json]\n";

namespace detail {

inline Verb parse_verb(const std::string& s) {
    if (s == "spectrum") return Verb::Spectrum;
    if (s == "measure") return Verb::Measure;
    if (s == "relation") return Verb::Relation;
    if (s == "experiment") return Verb::Experiment;
    if (s == "counterexample") return Verb::Counterexample;
    if (s == "carleman") return Verb::Carleman;
    if (s == "help" || s == "--help" || s == "-h") return Verb::Help;
    throw UsageError("unknown verb '" + s + "'");
}

inline void require(bool present, const char* flag, const std::string& verb) {
    if (!present) throw UsageError(verb + " requires " + flag);
}

inline void check_readable(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read '" + path + "'");
}

inline void check_writable(const std::string& path) {
    namespace fs = std::filesystem;
    const auto parent = fs::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty() && !fs::is_directory(parent, ec)) {
        throw UsageError("output directory '" + parent.string() + "' does not exist");
    }
    if (fs::is_directory(path, ec)) throw UsageError("output path '" + path + "' is a directory");
}

} // namespace detail

/// argv without the program name.
inline Command parse_args(const std::vector<std::string>& args) {
    if (args.empty()) throw UsageError("missing verb");
    Command cmd;
    cmd.verb = detail::parse_verb(args.front());
    if (cmd.verb == Verb::Help) return cmd;

    CLI::App app{"jacobi " + args.front()};
    app.set_help_flag();
    std::string input, output, config;
    std::uint64_t seed = 0, trials = 0;
    index_t site = 0, size = 0;
    auto* o_input = app.add_option("--input", input);
    auto* o_output = app.add_option("--output", output);
    auto* o_config = app.add_option("--config", config);
    auto* o_seed = app.add_option("--seed", seed);
    auto* o_trials = app.add_option("--trials", trials);
    auto* o_site = app.add_option("--site", site);
    auto* o_size = app.add_option("--size", size);
    app.add_flag("--matrix", cmd.matrix);

    std::vector<std::string> rest(args.begin() + 1, args.end());
    std::reverse(rest.begin(), rest.end()); // CLI11 consumes a reversed vector
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    if (*o_input) cmd.input = input;
    if (*o_output) cmd.output = output;
    if (*o_config) cmd.config = config;
    if (*o_seed) cmd.seed = seed;
    if (*o_trials) cmd.trials = trials;
    if (*o_site) cmd.site = site;
    if (*o_size) cmd.size = size;

    const std::string& verb = args.front();
    switch (cmd.verb) {
    case Verb::Spectrum: detail::require(cmd.input.has_value(), "--input", verb); break;
    case Verb::Measure:
    case Verb::Relation:
        detail::require(cmd.input.has_value(), "--input", verb);
        detail::require(cmd.site.has_value(), "--site", verb);
        break;
    case Verb::Experiment:
    case Verb::Carleman: detail::require(cmd.config.has_value(), "--config", verb); break;
    default: break;
    }
    if (cmd.input) detail::check_readable(*cmd.input);
    if (cmd.config) detail::check_readable(*cmd.config);
    if (cmd.output) detail::check_writable(*cmd.output);
    return cmd;
}

inline Command parse_args(int argc, const char* const* argv) {
    return parse_args(std::vector<std::string>(argv + 1, argv + argc));
}

namespace detail {

inline void emit(const Command& cmd, const std::string& text, std::ostream& out) {
    if (!cmd.output) {
        out << text;
        return;
    }
    std::ofstream file(*cmd.output);
    if (!file) throw Error("cannot write '" + *cmd.output + "'");
    file << text;
    if (!file) throw Error("failed writing '" + *cmd.output + "'");
}

inline void print_assertions(const ExperimentReport& rep, std::ostream& out) {
    out << std::left << std::setw(16) << "assertion" << std::setw(26) << "expected"
        << std::setw(26) << "observed" << "result\n";
    for (const auto& a : rep.assertions) {
        out << std::setw(16) << a.name << std::setw(26) << io::format_double(a.expected)
            << std::setw(26) << io::format_double(a.observed) << (a.pass ? "pass" : "FAIL")
            << "\n";
    }
}

} // namespace detail

/// Executes a parsed command. Returns the process exit status.
inline int run(const Command& cmd, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    try {
        switch (cmd.verb) {
        case Verb::Help: out << usage_text; return 0;
        case Verb::Spectrum: {
            const auto H = io::read_operator(*cmd.input);
            detail::emit(cmd, io::to_json(eigendecompose(H)).dump(2) + "\n", out);
            return 0;
        }
        case Verb::Measure: {
            const auto H = io::read_operator(*cmd.input);
            const auto ed = eigendecompose(H);
            if (cmd.matrix) {
                detail::emit(cmd, io::matrix_measure_csv(matrix_measure(ed, *cmd.site)), out);
            } else {
                detail::emit(cmd, io::measure_csv(site_measure(ed, *cmd.site)), out);
            }
            return 0;
        }
        case Verb::Relation: {
            const auto H = io::read_operator(*cmd.input);
            const auto ed = eigendecompose(H);
            const auto rep = check_semiinfinite_relation(ed, H, *cmd.site);
            io::json j{{"site", rep.site},
                       {"eigenvalues", ed.eigenvalues()},
                       {"s_residuals", rep.s_residuals},
                       {"c_residuals", rep.c_residuals},
                       {"max_s_residual", rep.max_s},
                       {"max_c_residual", rep.max_c}};
            detail::emit(cmd, j.dump(2) + "\n", out);
            return 0;
        }
        case Verb::Experiment:
        case Verb::Carleman: {
            auto cfg = io::read_config(*cmd.config);
            if (cmd.verb == Verb::Carleman && cfg.kind != ExperimentKind::Carleman) {
                throw ConfigError("carleman verb needs a config of kind \"carleman\"");
            }
            if (cmd.seed) cfg.seed = *cmd.seed;
            if (cmd.trials) cfg.trials = *cmd.trials;
            const auto rep = run_experiment(cfg);
            detail::emit(cmd, io::to_json(rep).dump(2) + "\n", out);
            if (!rep.assertions.empty() && !cmd.output) detail::print_assertions(rep, err);
            return 0;
        }
        case Verb::Counterexample: {
            const auto rep = run_experiment([&] {
                ExperimentConfig cfg;
                cfg.kind = ExperimentKind::Counterexample;
                cfg.N = cmd.size.value_or(3);
                return cfg;
            }());
            detail::print_assertions(rep, out);
            if (cmd.output) detail::emit(cmd, io::to_json(rep).dump(2) + "\n", out);
            if (!rep.all_passed()) {
                err << "error: counterexample assertions failed\n";
                return 1;
            }
            return 0;
        }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

/// parse_args + run, with usage errors reported on `err` and mapped to 2.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out = std::cout,
                      std::ostream& err = std::cerr) {
    Command cmd;
    try {
        cmd = parse_args(args);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    return run(cmd, out, err);
}

} // namespace jacobi::cli
