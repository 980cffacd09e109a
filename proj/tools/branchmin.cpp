/*
 * Copyright 2026 The branchmin Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command line front end: reduce, compare, gen, bench.

#include <branchmin/equiv.hpp>
#include <branchmin/generate.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <variant>

using namespace branchmin;
namespace fs = std::filesystem;

namespace {

enum Exit : int {
    kOk = 0,
    kParseError = 1,
    kMismatch = 2,
    kCapExceeded = 3,
    kBadId = 4,
    kNotEquivalent = 10,
};

using System = std::variant<KripkeStructure, Lts>;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

// Format is decided by the first word: "des" for .aut, "kripke" otherwise.
System parse_system(const std::string& text) {
    const auto start = text.find_first_not_of(" \t\r\n");
    if (start != std::string::npos && text.compare(start, 6, "kripke") == 0) return parse_kripke(text);
    return parse_aut(text);
}

struct ReduceFlags {
    std::string eq = "branching";
    std::string engine = "fast";
    std::string in;
    std::string out;
    std::string metrics;
    std::string trace;
    std::optional<std::size_t> naive_cap;
};

void add_reduce_flags(CLI::App* cmd, ReduceFlags& f, bool with_output) {
    cmd->add_option("--eq", f.eq, "dbs | stutter | branching | branching-div")->capture_default_str();
    cmd->add_option("--engine", f.engine, "fast | naive")->capture_default_str();
    cmd->add_option("--in", f.in, "input file (.aut or kripke text)")->required();
    cmd->add_option("--naive-cap", f.naive_cap, "largest input the naive engine accepts (states)");
    if (with_output) {
        cmd->add_option("--out", f.out, "quotient output file (default: stdout)");
        cmd->add_option("--metrics", f.metrics, "append a CSV metrics row to this file");
        cmd->add_option("--trace", f.trace, "write the fast engine's episode trace to this file");
    }
}

struct Prepared {
    System sys;
    Equivalence eq;
    EquivOptions opts;
};

// Parses flags and input; returns an exit code on failure.
std::variant<Prepared, int> prepare(const ReduceFlags& f, std::vector<std::string>* trace_lines) {
    const auto eq = parse_equivalence(f.eq);
    const auto engine = parse_engine(f.engine);
    if (!eq || !engine) {
        std::cerr << "error: unknown " << (!eq ? "equivalence '" + f.eq : "engine '" + f.engine) << "'\n";
        return kParseError;
    }
    Prepared p{KripkeStructure{}, *eq, {}};
    p.opts.engine = *engine;
    if (f.naive_cap) p.opts.naive_cap = *f.naive_cap;
    if (trace_lines) p.opts.fast.trace = [trace_lines](const std::string& l) { trace_lines->push_back(l); };
    try {
        p.sys = parse_system(read_file(f.in));
    } catch (const std::exception& e) {
        std::cerr << "error: " << f.in << ": " << e.what() << '\n';
        return kParseError;
    }
    const bool is_kripke = std::holds_alternative<KripkeStructure>(p.sys);
    if (is_kripke != is_kripke_equivalence(*eq)) {
        std::cerr << "error: " << f.eq << " needs " << (is_kripke ? "an LTS" : "a Kripke structure") << " input\n";
        return kMismatch;
    }
    return p;
}

int cmd_reduce(const ReduceFlags& f) {
    std::vector<std::string> trace;
    auto prep = prepare(f, f.trace.empty() ? nullptr : &trace);
    if (auto* code = std::get_if<int>(&prep)) return *code;
    auto& p = std::get<Prepared>(prep);

    Metrics row;
    row.name = fs::path(f.in).stem().string();
    row.engine = p.opts.engine;
    std::string text;
    std::size_t classes = 0;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        if (auto* k = std::get_if<KripkeStructure>(&p.sys)) {
            auto r = reduce(*k, p.eq, p.opts);
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.n = k->num_states();
            row.m = k->num_transitions();
            row.min_n = r.quotient.num_states();
            row.min_m = r.quotient.num_transitions();
            row.work_units = r.work_units;
            classes = r.classes.num_classes();
            text = write_kripke(r.quotient);
        } else {
            const auto& l = std::get<Lts>(p.sys);
            auto r = reduce(l, p.eq, p.opts);
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            row.n = l.num_states();
            row.m = l.num_transitions();
            row.min_n = r.quotient.num_states();
            row.min_m = r.quotient.num_transitions();
            row.work_units = r.work_units;
            classes = r.classes.num_classes();
            text = write_aut(r.quotient);
        }
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCapExceeded;
    }

    try {
        write_text(f.out, text);
        if (!f.trace.empty()) {
            std::string all;
            for (const auto& l : trace) all += l + '\n';
            write_text(f.trace, all);
        }
        if (!f.metrics.empty()) {
            const bool fresh = !fs::exists(f.metrics) || fs::file_size(f.metrics) == 0;
            std::ofstream m(f.metrics, std::ios::app);
            if (!m) throw std::runtime_error("cannot write " + f.metrics);
            if (fresh) m << metrics_header(true) << '\n';
            m << metrics_row(row, true) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParseError;
    }
    (f.out.empty() || f.out == "-" ? std::cerr : std::cout) << classes << " classes\n";
    return kOk;
}

int cmd_compare(const ReduceFlags& f, StateId s, StateId t) {
    auto prep = prepare(f, nullptr);
    if (auto* code = std::get_if<int>(&prep)) return *code;
    auto& p = std::get<Prepared>(prep);
    try {
        const bool same = std::visit([&](const auto& sys) { return compare(sys, p.eq, s, t, p.opts); }, p.sys);
        std::cout << (same ? "equivalent" : "not-equivalent") << '\n';
        return same ? kOk : kNotEquivalent;
    } catch (const std::out_of_range& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadId;
    } catch (const CapExceeded& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCapExceeded;
    }
}

struct GenFlags {
    std::string shape;
    std::size_t size = 0;
    std::string kind = "lts";
    std::size_t transitions = 0;
    std::size_t labels = 2;
    double tau_density = 0.4;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_gen(const GenFlags& g) {
    if (g.size < 1) {
        std::cerr << "error: size must be at least 1\n";
        return kParseError;
    }
    std::string text;
    if (g.shape == "tau-sequence") {
        text = write_aut(tau_sequence(g.size));
    } else if (g.shape == "tau-tree") {
        if (g.size > 30) {
            std::cerr << "error: tree depth must be at most 30\n";
            return kParseError;
        }
        text = write_aut(tau_tree(g.size));
    } else if (g.shape == "random") {
        const std::size_t m = g.transitions ? g.transitions : 2 * g.size;
        if (g.kind == "kripke") {
            text = write_kripke(random_kripke({g.size, m, g.labels}, g.seed));
        } else if (g.kind == "lts") {
            if (g.tau_density < 0 || g.tau_density > 1) {
                std::cerr << "error: --tau-density must be in [0, 1]\n";
                return kParseError;
            }
            text = write_aut(random_lts({g.size, m, g.labels, g.tau_density}, g.seed));
        } else {
            std::cerr << "error: --kind must be kripke or lts\n";
            return kParseError;
        }
    } else {
        std::cerr << "error: unknown shape '" << g.shape << "'\n";
        return kParseError;
    }
    try {
        write_text(g.out, text);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kParseError;
    }
    return kOk;
}

struct BenchFlags {
    std::string suite;
    std::string dir;
    std::string engines = "fast";
    std::string eq = "branching";
    std::size_t repeat = 1;
    std::size_t min_size = 0, max_size = 0;
    std::optional<std::size_t> naive_cap;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto k = v.size() / 2;
    return v.size() % 2 ? v[k] : (v[k - 1] + v[k]) / 2;
}

int cmd_bench(const BenchFlags& b) {
    std::vector<Engine> engines;
    for (std::size_t pos = 0; pos <= b.engines.size();) {
        const auto comma = std::min(b.engines.find(',', pos), b.engines.size());
        const auto e = parse_engine(std::string_view(b.engines).substr(pos, comma - pos));
        if (!e) {
            std::cerr << "error: bad --engines list '" << b.engines << "'\n";
            return kParseError;
        }
        engines.push_back(*e);
        pos = comma + 1;
    }
    const auto eq = parse_equivalence(b.eq);
    if (!eq || is_kripke_equivalence(*eq)) {
        std::cerr << "error: bench reduces LTSs; --eq must be branching or branching-div\n";
        return kParseError;
    }
    if (b.repeat < 1) {
        std::cerr << "error: --repeat must be at least 1\n";
        return kParseError;
    }

    // Instances are generated lazily so that only one is alive at a time.
    std::vector<std::pair<std::string, std::function<Lts()>>> instances;
    if (b.suite == "sequence") {
        const std::size_t lo = b.min_size ? b.min_size : 10, hi = b.max_size ? b.max_size : 16;
        if (lo > hi || hi > 28) {
            std::cerr << "error: sequence exponents must satisfy min <= max <= 28\n";
            return kParseError;
        }
        for (std::size_t e = lo; e <= hi; ++e)
            instances.emplace_back("atau_2^" + std::to_string(e), [e] { return tau_sequence(std::size_t{1} << e); });
    } else if (b.suite == "tree") {
        const std::size_t lo = b.min_size ? b.min_size : 10, hi = b.max_size ? b.max_size : 20;
        if (lo < 1 || lo > hi || hi > 30) {
            std::cerr << "error: tree depths must satisfy 1 <= min <= max <= 30\n";
            return kParseError;
        }
        for (std::size_t d = lo; d <= hi; ++d)
            instances.emplace_back("tree_" + std::to_string(d), [d] { return tau_tree(d); });
    } else if (b.suite == "files") {
        std::error_code ec;
        if (b.dir.empty() || !fs::is_directory(b.dir, ec)) {
            std::cerr << "error: --dir must name a directory of .aut files\n";
            return kParseError;
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(b.dir))
            if (entry.path().extension() == ".aut") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& path : files)
            instances.emplace_back(path.stem().string(), [path] { return parse_aut(read_file(path.string())); });
    } else {
        std::cerr << "error: unknown suite '" << b.suite << "'\n";
        return kParseError;
    }

    std::cout << metrics_header(true) << '\n';
    std::vector<std::vector<std::pair<std::string, double>>> times(engines.size());
    for (const auto& [name, make] : instances) {
        Lts l;
        try {
            l = make();
        } catch (const std::exception& e) {
            std::cerr << "error: " << name << ": " << e.what() << '\n';
            return kParseError;
        }
        for (std::size_t ei = 0; ei < engines.size(); ++ei) {
            EquivOptions opts;
            opts.engine = engines[ei];
            if (b.naive_cap) opts.naive_cap = *b.naive_cap;
            Metrics row{name, l.num_states(), l.num_transitions(), 0, 0, engines[ei], 0, std::nullopt};
            std::vector<double> secs;
            try {
                for (std::size_t r = 0; r < b.repeat; ++r) {
                    const auto t0 = std::chrono::steady_clock::now();
                    const auto res = reduce(l, *eq, opts);
                    secs.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
                    row.min_n = res.quotient.num_states();
                    row.min_m = res.quotient.num_transitions();
                    row.work_units = res.work_units;
                }
            } catch (const CapExceeded& e) {
                std::cout << "# skipped " << name << ' ' << to_string(engines[ei]) << ": " << e.what() << '\n';
                continue;
            }
            row.seconds = median(secs);
            times[ei].emplace_back(name, row.seconds);
            std::cout << metrics_row(row, true) << '\n' << std::flush;
        }
    }
    if (b.suite != "files")
        for (std::size_t ei = 0; ei < engines.size(); ++ei)
            for (std::size_t i = 1; i < times[ei].size(); ++i)
                std::cout << "# ratio " << to_string(engines[ei]) << ' ' << times[ei][i].first << ' '
                          << (times[ei][i - 1].second > 0 ? times[ei][i].second / times[ei][i - 1].second : 0.0)
                          << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"branchmin: minimization modulo stuttering equivalence and branching bisimulation"};
    app.require_subcommand(1);

    ReduceFlags reduce_flags;
    auto* reduce_cmd = app.add_subcommand("reduce", "write the quotient of a system");
    add_reduce_flags(reduce_cmd, reduce_flags, true);

    ReduceFlags compare_flags;
    StateId s = 0, t = 0;
    auto* compare_cmd = app.add_subcommand("compare", "decide whether two states are equivalent");
    add_reduce_flags(compare_cmd, compare_flags, false);
    compare_cmd->add_option("--s", s, "first state")->required();
    compare_cmd->add_option("--t", t, "second state")->required();

    GenFlags gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate an instance");
    gen_cmd->add_option("shape", gen.shape, "random | tau-sequence | tau-tree")->required();
    gen_cmd->add_option("size", gen.size, "states (random), n of (a.tau)^n, or tree depth")->required();
    gen_cmd->add_option("--kind", gen.kind, "random only: kripke | lts")->capture_default_str();
    gen_cmd->add_option("--transitions", gen.transitions, "random only: transition count (default 2*size)");
    gen_cmd->add_option("--labels", gen.labels, "random only: propositions or visible actions")->capture_default_str();
    gen_cmd->add_option("--tau-density", gen.tau_density, "random lts only")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
    gen_cmd->add_option("--out", gen.out, "output file (default: stdout)");

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "time reductions and print CSV");
    bench_cmd->add_option("--suite", bench.suite, "sequence | tree | files")->required();
    bench_cmd->add_option("--dir", bench.dir, "directory of .aut files for the files suite");
    bench_cmd->add_option("--engines", bench.engines, "comma separated: fast,naive")->capture_default_str();
    bench_cmd->add_option("--eq", bench.eq, "branching | branching-div")->capture_default_str();
    bench_cmd->add_option("--repeat", bench.repeat, "runs per cell; the median is reported")->capture_default_str();
    bench_cmd->add_option("--min", bench.min_size, "smallest exponent (sequence) or depth (tree)");
    bench_cmd->add_option("--max", bench.max_size, "largest exponent (sequence) or depth (tree)");
    bench_cmd->add_option("--naive-cap", bench.naive_cap, "largest input the naive engine accepts (states)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kParseError;
    }

    if (*reduce_cmd) return cmd_reduce(reduce_flags);
    if (*compare_cmd) return cmd_compare(compare_flags, s, t);
    if (*gen_cmd) return cmd_gen(gen);
    return cmd_bench(bench);
}
