// snips: run synchronization experiments and write CSV.
//
// Exit codes: 0 success, 1 a run did not converge, 2 usage error.

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "snips/baseline.hpp"
#include "snips/beacon.hpp"
#include "snips/experiments.hpp"
#include "snips/hash.hpp"
#include "snips/metrics.hpp"
#include "snips/mphf.hpp"
#include "snips/netsim.hpp"
#include "snips/proof.hpp"
#include "snips/scenario.hpp"

namespace {

using namespace snips;

constexpr int kExitOk = 0;
constexpr int kExitDiverged = 1;
constexpr int kExitUsage = 2;

struct Common {
    std::uint64_t seed = 1;
    std::string out;
    std::optional<std::uint64_t> trials;
    std::optional<std::size_t> peers;
    std::optional<double> size_mb;
    std::size_t chunk_size = kMaxChunkSize;
    int threads = 0;
    std::string plot;
    std::string timing;
    bool large = false;
};

std::uint64_t default_seed() {
    if (const char* env = std::getenv("SNIPS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            std::cerr << "ignoring unparsable SNIPS_SEED='" << env << "'\n";
        }
    }
    return 1;
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "base seed (default: $SNIPS_SEED or 1)");
    cmd->add_option("--out", c.out, "CSV output path (default: stdout)");
    cmd->add_option("--trials", c.trials, "trials / repetitions")->check(CLI::PositiveNumber);
    cmd->add_option("--peers", c.peers, "peers in the neighborhood")->check(CLI::Range(2, 1000));
    cmd->add_option("--size-mb", c.size_mb, "storage per peer in MB")->check(CLI::PositiveNumber);
    cmd->add_option("--chunk-size", c.chunk_size, "chunk payload bytes")->check(CLI::Range(1, 4096));
    cmd->add_option("--threads", c.threads, "worker threads (0 = OpenMP default)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--plot", c.plot, "also write a gnuplot script reading the CSV");
    cmd->add_option("--timing", c.timing, "write wall-clock timings as CSV here (default: stderr)");
    cmd->add_flag("--large", c.large, "include the long-running grid points (1000 MB, 26 peers)");
}

std::uint64_t bytes_of_mb(double mb) { return static_cast<std::uint64_t>(mb * static_cast<double>(kMegabyte) + 0.5); }

/// Writes to --out or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot open " + path);
        }
    }
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

/// Timing lines never go to the main CSV so that it stays reproducible.
class TimingSink {
public:
    TimingSink(const std::string& path, const std::string& header) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot open " + path);
        }
        os() << (file_.is_open() ? "" : "# timing: ") << header << '\n';
    }
    void row(const std::string& line) { os() << (file_.is_open() ? "" : "# timing: ") << line << '\n'; }

private:
    std::ostream& os() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cerr; }
    std::ofstream file_;
};

void write_plot(const std::string& path, const std::string& csv, const std::string& body) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << "# gnuplot script; reads " << (csv.empty() ? "<stdout capture>" : csv) << "\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set grid\n"
      << "data = '" << (csv.empty() ? "snips.csv" : csv) << "'\n"
      << body;
}

void print_config(const std::string& command, const Common& c, const std::string& extra) {
    std::cerr << "# snips " << command << " seed=" << c.seed << " chunk_size=" << c.chunk_size
              << " threads=" << c.threads << (c.large ? " large=1" : "") << extra << '\n';
}

ScenarioConfig base_config(const Common& c) {
    ScenarioConfig cfg;
    cfg.seed = c.seed;
    cfg.chunk_size = c.chunk_size;
    cfg.peers = c.peers.value_or(2);
    cfg.total_storage_bytes = bytes_of_mb(c.size_mb.value_or(1.0));
    cfg.threads = c.threads;
    return cfg;
}

void timing_row(TimingSink& t, const MetricsReport& r) {
    t.row(scenario_label(r.config.scenario) + "," + std::string(protocol_name(r.config.protocol)) + "," +
          std::to_string(r.config.seed) + "," + format_double(r.timing.wall_seconds) + "," +
          format_double(r.timing.create_us_per_chunk()) + "," + format_double(r.timing.verify_us_per_chunk()));
}

constexpr const char* kRunTimingHeader = "scenario,protocol,seed,wall_seconds,create_us_per_chunk,verify_us_per_chunk";

// -- sync ---------------------------------------------------------------------

int cmd_sync(const Common& c, const std::string& scenario, const std::string& protocol, const std::string& trace_path,
             std::uint64_t max_rounds) {
    ScenarioConfig cfg = base_config(c);
    cfg.scenario = parse_scenario(scenario);
    cfg.protocol = parse_protocol(protocol);
    cfg.max_rounds = max_rounds;
    cfg.validate();
    std::cerr << "# " << cfg.describe() << '\n';

    std::ofstream trace;
    if (!trace_path.empty()) {
        trace.open(trace_path, std::ios::trunc);
        if (!trace) throw std::runtime_error("cannot open " + trace_path);
    }
    const MetricsReport r = run_scenario(cfg, trace.is_open() ? &trace : nullptr);
    Sink sink(c.out);
    sink.os() << csv_header() << '\n' << csv_row(r) << '\n';
    TimingSink t(c.timing, kRunTimingHeader);
    timing_row(t, r);
    return r.converged ? kExitOk : kExitDiverged;
}

// -- sweep-similarity ----------------------------------------------------------

int cmd_sweep(const Common& c) {
    const std::uint64_t reps = c.trials.value_or(1);
    std::vector<ScenarioConfig> configs;
    for (int step = 0; step <= 10; ++step) {
        for (std::uint64_t rep = 0; rep < reps; ++rep) {
            ScenarioConfig cfg = base_config(c);
            cfg.total_storage_bytes = bytes_of_mb(c.size_mb.value_or(10.0));
            cfg.scenario = Similarity{step / 10.0};
            cfg.seed = reps == 1 ? c.seed : derive_seed(c.seed, rep);
            cfg.threads = 1;
            cfg.validate();
            configs.push_back(cfg);
        }
    }
    print_config("sweep-similarity", c,
                 " peers=" + std::to_string(configs.front().peers) +
                     " storage_bytes=" + std::to_string(configs.front().total_storage_bytes) +
                     " trials=" + std::to_string(reps));

    std::vector<MetricsReport> reports(configs.size());
    const auto n = static_cast<std::int64_t>(configs.size());
#pragma omp parallel for schedule(dynamic) num_threads(c.threads > 0 ? c.threads : omp_get_max_threads())
    for (std::int64_t i = 0; i < n; ++i) reports[static_cast<std::size_t>(i)] = run_scenario(configs[static_cast<std::size_t>(i)]);

    Sink sink(c.out);
    sink.os() << csv_header() << '\n';
    TimingSink t(c.timing, kRunTimingHeader);
    bool ok = true;
    for (const auto& r : reports) {
        sink.os() << csv_row(r) << '\n';
        timing_row(t, r);
        ok = ok && r.converged;
    }
    write_plot(c.plot, c.out,
               "set multiplot layout 1,2\n"
               "set xlabel 'similarity'\nset ylabel 'metadata bytes'\nset logscale y\n"
               "plot data using (real(substr(strcol(6),5,99))):'metadata_bytes' with linespoints title 'metadata'\n"
               "unset logscale y\nset ylabel 'Select messages'\n"
               "plot data using (real(substr(strcol(6),5,99))):'select_rounds' with linespoints title 'select rounds'\n"
               "unset multiplot\n");
    return ok ? kExitOk : kExitDiverged;
}

// -- fc-sim / fp-sim -----------------------------------------------------------

int cmd_fc(Common c, std::vector<std::uint64_t> sizes, bool chunk_size_given) {
    // Payload size barely matters here, so small chunks keep 10^5 trials cheap.
    if (!chunk_size_given) c.chunk_size = 64;
    if (sizes.empty()) sizes = {50, 100, 500, 1000};
    const std::uint64_t trials = c.trials.value_or(100'000);
    if (trials < 10'000) throw std::invalid_argument("fc-sim needs at least 10000 trials");
    print_config("fc-sim", c, " trials=" + std::to_string(trials));
    Sink sink(c.out);
    sink.os() << "n_chunks,trials,false_consistent,estimate,analytic,sigma,z,collisions,foreign_unmapped\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const auto e = simulate_false_consistency(sizes[i], trials, derive_seed(c.seed, i), c.threads, c.chunk_size);
        const double z = e.sigma() == 0 ? 0.0 : (e.estimate() - e.analytic()) / e.sigma();
        sink.os() << e.n_chunks << ',' << e.trials << ',' << e.false_consistent << ',' << format_double(e.estimate())
                  << ',' << format_double(e.analytic()) << ',' << format_double(e.sigma()) << ',' << format_double(z)
                  << ',' << e.collisions << ',' << e.foreign_unmapped << '\n';
    }
    write_plot(c.plot, c.out,
               "set logscale x\nset xlabel 'chunks'\nset ylabel 'probability'\n"
               "plot data using 'n_chunks':'estimate' with linespoints title 'false consistency (Monte Carlo)', \\\n"
               "     data using 'n_chunks':'analytic' with lines title '1/N'\n");
    return kExitOk;
}

int cmd_fp(const Common& c, std::vector<std::uint64_t> sizes, std::uint64_t probes) {
    if (sizes.empty()) sizes = {1'000, 10'000, 100'000};
    const std::uint64_t trials = c.trials.value_or(100);
    print_config("fp-sim", c, " trials=" + std::to_string(trials) + " probes=" + std::to_string(probes));
    Sink sink(c.out);
    sink.os() << "n_chunks,probe_count,trials,trials_with_fp,probability,per_query_rate\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const std::uint64_t p = probes == 0 ? sizes[i] : probes;
        const auto e = simulate_false_positive(sizes[i], p, trials, derive_seed(c.seed, i), c.threads);
        sink.os() << e.n_chunks << ',' << e.probe_count << ',' << e.trials << ',' << e.trials_with_fp << ','
                  << format_double(e.probability()) << ',' << format_double(e.per_query_rate()) << '\n';
    }
    write_plot(c.plot, c.out,
               "set logscale x\nset xlabel 'chunks'\nset ylabel 'probability'\nset yrange [0:1.05]\n"
               "plot data using 'n_chunks':'probability' with linespoints title 'P(at least one false positive)', \\\n"
               "     data using 'n_chunks':'per_query_rate' with linespoints title 'per-query rate'\n");
    return kExitOk;
}

// -- overhead -------------------------------------------------------------------

int cmd_overhead(const Common& c) {
    std::vector<double> grid = c.size_mb ? std::vector<double>{*c.size_mb} : std::vector<double>{1, 10, 100};
    if (c.large && !c.size_mb) grid.push_back(1000);
    const int repeats = static_cast<int>(c.trials.value_or(3));
    print_config("overhead", c, " repeats=" + std::to_string(repeats));
    Sink sink(c.out);
    sink.os() << "storage_mb,n_chunks,proof_bytes,size_bits,bits_per_chunk\n";
    TimingSink t(c.timing, "storage_mb,n_chunks,create_us_per_chunk,verify_us_per_chunk");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const std::uint64_t n = std::max<std::uint64_t>(1, bytes_of_mb(grid[i]) / c.chunk_size);
        const OverheadPoint p = measure_overhead(n, c.chunk_size, derive_seed(c.seed, i), repeats, c.threads);
        sink.os() << format_double(grid[i]) << ',' << p.n_chunks << ',' << p.proof_bytes << ',' << p.size_bits << ','
                  << format_double(p.bits_per_chunk()) << '\n';
        t.row(format_double(grid[i]) + "," + std::to_string(n) + "," + format_double(p.create_us_per_chunk()) + "," +
              format_double(p.verify_us_per_chunk()));
    }
    write_plot(c.plot, c.out,
               "set logscale x\nset xlabel 'storage (MB)'\nset ylabel 'bits per chunk'\n"
               "plot data using 'storage_mb':'bits_per_chunk' with linespoints title 'proof size'\n");
    return kExitOk;
}

// -- bench ------------------------------------------------------------------------

int cmd_bench(const Common& c) {
    std::vector<std::uint64_t> sizes = {2'560, 25'600};
    if (c.large) sizes.push_back(256'000);
    const int threads = c.threads > 0 ? c.threads : omp_get_max_threads();
    const int repeats = static_cast<int>(c.trials.value_or(3));
    print_config("bench", c, " repeats=" + std::to_string(repeats));
    Sink sink(c.out);
    sink.os() << "kernel,n,identical\n";
    TimingSink t(c.timing, "kernel,n,threads,serial_seconds,parallel_seconds,speedup");

    auto best_of = [repeats](const std::function<void()>& fn) {
        double best = 0;
        for (int r = 0; r < std::max(1, repeats); ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            fn();
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            best = r == 0 ? s : std::min(best, s);
        }
        return best;
    };
    auto report = [&](const std::string& kernel, std::uint64_t n, bool same, double serial, double parallel) {
        sink.os() << kernel << ',' << n << ',' << (same ? 1 : 0) << '\n';
        t.row(kernel + "," + std::to_string(n) + "," + std::to_string(threads) + "," + format_double(serial) + "," +
              format_double(parallel) + "," + format_double(parallel > 0 ? serial / parallel : 0.0));
    };

    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const std::uint64_t n = sizes[i];
        ChunkFactory factory(derive_seed(c.seed, i), c.chunk_size);
        const std::vector<Chunk> chunks = factory.make(n);
        std::vector<const Chunk*> ptrs;
        for (const Chunk& ch : chunks) ptrs.push_back(&ch);
        const Nonce nonce = beacon_nonce(i + 1);
        std::vector<Hash256> a(n), b(n);
        const double s1 = best_of([&] { chunk_proofs_serial(nonce, ptrs, a); });
        const double p1 = best_of([&] { chunk_proofs_parallel(nonce, ptrs, b, threads); });
        report("chunk_proofs", n, a == b, s1, p1);

        Mphf ms, mp;
        const double s2 = best_of([&] { ms = Mphf::build_serial(a); });
        const double p2 = best_of([&] { mp = Mphf::build(a, MphfBuildOptions{2.0, threads}); });
        report("mphf_build", n, ms.serialize() == mp.serialize(), s2, p2);
    }
    return kExitOk;
}

// -- compare-baseline ---------------------------------------------------------------

int cmd_compare(const Common& c, std::vector<std::string> scenarios) {
    if (scenarios.empty()) scenarios = {"cl:0.1", "cl:0.5", "cl:0.9", "ca:10"};
    std::vector<std::size_t> peer_grid = c.peers ? std::vector<std::size_t>{*c.peers} : std::vector<std::size_t>{8};
    std::vector<double> size_grid = c.size_mb ? std::vector<double>{*c.size_mb} : std::vector<double>{1, 10, 100};
    if (c.large) {
        if (!c.peers) peer_grid = {8, 17, 26};
        if (!c.size_mb) size_grid.push_back(1000);
    }
    print_config("compare-baseline", c, "");

    std::vector<ScenarioConfig> configs;
    for (std::size_t peers : peer_grid) {
        for (double mb : size_grid) {
            for (const std::string& s : scenarios) {
                ScenarioConfig cfg = base_config(c);
                cfg.peers = peers;
                cfg.total_storage_bytes = bytes_of_mb(mb);
                cfg.scenario = parse_scenario(s);
                cfg.validate();
                configs.push_back(cfg);
            }
        }
    }

    Sink sink(c.out);
    sink.os() << "peers,storage_bytes,scenario,seed,snips_metadata,baseline_metadata,savings_pct,snips_converged,"
                 "baseline_converged,snips_messages,baseline_messages,snips_select_messages,snips_upload_bytes,"
                 "baseline_upload_bytes\n";
    TimingSink t(c.timing, kRunTimingHeader);
    bool ok = true;
    for (const ScenarioConfig& base : configs) {
        ScenarioConfig sc = base;
        sc.protocol = Protocol::snips;
        ScenarioConfig bc = base;
        bc.protocol = Protocol::baseline;
        const MetricsReport s = run_scenario(sc);
        const MetricsReport b = run_scenario(bc);
        const double savings =
            b.metadata_bytes == 0 ? 0.0
                                  : 100.0 * (1.0 - static_cast<double>(s.metadata_bytes) / static_cast<double>(b.metadata_bytes));
        sink.os() << base.peers << ',' << base.total_storage_bytes << ',' << scenario_label(base.scenario) << ','
                  << base.seed << ',' << s.metadata_bytes << ',' << b.metadata_bytes << ',' << format_double(savings)
                  << ',' << (s.converged ? 1 : 0) << ',' << (b.converged ? 1 : 0) << ',' << s.messages << ','
                  << b.messages << ',' << s.select_messages << ',' << s.upload_bytes << ',' << b.upload_bytes
                  << '\n';
        timing_row(t, s);
        timing_row(t, b);
        ok = ok && s.converged && b.converged;
    }
    write_plot(c.plot, c.out,
               "set logscale y\nset xlabel 'row'\nset ylabel 'metadata bytes'\n"
               "plot data using 0:'snips_metadata' with linespoints title 'SNIPS', \\\n"
               "     data using 0:'baseline_metadata' with linespoints title 'list exchange'\n");
    return ok ? kExitOk : kExitDiverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SNIPS storage-proof synchronization experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "snips 1.0");

    Common common;
    common.seed = default_seed();

    std::string scenario = "sim:1";
    std::string protocol = "snips";
    std::string trace;
    std::uint64_t max_rounds = 10;
    auto* sync = app.add_subcommand("sync", "run one synchronization scenario");
    add_common(sync, common);
    sync->add_option("--scenario", scenario, "cl:<fraction> | ca:<MB> | sim:<similarity>");
    sync->add_option("--protocol", protocol, "snips | baseline");
    sync->add_option("--trace", trace, "write a JSON-lines message trace");
    sync->add_option("--max-rounds", max_rounds, "beacon rounds before giving up")->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep-similarity", "two peers, similarity 0, 0.1, ..., 1");
    add_common(sweep, common);

    std::vector<std::uint64_t> fc_sizes;
    auto* fc = app.add_subcommand("fc-sim", "false-consistency Monte Carlo");
    add_common(fc, common);
    fc->add_option("--sizes", fc_sizes, "chunk counts (default 50 100 500 1000)");

    std::vector<std::uint64_t> fp_sizes;
    std::uint64_t probes = 0;
    auto* fp = app.add_subcommand("fp-sim", "false-positive Monte Carlo");
    add_common(fp, common);
    fp->add_option("--sizes", fp_sizes, "chunk counts (default 1000 10000 100000)");
    fp->add_option("--probes", probes, "non-member queries per trial (0 = n)");

    auto* overhead = app.add_subcommand("overhead", "proof size and compute time per chunk");
    add_common(overhead, common);

    auto* bench = app.add_subcommand("bench", "parallel kernels against their serial references");
    add_common(bench, common);

    std::vector<std::string> compare_scenarios;
    auto* compare = app.add_subcommand("compare-baseline", "SNIPS against full list exchange");
    add_common(compare, common);
    compare->add_option("--scenario", compare_scenarios, "scenarios (default cl:0.1 cl:0.5 cl:0.9 ca:10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sync) return cmd_sync(common, scenario, protocol, trace, max_rounds);
        if (*sweep) return cmd_sweep(common);
        if (*fc) return cmd_fc(common, fc_sizes, fc->count("--chunk-size") > 0);
        if (*fp) return cmd_fp(common, fp_sizes, probes);
        if (*overhead) return cmd_overhead(common);
        if (*bench) return cmd_bench(common);
        if (*compare) return cmd_compare(common, compare_scenarios);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDiverged;
    }
    return kExitUsage;
}
