#include "shardagg/cli/commands.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "shardagg/cli/config.hpp"
#include "shardagg/cli/report.hpp"
#include "shardagg/grad/fedavg.hpp"
#include "shardagg/topo/verify.hpp"

#ifndef SHARDAGG_DEFAULT_IDLE_TABLE
#define SHARDAGG_DEFAULT_IDLE_TABLE "data/idle_default.csv"
#endif

namespace shardagg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by simulate and sweep. Each overrides the config file only
// when given on the command line.
struct CommonFlags {
    std::string config_path;
    std::string topology;
    std::int64_t clients = 0;
    std::int64_t shards = 0;
    std::string model;
    double gradient_mb = 0.0;
    double read_mbps = 0.0;
    double write_mbps = 0.0;
    double compute_mbps = 0.0;
    double memory_mb = 0.0;
    bool cold_start = false;
    std::uint64_t seed = 0;
    std::int64_t repetitions = 0;
    std::string output_dir;
    std::string out_name;

    CLI::Option* topology_opt = nullptr;
    CLI::Option* clients_opt = nullptr;
    CLI::Option* shards_opt = nullptr;
    CLI::Option* model_opt = nullptr;
    CLI::Option* gradient_opt = nullptr;
    CLI::Option* read_opt = nullptr;
    CLI::Option* write_opt = nullptr;
    CLI::Option* compute_opt = nullptr;
    CLI::Option* memory_opt = nullptr;
    CLI::Option* cold_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* reps_opt = nullptr;
    CLI::Option* outdir_opt = nullptr;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config_path, "JSON experiment config");
        topology_opt = app->add_option("--topology", topology, "gradsharding | lambdafl | lifl");
        clients_opt = app->add_option("--n", clients, "number of clients N");
        shards_opt = app->add_option("--m", shards, "number of shards M (GradsSharding)");
        model_opt = app->add_option("--model", model, "registry model name");
        gradient_opt = app->add_option("--gradient-mb", gradient_mb, "gradient size in MB (overrides --model)");
        read_opt = app->add_option("--throughput", read_mbps, "per-function S3 read throughput, MB/s");
        write_opt = app->add_option("--write-throughput", write_mbps, "per-function S3 write throughput, MB/s");
        compute_opt = app->add_option("--compute-mbps", compute_mbps, "accumulation throughput, MB/s");
        memory_opt = app->add_option("--memory-mb", memory_mb, "fixed aggregator memory instead of auto-provisioning");
        cold_opt = app->add_flag("--cold-start", cold_start, "add the cold-start penalty to every invocation");
        seed_opt = app->add_option("--seed", seed, "RNG seed for materialized client gradients");
        reps_opt = app->add_option("--repetitions", repetitions, "rounds per configuration");
        outdir_opt = app->add_option("--output-dir", output_dir, "directory for result files");
        app->add_option("--out", out_name, "result file name inside the output directory");
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
        apply_environment(c);
        if (topology_opt->count()) c.topology = topology;
        if (clients_opt->count()) c.clients = clients;
        if (shards_opt->count()) c.shards = shards;
        if (model_opt->count()) {
            c.model = model;
            c.gradient_mb.reset();
        }
        if (gradient_opt->count()) c.gradient_mb = gradient_mb;
        if (read_opt->count()) c.read_mbps = read_mbps;
        if (write_opt->count()) c.write_mbps = write_mbps;
        if (compute_opt->count()) c.compute_mbps = compute_mbps;
        if (memory_opt->count()) c.memory_mb = memory_mb;
        if (cold_opt->count()) c.cold_start = cold_start;
        if (seed_opt->count()) c.seed = seed;
        if (reps_opt->count()) c.repetitions = repetitions;
        if (outdir_opt->count()) c.output_dir = output_dir;
        return c;
    }
};

fs::path output_path(const ExperimentConfig& c, const std::string& name) {
    const fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("output_dir", fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
    return dir / name;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("output_dir", fmt::format("cannot write '{}'", path.string()));
    f << content;
}

InfeasibleRecord infeasible_record(const ExperimentConfig& c, const ModelSpec& m) {
    InfeasibleRecord r;
    r.topology = std::string(topo::to_string(c.kind().family));
    r.clients = c.clients;
    r.shards = c.kind().shards;
    r.model = m.name;
    r.gradient_mb = m.gradient_mb;
    r.limit_mb = c.limits.max_memory_mb;
    return r;
}

struct SimulateFlags {
    CommonFlags common;
    bool print_json = false;
    std::string result_file;
};

int cmd_simulate(const SimulateFlags& f, std::ostream& out, std::ostream& err) {
    ExperimentConfig c = f.common.resolve();
    c.validate();
    const ModelSpec model = c.resolved_model();
    const auto kind = c.kind();
    const auto sim = c.sim_config();
    const std::string name = f.common.out_name.empty() ? "simulate.json" : f.common.out_name;

    json doc;
    doc["config"] = config_to_json(c);
    doc["model"] = {{"name", model.name}, {"gradient_mb", model.gradient_mb}, {"param_count", model.param_count}};

    std::optional<InfeasibleRecord> infeasible;
    std::vector<topo::RoundMetrics> rounds;
    try {
        for (std::int64_t rep = 0; rep < c.repetitions; ++rep) {
            auto s = sim;
            s.plan.round = static_cast<int>(rep);
            s.seed = c.seed + static_cast<std::uint64_t>(rep);
            rounds.push_back(topo::simulate_round(kind, c.clients, model.gradient_mb, s));
        }
    } catch (const Infeasible& e) {
        infeasible = infeasible_record(c, model);
        infeasible->required_mb = e.required_mb();
        infeasible->limit_mb = e.limit_mb();
        infeasible->reason = e.what();
    } catch (const OutOfMemory& e) {
        infeasible = infeasible_record(c, model);
        infeasible->required_mb = e.required_mb();
        infeasible->limit_mb = e.allocated_mb();
        infeasible->reason = e.what();
    } catch (const Timeout& e) {
        infeasible = infeasible_record(c, model);
        infeasible->limit_mb = c.memory_mb.value_or(c.limits.max_memory_mb);
        infeasible->reason = e.what();
    }

    if (infeasible) {
        doc["feasible"] = false;
        doc["infeasibility"] = infeasible_to_json(*infeasible);
    } else {
        doc["feasible"] = true;
        json records = json::array();
        for (const auto& r : rounds) records.push_back(metrics_to_json(r, c.prices));
        doc["rounds"] = std::move(records);
    }

    const auto path = output_path(c, name);
    const std::string text = doc.dump(2) + "\n";
    write_file(path, text);

    if (!f.result_file.empty() && !infeasible) {
        const auto& result = rounds.back().result;
        if (!result.is_materialized()) {
            err << "warning: result is phantom; --result-file not written\n";
        } else {
            grad::write_golden(f.result_file, result);
        }
    }

    if (f.print_json) {
        out << text;
    } else if (infeasible) {
        out << fmt::format("infeasible: {} needs {:.0f} MB per aggregator, limit {:.0f} MB\n",
                           kind.label(), std::ceil(infeasible->required_mb), infeasible->limit_mb);
        out << fmt::format("wrote {}\n", path.string());
    } else {
        const auto& last = rounds.back();
        out << human_table(last, econ::cost_of_round(last, c.prices));
        out << fmt::format("wrote {}\n", path.string());
    }
    if (infeasible) err << "error: " << infeasible->reason << "\n";
    return infeasible ? kExitInfeasible : kExitOk;
}

struct SweepFlags {
    CommonFlags common;
    std::string axis;
    std::vector<std::string> values;
};

std::int64_t parse_int(const std::string& s, const char* field) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
        throw ConfigError(field, fmt::format("'{}' is not an integer", s));
    }
    return v;
}

ModelSpec parse_model_value(const std::string& s) {
    if (auto m = find_model(s)) return *m;
    double mb = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), mb);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !(mb > 0.0) || !std::isfinite(mb)) {
        throw ConfigError("--values", fmt::format("'{}' is neither a registry model nor a size in MB", s));
    }
    return model_for_size(mb);
}

int cmd_sweep(const SweepFlags& f, std::ostream& out, std::ostream&) {
    ExperimentConfig c = f.common.resolve();
    if (f.values.empty()) throw ConfigError("--values", "empty value list");
    const bool all_topologies = f.common.topology_opt->count() && f.common.topology == "all";
    if (all_topologies) c.topology = "gradsharding";
    if (f.axis == "model-size" && !f.common.topology_opt->count()) c.topology = "gradsharding";
    c.validate();

    std::vector<topo::GridPoint> grid;
    if (f.axis == "m") {
        if (c.kind().family != topo::Topology::GradsSharding || all_topologies) {
            throw ConfigError("--topology", "the m axis only applies to gradsharding");
        }
        const ModelSpec model = c.resolved_model();
        for (const auto& v : f.values) {
            const std::int64_t m = parse_int(v, "--values");
            if (m < 1) throw ConfigError("--values", fmt::format("shard count {} must be >= 1", m));
            if (m > model.param_count) throw ConfigError("--values", fmt::format("shard count {} exceeds the gradient's parameter count", m));
            grid.push_back({topo::TopologyKind::grads_sharding(m), model.gradient_mb, model.name});
        }
    } else if (f.axis == "model-size") {
        const bool fixed_m = f.common.shards_opt->count() > 0;
        std::vector<topo::Topology> families;
        if (all_topologies || !f.common.topology_opt->count()) {
            families = {topo::Topology::GradsSharding, topo::Topology::LambdaFL, topo::Topology::LIFL};
        } else {
            families = {c.kind().family};
        }
        for (const auto& v : f.values) {
            const ModelSpec model = parse_model_value(v);
            for (auto fam : families) {
                topo::TopologyKind kind{fam, 1};
                if (fam == topo::Topology::GradsSharding) {
                    kind.shards = fixed_m ? c.shards : model.reference_shards;
                    if (kind.shards > model.param_count) {
                        throw ConfigError("--m", fmt::format("shard count exceeds the parameter count of {}", model.name));
                    }
                }
                grid.push_back({kind, model.gradient_mb, model.name});
            }
        }
    } else {
        throw ConfigError("--axis", fmt::format("unknown axis '{}' (expected m or model-size)", f.axis));
    }

    std::vector<std::vector<topo::SweepPoint>> reps;
    for (std::int64_t rep = 0; rep < c.repetitions; ++rep) {
        auto s = c.sim_config();
        s.plan.round = static_cast<int>(rep);
        s.seed = c.seed + static_cast<std::uint64_t>(rep);
        reps.push_back(topo::sweep(grid, c.clients, s));
    }

    std::string csv = csv_header() + "\n";
    for (const auto& row : csv_rows(reps, c.prices)) csv += format_csv_row(row) + "\n";

    const std::string name = f.common.out_name.empty() ? fmt::format("sweep_{}.csv", f.axis) : f.common.out_name;
    const auto path = output_path(c, name);
    write_file(path, csv);

    json sidecar;
    sidecar["config"] = config_to_json(c);
    sidecar["axis"] = f.axis;
    sidecar["values"] = f.values;
    sidecar["topology"] = all_topologies ? "all" : c.topology;
    sidecar["csv"] = path.filename().string();
    write_file(fs::path(path.string() + ".config.json"), sidecar.dump(2) + "\n");

    out << csv;
    return kExitOk;
}

struct IdleFlags {
    std::string table;
    std::string out_file;
};

int cmd_idle(const IdleFlags& f, std::ostream& out, std::ostream& err) {
    fs::path path = f.table;
    if (path.empty()) {
        path = "data/idle_default.csv";
        if (!fs::exists(path)) path = SHARDAGG_DEFAULT_IDLE_TABLE;
    }
    std::ifstream in(path);
    if (!in) throw ConfigError("--train-table", fmt::format("cannot open '{}'", path.string()));
    const auto rows = parse_idle_table(in);

    std::string table = "model,t_train_ms,t_agg_ms,idle_pct\n";
    for (const auto& r : rows) {
        const auto rep = [&] {
            try {
                return econ::idle_ratio(r.t_train_ms, r.t_agg_ms);
            } catch (const InvalidArgument& e) {
                throw ConfigError("--train-table", fmt::format("{}: {}", r.model, e.what()));
            }
        }();
        if (r.t_agg_ms == 0.0) {
            err << fmt::format("warning: {} has t_agg_ms = 0; idle ratio is degenerate (100%)\n", r.model);
        }
        table += fmt::format("{},{},{},{:.1f}\n", r.model, r.t_train_ms, r.t_agg_ms, 100.0 * rep.idle_ratio);
    }
    out << table;
    if (!f.out_file.empty()) write_file(f.out_file, table);
    return kExitOk;
}

int cmd_verify(std::ostream& out) {
    bool ok = true;
    for (const auto& s : topo::run_all_suites()) {
        out << fmt::format("{:<22} {:>5} cases  {}\n", s.name, s.cases, s.passed() ? "PASS" : "FAIL");
        for (const auto& msg : s.failures) out << "    " << msg << "\n";
        ok = ok && s.passed();
    }
    return ok ? kExitOk : kExitInvariantViolation;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Serverless gradient-aggregation simulator", "shardagg"};
    app.require_subcommand(1);

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "run one aggregation round and write its JSON record");
    sim.common.attach(simulate);
    simulate->add_flag("--json", sim.print_json, "print the JSON record instead of the summary table");
    simulate->add_option("--result-file", sim.result_file, "write the reconstructed gradient (materialized runs)");

    SweepFlags sw;
    auto* sweep = app.add_subcommand("sweep", "run a grid of rounds and write one CSV row per point");
    sw.common.attach(sweep);
    sweep->add_option("--axis", sw.axis, "m | model-size")->required();
    sweep->add_option("--values", sw.values, "comma-separated M values, or model names / sizes in MB")
        ->delimiter(',')
        ->required();

    IdleFlags idle;
    auto* idle_cmd = app.add_subcommand("idle", "parameter-server idle ratio per training round");
    idle_cmd->add_option("--train-table", idle.table, "CSV with model,t_train_ms,t_agg_ms");
    idle_cmd->add_option("--out", idle.out_file, "also write the table to this file");

    auto* verify = app.add_subcommand("verify", "run the built-in self-check suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim, out, err);
        if (sweep->parsed()) return cmd_sweep(sw, out, err);
        if (idle_cmd->parsed()) return cmd_idle(idle, out, err);
        if (verify->parsed()) return cmd_verify(out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const Infeasible& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInvariantViolation;
    }
    return kExitConfigError;
}

}  // namespace shardagg::cli
