#include "shardagg/cli/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

namespace shardagg::cli {

using nlohmann::json;

namespace {

std::string opt(const std::optional<double>& v, const char* spec) {
    return v ? fmt::format(fmt::runtime(spec), *v) : std::string{};
}

std::string opt(const std::optional<std::int64_t>& v) { return v ? fmt::format("{}", *v) : std::string{}; }

std::string topology_name(const topo::TopologyKind& k) { return std::string(topo::to_string(k.family)); }

json issuer_split(const std::array<std::int64_t, store::kIssuerCount>& by) {
    return {{"client_upload", by[0]}, {"aggregator", by[1]}, {"client_readback", by[2]}};
}

json cost_json(const econ::CostReport& c) {
    return {{"lambda_cost", c.lambda_cost},   {"s3_put_cost", c.s3_put_cost}, {"s3_get_cost", c.s3_get_cost},
            {"s3_cost", c.s3_cost},           {"total", c.total},             {"cost_per_1k", c.per_1k_rounds}};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

}  // namespace

std::string csv_header() {
    std::string out;
    for (std::size_t i = 0; i < kCsvColumns.size(); ++i) {
        if (i) out += ',';
        out += kCsvColumns[i];
    }
    return out;
}

std::string format_csv_row(const CsvRow& r) {
    const auto b = r.breakdown;
    return fmt::format("{},{},{},{},{:.4f},{},{},{},{},{},{},{},{},{},{},{:.0f},{}", r.topology, r.clients, r.shards,
                       r.model, r.shard_mb, opt(b ? std::optional(b->read_s) : std::nullopt, "{:.4f}"),
                       opt(b ? std::optional(b->compute_s) : std::nullopt, "{:.4f}"),
                       opt(b ? std::optional(b->write_s) : std::nullopt, "{:.4f}"), opt(r.wall_clock_s, "{:.4f}"),
                       opt(r.speedup_vs_first, "{:.4f}"), opt(r.puts), opt(r.gets),
                       opt(r.cost ? std::optional(r.cost->lambda_cost) : std::nullopt, "{:.8f}"),
                       opt(r.cost ? std::optional(r.cost->s3_cost) : std::nullopt, "{:.8f}"),
                       opt(r.cost ? std::optional(r.cost->per_1k_rounds) : std::nullopt, "{:.6f}"), r.peak_mem_mb,
                       r.feasible ? "true" : "false");
}

CsvRow csv_row(const topo::SweepPoint& p, const econ::PriceSheet& prices) {
    CsvRow r;
    r.topology = topology_name(p.point.kind);
    r.clients = p.clients;
    r.shards = p.point.kind.shards;
    r.model = p.point.model;
    r.shard_mb = p.point.kind.family == topo::Topology::GradsSharding
                     ? p.point.gradient_mb / static_cast<double>(p.point.kind.shards)
                     : p.point.gradient_mb;
    r.feasible = p.feasible();
    if (!p.feasible()) {
        r.peak_mem_mb = std::ceil(p.required_mb);
        return r;
    }
    const auto& m = *p.metrics;
    r.shard_mb = m.shard_mb();
    r.peak_mem_mb = std::ceil(m.peak_memory_estimate_mb());
    r.breakdown = m.critical_path();
    r.wall_clock_s = m.wall_clock_s;
    if (p.speedup > 0.0) r.speedup_vs_first = p.speedup;
    r.puts = m.stats.puts;
    r.gets = m.stats.gets;
    r.cost = econ::cost_of_round(m, prices);
    return r;
}

std::vector<CsvRow> csv_rows(const std::vector<std::vector<topo::SweepPoint>>& reps, const econ::PriceSheet& prices) {
    if (reps.empty()) return {};
    std::vector<CsvRow> rows;
    for (const auto& p : reps.front()) rows.push_back(csv_row(p, prices));
    if (reps.size() == 1) return rows;

    const double n = static_cast<double>(reps.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto& row = rows[i];
        if (!row.feasible) continue;
        topo::TimeBreakdown b{};
        double wall = 0.0, speedup = 0.0, peak = 0.0;
        econ::CostReport c{};
        for (const auto& rep : reps) {
            const CsvRow r = csv_row(rep.at(i), prices);
            if (!r.feasible || r.puts != row.puts || r.gets != row.gets) {
                throw InvariantViolation(fmt::format("repetitions disagree on grid point {}", i));
            }
            b.read_s += r.breakdown->read_s;
            b.compute_s += r.breakdown->compute_s;
            b.write_s += r.breakdown->write_s;
            wall += *r.wall_clock_s;
            speedup += r.speedup_vs_first.value_or(0.0);
            peak += r.peak_mem_mb;
            c.lambda_cost += r.cost->lambda_cost;
            c.s3_put_cost += r.cost->s3_put_cost;
            c.s3_get_cost += r.cost->s3_get_cost;
            c.s3_cost += r.cost->s3_cost;
            c.total += r.cost->total;
            c.per_1k_rounds += r.cost->per_1k_rounds;
        }
        row.breakdown = topo::TimeBreakdown{b.read_s / n, b.compute_s / n, b.write_s / n};
        row.wall_clock_s = wall / n;
        if (row.speedup_vs_first) row.speedup_vs_first = speedup / n;
        row.peak_mem_mb = peak / n;
        row.cost = econ::CostReport{c.lambda_cost / n, c.s3_put_cost / n, c.s3_get_cost / n,
                                    c.s3_cost / n,      c.total / n,       c.per_1k_rounds / n};
    }
    return rows;
}

json metrics_to_json(const topo::RoundMetrics& m, const econ::PriceSheet& prices) {
    json j;
    j["feasible"] = true;
    j["topology"] = topology_name(m.kind);
    j["label"] = m.kind.label();
    j["N"] = m.clients;
    j["M"] = m.kind.shards;
    j["gradient"] = {{"param_count", m.gradient.param_count},
                     {"size_mb", m.gradient.size_mb()},
                     {"phantom", m.gradient.phantom}};
    j["shard_mb"] = m.shard_mb();
    j["wall_clock_s"] = m.wall_clock_s;
    const auto cp = m.critical_path();
    j["critical_path"] = {{"s3_read_s", cp.read_s}, {"compute_s", cp.compute_s}, {"s3_write_s", cp.write_s}};
    j["client_upload_s"] = m.client_upload_s;
    j["client_readback_s"] = m.client_readback_s;
    j["puts"] = m.stats.puts;
    j["gets"] = m.stats.gets;
    j["store"] = {{"puts", m.stats.puts},
                  {"gets", m.stats.gets},
                  {"bytes_written", m.stats.bytes_written},
                  {"bytes_read", m.stats.bytes_read},
                  {"puts_by_issuer", issuer_split(m.stats.puts_by)},
                  {"gets_by_issuer", issuer_split(m.stats.gets_by)}};
    j["predicted_ops"] = {{"puts", m.predicted.puts},
                          {"gets_agg", m.predicted.gets_agg},
                          {"gets_clients", m.predicted.gets_clients},
                          {"total", m.predicted.total()}};
    j["billed_gb_seconds"] = m.billed_gb_seconds;
    j["invocations"] = m.invocation_count();
    j["peak_memory_estimate_mb"] = m.peak_memory_estimate_mb();
    j["allocated_memory_mb"] = m.allocated_memory_mb();
    j["cost"] = cost_json(econ::cost_of_round(m, prices));

    json phases = json::array();
    for (const auto& p : m.phases) {
        json inv = json::array();
        for (const auto& r : p.invocations) {
            inv.push_back({{"function", r.function},
                           {"start_s", r.start_s},
                           {"read_s", r.read_s},
                           {"compute_s", r.compute_s},
                           {"write_s", r.write_s},
                           {"cold_start_s", r.cold_start_s},
                           {"total_s", r.total_s},
                           {"billed_duration_s", r.billed_duration_s},
                           {"peak_memory_estimate_mb", r.peak_memory_estimate_mb},
                           {"allocated_memory_mb", r.allocated_memory_mb},
                           {"billed_gb_seconds", r.billed_gb_seconds},
                           {"gets", r.gets},
                           {"puts", r.puts},
                           {"bytes_read", r.bytes_read},
                           {"bytes_written", r.bytes_written},
                           {"measured_peak_live_bytes", r.measured_peak_live_bytes}});
        }
        phases.push_back({{"name", p.name},
                          {"start_s", p.start_s},
                          {"wall_clock_s", p.wall_clock_s},
                          {"billed_gb_seconds", p.billed_gb_seconds},
                          {"invocations", std::move(inv)}});
    }
    j["phases"] = std::move(phases);

    if (m.result.is_materialized()) {
        const auto v = m.result.values();
        j["result"] = {{"phantom", false}, {"param_count", m.result.param_count()}};
        if (m.result.param_count() <= kMaxInlineResultValues) {
            j["result"]["values"] = std::vector<float>(v.begin(), v.end());
        }
    } else {
        j["result"] = {{"phantom", true}, {"param_count", m.result.param_count()}};
    }
    return j;
}

json infeasible_to_json(const InfeasibleRecord& r) {
    return {{"feasible", false},       {"topology", r.topology},   {"N", r.clients},
            {"M", r.shards},           {"model", r.model},         {"gradient_mb", r.gradient_mb},
            {"required_mb", r.required_mb}, {"limit_mb", r.limit_mb}, {"reason", r.reason}};
}

std::string human_table(const topo::RoundMetrics& m, const econ::CostReport& cost) {
    const auto cp = m.critical_path();
    std::string out;
    out += fmt::format("{:<22}{}\n", "topology", m.kind.label());
    out += fmt::format("{:<22}{}\n", "clients", m.clients);
    out += fmt::format("{:<22}{:.2f} MB ({} params, {})\n", "gradient", m.gradient.size_mb(), m.gradient.param_count,
                       m.gradient.phantom ? "phantom" : "materialized");
    out += fmt::format("{:<22}{:.2f} MB\n", "object per aggregator", m.shard_mb());
    out += fmt::format("{:<22}{}\n", "aggregators", m.invocation_count());
    out += fmt::format("{:<22}{:.0f} MB (estimate {:.2f} MB)\n", "memory", m.allocated_memory_mb(),
                       m.peak_memory_estimate_mb());
    out += fmt::format("{:<22}{:.3f} s\n", "s3 read", cp.read_s);
    out += fmt::format("{:<22}{:.3f} s\n", "compute", cp.compute_s);
    out += fmt::format("{:<22}{:.3f} s\n", "s3 write", cp.write_s);
    out += fmt::format("{:<22}{:.3f} s\n", "wall clock", m.wall_clock_s);
    out += fmt::format("{:<22}{} puts / {} gets ({} total)\n", "s3 ops", m.stats.puts, m.stats.gets,
                       m.stats.total_ops());
    out += fmt::format("{:<22}{:.4f} GB-s\n", "billed", m.billed_gb_seconds);
    out += fmt::format("{:<22}${:.6f} (lambda {:.6f}, s3 {:.6f})\n", "cost per round", cost.total,
                       cost.lambda_cost, cost.s3_cost);
    out += fmt::format("{:<22}${:.2f}\n", "cost per 1k rounds", cost.per_1k_rounds);
    return out;
}

std::vector<IdleRow> parse_idle_table(std::istream& in) {
    std::vector<IdleRow> rows;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto cells = split_csv_line(line);
        const std::string where = fmt::format("train-table line {}", lineno);
        if (!header_seen) {
            if (cells.size() != 3 || trim(cells[0]) != "model" || trim(cells[1]) != "t_train_ms" ||
                trim(cells[2]) != "t_agg_ms") {
                throw ConfigError(where, "expected header 'model,t_train_ms,t_agg_ms'");
            }
            header_seen = true;
            continue;
        }
        if (cells.size() != 3) throw ConfigError(where, fmt::format("expected 3 columns, got {}", cells.size()));
        IdleRow r;
        r.model = trim(cells[0]);
        if (r.model.empty()) throw ConfigError(where, "empty model name");
        auto number = [&](const std::string& cell, const char* column) {
            const std::string s = trim(cell);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) {
                throw ConfigError(where, fmt::format("{} is not a number: '{}'", column, s));
            }
            if (v < 0.0) throw ConfigError(where, fmt::format("{} must be >= 0", column));
            return v;
        };
        r.t_train_ms = number(cells[1], "t_train_ms");
        r.t_agg_ms = number(cells[2], "t_agg_ms");
        rows.push_back(std::move(r));
    }
    if (!header_seen) throw ConfigError("train-table", "empty table");
    if (rows.empty()) throw ConfigError("train-table", "no data rows");
    return rows;
}

}  // namespace shardagg::cli
