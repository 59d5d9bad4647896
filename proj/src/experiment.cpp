#include "fujita/experiment.hpp"

#include "fujita/critical_exponent.hpp"
#include "fujita/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace fujita {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (const auto& [k, _] : obj.items())
        if (!allowed.count(k)) throw ValidationError("unknown key '" + k + "' in " + where);
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key + " is missing or has the wrong type");
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    return get<T>(obj, key, where);
}

DataProfile parse_profile(const json& j) {
    check_keys(j, {"kind", "width", "table"}, "solver.profile");
    const auto kind = get_or<std::string>(j, "kind", "gaussian", "solver.profile");
    if (kind == "gaussian") return DataProfile::gaussian(get_or<double>(j, "width", 1.0, "solver.profile"));
    if (kind == "bump") return DataProfile::bump(get_or<double>(j, "width", 1.0, "solver.profile"));
    if (kind == "custom") return DataProfile::custom(get<std::vector<double>>(j, "table", "solver.profile"));
    throw ValidationError("unknown profile kind '" + kind + "'");
}

json profile_json(const DataProfile& p) {
    switch (p.kind) {
        case DataProfile::Kind::gaussian: return json{{"kind", "gaussian"}, {"width", p.width}};
        case DataProfile::Kind::bump: return json{{"kind", "bump"}, {"width", p.width}};
        case DataProfile::Kind::custom: return json{{"kind", "custom"}, {"table", p.table}};
    }
    return json{};
}

int as_int(double v, const std::string& what) {
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ValidationError(what + " must be an integer");
    return static_cast<int>(v);
}

}  // namespace

ExperimentConfig parse_config(const json& doc, const fs::path& base_dir) {
    check_keys(doc, {"schema_version", "operator", "ell", "n", "nonlinearity", "solver", "sweep", "output_dir", "seed"},
               "config");
    if (!doc.contains("schema_version")) throw ValidationError("config.schema_version is required");
    const int version = get<int>(doc, "schema_version", "config");
    if (version != kSchemaVersion)
        throw ValidationError("unsupported schema_version " + std::to_string(version) + " (expected " +
                              std::to_string(kSchemaVersion) + ")");

    ExperimentConfig cfg;
    if (!doc.contains("operator")) throw ValidationError("config.operator is required");
    const auto& opj = doc["operator"];
    if (opj.is_string()) {
        fs::path p = opj.get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        cfg.op = load_operator(p.string());
    } else {
        cfg.op = parse_operator(opj);
    }
    cfg.ell = get_or<int>(doc, "ell", 0, "config");
    if (cfg.ell < 0 || cfg.ell >= cfg.op->m()) throw ValidationError("config.ell outside 0..m-1");
    if (doc.contains("n")) {
        const int n = get<int>(doc, "n", "config");
        if (n != cfg.op->n()) cfg.op = cfg.op->with_dimension(n);
    }

    if (doc.contains("nonlinearity")) {
        const auto& nl = doc["nonlinearity"];
        check_keys(nl, {"p", "mu"}, "nonlinearity");
        cfg.nonlinear = true;
        if (!nl.contains("p")) throw ValidationError("nonlinearity.p is required");
        if (nl["p"].is_string()) {
            if (nl["p"].get<std::string>() != "critical")
                throw ValidationError("nonlinearity.p must be a number or \"critical\"");
            cfg.p_critical = true;
        } else {
            cfg.p = get<double>(nl, "p", "nonlinearity");
            if (!(cfg.p >= 1)) throw ValidationError("nonlinearity.p must be >= 1");
        }
        if (nl.contains("mu")) cfg.mu = mu_from_json(nl["mu"]);
        if (cfg.p_critical) cfg.p = resolve_critical_p(*cfg.op, cfg.ell);
    }

    if (doc.contains("solver")) {
        const auto& s = doc["solver"];
        check_keys(s, {"grid", "dt", "T", "amplitude", "profile", "cadence", "record_fields", "blowup_factor"},
                   "solver");
        if (s.contains("grid")) {
            check_keys(s["grid"], {"N", "L"}, "solver.grid");
            cfg.grid.N = get_or<int>(s["grid"], "N", cfg.grid.N, "solver.grid");
            cfg.grid.L = get_or<double>(s["grid"], "L", cfg.grid.L, "solver.grid");
        }
        cfg.dt = get_or<double>(s, "dt", cfg.dt, "solver");
        cfg.T = get_or<double>(s, "T", cfg.T, "solver");
        cfg.amplitude = get_or<double>(s, "amplitude", cfg.amplitude, "solver");
        if (s.contains("profile")) cfg.profile = parse_profile(s["profile"]);
        cfg.cadence = get_or<int>(s, "cadence", cfg.cadence, "solver");
        cfg.record_fields = get_or<bool>(s, "record_fields", cfg.record_fields, "solver");
        cfg.blowup_factor = get_or<double>(s, "blowup_factor", cfg.blowup_factor, "solver");
    }
    cfg.grid.n = cfg.op->n();

    if (doc.contains("sweep")) {
        const auto& sw = doc["sweep"];
        check_keys(sw, {"parameter", "values"}, "sweep");
        SweepSpec spec;
        spec.parameter = get<std::string>(sw, "parameter", "sweep");
        static const std::set<std::string> known{"gamma", "amplitude", "p", "n", "N", "dt"};
        if (!known.count(spec.parameter)) throw ValidationError("unknown sweep parameter '" + spec.parameter + "'");
        spec.values = get<std::vector<double>>(sw, "values", "sweep");
        if (spec.values.empty()) throw ValidationError("sweep.values must be non-empty");
        cfg.sweep = spec;
    }
    cfg.output_dir = get_or<std::string>(doc, "output_dir", cfg.output_dir, "config");
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 0, "config");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, fs::path(path).parent_path());
}

double resolve_critical_p(const EvolutionOperator& op, int ell) {
    const auto ce = critical_exponent(op, ell);
    if (ce.p_c.is_infinite()) throw ValidationError("critical exponent is infinite; \"critical\" p is unusable");
    if (ce.p_c.value() <= 1) throw ValidationError("critical exponent is 1; \"critical\" p is unusable");
    return ce.p_c.to_double();
}

double effective_p(const ExperimentConfig& cfg) {
    return cfg.p_critical ? resolve_critical_p(*cfg.op, cfg.ell) : cfg.p;
}

RunConfig make_run_config(const ExperimentConfig& cfg) {
    RunConfig rc;
    rc.grid = cfg.grid;
    rc.grid.n = cfg.op->n();
    rc.dt = cfg.dt;
    rc.T = cfg.T;
    rc.cadence = cfg.cadence;
    rc.profile = cfg.profile;
    rc.amplitude = cfg.amplitude;
    rc.ell = cfg.ell;
    rc.blowup_factor = cfg.blowup_factor;
    rc.record_fields = cfg.record_fields;
    if (cfg.nonlinear) rc.nonlinearity = NonlinearitySpec{effective_p(cfg), cfg.mu, cfg.ell};
    return rc;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& parameter, double value) {
    ExperimentConfig c = cfg;
    if (parameter == "gamma") {
        if (c.mu.family != MuSpec::Family::iterated_log)
            throw ValidationError("sweeping gamma needs an iterated_log mu");
        const double cap = c.mu.cap;
        c.mu = MuSpec::iterated_log(c.mu.depth, value, c.mu.extension_point);
        c.mu.cap = cap;
    } else if (parameter == "amplitude") {
        c.amplitude = value;
    } else if (parameter == "p") {
        if (!(value >= 1)) throw ValidationError("swept p must be >= 1");
        c.p = value;
        c.p_critical = false;
        c.nonlinear = true;
    } else if (parameter == "n") {
        const int n = as_int(value, "swept n");
        c.op = c.op->with_dimension(n);
        c.grid.n = n;
    } else if (parameter == "N") {
        c.grid.N = as_int(value, "swept N");
    } else if (parameter == "dt") {
        c.dt = value;
    } else {
        throw ValidationError("unknown sweep parameter '" + parameter + "'");
    }
    if (c.p_critical) c.p = resolve_critical_p(*c.op, c.ell);
    return c;
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
    if (!cfg.sweep) throw ValidationError("config has no sweep block");
    if (cfg.sweep->values.empty()) throw ValidationError("sweep.values must be non-empty");
    SweepReport rep;
    rep.parameter = cfg.sweep->parameter;
    for (double v : cfg.sweep->values) {
        SweepEntry e;
        e.value = v;
        try {
            const auto c = apply_sweep_value(cfg, cfg.sweep->parameter, v);
            if (c.nonlinear) e.p = c.p;
            e.report = run(*c.op, make_run_config(c));
        } catch (const ValidationError& ex) {
            e.error = std::string("validation: ") + ex.what();
        } catch (const NumericalError& ex) {
            e.error = std::string("numerical: ") + ex.what();
        }
        rep.entries.push_back(std::move(e));
    }
    return rep;
}

fs::path resolve_output_dir(const std::optional<std::string>& flag, const std::string& config_value) {
    if (flag) return *flag;
    if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
    return config_value;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw ValidationError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ValidationError("write failed for '" + path.string() + "'");
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ostringstream s;
    for (std::size_t i = 0; i < header.size(); ++i) s << (i ? "," : "") << header[i];
    s << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << format_double(row[i]);
        s << "\n";
    }
    write_text(path, s.str());
}

namespace {

std::pair<std::vector<std::string>, std::vector<std::vector<double>>> series_table(const RunReport& r) {
    std::vector<std::string> header{"t"};
    for (int k = 0; k <= r.ell; ++k)
        for (const char* q : {"L1", "L2", "Lp", "Linf"}) header.push_back("d" + std::to_string(k) + "_" + q);
    header.push_back("x_norm");
    std::vector<std::vector<double>> rows;
    for (const auto& row : r.series) {
        std::vector<double> v{row.t};
        for (const auto& nq : row.norms) v.insert(v.end(), nq.begin(), nq.end());
        v.push_back(row.x_norm);
        rows.push_back(std::move(v));
    }
    return {header, rows};
}

std::vector<std::vector<double>> read_csv_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json config_block(const ExperimentConfig& cfg) {
    json c{{"schema_version", kSchemaVersion},
           {"operator", serialize_operator(*cfg.op)},
           {"ell", cfg.ell},
           {"n", cfg.op->n()},
           {"solver",
            {{"grid", {{"N", cfg.grid.N}, {"L", cfg.grid.L}}},
             {"dt", cfg.dt},
             {"T", cfg.T},
             {"amplitude", cfg.amplitude},
             {"profile", profile_json(cfg.profile)},
             {"cadence", cfg.cadence},
             {"record_fields", cfg.record_fields},
             {"blowup_factor", cfg.blowup_factor}}},
           {"seed", cfg.seed}};
    if (cfg.nonlinear)
        c["nonlinearity"] = {{"p", cfg.p_critical ? json("critical") : json(cfg.p)}, {"mu", to_json(cfg.mu)}};
    if (cfg.sweep) c["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
    return c;
}

void emit_run(const fs::path& dir, const RunReport& report, const json& cfg) {
    json doc{{"schema_version", kSchemaVersion}, {"config", cfg}, {"report", to_json(report)}};
    write_json(dir / "run.json", doc);
    const auto [header, rows] = series_table(report);
    write_csv(dir / "series.csv", header, rows);
    if (!report.frames.empty()) {
        std::vector<std::string> h{"t"};
        for (int i = 0; i < report.grid.total(); ++i) h.push_back("x" + std::to_string(i));
        std::vector<std::vector<double>> frows;
        for (std::size_t f = 0; f < report.frames.size(); ++f) {
            std::vector<double> row{report.frame_times[f]};
            row.insert(row.end(), report.frames[f].begin(), report.frames[f].end());
            frows.push_back(std::move(row));
        }
        write_csv(dir / "fields.csv", h, frows);
        write_csv(dir / "data.csv", std::vector<std::string>(h.begin() + 1, h.end()), {report.data});
    }
}

RunReport load_recorded_run(const fs::path& dir, json* cfg_out) {
    std::ifstream in(dir / "run.json");
    if (!in) throw ValidationError("cannot read '" + (dir / "run.json").string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + (dir / "run.json").string() + "' is not valid JSON: " + e.what());
    }
    if (doc.value("schema_version", 0) != kSchemaVersion) throw ValidationError("run.json has an unsupported schema");
    const auto& rep = doc.at("report");
    RunReport r;
    r.grid.n = rep.at("grid").at("n").get<int>();
    r.grid.N = rep.at("grid").at("N").get<int>();
    r.grid.L = rep.at("grid").at("L").get<double>();
    r.ell = rep.at("ell").get<int>();
    r.dt = rep.at("dt").get<double>();
    r.steps = rep.at("steps").get<long>();
    if (!fs::exists(dir / "fields.csv"))
        throw ValidationError("run directory '" + dir.string() + "' has no recorded fields (set record_fields)");
    for (auto& row : read_csv_rows(dir / "fields.csv")) {
        if (static_cast<int>(row.size()) != r.grid.total() + 1) throw ValidationError("fields.csv has a malformed row");
        r.frame_times.push_back(row[0]);
        r.frames.emplace_back(row.begin() + 1, row.end());
    }
    const auto data = read_csv_rows(dir / "data.csv");
    if (data.size() != 1 || static_cast<int>(data[0].size()) != r.grid.total())
        throw ValidationError("data.csv is malformed");
    r.data = data[0];
    if (cfg_out) *cfg_out = doc.at("config");
    return r;
}

void emit_sweep(const fs::path& dir, const SweepReport& rep, const json& cfg) {
    json entries = json::array();
    std::vector<std::vector<double>> index;
    const double nan = std::nan("");
    for (std::size_t i = 0; i < rep.entries.size(); ++i) {
        const auto& e = rep.entries[i];
        json j{{"value", e.value},
               {"p", e.p ? json(*e.p) : json(nullptr)},
               {"error", e.error.empty() ? json(nullptr) : json(e.error)}};
        double outcome = -1, xsup = nan, bt = nan;
        if (e.report) {
            j["report"] = to_json(*e.report);
            outcome = static_cast<double>(e.report->outcome);
            xsup = e.report->series.empty() ? 0.0 : e.report->series.back().x_norm;
            if (e.report->blowup_time) bt = *e.report->blowup_time;
            const auto [header, rows] = series_table(*e.report);
            write_csv(dir / ("series_" + std::to_string(i) + ".csv"), header, rows);
        }
        entries.push_back(j);
        index.push_back({static_cast<double>(i), e.value, outcome, xsup, bt});
    }
    write_json(dir / "sweep.json",
               json{{"schema_version", kSchemaVersion}, {"config", cfg}, {"parameter", rep.parameter}, {"entries", entries}});
    // outcome code: 0 completed, 1 blowup_detected, 2 aborted, -1 failed before running
    write_csv(dir / "index.csv", {"index", "value", "outcome", "x_norm_sup", "blowup_time"}, index);
}

}  // namespace fujita
