#include "eolsec/experiment.hpp"

#include "eolsec/errors.hpp"
#include "eolsec/security.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <memory>
#include <ostream>
#include <set>
#include <thread>

namespace eolsec {

using json = nlohmann::json;

std::string_view to_string(Engine engine) {
    switch (engine) {
    case Engine::Analytic: return "analytic";
    case Engine::MonteCarlo: return "mc";
    case Engine::Both: return "both";
    }
    return "unknown";
}

Engine parse_engine(std::string_view name) {
    if (name == "analytic") return Engine::Analytic;
    if (name == "mc") return Engine::MonteCarlo;
    if (name == "both") return Engine::Both;
    throw InvalidArgument("unknown engine '" + std::string(name) + "'");
}

DemandProfile ExperimentConfig::base_profile() const {
    std::vector<TrafficClass> classes;
    for (std::size_t k = 0; k < demands.size(); ++k) {
        classes.push_back({demands[k], 0.0, service_rates.at(k)});
    }
    return DemandProfile(capacity, std::move(classes));
}

std::vector<DemandProfile> ExperimentConfig::traffic_points() const {
    const DemandProfile base = base_profile();
    std::vector<DemandProfile> out;
    if (arrival_rates) {
        out.push_back(base.with_arrival_rates(*arrival_rates));
    } else {
        for (double load : loads_erlang) out.push_back(base.with_uniform_load(load));
    }
    return out;
}

double ExperimentConfig::mu_for_security() const {
    return security_mu ? *security_mu : service_rates.at(0);
}

double ResultRow::fb_total() const {
    double total = 0.0;
    for (double v : fb) total += v;
    return total;
}

namespace {

const std::set<std::string> top_level_keys = {"schema_version", "link", "traffic", "sweep",
                                              "engine", "solver", "simulation", "security",
                                              "output"};

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string index(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

void require_object(const json& v, const std::string& path) {
    if (!v.is_object()) throw ConfigError(path, "expected an object");
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    return v.get<double>();
}

std::int64_t as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    return v.get<std::int64_t>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    return v.get<std::string>();
}

template <typename F>
auto as_list(const json& v, const std::string& path, F&& item) {
    if (!v.is_array()) throw ConfigError(path, "expected a list");
    std::vector<decltype(item(v[0], path))> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(item(v[i], index(path, i)));
    return out;
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (const auto& [key, value] : obj.items()) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return key == k; })) {
            throw ConfigError(join(path, key), "unknown field");
        }
    }
}

} // namespace

ExperimentConfig parse_config(const json& tree) {
    require_object(tree, "<root>");
    for (const auto& [key, value] : tree.items()) {
        if (!top_level_keys.contains(key)) throw ConfigError(key, "unknown field");
    }
    ExperimentConfig cfg;

    const json* version = find(tree, "schema_version");
    if (!version) throw ConfigError("schema_version", "missing");
    if (as_int(*version, "schema_version") != config_schema_version) {
        throw ConfigError("schema_version",
                          "unsupported version (expected " + std::to_string(config_schema_version) + ")");
    }

    const json* link = find(tree, "link");
    if (!link) throw ConfigError("link", "missing");
    require_object(*link, "link");
    check_keys(*link, "link", {"capacity", "demands", "service_rates"});
    if (const json* v = find(*link, "capacity")) {
        const auto c = as_int(*v, "link.capacity");
        if (c < 1 || c > 100000) throw ConfigError("link.capacity", "must lie in [1, 100000]");
        cfg.capacity = static_cast<int>(c);
    } else {
        throw ConfigError("link.capacity", "missing");
    }
    if (const json* v = find(*link, "demands")) {
        cfg.demands = as_list(*v, "link.demands", [&](const json& x, const std::string& p) {
            const auto d = as_int(x, p);
            if (d < 1 || d > cfg.capacity) throw ConfigError(p, "demand must lie in [1, capacity]");
            return static_cast<int>(d);
        });
        if (cfg.demands.empty()) throw ConfigError("link.demands", "at least one class required");
    } else {
        throw ConfigError("link.demands", "missing");
    }
    cfg.service_rates.assign(cfg.demands.size(), 1.0);
    if (const json* v = find(*link, "service_rates")) {
        cfg.service_rates = as_list(*v, "link.service_rates", [](const json& x, const std::string& p) {
            const double mu = as_double(x, p);
            if (!(mu > 0.0)) throw ConfigError(p, "service rate must be positive");
            return mu;
        });
        if (cfg.service_rates.size() != cfg.demands.size()) {
            throw ConfigError("link.service_rates", "length must match link.demands");
        }
    }

    const json* traffic = find(tree, "traffic");
    if (!traffic) throw ConfigError("traffic", "missing");
    require_object(*traffic, "traffic");
    check_keys(*traffic, "traffic", {"loads_erlang", "arrival_rates"});
    const json* loads = find(*traffic, "loads_erlang");
    const json* rates = find(*traffic, "arrival_rates");
    if (loads && rates) {
        throw ConfigError("traffic", "loads_erlang and arrival_rates are mutually exclusive");
    }
    if (!loads && !rates) throw ConfigError("traffic", "one of loads_erlang or arrival_rates required");
    auto non_negative = [](const json& x, const std::string& p) {
        const double v = as_double(x, p);
        if (!(v >= 0.0)) throw ConfigError(p, "must be >= 0");
        return v;
    };
    auto positive = [](const json& x, const std::string& p) {
        const double v = as_double(x, p);
        if (!(v > 0.0)) throw ConfigError(p, "must be > 0");
        return v;
    };
    if (loads) cfg.loads_erlang = as_list(*loads, "traffic.loads_erlang", non_negative);
    if (rates) {
        cfg.arrival_rates = as_list(*rates, "traffic.arrival_rates", non_negative);
        if (cfg.arrival_rates->size() != cfg.demands.size()) {
            throw ConfigError("traffic.arrival_rates", "length must match link.demands");
        }
    }

    if (const json* sweep = find(tree, "sweep")) {
        require_object(*sweep, "sweep");
        check_keys(*sweep, "sweep", {"variants", "lambda_S", "mu_d", "windows"});
        if (const json* v = find(*sweep, "variants")) {
            cfg.variants = as_list(*v, "sweep.variants", [](const json& x, const std::string& p) {
                try {
                    return parse_variant(as_string(x, p));
                } catch (const InvalidArgument& e) {
                    throw ConfigError(p, e.what());
                }
            });
        }
        if (const json* v = find(*sweep, "lambda_S")) {
            cfg.rp_rates = as_list(*v, "sweep.lambda_S", non_negative);
        }
        if (const json* v = find(*sweep, "mu_d")) cfg.reconfig_rates = as_list(*v, "sweep.mu_d", positive);
        if (const json* v = find(*sweep, "windows")) {
            cfg.windows = as_list(*v, "sweep.windows", [&](const json& x, const std::string& p) {
                const auto w = as_int(x, p);
                if (w < 1 || w > cfg.capacity) throw ConfigError(p, "window must lie in [1, capacity]");
                return static_cast<int>(w);
            });
        }
    }

    if (const json* v = find(tree, "engine")) {
        try {
            cfg.engine = parse_engine(as_string(*v, "engine"));
        } catch (const InvalidArgument& e) {
            throw ConfigError("engine", e.what());
        }
    }

    if (const json* solver = find(tree, "solver")) {
        require_object(*solver, "solver");
        check_keys(*solver, "solver", {"tol", "state_budget", "randomize_empty"});
        if (const json* v = find(*solver, "tol")) cfg.solver_tol = positive(*v, "solver.tol");
        if (const json* v = find(*solver, "state_budget")) {
            const auto b = as_int(*v, "solver.state_budget");
            if (b < 1) throw ConfigError("solver.state_budget", "must be >= 1");
            cfg.state_budget = static_cast<std::size_t>(b);
        }
        if (const json* v = find(*solver, "randomize_empty")) {
            cfg.randomize_empty = as_bool(*v, "solver.randomize_empty");
        }
    }

    if (const json* sim = find(tree, "simulation")) {
        require_object(*sim, "simulation");
        check_keys(*sim, "simulation",
                   {"horizon", "max_arrivals", "warmup", "replications", "seed", "threads"});
        if (const json* v = find(*sim, "horizon"); v && !v->is_null()) {
            cfg.horizon = positive(*v, "simulation.horizon");
        }
        if (const json* v = find(*sim, "max_arrivals")) {
            const auto n = as_int(*v, "simulation.max_arrivals");
            if (n < 0) throw ConfigError("simulation.max_arrivals", "must be >= 0");
            cfg.max_arrivals = static_cast<std::uint64_t>(n);
        }
        if (const json* v = find(*sim, "warmup")) cfg.warmup = non_negative(*v, "simulation.warmup");
        if (const json* v = find(*sim, "replications")) {
            const auto n = as_int(*v, "simulation.replications");
            if (n < 1) throw ConfigError("simulation.replications", "must be >= 1");
            cfg.replications = static_cast<std::size_t>(n);
        }
        if (const json* v = find(*sim, "seed")) {
            if (!v->is_number_unsigned() && !v->is_number_integer()) {
                throw ConfigError("simulation.seed", "expected an integer");
            }
            cfg.seed = v->get<std::uint64_t>();
        }
        if (const json* v = find(*sim, "threads")) {
            const auto n = as_int(*v, "simulation.threads");
            if (n < 0) throw ConfigError("simulation.threads", "must be >= 0");
            cfg.threads = static_cast<unsigned>(n);
        }
    }
    if (!(cfg.warmup < cfg.horizon)) throw ConfigError("simulation.warmup", "must be below horizon");
    if (std::isinf(cfg.horizon) && cfg.max_arrivals == 0) {
        throw ConfigError("simulation", "either horizon or max_arrivals must bound the run");
    }

    if (const json* sec = find(tree, "security")) {
        require_object(*sec, "security");
        check_keys(*sec, "security", {"b", "mu"});
        if (const json* v = find(*sec, "b")) cfg.data_rate = positive(*v, "security.b");
        if (const json* v = find(*sec, "mu"); v && !v->is_null()) cfg.security_mu = positive(*v, "security.mu");
    }

    if (const json* out = find(tree, "output")) {
        require_object(*out, "output");
        check_keys(*out, "output", {"dir", "csv", "summary", "timestamp"});
        if (const json* v = find(*out, "dir")) cfg.out_dir = as_string(*v, "output.dir");
        if (const json* v = find(*out, "csv")) cfg.csv_name = as_string(*v, "output.csv");
        if (const json* v = find(*out, "summary")) cfg.summary_name = as_string(*v, "output.summary");
        if (const json* v = find(*out, "timestamp")) cfg.timestamp = as_bool(*v, "output.timestamp");
    }

    try {
        (void)cfg.traffic_points();
    } catch (const InvalidArgument& e) {
        throw ConfigError("traffic", e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file " + path.string());
    json tree;
    try {
        tree = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("<root>", std::string("parse error: ") + e.what());
    }
    return parse_config(tree);
}

namespace {

struct Cell {
    VariantKind kind;
    std::size_t traffic;
    double lambda_s;
    double mu_d;
};

std::vector<Cell> grid_cells(const ExperimentConfig& cfg, std::size_t traffic_points) {
    std::vector<Cell> cells;
    for (VariantKind kind : cfg.variants) {
        for (std::size_t t = 0; t < traffic_points; ++t) {
            if (kind == VariantKind::Regular) {
                cells.push_back({kind, t, 0.0, 0.0});
                continue;
            }
            for (double lambda_s : cfg.rp_rates) {
                for (double mu_d : cfg.reconfig_rates) cells.push_back({kind, t, lambda_s, mu_d});
            }
        }
    }
    return cells;
}

ModelVariant variant_of(const Cell& cell) {
    return ModelVariant{cell.kind, cell.mu_d, cell.lambda_s};
}

double lambda_fraction(double p, const Cell& cell, const ExperimentConfig& cfg) {
    if (cell.kind == VariantKind::Regular || std::isnan(p)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    try {
        return observable_fraction(p, cell.lambda_s, cfg.mu_for_security(), cfg.data_rate).fraction;
    } catch (const InvalidArgument&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

ResultRow base_row(const Cell& cell, const DemandProfile& profile, Engine engine) {
    ResultRow row;
    row.variant = cell.kind;
    row.engine = engine;
    row.capacity = profile.capacity();
    row.load = profile.load_erlang();
    row.lambda_s = cell.lambda_s;
    row.mu_d = cell.mu_d;
    return row;
}

void mark_failed(ResultRow& row, std::size_t classes, std::size_t windows, const std::string& why) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    row.failed = true;
    row.error = why;
    row.rb.assign(classes, nan);
    row.fb.assign(classes, nan);
    row.rcb = row.bp = row.residual_or_ci = nan;
    row.p_sa.assign(windows, nan);
    row.lambda_frac.assign(windows, nan);
}

ResultRow analytic_row(const Cell& cell, const DemandProfile& profile, const StateSpace& space,
                       const ExperimentConfig& cfg) {
    const auto start = std::chrono::steady_clock::now();
    ResultRow row = base_row(cell, profile, Engine::Analytic);
    try {
        const ModelVariant variant = variant_of(cell);
        const RateMatrix q = assemble_generator(space, profile, variant);
        const StationaryDistribution dist = solve_stationary(q, cfg.solver_tol);
        const BlockingReport report = blocking_report(dist.pi, space, profile, variant);
        row.rb = report.rb;
        row.fb = report.fb;
        row.rcb = report.rcb;
        row.bp = report.bp;
        row.residual_or_ci = dist.residual;
        for (int w : cfg.windows) {
            const double p = attack_success_probability(dist.pi, space, w);
            row.p_sa.push_back(p);
            row.lambda_frac.push_back(lambda_fraction(p, cell, cfg));
        }
    } catch (const NumericalError& e) {
        mark_failed(row, profile.num_classes(), cfg.windows.size(), e.what());
    }
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                      .count();
    return row;
}

ResultRow mc_row(const Cell& cell, const DemandProfile& profile, const ExperimentConfig& cfg,
                 unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    ResultRow row = base_row(cell, profile, Engine::MonteCarlo);
    SimConfig sim{.profile = profile, .variant = variant_of(cell), .window_widths = cfg.windows};
    sim.horizon = cfg.horizon;
    sim.max_arrivals = cfg.max_arrivals;
    sim.warmup = cfg.warmup;
    sim.replications = cfg.replications;
    sim.seed = cfg.seed;
    sim.randomize_empty = cfg.randomize_empty;
    sim.threads = threads;
    if (std::isinf(sim.horizon) && !(profile.total_arrival_rate() > 0.0)) {
        // nothing arrives, so an arrival budget would never be met
        sim.horizon = sim.warmup + 1.0;
    }
    const SimResult res = run_simulation(sim);
    for (const auto& e : res.rb) row.rb.push_back(e.mean);
    for (const auto& e : res.fb) row.fb.push_back(e.mean);
    row.rcb = res.rcb.mean;
    row.bp = res.bp.mean;
    row.residual_or_ci = res.bp.ci_half_width;
    row.rcb_ci = res.rcb.ci_half_width;
    row.fb_total_ci = res.total_fb.ci_half_width;
    for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
        row.p_sa.push_back(res.p_sa[w].mean);
        row.p_sa_any.push_back(res.p_sa_any[w].mean);
        row.lambda_frac.push_back(lambda_fraction(res.p_sa[w].mean, cell, cfg));
    }
    row.counts = res.counts;
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                      .count();
    return row;
}

std::string number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

ExperimentResult run_grid(const ExperimentConfig& cfg) {
    ExperimentResult result;
    const auto points = cfg.traffic_points();
    const auto cells = grid_cells(cfg, points.size());

    bool analytic = cfg.engine != Engine::MonteCarlo;
    bool mc = cfg.engine != Engine::Analytic;
    std::unique_ptr<StateSpace> space;
    if (analytic && !cells.empty()) {
        try {
            space = std::make_unique<StateSpace>(build_state_space(
                cfg.base_profile(), SpaceOptions{cfg.state_budget, cfg.randomize_empty}));
        } catch (const StateBudgetExceeded& e) {
            result.log.push_back(std::string("falling back to mc: ") + e.what());
            result.fell_back_to_mc = true;
            analytic = false;
            mc = true;
        }
    }

    std::vector<std::vector<ResultRow>> per_cell(cells.size());
    unsigned workers = cfg.threads == 0 ? std::thread::hardware_concurrency() : cfg.threads;
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(cells.size(), 1))));
    const unsigned inner_threads = workers > 1 ? 1 : cfg.threads;

    auto evaluate = [&](std::size_t c) {
        const Cell& cell = cells[c];
        const DemandProfile& profile = points[cell.traffic];
        if (analytic) per_cell[c].push_back(analytic_row(cell, profile, *space, cfg));
        if (mc) per_cell[c].push_back(mc_row(cell, profile, cfg, inner_threads));
    };
    if (workers == 1) {
        for (std::size_t c = 0; c < cells.size(); ++c) evaluate(c);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t c = next++; c < cells.size(); c = next++) evaluate(c);
            });
        }
        for (auto& th : pool) th.join();
    }

    for (auto& rows : per_cell) {
        for (auto& row : rows) {
            if (row.failed) {
                result.numerical_failure = true;
                result.log.push_back("numerical failure (" + std::string(to_string(row.variant)) +
                                     ", load " + number(row.load) + ", lambda_S " +
                                     number(row.lambda_s) + ", mu_d " + number(row.mu_d) +
                                     "): " + row.error);
            }
            result.rows.push_back(std::move(row));
        }
    }
    return result;
}

void write_csv(std::ostream& out, const ExperimentConfig& cfg, const ExperimentResult& result,
               bool timestamp) {
    if (timestamp) {
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
        out << "# generated " << buf << '\n';
    }
    out << "variant,engine,C,load_erlang,lambda_S,mu_d";
    for (std::size_t k = 1; k <= cfg.demands.size(); ++k) out << ",rb_" << k << ",fb_" << k;
    out << ",rcb,bp";
    for (int w : cfg.windows) out << ",p_sa_" << w << ",lambda_frac_" << w;
    out << ",residual_or_ci,wall_ms\n";

    for (const auto& row : result.rows) {
        out << to_string(row.variant) << ',' << to_string(row.engine) << ',' << row.capacity << ','
            << number(row.load) << ',' << number(row.lambda_s) << ',' << number(row.mu_d);
        for (std::size_t k = 0; k < row.rb.size(); ++k) {
            out << ',' << number(row.rb[k]) << ',' << number(row.fb[k]);
        }
        out << ',' << number(row.rcb) << ',' << number(row.bp);
        for (std::size_t w = 0; w < row.p_sa.size(); ++w) {
            out << ',' << number(row.p_sa[w]) << ',' << number(row.lambda_frac[w]);
        }
        // wall time is the only nondeterministic column
        out << ',' << number(row.residual_or_ci) << ',' << (timestamp ? number(row.wall_ms) : "0")
            << '\n';
    }
}

json comparison_summary(const ExperimentConfig& cfg, const ExperimentResult& result) {
    json cells = json::array();
    std::size_t compared = 0;
    std::size_t disagreements = 0;
    auto value = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    for (std::size_t i = 0; i + 1 < result.rows.size(); ++i) {
        const ResultRow& a = result.rows[i];
        const ResultRow& m = result.rows[i + 1];
        if (a.engine != Engine::Analytic || m.engine != Engine::MonteCarlo) continue;
        json cell{{"variant", to_string(a.variant)},
                  {"load_erlang", a.load},
                  {"lambda_S", a.lambda_s},
                  {"mu_d", a.mu_d}};
        bool agree = true;
        auto compare = [&](const char* name, double exact, double estimate, double ci) {
            const bool within = !std::isnan(ci) && std::abs(estimate - exact) <= ci;
            agree = agree && within;
            cell[name] = {{"analytic", value(exact)},
                          {"mc", value(estimate)},
                          {"ci_half_width", value(ci)},
                          {"within_ci", within}};
        };
        compare("bp", a.bp, m.bp, m.residual_or_ci);
        compare("rcb", a.rcb, m.rcb, m.rcb_ci);
        compare("fb_total", a.fb_total(), m.fb_total(), m.fb_total_ci);
        cell["agree"] = agree;
        if (!m.p_sa_any.empty()) {
            json any = json::object();
            for (std::size_t w = 0; w < cfg.windows.size(); ++w) {
                any[std::to_string(cfg.windows[w])] = value(m.p_sa_any[w]);
            }
            cell["mc_p_sa_any_reconfig"] = any;
        }
        ++compared;
        if (!agree) ++disagreements;
        cells.push_back(std::move(cell));
    }
    return json{{"schema_version", config_schema_version},
                {"compared_cells", compared},
                {"disagreements", disagreements},
                {"fallback_to_mc", result.fell_back_to_mc},
                {"numerical_failure", result.numerical_failure},
                {"log", result.log},
                {"cells", cells}};
}

int run_experiments(const ExperimentConfig& cfg, std::ostream& log) {
    const ExperimentResult result = run_grid(cfg);
    for (const auto& line : result.log) log << line << '\n';

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + cfg.out_dir.string() + ": " + ec.message());

    const auto csv_path = cfg.out_dir / cfg.csv_name;
    std::ofstream csv(csv_path);
    if (!csv) throw IoError("cannot write " + csv_path.string());
    write_csv(csv, cfg, result, cfg.timestamp);
    csv.close();
    if (!csv) throw IoError("failed writing " + csv_path.string());

    const auto summary_path = cfg.out_dir / cfg.summary_name;
    std::ofstream summary(summary_path);
    if (!summary) throw IoError("cannot write " + summary_path.string());
    summary << comparison_summary(cfg, result).dump(2) << '\n';
    summary.close();
    if (!summary) throw IoError("failed writing " + summary_path.string());

    log << "wrote " << result.rows.size() << " rows to " << csv_path.string() << '\n';
    return result.numerical_failure ? 2 : 0;
}

} // namespace eolsec
