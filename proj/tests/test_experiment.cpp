#include "eolsec/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace eolsec;
using json = nlohmann::json;

namespace {

json small() {
    return json::parse(R"({
      "schema_version": 1,
      "link": {"capacity": 7, "demands": [3, 4]},
      "traffic": {"loads_erlang": [2, 4]},
      "sweep": {"variants": ["regular", "raas", "raas_daas"], "lambda_S": [1, 2], "mu_d": [10], "windows": [3, 7]},
      "simulation": {"max_arrivals": 2000, "warmup": 5, "replications": 3, "threads": 1}
    })");
}

std::string error_path(const json& tree) {
    try {
        (void)parse_config(tree);
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<none>";
}

std::string csv(const ExperimentConfig& cfg, const ExperimentResult& r) {
    std::ostringstream out;
    write_csv(out, cfg, r, false);
    return out.str();
}

std::filesystem::path scratch(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / "eolsec-tests" / name;
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(EOLSEC_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse_config(small());
    CHECK(cfg.capacity == 7);
    CHECK(cfg.service_rates == std::vector<double>{1.0, 1.0});
    CHECK(cfg.variants.size() == 3);
    CHECK(cfg.engine == Engine::Both);
    CHECK(cfg.seed == default_seed);
    CHECK(cfg.mu_for_security() == 1.0);
    const auto points = cfg.traffic_points();
    REQUIRE(points.size() == 2);
    CHECK(points[1].load_erlang() == doctest::Approx(4.0));
    CHECK(points[1].traffic(0).arrival_rate == doctest::Approx(points[1].traffic(1).arrival_rate));
}

TEST_CASE("config errors name the offending field") {
    auto t = small();
    t["link"]["colour"] = 1;
    CHECK(error_path(t) == "link.colour");

    t = small();
    t["bogus"] = true;
    CHECK(error_path(t) == "bogus");

    t = small();
    t["link"]["demands"][1] = 9;
    CHECK(error_path(t) == "link.demands[1]");

    t = small();
    t["traffic"]["arrival_rates"] = {1, 1};
    CHECK(error_path(t) == "traffic");

    t = small();
    t["sweep"]["variants"][0] = "fast";
    CHECK(error_path(t) == "sweep.variants[0]");

    t = small();
    t["schema_version"] = 2;
    CHECK(error_path(t) == "schema_version");

    t = small();
    t.erase("schema_version");
    CHECK(error_path(t) == "schema_version");

    t = small();
    t["simulation"]["replications"] = "ten";
    CHECK(error_path(t) == "simulation.replications");

    t = small();
    t["sweep"]["mu_d"] = {0};
    CHECK(error_path(t) == "sweep.mu_d[0]");

    t = small();
    t["link"]["service_rates"] = {1};
    CHECK(error_path(t) == "link.service_rates");

    t = small();
    t["engine"] = "quantum";
    CHECK(error_path(t) == "engine");

    CHECK_THROWS_AS((void)load_config("/nonexistent/config.json"), IoError);
}

TEST_CASE("explicit arrival rates") {
    auto t = small();
    t["traffic"] = json::parse(R"({"arrival_rates": [0.5, 0.25]})");
    const auto cfg = parse_config(t);
    const auto points = cfg.traffic_points();
    REQUIRE(points.size() == 1);
    CHECK(points[0].traffic(1).arrival_rate == 0.25);
}

TEST_CASE("grid order and row contents") {
    const auto cfg = parse_config(small());
    const auto r = run_grid(cfg);
    // regular: 2 loads; each reconfiguring variant: 2 loads x 2 rp rates; two engines each
    REQUIRE(r.rows.size() == (2 + 4 + 4) * 2);
    CHECK_FALSE(r.numerical_failure);
    CHECK(r.rows[0].variant == VariantKind::Regular);
    CHECK(r.rows[0].engine == Engine::Analytic);
    CHECK(r.rows[1].engine == Engine::MonteCarlo);
    CHECK(r.rows[2].load == doctest::Approx(4.0));
    CHECK(r.rows[4].variant == VariantKind::RaaS);
    CHECK(r.rows[4].lambda_s == 1.0);
    CHECK(r.rows[6].lambda_s == 2.0);
    for (const auto& row : r.rows) {
        CHECK(row.rb.size() == 2);
        CHECK(row.p_sa.size() == 2);
        if (row.engine == Engine::Analytic) CHECK(row.residual_or_ci <= 1e-10);
        else CHECK(row.residual_or_ci > 0.0);
        if (row.variant != VariantKind::Regular) {
            // W = C: the whole spectrum is always observed
            CHECK(row.p_sa[1] == doctest::Approx(1.0));
            CHECK(row.lambda_frac[1] == doctest::Approx(1.0));
        } else {
            CHECK(std::isnan(row.lambda_frac[0]));
        }
    }

    const auto text = csv(cfg, r);
    std::istringstream lines(text);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "variant,engine,C,load_erlang,lambda_S,mu_d,rb_1,fb_1,rb_2,fb_2,rcb,bp,p_sa_3,lambda_frac_3,p_sa_7,"
          "lambda_frac_7,residual_or_ci,wall_ms");
    std::string first;
    std::getline(lines, first);
    CHECK(first.rfind("regular,analytic,7,2,0,0,", 0) == 0);

    const auto summary = comparison_summary(cfg, r);
    CHECK(summary["compared_cells"] == 10);
    CHECK(summary["cells"].size() == 10);
}

TEST_CASE("empty sweep gives a header-only file") {
    auto t = small();
    t["sweep"]["variants"] = json::array();
    auto cfg = parse_config(t);
    cfg.out_dir = scratch("empty");
    cfg.timestamp = false;
    std::ostringstream log;
    CHECK(run_experiments(cfg, log) == 0);
    const auto text = slurp(cfg.out_dir / cfg.csv_name);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    CHECK(text.rfind("variant,engine,", 0) == 0);
}

TEST_CASE("oversized links fall back to simulation") {
    const auto t = json::parse(R"({
      "schema_version": 1,
      "link": {"capacity": 100, "demands": [5, 10, 15]},
      "traffic": {"loads_erlang": [40]},
      "sweep": {"variants": ["regular", "raas_daas"], "lambda_S": [5], "mu_d": [1000], "windows": [10]},
      "engine": "analytic",
      "simulation": {"max_arrivals": 2000, "replications": 2, "warmup": 1}
    })");
    const auto r = run_grid(parse_config(t));
    CHECK(r.fell_back_to_mc);
    REQUIRE(r.log.size() == 1);
    CHECK(r.log[0].find("falling back") != std::string::npos);
    REQUIRE(r.rows.size() == 2);
    for (const auto& row : r.rows) CHECK(row.engine == Engine::MonteCarlo);
}

TEST_CASE("reruns produce identical files") {
    auto cfg = parse_config(small());
    cfg.timestamp = false;
    cfg.out_dir = scratch("rerun_a");
    std::ostringstream log;
    REQUIRE(run_experiments(cfg, log) == 0);
    const auto a = slurp(cfg.out_dir / cfg.csv_name);
    cfg.out_dir = scratch("rerun_b");
    cfg.threads = 3;
    REQUIRE(run_experiments(cfg, log) == 0);
    CHECK(slurp(cfg.out_dir / cfg.csv_name) == a);
    CHECK(a.find("# generated") == std::string::npos);

    cfg.timestamp = true;
    cfg.out_dir = scratch("rerun_c");
    REQUIRE(run_experiments(cfg, log) == 0);
    CHECK(slurp(cfg.out_dir / cfg.csv_name).rfind("# generated ", 0) == 0);
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch("cli");
    std::filesystem::create_directories(dir);
    const auto good = dir / "good.json";
    std::ofstream(good) << small().dump();
    auto bad_tree = small();
    bad_tree["link"]["capacity"] = -1;
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << bad_tree.dump();
    const auto broken = dir / "broken.json";
    std::ofstream(broken) << "{ not json";

    CHECK(cli("validate --config " + good.string()) == 0);
    CHECK(cli("validate --config " + bad.string()) == 1);
    CHECK(cli("validate --config " + broken.string()) == 1);
    CHECK(cli("validate --config " + (dir / "missing.json").string()) == 3);
    CHECK(cli("dump-states --config " + good.string()) == 0);
    CHECK(cli("run --config " + good.string() + " --engine analytic --no-timestamp --out-dir " +
              (dir / "out").string()) == 0);
    CHECK(std::filesystem::exists(dir / "out" / "results.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "summary.json"));
    CHECK(cli("run --config " + good.string() + " --out-dir /proc/forbidden") == 3);
    CHECK(cli("run") != 0);
}
