#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "ftfusion/config.hpp"
#include "ftfusion/sweep.hpp"

using namespace ftfusion;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string field_of_error(const std::string& text) {
    try {
        parse(text).validate();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}

std::vector<std::string> split_lines(const std::string& csv) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < csv.size()) {
        const auto end = csv.find("\r\n", start);
        REQUIRE(end != std::string::npos);
        lines.push_back(csv.substr(start, end - start));
        start = end + 2;
    }
    return lines;
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string to_csv(const SweepResult& r) {
    std::ostringstream out;
    write_csv(out, r);
    return out.str();
}

}  // namespace

TEST_CASE("config parsing") {
    const auto cfg = parse(R"(
        # reference run
        n = 10
        m = 2
        x_max = 5
        taus = 1..7
        lambdas = 0.1, 0.5, 0.9
        algorithms = linear, bi, marzullo, gbi_oneopt
        trials = 20000
        seed = 2024   # root seed
        format = json
    )");
    CHECK(cfg.n == 10);
    CHECK(cfg.taus == std::vector<int>{1, 2, 3, 4, 5, 6, 7});
    CHECK(cfg.lambdas == std::vector<double>{0.1, 0.5, 0.9});
    CHECK(cfg.seed == 2024);
    CHECK(cfg.format == OutputFormat::json);
    const auto algos = cfg.expanded_algorithms();
    REQUIRE(algos.size() == 6);
    CHECK(algos[0].label == "linear@0.1");
    CHECK(algos[2].label == "linear@0.9");
    CHECK(algos[3].label == "bi");
    CHECK(algos[5].label == "gbi_oneopt");
    CHECK_NOTHROW(cfg.validate());

    CHECK(parse("taus = 0, 2, 4").taus == std::vector<int>{0, 2, 4});
    CHECK(parse_algorithm_selector("constant@1.5").constant.value() == 1.5);
    CHECK(parse_algorithm_selector("marzullo_classical").marzullo == MarzulloVariant::classical);
}

TEST_CASE("config errors name the field") {
    CHECK(field_of_error("n = 4\ntaus = 3\n") == "taus");
    CHECK(field_of_error("lambdas = 0.5, 1.2\n") == "lambdas");
    CHECK(field_of_error("trials = ten\n") == "trials");
    CHECK(field_of_error("x_max = 0\n") == "x_max");
    CHECK(field_of_error("colour = red\n") == "colour");
    CHECK(field_of_error("seed = 1\nseed = 2\n") == "seed");
    CHECK(field_of_error("algorithms = bi, magic\n") == "algorithms");
    CHECK(field_of_error("format = xml\n") == "format");
    CHECK(field_of_error("trials = 50\n") == "trials");
    CHECK(field_of_error("algorithms = linear\nmoment_samples = 500\n") == "moment_samples");
    CHECK(field_of_error("n = 10\n") == "");
}

TEST_CASE("sweep layout and degenerate cases") {
    RunConfig cfg;
    cfg.n = 5;
    cfg.m = 3;
    cfg.trials = 300;
    cfg.seed = 4;

    SUBCASE("empty algorithm list gives a header-only report") {
        const auto lines = split_lines(to_csv(run_sweep(cfg)));
        REQUIRE(lines.size() == 1);
        CHECK(lines[0] ==
              "algorithm,tau,lambda,mse_agent_1,mse_agent_2,mse_agent_3,mse_stderr_1,mse_stderr_2,mse_stderr_3,"
              "cns_pair_1_2,cns_pair_1_3,cns_pair_2_3,cns_stderr_1_2,cns_stderr_1_3,cns_stderr_2_3,"
              "objective,trials,seed,flags");
    }
    SUBCASE("tau = 0 rows have zero consensus gaps") {
        cfg.taus = {0};
        cfg.algorithms = {parse_algorithm_selector("bi"), parse_algorithm_selector("marzullo"),
                          parse_algorithm_selector("gbi_oneopt"), parse_algorithm_selector("linear@0.5")};
        cfg.moment_samples = 10'000;
        const auto lines = split_lines(to_csv(run_sweep(cfg)));
        REQUIRE(lines.size() == 5);
        for (std::size_t i = 1; i < lines.size(); ++i) {
            const auto cells = split_cells(lines[i]);
            REQUIRE(cells.size() == 19);
            for (std::size_t c = 9; c < 15; ++c) CHECK(cells[c] == "0");
        }
    }
}

TEST_CASE("reference sweep has 42 rows and reproduces exactly") {
    RunConfig cfg = parse(R"(
        n = 10
        m = 2
        x_max = 5
        taus = 1..7
        lambdas = 0.1, 0.5, 0.9
        algorithms = linear, bi, marzullo, gbi_oneopt
        trials = 200
        moment_samples = 10000
        seed = 99
    )");
    const auto a = to_csv(run_sweep(cfg));
    const auto b = to_csv(run_sweep(cfg));
    CHECK(a == b);
    const auto lines = split_lines(a);
    REQUIRE(lines.size() == 43);
    const auto header = split_cells(lines[0]);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split_cells(lines[i]);
        REQUIRE(cells.size() == header.size());
        // At least 12 significant digits.
        const std::string& v = cells[3];
        const auto digits = std::count_if(v.begin(), v.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
        CHECK(digits >= 12);
    }
    cfg.seed = 100;
    CHECK(to_csv(run_sweep(cfg)) != a);
}

TEST_CASE("json report") {
    RunConfig cfg;
    cfg.n = 4;
    cfg.taus = {1};
    cfg.trials = 200;
    cfg.algorithms = {parse_algorithm_selector("gbi")};
    std::ostringstream out;
    write_json(out, run_sweep(cfg));
    const auto j = nlohmann::json::parse(out.str());
    REQUIRE(j.size() == 1);
    CHECK(j[0]["algorithm"] == "gbi_oneopt");
    CHECK(j[0]["mse"].size() == 2);
    CHECK(j[0]["trials"] == 200);
}

TEST_CASE("oracle check") {
    RunConfig cfg;
    cfg.n = 3;
    cfg.taus = {1};
    cfg.trials = 500;
    cfg.seed = 5;
    auto result = oracle_check(cfg);
    CHECK(result.passed());
    CHECK(result.max_deviation < 1e-9);
    CHECK(result.comparisons == 1000);

    cfg.n = 2;
    cfg.taus = {0};
    cfg.trials = 100;
    CHECK(oracle_check(cfg).passed());

    cfg.n = 3;
    cfg.taus = {1};
    cfg.trials = 500;
    OracleCheckOptions corrupt;
    corrupt.corrupt_gbi_weight = true;
    result = oracle_check(cfg, corrupt);
    CHECK_FALSE(result.passed());
    REQUIRE_FALSE(result.mismatches.empty());
    const auto& mm = result.mismatches.front();
    CHECK(mm.trial_seed == derive_seed(5, StreamDomain::oracle_check, mm.trial));

    cfg.n = 9;
    CHECK_THROWS_AS(oracle_check(cfg), ConfigError);
}
