#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "atomarray/runner.hpp"

using namespace atomarray;

TEST_CASE("config round trip is byte identical") {
    RunConfig c;
    c.experiment = Experiment::Iswap;
    c.n_arrays = 2;
    c.n_list = {12, 20};
    c.a_list = {0.1, 0.25};
    c.l_over_a_list = {2.0, 5.0};
    c.seed = 42;
    const std::string text = c.serialize();
    const RunConfig back = RunConfig::parse(text);
    CHECK(back.serialize() == text);
    CHECK(back.hash() == c.hash());
    // identical content, identical hash; different content, different hash
    RunConfig d = c;
    d.seed = 43;
    CHECK(d.hash() != c.hash());
}

TEST_CASE("config parse errors carry line context") {
    CHECK_THROWS_AS(RunConfig::parse("[lattice]\nbogus_key = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::parse("[lattice\nn_arrays = 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::parse("[lattice]\nn_arrays 2\n"), std::invalid_argument);
    CHECK_THROWS_AS(RunConfig::parse("[output]\nformat = xml\n"), std::invalid_argument);
    // unknown experiment
    CHECK_THROWS_AS(RunConfig::parse("[experiment]\nkind = frobnicate\n"),
                    std::invalid_argument);
    // comments and blank lines are fine
    CHECK_NOTHROW(RunConfig::parse("# comment\n\n[numerics]\nseed = 7 # trailing\n"));
}

TEST_CASE("validation report: dimensions and routing") {
    RunConfig c;
    c.experiment = Experiment::PrepareDark;
    c.n_arrays = 2;
    c.n_list = {100};
    c.a_list = {0.25};
    const ValidationReport r100 = validate(c);
    REQUIRE(r100.points.size() == 1);
    CHECK(r100.points[0].dimension == 20101);  // 1 + 200 + 19900
    CHECK(r100.points[0].route == "krylov");

    RunConfig small = c;
    small.n_arrays = 1;
    small.n_list = {300};
    const ValidationReport r300 = validate(small);
    CHECK(r300.points[0].dimension == 45151);  // 1 + 300 + C(300,2)
    CHECK(r300.points[0].route == "krylov");

    RunConfig tiny = c;
    tiny.n_arrays = 1;
    tiny.n_list = {20};
    CHECK(validate(tiny).points[0].dimension == 211);
    CHECK(validate(tiny).points[0].route == "dense");

    // regime guard preview
    RunConfig guard = tiny;
    guard.motion_enabled = true;
    guard.omega_t = 5.0;
    const ValidationReport rg = validate(guard);
    REQUIRE(!rg.points[0].warnings.empty());
    CHECK(rg.points[0].warnings[0].code == "regime_guard");
}

TEST_CASE("csv headers are pinned per experiment") {
    CHECK(csv_header(Experiment::PrepareDark) ==
          "N,a_over_lambda,omega0_opt,epsilon,t_star,P0,P2");
    CHECK(csv_header(Experiment::SelectivePrepare) ==
          "N,a_over_lambda,l_over_a,delta,omega0_opt,epsilon,t_star,leak_01,P2");
    CHECK(csv_header(Experiment::Iswap) ==
          "N,a_over_lambda,l_over_a,g_qa,gamma_qa,T_g,fidelity,error");
    CHECK(csv_header(Experiment::DarkDecayScan) ==
          "N,a_over_lambda,sigma,gamma_qa,gamma_qa_pinned");
    CHECK(csv_header(Experiment::KspaceTable) ==
          "k,l_over_a,a_over_lambda,pol,g_k,gamma_k,g_lattice,gamma_lattice,N");
    CHECK(csv_header(Experiment::LambDickeCompare) ==
          "N,a_over_lambda,l_over_a,r0,omega_t,eps_full,eps_effective,max_phonon");
    CHECK(csv_header(Experiment::DriveGeometry) ==
          "alpha,a_over_lambda,p,feasible,beta,K_z,K_x");
}

TEST_CASE("runs are deterministic and write figure-ready files") {
    RunConfig c;
    c.experiment = Experiment::PrepareDark;
    c.n_list = {4};
    c.a_list = {0.25};
    c.omega_points = 5;
    c.output_directory = "/tmp/atomarray_test_run";
    std::filesystem::remove_all(c.output_directory);
    const RunResult r1 = run(c);
    const RunResult r2 = run(c);
    CHECK(r1.csv == r2.csv);
    CHECK(r1.record.n_rows == 1);
    CHECK(r1.csv.rfind("N,a_over_lambda", 0) == 0);
    CHECK(std::filesystem::exists(c.output_directory + "/results.csv"));
    CHECK(std::filesystem::exists(c.output_directory + "/run.json"));
    {
        std::ifstream f(c.output_directory + "/results.csv");
        std::stringstream ss;
        ss << f.rdbuf();
        CHECK(ss.str() == r1.csv);
    }
    // json mirror
    RunConfig cj = c;
    cj.output_format = "json";
    const RunResult rj = run(cj);
    CHECK(std::filesystem::exists(c.output_directory + "/results.json"));
    CHECK(rj.record.config_hash != 0);
    std::filesystem::remove_all(c.output_directory);
}

TEST_CASE("drive geometry experiment emits feasibility rows") {
    RunConfig c;
    c.experiment = Experiment::DriveGeometry;
    c.n_list = {2};
    c.a_list = {0.5, 0.05};
    c.alpha_list = {0.0};
    c.p_ratio = 2.0;
    c.output_directory = "-";
    const RunResult r = run(c);
    // a = 0.5 is feasible at alpha = 0, a = 0.05 is not
    CHECK(r.csv.find("0,0.5,2,1,") != std::string::npos);
    CHECK(r.csv.find("0,0.05,2,0,nan") != std::string::npos);
}

TEST_CASE("kspace table experiment compares analytic and lattice forms") {
    RunConfig c;
    c.experiment = Experiment::KspaceTable;
    c.n_list = {60};
    c.a_list = {0.25};
    c.l_over_a_list = {1.0, 2.0};
    c.kspace_pol = "z";
    c.output_directory = "-";
    const RunResult r = run(c);
    CHECK(r.record.n_rows == 2);
    CHECK(r.csv.find(",z,") != std::string::npos);
}

TEST_CASE("a failing scan point leaves a valid partial CSV and truncation marker") {
    RunConfig c;
    c.experiment = Experiment::Iswap;
    c.n_arrays = 2;
    c.n_list = {2};
    c.a_list = {0.25};
    c.l_over_a_list = {1e8};  // arrays effectively decoupled: g_qa underflows
    c.output_directory = "/tmp/atomarray_test_truncated";
    std::filesystem::remove_all(c.output_directory);
    CHECK_THROWS(run(c));
    REQUIRE(std::filesystem::exists(c.output_directory + "/run.json"));
    std::ifstream f(c.output_directory + "/run.json");
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(ss.str().find("\"truncated\": true") != std::string::npos);
    std::ifstream csv(c.output_directory + "/results.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == csv_header(Experiment::Iswap));
    std::filesystem::remove_all(c.output_directory);
}
