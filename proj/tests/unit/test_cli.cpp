#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cvqkd/cli.hpp"

using namespace cvqkd;
using namespace cvqkd::cli;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("cvqkd_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(10.0) == "10");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
    CHECK(format_number(1e-20) == "1e-20");
    CHECK(format_optional(std::nullopt).empty());
}

TEST_CASE("config round trip and validation") {
    RunConfig c;
    c.c_x = 0.01;
    c.betas = std::vector<double>{1.0, 0.95};
    c.out = "results";
    c.workers = 3;
    CHECK(apply_json({}, to_json(c)) == c);
    CHECK(apply_json({}, nlohmann::json::parse(to_json(c).dump())) == c);

    try {
        apply_json({}, nlohmann::json{{"v_a", 3.0}, {"typo_key", 1}});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("typo_key") != std::string::npos);
    }
    CHECK_THROWS_WITH_AS(apply_json({}, nlohmann::json{{"grid", "many"}}), doctest::Contains("grid"), ConfigError);
    CHECK_THROWS_AS(apply_json({}, nlohmann::json::array()), ConfigError);
}

TEST_CASE("command line overrides the config file") {
    const auto dir = scratch("precedence");
    {
        std::ofstream f(dir / "run.json");
        f << R"({"distance_km": 20, "c_x": 0.0, "c_p": 0.0, "beta": 0.95})";
    }
    const auto r = invoke({"keyrate", "--config", (dir / "run.json").string(), "--distance-km", "10"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].rfind("10,0.630957344480193,0.2,", 0) == 0);

    const auto from_file = invoke({"keyrate", "--config", (dir / "run.json").string()});
    CHECK(lines(from_file.out)[1].rfind("20,", 0) == 0);

    {
        std::ofstream f(dir / "bad.json");
        f << R"({"distance": 20})";
    }
    const auto bad = invoke({"keyrate", "--config", (dir / "bad.json").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("distance") != std::string::npos);
}

TEST_CASE("keyrate") {
    const auto r = invoke({"keyrate", "--cx", "0", "--cp", "0"});
    REQUIRE(r.code == 0);
    const auto rows = lines(r.out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0] ==
          "distance_km,T,epsilon,v_e,c_x,c_p,class,i_ab,chi_be,key_rate,lambda1,lambda2,lambda3,lambda4,lambda5,"
          "lambda6,lambda7,lambda8");
    CHECK(rows[1].find(",independent,1.24554246676131,1.03006408979017,0.215478376971138,") != std::string::npos);

    const auto unphysical = invoke({"keyrate", "--cx", "1", "--cp", "1"});
    CHECK(unphysical.code == 3);
    CHECK(unphysical.err.find("nu_minus < 1") != std::string::npos);

    const auto missing = invoke({"keyrate", "--cx", "0"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("--cp") != std::string::npos);

    CHECK(invoke({"keyrate", "--cx", "0", "--cp", "0", "--beta", "2"}).code == 2);
    CHECK(invoke({"keyrate", "--cx", "abc"}).code == 2);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("sweep outputs are deterministic across worker counts") {
    const auto a = scratch("sweep1");
    const auto b = scratch("sweep3");
    REQUIRE(invoke({"sweep", "--distances", "10,20", "--grid", "9", "--out", a.string()}).code == 0);
    REQUIRE(invoke({"sweep", "--distances", "10,20", "--grid", "9", "--workers", "3", "--out", b.string()}).code == 0);
    for (const char* f : {"plane_d10km.csv", "plane_d20km.csv", "plane_d10km_meta.json", "slice_diag.csv",
                          "slice_antidiag.csv"}) {
        CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    }
    const auto plane = lines(slurp(a / "plane_d10km.csv"));
    CHECK(plane.size() == 82);
    CHECK(plane[0] == "c_x,c_p,class,key_rate");
    // Corner nodes are unphysical: empty key rate.
    CHECK(plane[1].back() == ',');
    CHECK(plane[1].find("unphysical") != std::string::npos);
    CHECK(lines(slurp(a / "slice_diag.csv")).size() == 19);

    const auto meta = nlohmann::json::parse(slurp(a / "plane_d10km_meta.json"));
    CHECK(meta.at("argmin").at("c_x") == meta.at("argmin").at("c_p"));

    const auto zero = scratch("sweep0");
    REQUIRE(invoke({"sweep", "--epsilon", "0", "--out", zero.string()}).code == 0);
    const auto single = lines(slurp(zero / "plane_d10km.csv"));
    REQUIRE(single.size() == 2);
    CHECK(single[1].rfind("0,0,independent,", 0) == 0);
}

TEST_CASE("optimal attacks table") {
    const auto dir = scratch("optimal");
    REQUIRE(invoke({"optimal", "--distances", "10", "--epsilons", "0.2,0", "--betas", "1", "--out", dir.string()})
                .code == 0);
    const auto rows = lines(slurp(dir / "optimal_attacks.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == "distance_km,epsilon,beta,c_x,c_p,c_opt,c_opt_normalized,v_e,class,key_rate_min");
    CHECK(rows[1].find(",separable,") != std::string::npos);
    CHECK(rows[2] == "10,0,1,0,0,0,,1,independent,0.663974681663621");
}

TEST_CASE("frontier table") {
    const auto dir = scratch("frontier");
    REQUIRE(invoke({"frontier", "--distances", "10", "--refine", "3", "--betas", "1,0", "--out", dir.string()})
                .code == 0);
    const auto rows = lines(slurp(dir / "frontier.csv"));
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] ==
          "distance_km,eps_two_way,eps_one_way,beta,eps_two_way_upper,eps_one_way_upper,two_way_flag,one_way_flag");
    CHECK(rows[2] == "10,0,0,0,0,0,never_positive,never_positive");
    CHECK(invoke({"frontier", "--distances", "10,5", "--out", dir.string()}).code == 2);
}

TEST_CASE("region map") {
    const auto a = scratch("region");
    REQUIRE(invoke({"region", "--ve1", "3", "--ve2", "3", "--grid", "13", "--out", a.string()}).code == 0);
    const auto meta = nlohmann::json::parse(slurp(a / "region_meta.json"));
    CHECK(meta.at("c_sep_max").get<double>() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(meta.at("c_phys_max").get<double>() == doctest::Approx(std::sqrt(8.0)).epsilon(1e-9));

    // Classes are symmetric under swapping c_x and c_p.
    const auto rows = lines(slurp(a / "region.csv"));
    REQUIRE(rows.size() == 13 * 13 + 1);
    for (int i = 0; i < 13; ++i)
        for (int j = 0; j < 13; ++j) {
            const auto& r1 = rows[static_cast<std::size_t>(1 + 13 * i + j)];
            const auto& r2 = rows[static_cast<std::size_t>(1 + 13 * j + i)];
            CHECK(r1.substr(r1.rfind(',')) == r2.substr(r2.rfind(',')));
        }

    const auto vac = scratch("region_vacuum");
    REQUIRE(invoke({"region", "--ve1", "1", "--ve2", "1", "--grid", "5", "--out", vac.string()}).code == 0);
    int physical = 0;
    for (const auto& r : lines(slurp(vac / "region.csv")))
        if (r.find("unphysical") == std::string::npos && r.rfind("c_x", 0) != 0) {
            ++physical;
            CHECK(r == "0,0,independent");
        }
    CHECK(physical == 1);
    CHECK(invoke({"region", "--ve1", "0.5", "--out", vac.string()}).code == 2);
    CHECK(invoke({"region", "--grid", "4", "--out", vac.string()}).code == 2);
}
