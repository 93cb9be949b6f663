#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "nspect/pipeline.hpp"

using namespace nspect;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSquareCfg = R"(
# unit square experiment
[domain]
kind = "box"
lo = [0, 0]
hi = [1, 1]

[spectrum]
m = 6
h = 0.03125
tol = 1e-9
seed = 7
)";

}  // namespace

TEST_CASE("config parsing: values, arrays, comments") {
    auto cfg = ConfigFile::parse_string(R"(
top = 3.5           # comment
[table]
name = "hello # not a comment"
flag = true
nums = [1, 2.5, -3e-2]
words = ["a", "b"]
)");
    CHECK(cfg.get_number("", "top") == doctest::Approx(3.5));
    CHECK(cfg.get_string("table", "name") == "hello # not a comment");
    CHECK(cfg.get_bool_or("table", "flag", false));
    auto nums = cfg.get_numbers("table", "nums");
    REQUIRE(nums.size() == 3);
    CHECK(nums[2] == doctest::Approx(-0.03));
    CHECK(cfg.get_string_or("table", "missing", "dflt") == "dflt");
    CHECK_THROWS_AS(cfg.get_numbers("table", "words"), ConfigError);  // wrong element type
}

TEST_CASE("config parsing errors") {
    CHECK_THROWS_AS(ConfigFile::parse_string("key"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("[unterminated"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = "), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = \"open"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = [1, oops]"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("k = 1\nk = 2"), ConfigError);
    CHECK_THROWS_AS(ConfigFile::parse_string("bad-key = 1"), ConfigError);
}

TEST_CASE("strict validation rejects unknown keys") {
    auto cfg = ConfigFile::parse_string("[domain]\nkind = \"cusp\"\ngamma = 0.5\ntypo_key = 1\n");
    auto dom = domain_from_config(cfg);
    CHECK(dom->dim() == 2);
    CHECK_THROWS_AS(cfg.assert_fully_consumed(), ConfigError);

    auto cfg2 = ConfigFile::parse_string("[domain]\nkind = \"cusp\"\ngamma = 0.5\ndim = 2\n");
    domain_from_config(cfg2);
    CHECK_NOTHROW(cfg2.assert_fully_consumed());
}

TEST_CASE("domain construction from configs") {
    auto ball = domain_from_config(
        ConfigFile::parse_string("[domain]\nkind = \"ball\"\ndim = 2\nradius = 1.0\n"));
    CHECK(ball->contains(make_point(0.5, 0.5)));
    auto graph = domain_from_config(ConfigFile::parse_string(
        "[domain]\nkind = \"graph\"\nbase_lo = [0]\nbase_hi = [1]\nprofile = \"1 - 0.25*abs(x-0.5)\"\n"
        "k_lo = 0.8\nk_hi = 1.0\n"));
    CHECK(graph->dim() == 2);
    auto imp = domain_from_config(ConfigFile::parse_string(
        "[domain]\nkind = \"implicit\"\nlo = [-1, -1]\nhi = [1, 1]\n"
        "formula = \"1 - x*x - y*y\"\nanchor = [0, 0]\n"));
    CHECK(imp->contains(make_point(0.3, 0.3)));
    CHECK_THROWS_AS(domain_from_config(ConfigFile::parse_string("[domain]\nkind = \"cone\"\n")),
                    ConfigError);
}

TEST_CASE("spectrum command emits deterministic artifacts") {
    auto cfg = ConfigFile::parse_string(kSquareCfg, "square.cfg");
    std::string dir1 = "/tmp/nspect_cmd1", dir2 = "/tmp/nspect_cmd2";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
    {
        RunContext ctx(dir1, cfg, 1);
        auto res = cmd_spectrum(cfg, ctx);
        CHECK(res.exit_code == 0);
        CHECK(res.summary["eigenvalues"][1].get<double>() ==
              doctest::Approx(M_PI * M_PI).epsilon(0.01));
    }
    {
        auto cfg2 = ConfigFile::parse_string(kSquareCfg, "square.cfg");
        RunContext ctx(dir2, cfg2, 1);
        cmd_spectrum(cfg2, ctx);
    }
    CHECK(slurp(dir1 + "/spectrum.json") == slurp(dir2 + "/spectrum.json"));
    CHECK(slurp(dir1 + "/spectrum.json").size() > 100);
    // manifest exists and lists the artifact (timings vary run to run)
    auto manifest = Json::parse(slurp(dir1 + "/manifest.json"));
    CHECK(manifest["files"].size() >= 1);
}

TEST_CASE("whitney and dimension commands") {
    auto cfg = ConfigFile::parse_string(R"(
[domain]
kind = "box"
lo = [0, 0]
hi = [1, 1]
[whitney]
k_max = 7
)", "w.cfg");
    std::string dir = "/tmp/nspect_cmd_w";
    std::filesystem::remove_all(dir);
    RunContext ctx(dir, cfg, 1);
    auto res = cmd_whitney(cfg, ctx);
    CHECK(res.exit_code == 0);
    CHECK(std::filesystem::exists(dir + "/whitney.csv"));
    CHECK(std::filesystem::exists(dir + "/whitney.gnuplot"));

    auto cfg2 = ConfigFile::parse_string(R"(
[domain]
kind = "box"
lo = [0, 0]
hi = [1, 1]
[dimension]
eps_lo = 0.004
eps_hi = 0.4
n_eps = 7
)", "d.cfg");
    std::string dir2 = "/tmp/nspect_cmd_d";
    std::filesystem::remove_all(dir2);
    RunContext ctx2(dir2, cfg2, 1);
    auto res2 = cmd_dimension(cfg2, ctx2);
    CHECK(res2.exit_code == 0);
    CHECK(res2.summary["dimension"].get<double>() == doctest::Approx(1.0).epsilon(0.12));
    CHECK(std::filesystem::exists(dir2 + "/collar.csv"));
    CHECK(std::filesystem::exists(dir2 + "/collar.gnuplot"));
}

TEST_CASE("binary spectrum round trip") {
    Box b;
    b.dim = 1;
    b.lo = {0, 0, 0};
    b.hi = {1, 0, 0};
    BoxDomain iv(b);
    auto spec = lowest_eigenpairs(assemble(rasterize(iv, 0.01)), 5, 1e-10);
    write_spectrum_binary(spec, "/tmp/nspect_spec.bin");
    SpectrumResult back;
    REQUIRE(read_spectrum_binary("/tmp/nspect_spec.bin", back));
    CHECK(back.count() == spec.count());
    CHECK(back.h == spec.h);
    CHECK(back.domain_id == spec.domain_id);
    for (int n = 0; n < 5; ++n) CHECK(back.eigenvalues[n] == spec.eigenvalues[n]);
    CHECK((back.vectors - spec.vectors).lpNorm<Eigen::Infinity>() == 0.0);
    SpectrumResult bogus;
    CHECK_FALSE(read_spectrum_binary("/tmp/definitely_missing.bin", bogus));
}

TEST_CASE("lab caches spectra on disk") {
    auto cfg = ConfigFile::parse_string(kSquareCfg, "square.cfg");
    std::string cache = "/tmp/nspect_cache_test";
    std::filesystem::remove_all(cache);
    Lab lab(cache);
    auto dom = domain_from_config(cfg);
    auto s1 = lab.spectrum(*dom, 1.0 / 32, 6, 1e-9, 7);
    bool found = false;
    for (auto& e : std::filesystem::directory_iterator(cache))
        if (e.path().extension() == ".bin") found = true;
    CHECK(found);
    // a fresh lab instance loads from disk and agrees bitwise
    Lab lab2(cache);
    auto s2 = lab2.spectrum(*dom, 1.0 / 32, 6, 1e-9, 7);
    for (int n = 0; n < 6; ++n) CHECK(s1->eigenvalues[n] == s2->eigenvalues[n]);
}
