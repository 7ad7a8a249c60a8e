#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string output;  // stdout and stderr
};

Outcome abba(const std::string& args) {
    const std::string cmd = std::string("\"") + ABBA_CLI + "\" " + args + " 2>&1";
    Outcome o;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) o.output.append(buf.data(), n);
    const int status = ::pclose(pipe);
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return o;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("abba-cli-" + std::to_string(::getpid()) + "-" + name);
    fs::remove_all(p);
    return p;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

const std::string kSmall = "run -s S1,S2 -n 3 -d 20 --seed 5";

}  // namespace

TEST_CASE("help and version") {
    const auto help = abba("--help");
    CHECK(help.code == 0);
    CHECK(help.output.find("run") != std::string::npos);
    CHECK(help.output.find("demo-pump-link") != std::string::npos);
    CHECK(abba("run --help").code == 0);
    CHECK(abba("--version").code == 0);
    CHECK(abba("").code == 1);
    CHECK(abba("run --no-such-flag").code == 1);
}

TEST_CASE("check-config prints the resolved config") {
    const auto o = abba(kSmall + " --check-config");
    CHECK(o.code == 0);
    CHECK(o.output.find("patients: 3") != std::string::npos);
    CHECK(o.output.find("last_day: 20") != std::string::npos);
    CHECK(o.output.find("# config_hash: ") != std::string::npos);
    CHECK(o.output.find("W1=D2-D8") != std::string::npos);
}

TEST_CASE("config errors exit 1 and name the line") {
    const auto cfg = scratch("bad.yaml");
    { std::ofstream(cfg) << "patients: 3\nadvisor:\n  gammma: 0.9\n"; }
    const auto o = abba("run -c " + cfg.string() + " --check-config");
    CHECK(o.code == 1);
    CHECK(o.output.find("line 3") != std::string::npos);
    CHECK(abba("run -s S7 --check-config").code == 1);
    CHECK(abba("run -n 0 --check-config").code == 1);
    CHECK(abba("run -c /nonexistent/abba.yaml").code == 1);
    CHECK(abba("demo-pump-link --drop-rate 0.99").code == 1);
    fs::remove(cfg);
}

TEST_CASE("a config file is applied and the flags override it") {
    const auto cfg = scratch("good.yaml");
    { std::ofstream(cfg) << "patients: 9\nscenarios: [S3]\nadvisor: {beta: 0.2}\n"; }
    const auto o = abba("run -c " + cfg.string() + " -n 2 --check-config");
    CHECK(o.code == 0);
    CHECK(o.output.find("patients: 2") != std::string::npos);
    CHECK(o.output.find("[S3]") != std::string::npos);
    CHECK(o.output.find("beta: 0.2") != std::string::npos);
    fs::remove(cfg);
}

TEST_CASE("runs are byte-identical across repeats and thread counts") {
    const auto a = scratch("a");
    const auto b = scratch("b");
    const auto c = scratch("c/nested/out");  // missing parents are created
    REQUIRE(abba(kSmall + " -j 1 -o " + a.string()).code == 0);
    REQUIRE(abba(kSmall + " -j 1 -o " + b.string()).code == 0);
    REQUIRE(abba(kSmall + " -j 3 -o " + c.string()).code == 0);
    const auto ta = read_tree(a);
    CHECK(ta.size() > 6);
    CHECK(ta == read_tree(b));
    CHECK(ta == read_tree(c));
    // a different seed changes the results
    const auto d = scratch("d");
    REQUIRE(abba("run -s S1,S2 -n 3 -d 20 --seed 6 -j 1 -o " + d.string()).code == 0);
    CHECK(ta.at("metrics_patient_week.csv") != read_tree(d).at("metrics_patient_week.csv"));
    for (const auto& p : {a, b, d}) fs::remove_all(p);
    fs::remove_all(scratch("c"));
}

TEST_CASE("the output root comes from the environment by default") {
    const auto env_out = scratch("env");
    fs::remove_all("abba-out");
    const std::string plain = std::string("env -u ABBA_OUT \"") + ABBA_CLI + "\" run -s S2 -n 1 -d 12 -j 1 >/dev/null 2>&1";
    CHECK(std::system(plain.c_str()) == 0);
    CHECK(fs::exists(fs::path("abba-out") / "manifest.json"));
    fs::remove_all("abba-out");
    const std::string cmd = "ABBA_OUT=" + env_out.string() + " \"" + ABBA_CLI + "\" run -s S2 -n 1 -d 12 -j 1 >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(env_out / "manifest.json"));
    fs::remove_all(env_out);
}

TEST_CASE("an unwritable output path exits 2") {
    const auto blocker = scratch("blocker");
    { std::ofstream(blocker) << "x"; }
    const auto o = abba("run -s S1 -n 1 -d 12 -o " + (blocker / "out").string());
    CHECK(o.code == 2);
    CHECK(o.output.find("output error") != std::string::npos);
    fs::remove(blocker);
}

TEST_CASE("pump-link demo over a socket converges with heavy loss") {
    const auto sock = scratch("link.sock");
    const auto o = abba("demo-pump-link --drop-rate 0.5 --seed 3 --address " + sock.string());
    CHECK(o.code == 0);
    CHECK(o.output.find("converged: yes") != std::string::npos);
    CHECK(o.output.find("SmbgMeasured") != std::string::npos);
    CHECK(o.output.find("TherapyUpdate") != std::string::npos);
    CHECK(abba("demo-pump-link").code == 0);
}
