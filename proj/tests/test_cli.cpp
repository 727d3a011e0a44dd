#include "fixture.hpp"

#include "litscape/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string output;
};

// Runs the CLI with stderr folded into the captured output.
Result cli(const std::string& args) {
    std::string cmd = std::string("\"") + LITSCAPE_CLI + "\" " + args + " 2>&1";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string config_arg() { return "--config \"" + fixture::synthetic_config().string() + "\""; }

}  // namespace

TEST_CASE("cli run and stages") {
    auto out = fixture::scratch("cli");
    auto base = config_arg() + " --out \"" + out.string() + "\" ";

    auto early = cli(base + "extract");
    CHECK(early.code == 2);
    CHECK(early.output.find("corpus.jsonl") != std::string::npos);

    auto run = cli(base + "run");
    CHECK_MESSAGE(run.code == 0, run.output);
    for (auto name : {"corpus.jsonl", "mentions.jsonl", "vectors.cache", "clusters.jsonl",
                      "graph.json", "graph.dot", "graph.graphml", "communities.json",
                      "report.txt", "report.json", "eval.json", "eval.txt", "manifest.json"})
        CHECK_MESSAGE(fs::exists(out / name), name);

    auto graph = litscape::read_file(out / "graph.dot");
    CHECK(cli(base + "graph").code == 0);
    CHECK(litscape::read_file(out / "graph.dot") == graph);
    CHECK(cli(base + "-v report").output.find("[report] wrote report.txt") != std::string::npos);
    fs::remove_all(out);
}

TEST_CASE("cli errors") {
    auto dir = fixture::scratch("cli-bad");
    {
        std::ofstream f(dir / "both.json");
        f << R"({"corpus.local_path": "p", "corpus.query": "stock"})";
    }
    auto both = cli("--config \"" + (dir / "both.json").string() + "\" run");
    CHECK(both.code == 2);
    CHECK(both.output.find("exactly one") != std::string::npos);

    CHECK(cli(config_arg() + " frobnicate").code == 2);
    CHECK(cli("run").code == 2);
    CHECK(cli("--config /nonexistent/config.json run").code == 2);

    auto version = cli("--version");
    CHECK(version.code == 0);
    CHECK(version.output.find(std::string(litscape::kToolVersion)) != std::string::npos);
    CHECK(cli("--help").code == 0);
    fs::remove_all(dir);
}
