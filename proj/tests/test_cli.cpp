#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

// End-to-end runs of the installed CLI binary; the path arrives through the
// NETLOCAL_CLI environment variable set by ctest.

namespace {

struct CommandResult {
    int exit_code = -1;
    std::string stdout_text;
};

std::string cli_path() {
    const char* path = std::getenv("NETLOCAL_CLI");
    REQUIRE_MESSAGE(path != nullptr, "NETLOCAL_CLI must point at the CLI binary");
    return path;
}

CommandResult run(const std::string& args) {
    const std::string command = cli_path() + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CommandResult result;
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        result.stdout_text.append(buffer.data(), n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

}  // namespace

TEST_CASE("bound command reproduces the paper's cardinality bounds") {
    auto result = run("bound --network triangle --outputs 4");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text == "60\n");

    result = run("bound --network triangle");
    CHECK(result.stdout_text == "6\n");

    result = run("bound --network bilocal --source 0");
    CHECK(result.stdout_text == "4\n");
    result = run("bound --network bilocal --source 1");
    CHECK(result.stdout_text == "4\n");
}

TEST_CASE("fit succeeds at the (2,2,2) critical point and reports JSON") {
    const auto result = run(
        "fit --network triangle --target ghz --v 0.25 --cards 2,2,2 "
        "--restarts 50 --seed 42 --threshold 1e-6");
    CHECK(result.exit_code == 0);
    const auto json = nlohmann::json::parse(result.stdout_text);
    CHECK(json["success"].get<bool>());
    CHECK(json["best_rmse"].get<double>() <= 1e-6);
    CHECK(json["restarts"].size() == 50);
    CHECK(json["model"]["topology"]["outputs"].size() == 3);
}

TEST_CASE("fit exit code 2 beyond the critical visibility") {
    const auto result = run(
        "fit --network triangle --target ghz --v 0.34 --cards 3,2,2 "
        "--restarts 10 --seed 7");
    CHECK(result.exit_code == 2);
    const auto json = nlohmann::json::parse(result.stdout_text);
    CHECK_FALSE(json["success"].get<bool>());
}

TEST_CASE("identical argv and seed give byte-identical output, any thread count") {
    const std::string flags =
        "fit --network triangle --target w --v 0.4 --cards 3,2,2 --restarts 12 "
        "--seed 2024";
    const auto serial = run(flags + " --threads 1");
    const auto threaded = run(flags + " --threads 2");
    const auto repeat = run(flags + " --threads 2");
    CHECK(serial.exit_code == 0);
    CHECK(serial.stdout_text == threaded.stdout_text);
    CHECK(threaded.stdout_text == repeat.stdout_text);
}

TEST_CASE("NETLOCAL_SEED provides the default seed") {
    const std::string flags =
        "fit --network triangle --target ghz --v 0.2 --cards 2,2,2 --restarts 6";
    const std::string command = "NETLOCAL_SEED=909 " + cli_path() + " " + flags;
    FILE* pipe = popen((command + " 2>/dev/null").c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string env_out;
    std::array<char, 4096> buffer{};
    std::size_t n = 0;
    while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
        env_out.append(buffer.data(), n);
    }
    pclose(pipe);
    const auto explicit_seed = run(flags + " --seed 909");
    CHECK(env_out == explicit_seed.stdout_text);
}

TEST_CASE("verify round-trips the exported analytic model") {
    const std::string model_path = "/tmp/netlocal_cli_ghz333.json";
    auto result = run("verify --builtin ghz333 --out " + model_path);
    CHECK(result.exit_code == 0);

    result = run("verify --model " + model_path + " --target ghz --v auto");
    CHECK(result.exit_code == 0);
    const auto json = nlohmann::json::parse(result.stdout_text);
    CHECK(json["rmse"].get<double>() <= 1e-10);
    std::remove(model_path.c_str());
}

TEST_CASE("verify flags a mismatched target with exit 2") {
    const auto result = run("verify --builtin ghz222 --target ghz --v 0.5");
    CHECK(result.exit_code == 2);
}

TEST_CASE("usage and input errors map to exit codes 1 and 3") {
    CHECK(run("fit --no-such-flag").exit_code == 1);
    CHECK(run("nonsense").exit_code == 1);
    CHECK(run("fit --network triangle --target ghz --v 0.2 --cards 2,2 --restarts 2 "
              "--seed 1")
              .exit_code == 3);  // cardinality count mismatch
    CHECK(run("fit --network triangle --target ghz --v 1.5 --cards 2,2,2 --restarts 2 "
              "--seed 1")
              .exit_code == 3);  // v outside [0,1]
    CHECK(run("fit --network triangle --target file --target-file /nonexistent.json "
              "--cards 2,2,2 --restarts 2")
              .exit_code == 3);
    CHECK(run("critical-v --network triangle --target ghz --cards 2,2,2 --v-lo 0.4 "
              "--v-hi 0.5 --v-tol 0.02 --restarts 6 --seed 1")
              .exit_code == 3);  // bracket error
    CHECK(run("fit --network triangle --target ghz --cards 2,2,2").exit_code == 1);
    // --v missing
}

TEST_CASE("help lists every subcommand") {
    const auto result = run("--help");
    CHECK(result.exit_code == 0);
    for (const char* name :
         {"fit", "sweep", "grid", "critical-v", "ejm-table", "bound", "verify"}) {
        CHECK(result.stdout_text.find(name) != std::string::npos);
    }
    const auto fit_help = run("fit --help");
    CHECK(fit_help.exit_code == 0);
    for (const char* flag : {"--cards", "--restarts", "--seed", "--threshold",
                             "--threads", "--out", "--target"}) {
        CHECK(fit_help.stdout_text.find(flag) != std::string::npos);
    }
}

TEST_CASE("sweep and grid emit their CSV schemas") {
    auto result = run(
        "sweep --network triangle --target ghz --cards 2,2,2 --v-list 0.1,0.2 "
        "--restarts 6 --seed 3");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.find("v,rmse,cost,success,restarts,seed,wall_ms\n") == 0);

    result = run(
        "grid --network bilocal --target bilocal-ij --cards 4,4 --x-from 0 --x-to 0.2 "
        "--x-steps 2 --y-from 0 --y-to 0.2 --y-steps 2 --restarts 6 --seed 3");
    CHECK(result.exit_code == 0);
    CHECK(result.stdout_text.find("x,y,rmse,cost,success,skipped,seed,wall_ms\n") == 0);
    int lines = 0;
    for (char ch : result.stdout_text) lines += ch == '\n';
    CHECK(lines == 5);  // header + 4 grid points
}

TEST_CASE("critical-v emits JSON with the bisected value") {
    const auto result = run(
        "critical-v --network triangle --target ghz --cards 2,2,2 --v-lo 0.18 "
        "--v-hi 0.32 --v-tol 0.02 --restarts 16 --seed 21");
    CHECK(result.exit_code == 0);
    const auto json = nlohmann::json::parse(result.stdout_text);
    CHECK(json["v_critical"].get<double>() == doctest::Approx(0.25).epsilon(0.15));
}
