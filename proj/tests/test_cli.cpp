#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

namespace {

const std::string cli = CPSCAN_CLI_PATH;

struct run_result {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct temp_dir {
    std::string path;
    temp_dir() {
        char tmpl[] = "/tmp/cpscan_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

run_result run(const temp_dir& dir, const std::string& args) {
    const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
    const std::string cmd = cli + " " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    run_result r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

} // namespace

TEST_CASE("cli: detect on a clean step fixture") {
    temp_dir dir;
    const run_result sim = run(dir, "simulate --n 200 --signal step --cps 80 --levels 0,1 "
                                    "--noise gauss --sigma 0 --seed 5 --output " +
                                        dir.file("step.csv"));
    REQUIRE(sim.exit_code == 0);
    const run_result det = run(dir, "detect --input " + dir.file("step.csv") +
                                        " --model mean-known-var --sigma 1 --rule two-log-n");
    REQUIRE(det.exit_code == 0);
    REQUIRE(contains(det.out, "detected=true"));
    REQUIRE(contains(det.out, "tau_hat=80"));
    REQUIRE(contains(det.out, "delta_hat=1"));
    REQUIRE(contains(det.out, "model=mean-known-var"));
}

TEST_CASE("cli: constant data is not detected") {
    temp_dir dir;
    {
        std::ofstream f(dir.file("flat.csv"));
        f << "x\n";
        for (int i = 0; i < 50; ++i) f << "2.0\n";
    }
    const run_result det = run(dir, "detect --input " + dir.file("flat.csv") +
                                        " --model mean-known-var --sigma 1 --rule two-log-n");
    REQUIRE(det.exit_code == 0);
    REQUIRE(contains(det.out, "detected=false"));
}

TEST_CASE("cli: missing sigma for a known-variance model exits 3") {
    temp_dir dir;
    {
        std::ofstream f(dir.file("d.csv"));
        f << "1\n2\n3\n";
    }
    const run_result det =
        run(dir, "detect --input " + dir.file("d.csv") + " --model mean-known-var");
    REQUIRE(det.exit_code == 3);
    REQUIRE(contains(det.err, "--sigma"));
}

TEST_CASE("cli: unreadable input exits 2; malformed values report line numbers") {
    temp_dir dir;
    const run_result missing = run(dir, "detect --input " + dir.file("nope.csv") +
                                            " --model mean-unknown-var");
    REQUIRE(missing.exit_code == 2);

    {
        std::ofstream f(dir.file("bad.csv"));
        f << "x\n1.0\nnan\n2.0\n";
    }
    const run_result bad =
        run(dir, "detect --input " + dir.file("bad.csv") + " --model mean-unknown-var");
    REQUIRE(bad.exit_code == 2);
    REQUIRE(contains(bad.err, "line 3"));
}

TEST_CASE("cli: degenerate data exits 4") {
    temp_dir dir;
    {
        std::ofstream f(dir.file("flat.csv"));
        for (int i = 0; i < 20; ++i) f << "7\n";
    }
    const run_result det = run(dir, "detect --input " + dir.file("flat.csv") +
                                        " --model mean-unknown-var --rule two-log-n");
    REQUIRE(det.exit_code == 4);
}

TEST_CASE("cli: calibrate prints closed-form thresholds") {
    temp_dir dir;
    const run_result cal = run(dir, "calibrate --n 1000 --model mean-known-var --sigma 1 "
                                    "--rule two-log-n --precision 6");
    REQUIRE(cal.exit_code == 0);
    REQUIRE(contains(cal.out, "threshold=13.8155"));
}

TEST_CASE("cli: estimate-sigma flags degenerate input") {
    temp_dir dir;
    {
        std::ofstream f(dir.file("flat.csv"));
        for (int i = 0; i < 30; ++i) f << "1.5\n";
    }
    const run_result est = run(dir, "estimate-sigma --input " + dir.file("flat.csv"));
    REQUIRE(est.exit_code == 0);
    REQUIRE(contains(est.out, "sigma_hat=0"));
    REQUIRE(contains(est.out, "degenerate=true"));
}

TEST_CASE("cli: experiments with a fixed seed are byte-identical") {
    temp_dir dir;
    const std::string base = "experiment --id E6 --seed 3 --reps 100 --cal-reps 200 --output ";
    const run_result a = run(dir, base + dir.file("a.csv"));
    const run_result b = run(dir, base + dir.file("b.csv"));
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);
    const std::string ca = slurp(dir.file("a.csv"));
    REQUIRE(ca == slurp(dir.file("b.csv")));
    REQUIRE(ca.find("# experiment: E6") != std::string::npos);
}

TEST_CASE("cli: randomized commands print an auto-chosen seed") {
    temp_dir dir;
    const run_result sim = run(dir, "simulate --n 10 --noise gauss --sigma 1 --output " +
                                        dir.file("s.csv"));
    REQUIRE(sim.exit_code == 0);
    REQUIRE(contains(sim.out, "seed="));

    const run_result sim2 = run(dir, "simulate --n 10 --noise gauss --sigma 1 --seed 4 "
                                     "--output " + dir.file("s2.csv"));
    REQUIRE(sim2.exit_code == 0);
    REQUIRE_FALSE(contains(sim2.out, "seed="));
}

TEST_CASE("cli: invalid subcommand or flags exit 3") {
    temp_dir dir;
    REQUIRE(run(dir, "bogus").exit_code == 3);
    REQUIRE(run(dir, "experiment --id E1 --bad-flag 1").exit_code == 3);
    {
        std::ofstream f(dir.file("d.csv"));
        f << "1\n2\n3\n4\n";
    }
    REQUIRE(run(dir, "detect --input " + dir.file("d.csv") + " --model nosuch").exit_code == 3);
}
