// End-to-end checks of the CLI: documented exit codes, file formats, key outputs.
// argv[1] is the CLI binary path.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

int checks = 0, failed = 0;

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

std::string g_cli;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run(const std::string& args) {
    std::string cmd = "\"" + g_cli + "\" " + args + " > cli_stdout.tmp 2> cli_stderr.tmp";
    int rc = std::system(cmd.c_str());
    RunResult r{-1, slurp("cli_stdout.tmp"), slurp("cli_stderr.tmp")};
    if (WIFEXITED(rc)) r.code = WEXITSTATUS(rc);
    return r;
}

void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok) {
        ++failed;
        std::cerr << "FAIL: " << what << "\n";
    }
}

void expect_contains(const std::string& haystack, const std::string& needle,
                     const std::string& what) {
    expect(haystack.find(needle) != std::string::npos, what + " (missing '" + needle + "')");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path);
    os << content;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: test_cli <cli-binary>\n";
        return 1;
    }
    g_cli = argv[1];

    // search: the documented delta-target example
    RunResult search = run(
        "search --b 2 --s 1 --d 3 --l 8 --weights power:a=0,r=1,c=0 --target delta:3 "
        "--trials 50 --seed 7 --out cli_net.txt");
    expect(search.code == 0, "delta-target search exits 0");
    expect_contains(search.out, "target_met=1", "search reports the met target");
    std::string net_file = slurp("cli_net.txt");
    expect(net_file.rfind("2 1 8 3\n", 0) == 0, "matrix file header is 'b s l d'");

    // merit on the searched net recomputes the identical report from the file
    RunResult merit = run("merit --matrix cli_net.txt --weights power:a=0,r=1,c=0");
    expect(merit.code == 0, "merit exits 0");
    expect_contains(merit.out, "delta=", "merit prints delta");
    for (const char* key : {"wafom=", "delta=", "tail_bound=", "wce_bound="}) {
        std::string line;
        std::istringstream ss(search.out);
        std::string wanted;
        while (std::getline(ss, line))
            if (line.rfind(key, 0) == 0) wanted = line;
        expect(!wanted.empty() && merit.out.find(wanted + "\n") != std::string::npos,
               std::string("search and merit agree on ") + key);
    }

    // merit on hand-made nets with known reports
    write_file("cli_single.txt", "2 1 2 1\n1\n0\n");
    RunResult m1 = run("merit --matrix cli_single.txt --weights power:a=0,r=1,c=0");
    expect_contains(m1.out, "wafom=0.25\n", "single-column net wafom");
    expect_contains(m1.out, "delta=2\n", "single-column net delta");

    write_file("cli_identity.txt", "2 1 2 2\n1 0\n0 1\n");
    RunResult m2 = run("merit --matrix cli_identity.txt --weights power:a=0,r=1,c=0");
    expect_contains(m2.out, "wafom=0\n", "identity net wafom");
    expect_contains(m2.out, "delta=3\n", "identity net delta hits the floor");

    write_file("cli_zero.txt", "2 1 1 1\n0\n");
    RunResult m3 = run("merit --matrix cli_zero.txt --weights power:a=0,r=1,c=0");
    expect_contains(m3.out, "wafom=0.5\n", "all-zero net wafom");
    expect_contains(m3.out, "delta=1\n", "all-zero net delta");

    // malformed matrix file: exit 1 and the offending line named
    write_file("cli_bad.txt", "2 1 2 1\n1\n7\n");
    RunResult bad = run("merit --matrix cli_bad.txt --weights power:a=0,r=1,c=0");
    expect(bad.code == 1, "malformed matrix exits 1");
    expect_contains(bad.err, "line 3", "malformed matrix names the line");

    // bad weight grammar
    RunResult badw = run("merit --matrix cli_single.txt --weights power:q=3");
    expect(badw.code == 1, "bad weight grammar exits 1");

    // zero trials and an l below the delta-target floor are usage errors
    expect(run("search --b 2 --s 1 --d 3 --l 8 --weights power:a=0,r=1,c=0 "
               "--target delta:3 --trials 0 --seed 1")
                   .code == 1,
           "zero trials exits 1");
    expect(run("search --b 2 --s 1 --d 3 --l 3 --weights power:a=0,r=1,c=0 "
               "--target delta:6 --trials 5 --seed 1")
                   .code == 1,
           "l below M - a_1 - 1 exits 1");

    // unmet delta target: exit 2 (d = 1 cannot reach delta 8 here)
    RunResult unmet = run(
        "search --b 2 --s 1 --d 1 --l 12 --weights power:a=0,r=1,c=0 --target delta:8 "
        "--trials 2 --seed 1 --out cli_unmet.txt");
    expect(unmet.code == 2, "unmet delta target exits 2");
    expect_contains(unmet.err, "warning", "advisory vol(M) > rho^d warning printed");

    // bounds: the documented lower bound at n = 1, and the p = 2 refusal
    RunResult bounds = run("bounds --b 2 --s 1 --n 1 --weights power:a=0,r=1,c=0");
    expect(bounds.code == 0, "bounds exits 0");
    expect_contains(bounds.out, "lower_bound_n=0.5\n", "lower bound at n=1");
    expect_contains(bounds.out, "c_bar=", "constants block printed");

    RunResult p2 = run("bounds --b 2 --s 1 --n 16 --weights power:a=1,r=1,c=0 --p 2");
    expect(p2.code == 1, "p=2 request refused");
    expect_contains(p2.err, "not achievable", "p=2 refusal message");

    RunResult p15 = run("bounds --b 2 --s 2 --d 4 --weights power:a=1,r=1,c=0 --p 1.5");
    expect(p15.code == 0, "p=1.5 request succeeds for a_j = j");
    expect_contains(p15.out, "achievable=yes", "a_j = j achieves p = 1.5");
    expect_contains(p15.out, "wce_trac_target=", "trac target printed for --d");

    RunResult punknown = run("bounds --b 2 --s 2 --d 4 --weights explicit:1,2 --p 1.5");
    expect_contains(punknown.out, "achievable=unknown",
                    "explicit lists cannot certify a liminf");

    // trac regime needs a power rule
    expect(run("bounds --b 2 --s 1 --n 4 --weights explicit:0 --regime trac").code == 1,
           "trac regime with a non-power rule exits 1");

    // vol: the documented count
    RunResult volr = run("vol --b 2 --s 1 --M 3 --weights power:a=0,r=1,c=0");
    expect(volr.code == 0, "vol exits 0");
    expect_contains(volr.out, "vol=5\n", "vol(3) = 5");
    expect_contains(volr.out, "bound_conv=", "conv bound printed");

    // converge rejects Walsh-space rules
    expect(run("converge --b 2 --s-list 1 --d-list 2..3 --weights power:a=1,r=1,c=0 "
               "--trials 2 --seed 3")
                   .code == 1,
           "converge requires a smooth rule");

    // converge writes header + |s_list| * |d_list| rows
    RunResult conv = run(
        "converge --b 2 --s-list 1 --d-list 2..4 --weights smooth-power:u0=0.5,q=0.5 "
        "--trials 4 --seed 11 --out cli_conv.csv");
    expect(conv.code == 0, "converge exits 0");
    std::string csv = slurp("cli_conv.csv");
    expect(static_cast<int>(std::count(csv.begin(), csv.end(), '\n')) == 4,
           "CSV has header + 3 rows");
    expect(csv.rfind("s,n,d,seed,delta,wafom,empirical,certified,lower_bound\n", 0) == 0,
           "CSV header matches the schema");
    expect_contains(conv.out, "slope_log_error_vs_log_n_sq=", "slope printed");
    expect_contains(conv.out, "slope_s1=", "per-dimension slope printed");

    // smooth rules embed automatically for net-facing commands
    RunResult embedded = run("merit --matrix cli_single.txt --weights smooth-power:u0=0.5,q=1");
    expect(embedded.code == 0, "merit accepts smooth rules");
    expect_contains(embedded.out, "weights_embedded=", "embedding is reported");

    // WAFOM_NETS_JOBS is the --jobs fallback and must not change outputs
    {
        std::string common =
            " converge --b 2 --s-list 1 --d-list 2..4 --weights smooth-power:u0=0.5,q=0.5 "
            "--trials 4 --seed 11 --out ";
        int rc = std::system(("WAFOM_NETS_JOBS=2 \"" + g_cli + "\"" + common +
                              "cli_env.csv > /dev/null 2>&1")
                                 .c_str());
        expect(WIFEXITED(rc) && WEXITSTATUS(rc) == 0, "env-driven jobs run succeeds");
        RunResult flag = run(common.substr(1) + "cli_flag.csv --jobs 1");
        expect(flag.code == 0, "flag-driven jobs run succeeds");
        expect(slurp("cli_env.csv") == slurp("cli_flag.csv") && !slurp("cli_env.csv").empty(),
               "env and flag worker counts give identical CSVs");
        std::remove("cli_env.csv");
        std::remove("cli_flag.csv");
    }

    // unknown subcommand / missing required flags
    expect(run("frobnicate").code == 1, "unknown subcommand exits 1");
    expect(run("search --b 2").code == 1, "missing required flags exits 1");

    // a parsed config round-trips through its canonical form
    RunResult cfg1 = run(
        "search --b 2 --s 1 --d 3 --l 8 --weights power:a=0,r=1,c=0 --target delta:3 "
        "--trials 50 --seed 7 --out cli_net.txt --print-config");
    expect(cfg1.code == 0, "print-config exits 0");
    write_file("cli_cfg.ini", cfg1.out);
    RunResult cfg2 = run("search --config cli_cfg.ini --print-config");
    expect(cfg2.code == 0, "config file parses");
    expect(cfg1.out == cfg2.out && !cfg1.out.empty(), "canonical config round-trips");

    for (const char* f : {"cli_net.txt", "cli_single.txt", "cli_identity.txt", "cli_zero.txt",
                          "cli_bad.txt", "cli_unmet.txt", "cli_conv.csv", "cli_cfg.ini",
                          "cli_stdout.tmp", "cli_stderr.tmp"})
        std::remove(f);

    std::printf("%d checks, %d failures\n", checks, failed);
    return failed == 0 ? 0 : 1;
}
