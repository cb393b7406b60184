// Command-line frontend: search / merit / bounds / vol / converge.
// Exit codes: 0 success, 1 usage or config error, 2 search target unmet.

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "qmcnets/format.hpp"
#include "qmcnets/integrate.hpp"
#include "qmcnets/merit.hpp"
#include "qmcnets/parallel.hpp"

using namespace qmcnets;

namespace {

// "1,2,4" or "2..8" or a mix: "1,4..6,12"
std::vector<std::size_t> parse_size_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(std::stoul(item));
        } else {
            std::size_t lo = std::stoul(item.substr(0, dots));
            std::size_t hi = std::stoul(item.substr(dots + 2));
            if (hi < lo) throw std::invalid_argument("range '" + item + "' is decreasing");
            for (std::size_t v = lo; v <= hi; ++v) out.push_back(v);
        }
    }
    if (out.empty()) throw std::invalid_argument("empty list '" + text + "'");
    return out;
}

// Walsh-space weights for net-facing commands; smooth rules embed first.
WeightSequence walsh_weights(const std::string& rule, int base, std::ostream& os) {
    WeightSequence w = WeightSequence::parse(rule, base);
    if (!w.is_smooth()) return w;
    EmbeddedWeights e = embed_smooth_to_walsh(w, EmbedVariant::Loose);
    os << "weights_embedded=" << e.a.to_string() << "\n";
    return e.a;
}

std::uint64_t resolve_seed(CLI::Option* opt, std::uint64_t seed) {
    if (opt->count() > 0) return seed;
    std::random_device rd;
    std::uint64_t drawn = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cout << "seed=" << drawn << "\n";
    return drawn;
}

struct TargetSpec {
    SearchTarget target;
    static TargetSpec parse(const std::string& text) {
        if (text == "wafom" || text == "min_wafom") return {SearchTarget::min_wafom()};
        if (text.rfind("delta:", 0) == 0)
            return {SearchTarget::delta_at_least(std::stod(text.substr(6)))};
        throw std::invalid_argument("target must be 'wafom' or 'delta:<M>', got '" + text + "'");
    }
};

void print_constants(const BoundConstants& c, std::ostream& os) {
    os << "rho=" << c.rho << "\n";
    os << "sigma_bar=" << fmt_g17(c.sigma_bar) << "\n";
    os << "c_prime=" << fmt_g17(c.c_prime) << "\n";
    os << "c_bar=" << fmt_g17(c.c_bar) << "\n";
    os << "c_second=" << fmt_g17(c.c_second) << "\n";
    if (c.trac) {
        os << "sigma_bar_inf=" << fmt_g17(c.trac->sigma_bar_inf) << "\n";
        os << "c_vol=" << fmt_g17(c.trac->c_vol) << "\n";
        os << "c_bd=" << fmt_g17(c.trac->c_bd) << "\n";
        os << "c_help=" << fmt_g17(c.trac->c_help) << "\n";
        os << "r=" << fmt_g17(c.trac->r) << "\n";
        os << "p=" << fmt_g17(c.trac->p) << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Digital net construction and merit evaluation for quasi-Monte Carlo "
                 "integration of smooth functions"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read options from an INI config file");
    bool print_config = false;
    app.add_flag("--print-config", print_config,
                 "print the canonical config for this invocation and exit");
    // parent-level flags may appear after the subcommand name
    app.fallthrough();

    // ---- search ----
    auto* search = app.add_subcommand("search", "random search for a good net");
    int se_b = 2;
    std::size_t se_s = 1, se_d = 1, se_l = 1;
    std::string se_weights, se_target = "wafom", se_out = "net.txt";
    std::uint64_t se_trials = 100, se_seed = 0;
    unsigned se_jobs = 0;
    search->add_option("--b", se_b, "base")->required();
    search->add_option("--s", se_s, "dimension")->required();
    search->add_option("--d", se_d, "log_b of the point count")->required();
    search->add_option("--l", se_l, "precision (rows per matrix)")->required();
    search->add_option("--weights", se_weights, "weight rule")->required();
    search->add_option("--target", se_target, "'wafom' or 'delta:<M>'");
    search->add_option("--trials", se_trials, "number of random nets to draw");
    auto* se_seed_opt = search->add_option("--seed", se_seed, "master seed");
    search->add_option("--out", se_out, "matrix file to write");
    search->add_option("--jobs", se_jobs, "worker threads (default: WAFOM_NETS_JOBS or cores)");

    // ---- merit ----
    auto* merit = app.add_subcommand("merit", "evaluate the merit report of a stored net");
    std::string me_matrix, me_weights, me_regime = "conv";
    merit->add_option("--matrix", me_matrix, "matrix file")->required();
    merit->add_option("--weights", me_weights, "weight rule")->required();
    merit->add_option("--regime", me_regime, "conv or trac")
        ->check(CLI::IsMember({"conv", "trac"}));

    // ---- bounds ----
    auto* bounds = app.add_subcommand("bounds", "print error bounds and their constants");
    int bo_b = 2;
    std::size_t bo_s = 1;
    std::uint64_t bo_n = 0;
    std::size_t bo_d = 0;
    double bo_p = 0.0;
    std::string bo_weights, bo_regime = "conv";
    bounds->add_option("--b", bo_b, "base")->required();
    bounds->add_option("--s", bo_s, "dimension")->required();
    auto* bo_n_opt = bounds->add_option("--n", bo_n, "point count");
    auto* bo_d_opt = bounds->add_option("--d", bo_d, "log_b of the point count");
    bounds->add_option("--weights", bo_weights, "weight rule")->required();
    bounds->add_option("--regime", bo_regime, "conv or trac")
        ->check(CLI::IsMember({"conv", "trac"}));
    auto* bo_p_opt = bounds->add_option("--p", bo_p, "requested convergence exponent p");

    // ---- vol ----
    auto* volcmd = app.add_subcommand("vol", "count indices of modified weight <= M");
    int vo_b = 2;
    std::size_t vo_s = 1;
    double vo_m = 0.0;
    std::uint64_t vo_cap = 100000000ULL;
    std::string vo_weights;
    volcmd->add_option("--b", vo_b, "base")->required();
    volcmd->add_option("--s", vo_s, "dimension")->required();
    volcmd->add_option("--M", vo_m, "weight cap")->required();
    volcmd->add_option("--weights", vo_weights, "weight rule")->required();
    volcmd->add_option("--cap", vo_cap, "enumeration cap");

    // ---- converge ----
    auto* converge = app.add_subcommand("converge", "empirical convergence experiment");
    int co_b = 2;
    std::string co_s_list = "1,2", co_d_list = "2..8";
    std::string co_weights = "smooth-power:u0=0.5,q=0.5", co_family = "exp-linear";
    std::string co_out = "converge.csv";
    std::uint64_t co_trials = 32, co_seed = 0;
    unsigned co_jobs = 0;
    converge->add_option("--b", co_b, "base");
    converge->add_option("--s-list", co_s_list, "dimensions, e.g. 1,2,4");
    converge->add_option("--d-list", co_d_list, "log sizes, e.g. 2..8");
    converge->add_option("--weights", co_weights, "smooth-space weight rule");
    converge->add_option("--family", co_family, "integrand family")
        ->check(CLI::IsMember({"exp-linear", "cosine"}));
    converge->add_option("--trials", co_trials, "search trials per grid cell");
    auto* co_seed_opt = converge->add_option("--seed", co_seed, "master seed");
    converge->add_option("--out", co_out, "CSV output path");
    converge->add_option("--jobs", co_jobs, "worker threads (default: WAFOM_NETS_JOBS or cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (print_config) {
        std::cout << app.config_to_str(false, false);
        return 0;
    }

    try {
        if (*search) {
            WeightSequence a = walsh_weights(se_weights, se_b, std::cout);
            TargetSpec parsed = TargetSpec::parse(se_target);
            se_seed = resolve_seed(se_seed_opt, se_seed);
            SearchResult res =
                search_net(se_s, se_b, se_d, se_l, a, parsed.target, se_trials, se_seed, se_jobs);
            save_matrix_file(se_out, res.net);
            std::cout << "matrix_file=" << se_out << "\n";
            std::cout << "trial=" << res.trial << "\n";
            std::cout << "trials_run=" << res.trials_run << "\n";
            std::cout << "target_met=" << (res.target_met ? 1 : 0) << "\n";
            std::cout << res.report.to_kv_block();
            return res.target_met ? 0 : 2;
        }

        if (*merit) {
            GeneratingMatrices g = load_matrix_file(me_matrix);
            WeightSequence a = walsh_weights(me_weights, g.base(), std::cout);
            Regime regime = (me_regime == "trac") ? Regime::Trac : Regime::Conv;
            MeritReport rep = evaluate_report(g, a, regime);
            std::cout << rep.to_kv_block();
            return 0;
        }

        if (*bounds) {
            if (bo_p_opt->count() > 0) {
                if (bo_p >= 2.0) {
                    std::cerr << "bounds: p = " << bo_p
                              << " is not achievable: the minimal worst-case error exceeds "
                                 "exp_b(-(log n)^2 / (2 s log b) - O(log n)) for every weight "
                                 "sequence, so no constants A, C, c >= 0 give "
                                 "C exp(As) exp(-c (log n)^2) for all s and n\n";
                    return 1;
                }
                if (bo_p <= 1.0) {
                    std::cerr << "bounds: p must satisfy 1 < p < 2\n";
                    return 1;
                }
            }
            WeightSequence a = walsh_weights(bo_weights, bo_b, std::cout);
            BoundConstants c = BoundConstants::compute(bo_s, a, bo_b);
            Regime regime = (bo_regime == "trac") ? Regime::Trac : Regime::Conv;
            if (regime == Regime::Trac && !c.trac) {
                std::cerr << "bounds: tractability regime needs a power rule with a > 0\n";
                return 1;
            }
            if (bo_p_opt->count() > 0) {
                double need_r = (bo_p - 1.0) / (2.0 - bo_p);
                std::cout << "requested_p=" << fmt_g17(bo_p) << "\n";
                std::cout << "required_growth_r=" << fmt_g17(need_r) << "\n";
                if (c.trac)
                    std::cout << "achievable=" << (c.trac->p >= bo_p - 1e-12 ? "yes" : "no")
                              << "\n";
                else
                    std::cout << "achievable=unknown\n";
            }
            print_constants(c, std::cout);
            std::uint64_t n = 0;
            if (bo_d_opt->count() > 0)
                n = checked_pow(static_cast<std::uint64_t>(bo_b), static_cast<unsigned>(bo_d));
            else if (bo_n_opt->count() > 0)
                n = bo_n;
            if (n > 0) {
                std::cout << "n=" << n << "\n";
                std::cout << "lower_bound_n=" << fmt_g17(lower_bound_n(n, bo_s, a, bo_b))
                          << "\n";
            }
            if (bo_d_opt->count() > 0) {
                double ln_b = std::log(static_cast<double>(bo_b));
                std::cout << "wce_conv_target="
                          << fmt_g17(c.c_bar * std::exp(-c.c_second *
                                                        static_cast<double>(bo_d * bo_d)))
                          << "\n";
                if (c.trac) {
                    double expo = (2.0 * c.trac->r + 1.0) / (c.trac->r + 1.0);
                    std::cout << "wce_trac_target="
                              << fmt_g17(c.trac->c_bd *
                                         std::exp(-c.trac->c_help * ln_b / 2.0 *
                                                  std::pow(static_cast<double>(bo_d), expo)))
                              << "\n";
                }
            }
            return 0;
        }

        if (*volcmd) {
            WeightSequence a = walsh_weights(vo_weights, vo_b, std::cout);
            std::cout << "vol=" << vol(vo_m, vo_s, a, vo_b, vo_cap) << "\n";
            std::cout << "bound_conv=" << fmt_g17(vol_bound_conv(vo_m, vo_s, a, vo_b)) << "\n";
            if (a.trac_params())
                std::cout << "bound_trac=" << fmt_g17(vol_bound_trac(vo_m, a, vo_b)) << "\n";
            return 0;
        }

        if (*converge) {
            WeightSequence u = WeightSequence::parse(co_weights, co_b);
            if (!u.is_smooth()) {
                std::cerr << "converge: --weights must be a smooth-space rule "
                             "(smooth-power or smooth-explicit)\n";
                return 1;
            }
            co_seed = resolve_seed(co_seed_opt, co_seed);
            auto family = (co_family == "cosine") ? TestFunction::Family::Cosine
                                                  : TestFunction::Family::ExpLinear;
            auto records = convergence_experiment(family, u, co_b, parse_size_list(co_s_list),
                                                  parse_size_list(co_d_list), co_trials,
                                                  co_seed, co_jobs);
            std::ofstream os(co_out);
            if (!os) throw std::runtime_error("cannot open '" + co_out + "' for writing");
            write_convergence_csv(os, records);
            if (!os.good()) throw std::runtime_error("write failed for '" + co_out + "'");
            std::cout << "csv=" << co_out << "\n";
            std::cout << "rows=" << records.size() << "\n";
            try {
                SlopeFit fit = fit_log_error(records);
                std::cout << "slope_log_error_vs_log_n_sq=" << fmt_g17(fit.slope) << "\n";
                std::cout << "intercept=" << fmt_g17(fit.intercept) << "\n";
                std::cout << "r2=" << fmt_g17(fit.r2) << "\n";
                std::cout << "fit_points=" << fit.points << "\n";
            } catch (const std::invalid_argument&) {
                std::cout << "slope_log_error_vs_log_n_sq=nan\n";
            }
            for (std::size_t s : parse_size_list(co_s_list)) {
                std::vector<ConvergenceRecord> subset;
                for (const ConvergenceRecord& r : records)
                    if (r.s == s) subset.push_back(r);
                try {
                    SlopeFit fit = fit_log_error(subset);
                    std::cout << "slope_s" << s << "=" << fmt_g17(fit.slope)
                              << " r2_s" << s << "=" << fmt_g17(fit.r2) << "\n";
                } catch (const std::invalid_argument&) {
                    std::cout << "slope_s" << s << "=nan\n";
                }
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << app.get_name() << ": " << e.what() << "\n";
        return 1;
    }
    return 1;
}
