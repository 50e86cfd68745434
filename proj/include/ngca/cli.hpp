#ifndef NGCA_CLI_HPP
#define NGCA_CLI_HPP

#include "ngca/discrete_gaussian.hpp"
#include "ngca/momentmatch.hpp"
#include "ngca/planted.hpp"
#include "ngca/report.hpp"
#include "ngca/sqsim.hpp"
#include "ngca/subspace.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

namespace ngca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

using report::Cell;

inline std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + report::format_double(v[i]);
    return s;
}

inline std::vector<std::string> echo_argv(const std::vector<std::string>& argv) {
    std::vector<std::string> out(argv);
    if (!out.empty()) {
        const auto slash = out[0].find_last_of('/');
        if (slash != std::string::npos) out[0] = out[0].substr(slash + 1);
    }
    return out;
}

inline Eigen::VectorXd haar_direction(int n, std::uint64_t master, std::uint64_t index) {
    Rng rng = make_rng(master, index);
    return subspace::sample_frame(n, 1, rng).matrix().col(0);
}

inline sqsim::Hypothesis parse_hypothesis(const std::string& s) {
    if (s == "H0") return sqsim::Hypothesis::H0;
    if (s == "H1") return sqsim::Hypothesis::H1;
    throw ContractViolation("hypothesis must be H0 or H1");
}

}  // namespace detail

/// Parses argv (argv[0] is the program name), runs one subcommand and writes
/// its artifacts. Returns 0 on success, 1 when the request is infeasible
/// (construction, budget or clip configuration), 2 on usage errors.
inline int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
    using detail::Cell;
    CLI::App app{"Non-Gaussian component analysis SQ laboratory", "ngca_lab"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", std::string(report::kToolName) + " " + report::kToolVersion);

    std::uint64_t seed = 0;
    std::string out_path = "-", format = "csv";
    auto common = [&](CLI::App* s, bool tabular) {
        s->add_option("--seed", seed, "master seed")->capture_default_str();
        s->add_option("--out", out_path, "output path, - for stdout")->capture_default_str();
        if (tabular) s->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    };

    report::Header header;
    header.argv = detail::echo_argv(argv);
    std::function<void()> action;

    // construct
    std::string kind, report_path;
    int n = 64, d = 2, m = 1;
    double alpha = 0.0, half_width = 1.0;
    {
        auto* s = app.add_subcommand("construct", "build a moment-matched hidden law and write its instance JSON");
        s->add_option("--kind", kind, "appendix-d, ac or decodable")->required()->check(CLI::IsMember({"appendix-d", "ac", "decodable"}));
        s->add_option("--n", n, "ambient dimension (appendix-d)")->capture_default_str();
        s->add_option("--d", d, "number of matched moments")->capture_default_str();
        s->add_option("--alpha", alpha, "ac: atom mass (omit to maximize); decodable: mixture weight");
        s->add_option("--C", half_width, "decodable: patch half-width")->capture_default_str();
        s->add_option("--report", report_path, "construction report JSON path");
        common(s, false);
        s->callback([&] {
            action = [&] {
                momentmatch::Construction c;
                header.params = {{"kind", kind}, {"d", std::int64_t{d}}};
                if (kind == "appendix-d") {
                    header.params.push_back({"n", std::int64_t{n}});
                    c = momentmatch::appendix_d_instance(n, d);
                } else if (kind == "ac") {
                    const bool given = alpha > 0.0;
                    header.params.push_back({"alpha", alpha});
                    header.params.push_back({"mode", std::string(given ? "given" : "maximize")});
                    c = momentmatch::ac_instance(d, given ? momentmatch::AlphaMode::given : momentmatch::AlphaMode::maximize, alpha);
                } else {
                    header.params.push_back({"alpha", alpha});
                    header.params.push_back({"C", half_width});
                    c = momentmatch::decodable_instance(d, alpha, half_width);
                }
                header.seed = seed;
                nlohmann::ordered_json body;
                const auto inst = dist::to_json(c.law);
                for (const auto& [k, v] : inst.items()) body[k] = v;
                report::write_artifact(report::document_json(body, header), out_path, out);
                if (!report_path.empty()) {
                    nlohmann::ordered_json rep;
                    const auto summary = c.report_json();
                    for (const auto& [k, v] : summary.items()) rep[k] = v;
                    report::write_artifact(report::document_json(rep, header), report_path, out);
                }
            };
        });
    }

    // verify
    std::string in_path;
    {
        auto* s = app.add_subcommand("verify", "moment-match deviation nu of an instance JSON");
        s->add_option("--in", in_path, "instance JSON")->required();
        s->add_option("--d", d, "number of moments checked")->capture_default_str();
        common(s, false);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"in", in_path}, {"d", std::int64_t{d}}};
                dist::Univariate a;
                try {
                    a = dist::read_instance(in_path);
                } catch (const nlohmann::json::exception& e) {
                    throw ContractViolation(std::string("verify: malformed instance JSON: ") + e.what());
                } catch (const std::runtime_error& e) {
                    throw report::IoError(e.what());
                }
                const double nu = momentmatch::verify_moment_match(a, d);
                const auto inv = dist::check_invariants(a);
                nlohmann::ordered_json body;
                body["d"] = d;
                body["nu"] = nu;
                body["pass"] = nu <= 1e-7;
                body["mass_error"] = inv.mass_error;
                body["min_density"] = inv.min_density;
                body["valid_law"] = inv.ok;
                std::vector<double> coeffs;
                for (int k = 0; k <= d; ++k) coeffs.push_back(dist::uni_hermite_coeff(a, k));
                body["hermite_coeffs"] = coeffs;
                report::write_artifact(report::document_json(body, header), out_path, out);
            };
        });
    }

    // beta-moments
    std::vector<int> n_list{50}, m_list{3}, k_list{2, 4, 6, 8};
    std::size_t reps = 100000;
    {
        auto* s = app.add_subcommand("beta-moments", "exact and Monte Carlo E||V^T u||^k");
        s->add_option("--n", n_list, "dimensions")->delimiter(',')->capture_default_str();
        s->add_option("--m", m_list, "subspace ranks")->delimiter(',')->capture_default_str();
        s->add_option("--k", k_list, "moment orders")->delimiter(',')->capture_default_str();
        s->add_option("--reps", reps, "Haar frames per (n, m)")->capture_default_str();
        common(s, true);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"n", detail::join(n_list)}, {"m", detail::join(m_list)}, {"k", detail::join(k_list)},
                                 {"reps", std::uint64_t{reps}}};
                report::Table t{"beta", {}};
                std::uint64_t cell = 0;
                for (int nn : n_list)
                    for (int mm : m_list) {
                        const auto mc = subspace::correlation_moments_mc(nn, mm, k_list, reps, derive_seed(seed, cell++));
                        for (std::size_t i = 0; i < k_list.size(); ++i) {
                            const int k = k_list[i];
                            const double exact = k % 2 == 0 ? subspace::correlation_moment_exact(nn, mm, k)
                                                            : subspace::correlation_moment_gamma(nn, mm, k);
                            t.rows.push_back({std::int64_t{nn}, std::int64_t{mm}, std::int64_t{k}, exact, mc[i].mean, mc[i].stderr_,
                                              std::uint64_t{mc[i].reps}});
                        }
                    }
                report::emit_report(t, header, out_path, report::parse_format(format), out);
            };
        });
    }

    // decay
    std::vector<int> n_grid{50, 100, 200, 400}, decay_k{2, 4, 6};
    double ridge_c = 1.0;
    std::size_t decay_reps = 500;
    std::string summary_path;
    {
        auto* s = app.add_subcommand("decay", "median ||V^T u||^k across n");
        s->add_option("--n-grid", n_grid, "dimensions")->delimiter(',')->capture_default_str();
        s->add_option("--m", m, "subspace rank")->capture_default_str();
        s->add_option("--k", decay_k, "orders")->delimiter(',')->capture_default_str();
        s->add_option("--c", ridge_c, "ridge coefficient")->capture_default_str();
        s->add_option("--reps", decay_reps, "replicates per n")->capture_default_str();
        s->add_option("--summary", summary_path, "medians, quartiles and fitted slopes");
        common(s, true);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"n_grid", detail::join(n_grid)}, {"m", std::int64_t{m}}, {"k", detail::join(decay_k)},
                                 {"c", ridge_c}, {"reps", std::uint64_t{decay_reps}}};
                const auto stats = subspace::decay_experiment({n_grid, m, decay_k, ridge_c, decay_reps, seed});
                report::Table t{"decay", {}};
                report::Table summary{"decay-summary", {}};
                for (const auto& c : stats.cells) {
                    for (std::size_t r = 0; r < c.values.size(); ++r)
                        t.rows.push_back({std::int64_t{c.n}, std::int64_t{m}, std::int64_t{c.k}, std::uint64_t{r}, c.seeds[r], c.values[r]});
                    summary.rows.push_back({std::int64_t{c.k}, std::int64_t{c.n}, c.median, c.q1, c.q3, stats.slope(c.k)});
                }
                const auto f = report::parse_format(format);
                report::emit_report(t, header, out_path, f, out);
                if (!summary_path.empty()) report::emit_report(summary, header, summary_path, f, out);
            };
        });
    }

    // cap
    int n_min = 20, n_max = 200, n_step = 10;
    double phi = std::numbers::pi / 6.0;
    {
        auto* s = app.add_subcommand("cap", "spherical cap ratio I_{sin^2 phi}((n-1)/2, 1/2) across n");
        s->add_option("--phi", phi, "polar angle in (0, pi/2]")->capture_default_str();
        s->add_option("--n-min", n_min)->capture_default_str();
        s->add_option("--n-max", n_max)->capture_default_str();
        s->add_option("--n-step", n_step)->capture_default_str();
        common(s, true);
        s->callback([&] {
            action = [&] {
                if (n_step < 1 || n_min < 2 || n_max < n_min) throw ContractViolation("cap: need 2 <= n-min <= n-max and n-step >= 1");
                header.seed = seed;
                header.params = {{"phi", phi}, {"n_min", std::int64_t{n_min}}, {"n_max", std::int64_t{n_max}}, {"n_step", std::int64_t{n_step}}};
                report::Table t{"cap", {}};
                for (int nn = n_min; nn <= n_max; nn += n_step) {
                    const double lr = subspace::log_spherical_cap_ratio(nn, phi);
                    t.rows.push_back({std::int64_t{nn}, phi, std::exp(lr), lr});
                }
                report::emit_report(t, header, out_path, report::parse_format(format), out);
            };
        });
    }

    // distinguish
    double tau = 0.0, clip = 0.0;
    std::string mode = "honest-exact";
    std::size_t samples = 1000000, trials = 20;
    bool allow_underbudget = false;
    auto oracle_options = [&](CLI::App* s) {
        s->add_option("--tau", tau, "oracle tolerance (default n^{-(d+2)/4}/4)");
        s->add_option("--mode", mode, "honest-exact, honest-mc or adversarial-null")
            ->check(CLI::IsMember({"honest-exact", "honest-mc", "adversarial-null"}))
            ->capture_default_str();
        s->add_option("--samples", samples, "honest-mc samples per query")->capture_default_str();
        s->add_option("--clip", clip, "radial clip level M (default: searched; inf for none)");
        s->add_flag("--allow-underbudget", allow_underbudget, "honest-mc: accept sample counts below the 4-sigma budget");
    };
    auto oracle_config = [&](std::uint64_t oracle_seed) {
        sqsim::OracleConfig cfg;
        cfg.tau = tau;
        cfg.mode = sqsim::parse_oracle_mode(mode);
        cfg.samples = samples;
        cfg.seed = oracle_seed;
        cfg.enforce_budget = !allow_underbudget;
        return cfg;
    };
    auto resolve_oracle_defaults = [&] {
        if (!(tau > 0.0)) tau = sqsim::distinguisher_scale(n, d) / 4.0;
        if (!(clip > 0.0)) clip = sqsim::default_clip_level(n, d).clip;
        header.params.push_back({"tau", tau});
        header.params.push_back({"clip", clip});
        header.params.push_back({"mode", mode});
        header.params.push_back({"samples", std::uint64_t{samples}});
        header.params.push_back({"allow_underbudget", allow_underbudget});
    };
    {
        auto* s = app.add_subcommand("distinguish", "single-query radial distinguisher over seeded trials");
        s->add_option("--n", n)->capture_default_str();
        s->add_option("--d", d)->capture_default_str();
        s->add_option("--trials", trials, "trials per hypothesis")->capture_default_str();
        oracle_options(s);
        common(s, true);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"n", std::int64_t{n}}, {"d", std::int64_t{d}}, {"trials", std::uint64_t{trials}}};
                resolve_oracle_defaults();
                const auto law = momentmatch::appendix_d_instance(n, d).law;
                report::Table t{"distinguish", {}};
                for (std::size_t trial = 0; trial < trials; ++trial) {
                    const dist::Planted planted(subspace::OrthonormalFrame::from_direction(detail::haar_direction(n, derive_seed(seed, 0), trial)), law);
                    for (auto h : {sqsim::Hypothesis::H0, sqsim::Hypothesis::H1}) {
                        const std::uint64_t stream = derive_seed(derive_seed(seed, h == sqsim::Hypothesis::H0 ? 1 : 2), trial);
                        sqsim::StatOracle o(oracle_config(stream), h == sqsim::Hypothesis::H0 ? sqsim::Law{sqsim::NullLaw{n}} : sqsim::Law{planted});
                        const auto dec = sqsim::appendix_d_distinguisher(o, n, d, clip);
                        t.rows.push_back({std::uint64_t{trial}, sqsim::to_string(h), std::int64_t{n}, std::int64_t{d}, dec.statistic, dec.center,
                                          dec.threshold, sqsim::to_string(dec.verdict), dec.verdict == h});
                    }
                }
                report::emit_report(t, header, out_path, report::parse_format(format), out);
            };
        });
    }

    // concentrate
    std::vector<int> conc_grid{50, 100, 200, 400};
    std::size_t conc_reps = 200;
    double conc_tau = 0.05;
    int conc_d = 4;
    std::string law_kind = "appendix-d";
    {
        auto* s = app.add_subcommand("concentrate", "ridge-battery gaps |E_planted - E_null| over Haar directions");
        s->add_option("--n-grid", conc_grid, "dimensions")->delimiter(',')->capture_default_str();
        s->add_option("--d", conc_d, "matched moments of the hidden law")->capture_default_str();
        s->add_option("--tau", conc_tau)->capture_default_str();
        s->add_option("--reps", conc_reps, "Haar directions per n")->capture_default_str();
        s->add_option("--law", law_kind, "appendix-d, signed-appendix-d (no positivity check) or gaussian")
            ->check(CLI::IsMember({"appendix-d", "signed-appendix-d", "gaussian"}))
            ->capture_default_str();
        common(s, true);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"n_grid", detail::join(conc_grid)}, {"d", std::int64_t{conc_d}}, {"tau", conc_tau},
                                 {"reps", std::uint64_t{conc_reps}}, {"law", law_kind}};
                std::function<dist::Univariate(int)> law_for_n;
                if (law_kind == "appendix-d") {
                    law_for_n = [&](int nn) { return momentmatch::appendix_d_instance(nn, conc_d).law; };
                    for (int nn : conc_grid) momentmatch::appendix_d_instance(nn, conc_d);
                } else if (law_kind == "signed-appendix-d") {
                    law_for_n = [&](int nn) {
                        const auto sol = momentmatch::solve_correction(momentmatch::detail::appendix_d_targets(nn, conc_d));
                        return momentmatch::detail::appendix_d_law(nn, conc_d, sol.poly);
                    };
                } else {
                    law_for_n = [](int) { return dist::Univariate::standard_normal(); };
                }
                const auto rep = sqsim::concentration_experiment({conc_grid, conc_d, conc_tau, conc_reps, seed}, law_for_n,
                                                                 sqsim::standard_ridge_battery());
                report::Table t{"concentration", {}};
                for (const auto& r : rep.rows)
                    t.rows.push_back({std::int64_t{r.n}, std::int64_t{conc_d}, std::uint64_t{r.query_id}, std::uint64_t{r.replicate}, r.gap,
                                      conc_tau, r.exceeded});
                report::emit_report(t, header, out_path, report::parse_format(format), out);
            };
        });
    }

    // chi2-avg
    std::string chi_law = "delta0";
    double chi_var = 1.0;
    int chi_n = 8;
    {
        auto* s = app.add_subcommand("chi2-avg", "chi^2 of the Haar-averaged planted law against N_n");
        s->add_option("--n", chi_n)->capture_default_str();
        s->add_option("--m", m)->capture_default_str();
        s->add_option("--law", chi_law, "delta0, normal (with --var) or an instance JSON path via --in")
            ->check(CLI::IsMember({"delta0", "normal", "instance"}))
            ->capture_default_str();
        s->add_option("--var", chi_var, "variance for --law normal")->capture_default_str();
        s->add_option("--in", in_path, "instance JSON for --law instance");
        common(s, true);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"n", std::int64_t{chi_n}}, {"m", std::int64_t{m}}, {"law", chi_law}};
                dist::Univariate a;
                std::string label = chi_law;
                if (chi_law == "delta0") {
                    a = dist::Univariate::dirac(0.0);
                } else if (chi_law == "normal") {
                    header.params.push_back({"var", chi_var});
                    a = dist::Univariate::normal(0.0, chi_var);
                    label = "normal(" + report::format_double(chi_var) + ")";
                } else {
                    if (in_path.empty()) throw ContractViolation("chi2-avg: --law instance needs --in");
                    header.params.push_back({"in", in_path});
                    a = dist::read_instance(in_path);
                    label = in_path;
                }
                const auto r = dist::chi2_averaged_planted(chi_n, m, a);
                report::Table t{"chi2-avg", {}};
                t.rows.push_back({std::int64_t{chi_n}, std::int64_t{m}, label, r.one_plus_chi2, r.chi2, std::abs(r.normalization - 1.0),
                                  r.relative_change, r.finite});
                report::emit_report(t, header, out_path, report::parse_format(format), out);
            };
        });
    }

    // discrete-gauss
    std::vector<double> s_list{0.5, 0.25, 0.1}, theta_list{0.0, 0.13, 0.5};
    int k_max = 4;
    double cutoff = 10.0;
    {
        auto* s = app.add_subcommand("discrete-gauss", "moments of the discrete Gaussian G_{s,theta}");
        s->add_option("--s", s_list, "spacings")->delimiter(',')->capture_default_str();
        s->add_option("--theta", theta_list, "offsets")->delimiter(',')->capture_default_str();
        s->add_option("--k-max", k_max)->capture_default_str();
        s->add_option("--cutoff", cutoff)->capture_default_str();
        common(s, true);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"s", detail::join(s_list)}, {"theta", detail::join(theta_list)}, {"k_max", std::int64_t{k_max}},
                                 {"cutoff", cutoff}};
                if (k_max < 0) throw ContractViolation("discrete-gauss: k-max must be non-negative");
                report::Table t{"discrete-gauss", {}};
                for (double sp : s_list)
                    for (double th : theta_list)
                        for (int k = 0; k <= k_max; ++k) {
                            const dist::DiscreteGaussianSpec spec{sp, th, cutoff};
                            t.rows.push_back({sp, th, std::int64_t{k}, dist::discrete_gaussian_moment(spec, k, false),
                                              dist::discrete_gaussian_moment(spec, k, true), hermite::gaussian_moment(k),
                                              dist::discrete_gaussian_deviation(spec, k).value()});
                        }
                report::emit_report(t, header, out_path, report::parse_format(format), out);
            };
        });
    }

    // game
    std::string policy_kind = "appendix-d", truth = "H1";
    std::size_t max_queries = 1;
    {
        auto* s = app.add_subcommand("game", "run a scripted policy in the hypothesis-testing game and write the transcript");
        s->add_option("--policy", policy_kind, "appendix-d or constant")->check(CLI::IsMember({"appendix-d", "constant"}))->capture_default_str();
        s->add_option("--n", n)->capture_default_str();
        s->add_option("--d", d)->capture_default_str();
        s->add_option("--truth", truth, "H0 or H1")->check(CLI::IsMember({"H0", "H1"}))->capture_default_str();
        s->add_option("--max-queries", max_queries)->capture_default_str();
        oracle_options(s);
        common(s, false);
        s->callback([&] {
            action = [&] {
                header.seed = seed;
                header.params = {{"policy", policy_kind}, {"n", std::int64_t{n}}, {"d", std::int64_t{d}}, {"truth", truth},
                                 {"max_queries", std::uint64_t{max_queries}}};
                resolve_oracle_defaults();
                const auto law = momentmatch::appendix_d_instance(n, d).law;
                const sqsim::GameInstance inst{
                    dist::Planted(subspace::OrthonormalFrame::from_direction(detail::haar_direction(n, derive_seed(seed, 0), 0)), law),
                    detail::parse_hypothesis(truth)};
                sqsim::Policy policy;
                if (policy_kind == "appendix-d") {
                    policy = sqsim::appendix_d_policy(n, d, clip);
                } else {
                    const int dim = n;
                    policy = [dim](const sqsim::Transcript& t) -> sqsim::PolicyStep {
                        if (t.entries().empty()) {
                            Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
                            e(0) = 1.0;
                            return sqsim::Query{sqsim::RidgeQuery{e, Function1D::constant(0.5)}};
                        }
                        sqsim::Decision dec;
                        dec.verdict = sqsim::Hypothesis::H0;
                        return dec;
                    };
                }
                const auto transcript = sqsim::game_runner(policy, oracle_config(derive_seed(seed, 1)), inst, max_queries);
                nlohmann::ordered_json body;
                body["transcript"] = nlohmann::ordered_json::parse(transcript.to_json().dump());
                body["replay_matches"] = sqsim::replay_matches(transcript, policy, inst);
                report::write_artifact(report::document_json(body, header), out_path, out);
            };
        });
    }

    std::vector<const char*> cargv;
    for (const auto& a : argv) cargv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    try {
        if (action) action();
        return kExitOk;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const BudgetError& e) {
        err << "budget: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ConfigError& e) {
        err << "configuration: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const report::IoError& e) {
        err << "i/o: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ContractViolation& e) {
        err << "usage: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
}

}  // namespace ngca::cli

#endif  // NGCA_CLI_HPP
