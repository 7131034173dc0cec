// srdetect: Shiryaev-Roberts / CUSUM quickest change-point detection toolkit.
//
// Subcommands: zeta, calibrate, arl, stadd, study, simulate.
// All outputs are UTF-8 CSV with LF line endings. On failure a single
// machine-readable line "error,<message>" goes to stderr and the exit code
// is nonzero.

#include <CLI11.hpp>

#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "srdetect/calibrate.hpp"
#include "srdetect/detect.hpp"
#include "srdetect/model.hpp"
#include "srdetect/montecarlo.hpp"
#include "srdetect/solver.hpp"
#include "srdetect/study.hpp"

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

srdetect::QuadratureScheme parse_scheme(const std::string& name) {
    if (name == "midpoint") return srdetect::QuadratureScheme::Midpoint;
    if (name == "gl") return srdetect::QuadratureScheme::GaussLegendreComposite;
    throw CLI::ValidationError("--scheme", "expected 'midpoint' or 'gl'");
}

struct SolverOptions {
    int nodes = 0;
    std::string scheme = "gl";

    srdetect::SolverConfig config() const {
        srdetect::SolverConfig cfg;
        cfg.n_nodes = nodes;
        cfg.scheme = parse_scheme(scheme);
        return cfg;
    }
};

void add_solver_options(CLI::App* cmd, SolverOptions& opts) {
    cmd->add_option("--nodes", opts.nodes, "Quadrature nodes (0 = automatic policy)");
    cmd->add_option("--scheme", opts.scheme, "Quadrature scheme: gl | midpoint")
        ->default_str("gl");
}

int run_zeta(double theta, std::int64_t terms) {
    const double value = srdetect::zeta(theta, terms);
    std::printf("theta_putative,terms,zeta\n");
    std::printf("%s,%lld,%s\n", num(theta).c_str(), static_cast<long long>(terms),
                num(value).c_str());
    return 0;
}

int run_calibrate(double gamma, double theta_putative, bool exact, double rel_tol,
                  const SolverOptions& opts) {
    const auto cfg = opts.config();
    if (exact) {
        const auto cal = srdetect::calibrate_exact(gamma, theta_putative, rel_tol, cfg);
        std::printf("gamma,theta_putative,threshold_asymptotic,threshold_exact,achieved_arl\n");
        std::printf("%s,%s,%s,%s,%s\n", num(gamma).c_str(), num(theta_putative).c_str(),
                    num(cal.threshold_asymptotic).c_str(), num(*cal.threshold_exact).c_str(),
                    num(cal.achieved_arl).c_str());
    } else {
        const double a = srdetect::threshold_from_zeta(gamma, theta_putative);
        const srdetect::GaussianModel model(theta_putative, theta_putative);
        const double arl = srdetect::solve_arl(
            srdetect::build_grid(model, a, cfg.n_nodes, cfg.scheme));
        std::printf("gamma,theta_putative,threshold_asymptotic,threshold_exact,achieved_arl\n");
        std::printf("%s,%s,%s,NA,%s\n", num(gamma).c_str(), num(theta_putative).c_str(),
                    num(a).c_str(), num(arl).c_str());
    }
    return 0;
}

int run_arl(double theta_putative, std::optional<double> threshold,
            std::optional<double> gamma, const SolverOptions& opts) {
    if (!threshold && !gamma)
        throw CLI::ValidationError("arl", "one of --threshold or --gamma is required");
    const double a = threshold ? *threshold
                               : srdetect::threshold_from_zeta(*gamma, theta_putative);
    const auto cfg = opts.config();
    const srdetect::GaussianModel model(theta_putative, theta_putative);
    const auto grid = srdetect::build_grid(model, a, cfg.n_nodes, cfg.scheme);
    const double arl = srdetect::solve_arl(grid);
    std::printf("theta_putative,threshold,arl,grid_size,row_defect\n");
    std::printf("%s,%s,%s,%d,%s\n", num(theta_putative).c_str(), num(a).c_str(),
                num(arl).c_str(), static_cast<int>(grid.nodes.size()),
                num(grid.row_defect_pre).c_str());
    return 0;
}

int run_stadd(double theta_putative, double theta_true, std::optional<double> gamma,
              std::optional<double> threshold, const SolverOptions& opts) {
    if (!threshold && !gamma)
        throw CLI::ValidationError("stadd", "one of --threshold or --gamma is required");
    const auto cfg = opts.config();
    const srdetect::GaussianModel model(theta_true, theta_putative);

    srdetect::PerformanceReport report;
    double a;
    if (gamma) {
        a = srdetect::threshold_from_zeta(*gamma, theta_putative);
        report = srdetect::stadd_at_threshold(model, a, cfg);
        // RE against the correctly tuned detector at the same gamma constraint
        const srdetect::GaussianModel ideal(theta_true, theta_true);
        const double a_ideal = srdetect::threshold_from_zeta(*gamma, theta_true);
        const auto ideal_report = srdetect::stadd_at_threshold(ideal, a_ideal, cfg);
        report.re = srdetect::relative_efficiency(report.stadd, ideal_report.stadd);
    } else {
        a = *threshold;
        report = srdetect::stadd_at_threshold(model, a, cfg);
    }

    std::printf("theta_putative,theta_true,gamma,threshold,arl,delay_nu0,iadd,stadd,re\n");
    std::printf("%s,%s,%s,%s,%s,%s,%s,%s,%s\n", num(theta_putative).c_str(),
                num(theta_true).c_str(),
                gamma ? num(*gamma).c_str() : "NA", num(a).c_str(), num(report.arl).c_str(),
                num(report.delay_nu0).c_str(), num(report.iadd).c_str(),
                num(report.stadd).c_str(),
                report.re ? num(*report.re).c_str() : "NA");
    return 0;
}

int run_study(const std::vector<double>& gammas, bool quick, bool exact,
              const std::string& out_dir, int workers, const SolverOptions& opts) {
    srdetect::StudyConfig config;
    if (!gammas.empty()) config.stadd_gammas = gammas;
    config.quick = quick;
    config.threshold_mode =
        exact ? srdetect::ThresholdMode::Exact : srdetect::ThresholdMode::ZetaGamma;
    config.output_dir = out_dir;
    config.worker_count = workers;
    config.solver = opts.config();
    const auto result = srdetect::run_study(config);
    for (const auto& file : result.files) std::printf("wrote,%s\n", file.string().c_str());
    return 0;
}

int run_simulate_estimate(const std::string& procedure, double theta, double theta_putative,
                          std::optional<double> threshold, std::optional<double> gamma,
                          const std::string& nu_text, std::int64_t reps, std::uint64_t seed,
                          int workers, std::int64_t cap) {
    const srdetect::Procedure proc =
        procedure == "cusum" ? srdetect::Procedure::Cusum : srdetect::Procedure::Sr;
    if (!threshold && !gamma)
        throw CLI::ValidationError("simulate", "one of --threshold or --gamma is required");
    const double a = threshold ? *threshold
                               : srdetect::threshold_from_zeta(*gamma, theta_putative);

    srdetect::McConfig config;
    config.replications = reps;
    config.seed = seed;
    config.worker_count = workers;
    config.max_steps_cap = cap;

    const srdetect::GaussianModel model(theta, theta_putative);
    const char* metric;
    srdetect::McEstimate est;
    if (nu_text == "inf") {
        metric = "arl";
        est = srdetect::estimate_arl(model, proc, a, config);
    } else {
        std::int64_t nu;
        if (nu_text == "auto") {
            if (!gamma)
                throw CLI::ValidationError("simulate", "--nu auto requires --gamma");
            nu = static_cast<std::int64_t>(10.0 * *gamma);
        } else {
            nu = std::stoll(nu_text);
        }
        config.change_point_nu = nu;
        if (nu == 0) {
            metric = "delay_nu0";
            est = srdetect::estimate_delay_nu0(model, proc, a, config);
        } else {
            metric = "stadd";
            est = srdetect::estimate_stadd(model, proc, a, config);
        }
    }
    std::printf("%s,%s,%s,%lld,%lld\n", metric, num(est.mean).c_str(),
                num(est.std_error).c_str(), static_cast<long long>(est.replications_used),
                static_cast<long long>(est.truncation_count));
    return 0;
}

int run_simulate_trajectory(double theta, double theta_putative, std::int64_t n_obs,
                            std::int64_t nu, std::optional<double> threshold,
                            std::uint64_t seed) {
    srdetect::Xoshiro256PlusPlus rng(srdetect::substream_seed(seed, 0));
    srdetect::GaussianStream source(theta, nu, rng);
    std::vector<double> xs;
    xs.reserve(n_obs);
    for (std::int64_t i = 0; i < n_obs; ++i) xs.push_back(*source.next());

    const double a = threshold ? *threshold : std::numeric_limits<double>::infinity();
    const srdetect::GaussianModel model(theta, theta_putative);
    srdetect::ReplayStream sr_stream(xs), cusum_stream(xs);
    const auto sr = srdetect::run_to_alarm(sr_stream, srdetect::Procedure::Sr, a, model,
                                           true, n_obs);
    const auto cusum = srdetect::run_to_alarm(cusum_stream, srdetect::Procedure::Cusum, a,
                                              model, true, n_obs);

    std::printf("n,x,cusum,sr\n");
    const std::size_t rows = std::max(sr.trajectory.size(), cusum.trajectory.size());
    for (std::size_t i = 0; i < rows; ++i) {
        std::printf("%zu,%s,%s,%s\n", i + 1, num(xs[i]).c_str(),
                    i < cusum.trajectory.size() ? num(cusum.trajectory[i].value).c_str() : "",
                    i < sr.trajectory.size() ? num(sr.trajectory[i].value).c_str() : "");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shiryaev-Roberts / CUSUM quickest change-point detection toolkit"};
    app.require_subcommand(1);

    // zeta
    double z_theta = 0.5;
    std::int64_t z_terms = srdetect::kZetaDefaultTerms;
    auto* zeta_cmd = app.add_subcommand("zeta", "Limiting average exponential overshoot");
    zeta_cmd->add_option("--theta", z_theta, "Putative post-change mean")->required();
    zeta_cmd->add_option("--terms", z_terms, "Series terms");

    // calibrate
    double c_gamma = 0.0, c_theta = 0.0, c_rel_tol = 1e-3;
    bool c_exact = false;
    SolverOptions c_opts;
    auto* cal_cmd = app.add_subcommand("calibrate", "Detection threshold for a target ARL");
    cal_cmd->add_option("--gamma", c_gamma, "Target ARL to false alarm")->required();
    cal_cmd->add_option("--theta-putative", c_theta, "Putative post-change mean")->required();
    cal_cmd->add_flag("--exact", c_exact, "Root-find the exact threshold");
    cal_cmd->add_option("--rel-tol", c_rel_tol, "Relative ARL tolerance for --exact");
    add_solver_options(cal_cmd, c_opts);

    // arl
    double a_theta = 0.0;
    std::optional<double> a_threshold, a_gamma;
    SolverOptions a_opts;
    auto* arl_cmd = app.add_subcommand("arl", "ARL to false alarm of the SR procedure");
    arl_cmd->add_option("--theta-putative", a_theta, "Putative post-change mean")->required();
    arl_cmd->add_option("--threshold", a_threshold, "Detection threshold");
    arl_cmd->add_option("--gamma", a_gamma, "Target ARL (threshold = zeta * gamma)");
    add_solver_options(arl_cmd, a_opts);

    // stadd
    double s_theta_putative = 0.0, s_theta_true = 0.0;
    std::optional<double> s_gamma, s_threshold;
    SolverOptions s_opts;
    auto* stadd_cmd =
        app.add_subcommand("stadd", "Stationary average detection delay of the SR procedure");
    stadd_cmd->add_option("--theta-putative", s_theta_putative, "Putative post-change mean")
        ->required();
    stadd_cmd->add_option("--theta", s_theta_true, "True post-change mean")->required();
    stadd_cmd->add_option("--gamma", s_gamma, "ARL constraint (threshold = zeta * gamma)");
    stadd_cmd->add_option("--threshold", s_threshold, "Detection threshold");
    add_solver_options(stadd_cmd, s_opts);

    // study
    std::vector<double> st_gammas;
    bool st_quick = false, st_exact = false;
    std::string st_out;
    int st_workers = 0;
    SolverOptions st_opts;
    auto* study_cmd = app.add_subcommand("study", "Reproduce the full robustness study");
    study_cmd->add_option("--gamma", st_gammas, "ARL levels for the STADD/RE grids");
    study_cmd->add_flag("--quick", st_quick, "Restrict to a 4x4 subgrid");
    study_cmd->add_flag("--exact", st_exact, "Exact-ARL thresholds instead of zeta * gamma");
    study_cmd->add_option("--out", st_out, "Output directory")->required();
    study_cmd->add_option("--workers", st_workers, "Worker threads (0 = hardware)");
    add_solver_options(study_cmd, st_opts);

    // simulate
    std::string m_procedure = "sr", m_nu = "inf";
    double m_theta = 0.0, m_theta_putative = 0.0;
    std::optional<double> m_threshold, m_gamma;
    std::int64_t m_reps = 10000, m_n_obs = 100, m_traj_nu = 50;
    std::int64_t m_cap = srdetect::kDefaultMaxSteps;
    std::uint64_t m_seed = 1;
    int m_workers = 0;
    bool m_trajectory = false;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo estimation or sample paths");
    sim_cmd->add_option("--procedure", m_procedure, "sr | cusum")
        ->check(CLI::IsMember({"sr", "cusum"}));
    sim_cmd->add_option("--theta", m_theta, "True post-change mean")->required();
    sim_cmd->add_option("--theta-putative", m_theta_putative, "Putative post-change mean")
        ->required();
    sim_cmd->add_option("--threshold", m_threshold, "Detection threshold");
    sim_cmd->add_option("--gamma", m_gamma, "ARL constraint (threshold = zeta * gamma)");
    sim_cmd->add_option("--nu", m_nu, "Change point: nonneg integer, 'inf', or 'auto' (10*gamma)");
    sim_cmd->add_option("--reps", m_reps, "Replications");
    sim_cmd->add_option("--seed", m_seed, "RNG seed");
    sim_cmd->add_option("--workers", m_workers, "Worker threads (0 = hardware)");
    sim_cmd->add_option("--cap", m_cap, "Per-replication step cap");
    sim_cmd->add_flag("--trajectory", m_trajectory, "Emit one sample path as n,x,cusum,sr");
    sim_cmd->add_option("--n-obs", m_n_obs, "Trajectory length");
    sim_cmd->add_option("--traj-nu", m_traj_nu, "Trajectory change point");

    try {
        app.parse(argc, argv);
        if (*zeta_cmd) return run_zeta(z_theta, z_terms);
        if (*cal_cmd) return run_calibrate(c_gamma, c_theta, c_exact, c_rel_tol, c_opts);
        if (*arl_cmd) return run_arl(a_theta, a_threshold, a_gamma, a_opts);
        if (*stadd_cmd)
            return run_stadd(s_theta_putative, s_theta_true, s_gamma, s_threshold, s_opts);
        if (*study_cmd)
            return run_study(st_gammas, st_quick, st_exact, st_out, st_workers, st_opts);
        if (*sim_cmd) {
            if (m_trajectory)
                return run_simulate_trajectory(m_theta, m_theta_putative, m_n_obs, m_traj_nu,
                                               m_threshold, m_seed);
            return run_simulate_estimate(m_procedure, m_theta, m_theta_putative, m_threshold,
                                         m_gamma, m_nu, m_reps, m_seed, m_workers, m_cap);
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error,%s\n", e.what());
        return 1;
    }
    return 0;
}
