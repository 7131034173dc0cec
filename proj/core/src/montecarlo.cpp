#include "srdetect/montecarlo.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace srdetect {

namespace {

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void check_config(const McConfig& config) {
    if (config.replications < 1)
        throw std::invalid_argument("montecarlo: replications must be >= 1");
    if (config.max_steps_cap < 1)
        throw std::invalid_argument("montecarlo: max_steps_cap must be >= 1");
}

/// Runs one replication per index; results land in index order, so the
/// final reduction is independent of the worker partition.
template <typename PerReplication>
void run_replications(const McConfig& config, std::vector<double>& values,
                      std::vector<char>& truncated, PerReplication&& body) {
    const auto reps = static_cast<std::size_t>(config.replications);
    values.assign(reps, 0.0);
    truncated.assign(reps, 0);

    const int workers = resolve_workers(config.worker_count);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
            Xoshiro256PlusPlus rng(substream_seed(config.seed, rep));
            body(rep, rng, values[rep], truncated[rep]);
        }
    };

    if (workers == 1 || reps < 2) {
        run_range(0, reps);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (reps + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        if (begin >= reps) break;
        pool.emplace_back(run_range, begin, std::min(begin + chunk, reps));
    }
    for (auto& t : pool) t.join();
}

/// Kahan-compensated reduction in replication order: bit-identical for any
/// worker count.
McEstimate reduce(const std::vector<double>& values, const std::vector<char>& truncated) {
    McEstimate est;
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (truncated[i]) {
            ++est.truncation_count;
            continue;
        }
        ++est.replications_used;
        const double y = values[i] - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if (est.replications_used > 0) est.mean = sum / static_cast<double>(est.replications_used);

    double sq = 0.0, sq_comp = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (truncated[i]) continue;
        const double d = values[i] - est.mean;
        const double y = d * d - sq_comp;
        const double t = sq + y;
        sq_comp = (t - sq) - y;
        sq = t;
    }
    if (est.replications_used > 1) {
        const auto n = static_cast<double>(est.replications_used);
        est.std_error = std::sqrt(sq / (n - 1.0) / n);
    }
    const auto total = static_cast<double>(values.size());
    est.unreliable = static_cast<double>(est.truncation_count) > 0.01 * total;
    return est;
}

McEstimate estimate_stop_time(const GaussianModel& model, Procedure procedure,
                              double threshold, const McConfig& config,
                              std::optional<std::int64_t> nu) {
    check_config(config);
    std::vector<double> values;
    std::vector<char> truncated;
    run_replications(config, values, truncated,
                     [&](std::size_t, Xoshiro256PlusPlus& rng, double& value, char& trunc) {
                         GaussianStream stream(model.theta_true, nu, rng);
                         const RunOutcome run = run_to_alarm(stream, procedure, threshold,
                                                             model, false,
                                                             config.max_steps_cap);
                         if (run.crossed())
                             value = static_cast<double>(run.stop_time);
                         else
                             trunc = 1;
                     });
    return reduce(values, truncated);
}

}  // namespace

McEstimate estimate_arl(const GaussianModel& model, Procedure procedure, double threshold,
                        const McConfig& config) {
    if (config.change_point_nu)
        throw std::invalid_argument("estimate_arl: config must have no change point");
    return estimate_stop_time(model, procedure, threshold, config, std::nullopt);
}

McEstimate estimate_delay_nu0(const GaussianModel& model, Procedure procedure,
                              double threshold, const McConfig& config) {
    if (!config.change_point_nu || *config.change_point_nu != 0)
        throw std::invalid_argument("estimate_delay_nu0: config.change_point_nu must be 0");
    return estimate_stop_time(model, procedure, threshold, config, 0);
}

McEstimate estimate_stadd(const GaussianModel& model, Procedure procedure, double threshold,
                          const McConfig& config) {
    if (!config.change_point_nu || *config.change_point_nu < 1)
        throw std::invalid_argument(
            "estimate_stadd: config.change_point_nu must be finite and >= 1");
    check_config(config);
    const std::int64_t nu = *config.change_point_nu;

    std::vector<double> values;
    std::vector<char> truncated;
    run_replications(config, values, truncated,
                     [&](std::size_t, Xoshiro256PlusPlus& rng, double& value, char& trunc) {
                         GaussianStream stream(model.theta_true, nu, rng);
                         const MultiCyclicOutcome run = multi_cyclic_run(
                             stream, procedure, threshold, model, nu, config.max_steps_cap);
                         if (run.reason == StopReason::Crossed)
                             value = static_cast<double>(run.delay);
                         else
                             trunc = 1;
                     });
    return reduce(values, truncated);
}

std::vector<McEstimate> martingale_diagnostic(const GaussianModel& model,
                                              const std::vector<std::int64_t>& checkpoints,
                                              const McConfig& config) {
    check_config(config);
    for (auto n : checkpoints)
        if (n < 0) throw std::invalid_argument("martingale_diagnostic: checkpoints must be >= 0");
    for (std::size_t c = 1; c < checkpoints.size(); ++c)
        if (checkpoints[c] < checkpoints[c - 1])
            throw std::invalid_argument("martingale_diagnostic: checkpoints must be sorted");

    const auto reps = static_cast<std::size_t>(config.replications);
    const std::size_t k = checkpoints.size();
    std::vector<double> samples(reps * k, 0.0);

    const int workers = resolve_workers(config.worker_count);
    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t rep = begin; rep < end; ++rep) {
            Xoshiro256PlusPlus rng(substream_seed(config.seed, rep));
            const double tp = model.theta_putative;
            double r = 0.0;
            std::int64_t n = 0;
            for (std::size_t c = 0; c < k; ++c) {
                while (n < checkpoints[c]) {
                    r = (1.0 + r) * lr_step(rng.standard_normal(), tp);
                    ++n;
                }
                samples[rep * k + c] = r - static_cast<double>(n);
            }
        }
    };

    if (workers == 1 || reps < 2) {
        run_range(0, reps);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (reps + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = w * chunk;
            if (begin >= reps) break;
            pool.emplace_back(run_range, begin, std::min(begin + chunk, reps));
        }
        for (auto& t : pool) t.join();
    }

    std::vector<McEstimate> out(k);
    std::vector<double> column(reps);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t rep = 0; rep < reps; ++rep) column[rep] = samples[rep * k + c];
        out[c] = reduce(column, std::vector<char>(reps, 0));
    }
    return out;
}

}  // namespace srdetect
