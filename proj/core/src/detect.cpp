#include "srdetect/detect.hpp"

#include <cmath>
#include <stdexcept>

namespace srdetect {

SrState sr_update(SrState state, double lr) {
    if (!(lr > 0.0))
        throw std::invalid_argument("sr_update: likelihood ratio must be positive");
    return {(1.0 + state.r) * lr, state.n + 1};
}

CusumState cusum_update(CusumState state, double log_lr) noexcept {
    return {std::max(0.0, state.w + log_lr), state.n + 1};
}

RunOutcome run_to_alarm(ObservationSource& stream, Procedure procedure, double threshold,
                        const GaussianModel& model, bool record_trajectory,
                        std::int64_t max_steps) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("run_to_alarm: threshold must be positive");
    if (max_steps < 1)
        throw std::invalid_argument("run_to_alarm: max_steps must be >= 1");

    const double tp = model.theta_putative;
    RunOutcome out;
    out.threshold = threshold;

    double stat = 0.0;  // R_0 = W_0 = 0
    for (std::int64_t n = 1; n <= max_steps; ++n) {
        const auto x = stream.next();
        if (!x) {
            out.reason = StopReason::StreamExhausted;
            out.steps_consumed = n - 1;
            out.last_stat = stat;
            return out;
        }
        if (procedure == Procedure::Sr) {
            stat = (1.0 + stat) * lr_step(*x, tp);
        } else {
            stat = std::max(0.0, stat + log_lr_step(*x, tp));
        }
        if (record_trajectory) out.trajectory.push_back({n, stat});
        if (stat >= threshold) {
            out.reason = StopReason::Crossed;
            out.stop_time = n;
            out.steps_consumed = n;
            out.last_stat = stat;
            return out;
        }
    }
    out.reason = StopReason::CapReached;
    out.steps_consumed = max_steps;
    out.last_stat = stat;
    return out;
}

MultiCyclicOutcome multi_cyclic_run(ObservationSource& stream, Procedure procedure,
                                    double threshold, const GaussianModel& model,
                                    std::int64_t change_point, std::int64_t max_steps) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("multi_cyclic_run: threshold must be positive");
    if (change_point < 0)
        throw std::invalid_argument("multi_cyclic_run: change_point must be >= 0");
    if (max_steps < 1)
        throw std::invalid_argument("multi_cyclic_run: max_steps must be >= 1");

    const double tp = model.theta_putative;
    MultiCyclicOutcome out;

    double stat = 0.0;
    for (std::int64_t n = 1; n <= max_steps; ++n) {
        const auto x = stream.next();
        if (!x) {
            out.reason = StopReason::StreamExhausted;
            out.steps_consumed = n - 1;
            return out;
        }
        if (procedure == Procedure::Sr) {
            stat = (1.0 + stat) * lr_step(*x, tp);
        } else {
            stat = std::max(0.0, stat + log_lr_step(*x, tp));
        }
        if (stat >= threshold) {
            if (n > change_point) {
                out.reason = StopReason::Crossed;
                out.delay = n - change_point;
                out.steps_consumed = n;
                return out;
            }
            ++out.false_alarms;
            stat = 0.0;  // restart from scratch
        }
    }
    out.reason = StopReason::CapReached;
    out.steps_consumed = max_steps;
    return out;
}

}  // namespace srdetect
