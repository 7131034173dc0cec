#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "srdetect/model.hpp"

namespace srdetect {

/// Shiryaev-Roberts statistic R_n with step counter; R_0 = 0.
struct SrState {
    double r = 0.0;
    std::int64_t n = 0;
};

/// CUSUM statistic W_n with step counter; W_0 = 0.
struct CusumState {
    double w = 0.0;
    std::int64_t n = 0;
};

enum class Procedure { Sr, Cusum };

/// One SR step: r' = (1 + r) * lr. Throws std::invalid_argument if lr <= 0.
SrState sr_update(SrState state, double lr);

/// One CUSUM step: w' = max(0, w + log_lr).
CusumState cusum_update(CusumState state, double log_lr) noexcept;

/// Pull-based stream of observations. next() returns nullopt when the
/// stream is exhausted (replay sources); synthetic sources never exhaust.
class ObservationSource {
public:
    virtual ~ObservationSource() = default;
    virtual std::optional<double> next() = 0;
};

/// Replays a fixed vector of observations, then exhausts.
class ReplayStream final : public ObservationSource {
public:
    explicit ReplayStream(std::vector<double> values) : values_(std::move(values)) {}
    std::optional<double> next() override {
        if (pos_ >= values_.size()) return std::nullopt;
        return values_[pos_++];
    }

private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

struct TrajectoryPoint {
    std::int64_t n;
    double value;
};

/// Why a run ended. Anything other than Crossed is a truncated run and is
/// always reported explicitly; stop_time is only meaningful for Crossed.
enum class StopReason { Crossed, CapReached, StreamExhausted };

struct RunOutcome {
    std::int64_t stop_time = 0;    ///< first n >= 1 with statistic >= threshold
    double threshold = 0.0;
    StopReason reason = StopReason::Crossed;
    double last_stat = 0.0;        ///< statistic value at the final step taken
    std::int64_t steps_consumed = 0;
    std::vector<TrajectoryPoint> trajectory;  ///< filled when recording was requested

    bool crossed() const noexcept { return reason == StopReason::Crossed; }
};

inline constexpr std::int64_t kDefaultMaxSteps = 100'000'000;

/// Runs the chosen procedure until the statistic first reaches threshold,
/// the stream exhausts, or max_steps is consumed. The detector uses
/// model.theta_putative to form likelihood ratios; the stream's own
/// distribution is whatever the source produces.
/// Throws std::invalid_argument if threshold <= 0 or max_steps < 1.
RunOutcome run_to_alarm(ObservationSource& stream, Procedure procedure, double threshold,
                        const GaussianModel& model, bool record_trajectory = false,
                        std::int64_t max_steps = kDefaultMaxSteps);

struct MultiCyclicOutcome {
    std::int64_t delay = 0;         ///< first alarm time past the change minus change point
    std::int64_t false_alarms = 0;  ///< alarms raised at or before the change point
    StopReason reason = StopReason::Crossed;
    std::int64_t steps_consumed = 0;
};

/// Multi-cyclic repetition of the procedure: the statistic restarts from
/// scratch after every alarm raised at or before change_point; the first
/// alarm strictly past change_point is the detection. delay is its overshoot
/// past change_point (>= 1). Truncation follows the run_to_alarm contract.
MultiCyclicOutcome multi_cyclic_run(ObservationSource& stream, Procedure procedure,
                                    double threshold, const GaussianModel& model,
                                    std::int64_t change_point,
                                    std::int64_t max_steps = kDefaultMaxSteps);

}  // namespace srdetect
