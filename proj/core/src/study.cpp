#include "srdetect/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "srdetect/calibrate.hpp"

namespace srdetect {

namespace {

constexpr double kContourLevels[] = {0.05, 0.10, 0.25, 0.50};

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Dispatches tasks 0..count-1 to a pool; used for independent study cells.
template <typename Task>
void parallel_for_index(std::size_t count, int workers, Task&& task) {
    if (static_cast<std::size_t>(workers) > count) workers = static_cast<int>(count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto drain = [&] {
        for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) task(i);
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
}

std::vector<double> effective_theta_grid(const StudyConfig& config) {
    if (!config.quick) return config.theta_grid;
    // quick mode: every third grid point, keeping the extremes
    std::vector<double> sub;
    for (std::size_t i = 0; i < config.theta_grid.size(); i += 3)
        sub.push_back(config.theta_grid[i]);
    if (!sub.empty() && sub.back() != config.theta_grid.back())
        sub.push_back(config.theta_grid.back());
    return sub;
}

void validate_config(const StudyConfig& config) {
    if (config.theta_grid.empty())
        throw std::invalid_argument("study: theta grid must be nonempty");
    for (double t : config.theta_grid)
        if (t == 0.0) throw std::invalid_argument("study: theta grid values must be nonzero");
}

double row_threshold(double gamma, double theta_putative, const StudyConfig& config) {
    if (config.threshold_mode == ThresholdMode::Exact)
        return *calibrate_exact(gamma, theta_putative, 1e-3, config.solver).threshold_exact;
    return threshold_from_zeta(gamma, theta_putative);
}

std::ofstream open_csv(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);  // LF line endings everywhere
    if (!out) throw std::runtime_error("study: cannot open " + file.string());
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    return fields;
}

double parse_field(const std::string& s) {
    if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
    return std::strtod(s.c_str(), nullptr);
}

}  // namespace

std::vector<ThresholdTableRow> run_table1(const StudyConfig& config) {
    validate_config(config);
    const std::vector<double> thetas = effective_theta_grid(config);
    const std::vector<double>& gammas = config.table1_gammas;

    std::vector<ThresholdTableRow> rows(thetas.size() * gammas.size());
    parallel_for_index(rows.size(), resolve_workers(config.worker_count), [&](std::size_t idx) {
        const double tp = thetas[idx / gammas.size()];
        const double gamma = gammas[idx % gammas.size()];
        ThresholdTableRow& row = rows[idx];
        row.theta_putative = tp;
        row.gamma = gamma;
        try {
            row.zeta = zeta(tp);
            row.threshold = row.zeta * gamma;
            const GaussianModel model(tp, tp);
            KernelGrid grid =
                build_grid(model, row.threshold, config.solver.n_nodes, config.solver.scheme);
            row.arl = solve_arl(grid, config.solver.initial_state);
        } catch (const std::exception& e) {
            row.arl = std::numeric_limits<double>::quiet_NaN();
            row.note = e.what();
        }
    });
    return rows;
}

ReGrid run_stadd_grid(double gamma, const StudyConfig& config) {
    validate_config(config);
    if (!(gamma > 1.0)) throw std::invalid_argument("study: gamma must exceed 1");

    ReGrid grid;
    grid.gamma = gamma;
    grid.putative = effective_theta_grid(config);
    grid.true_means = grid.putative;
    const std::size_t n = grid.putative.size();
    grid.thresholds.assign(n, std::numeric_limits<double>::quiet_NaN());
    grid.arls.assign(n, std::numeric_limits<double>::quiet_NaN());
    grid.stadd = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    grid.re = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
    grid.notes.assign(n * n, std::string());

    // One task per putative-mean row: the pre-change factorization is shared
    // across the row's true means.
    parallel_for_index(n, resolve_workers(config.worker_count), [&](std::size_t i) {
        const double tp = grid.putative[i];
        try {
            const double threshold = row_threshold(gamma, tp, config);
            grid.thresholds[i] = threshold;
            SrPerformanceSolver solver(GaussianModel(tp, tp), threshold, config.solver);
            grid.arls[i] = solver.arl();
            for (std::size_t j = 0; j < n; ++j) {
                try {
                    grid.stadd(i, j) = solver.evaluate(grid.true_means[j]).stadd;
                } catch (const std::exception& e) {
                    grid.notes[i * n + j] = e.what();
                }
            }
        } catch (const std::exception& e) {
            for (std::size_t j = 0; j < n; ++j) grid.notes[i * n + j] = e.what();
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double ideal = grid.stadd(j, j);
            if (std::isnan(grid.stadd(i, j))) continue;
            if (std::isnan(ideal)) {
                grid.notes[i * n + j] = "ideal-case cell failed";
                continue;
            }
            grid.re(i, j) = relative_efficiency(grid.stadd(i, j), ideal);
        }
    }
    return grid;
}

void write_table1_csv(const std::vector<ThresholdTableRow>& rows,
                      const std::filesystem::path& file) {
    std::ofstream out = open_csv(file);
    out << "theta_putative,zeta,gamma,threshold,arl\n";
    for (const auto& row : rows) {
        out << format_number(row.theta_putative) << ',' << format_number(row.zeta) << ','
            << format_number(row.gamma) << ',' << format_number(row.threshold) << ','
            << format_number(row.arl);
        if (!row.note.empty()) out << ',' << row.note;
        out << '\n';
    }
}

std::vector<ThresholdTableRow> parse_table1_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("study: cannot open " + file.string());
    std::string line;
    std::getline(in, line);  // header
    std::vector<ThresholdTableRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 5) throw std::runtime_error("study: malformed table row: " + line);
        ThresholdTableRow row;
        row.theta_putative = parse_field(f[0]);
        row.zeta = parse_field(f[1]);
        row.gamma = parse_field(f[2]);
        row.threshold = parse_field(f[3]);
        row.arl = parse_field(f[4]);
        if (f.size() > 5) row.note = f[5];
        rows.push_back(row);
    }
    return rows;
}

void write_grid_csv(const ReGrid& grid, const std::filesystem::path& file) {
    std::ofstream out = open_csv(file);
    out << "theta_putative,theta_true,gamma,threshold,arl,stadd,re\n";
    const std::size_t n = grid.true_means.size();
    for (std::size_t i = 0; i < grid.putative.size(); ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out << format_number(grid.putative[i]) << ',' << format_number(grid.true_means[j])
                << ',' << format_number(grid.gamma) << ',' << format_number(grid.thresholds[i])
                << ',' << format_number(grid.arls[i]) << ',' << format_number(grid.stadd(i, j))
                << ',' << format_number(grid.re(i, j));
            const std::string& note = grid.notes[i * n + j];
            if (!note.empty()) out << ',' << note;
            out << '\n';
        }
    }
}

ReGrid parse_grid_csv(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("study: cannot open " + file.string());
    std::string line;
    std::getline(in, line);  // header

    struct Cell {
        double tp, tt, gamma, threshold, arl, stadd, re;
        std::string note;
    };
    std::vector<Cell> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() < 7) throw std::runtime_error("study: malformed grid row: " + line);
        cells.push_back({parse_field(f[0]), parse_field(f[1]), parse_field(f[2]),
                         parse_field(f[3]), parse_field(f[4]), parse_field(f[5]),
                         parse_field(f[6]), f.size() > 7 ? f[7] : std::string()});
    }
    if (cells.empty()) throw std::runtime_error("study: empty grid file " + file.string());

    ReGrid grid;
    grid.gamma = cells.front().gamma;
    for (const auto& c : cells) {
        if (grid.putative.empty() || grid.putative.back() != c.tp) grid.putative.push_back(c.tp);
        if (grid.putative.size() == 1) grid.true_means.push_back(c.tt);
    }
    const std::size_t rows = grid.putative.size(), cols = grid.true_means.size();
    if (cells.size() != rows * cols)
        throw std::runtime_error("study: grid file is not rectangular: " + file.string());
    grid.thresholds.assign(rows, 0.0);
    grid.arls.assign(rows, 0.0);
    grid.stadd.resize(rows, cols);
    grid.re.resize(rows, cols);
    grid.notes.assign(rows * cols, std::string());
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
        const std::size_t i = idx / cols, j = idx % cols;
        grid.thresholds[i] = cells[idx].threshold;
        grid.arls[i] = cells[idx].arl;
        grid.stadd(i, j) = cells[idx].stadd;
        grid.re(i, j) = cells[idx].re;
        grid.notes[idx] = cells[idx].note;
    }
    return grid;
}

std::vector<std::filesystem::path> emit_heatmap_grid(const ReGrid& grid,
                                                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ostringstream stem;
    stem << "heatmap_gamma" << format_number(grid.gamma);

    const std::filesystem::path triples = dir / (stem.str() + ".csv");
    {
        std::ofstream out = open_csv(triples);
        out << "theta_putative,theta_true,re\n";
        for (std::size_t i = 0; i < grid.putative.size(); ++i)
            for (std::size_t j = 0; j < grid.true_means.size(); ++j)
                out << format_number(grid.putative[i]) << ','
                    << format_number(grid.true_means[j]) << ',' << format_number(grid.re(i, j))
                    << '\n';
    }
    const std::filesystem::path contours = dir / (stem.str() + "_contours.csv");
    {
        std::ofstream out = open_csv(contours);
        out << "level\n";
        for (double level : kContourLevels) out << format_number(level) << '\n';
    }
    return {triples, contours};
}

StudyResult run_study(const StudyConfig& config) {
    if (config.output_dir.empty())
        throw std::invalid_argument("study: output_dir must be set");
    std::filesystem::create_directories(config.output_dir);

    StudyResult result;
    result.table1 = run_table1(config);
    const std::filesystem::path table1_file = config.output_dir / "table1.csv";
    write_table1_csv(result.table1, table1_file);
    result.files.push_back(table1_file);

    for (double gamma : config.stadd_gammas) {
        ReGrid grid = run_stadd_grid(gamma, config);
        const std::filesystem::path grid_file =
            config.output_dir / ("stadd_gamma" + format_number(gamma) + ".csv");
        write_grid_csv(grid, grid_file);
        result.files.push_back(grid_file);
        for (auto& path : emit_heatmap_grid(grid, config.output_dir))
            result.files.push_back(std::move(path));
        result.grids.push_back(std::move(grid));
    }
    return result;
}

}  // namespace srdetect
