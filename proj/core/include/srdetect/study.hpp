#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "srdetect/solver.hpp"

namespace srdetect {

enum class ThresholdMode {
    ZetaGamma,  ///< A = zeta * gamma, actual ARL reported alongside
    Exact       ///< A root-found so that ARL(A) = gamma
};

struct StudyConfig {
    /// Putative/true mean grid (rows and columns of the STADD tables).
    std::vector<double> theta_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    /// ARL constraint levels for the STADD/RE grids.
    std::vector<double> stadd_gammas = {1e2, 1e3, 1e4};
    /// ARL levels for the threshold table.
    std::vector<double> table1_gammas = {1e2, 2e2, 3e2, 4e2, 5e2, 6e2,
                                         7e2, 8e2, 9e2, 1e3, 1e4};
    ThresholdMode threshold_mode = ThresholdMode::ZetaGamma;
    std::filesystem::path output_dir;
    SolverConfig solver;
    int worker_count = 0;  ///< 0 = hardware concurrency
    bool quick = false;    ///< restrict the theta grid to a 4x4 subgrid
};

struct ThresholdTableRow {
    double theta_putative = 0.0;
    double zeta = 0.0;
    double gamma = 0.0;
    double threshold = 0.0;
    double arl = 0.0;          ///< solver ARL at the threshold; NaN on error
    std::string note;          ///< error reason for NA cells
};

/// STADD and RE over a putative x true mean grid at one gamma. Each row uses
/// the threshold calibrated for its own putative mean. Entries are NaN where
/// the solver failed; the reason is kept in notes (row-major).
struct ReGrid {
    double gamma = 0.0;
    std::vector<double> putative;    ///< row labels
    std::vector<double> true_means;  ///< column labels
    std::vector<double> thresholds;  ///< per row
    std::vector<double> arls;        ///< per row
    Eigen::MatrixXd stadd;
    Eigen::MatrixXd re;
    std::vector<std::string> notes;  ///< row-major error reasons, empty when ok

    const std::string& note(std::size_t i, std::size_t j) const {
        return notes[i * true_means.size() + j];
    }
};

/// Threshold characterization table: for every (theta_putative, gamma) pair,
/// zeta, A = zeta * gamma and the solver ARL at A.
std::vector<ThresholdTableRow> run_table1(const StudyConfig& config);

/// 10x10 (or quick 4x4) grid of STADD and RE at the given gamma.
ReGrid run_stadd_grid(double gamma, const StudyConfig& config);

void write_table1_csv(const std::vector<ThresholdTableRow>& rows,
                      const std::filesystem::path& file);
std::vector<ThresholdTableRow> parse_table1_csv(const std::filesystem::path& file);

void write_grid_csv(const ReGrid& grid, const std::filesystem::path& file);
ReGrid parse_grid_csv(const std::filesystem::path& file);

/// Writes the dense (theta_putative, theta_true, re) triples next to a
/// companion file listing the iso-level contour thresholds
/// {5%, 10%, 25%, 50%}. Returns the paths written.
std::vector<std::filesystem::path> emit_heatmap_grid(const ReGrid& grid,
                                                     const std::filesystem::path& dir);

struct StudyResult {
    std::vector<ThresholdTableRow> table1;
    std::vector<ReGrid> grids;
    std::vector<std::filesystem::path> files;
};

/// Full study: threshold table, one STADD/RE grid per gamma, heat-map data.
/// All CSV files are written under config.output_dir (created if missing).
StudyResult run_study(const StudyConfig& config);

}  // namespace srdetect
