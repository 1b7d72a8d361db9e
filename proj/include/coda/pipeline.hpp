#pragma once

// Mine-injury workflow: load the CSV, build one of three model frames, fit the
// negative binomial regression on the training years and score both samples.

#include "coda/compdata.hpp"
#include "coda/factorization.hpp"
#include "coda/logratio.hpp"
#include "coda/nbglm.hpp"
#include "coda/validation.hpp"

#include <Eigen/Dense>
#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace coda {

inline constexpr std::size_t kParts = 10;
extern const std::array<std::string, kParts> kPartColumns;
/// Baseline first.
extern const std::array<std::string, 4> kMineTypes;

inline constexpr double kRowClosureTolerance = 1e-6;

struct MineRecord {
  int year = 0;
  std::string type_of_mine;
  double avg_emp_total = 0.0;
  std::int64_t num_injuries = 0;
  std::array<double, kParts> parts{};
  bool closure_flagged = false;
  std::size_t line = 0;
  std::vector<std::string> carried;  ///< unused columns, in Dataset::carried_columns order
};

struct Dataset {
  std::vector<std::string> carried_columns;
  std::vector<MineRecord> rows;
  std::size_t flagged_rows = 0;
};

Dataset load_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

struct Preprocessed {
  CompositionMatrix compositions;  ///< zero-replaced and closed, n x 10
  Eigen::MatrixXd replaced;        ///< zero-replaced raw parts before closing
  Eigen::MatrixXd dummies;         ///< n x 3, baseline Mill
  Counts y;
  Eigen::VectorXd exposure;
  std::vector<int> year;
};

Preprocessed preprocess(const Dataset& data, double delta = 1e-6);

enum class ModelKind { NB, NBPCA, NBEPCA };
std::string to_string(ModelKind m);
ModelKind parse_model(const std::string& s);

struct RunConfig {
  std::filesystem::path data;
  ModelKind model = ModelKind::NB;
  int components = 5;
  double delta = 1e-6;
  std::vector<int> train_years{2013, 2014, 2015};
  std::vector<int> test_years{2016};
  std::filesystem::path out_dir = "out";
  bool reclose = false;
  bool standardize_scores = false;
  int max_count = kDefaultMaxCount;
  int epca_max_iters = 500;
  double epca_rel_tol = 1e-6;
  /// Flip the sign of these contrast-matrix rows before use.
  std::vector<int> flip_basis_rows;
};

/// Applies "key = value" pairs; keys are the long CLI flag names without dashes.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);
/// Reads a key-value file: one "key = value" per line, '#' starts a comment.
void apply_config_file(RunConfig& cfg, std::istream& in);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
std::vector<int> parse_years(const std::string& s);

struct ModelFrame {
  DesignMatrix design;
  Counts y;
  Eigen::VectorXd exposure;
  std::vector<int> year;
  std::vector<std::string> provenance;  ///< one entry per design column
};

/// Model-specific artifacts produced while building a frame.
struct FrameArtifacts {
  std::shared_ptr<const ContrastMatrix> basis;
  std::optional<FactorizationResult> factorization;
};

/// The factorization, when any, runs on every row before the split.
ModelFrame build_frame(const Preprocessed& pre, const RunConfig& cfg, FrameArtifacts* artifacts = nullptr);

struct SplitFrames {
  ModelFrame train;
  ModelFrame test;
};

SplitFrames split_by_year(const ModelFrame& frame, const std::vector<int>& train_years = {2013, 2014, 2015},
                          const std::vector<int>& test_years = {2016});

struct Timing {
  double preprocess = 0.0;
  double factorization = 0.0;
  double fit = 0.0;
  double evaluate = 0.0;
};

struct RunReport {
  ModelKind model = ModelKind::NB;
  RunConfig config;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  NegBinFit fit;
  WaldTable coefficients;
  ChiSquareReport in_sample;
  ChiSquareReport out_of_sample;
  std::vector<std::string> provenance;
  std::optional<FactorizationResult> factorization;
  Eigen::VectorXd variance_explained;  ///< NBPCA only, all d-1 components
  /// NB only: clr_inv(R^T beta) of the ilr coefficients.
  std::optional<Composition> coefficient_composition;
  Timing timing;

  bool converged() const;
};

RunReport run_model(const Preprocessed& pre, const RunConfig& cfg);

std::string report_json(const RunReport& r);
std::string timing_json(const RunReport& r);
/// Writes report.json, timing.json, coefficients.csv, chisq_scatter_{in,out}.csv and,
/// when applicable, pca_variance.csv and loss_trace.csv. Throws IoError.
void emit_report(const RunReport& r, const std::filesystem::path& dir);

/// "j,proportion,cumulative" rows.
void write_pca_variance_csv(const Eigen::VectorXd& proportions, std::ostream& out);

}  // namespace coda
