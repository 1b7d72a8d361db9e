// coda: command-line front end for the mine-injury models.

#include "coda/csv.hpp"
#include "coda/error.hpp"
#include "coda/logratio.hpp"
#include "coda/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>

namespace {

using namespace coda;

enum Exit { kOk = 0, kDataError = 1, kNoConvergence = 2, kIoError = 3 };

struct Overrides {
  std::string config;
  std::map<std::string, std::string> values;
  bool reclose = false;
  bool standardize = false;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key = value settings file");
  for (const char* key : {"data", "model", "components", "delta", "train-years", "test-years", "out-dir"}) {
    cmd->add_option_function<std::string>(std::string("--") + key,
                                          [&o, key](const std::string& v) { o.values[key] = v; });
  }
  cmd->add_flag("--reclose", o.reclose, "close zero-replaced rows in transform output");
  cmd->add_flag("--standardize-scores", o.standardize, "scale PCA/EPCA scores to unit variance");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg;
  if (!o.config.empty()) apply_config_file(cfg, std::filesystem::path(o.config));
  for (const auto& [k, v] : o.values) apply_setting(cfg, k, v);
  if (o.reclose) cfg.reclose = true;
  if (o.standardize) cfg.standardize_scores = true;
  if (cfg.data.empty()) throw Error(ErrorCode::InvalidArgument, "no data file given (use --data or a config file)");
  return cfg;
}

int cmd_inspect(const RunConfig& cfg) {
  const Dataset d = load_dataset(cfg.data);
  std::map<int, std::size_t> years;
  std::map<std::string, std::size_t> types;
  double y_sum = 0.0, emp_max = 0.0;
  std::array<double, kParts> part_sum{};
  for (const auto& r : d.rows) {
    ++years[r.year];
    ++types[r.type_of_mine];
    y_sum += static_cast<double>(r.num_injuries);
    emp_max = std::max(emp_max, r.avg_emp_total);
    for (std::size_t j = 0; j < kParts; ++j) part_sum[j] += r.parts[j];
  }
  const double n = static_cast<double>(d.rows.size());
  std::cout << "rows: " << d.rows.size() << "\n";
  std::cout << "rows violating closure: " << d.flagged_rows << "\n";
  std::cout << "YEAR\n";
  for (const auto& [y, c] : years) std::cout << "  " << y << ": " << c << "\n";
  std::cout << "TYPE_OF_MINE\n";
  for (const auto& [t, c] : types) std::cout << "  " << t << ": " << c << "\n";
  std::cout << std::fixed << std::setprecision(4);
  std::cout << "NUM_INJURIES mean: " << y_sum / n << "\n";
  std::cout << "AVG_EMP_TOTAL max: " << emp_max << "\n";
  for (std::size_t j = 0; j < kParts; ++j) std::cout << kPartColumns[j] << " mean: " << part_sum[j] / n << "\n";
  return kOk;
}

int cmd_transform(const RunConfig& cfg, const std::string& method, const std::string& output) {
  const Preprocessed pre = preprocess(load_dataset(cfg.data), cfg.delta);
  Eigen::MatrixXd out;
  std::vector<std::string> names;
  const Eigen::Index d = pre.compositions.d();
  if (method == "parts") {
    out = cfg.reclose ? pre.compositions.rows() : pre.replaced;
    names.assign(kPartColumns.begin(), kPartColumns.end());
  } else if (method == "clr") {
    out = transform_matrix(pre.compositions, LogratioMethod::CLR);
    for (const auto& c : kPartColumns) names.push_back("clr_" + c);
  } else if (method == "alr") {
    out = transform_matrix(pre.compositions, LogratioMethod::ALR);
    for (Eigen::Index j = 0; j + 1 < d; ++j) names.push_back("alr_" + kPartColumns[static_cast<std::size_t>(j)]);
  } else {
    const ContrastMatrix basis = contrast_matrix(d);
    out = transform_matrix(pre.compositions, LogratioMethod::ILR, &basis);
    for (Eigen::Index j = 1; j < d; ++j) names.push_back("V" + std::to_string(j));
  }

  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw Error(ErrorCode::IoError, "cannot open '" + output + "' for writing");
  }
  std::ostream& os = output.empty() ? std::cout : file;
  os << std::setprecision(17);
  os << "YEAR";
  for (const auto& nm : names) os << ',' << nm;
  os << '\n';
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    os << pre.year[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < out.cols(); ++j) os << ',' << out(i, j);
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing transform output");
  return kOk;
}

void print_coefficients(const RunReport& r) {
  std::cout << to_string(r.model) << " (train n = " << r.n_train << ", r = " << std::setprecision(6) << r.fit.r
            << ")\n";
  write_coefficients_csv(r.coefficients, std::cout);
  if (r.coefficient_composition) {
    std::cout << std::fixed << std::setprecision(4);
    for (std::size_t k = 0; k < kParts; ++k) {
      std::cout << kPartColumns[k] << "," << (*r.coefficient_composition)[static_cast<Eigen::Index>(k)] << "\n";
    }
    std::cout.unsetf(std::ios::floatfield);
  }
}

void print_chisq(const RunReport& r) {
  std::cout << std::fixed << std::setprecision(4) << to_string(r.model) << " in-sample chi-square "
            << r.in_sample.statistic << ", out-of-sample " << r.out_of_sample.statistic << "\n";
  std::cout.unsetf(std::ios::floatfield);
}

int finish(const RunReport& r, const std::filesystem::path& dir) {
  emit_report(r, dir);
  if (!r.converged()) {
    std::cerr << to_string(r.model) << ": optimizer did not converge; results written to " << dir << "\n";
    return kNoConvergence;
  }
  return kOk;
}

int cmd_run_all(const RunConfig& cfg) {
  const Preprocessed pre = preprocess(load_dataset(cfg.data), cfg.delta);
  std::vector<std::future<RunReport>> jobs;
  for (ModelKind m : {ModelKind::NB, ModelKind::NBPCA, ModelKind::NBEPCA}) {
    RunConfig c = cfg;
    c.model = m;
    jobs.push_back(std::async(std::launch::async, [&pre, c] { return run_model(pre, c); }));
  }
  int code = kOk;
  std::ostringstream summary;
  summary << "model,in_sample_chisq,out_of_sample_chisq,converged\n" << std::setprecision(10);
  for (auto& j : jobs) {
    const RunReport r = j.get();
    print_chisq(r);
    if (finish(r, cfg.out_dir / to_string(r.model)) != kOk) code = kNoConvergence;
    summary << to_string(r.model) << ',' << r.in_sample.statistic << ',' << r.out_of_sample.statistic << ','
            << (r.converged() ? "true" : "false") << '\n';
  }
  std::ofstream out(cfg.out_dir / "summary.csv");
  out << summary.str();
  if (!out) throw Error(ErrorCode::IoError, "cannot write summary.csv");
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compositional covariates in negative binomial regression of mine injuries"};
  app.require_subcommand(1);

  Overrides o_inspect, o_transform, o_fit, o_eval, o_all;
  std::string method = "ilr", output;

  auto* inspect = app.add_subcommand("inspect", "load the data file and print summary counts");
  add_run_options(inspect, o_inspect);
  auto* transform = app.add_subcommand("transform", "write logratio coordinates of the hour compositions");
  add_run_options(transform, o_transform);
  transform->add_option("--method", method, "clr, alr, ilr or parts")
      ->check(CLI::IsMember({"clr", "alr", "ilr", "parts"}));
  transform->add_option("--output", output, "CSV file (default stdout)");
  auto* fit = app.add_subcommand("fit", "fit one model and print its coefficient table");
  add_run_options(fit, o_fit);
  auto* evaluate = app.add_subcommand("evaluate", "fit one model and print its chi-square statistics");
  add_run_options(evaluate, o_eval);
  auto* run_all = app.add_subcommand("run-all", "fit and evaluate NB, NBPCA and NBEPCA");
  add_run_options(run_all, o_all);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*inspect) return cmd_inspect(resolve(o_inspect));
    if (*transform) return cmd_transform(resolve(o_transform), method, output);
    if (*run_all) return cmd_run_all(resolve(o_all));
    const bool is_fit = static_cast<bool>(*fit);
    const RunConfig cfg = resolve(is_fit ? o_fit : o_eval);
    const RunReport r = run_model(preprocess(load_dataset(cfg.data), cfg.delta), cfg);
    if (is_fit) print_coefficients(r);
    else print_chisq(r);
    return finish(r, cfg.out_dir / to_string(r.model));
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::IoError ? kIoError : kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
