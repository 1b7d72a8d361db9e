#include "coda/pipeline.hpp"

#include "coda/csv.hpp"
#include "coda/error.hpp"
#include "coda/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace coda {

const std::array<std::string, kParts> kPartColumns{
    "PCT_HRS_UNDERGROUND", "PCT_HRS_SURFACE",       "PCT_HRS_STRIP",     "PCT_HRS_AUGER",     "PCT_HRS_CULM_BANK",
    "PCT_HRS_DREDGE",      "PCT_HRS_OTHER_SURFACE", "PCT_HRS_SHOP_YARD", "PCT_HRS_MILL_PREP", "PCT_HRS_OFFICE"};

const std::array<std::string, 4> kMineTypes{"Mill", "Sand & gravel", "Surface", "Underground"};

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void parse_fail(std::size_t line, const std::string& column, const std::string& what) {
  throw Error(ErrorCode::TypeParseError, "line " + std::to_string(line) + ", column " + column + ": " + what);
}

double parse_double(const std::string& raw, std::size_t line, const std::string& column) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail(line, column, "'" + raw + "' is not a number");
  }
  return v;
}

std::int64_t parse_integer(const std::string& raw, std::size_t line, const std::string& column) {
  const double v = parse_double(raw, line, column);
  if (v != std::floor(v) || std::abs(v) > 9e15) parse_fail(line, column, "'" + raw + "' is not an integer");
  return static_cast<std::int64_t>(v);
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw Error(ErrorCode::InvalidArgument, key + ": expected a boolean, got '" + v + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
      throw Error(ErrorCode::InvalidArgument, key + ": '" + t + "' is not an integer");
    }
    out.push_back(v);
  }
  return out;
}

ModelFrame select_rows(const ModelFrame& f, const std::vector<Eigen::Index>& idx) {
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd x(m, f.design.cols());
  Counts y(m);
  Eigen::VectorXd e(m);
  std::vector<int> year(idx.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index i = idx[static_cast<std::size_t>(k)];
    x.row(k) = f.design.values().row(i);
    y[k] = f.y[i];
    e[k] = f.exposure[i];
    year[static_cast<std::size_t>(k)] = f.year[static_cast<std::size_t>(i)];
  }
  return {DesignMatrix(std::move(x), f.design.names()), std::move(y), std::move(e), std::move(year), f.provenance};
}

nlohmann::ordered_json chisq_json(const ChiSquareReport& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["max_count"] = c.m;
  j["statistic"] = c.statistic;
  j["skipped_terms"] = c.skipped_terms;
  j["observed"] = c.observed;
  j["expected"] = std::vector<double>(c.expected.data(), c.expected.data() + c.expected.size());
  return j;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << content;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

template <class Fn>
std::string render(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

Dataset load_dataset(std::istream& in) {
  const csv::Table t = csv::read(in);
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < t.header.size(); ++k) col.emplace(trim(t.header[k]), k);

  auto need = [&](const std::string& name) {
    const auto it = col.find(name);
    if (it == col.end()) throw Error(ErrorCode::MissingColumn, "required column " + name + " not found");
    return it->second;
  };
  const std::size_t c_year = need("YEAR");
  const std::size_t c_type = need("TYPE_OF_MINE");
  const std::size_t c_emp = need("AVG_EMP_TOTAL");
  const std::size_t c_inj = need("NUM_INJURIES");
  std::array<std::size_t, kParts> c_parts{};
  for (std::size_t j = 0; j < kParts; ++j) c_parts[j] = need(kPartColumns[j]);

  std::set<std::size_t> used{c_year, c_type, c_emp, c_inj};
  used.insert(c_parts.begin(), c_parts.end());
  Dataset d;
  std::vector<std::size_t> carried_idx;
  for (std::size_t k = 0; k < t.header.size(); ++k) {
    if (!used.count(k)) {
      d.carried_columns.push_back(trim(t.header[k]));
      carried_idx.push_back(k);
    }
  }

  d.rows.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& f = t.rows[r];
    const std::size_t line = t.line_numbers[r];
    MineRecord rec;
    rec.line = line;
    rec.year = static_cast<int>(parse_integer(f[c_year], line, "YEAR"));
    rec.type_of_mine = trim(f[c_type]);
    rec.avg_emp_total = parse_double(f[c_emp], line, "AVG_EMP_TOTAL");
    if (rec.avg_emp_total < 1.0) parse_fail(line, "AVG_EMP_TOTAL", "must be at least 1");
    rec.num_injuries = parse_integer(f[c_inj], line, "NUM_INJURIES");
    if (rec.num_injuries < 0) parse_fail(line, "NUM_INJURIES", "must be nonnegative");
    double sum = 0.0;
    for (std::size_t j = 0; j < kParts; ++j) {
      const double v = parse_double(f[c_parts[j]], line, kPartColumns[j]);
      if (v < 0.0 || v > 1.0) parse_fail(line, kPartColumns[j], "proportion outside [0, 1]");
      rec.parts[j] = v;
      sum += v;
    }
    if (std::abs(sum - 1.0) > kRowClosureTolerance) {
      rec.closure_flagged = true;
      if (++d.flagged_rows <= 5) {
        std::ostringstream os;
        os.precision(10);
        os << "line " << line << ": PCT_HRS_* sum to " << sum;
        log::warn(os.str());
      }
    }
    rec.carried.reserve(carried_idx.size());
    for (std::size_t k : carried_idx) rec.carried.push_back(f[k]);
    d.rows.push_back(std::move(rec));
  }
  if (d.flagged_rows > 5) {
    log::warn(std::to_string(d.flagged_rows) + " rows in total violate the 1e-6 closure tolerance");
  }
  return d;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return load_dataset(in);
}

Preprocessed preprocess(const Dataset& data, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  const auto n = static_cast<Eigen::Index>(data.rows.size());
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "dataset has no rows");
  constexpr auto d = static_cast<Eigen::Index>(kParts);

  Eigen::MatrixXd raw(n, d);
  Eigen::MatrixXd dummies = Eigen::MatrixXd::Zero(n, 3);
  Counts y(n);
  Eigen::VectorXd exposure(n);
  std::vector<int> year(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const MineRecord& r = data.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < d; ++j) raw(i, j) = r.parts[static_cast<std::size_t>(j)];
    const auto it = std::find(kMineTypes.begin(), kMineTypes.end(), r.type_of_mine);
    if (it == kMineTypes.end()) {
      throw Error(ErrorCode::UnknownCategory,
                  "line " + std::to_string(r.line) + ": TYPE_OF_MINE '" + r.type_of_mine + "' is not recognized");
    }
    const auto k = it - kMineTypes.begin();
    if (k > 0) dummies(i, k - 1) = 1.0;
    y[i] = r.num_injuries;
    exposure[i] = r.avg_emp_total;
    year[static_cast<std::size_t>(i)] = r.year;
  }

  const double min_positive = (raw.array() > 0.0).select(raw, std::numeric_limits<double>::infinity()).minCoeff();
  if (delta >= min_positive) {
    std::ostringstream os;
    os << "replacement value " << delta << " is not below the smallest positive part " << min_positive;
    log::warn(os.str());
  }
  Eigen::MatrixXd replaced = (raw.array() == 0.0).select(delta, raw);
  Eigen::MatrixXd closed = replaced.array().colwise() / replaced.rowwise().sum().array();
  return {CompositionMatrix(std::move(closed)), std::move(replaced), std::move(dummies), std::move(y),
          std::move(exposure), std::move(year)};
}

std::string to_string(ModelKind m) {
  switch (m) {
    case ModelKind::NB: return "NB";
    case ModelKind::NBPCA: return "NBPCA";
    case ModelKind::NBEPCA: return "NBEPCA";
  }
  return "?";
}

ModelKind parse_model(const std::string& s) {
  std::string u = s;
  std::transform(u.begin(), u.end(), u.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (u == "NB") return ModelKind::NB;
  if (u == "NBPCA") return ModelKind::NBPCA;
  if (u == "NBEPCA") return ModelKind::NBEPCA;
  throw Error(ErrorCode::InvalidArgument, "unknown model '" + s + "' (expected NB, NBPCA or NBEPCA)");
}

std::vector<int> parse_years(const std::string& s) { return parse_int_list("years", s); }

void apply_setting(RunConfig& cfg, const std::string& key_raw, const std::string& value_raw) {
  const std::string key = trim(key_raw);
  const std::string v = trim(value_raw);
  try {
    if (key == "data") {
      cfg.data = v;
    } else if (key == "model") {
      cfg.model = parse_model(v);
    } else if (key == "components") {
      cfg.components = std::stoi(v);
    } else if (key == "delta") {
      cfg.delta = std::stod(v);
    } else if (key == "train-years") {
      cfg.train_years = parse_int_list(key, v);
    } else if (key == "test-years") {
      cfg.test_years = parse_int_list(key, v);
    } else if (key == "out-dir") {
      cfg.out_dir = v;
    } else if (key == "reclose") {
      cfg.reclose = parse_bool(key, v);
    } else if (key == "standardize-scores") {
      cfg.standardize_scores = parse_bool(key, v);
    } else if (key == "max-count") {
      cfg.max_count = std::stoi(v);
    } else if (key == "epca-max-iters") {
      cfg.epca_max_iters = std::stoi(v);
    } else if (key == "epca-rel-tol") {
      cfg.epca_rel_tol = std::stod(v);
    } else if (key == "flip-basis-rows") {
      cfg.flip_basis_rows = parse_int_list(key, v);
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown setting '" + key + "'");
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, key + ": cannot parse '" + v + "'");
  }
}

void apply_config_file(RunConfig& cfg, std::istream& in) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument, "config line " + std::to_string(number) + ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config '" + path.string() + "'");
  apply_config_file(cfg, in);
}

ModelFrame build_frame(const Preprocessed& pre, const RunConfig& cfg, FrameArtifacts* artifacts) {
  const CompositionMatrix& X = pre.compositions;
  const Eigen::Index n = X.n();
  const Eigen::Index d = X.d();

  Eigen::MatrixXd predictors;
  std::vector<std::string> names;
  std::string source;
  if (cfg.model == ModelKind::NB) {
    Eigen::MatrixXd r = ContrastMatrix::helmert(d).entries();
    for (int k : cfg.flip_basis_rows) {
      if (k < 0 || k >= d - 1) throw Error(ErrorCode::IndexOutOfRange, "flip-basis-rows entry out of range");
      r.row(k) *= -1.0;
    }
    auto basis = std::make_shared<const ContrastMatrix>(r);
    predictors = transform_matrix(X, LogratioMethod::ILR, basis.get());
    for (Eigen::Index k = 1; k < d; ++k) names.push_back("V" + std::to_string(k));
    source = "ilr";
    if (artifacts) artifacts->basis = std::move(basis);
  } else {
    const Eigen::MatrixXd Z = transform_matrix(X, LogratioMethod::CLR).transpose();
    const auto l = static_cast<Eigen::Index>(cfg.components);
    FactorizationResult fr;
    if (cfg.model == ModelKind::NBPCA) {
      fr = pca_fit(Z, l);
      source = "pca(clr)";
    } else {
      EpcaOptions opts;
      opts.max_iters = cfg.epca_max_iters;
      opts.rel_tol = cfg.epca_rel_tol;
      fr = epca_fit(Z, l, opts);
      source = "epca(clr)";
      if (!fr.converged) log::warn("EPCA did not reach rel_tol in " + std::to_string(fr.iterations) + " iterations");
    }
    predictors = fr.scores.transpose();
    if (cfg.standardize_scores) {
      for (Eigen::Index k = 0; k < predictors.cols(); ++k) {
        const double mean = predictors.col(k).mean();
        const double sd = std::sqrt((predictors.col(k).array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd > 0.0) predictors.col(k) /= sd;
      }
    }
    for (Eigen::Index k = 1; k <= l; ++k) names.push_back("PC" + std::to_string(k));
    if (artifacts) artifacts->factorization = std::move(fr);
  }

  Eigen::MatrixXd design(n, 1 + 3 + predictors.cols());
  design.col(0).setOnes();
  design.middleCols(1, 3) = pre.dummies;
  design.rightCols(predictors.cols()) = predictors;

  std::vector<std::string> all{"(Intercept)"};
  std::vector<std::string> provenance{"intercept"};
  for (std::size_t k = 1; k < kMineTypes.size(); ++k) {
    all.push_back(kMineTypes[k]);
    provenance.push_back("TYPE_OF_MINE indicator");
  }
  for (auto& nm : names) {
    all.push_back(nm);
    provenance.push_back(source);
  }
  return {DesignMatrix(std::move(design), std::move(all)), pre.y, pre.exposure, pre.year, std::move(provenance)};
}

SplitFrames split_by_year(const ModelFrame& frame, const std::vector<int>& train_years,
                          const std::vector<int>& test_years) {
  const std::set<int> train(train_years.begin(), train_years.end());
  const std::set<int> test(test_years.begin(), test_years.end());
  for (int y : train) {
    if (test.count(y)) throw Error(ErrorCode::InvalidArgument, "year " + std::to_string(y) + " is in both splits");
  }
  std::vector<Eigen::Index> ti, si;
  for (std::size_t i = 0; i < frame.year.size(); ++i) {
    if (train.count(frame.year[i])) ti.push_back(static_cast<Eigen::Index>(i));
    else if (test.count(frame.year[i])) si.push_back(static_cast<Eigen::Index>(i));
  }
  if (ti.empty()) throw Error(ErrorCode::EmptySplit, "no rows fall in the training years");
  if (si.empty()) throw Error(ErrorCode::EmptySplit, "no rows fall in the test years");
  return {select_rows(frame, ti), select_rows(frame, si)};
}

bool RunReport::converged() const { return fit.converged && (!factorization || factorization->converged); }

RunReport run_model(const Preprocessed& pre, const RunConfig& cfg) {
  RunReport rep;
  rep.model = cfg.model;
  rep.config = cfg;

  auto t0 = Clock::now();
  FrameArtifacts art;
  const ModelFrame frame = build_frame(pre, cfg, &art);
  rep.timing.factorization = seconds_since(t0);
  rep.provenance = frame.provenance;

  t0 = Clock::now();
  const SplitFrames split = split_by_year(frame, cfg.train_years, cfg.test_years);
  rep.n_train = static_cast<std::size_t>(split.train.y.size());
  rep.n_test = static_cast<std::size_t>(split.test.y.size());
  rep.timing.preprocess = seconds_since(t0);

  t0 = Clock::now();
  rep.fit = nb_fit(split.train.design, split.train.y, split.train.exposure);
  rep.timing.fit = seconds_since(t0);
  if (!rep.fit.converged) {
    log::warn(to_string(cfg.model) + ": negative binomial fit did not converge (max |score| " +
              std::to_string(rep.fit.gradient_max_norm) + ")");
  }
  if (rep.fit.cov) {
    rep.coefficients = wald(rep.fit);
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (Eigen::Index k = 0; k < rep.fit.beta.size(); ++k) {
      rep.coefficients.rows.push_back({rep.fit.names[static_cast<std::size_t>(k)], rep.fit.beta[k], nan, nan, nan});
    }
  }

  t0 = Clock::now();
  rep.in_sample = chi_square_report(rep.fit, split.train.design, split.train.y, split.train.exposure, cfg.max_count);
  rep.out_of_sample = chi_square_report(rep.fit, split.test.design, split.test.y, split.test.exposure, cfg.max_count);
  rep.timing.evaluate = seconds_since(t0);

  if (cfg.model == ModelKind::NB) {
    rep.coefficient_composition = backtransform_ilr_coeffs(rep.fit.beta.tail(pre.compositions.d() - 1), *art.basis);
  }
  if (art.factorization) {
    if (art.factorization->method == FactorizationMethod::PCA) {
      rep.variance_explained = variance_explained(*art.factorization).head(pre.compositions.d() - 1);
    }
    rep.factorization = std::move(art.factorization);
  }
  return rep;
}

std::string report_json(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["model"] = to_string(r.model);

  const RunConfig& c = r.config;
  ordered_json cfg;
  cfg["data"] = c.data.string();
  cfg["components"] = c.components;
  cfg["delta"] = c.delta;
  cfg["train_years"] = c.train_years;
  cfg["test_years"] = c.test_years;
  cfg["reclose"] = c.reclose;
  cfg["standardize_scores"] = c.standardize_scores;
  cfg["max_count"] = c.max_count;
  cfg["epca_max_iters"] = c.epca_max_iters;
  cfg["epca_rel_tol"] = c.epca_rel_tol;
  cfg["flip_basis_rows"] = c.flip_basis_rows;
  j["config"] = cfg;

  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;

  ordered_json fit;
  fit["converged"] = r.fit.converged;
  fit["iterations"] = r.fit.iterations;
  fit["loglik"] = r.fit.loglik;
  fit["r"] = r.fit.r;
  fit["gradient_max_norm"] = r.fit.gradient_max_norm;
  j["fit"] = fit;

  ordered_json coefs = ordered_json::array();
  for (std::size_t k = 0; k < r.coefficients.rows.size(); ++k) {
    const WaldRow& w = r.coefficients.rows[k];
    ordered_json row;
    row["predictor"] = w.name;
    row["coefficient"] = w.estimate;
    row["std_error"] = w.std_error;
    row["z_value"] = w.z;
    row["p_value"] = w.p;
    row["source"] = k < r.provenance.size() ? r.provenance[k] : "";
    coefs.push_back(row);
  }
  j["coefficients"] = coefs;

  j["in_sample"] = chisq_json(r.in_sample);
  j["out_of_sample"] = chisq_json(r.out_of_sample);

  if (r.coefficient_composition) {
    ordered_json comp;
    for (std::size_t k = 0; k < kParts; ++k) comp[kPartColumns[k]] = (*r.coefficient_composition)[static_cast<Eigen::Index>(k)];
    j["coefficient_composition"] = comp;
  }
  if (r.factorization) {
    const FactorizationResult& f = *r.factorization;
    ordered_json fj;
    fj["method"] = f.method == FactorizationMethod::PCA ? "PCA" : "EPCA";
    fj["components"] = f.components();
    fj["converged"] = f.converged;
    fj["iterations"] = f.iterations;
    fj["final_loss"] = f.trace.empty() ? 0.0 : f.trace.back().loss;
    fj["clamp_count"] = f.clamp_count;
    ordered_json loadings = ordered_json::array();
    for (Eigen::Index k = 0; k < f.loadings.rows(); ++k) {
      std::vector<double> row(static_cast<std::size_t>(f.loadings.cols()));
      for (Eigen::Index c2 = 0; c2 < f.loadings.cols(); ++c2) row[static_cast<std::size_t>(c2)] = f.loadings(k, c2);
      loadings.push_back(row);
    }
    fj["loadings"] = loadings;
    if (r.variance_explained.size() > 0) {
      std::vector<double> prop(r.variance_explained.data(), r.variance_explained.data() + r.variance_explained.size());
      std::vector<double> cum(prop.size());
      std::partial_sum(prop.begin(), prop.end(), cum.begin());
      fj["variance_explained"] = prop;
      fj["cumulative_variance"] = cum;
    }
    j["factorization"] = fj;
  }
  j["converged"] = r.converged();
  return j.dump(2) + "\n";
}

std::string timing_json(const RunReport& r) {
  nlohmann::ordered_json j;
  j["model"] = to_string(r.model);
  j["factorization_seconds"] = r.timing.factorization;
  j["split_seconds"] = r.timing.preprocess;
  j["fit_seconds"] = r.timing.fit;
  j["evaluate_seconds"] = r.timing.evaluate;
  return j.dump(2) + "\n";
}

void write_pca_variance_csv(const Eigen::VectorXd& proportions, std::ostream& out) {
  const auto old = out.precision(17);
  out << "component,proportion,cumulative\n";
  double cum = 0.0;
  for (Eigen::Index k = 0; k < proportions.size(); ++k) {
    cum += proportions[k];
    out << "PC" << (k + 1) << ',' << proportions[k] << ',' << cum << '\n';
  }
  out.precision(old);
}

void emit_report(const RunReport& r, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());

  write_file(dir / "report.json", report_json(r));
  write_file(dir / "timing.json", timing_json(r));
  write_file(dir / "coefficients.csv", render([&](std::ostream& os) { write_coefficients_csv(r.coefficients, os); }));
  write_file(dir / "chisq_scatter_in.csv", render([&](std::ostream& os) { write_scatter_csv(r.in_sample, os); }));
  write_file(dir / "chisq_scatter_out.csv",
             render([&](std::ostream& os) { write_scatter_csv(r.out_of_sample, os); }));
  if (r.variance_explained.size() > 0) {
    write_file(dir / "pca_variance.csv",
               render([&](std::ostream& os) { write_pca_variance_csv(r.variance_explained, os); }));
  }
  if (r.factorization && r.factorization->method == FactorizationMethod::EPCA) {
    write_file(dir / "loss_trace.csv",
               render([&](std::ostream& os) { write_loss_trace_csv(*r.factorization, os); }));
  }
}

}  // namespace coda
