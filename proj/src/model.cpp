#include "leap/model.hpp"

#include "leap/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace leap {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::poisson ? "poisson" : "normal_linear";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "poisson") return ModelKind::poisson;
  if (name == "normal_linear" || name == "linear") return ModelKind::normal_linear;
  throw validation_error("unknown model kind '" + std::string(name) +
                         "' (expected poisson or normal_linear)");
}

bool NormalGammaPrior::is_proper() const {
  if (!(delta > 0.0) || !(xi > 0.0)) return false;
  if (precision.rows() != mean.size() || precision.cols() != mean.size())
    return false;
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) return false;
  return llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0;
}

NormalGammaPrior NormalGammaPrior::vague(int p, double precision_scale,
                                         double delta, double xi) {
  NormalGammaPrior prior;
  prior.mean = Eigen::VectorXd::Zero(p);
  prior.precision = precision_scale * Eigen::MatrixXd::Identity(p, p);
  prior.delta = delta;
  prior.xi = xi;
  return prior;
}

bool is_nonnegative_integer(double v) {
  return std::isfinite(v) && v >= 0.0 && std::floor(v) == v;
}

bool has_full_column_rank(const Eigen::MatrixXd& X, double tol) {
  if (X.cols() == 0) return true;
  if (X.rows() < X.cols()) return false;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0)) return false;
  return s(s.size() - 1) / s(0) >= tol;
}

Dataset Dataset::make(Eigen::VectorXd y, Eigen::MatrixXd X,
                      std::optional<Eigen::VectorXd> z, bool check_rank) {
  if (y.size() < 1) throw validation_error("current data: n >= 1 required");
  if (!y.allFinite()) throw validation_error("current data: non-finite outcome");
  if (X.cols() > 0 && X.rows() != y.size())
    throw validation_error("current data: design has " +
                           std::to_string(X.rows()) + " rows, expected " +
                           std::to_string(y.size()));
  if (z) {
    if (z->size() != y.size())
      throw validation_error("current data: treatment vector length mismatch");
    for (Eigen::Index i = 0; i < z->size(); ++i) {
      const double v = (*z)(i);
      if (v != 0.0 && v != 1.0)
        throw validation_error("current data: z must be 0/1 (row " +
                               std::to_string(i + 1) + ")");
    }
  }
  Dataset d;
  d.y_ = std::move(y);
  d.X_ = std::move(X);
  d.z_ = std::move(z);
  if (check_rank && d.design_cols() > 0 && !has_full_column_rank(d.design()))
    throw validation_error(
        "current data: design matrix is not of full column rank "
        "(relative singular value threshold 1e-8)");
  return d;
}

Dataset Dataset::counts(const std::vector<double>& y) {
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!is_nonnegative_integer(y[i]))
      throw validation_error("current data: Poisson outcome at row " +
                             std::to_string(i + 1) +
                             " is not a nonnegative integer");
  return make(Eigen::Map<const Eigen::VectorXd>(y.data(),
                                                static_cast<Eigen::Index>(y.size())));
}

Eigen::MatrixXd Dataset::design() const {
  if (!z_) return X_;
  Eigen::MatrixXd D(y_.size(), X_.cols() + 1);
  if (X_.cols() > 0) D.leftCols(X_.cols()) = X_;
  D.col(X_.cols()) = *z_;
  return D;
}

int Dataset::design_cols() const {
  return static_cast<int>(X_.cols()) + (z_ ? 1 : 0);
}

HistoricalDataset HistoricalDataset::make(Eigen::VectorXd y0, Eigen::MatrixXd X0) {
  if (y0.size() < 1) throw validation_error("historical data: n0 >= 1 required");
  if (!y0.allFinite())
    throw validation_error("historical data: non-finite outcome");
  if (X0.cols() > 0 && X0.rows() != y0.size())
    throw validation_error("historical data: design has " +
                           std::to_string(X0.rows()) + " rows, expected " +
                           std::to_string(y0.size()));
  HistoricalDataset h;
  h.y0_ = std::move(y0);
  h.X0_ = std::move(X0);
  return h;
}

HistoricalDataset HistoricalDataset::counts(const std::vector<double>& y0) {
  for (std::size_t i = 0; i < y0.size(); ++i)
    if (!is_nonnegative_integer(y0[i]))
      throw validation_error("historical data: Poisson outcome at row " +
                             std::to_string(i + 1) +
                             " is not a nonnegative integer");
  return make(Eigen::Map<const Eigen::VectorXd>(
      y0.data(), static_cast<Eigen::Index>(y0.size())));
}

Eigen::MatrixXd HistoricalDataset::design_like(const Dataset* current) const {
  if (current == nullptr || !current->z()) return X0_;
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(y0_.size(), X0_.cols() + 1);
  if (X0_.cols() > 0) D.leftCols(X0_.cols()) = X0_;
  return D;
}

std::string PartitionAssignment::str() const {
  std::string s;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(labels_[i]);
  }
  return s;
}

std::vector<int> class_counts(const PartitionAssignment& c0, int K) {
  std::vector<int> counts(static_cast<std::size_t>(K), 0);
  for (int i = 0; i < c0.size(); ++i) {
    const int label = c0[i];
    if (label < 1 || label > K)
      throw validation_error("partition label " + std::to_string(label) +
                             " at position " + std::to_string(i + 1) +
                             " outside {1.." + std::to_string(K) + "}");
    ++counts[static_cast<std::size_t>(label - 1)];
  }
  return counts;
}

namespace {

void add(std::vector<Violation>& out, std::string code, std::string message) {
  out.push_back({std::move(code), std::move(message)});
}

bool symmetric(const Eigen::MatrixXd& m, double tol) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool positive_semidefinite(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return es.eigenvalues().minCoeff() >= -1e-12 * scale;
}

}  // namespace

ValidationReport validate_config(const LeapConfig& cfg, const Dataset* data,
                                 const HistoricalDataset& hist) {
  ValidationReport report;
  auto& v = report.violations;
  const int K = cfg.K;

  if (K < 1) add(v, "components", "K must be >= 1");
  if (static_cast<int>(cfg.alpha.size()) != K)
    add(v, "alpha_length", "alpha has " + std::to_string(cfg.alpha.size()) +
                               " entries, expected K = " + std::to_string(K));
  for (std::size_t k = 0; k < cfg.alpha.size(); ++k) {
    if (!(cfg.alpha[k] > 0.0))
      add(v, "alpha_nonpositive",
          "alpha[" + std::to_string(k + 1) + "] must be > 0");
    else if (cfg.alpha[k] >= 1.0)
      add(report.advisories, "alpha_large",
          "alpha[" + std::to_string(k + 1) +
              "] >= 1; concentrations below 1 let the posterior empty "
              "superfluous components");
  }
  if (!(cfg.trunc_a >= 0.0 && cfg.trunc_b <= 1.0 && cfg.trunc_a < cfg.trunc_b))
    add(v, "empty_truncation",
        "truncation interval (" + std::to_string(cfg.trunc_a) + ", " +
            std::to_string(cfg.trunc_b) + ") is empty or outside [0, 1]");
  else if (K == 1 && cfg.trunc_b < 1.0)
    add(v, "empty_truncation",
        "K = 1 fixes gamma[1] = 1, which the truncation excludes");

  if (hist.n0() < 1) add(v, "historical_empty", "historical data: n0 >= 1 required");

  if (cfg.model == ModelKind::poisson) {
    if (static_cast<int>(cfg.poisson.size()) != K)
      add(v, "prior_count", "expected " + std::to_string(K) +
                                " Poisson-gamma component priors, got " +
                                std::to_string(cfg.poisson.size()));
    for (std::size_t k = 0; k < cfg.poisson.size(); ++k) {
      const auto& p = cfg.poisson[k];
      if (!(p.shape > 0.0) || !(p.rate > 0.0))
        add(v, k == 0 ? "component_1_invalid" : "component_improper",
            "component " + std::to_string(k + 1) +
                " prior improper: gamma shape and rate must be > 0");
    }
    for (int i = 0; i < hist.n0(); ++i)
      if (!is_nonnegative_integer(hist.y()(i))) {
        add(v, "poisson_outcome",
            "historical outcome at row " + std::to_string(i + 1) +
                " is not a nonnegative integer");
        break;
      }
    if (data)
      for (int i = 0; i < data->n(); ++i)
        if (!is_nonnegative_integer(data->y()(i))) {
          add(v, "poisson_outcome", "current outcome at row " +
                                        std::to_string(i + 1) +
                                        " is not a nonnegative integer");
          break;
        }
  } else {
    const int p = data ? data->design_cols() : static_cast<int>(hist.X().cols());
    if (p < 1) add(v, "design_empty", "linear model needs at least one design column");
    if (data && hist.X().cols() + (data->z() ? 1 : 0) != p)
      add(v, "design_mismatch",
          "historical covariate columns do not match the current design");
    if (static_cast<int>(cfg.linear.size()) != K)
      add(v, "prior_count", "expected " + std::to_string(K) +
                                " normal-gamma component priors, got " +
                                std::to_string(cfg.linear.size()));
    for (std::size_t k = 0; k < cfg.linear.size(); ++k) {
      const auto& pr = cfg.linear[k];
      const std::string label = "component " + std::to_string(k + 1);
      if (pr.dim() != p || pr.precision.rows() != p || pr.precision.cols() != p) {
        add(v, "prior_dimension", label + " prior dimension does not match p = " +
                                      std::to_string(p));
        continue;
      }
      if (!symmetric(pr.precision, 1e-10))
        add(v, "precision_asymmetric", label + " prior precision is not symmetric");
      if (!(pr.delta > 0.0) || !(pr.xi > 0.0))
        add(v, k == 0 ? "component_1_invalid" : "component_improper",
            label + " prior improper: delta and xi must be > 0");
      if (k > 0) {
        if (!pr.is_proper())
          add(v, "component_improper",
              label + " prior improper: precision must be positive definite");
      } else if (!pr.is_proper()) {
        if (!positive_semidefinite(pr.precision))
          add(v, "component_1_invalid",
              "component 1 prior precision is not positive semidefinite");
        else if (data == nullptr)
          add(v, "first_component_improper",
              "component 1 prior is improper and no current data are given");
        else if (!has_full_column_rank(data->design()))
          add(v, "first_component_improper",
              "component 1 prior is improper and the current design is rank "
              "deficient");
      }
    }
  }
  return report;
}

void require_valid(const LeapConfig& cfg, const Dataset* data,
                   const HistoricalDataset& hist) {
  const auto report = validate_config(cfg, data, hist);
  if (report.ok()) return;
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto& violation : report.violations)
    os << "\n  [" << violation.code << "] " << violation.message;
  throw validation_error(os.str());
}

void DrawsMatrix::add_row(const std::vector<double>& values, int chain) {
  if (values.size() != columns_.size())
    throw numerical_error("draw row has " + std::to_string(values.size()) +
                          " values, expected " + std::to_string(columns_.size()));
  values_.insert(values_.end(), values.begin(), values.end());
  chain_.push_back(chain);
}

void DrawsMatrix::append(const DrawsMatrix& other) {
  if (other.columns_ != columns_)
    throw numerical_error("cannot append draws with different columns");
  values_.insert(values_.end(), other.values_.begin(), other.values_.end());
  chain_.insert(chain_.end(), other.chain_.begin(), other.chain_.end());
  partitions_.insert(partitions_.end(), other.partitions_.begin(),
                     other.partitions_.end());
}

std::vector<double> DrawsMatrix::row(int r) const {
  const auto begin = values_.begin() +
                     static_cast<std::ptrdiff_t>(static_cast<std::size_t>(r) *
                                                 columns_.size());
  return {begin, begin + static_cast<std::ptrdiff_t>(columns_.size())};
}

std::optional<int> DrawsMatrix::find(std::string_view name) const {
  for (std::size_t j = 0; j < columns_.size(); ++j)
    if (columns_[j] == name) return static_cast<int>(j);
  return std::nullopt;
}

int DrawsMatrix::index_of(std::string_view name) const {
  if (auto j = find(name)) return *j;
  throw validation_error("draws have no column '" + std::string(name) + "'");
}

std::vector<double> DrawsMatrix::column(std::string_view name) const {
  return column(index_of(name));
}

std::vector<double> DrawsMatrix::column(int col) const {
  std::vector<double> out(static_cast<std::size_t>(rows()));
  for (int r = 0; r < rows(); ++r) out[static_cast<std::size_t>(r)] = at(r, col);
  return out;
}

void check_gamma_rows(const DrawsMatrix& draws, int K, double a, double b) {
  std::vector<int> idx;
  for (int k = 1; k <= K; ++k) idx.push_back(draws.index_of(indexed_name("gamma", k)));
  const bool truncated = a > 0.0 || b < 1.0;
  for (int r = 0; r < draws.rows(); ++r) {
    double s = 0.0;
    for (int j : idx) s += draws.at(r, j);
    if (std::abs(s - 1.0) > 1e-12)
      throw numerical_error("gamma row " + std::to_string(r) + " sums to " +
                            std::to_string(s));
    const double g1 = draws.at(r, idx.front());
    if (truncated && !(g1 > a && g1 < b))
      throw numerical_error("gamma[1] = " + std::to_string(g1) +
                            " outside truncation interval");
  }
}

double SscPmf::mean() const {
  double m = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) m += static_cast<double>(k) * probs[k];
  return m;
}

double SscPmf::total() const {
  double s = 0.0;
  for (double v : probs) s += v;
  return s;
}

std::string indexed_name(std::string_view base, int k) {
  return std::string(base) + "[" + std::to_string(k) + "]";
}

std::string indexed_name(std::string_view base, int k, int j) {
  return std::string(base) + "[" + std::to_string(k) + "," + std::to_string(j) +
         "]";
}

}  // namespace leap
