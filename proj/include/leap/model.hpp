#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leap {

enum class ModelKind { poisson, normal_linear };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Gamma(shape, rate) prior on a Poisson rate.
struct PoissonGammaPrior {
  double shape = 0.1;
  double rate = 0.1;

  double mean() const { return shape / rate; }
};

/// Normal-gamma prior for the linear model:
///   beta | tau ~ N(mean, (tau * precision)^-1),  tau ~ Gamma(delta / 2, xi / 2).
/// A zero precision matrix is the flat-beta limit and is only admissible for
/// the first component.
struct NormalGammaPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;
  double delta = 0.02;
  double xi = 0.02;

  int dim() const { return static_cast<int>(mean.size()); }
  bool is_proper() const;

  static NormalGammaPrior vague(int p, double precision_scale = 1e-2,
                                double delta = 0.02, double xi = 0.02);
};

/// Current data: outcome, optional 0/1 treatment indicator and covariates.
class Dataset {
 public:
  Dataset() = default;

  /// Validates shapes, the 0/1 treatment coding and (when covariates are
  /// present) numerical full column rank of [X, z].
  static Dataset make(Eigen::VectorXd y, Eigen::MatrixXd X = {},
                      std::optional<Eigen::VectorXd> z = std::nullopt,
                      bool check_rank = true);

  /// Poisson counts; every entry must be a nonnegative integer.
  static Dataset counts(const std::vector<double>& y);

  int n() const { return static_cast<int>(y_.size()); }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::MatrixXd& X() const { return X_; }
  const std::optional<Eigen::VectorXd>& z() const { return z_; }

  /// Regression design for the shared parameter: X with z appended as the last
  /// column when a treatment indicator is present.
  Eigen::MatrixXd design() const;
  int design_cols() const;

 private:
  Eigen::VectorXd y_;
  Eigen::MatrixXd X_;
  std::optional<Eigen::VectorXd> z_;
};

/// Historical controls. Covariate columns follow the current data's X layout.
class HistoricalDataset {
 public:
  HistoricalDataset() = default;

  static HistoricalDataset make(Eigen::VectorXd y0, Eigen::MatrixXd X0 = {});
  static HistoricalDataset counts(const std::vector<double>& y0);

  int n0() const { return static_cast<int>(y0_.size()); }
  const Eigen::VectorXd& y() const { return y0_; }
  const Eigen::MatrixXd& X() const { return X0_; }

  /// Historical design aligned with Dataset::design(): a zero treatment column
  /// is appended when the current data carry one.
  Eigen::MatrixXd design_like(const Dataset* current) const;

 private:
  Eigen::VectorXd y0_;
  Eigen::MatrixXd X0_;
};

bool is_nonnegative_integer(double v);

/// Numerical rank test: smallest / largest singular value >= tol.
bool has_full_column_rank(const Eigen::MatrixXd& X, double tol = 1e-8);

struct LeapConfig {
  ModelKind model = ModelKind::poisson;
  int K = 2;
  std::vector<double> alpha;  // Dirichlet / PTD concentration
  double trunc_a = 0.0;
  double trunc_b = 1.0;
  std::vector<PoissonGammaPrior> poisson;  // one per component (Poisson)
  std::vector<NormalGammaPrior> linear;    // one per component (linear)

  bool truncated() const { return trunc_a > 0.0 || trunc_b < 1.0; }
};

/// Latent class labels c0 with entries in {1..K}.
class PartitionAssignment {
 public:
  PartitionAssignment() = default;
  explicit PartitionAssignment(std::vector<int> labels)
      : labels_(std::move(labels)) {}

  int size() const { return static_cast<int>(labels_.size()); }
  int operator[](int i) const { return labels_[static_cast<std::size_t>(i)]; }
  int& operator[](int i) { return labels_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& labels() const { return labels_; }

  /// Comma separated labels, e.g. "1,1,2".
  std::string str() const;

  friend bool operator==(const PartitionAssignment&,
                         const PartitionAssignment&) = default;

 private:
  std::vector<int> labels_;
};

/// Class sizes n0k. Throws on a label outside {1..K}.
std::vector<int> class_counts(const PartitionAssignment& c0, int K);

struct Violation {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<Violation> advisories;

  bool ok() const { return violations.empty(); }
};

/// Checks the propriety conditions and basic shape constraints. Never throws
/// for a bad configuration; problems are reported as violations.
ValidationReport validate_config(const LeapConfig& cfg, const Dataset* data,
                                 const HistoricalDataset& hist);

/// Throws a validation Error listing every violation when the report is not ok.
void require_valid(const LeapConfig& cfg, const Dataset* data,
                   const HistoricalDataset& hist);

struct ChainMeta {
  std::uint64_t seed = 0;
  int chains = 1;
  int burn_in = 0;
  int thin = 1;
  bool no_retained_draws = false;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> diagnostics;
};

/// Ordered posterior draws with named numeric columns. LEAP runs also carry
/// the latent partitions when requested.
class DrawsMatrix {
 public:
  DrawsMatrix() = default;
  explicit DrawsMatrix(std::vector<std::string> columns)
      : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  int cols() const { return static_cast<int>(columns_.size()); }
  int rows() const { return static_cast<int>(chain_.size()); }
  bool empty() const { return chain_.empty(); }

  void add_row(const std::vector<double>& values, int chain = 0);
  void add_partition(PartitionAssignment c0) {
    partitions_.push_back(std::move(c0));
  }
  /// Appends all rows of `other`, which must have the same columns.
  void append(const DrawsMatrix& other);

  double at(int row, int col) const {
    return values_[static_cast<std::size_t>(row) * columns_.size() +
                   static_cast<std::size_t>(col)];
  }
  std::vector<double> row(int r) const;
  int chain_of(int row) const { return chain_[static_cast<std::size_t>(row)]; }

  std::optional<int> find(std::string_view name) const;
  int index_of(std::string_view name) const;  // throws when absent
  std::vector<double> column(std::string_view name) const;
  std::vector<double> column(int col) const;

  const std::vector<PartitionAssignment>& partitions() const {
    return partitions_;
  }

  ChainMeta meta;

 private:
  std::vector<std::string> columns_;
  std::vector<double> values_;
  std::vector<int> chain_;
  std::vector<PartitionAssignment> partitions_;
};

/// Checks that every gamma row sums to one within 1e-12 and respects the
/// truncation (a, b) on gamma[1]. Throws a numerical Error otherwise.
void check_gamma_rows(const DrawsMatrix& draws, int K, double a, double b);

/// pmf of the sample size contribution n01 over {0..n0}.
struct SscPmf {
  std::vector<double> probs;

  int n0() const { return static_cast<int>(probs.size()) - 1; }
  double mean() const;
  double total() const;
};

std::string indexed_name(std::string_view base, int k);
std::string indexed_name(std::string_view base, int k, int j);

}  // namespace leap
