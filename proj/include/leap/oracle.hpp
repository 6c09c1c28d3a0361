#pragma once

#include "leap/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace leap {

inline constexpr std::uint64_t kDefaultPartitionCap = std::uint64_t{1} << 20;
inline constexpr std::size_t kDefaultMaterializeRows = 100000;

/// K^n0, or an error naming the cap when it exceeds `cap`.
std::uint64_t partition_count(int K, int n0, std::uint64_t cap = kDefaultPartitionCap);

/// The index-th partition in lexicographic order (first subject most significant).
PartitionAssignment partition_at(std::uint64_t index, int K, int n0);

std::vector<PartitionAssignment> enumerate_partitions(
    int K, int n0, std::uint64_t cap = kDefaultPartitionCap);

struct PartitionRow {
  PartitionAssignment c0;
  double prior_prob = 0.0;
  double posterior_prob = 0.0;
  /// Conditional mean of the shared parameter: (theta1) for Poisson,
  /// (beta1..., tau1) for the linear model.
  Eigen::VectorXd cond_prior_mean;
  Eigen::VectorXd cond_post_mean;
};

struct PartitionTable {
  std::vector<PartitionRow> rows;
  bool has_posterior = false;
  bool has_prior = true;
  int n0 = 0;
  int K = 0;
};

enum class Which { prior, posterior };

/// Prior partition table; `layout` only fixes the design columns (treatment
/// column) for the linear model.
PartitionTable prior_partition_table(const HistoricalDataset& hist, const LeapConfig& cfg,
                                     const Dataset* layout = nullptr,
                                     std::uint64_t cap = kDefaultPartitionCap,
                                     std::size_t max_rows = kDefaultMaterializeRows);

PartitionTable posterior_partition_table(const Dataset& data, const HistoricalDataset& hist,
                                         const LeapConfig& cfg,
                                         std::uint64_t cap = kDefaultPartitionCap,
                                         std::size_t max_rows = kDefaultMaterializeRows);

Eigen::VectorXd partition_averaged_mean(const PartitionTable& table, Which which);
SscPmf ssc_marginal_from_table(const PartitionTable& table, Which which);

/// Streaming enumeration without materializing rows. The index range is cut
/// into fixed blocks whose log-sum-exp partials are merged in block order, so
/// the result is bit-identical for any worker count.
struct PartitionSummary {
  std::uint64_t partitions = 0;
  bool has_posterior = false;
  bool has_prior = true;
  double log_norm_prior = 0.0;
  double log_norm_posterior = 0.0;
  Eigen::VectorXd prior_mean;
  Eigen::VectorXd posterior_mean;
  SscPmf prior_ssc;
  SscPmf posterior_ssc;
};

PartitionSummary partition_summary(const Dataset* data, const HistoricalDataset& hist,
                                   const LeapConfig& cfg, int workers = 1,
                                   std::uint64_t cap = kDefaultPartitionCap);

}  // namespace leap
