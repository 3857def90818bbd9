#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sqlsel/dataset.hpp"
#include "sqlsel/sql_exec.hpp"

namespace sqlsel {

// An execution-consistent set: candidates whose results are mutually
// equivalent. `index` is the cluster's position in first-seen order.
struct ConsistentCluster {
  std::size_t index = 0;
  std::vector<std::size_t> member_indices;  // ascending
  std::size_t proxy_index = 0;
  OutcomePtr representative_outcome;

  std::size_t cardinality() const noexcept { return member_indices.size(); }
};

struct ClusteringOutput {
  std::vector<ConsistentCluster> clusters;
  std::vector<std::size_t> discarded;  // candidates whose execution was not ok
};

enum class ProxyPolicy { first_index, seeded_random };

// Groups candidates by result equivalence. Clusters are ordered by their
// smallest member index; each cluster's proxy is its first member.
// Throws std::invalid_argument if outcomes are not aligned with the pool.
ClusteringOutput cluster_candidates(const CandidatePool& pool, std::span<const OutcomePtr> outcomes);

// first_index: smallest member. seeded_random: uniform over members, drawn from
// a stream keyed by the cluster's members; requires a seed (ConfigError).
std::size_t select_proxy(const ConsistentCluster& cluster, ProxyPolicy policy,
                         std::optional<std::uint64_t> seed = std::nullopt);

// Reassigns every cluster's proxy under `policy`.
void assign_proxies(ClusteringOutput& out, ProxyPolicy policy,
                    std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace sqlsel
