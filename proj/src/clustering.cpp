#include "sqlsel/clustering.hpp"

#include <stdexcept>
#include <string>
#include <unordered_map>

#include "sqlsel/error.hpp"
#include "sqlsel/hashing.hpp"

namespace sqlsel {

ClusteringOutput cluster_candidates(const CandidatePool& pool, std::span<const OutcomePtr> outcomes) {
  if (outcomes.size() != pool.size()) {
    throw std::invalid_argument("clustering: " + std::to_string(outcomes.size()) +
                                " outcomes for " + std::to_string(pool.size()) + " candidates");
  }
  ClusteringOutput out;
  // fingerprint -> cluster positions sharing it (more than one only on collision)
  std::unordered_map<std::string, std::vector<std::size_t>> by_fingerprint;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const OutcomePtr& o = outcomes[i];
    if (!o) throw std::invalid_argument("clustering: missing outcome for candidate " + std::to_string(i));
    if (!o->ok()) {
      out.discarded.push_back(i);
      continue;
    }
    auto& bucket = by_fingerprint[o->result->fingerprint];
    bool placed = false;
    for (std::size_t pos : bucket) {
      auto& cluster = out.clusters[pos];
      if (results_equivalent(*cluster.representative_outcome, *o)) {
        cluster.member_indices.push_back(i);
        placed = true;
        break;
      }
    }
    if (!placed) {
      ConsistentCluster c;
      c.index = out.clusters.size();
      c.member_indices.push_back(i);
      c.proxy_index = i;
      c.representative_outcome = o;
      bucket.push_back(c.index);
      out.clusters.push_back(std::move(c));
    }
  }
  return out;
}

std::size_t select_proxy(const ConsistentCluster& cluster, ProxyPolicy policy,
                         std::optional<std::uint64_t> seed) {
  if (cluster.member_indices.empty()) throw std::invalid_argument("select_proxy: empty cluster");
  if (policy == ProxyPolicy::first_index) return cluster.member_indices.front();
  if (!seed) throw ConfigError("seeded_random proxy policy requires a seed");
  std::string key = "proxy";
  for (std::size_t m : cluster.member_indices) key += ":" + std::to_string(m);
  SplitMix64 rng(derive_seed(*seed, key));
  return cluster.member_indices[rng.below(cluster.member_indices.size())];
}

void assign_proxies(ClusteringOutput& out, ProxyPolicy policy, std::optional<std::uint64_t> seed) {
  for (auto& c : out.clusters) c.proxy_index = select_proxy(c, policy, seed);
}

}  // namespace sqlsel
