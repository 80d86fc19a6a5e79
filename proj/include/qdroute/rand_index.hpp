#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace qdroute::cluster {

enum class RandVariant { Adjusted, Unadjusted };

/// Pair-counting similarity of two labelings, invariant to renaming labels
/// in either argument. The adjusted variant is the Hubert-Arabie chance
/// correction; it is 1 when both labelings are identical up to renaming.
/// Throws ValidationError on length mismatch or fewer than 2 items.
double rand_index(std::span<const int> a, std::span<const int> b, RandVariant variant);

/// `predicted` relabelled so that the one-to-one matching with `truth`
/// agrees on as many items as possible. Clusters left unmatched get ids
/// above the largest truth id.
std::vector<int> align_labels(std::span<const int> truth, std::span<const int> predicted);

/// Number of items that disagree with `truth` under the best one-to-one
/// relabelling of `predicted`.
int count_misassigned(std::span<const int> truth, std::span<const int> predicted);

}  // namespace qdroute::cluster
