#include "qdroute/rand_index.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "qdroute/error.hpp"

namespace qdroute::cluster {

namespace {

std::vector<int> compact(std::span<const int> labels, int& n_distinct) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  n_distinct = next;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(ids[l]);
  return out;
}

std::int64_t pairs(std::int64_t m) { return m * (m - 1) / 2; }

}  // namespace

double rand_index(std::span<const int> a, std::span<const int> b, RandVariant variant) {
  if (a.size() != b.size()) throw ValidationError("rand_index: labelings differ in length");
  if (a.size() < 2) throw ValidationError("rand_index: need at least 2 items");
  int ka = 0;
  int kb = 0;
  const auto ca = compact(a, ka);
  const auto cb = compact(b, kb);
  std::vector<std::int64_t> table(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb), 0);
  std::vector<std::int64_t> row(static_cast<std::size_t>(ka), 0);
  std::vector<std::int64_t> col(static_cast<std::size_t>(kb), 0);
  for (std::size_t i = 0; i < ca.size(); ++i) {
    ++table[static_cast<std::size_t>(ca[i]) * static_cast<std::size_t>(kb) + static_cast<std::size_t>(cb[i])];
    ++row[static_cast<std::size_t>(ca[i])];
    ++col[static_cast<std::size_t>(cb[i])];
  }
  // Integer pair counts: both-same, same in a, same in b, all pairs.
  __int128 both = 0;
  __int128 same_a = 0;
  __int128 same_b = 0;
  for (auto v : table) both += pairs(v);
  for (auto v : row) same_a += pairs(v);
  for (auto v : col) same_b += pairs(v);
  const __int128 total = pairs(static_cast<std::int64_t>(a.size()));

  if (variant == RandVariant::Unadjusted) {
    const __int128 agree = total + 2 * both - same_a - same_b;
    return static_cast<double>(agree) / static_cast<double>(total);
  }
  // ARI = (both*N - A*B) / ((A+B)*N/2 - A*B), doubled to stay integral.
  const __int128 num = 2 * (both * total - same_a * same_b);
  const __int128 den = (same_a + same_b) * total - 2 * same_a * same_b;
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

std::vector<int> align_labels(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("align_labels: labelings differ in length");
  }
  int kt = 0;
  int kp = 0;
  const auto t = compact(truth, kt);
  const auto p = compact(predicted, kp);
  if (kp > 20) throw ValidationError("align_labels: too many predicted clusters");
  std::vector<std::vector<int>> overlap(static_cast<std::size_t>(kt),
                                        std::vector<int>(static_cast<std::size_t>(kp), 0));
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++overlap[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])];
  }
  // Max-weight matching of truth classes to predicted clusters by DP over
  // subsets of predicted clusters already used. choice[r][mask] is the
  // cluster given to class r-1 on the way to mask, or -1.
  const std::size_t states = std::size_t{1} << kp;
  std::vector<std::vector<int>> best(static_cast<std::size_t>(kt) + 1, std::vector<int>(states, -1));
  std::vector<std::vector<int>> choice(static_cast<std::size_t>(kt) + 1, std::vector<int>(states, -1));
  best[0][0] = 0;
  for (std::size_t r = 0; r < static_cast<std::size_t>(kt); ++r) {
    for (std::size_t mask = 0; mask < states; ++mask) {
      if (best[r][mask] < 0) continue;
      if (best[r][mask] > best[r + 1][mask]) {
        best[r + 1][mask] = best[r][mask];
        choice[r + 1][mask] = -1;
      }
      for (int c = 0; c < kp; ++c) {
        if (mask & (std::size_t{1} << c)) continue;
        const auto m2 = mask | (std::size_t{1} << c);
        const int v = best[r][mask] + overlap[r][static_cast<std::size_t>(c)];
        if (v > best[r + 1][m2]) {
          best[r + 1][m2] = v;
          choice[r + 1][m2] = c;
        }
      }
    }
  }
  const auto& last = best[static_cast<std::size_t>(kt)];
  auto mask = static_cast<std::size_t>(std::max_element(last.begin(), last.end()) - last.begin());

  std::vector<int> truth_ids(static_cast<std::size_t>(kt));
  for (std::size_t i = 0; i < t.size(); ++i) truth_ids[static_cast<std::size_t>(t[i])] = truth[i];
  int spare = truth.empty() ? 0 : *std::max_element(truth.begin(), truth.end()) + 1;

  std::vector<int> target(static_cast<std::size_t>(kp), std::numeric_limits<int>::min());
  for (std::size_t r = static_cast<std::size_t>(kt); r > 0; --r) {
    const int c = choice[r][mask];
    if (c < 0) continue;
    target[static_cast<std::size_t>(c)] = truth_ids[r - 1];
    mask &= ~(std::size_t{1} << c);
  }
  for (auto& v : target) {
    if (v == std::numeric_limits<int>::min()) v = spare++;
  }
  std::vector<int> out;
  out.reserve(p.size());
  for (int c : p) out.push_back(target[static_cast<std::size_t>(c)]);
  return out;
}

int count_misassigned(std::span<const int> truth, std::span<const int> predicted) {
  const auto aligned = align_labels(truth, predicted);
  int wrong = 0;
  for (std::size_t i = 0; i < aligned.size(); ++i) wrong += aligned[i] != truth[i] ? 1 : 0;
  return wrong;
}

}  // namespace qdroute::cluster
