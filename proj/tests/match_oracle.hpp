#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "vkf/metrics.hpp"

namespace vkf::test {

/// Exhaustive reference for match(): enumerates every partial assignment of
/// predictions to ground truths over pairs with a finite error, keeps those
/// where no prediction and ground truth would both rather be paired with
/// each other (a pair at a smaller error than their current partners), and
/// gives each prediction the best partner it has in any such assignment.
/// Pairs above the cutoff are dissolved afterwards. Returns the set of
/// (prediction, ground truth) pairs.
inline std::set<std::pair<int, int>> brute_force_match(const std::vector<EvalPose>& preds,
                                                       const std::vector<EvalPose>& gts,
                                                       double cutoff_mm = kMatchCutoffMm) {
  const int np = static_cast<int>(preds.size());
  const int ng = static_cast<int>(gts.size());
  std::vector<std::vector<double>> err(np, std::vector<double>(ng));
  for (int p = 0; p < np; ++p) {
    for (int g = 0; g < ng; ++g) err[p][g] = mean_joint_error(preds[p], gts[g], {});
  }

  std::vector<int> partner(np, -1);
  std::vector<int> holder(ng, -1);
  std::vector<std::vector<int>> stable;
  const double inf = std::numeric_limits<double>::infinity();

  auto is_stable = [&] {
    for (int p = 0; p < np; ++p) {
      for (int g = 0; g < ng; ++g) {
        if (!std::isfinite(err[p][g]) || partner[p] == g) continue;
        const double mine = partner[p] < 0 ? inf : err[p][partner[p]];
        const double theirs = holder[g] < 0 ? inf : err[holder[g]][g];
        if (err[p][g] < mine && err[p][g] < theirs) return false;
      }
    }
    return true;
  };
  std::function<void(int)> enumerate = [&](int p) {
    if (p == np) {
      if (is_stable()) stable.push_back(partner);
      return;
    }
    enumerate(p + 1);
    for (int g = 0; g < ng; ++g) {
      if (holder[g] >= 0 || !std::isfinite(err[p][g])) continue;
      partner[p] = g;
      holder[g] = p;
      enumerate(p + 1);
      partner[p] = -1;
      holder[g] = -1;
    }
  };
  enumerate(0);

  std::set<std::pair<int, int>> out;
  for (int p = 0; p < np; ++p) {
    int best = -1;
    for (const auto& s : stable) {
      if (s[p] >= 0 && (best < 0 || err[p][s[p]] < err[p][best])) best = s[p];
    }
    if (best >= 0 && err[p][best] <= cutoff_mm) out.insert({p, best});
  }
  return out;
}

/// Random instance: up to 4 predictions and 4 ground truths over `joints`
/// joints, some joints missing, offsets spread around the match cutoff.
inline std::pair<std::vector<EvalPose>, std::vector<EvalPose>> random_match_instance(std::mt19937_64& rng,
                                                                                     int joints = 5) {
  std::uniform_int_distribution<int> count(0, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto make = [&](int n, bool pred) {
    std::vector<EvalPose> out(n);
    for (EvalPose& e : out) {
      e.score = u(rng);
      const Point3 base(1500.0 * u(rng), 1500.0 * u(rng), 0.0);
      for (int j = 0; j < joints; ++j) {
        if (u(rng) < (pred ? 0.2 : 0.1)) {
          e.joints.emplace_back(std::nullopt);
        } else {
          e.joints.emplace_back(base + Point3(100.0 * u(rng), 100.0 * u(rng), 300.0 * j));
        }
      }
    }
    return out;
  };
  auto preds = make(count(rng), true);
  auto gts = make(count(rng), false);
  return {preds, gts};
}

inline std::set<std::pair<int, int>> pair_set(const MatchResult& m) {
  std::set<std::pair<int, int>> out;
  for (const MatchPair& p : m.pairs) out.insert({p.prediction, p.ground_truth});
  return out;
}

}  // namespace vkf::test
