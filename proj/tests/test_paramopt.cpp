// Tests for the parameter search: TPE suggestion behavior, the three
// strategies' budget/determinism contracts, and best-trial selection.

#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "ndar/paramopt.hpp"

using namespace ndar;

namespace {

// Synthetic smooth objective with a unique optimum inside the box.
double bowl(const QaoaParams& params, double g0 = 0.7, double b0 = -0.3) {
  double v = 0.0;
  for (double g : params.gammas) v += (g - g0) * (g - g0);
  for (double b : params.betas) v += (b - b0) * (b - b0);
  return v;
}

ObjectiveFn bowl_objective() {
  return [](const QaoaParams& p, int, int) {
    ObjectiveResult r;
    r.mean = bowl(p);
    r.best.energy = r.mean;
    return r;
  };
}

std::vector<Trial> synthetic_history(int count, std::uint64_t seed) {
  auto space = SearchSpace::defaults(1, 4);
  Rng rng(seed);
  std::vector<Trial> hist;
  for (int t = 0; t < count; ++t) {
    Trial tr;
    tr.trial_index = t;
    const double g = rng.next_uniform(space.gamma_ranges[0].lo,
                                      space.gamma_ranges[0].hi);
    const double b = rng.next_uniform(space.beta_ranges[0].lo,
                                      space.beta_ranges[0].hi);
    tr.params = QaoaParams({g}, {b});
    tr.ordering_id = int(rng.next_below(4));
    tr.objective = bowl(tr.params);
    hist.push_back(tr);
  }
  return hist;
}

}  // namespace

TEST_CASE("search space defaults and validation") {
  auto s = SearchSpace::defaults(2, 5);
  CHECK(s.p() == 2);
  CHECK(s.ordering_ids.size() == 5);
  CHECK_NOTHROW(s.validate());
  SearchSpace bad;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  SearchSpace inverted = SearchSpace::defaults(1, 1);
  inverted.gamma_ranges[0] = {1.0, -1.0};
  CHECK_THROWS_AS(inverted.validate(), ConfigError);
}

TEST_CASE("tpe falls back to uniform during startup") {
  auto space = SearchSpace::defaults(1, 4);
  auto hist = synthetic_history(5, 1);  // fewer than startup_trials = 10
  // Uniform draws: identical seed reproduces, different seeds differ.
  auto a = tpe_suggest(hist, space, 7);
  auto b = tpe_suggest(hist, space, 7);
  CHECK(a.first.gammas == b.first.gammas);
  CHECK(a.second == b.second);
  auto c = tpe_suggest(hist, space, 8);
  CHECK(a.first.gammas != c.first.gammas);
  CHECK(a.first.gammas[0] >= space.gamma_ranges[0].lo);
  CHECK(a.first.gammas[0] <= space.gamma_ranges[0].hi);
}

TEST_CASE("tpe falls back to uniform when all objectives are equal") {
  auto space = SearchSpace::defaults(1, 4);
  auto hist = synthetic_history(20, 2);
  for (auto& t : hist) t.objective = 1.25;  // no signal
  std::set<double> draws;
  for (std::uint64_t s = 0; s < 20; ++s)
    draws.insert(tpe_suggest(hist, space, s).first.gammas[0]);
  // Genuinely uniform draws spread across the box rather than collapsing.
  CHECK(draws.size() == 20);
  const double width = space.gamma_ranges[0].width();
  const double lo = space.gamma_ranges[0].lo;
  bool low_half = false, high_half = false;
  for (double d : draws) {
    low_half = low_half || d < lo + 0.5 * width;
    high_half = high_half || d >= lo + 0.5 * width;
  }
  CHECK(low_half);
  CHECK(high_half);
}

TEST_CASE("tpe proposals concentrate near the good region") {
  auto space = SearchSpace::defaults(1, 4);
  auto hist = synthetic_history(60, 3);
  // Optimum at gamma=0.7, beta=-0.3. Count proposals landing in a generous
  // neighborhood of the good quartile.
  int close = 0;
  const int reps = 50;
  for (std::uint64_t s = 0; s < reps; ++s) {
    auto [params, ord] = tpe_suggest(hist, space, 1000 + s);
    if (std::abs(params.gammas[0] - 0.7) < 0.5 &&
        std::abs(params.betas[0] + 0.3) < 0.4)
      ++close;
  }
  // Uniform sampling would land there with prob ~ (1.0/pi)*(0.8/(pi/2)) ~ 0.16.
  CHECK(close > reps * 8 / 10);
}

TEST_CASE("tpe suggestions stay inside the box") {
  auto space = SearchSpace::defaults(2, 3);
  auto hist = [&] {
    Rng rng(11);
    std::vector<Trial> h;
    for (int t = 0; t < 30; ++t) {
      Trial tr;
      tr.trial_index = t;
      std::vector<double> gs(2), bs(2);
      for (auto& g : gs)
        g = rng.next_uniform(space.gamma_ranges[0].lo, space.gamma_ranges[0].hi);
      for (auto& b : bs)
        b = rng.next_uniform(space.beta_ranges[0].lo, space.beta_ranges[0].hi);
      tr.params = QaoaParams(gs, bs);
      tr.ordering_id = int(rng.next_below(3));
      tr.objective = bowl(tr.params);
      h.push_back(tr);
    }
    return h;
  }();
  for (std::uint64_t s = 0; s < 25; ++s) {
    auto [params, ord] = tpe_suggest(hist, space, s);
    for (int l = 0; l < 2; ++l) {
      CHECK(params.gammas[l] >= space.gamma_ranges[l].lo);
      CHECK(params.gammas[l] <= space.gamma_ranges[l].hi);
      CHECK(params.betas[l] >= space.beta_ranges[l].lo);
      CHECK(params.betas[l] <= space.beta_ranges[l].hi);
    }
    CHECK(ord >= 0);
    CHECK(ord < 3);
  }
}

TEST_CASE("tpe prefers the ordering that dominates the good set") {
  auto space = SearchSpace::defaults(1, 2);
  // Ordering 1 always scores well, ordering 0 always badly; continuous dims
  // carry no information.
  Rng rng(5);
  std::vector<Trial> hist;
  for (int t = 0; t < 40; ++t) {
    Trial tr;
    tr.trial_index = t;
    tr.params = QaoaParams({rng.next_uniform(-1.5, 1.5)},
                           {rng.next_uniform(-0.7, 0.7)});
    tr.ordering_id = t % 2;
    tr.objective = tr.ordering_id == 1 ? -1.0 - 0.001 * t : 1.0 + 0.001 * t;
    hist.push_back(tr);
  }
  int picked_one = 0;
  const int reps = 40;
  for (std::uint64_t s = 0; s < reps; ++s)
    picked_one += tpe_suggest(hist, space, 500 + s).second == 1;
  CHECK(picked_one > reps * 8 / 10);
}

TEST_CASE("run_search budget, fixed first trial, determinism") {
  auto space = SearchSpace::defaults(1, 3);
  for (auto strategy :
       {SearchStrategy::Random, SearchStrategy::Grid, SearchStrategy::Tpe}) {
    int calls = 0;
    auto counting = [&](const QaoaParams& p, int ord, int t) {
      ++calls;
      ObjectiveResult r;
      r.mean = bowl(p);
      r.best.energy = r.mean;
      return r;
    };
    auto hist = run_search(counting, space, 17, strategy, 99);
    CHECK(calls == 17);
    REQUIRE(hist.size() == 17);
    CHECK(hist[0].params.gammas[0] == 0.1);
    CHECK(hist[0].params.betas[0] == 0.1);
    CHECK(hist[0].ordering_id == space.ordering_ids.front());
    for (int t = 0; t < 17; ++t) CHECK(hist[t].trial_index == t);
    auto hist2 = run_search(bowl_objective(), space, 17, strategy, 99);
    for (int t = 0; t < 17; ++t) {
      CHECK(hist[t].params.gammas == hist2[t].params.gammas);
      CHECK(hist[t].params.betas == hist2[t].params.betas);
      CHECK(hist[t].ordering_id == hist2[t].ordering_id);
      CHECK(hist[t].objective == hist2[t].objective);
    }
  }
}

TEST_CASE("run_search seeds lead to different explorations") {
  auto space = SearchSpace::defaults(1, 3);
  auto a = run_search(bowl_objective(), space, 12, SearchStrategy::Random, 1);
  auto b = run_search(bowl_objective(), space, 12, SearchStrategy::Random, 2);
  bool differs = false;
  for (int t = 1; t < 12; ++t)
    differs = differs || a[t].params.gammas != b[t].params.gammas;
  CHECK(differs);
}

TEST_CASE("grid search covers distinct lattice points") {
  auto space = SearchSpace::defaults(1, 1);
  auto hist = run_search(bowl_objective(), space, 17, SearchStrategy::Grid, 4);
  std::set<std::pair<double, double>> pts;
  for (int t = 1; t < 17; ++t)
    pts.insert({hist[t].params.gammas[0], hist[t].params.betas[0]});
  CHECK(pts.size() == 16);  // 4x4 enumeration near ceil(17^(1/2))
  for (const auto& [g, b] : pts) {
    CHECK(g >= space.gamma_ranges[0].lo);
    CHECK(g <= space.gamma_ranges[0].hi);
  }
}

TEST_CASE("tpe search beats its own startup phase on a convex objective") {
  auto space = SearchSpace::defaults(1, 1);
  auto hist = run_search(bowl_objective(), space, 100, SearchStrategy::Tpe, 123);
  double best_startup = hist[0].objective;
  for (int t = 0; t < 10; ++t)
    best_startup = std::min(best_startup, hist[t].objective);
  double best_final = best_startup;
  for (const auto& t : hist) best_final = std::min(best_final, t.objective);
  CHECK(best_final < best_startup);
  // The KDE bandwidth floor (1% of the range) limits attainable precision;
  // 0.05 corresponds to landing within ~0.16 of the optimum in each axis.
  CHECK(best_final < 0.05);
}

TEST_CASE("on_trial streams every trial in order") {
  auto space = SearchSpace::defaults(1, 2);
  std::vector<int> seen;
  run_search(bowl_objective(), space, 8, SearchStrategy::Random, 3, TpeOptions{},
             [&](const Trial& t) { seen.push_back(t.trial_index); });
  REQUIRE(seen.size() == 8);
  for (int t = 0; t < 8; ++t) CHECK(seen[t] == t);
}

TEST_CASE("best_trial criteria and tie-breaking") {
  std::vector<Trial> hist(3);
  for (int t = 0; t < 3; ++t) hist[t].trial_index = t;
  hist[0].objective = 2.0;
  hist[0].best_in_trial.energy = -5.0;
  hist[1].objective = 1.0;
  hist[1].best_in_trial.energy = -3.0;
  hist[2].objective = 1.0;
  hist[2].best_in_trial.energy = -5.0;
  CHECK(best_trial(hist, BestCriterion::Mean).trial_index == 1);  // tie -> earlier
  CHECK(best_trial(hist, BestCriterion::Min).trial_index == 0);
  CHECK_THROWS_AS(best_trial({}, BestCriterion::Mean), EmptyInputError);
}

TEST_CASE("search rejects bad budgets and wraps objective failures") {
  auto space = SearchSpace::defaults(1, 1);
  CHECK_THROWS_AS(
      run_search(bowl_objective(), space, 0, SearchStrategy::Random, 1),
      ConfigError);
  auto throwing = [](const QaoaParams&, int, int) -> ObjectiveResult {
    throw std::runtime_error("boom");
  };
  CHECK_THROWS_AS(run_search(throwing, space, 2, SearchStrategy::Random, 1),
                  Error);
}
