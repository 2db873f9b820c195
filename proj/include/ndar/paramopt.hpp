#pragma once

// Black-box parameter setting over (gamma, beta, gate ordering): random
// search, grid search, and a TPE-style density-ratio estimator with a
// categorical ordering dimension.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ndar/circuit.hpp"
#include "ndar/common.hpp"
#include "ndar/ising.hpp"
#include "ndar/simulator.hpp"

namespace ndar {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

/// Default parameter bounds: for integer couplings the p=1 landscape is
/// periodic, so half-period boxes suffice.
inline constexpr double kDefaultGammaLo = -1.5707963267948966;
inline constexpr double kDefaultGammaHi = 1.5707963267948966;
inline constexpr double kDefaultBetaLo = -0.7853981633974483;
inline constexpr double kDefaultBetaHi = 0.7853981633974483;

struct SearchSpace {
  std::vector<Interval> gamma_ranges;  // one per layer
  std::vector<Interval> beta_ranges;
  std::vector<int> ordering_ids;

  static SearchSpace defaults(int p, int num_orderings) {
    SearchSpace s;
    for (int l = 0; l < p; ++l) {
      s.gamma_ranges.push_back({kDefaultGammaLo, kDefaultGammaHi});
      s.beta_ranges.push_back({kDefaultBetaLo, kDefaultBetaHi});
    }
    s.ordering_ids.resize(std::max(1, num_orderings));
    for (int i = 0; i < int(s.ordering_ids.size()); ++i) s.ordering_ids[i] = i;
    return s;
  }

  int p() const { return int(gamma_ranges.size()); }

  void validate() const {
    if (gamma_ranges.empty() || gamma_ranges.size() != beta_ranges.size())
      throw ConfigError("search space needs matching gamma/beta ranges");
    for (const auto& r : gamma_ranges)
      if (!(r.hi >= r.lo)) throw ConfigError("empty gamma interval");
    for (const auto& r : beta_ranges)
      if (!(r.hi >= r.lo)) throw ConfigError("empty beta interval");
    if (ordering_ids.empty()) throw ConfigError("search space needs >= 1 ordering");
  }
};

struct Trial {
  int trial_index = 0;
  QaoaParams params;
  int ordering_id = 0;
  double objective = 0.0;  // mean energy in the trial's frame
  EnergyRecord best_in_trial;
  std::uint64_t batch_ref = 0;  // seed of the batch that produced the objective
};

struct ObjectiveResult {
  double mean = 0.0;
  EnergyRecord best;
  std::uint64_t batch_ref = 0;
};

using ObjectiveFn =
    std::function<ObjectiveResult(const QaoaParams&, int ordering_id, int trial_index)>;

enum class SearchStrategy { Random, Grid, Tpe };

inline SearchStrategy parse_strategy(const std::string& s) {
  if (s == "random") return SearchStrategy::Random;
  if (s == "grid") return SearchStrategy::Grid;
  if (s == "tpe") return SearchStrategy::Tpe;
  throw ConfigError("unknown search strategy: " + s);
}

struct TpeOptions {
  double split_quantile = 0.25;
  int startup_trials = 10;
  int candidates = 24;
};

namespace detail {

inline double clamp_to(const Interval& r, double v) {
  return std::clamp(v, r.lo, r.hi);
}

/// Truncated-Gaussian KDE over one dimension: kernels centered on the
/// points, Silverman bandwidth, each kernel renormalized to the interval.
struct Kde1d {
  std::vector<double> centers;
  double bandwidth = 0.0;
  Interval range;

  Kde1d(std::vector<double> pts, const Interval& r) : centers(std::move(pts)), range(r) {
    const std::size_t m = centers.size();
    double mean = 0.0;
    for (double c : centers) mean += c;
    mean /= double(m);
    double var = 0.0;
    for (double c : centers) var += (c - mean) * (c - mean);
    var /= double(std::max<std::size_t>(1, m - 1));
    const double sigma = std::sqrt(var);
    bandwidth = 1.06 * sigma * std::pow(double(m), -0.2);
    // Degenerate clusters still need support; floor at 1% of the range.
    const double floor_bw = 0.01 * std::max(range.width(), 1e-12);
    if (!(bandwidth > floor_bw)) bandwidth = floor_bw;
  }

  static double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

  double density(double x) const {
    double acc = 0.0;
    for (double c : centers) {
      const double z = (x - c) / bandwidth;
      const double mass = normal_cdf((range.hi - c) / bandwidth) -
                          normal_cdf((range.lo - c) / bandwidth);
      const double kernel =
          std::exp(-0.5 * z * z) / (bandwidth * 2.5066282746310002);
      acc += kernel / std::max(mass, 1e-12);
    }
    return acc / double(centers.size());
  }

  double sample(Rng& rng) const {
    const double c = centers[rng.next_below(centers.size())];
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double v = c + bandwidth * rng.next_gaussian();
      if (v >= range.lo && v <= range.hi) return v;
    }
    return clamp_to(range, c);
  }
};

}  // namespace detail

/// One TPE suggestion: split history at the objective quantile into good and
/// bad sets, model each continuous dimension with a 1-D kernel density,
/// sample candidates from the good model and keep the one maximizing the
/// good/bad density ratio. The categorical ordering dimension uses smoothed
/// frequency ratios. Falls back to uniform sampling during startup or when
/// the history carries no signal (all objectives equal).
inline std::pair<QaoaParams, int> tpe_suggest(const std::vector<Trial>& history,
                                              const SearchSpace& space,
                                              std::uint64_t seed,
                                              const TpeOptions& opt = {}) {
  space.validate();
  Rng rng(seed);
  const int p = space.p();

  auto uniform_draw = [&]() {
    std::vector<double> gammas(p), betas(p);
    for (int l = 0; l < p; ++l)
      gammas[l] = rng.next_uniform(space.gamma_ranges[l].lo, space.gamma_ranges[l].hi);
    for (int l = 0; l < p; ++l)
      betas[l] = rng.next_uniform(space.beta_ranges[l].lo, space.beta_ranges[l].hi);
    const int ord = space.ordering_ids[rng.next_below(space.ordering_ids.size())];
    return std::make_pair(QaoaParams(gammas, betas), ord);
  };

  if (int(history.size()) < opt.startup_trials) return uniform_draw();

  double obj_lo = history.front().objective, obj_hi = history.front().objective;
  for (const auto& t : history) {
    obj_lo = std::min(obj_lo, t.objective);
    obj_hi = std::max(obj_hi, t.objective);
  }
  if (obj_hi - obj_lo <= 0.0) return uniform_draw();  // no signal

  std::vector<std::size_t> order(history.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (history[a].objective != history[b].objective)
      return history[a].objective < history[b].objective;
    return history[a].trial_index < history[b].trial_index;
  });
  const std::size_t n_good = std::max<std::size_t>(
      1, std::size_t(std::floor(opt.split_quantile * double(history.size()))));

  // Per-dimension point sets: dims 0..p-1 gammas, p..2p-1 betas.
  const int dims = 2 * p;
  std::vector<std::vector<double>> good_pts(dims), bad_pts(dims);
  std::vector<int> good_cat, bad_cat;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Trial& t = history[order[rank]];
    const bool good = rank < n_good;
    for (int l = 0; l < p; ++l) {
      (good ? good_pts : bad_pts)[l].push_back(t.params.gammas[l]);
      (good ? good_pts : bad_pts)[p + l].push_back(t.params.betas[l]);
    }
    (good ? good_cat : bad_cat).push_back(t.ordering_id);
  }

  std::vector<detail::Kde1d> good_kde, bad_kde;
  for (int d = 0; d < dims; ++d) {
    const Interval& r = d < p ? space.gamma_ranges[d] : space.beta_ranges[d - p];
    good_kde.emplace_back(good_pts[d], r);
    bad_kde.emplace_back(bad_pts[d], r);
  }

  const std::size_t n_cats = space.ordering_ids.size();
  auto cat_log_ratio = [&](int ordering_id) {
    std::size_t cg = 0, cb = 0;
    for (int c : good_cat) cg += c == ordering_id;
    for (int c : bad_cat) cb += c == ordering_id;
    const double pg = (double(cg) + 1.0) / (double(good_cat.size()) + double(n_cats));
    const double pb = (double(cb) + 1.0) / (double(bad_cat.size()) + double(n_cats));
    return std::log(pg) - std::log(pb);
  };
  auto cat_sample = [&]() {
    // Draw from the smoothed good-set categorical distribution.
    std::vector<double> w(n_cats);
    double total = 0.0;
    for (std::size_t c = 0; c < n_cats; ++c) {
      std::size_t cg = 0;
      for (int g : good_cat) cg += g == space.ordering_ids[c];
      w[c] = double(cg) + 1.0;
      total += w[c];
    }
    double u = rng.next_double() * total;
    for (std::size_t c = 0; c < n_cats; ++c) {
      u -= w[c];
      if (u < 0.0) return space.ordering_ids[c];
    }
    return space.ordering_ids.back();
  };

  double best_score = -std::numeric_limits<double>::infinity();
  std::vector<double> best_point(dims, 0.0);
  int best_cat = space.ordering_ids.front();
  for (int k = 0; k < opt.candidates; ++k) {
    std::vector<double> point(dims);
    double score = 0.0;
    for (int d = 0; d < dims; ++d) {
      point[d] = good_kde[d].sample(rng);
      score += std::log(std::max(good_kde[d].density(point[d]), 1e-300)) -
               std::log(std::max(bad_kde[d].density(point[d]), 1e-300));
    }
    const int cat = cat_sample();
    score += cat_log_ratio(cat);
    if (score > best_score) {
      best_score = score;
      best_point = point;
      best_cat = cat;
    }
  }

  std::vector<double> gammas(p), betas(p);
  for (int l = 0; l < p; ++l) {
    gammas[l] = detail::clamp_to(space.gamma_ranges[l], best_point[l]);
    betas[l] = detail::clamp_to(space.beta_ranges[l], best_point[p + l]);
  }
  return {QaoaParams(gammas, betas), best_cat};
}

/// Runs exactly `trials` objective evaluations with the chosen strategy.
/// The first trial always uses the fixed start point (all angles 0.1, first
/// ordering). Deterministic given seed. Trials stream to `on_trial` as they
/// complete when provided.
inline std::vector<Trial> run_search(
    const ObjectiveFn& objective, const SearchSpace& space, int trials,
    SearchStrategy strategy, std::uint64_t seed, const TpeOptions& tpe_opt = {},
    const std::function<void(const Trial&)>& on_trial = nullptr) {
  space.validate();
  if (trials < 1) throw ConfigError("search requires trials >= 1");
  const int p = space.p();

  // Grid layout: per continuous dimension, ceil(trials^(1/dims)) points.
  std::vector<std::vector<double>> grid_axes;
  std::vector<std::size_t> grid_shape;
  if (strategy == SearchStrategy::Grid) {
    const int dims = 2 * p;
    const int per_dim = std::max(
        1, int(std::ceil(std::pow(double(trials), 1.0 / double(dims)))));
    for (int d = 0; d < dims; ++d) {
      const Interval& r = d < p ? space.gamma_ranges[d] : space.beta_ranges[d - p];
      std::vector<double> axis;
      for (int g = 0; g < per_dim; ++g)
        axis.push_back(per_dim == 1
                           ? 0.5 * (r.lo + r.hi)
                           : r.lo + r.width() * double(g) / double(per_dim - 1));
      grid_axes.push_back(axis);
      grid_shape.push_back(axis.size());
    }
  }

  std::vector<Trial> history;
  history.reserve(trials);
  Rng rng(Rng::derive(seed, 0x7065ULL));

  for (int t = 0; t < trials; ++t) {
    QaoaParams params(std::vector<double>(p, 0.1), std::vector<double>(p, 0.1));
    int ordering_id = space.ordering_ids.front();
    if (t > 0) {
      switch (strategy) {
        case SearchStrategy::Random: {
          std::vector<double> gs(p), bs(p);
          for (int l = 0; l < p; ++l)
            gs[l] = rng.next_uniform(space.gamma_ranges[l].lo,
                                     space.gamma_ranges[l].hi);
          for (int l = 0; l < p; ++l)
            bs[l] = rng.next_uniform(space.beta_ranges[l].lo,
                                     space.beta_ranges[l].hi);
          params = QaoaParams(gs, bs);
          ordering_id =
              space.ordering_ids[rng.next_below(space.ordering_ids.size())];
          break;
        }
        case SearchStrategy::Grid: {
          std::size_t flat = std::size_t(t - 1);
          std::vector<double> point(grid_axes.size());
          for (std::size_t d = 0; d < grid_axes.size(); ++d) {
            point[d] = grid_axes[d][flat % grid_shape[d]];
            flat /= grid_shape[d];
          }
          std::vector<double> gs(point.begin(), point.begin() + p);
          std::vector<double> bs(point.begin() + p, point.end());
          params = QaoaParams(gs, bs);
          ordering_id = space.ordering_ids[std::size_t(t - 1) %
                                           space.ordering_ids.size()];
          break;
        }
        case SearchStrategy::Tpe: {
          auto [sp, so] =
              tpe_suggest(history, space, Rng::derive(seed, std::uint64_t(t)), tpe_opt);
          params = sp;
          ordering_id = so;
          break;
        }
      }
    }

    ObjectiveResult res;
    try {
      res = objective(params, ordering_id, t);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error("objective failed at trial " + std::to_string(t) + ": " +
                  e.what());
    }
    Trial trial;
    trial.trial_index = t;
    trial.params = params;
    trial.ordering_id = ordering_id;
    trial.objective = res.mean;
    trial.best_in_trial = res.best;
    trial.batch_ref = res.batch_ref;
    history.push_back(trial);
    if (on_trial) on_trial(history.back());
  }
  return history;
}

enum class BestCriterion { Mean, Min };

/// Argmin by the chosen criterion, ties broken by lowest trial index.
inline const Trial& best_trial(const std::vector<Trial>& trials,
                               BestCriterion criterion) {
  if (trials.empty()) throw EmptyInputError("best_trial on empty history");
  const Trial* best = &trials.front();
  for (const auto& t : trials) {
    const double v =
        criterion == BestCriterion::Mean ? t.objective : t.best_in_trial.energy;
    const double b = criterion == BestCriterion::Mean
                         ? best->objective
                         : best->best_in_trial.energy;
    if (v < b) best = &t;
  }
  return *best;
}

}  // namespace ndar
