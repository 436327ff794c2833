#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrsde/model.hpp"
#include "mrsde/types.hpp"

namespace mrsde {

enum class Variant { small_noise, short_time };

struct Event {
  enum class Kind { endpoint_above, endpoint_below, sup_deviation };
  Kind kind = Kind::endpoint_above;
  double threshold = 0.0;
};

struct ExperimentPlan {
  ModelSpec model;
  Variant variant = Variant::small_noise;
  std::vector<double> epsilons;  // strictly decreasing, in (0, 1]
  Event event;
  Index n_particles = 1000;
  Index n_steps = 100;
  Index n_mc_batches = 30;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Throws std::invalid_argument describing the first broken plan invariant.
void validate_plan(const ExperimentPlan& plan);

struct LdpRow {
  double epsilon = 0.0;
  double p_hat = 0.0;
  double std_err = 0.0;
  double neg_eps_log_p = 0.0;  // +inf when no hits were observed
  double neg_eps_log_p_se = 0.0;
  Index hits = 0;
  Index samples = 0;
  bool zero_hits = false;
};

struct LdpReport {
  std::vector<LdpRow> rows;
  double reference_rate = 0.0;
  bool reference_is_upper_bound = false;
  std::string reference_label;
  std::string statistic;  // which sample the event is evaluated on
  // -eps log p_hat as a function of eps: nonincreasing allows two pooled
  // standard errors of slack per step, strictly increasing allows none.
  bool nonincreasing_in_epsilon = false;
  bool strictly_increasing_in_epsilon = false;
};

/// Naive Monte Carlo over n_mc_batches independent ensembles per epsilon.
/// Endpoint events and sup-deviation events are evaluated per particle.
/// A pilot batch at the largest epsilon must see p >= 10 / n_samples.
LdpReport run_ldp_experiment(const ExperimentPlan& plan);

/// Upper bound on inf{I(g) : sup_t |g - X0| >= delta} from skeleton paths
/// driven by a constant control up to a hitting time and zero after.
double candidate_tube_rate(const ModelSpec& spec, Variant variant, double delta, Index n_steps);

struct ConvergenceRow {
  double dt = 0.0;
  Index n_particles = 0;
  double k_error = 0.0;  // mean over replicates of |K_T - T|
  double x_error = 0.0;  // mean over replicates of |mean_i X^i_T|
  double k_error_se = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double slope_in_n = 0.0;   // log-log slope of k_error in n at the finest dt
  double slope_in_dt = 0.0;  // log-log slope of k_error in dt at the largest n
};

/// Scheme errors on the closed-form instance b = -1, sigma = 1, xi = 0,
/// h = identity, where K_t = t and X_t = B_t.
ConvergenceTable run_convergence_study(const ModelSpec& spec, const std::vector<double>& dts,
                                       const std::vector<Index>& n_particles, std::uint64_t seed,
                                       Index replicates = 1, int workers = 1);

bool is_closed_form_instance(const ModelSpec& spec);

struct EpsLimitRow {
  double epsilon = 0.0;
  double mean_sq_sup_x_dev = 0.0;  // E_M[sup_t |X^eps - X0|^2]
  double std_err = 0.0;            // batch means over particle blocks
  double sup_k_dev = 0.0;          // sup_t |K^eps - K0|
  double w1_bound = 0.0;           // (M/m) sup_t W1(law of U^eps_t, delta_{U0_t})
};

/// Deviation from the deterministic limit along an epsilon schedule. All
/// epsilons share the same noise (common random numbers).
std::vector<EpsLimitRow> run_eps_limit_study(const ModelSpec& spec,
                                             const std::vector<double>& epsilons,
                                             Index n_particles, Index n_steps, std::uint64_t seed,
                                             Index n_batches = 30, int workers = 1);

}  // namespace mrsde
