#pragma once

#include <utility>

namespace mmrl {

/// Intervals the adversary draws from. Degenerate intervals (lo == hi) pin a
/// parameter.
struct ParamBounds {
  double b_lo = -5.0;
  double b_hi = 5.0;
  double a_lo = 105.0;
  double a_hi = 175.0;
  double k_lo = 1.125;
  double k_hi = 1.875;

  void validate() const;
};

/// A joint strategy of the single-stage game: MM offsets, adversary
/// parameters and the MM's inventory entering the stage.
struct StageProfile {
  double delta_bid = 0.0;
  double delta_ask = 0.0;
  double b = 0.0;
  double a_bid = 140.0;
  double a_ask = 140.0;
  double k_bid = 1.5;
  double k_ask = 1.5;
  double h = 0.0;
};

/// Expected single-stage MtM change:
///   A+ e^{-k+ d+} (d+ + b) + A- e^{-k- d-} (d- - b) + b h.
double stage_payoff(const StageProfile& p);

/// Analytic gradient of stage_payoff in the MM offsets:
///   d/d delta_bid = lambda+ [1 - k+ (delta_bid + b)]
///   d/d delta_ask = lambda- [1 - k- (delta_ask - b)]
/// Matches central finite differences of stage_payoff.
std::pair<double, double> payoff_gradient_delta(const StageProfile& p);

/// Analytic Hessian diagonal (the off-diagonal terms are zero):
///   k+ lambda+ [k+ (delta_bid + b) - 2],  k- lambda- [k- (delta_ask - b) - 2].
std::pair<double, double> payoff_hessian_diag(const StageProfile& p);

/// True iff the payoff Hessian is negative semi-definite at the profile:
/// delta_bid <= 2/k+ - b and delta_ask <= 2/k- + b.
bool is_concave_region(const StageProfile& p);

struct MmBestResponse {
  double delta_bid = 0.0;
  double delta_ask = 0.0;
  bool bid_clamped = false;
  bool ask_clamped = false;
};

/// Closed-form stage best response of the MM,
///   delta_bid = 1/k_bid + b,  delta_ask = 1/k_ask - b,
/// clamped below at zero with per-side flags.
MmBestResponse mm_best_response(double b, double k_bid, double k_ask);

struct AdversaryBestResponse {
  double b = 0.0;
  double a_bid = 0.0;
  double a_ask = 0.0;
  double k_bid = 0.0;
  double k_ask = 0.0;
  bool b_tie = false;  // payoff slope in b was exactly zero
};

/// Adversary's best response to fixed MM offsets: b goes to the bound
/// selected by the sign of the payoff slope lambda+ - lambda- + h (ties
/// break to b_lo); each of a+-, k+- is chosen by evaluating the payoff at
/// both bounds per side and keeping the minimising one.
AdversaryBestResponse adversary_best_response(double delta_bid, double delta_ask,
                                              double h, const ParamBounds& bounds);

struct Equilibrium {
  StageProfile profile;
  double payoff = 0.0;
  bool continuum = false;      // h == 0: any b in bounds is reported equivalent
  bool offsets_clamped = false;
};

/// Closed-form stage equilibrium.
///
/// Fixed-(A,k) mode (fixed_k/fixed_a supplied): returns
///   delta+- = 1/k +- b*,  b* = b_lo for h > 0, b_hi for h < 0,
/// with the h == 0 continuum represented by b_lo and flagged. Full mode
/// additionally sets a+- and k+- by per-side bound evaluation (the general
/// solution predicts a_lo and k_hi) and computes the offsets at the chosen k.
///
/// Throws InfeasibleEquilibriumError when the concavity domain is empty at
/// b* (2/k - b* < 0 or 2/k + b* < 0).
Equilibrium nash_equilibrium(const ParamBounds& bounds, double h);
Equilibrium nash_equilibrium_fixed_k(double b_lo, double b_hi, double a,
                                     double k, double h);

/// Brute-force equilibrium check. Grids every unilateral deviation: the MM
/// over the concavity box [0, 2/k+ - b] x [0, 2/k- + b] at the profile's b,
/// the adversary over each parameter interval (degenerate intervals stay
/// fixed). Returns the largest payoff improvement available to either
/// player; an exact equilibrium returns at most the grid discretisation
/// error.
double verify_equilibrium_grid(const StageProfile& profile,
                               const ParamBounds& bounds,
                               int grid_resolution = 401);

}  // namespace mmrl
