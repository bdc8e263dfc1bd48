#pragma once

#include <stdexcept>
#include <string>

namespace mmrl {

/// Action violates a model precondition (negative offset, non-positive
/// spread, non-finite values).
struct InvalidActionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Policy weights are unusable (non-finite).
struct InvalidPolicyError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Log-density gradient requested at a point where it is undefined
/// (Beta action on an interval endpoint).
struct UndefinedScoreError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Requested equilibrium lies outside the payoff's concavity domain.
struct InfeasibleEquilibriumError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Mismatched dimensions or invalid values in a configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Training aborted by the weight-norm divergence guard.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::string checkpoint)
      : std::runtime_error(what), last_checkpoint(std::move(checkpoint)) {}
  std::string last_checkpoint;  // path of the last good checkpoint, may be empty
};

}  // namespace mmrl
