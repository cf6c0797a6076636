#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rrhmm/hmm_core.hpp"

namespace rrhmm {

//! How far a printed (4-decimal) matrix had to move to satisfy the model
//! invariants.
struct TranscriptionAdjustment {
  double transition_max_change = 0.0;
  double observation_max_change = 0.0;
};

struct BuiltinModel {
  std::string name;
  RrHmmParams params;
  TranscriptionAdjustment adjustment;
};

//! 3 states, 3 symbols, rank-2 transitions.
BuiltinModel example1();
//! 3 states, 2 symbols, full-rank transitions; needs stacked windows.
BuiltinModel example2();
//! 4 states, 2 symbols, rank-3 transitions; needs stacked windows.
BuiltinModel example3();

//! "example1" | "example2" | "example3" | "polygon" (uses polygon_states).
BuiltinModel builtin_model(std::string_view name, int polygon_states = 10);

std::vector<std::string> builtin_model_names();

//! Closest rank-k matrix by truncated SVD, columns then rescaled to sum to 1.
//! Column rescaling is a right diagonal multiply, so rank is preserved.
Matrix project_to_stochastic_rank(const Matrix& T, int k);

}  // namespace rrhmm
