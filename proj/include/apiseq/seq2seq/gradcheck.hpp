#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "apiseq/seq2seq/model.hpp"
#include "apiseq/seq2seq/tape.hpp"

namespace apiseq::seq2seq {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t samples = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Builds a scalar objective on a fresh tape.
using Objective = std::function<Var(Tape&)>;

/// Compares analytic gradients with central differences (f(θ+ε) − f(θ−ε)) / 2ε
/// on `samples` entries drawn uniformly over all entries of `params`.
/// Relative error is |g_a − g_n| / max(|g_a|, |g_n|, 1e-8).
GradCheckResult grad_check(const Objective& objective, const std::vector<Parameter*>& params, double epsilon,
                           std::size_t samples, std::uint64_t seed);

/// Batch loss (dropout off) of `model` on `batch` through the generic checker.
GradCheckResult grad_check(Seq2SeqModel& model, const std::vector<Example>& batch, double epsilon,
                           std::size_t samples = 200, std::uint64_t seed = 7, double label_smoothing = 0.1);

}  // namespace apiseq::seq2seq
