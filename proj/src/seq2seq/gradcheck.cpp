#include "apiseq/seq2seq/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "apiseq/random.hpp"

namespace apiseq::seq2seq {

GradCheckResult grad_check(const Objective& objective, const std::vector<Parameter*>& params, double epsilon,
                           std::size_t samples, std::uint64_t seed) {
  GradCheckResult result;
  std::vector<std::size_t> ends;
  std::size_t total = 0;
  for (Parameter* p : params) {
    p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
    total += static_cast<std::size_t>(p->value.size());
    ends.push_back(total);
  }
  if (total == 0) return result;
  {
    Tape tape(false);
    Var f = objective(tape);
    tape.backward(f);
  }
  auto eval = [&] {
    Tape tape(false);
    return tape.scalar(objective(tape));
  };
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t flat = rng.below(total);
    const auto which = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), flat) - ends.begin());
    Parameter& p = *params[which];
    const std::size_t local = flat - (which == 0 ? 0 : ends[which - 1]);
    double& theta = p.value.data()[local];
    const double saved = theta;
    theta = saved + epsilon;
    const double up = eval();
    theta = saved - epsilon;
    const double down = eval();
    theta = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double analytic = p.grad.data()[local];
    const double err = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    if (err > result.max_relative_error || result.samples == 0) {
      result.max_relative_error = err;
      result.worst_analytic = analytic;
      result.worst_numeric = numeric;
    }
    ++result.samples;
  }
  for (Parameter* p : params) p->grad.setZero();
  return result;
}

GradCheckResult grad_check(Seq2SeqModel& model, const std::vector<Example>& batch, double epsilon,
                           std::size_t samples, std::uint64_t seed, double label_smoothing) {
  std::vector<Parameter*> params;
  for (auto& p : model.params()) params.push_back(&p);
  return grad_check([&](Tape& tape) { return batch_loss(tape, model, batch, label_smoothing); }, params, epsilon,
                    samples, seed);
}

}  // namespace apiseq::seq2seq
