#pragma once

#include <cstdint>
#include <optional>

#include "parc/data.hpp"
#include "parc/models.hpp"
#include "parc/objective.hpp"

namespace parc {

/// Task loss of a network on a training set. Corrector evaluations draw
/// minibatches from a seeded stream; reference evaluations use the full set.
class NetworkObjective final : public Objective {
 public:
  /// batch_size <= 0 means full-batch evaluation.
  NetworkObjective(const MlpModel& model, const Dataset& train, Eigen::Index batch_size,
                   std::uint64_t seed);

  Eigen::Index dimension() const override { return model_->param_count(); }
  LossGrad evaluate(const ParamVector& theta, double lambda) override;
  LossGrad evaluate_reference(const ParamVector& theta, double lambda) override;

  const MlpModel& model() const { return *model_; }

 private:
  const MlpModel* model_;
  Batch full_;
  std::optional<BatchStream> stream_;
};

}  // namespace parc
