#include "parc/network_objective.hpp"

namespace parc {

NetworkObjective::NetworkObjective(const MlpModel& model, const Dataset& train,
                                   Eigen::Index batch_size, std::uint64_t seed)
    : model_(&model), full_(train.as_batch()) {
  if (batch_size > 0 && batch_size < train.size()) {
    stream_.emplace(train, batch_size, seed, true);
  }
}

LossGrad NetworkObjective::evaluate(const ParamVector& theta, double lambda) {
  count_evaluation();
  if (stream_) {
    return loss_and_grads(*model_, theta, stream_->next(), lambda);
  }
  return loss_and_grads(*model_, theta, full_, lambda);
}

LossGrad NetworkObjective::evaluate_reference(const ParamVector& theta, double lambda) {
  return loss_and_grads(*model_, theta, full_, lambda);
}

}  // namespace parc
