#include "parc/homotopy.hpp"

namespace parc {

std::string to_string(Activation act) {
  switch (act) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Sigmoid: return "sigmoid";
  }
  return "?";
}

std::string to_string(HomotopyKind kind) {
  switch (kind) {
    case HomotopyKind::None: return "none";
    case HomotopyKind::HRelu: return "h-relu";
    case HomotopyKind::HSigmoid: return "h-sigmoid";
    case HomotopyKind::HBrightness: return "h-brightness";
    case HomotopyKind::LossBlend: return "loss-blend";
  }
  return "?";
}

namespace {

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::Relu;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity" || name == "linear") return Activation::Identity;
  throw ConfigError("unknown activation '" + name + "'");
}

}  // namespace

HomotopySpec homotopy_from_string(const std::string& name) {
  std::string head = name;
  std::string act;
  if (const auto colon = name.find(':'); colon != std::string::npos) {
    head = name.substr(0, colon);
    act = name.substr(colon + 1);
  }
  if (head == "h-relu") return HomotopySpec::h_relu();
  if (head == "h-sigmoid") return HomotopySpec::h_sigmoid();
  if (head == "h-brightness") {
    return HomotopySpec::h_brightness(act.empty() ? Activation::Relu : activation_from_string(act));
  }
  if (head == "loss-blend") {
    return HomotopySpec::loss_blend(act.empty() ? Activation::Relu : activation_from_string(act));
  }
  if (act.empty()) {
    return HomotopySpec::none(activation_from_string(head));
  }
  throw ConfigError("unknown homotopy '" + name + "'");
}

std::string to_string(const HomotopySpec& spec) {
  switch (spec.kind) {
    case HomotopyKind::None:
      return to_string(spec.activation);
    case HomotopyKind::HRelu:
    case HomotopyKind::HSigmoid:
      return to_string(spec.kind);
    case HomotopyKind::HBrightness:
    case HomotopyKind::LossBlend:
      if (spec.activation == Activation::Relu) return to_string(spec.kind);
      return to_string(spec.kind) + ":" + to_string(spec.activation);
  }
  return "?";
}

}  // namespace parc
