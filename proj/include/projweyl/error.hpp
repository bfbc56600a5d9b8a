#ifndef PROJWEYL_ERROR_HPP
#define PROJWEYL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace projweyl {

enum class ErrorCode {
  point_outside_domain,
  order_unsupported,
  stencil_out_of_domain,
  point_outside_overlap,
  singular_metric,
  incompatible_input,
  singular_normal_equations,
  degenerate_conic,
  real_point_input,
  inconsistent_conic,
  non_unimodular,
  inadmissible_conic,
  residual_failure,
  left_all_charts,
  step_underflow,
  too_few_samples,
  positivity_violated,
  singular_coframe,
  no_return,
  empty_path,
  io_failure,
  malformed_config,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::point_outside_domain: return "point-outside-domain";
    case ErrorCode::order_unsupported: return "order-unsupported";
    case ErrorCode::stencil_out_of_domain: return "stencil-out-of-domain";
    case ErrorCode::point_outside_overlap: return "point-outside-overlap";
    case ErrorCode::singular_metric: return "singular-metric";
    case ErrorCode::incompatible_input: return "incompatible-input";
    case ErrorCode::singular_normal_equations: return "singular-normal-equations";
    case ErrorCode::degenerate_conic: return "degenerate-conic";
    case ErrorCode::real_point_input: return "real-point-input";
    case ErrorCode::inconsistent_conic: return "inconsistent-conic";
    case ErrorCode::non_unimodular: return "non-unimodular";
    case ErrorCode::inadmissible_conic: return "inadmissible-conic";
    case ErrorCode::residual_failure: return "residual-failure";
    case ErrorCode::left_all_charts: return "left-all-charts";
    case ErrorCode::step_underflow: return "step-underflow";
    case ErrorCode::too_few_samples: return "too-few-samples";
    case ErrorCode::positivity_violated: return "positivity-violated";
    case ErrorCode::singular_coframe: return "singular-coframe";
    case ErrorCode::no_return: return "no-return-within-budget";
    case ErrorCode::empty_path: return "empty-path";
    case ErrorCode::io_failure: return "io-failure";
    case ErrorCode::malformed_config: return "malformed-config";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace projweyl

#endif  // PROJWEYL_ERROR_HPP
