// SPDX-License-Identifier: Apache-2.0
#include "core/umzi.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace timebin {

Eigen::VectorXcd apply_stage(const Eigen::VectorXcd& input, const StageParams& stage) {
  if (input.size() == 0)
    fail(ErrorCode::InvalidArgument, "apply_stage needs a non-empty input");
  if (stage.eta < 0.0 || stage.eta > 1.0)
    fail(ErrorCode::InvalidArgument,
         "splitting ratio eta=" + std::to_string(stage.eta) + " outside [0,1]");
  const double early = std::sqrt(stage.eta);
  const std::complex<double> late =
      std::sqrt(1.0 - stage.eta) * std::polar(1.0, stage.phi);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(input.size() + 1);
  for (Eigen::Index j = 0; j < input.size(); ++j) {
    out[j] += early * input[j];
    out[j + 1] += late * input[j];
  }
  return out;
}

CascadeResult cascade(const std::vector<StageParams>& stages, const TimeBinGrid& grid) {
  if (stages.empty())
    fail(ErrorCode::InvalidArgument, "cascade needs at least one stage");
  Eigen::VectorXcd amps = Eigen::VectorXcd::Ones(1);
  for (const StageParams& stage : stages) amps = apply_stage(amps, stage);
  NormalizeResult norm = normalize(grid, amps);
  return CascadeResult{std::move(amps), norm.weight, std::move(norm.state)};
}

Eigen::Vector3cd qutrit_closed_form(double phi1, double phi2) {
  const std::complex<double> e1 = std::polar(1.0, phi1);
  const std::complex<double> e2 = std::polar(1.0, phi2);
  Eigen::Vector3cd amps;
  amps << 0.5, 0.5 * (e1 + e2), 0.5 * e1 * e2;
  return amps;
}

}  // namespace timebin
