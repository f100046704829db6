// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_JSON_IO_HPP
#define TIMEBIN_CORE_JSON_IO_HPP

#include <string>

#include "core/state.hpp"

namespace timebin {

/// {"d": int, "delta_t": float, "amplitudes": [[re, im], ...],
///  "normalized": bool} — complex numbers are always [re, im] pairs.
std::string state_to_json(const TimeBinState& s);

/// Inverse of state_to_json. Any schema violation, including a "normalized"
/// flag that contradicts the amplitudes, raises ParseError.
TimeBinState state_from_json(const std::string& text);

}  // namespace timebin

#endif
