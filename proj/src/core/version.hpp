// SPDX-License-Identifier: Apache-2.0
#ifndef TIMEBIN_CORE_VERSION_HPP
#define TIMEBIN_CORE_VERSION_HPP

namespace timebin {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace timebin

#endif
