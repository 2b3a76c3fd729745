// SPDX-License-Identifier: Apache-2.0
#ifndef QUENCHLOC_VERSION_HPP
#define QUENCHLOC_VERSION_HPP

namespace quench {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
