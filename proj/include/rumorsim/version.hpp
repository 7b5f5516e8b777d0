#ifndef RUMORSIM_VERSION_HPP
#define RUMORSIM_VERSION_HPP

namespace rumorsim {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace rumorsim

#endif  // RUMORSIM_VERSION_HPP
