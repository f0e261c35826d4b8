#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace eegscreen {

// The 19 scalp electrodes of the 10-20 montage, in the canonical order used
// by every tensor in the project.
enum class Channel : std::size_t {
  Fz, Cz, Pz, C3, C4, T3, T4, Fp1, Fp2, F3, F4, F7, F8, P3, P4, T5, T6, O1, O2,
};

inline constexpr std::size_t kNumChannels = 19;

inline constexpr std::array<Channel, kNumChannels> kCanonicalChannels = {
    Channel::Fz,  Channel::Cz,  Channel::Pz, Channel::C3, Channel::C4, Channel::T3, Channel::T4,
    Channel::Fp1, Channel::Fp2, Channel::F3, Channel::F4, Channel::F7, Channel::F8, Channel::P3,
    Channel::P4,  Channel::T5,  Channel::T6, Channel::O1, Channel::O2,
};

constexpr std::size_t index_of(Channel c) { return static_cast<std::size_t>(c); }

std::string_view channel_name(Channel c);

// Case-insensitive lookup that also accepts the modern names P7/P8 (T5/T6)
// and T7/T8 (T3/T4). Throws Error(UnknownChannel).
Channel normalize_channel_name(std::string_view raw);

}  // namespace eegscreen
