#pragma once

#include <cstdint>
#include <string_view>

namespace phishguard {

/// Encodings are fixed and appear in every persisted artifact.
enum class ClassLabel : std::uint8_t {
    Legitimate = 0,
    Phishing = 1,
};

inline constexpr int encode(ClassLabel label) noexcept { return static_cast<int>(label); }

inline constexpr std::string_view label_name(ClassLabel label) noexcept
{
    return label == ClassLabel::Phishing ? "phishing" : "legitimate";
}

}  // namespace phishguard
