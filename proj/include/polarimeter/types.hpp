#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polarimeter {

enum class ElementKind : std::uint8_t { Hashtag = 0, RetweetedAccount = 1, Website = 2 };

inline constexpr ElementKind kAllKinds[] = {ElementKind::Hashtag, ElementKind::RetweetedAccount,
                                            ElementKind::Website};

/// Short name used in file names and on the command line ("hashtag", "account", "website").
std::string_view kind_name(ElementKind kind);
/// Accepts the short names plus "retweeted_account"/"url" aliases.
std::optional<ElementKind> parse_kind(std::string_view name);

/// Single-character tag used in the profile snapshot ("h", "a", "w").
char kind_tag(ElementKind kind);
std::optional<ElementKind> kind_from_tag(char tag);

struct ElementKey {
    ElementKind kind = ElementKind::Hashtag;
    std::string key;

    auto operator<=>(const ElementKey&) const = default;
    bool operator==(const ElementKey&) const = default;
};

enum class Stance : std::uint8_t { Supp, Opp, Excluded, Unlabeled };

std::string_view stance_name(Stance stance);
std::optional<Stance> parse_stance(std::string_view token);

/// Opposite side for SUPP/OPP; identity otherwise.
Stance other_side(Stance stance);

/// Fatal misconfiguration: bad seed file, empty label group, invalid config document.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// ASCII casefold. Multi-byte UTF-8 sequences pass through unchanged.
std::string casefold(std::string_view text);

}  // namespace polarimeter
