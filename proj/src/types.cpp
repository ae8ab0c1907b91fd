#include "polarimeter/types.hpp"

#include <algorithm>

namespace polarimeter {

std::string_view kind_name(ElementKind kind) {
    switch (kind) {
        case ElementKind::Hashtag: return "hashtag";
        case ElementKind::RetweetedAccount: return "account";
        case ElementKind::Website: return "website";
    }
    return "unknown";
}

std::optional<ElementKind> parse_kind(std::string_view name) {
    const std::string n = casefold(name);
    if (n == "hashtag" || n == "hashtags") return ElementKind::Hashtag;
    if (n == "account" || n == "accounts" || n == "retweeted_account" || n == "retweet")
        return ElementKind::RetweetedAccount;
    if (n == "website" || n == "websites" || n == "url") return ElementKind::Website;
    return std::nullopt;
}

char kind_tag(ElementKind kind) {
    switch (kind) {
        case ElementKind::Hashtag: return 'h';
        case ElementKind::RetweetedAccount: return 'a';
        case ElementKind::Website: return 'w';
    }
    return '?';
}

std::optional<ElementKind> kind_from_tag(char tag) {
    switch (tag) {
        case 'h': return ElementKind::Hashtag;
        case 'a': return ElementKind::RetweetedAccount;
        case 'w': return ElementKind::Website;
        default: return std::nullopt;
    }
}

std::string_view stance_name(Stance stance) {
    switch (stance) {
        case Stance::Supp: return "SUPP";
        case Stance::Opp: return "OPP";
        case Stance::Excluded: return "EXCLUDED";
        case Stance::Unlabeled: return "UNLABELED";
    }
    return "UNLABELED";
}

std::optional<Stance> parse_stance(std::string_view token) {
    if (token == "SUPP") return Stance::Supp;
    if (token == "OPP") return Stance::Opp;
    if (token == "EXCLUDED") return Stance::Excluded;
    if (token == "UNLABELED") return Stance::Unlabeled;
    return std::nullopt;
}

Stance other_side(Stance stance) {
    if (stance == Stance::Supp) return Stance::Opp;
    if (stance == Stance::Opp) return Stance::Supp;
    return stance;
}

std::string casefold(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
    });
    return out;
}

}  // namespace polarimeter
