#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace evoqtl {

// A SNP identity: numeric chromosome plus base-pair coordinate. The textual
// form is "chr.position" and ordering is (chromosome, position).
struct SnpLabel {
    std::int32_t chromosome = 0;
    std::int64_t position = 0;

    auto operator<=>(const SnpLabel&) const = default;
};

// Parses "chr.position". Throws std::invalid_argument naming the bad text.
SnpLabel parse_snp_label(std::string_view text);

std::string to_string(const SnpLabel& label);

struct SnpLabelHash {
    std::size_t operator()(const SnpLabel& l) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(l.chromosome) * 0x9e3779b97f4a7c15ULL;
        h ^= static_cast<std::uint64_t>(l.position) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

}  // namespace evoqtl
