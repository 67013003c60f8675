#include "mlceval/labelspace.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>

namespace mlceval {

namespace {

std::string fnv1a_hex(const std::vector<std::string>& parts) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 1099511628211ULL;
    };
    for (const auto& p : parts) {
        for (unsigned char c : p) mix(c);
        mix(0x1f);  // unit separator between labels
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

bool valid_label_name(const std::string& name) {
    if (name.empty()) return false;
    for (unsigned char c : name) {
        if (c == '&' || c == '+' || c == '-' || c == '*') return false;
        if (std::isspace(c)) return false;
    }
    return true;
}

}  // namespace

// LabelSchema -----------------------------------------------------------------

LabelSchema::LabelSchema(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty())
        throw ValidationError("schema must contain at least one label");
    if (labels_.size() > kMaxLabels)
        throw ValidationError("schema has " + std::to_string(labels_.size()) +
                              " labels; at most " + std::to_string(kMaxLabels) +
                              " are supported");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (!valid_label_name(labels_[i]))
            throw ValidationError("invalid label name at position " + std::to_string(i) +
                                  ": \"" + labels_[i] +
                                  "\" (must be non-empty, no '&', '+', '-', '*' or whitespace)");
        for (std::size_t j = i + 1; j < labels_.size(); ++j) {
            if (labels_[i] == labels_[j])
                throw ValidationError("duplicate label name \"" + labels_[i] + "\"");
        }
    }
    digest_ = fnv1a_hex(labels_);
}

const LabelSchema& LabelSchema::suicidality() {
    static const LabelSchema schema{std::vector<std::string>{"SI", "SA", "ES", "NSSI"}};
    return schema;
}

std::optional<std::size_t> LabelSchema::find(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == name) return i;
    return std::nullopt;
}

std::size_t LabelSchema::index_of(std::string_view name) const {
    if (auto pos = find(name)) return *pos;
    throw ValidationError("unknown label \"" + std::string(name) + "\"");
}

// LabelSet --------------------------------------------------------------------

LabelSet::LabelSet(std::size_t width, std::uint32_t bits) : width_(width), bits_(bits) {
    if (width > LabelSchema::kMaxLabels)
        throw ValidationError("label set width " + std::to_string(width) + " exceeds " +
                              std::to_string(LabelSchema::kMaxLabels));
    if (width < 32 && (bits >> width) != 0)
        throw ValidationError("label set has bits beyond width " + std::to_string(width));
}

LabelSet LabelSet::full(std::size_t width) {
    return LabelSet(width, width == 0 ? 0u : (width >= 32 ? ~0u : ((1u << width) - 1u)));
}

bool LabelSet::contains(std::size_t pos) const {
    if (pos >= width_)
        throw ValidationError("label position " + std::to_string(pos) +
                              " out of range for width " + std::to_string(width_));
    return (bits_ >> pos) & 1u;
}

LabelSet LabelSet::with(std::size_t pos, bool present) const {
    if (pos >= width_)
        throw ValidationError("label position " + std::to_string(pos) +
                              " out of range for width " + std::to_string(width_));
    std::uint32_t bits = present ? (bits_ | (1u << pos)) : (bits_ & ~(1u << pos));
    return LabelSet(width_, bits);
}

std::size_t LabelSet::cardinality() const noexcept {
    return static_cast<std::size_t>(std::popcount(bits_));
}

void LabelSet::require_same_width(const LabelSet& other) const {
    if (width_ != other.width_)
        throw ValidationError("label set width mismatch: " + std::to_string(width_) +
                              " vs " + std::to_string(other.width_));
}

LabelSet LabelSet::intersect(const LabelSet& other) const {
    require_same_width(other);
    return LabelSet(width_, bits_ & other.bits_);
}

LabelSet LabelSet::minus(const LabelSet& other) const {
    require_same_width(other);
    return LabelSet(width_, bits_ & ~other.bits_);
}

LabelSet LabelSet::unite(const LabelSet& other) const {
    require_same_width(other);
    return LabelSet(width_, bits_ | other.bits_);
}

LabelSet LabelSet::complement() const {
    return LabelSet(width_, ~bits_ & LabelSet::full(width_).bits());
}

bool LabelSet::subset_of(const LabelSet& other) const {
    require_same_width(other);
    return (bits_ & ~other.bits_) == 0;
}

std::uint32_t LabelSet::code_value() const noexcept {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < width_; ++i)
        if ((bits_ >> i) & 1u) v |= 1u << (width_ - 1 - i);
    return v;
}

// PowerSetOrder ---------------------------------------------------------------

PowerSetOrder::PowerSetOrder(std::size_t width) : width_(width) {
    if (width == 0)
        throw ValidationError("power set requires a non-empty schema");
    if (width > LabelSchema::kMaxLabels)
        throw ValidationError("power set over " + std::to_string(width) +
                              " labels exceeds the materialization bound of " +
                              std::to_string(LabelSchema::kMaxLabels));
    const std::size_t m = std::size_t{1} << width;
    sets_.reserve(m);
    for (std::uint32_t bits = 0; bits < m; ++bits) sets_.emplace_back(width, bits);
    std::sort(sets_.begin(), sets_.end(), [](const LabelSet& a, const LabelSet& b) {
        if (a.cardinality() != b.cardinality()) return a.cardinality() < b.cardinality();
        return a.code_value() < b.code_value();
    });
    index_by_bits_.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) index_by_bits_[sets_[i].bits()] = i;
}

std::size_t PowerSetOrder::index_of(const LabelSet& set) const {
    if (set.width() != width_)
        throw ValidationError("label set width " + std::to_string(set.width()) +
                              " does not match power set width " + std::to_string(width_));
    return index_by_bits_[set.bits()];
}

PowerSetOrder enumerate_powerset(const LabelSchema& schema) {
    return PowerSetOrder(schema.size());
}

// Codes -----------------------------------------------------------------------

namespace {

std::vector<std::string_view> split_dashes(std::string_view text) {
    std::vector<std::string_view> tokens;
    std::size_t start = 0;
    while (true) {
        std::size_t dash = text.find('-', start);
        if (dash == std::string_view::npos) {
            tokens.push_back(text.substr(start));
            break;
        }
        tokens.push_back(text.substr(start, dash - start));
        start = dash + 1;
    }
    return tokens;
}

void require_width(const LabelSet& set, const LabelSchema& schema) {
    if (set.width() != schema.size())
        throw ValidationError("label set width " + std::to_string(set.width()) +
                              " does not match schema with " +
                              std::to_string(schema.size()) + " labels");
}

}  // namespace

LabelSet parse_binary_code(std::string_view code, const LabelSchema& schema) {
    if (code.empty()) throw ParseError("empty binary code");
    const auto tokens = split_dashes(code);
    if (tokens.size() != schema.size())
        throw ParseError("binary code \"" + std::string(code) + "\" has " +
                         std::to_string(tokens.size()) + " tokens; schema expects " +
                         std::to_string(schema.size()));
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "1")
            bits |= 1u << i;
        else if (tokens[i] != "0")
            throw ParseError("binary code token " + std::to_string(i + 1) + " (\"" +
                             std::string(tokens[i]) + "\") must be \"0\" or \"1\"");
    }
    return LabelSet(schema.size(), bits);
}

std::string format_binary_code(const LabelSet& set, const LabelSchema& schema) {
    require_width(set, schema);
    std::string out;
    for (std::size_t i = 0; i < set.width(); ++i) {
        if (i > 0) out += '-';
        out += set.contains(i) ? '1' : '0';
    }
    return out;
}

std::string format_semantic_code(const LabelSet& set, const LabelSchema& schema) {
    require_width(set, schema);
    std::string out;
    for (std::size_t i = 0; i < set.width(); ++i) {
        out += set.contains(i) ? '+' : '-';
        out += schema.label(i);
    }
    return out;
}

std::string format_textual_code(const LabelSet& set, const LabelSchema& schema) {
    require_width(set, schema);
    if (set.empty()) return "None";
    std::string out;
    for (std::size_t i = 0; i < set.width(); ++i) {
        if (!set.contains(i)) continue;
        if (!out.empty()) out += '&';
        out += schema.label(i);
    }
    return out;
}

CodeTriple format_codes(const LabelSet& set, const LabelSchema& schema) {
    return CodeTriple{format_binary_code(set, schema), format_semantic_code(set, schema),
                      format_textual_code(set, schema)};
}

LabelSet make_label_set(const LabelSchema& schema,
                        std::initializer_list<std::string_view> names) {
    std::uint32_t bits = 0;
    for (auto name : names) bits |= 1u << schema.index_of(name);
    return LabelSet(schema.size(), bits);
}

// Patterns --------------------------------------------------------------------

LabelSetPattern::LabelSetPattern(std::vector<Slot> slots) : slots_(std::move(slots)) {
    if (slots_.empty()) throw ValidationError("pattern must have at least one position");
    if (slots_.size() > LabelSchema::kMaxLabels)
        throw ValidationError("pattern width exceeds " +
                              std::to_string(LabelSchema::kMaxLabels));
}

bool LabelSetPattern::matches(const LabelSet& set) const {
    if (set.width() != slots_.size())
        throw ValidationError("pattern width " + std::to_string(slots_.size()) +
                              " does not match label set width " +
                              std::to_string(set.width()));
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        switch (slots_[i]) {
            case Slot::absent:
                if (set.contains(i)) return false;
                break;
            case Slot::present:
                if (!set.contains(i)) return false;
                break;
            case Slot::any:
                break;
        }
    }
    return true;
}

std::size_t LabelSetPattern::wildcard_count() const noexcept {
    return static_cast<std::size_t>(
        std::count(slots_.begin(), slots_.end(), Slot::any));
}

std::string LabelSetPattern::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < slots_.size(); ++i) {
        if (i > 0) out += '-';
        switch (slots_[i]) {
            case Slot::absent: out += '0'; break;
            case Slot::present: out += '1'; break;
            case Slot::any: out += '*'; break;
        }
    }
    return out;
}

LabelSetPattern parse_pattern(std::string_view text, const LabelSchema& schema) {
    if (text.empty()) throw ParseError("empty pattern");
    const auto tokens = split_dashes(text);
    if (tokens.size() != schema.size())
        throw ParseError("pattern \"" + std::string(text) + "\" has " +
                         std::to_string(tokens.size()) + " tokens; schema expects " +
                         std::to_string(schema.size()));
    std::vector<LabelSetPattern::Slot> slots;
    slots.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "0")
            slots.push_back(LabelSetPattern::Slot::absent);
        else if (tokens[i] == "1")
            slots.push_back(LabelSetPattern::Slot::present);
        else if (tokens[i] == "*")
            slots.push_back(LabelSetPattern::Slot::any);
        else
            throw ParseError("pattern token " + std::to_string(i + 1) + " (\"" +
                             std::string(tokens[i]) + "\") must be \"0\", \"1\" or \"*\"");
    }
    return LabelSetPattern(std::move(slots));
}

std::vector<LabelGroup> si_sa_groups(const LabelSchema& schema) {
    if (schema.size() < 2)
        throw ValidationError("group preset requires a schema with at least two labels");
    std::vector<LabelGroup> groups;
    for (int first = 0; first <= 1; ++first) {
        for (int second = 0; second <= 1; ++second) {
            std::vector<LabelSetPattern::Slot> slots(schema.size(),
                                                     LabelSetPattern::Slot::any);
            slots[0] = first ? LabelSetPattern::Slot::present : LabelSetPattern::Slot::absent;
            slots[1] = second ? LabelSetPattern::Slot::present : LabelSetPattern::Slot::absent;
            std::string name;
            name += first ? '+' : '-';
            name += schema.label(0);
            name += second ? '+' : '-';
            name += schema.label(1);
            name += '*';
            groups.push_back(LabelGroup{std::move(name), LabelSetPattern(std::move(slots))});
        }
    }
    return groups;
}

}  // namespace mlceval
