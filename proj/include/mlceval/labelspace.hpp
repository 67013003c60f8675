#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mlceval/errors.hpp"

namespace mlceval {

// Ordered label universe. The order is significant: it fixes bit positions,
// every code notation, and the canonical power-set ordering.
//
// Label names must be non-empty and unique (case-sensitive) and may not
// contain '&', '+', '-', '*' or whitespace, so the binary, semantic and
// textual notations stay unambiguous.
class LabelSchema {
public:
    static constexpr std::size_t kMaxLabels = 16;

    explicit LabelSchema(std::vector<std::string> labels);

    // The default four-factor schema: SI, SA, ES, NSSI in exactly this order.
    static const LabelSchema& suicidality();

    std::size_t size() const noexcept { return labels_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t pos) const { return labels_.at(pos); }

    std::optional<std::size_t> find(std::string_view name) const noexcept;
    std::size_t index_of(std::string_view name) const;  // throws on unknown name

    // Stable FNV-1a hash of the ordered label names, as 16 hex digits.
    const std::string& digest() const noexcept { return digest_; }

    friend bool operator==(const LabelSchema& a, const LabelSchema& b) {
        return a.labels_ == b.labels_;
    }

private:
    std::vector<std::string> labels_;
    std::string digest_;
};

// One subset of the schema's labels: bit i set <=> label at position i present.
// Immutable value type; all mutators return a new set.
class LabelSet {
public:
    LabelSet() = default;
    LabelSet(std::size_t width, std::uint32_t bits = 0);

    static LabelSet full(std::size_t width);

    std::size_t width() const noexcept { return width_; }
    std::uint32_t bits() const noexcept { return bits_; }
    bool contains(std::size_t pos) const;
    LabelSet with(std::size_t pos, bool present) const;
    std::size_t cardinality() const noexcept;
    bool empty() const noexcept { return bits_ == 0; }

    LabelSet intersect(const LabelSet& other) const;
    LabelSet minus(const LabelSet& other) const;
    LabelSet unite(const LabelSet& other) const;
    LabelSet complement() const;
    bool subset_of(const LabelSet& other) const;

    // Numeric value of the binary code, reading position 0 (the first schema
    // label) as the most significant bit. Breaks cardinality ties in the
    // canonical ordering.
    std::uint32_t code_value() const noexcept;

    friend bool operator==(const LabelSet&, const LabelSet&) = default;

private:
    void require_same_width(const LabelSet& other) const;

    std::size_t width_ = 0;
    std::uint32_t bits_ = 0;
};

// All M = 2^L subsets in canonical order: ascending cardinality, ties broken
// by ascending binary-code value. Every strict superset of a set appears
// strictly later than the set itself.
class PowerSetOrder {
public:
    explicit PowerSetOrder(std::size_t width);

    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return sets_.size(); }
    const LabelSet& at(std::size_t index) const { return sets_.at(index); }
    std::size_t index_of(const LabelSet& set) const;
    const std::vector<LabelSet>& sets() const noexcept { return sets_; }

private:
    std::size_t width_;
    std::vector<LabelSet> sets_;
    std::vector<std::size_t> index_by_bits_;
};

PowerSetOrder enumerate_powerset(const LabelSchema& schema);

// Per-position tri-state pattern; '*' positions match either bit.
class LabelSetPattern {
public:
    enum class Slot : std::uint8_t { absent, present, any };

    explicit LabelSetPattern(std::vector<Slot> slots);

    std::size_t width() const noexcept { return slots_.size(); }
    Slot slot(std::size_t pos) const { return slots_.at(pos); }
    bool matches(const LabelSet& set) const;
    std::size_t wildcard_count() const noexcept;
    std::string to_string() const;  // "0-1-0-*"

private:
    std::vector<Slot> slots_;
};

struct LabelGroup {
    std::string name;
    LabelSetPattern pattern;
};

// Codes and patterns ---------------------------------------------------------

struct CodeTriple {
    std::string binary;    // "1-0-1-0"
    std::string semantic;  // "+SI-SA+ES-NSSI"
    std::string textual;   // "SI&ES", or "None" for the empty set
};

LabelSet parse_binary_code(std::string_view code, const LabelSchema& schema);

std::string format_binary_code(const LabelSet& set, const LabelSchema& schema);
std::string format_semantic_code(const LabelSet& set, const LabelSchema& schema);
std::string format_textual_code(const LabelSet& set, const LabelSchema& schema);
CodeTriple format_codes(const LabelSet& set, const LabelSchema& schema);

LabelSet make_label_set(const LabelSchema& schema,
                        std::initializer_list<std::string_view> names);

LabelSetPattern parse_pattern(std::string_view text, const LabelSchema& schema);

// The four groups over the first two schema positions ("-SI-SA*", "-SI+SA*",
// "+SI-SA*", "+SI+SA*" for the default schema), wildcards everywhere else.
// They partition the powerset. Requires L >= 2.
std::vector<LabelGroup> si_sa_groups(const LabelSchema& schema);

}  // namespace mlceval
