#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace untrue {

enum class Verdict { True, False, Mixed, Other };

inline constexpr std::array<Verdict, 4> kAllVerdicts = {Verdict::True, Verdict::False, Verdict::Mixed,
                                                        Verdict::Other};

/// "true" | "false" | "mixed" | "other"
std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view s);

struct RatingInfo {
    std::optional<double> rating_value;
    std::optional<double> best_rating;
    std::optional<double> worst_rating;
    std::optional<std::string> rating_label;

    bool has_numeric_triple() const { return rating_value && best_rating && worst_rating; }
};

/// Verdict for each of the five equally spaced buckets of the normalized
/// position p in [0, 1]: {0, 0.25, 0.5, 0.75, 1}.
///
/// The default policy only calls the scale endpoints TRUE or FALSE, since those
/// are the only positions that describe a claim as completely accurate or
/// completely false. Everything in between is MIXED.
struct NumericPolicy {
    std::array<Verdict, 5> buckets = {Verdict::False, Verdict::Mixed, Verdict::Mixed, Verdict::Mixed,
                                      Verdict::True};
};

/// Index (0..4) of the bucket nearest to p. Ties go to the bucket nearer 0.5.
int nearest_bucket(double p);

/// Requires a complete, valid numeric triple; throws std::invalid_argument
/// otherwise (including a degenerate scale where best == worst).
Verdict normalize_numeric(const RatingInfo& r, const NumericPolicy& policy = {});

/// Case-insensitive, whitespace-trimmed label table. A label can only ever map
/// to one verdict, whichever language it was registered under.
class LabelLexicon {
public:
    /// Throws ConfigError if `label` already maps to a different verdict.
    void add(std::string_view language, std::string_view label, Verdict verdict);

    std::optional<Verdict> lookup(std::string_view label) const;

    /// language -> label -> verdict, labels in normalized form.
    const std::map<std::string, std::map<std::string, Verdict>>& by_language() const { return by_language_; }
    std::size_t size() const { return labels_.size(); }

    /// English and Portuguese labels used by the agencies in the default registry.
    static LabelLexicon seed();

    /// {"en": {"mostly true": "mixed", ...}, "pt": {...}}
    static LabelLexicon load(const std::filesystem::path& path);

    static std::string normalize_key(std::string_view label);

private:
    std::map<std::string, std::map<std::string, Verdict>> by_language_;
    std::map<std::string, Verdict> labels_;
};

/// Total: unknown or empty labels give OTHER.
Verdict normalize_label(std::string_view label, const LabelLexicon& lexicon);

/// Numeric triple first (when complete and valid), then the label, else OTHER.
/// Never throws.
Verdict normalize(const RatingInfo& r, const LabelLexicon& lexicon, const NumericPolicy& policy = {});

}  // namespace untrue
