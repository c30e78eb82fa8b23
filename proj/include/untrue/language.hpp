#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace untrue {

inline constexpr std::string_view kUndetermined = "und";

struct LanguageGuess {
    std::string language;  // ISO 639-1 or "und"
    double confidence = 0.0;
};

/// Character-trigram naive Bayes over a fixed set of languages. Profiles are
/// built from reference text at construction, so classification is a pure
/// function of the input.
class LanguageDetector {
public:
    static constexpr std::size_t kMinChars = 20;

    /// language code -> reference text
    explicit LanguageDetector(const std::map<std::string, std::string>& references);

    /// Detector for {en, pt, de} built from the bundled reference text.
    static const LanguageDetector& builtin();

    LanguageGuess detect(std::string_view text) const;

    std::vector<std::string> languages() const;

private:
    struct Profile {
        std::map<std::u32string, double> log_prob;
        double unseen_log_prob = 0.0;
    };

    std::map<std::string, Profile> profiles_;
};

/// Trigrams of the lowercased letter sequence, word-padded with spaces.
std::vector<std::u32string> char_trigrams(std::string_view text);

inline LanguageGuess detect_language(std::string_view text) { return LanguageDetector::builtin().detect(text); }

bool is_language_code(std::string_view code);

}  // namespace untrue
