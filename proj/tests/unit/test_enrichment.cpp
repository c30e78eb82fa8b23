#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "test_support.hpp"
#include "untrue/errors.hpp"
#include "untrue/language.hpp"
#include "untrue/text.hpp"

using namespace untrue;
using namespace testing_support;

namespace {

const char* kPortugueseParagraph =
    "O governo federal anunciou nesta semana que vai ampliar o programa de vacinação nas escolas públicas de "
    "todo o país. Segundo o ministério, a medida deve alcançar milhões de estudantes até o fim do próximo ano.";

const char* kGermanParagraph =
    "Die Bundesregierung hat in dieser Woche angekündigt, dass die Förderung für Schulen in ländlichen Regionen "
    "deutlich erhöht werden soll. Nach Angaben des Ministeriums profitieren davon vor allem kleinere Gemeinden.";

class FailingProvider : public TranslationProvider {
public:
    std::string name() const override { return "failing"; }
    Translation translate(std::string_view, std::string_view, std::string_view) override {
        throw TranslationError("quota exceeded");
    }
};

class CountingProvider : public TranslationProvider {
public:
    std::string name() const override { return "counting"; }
    Translation translate(std::string_view text, std::string_view, std::string_view to) override {
        ++calls;
        return {std::string(to) + ":" + std::string(text), std::string(kTranslated)};
    }
    std::atomic<int> calls{0};
};

// Every alias occurrence on word boundaries, then a greedy pick of the longest,
// leftmost, smallest-id span that does not overlap anything already chosen.
std::vector<EntityMention> oracle_link(const std::string& text_utf8,
                                       const std::vector<std::pair<std::string, std::string>>& aliases) {
    auto original = text::decode_utf8(text_utf8);
    auto folded = text::to_lower(original);
    struct Span {
        std::size_t start, end;
        std::string id;
    };
    std::vector<Span> spans;
    for (const auto& [id, alias] : aliases) {
        auto a = text::to_lower(text::decode_utf8(alias));
        for (std::size_t s = 0; s + a.size() <= folded.size(); ++s) {
            if (folded.compare(s, a.size(), a) != 0) continue;
            if (s > 0 && text::is_alnum(folded[s - 1])) continue;
            if (s + a.size() < folded.size() && text::is_alnum(folded[s + a.size()])) continue;
            spans.push_back({s, s + a.size(), id});
        }
    }
    std::sort(spans.begin(), spans.end(), [](const Span& x, const Span& y) {
        if (x.end - x.start != y.end - y.start) return x.end - x.start > y.end - y.start;
        if (x.start != y.start) return x.start < y.start;
        return x.id < y.id;
    });
    std::vector<Span> chosen;
    for (const auto& s : spans) {
        bool overlaps = std::any_of(chosen.begin(), chosen.end(),
                                    [&](const Span& c) { return s.start < c.end && c.start < s.end; });
        if (!overlaps) chosen.push_back(s);
    }
    std::sort(chosen.begin(), chosen.end(), [](const Span& x, const Span& y) { return x.start < y.start; });
    std::vector<EntityMention> out;
    for (const auto& c : chosen) {
        out.push_back({text::encode_utf8(std::u32string_view(original).substr(c.start, c.end - c.start)), c.start,
                       c.end, c.id, 1.0});
    }
    return out;
}

}  // namespace

TEST(Language, Examples) {
    EXPECT_EQ(detect_language("Crime in Germany is up 10% plus since migrants were accepted").language, "en");
    auto empty = detect_language("");
    EXPECT_EQ(empty.language, "und");
    EXPECT_EQ(empty.confidence, 0.0);
    EXPECT_GE(text::codepoint_length(kPortugueseParagraph), 200u);
    EXPECT_EQ(detect_language(kPortugueseParagraph).language, "pt");
    EXPECT_EQ(detect_language(kGermanParagraph).language, "de");
}

TEST(Language, ShortTextUndetermined) {
    EXPECT_EQ(detect_language("Alles gelogen").language, "und");
    EXPECT_EQ(detect_language("1234567890123456789012345").language, "und");
}

TEST(Language, ConfidenceInRangeAndDeterministic) {
    for (const char* s : {kPortugueseParagraph, kGermanParagraph, "Refugees receive larger welfare checks"}) {
        auto a = detect_language(s);
        auto b = detect_language(s);
        EXPECT_EQ(a.language, b.language);
        EXPECT_EQ(a.confidence, b.confidence);
        EXPECT_GE(a.confidence, 0.0);
        EXPECT_LE(a.confidence, 1.0);
    }
    EXPECT_EQ(LanguageDetector::builtin().languages(), (std::vector<std::string>{"de", "en", "pt"}));
}

TEST(Language, FixtureClaimsMatchTemplateLanguage) {
    auto registry = TemplateRegistry::load_directory(data_dir() / "templates");
    auto archive = load_archive(fixture_dir() / "extraction" / "archive.jsonl");
    auto out = ingest_documents(archive.documents, registry);
    for (const auto& r : out.records) {
        auto guess = detect_language(r.claim_text);
        if (guess.language == kUndetermined) continue;
        EXPECT_EQ(guess.language, registry.find(r.source_id)->default_language) << r.claim_text;
    }
}

TEST(Linking, GretaExample) {
    EntityGazetteer g;
    g.add("greta_thunberg", "Greta Thunberg", "en");
    auto m = link_entities("Greta Thunberg in Austria", g);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].start, 0u);
    EXPECT_EQ(m[0].end, 14u);
    EXPECT_EQ(m[0].surface, "Greta Thunberg");
    EXPECT_EQ(m[0].confidence, 1.0);
    EXPECT_TRUE(link_entities("", g).empty());
}

TEST(Linking, LongerAliasWins) {
    EntityGazetteer g;
    g.add("donald_trump", "Donald Trump", "en");
    g.add("donald_trump", "Trump", "en");
    auto m = link_entities("Donald Trump said so", g);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].surface, "Donald Trump");
    EXPECT_EQ(link_entities("Trump; later Donald Trump", g).size(), 2u);
}

TEST(Linking, WordBoundariesAndCodePointOffsets) {
    EntityGazetteer g;
    g.add("germany", "Alemanha", "pt");
    g.add("mec", "MEC", "pt");
    EXPECT_TRUE(link_entities("Alemanhas mecânica", g).empty());
    auto m = link_entities("Ação na ALEMANHA", g);
    ASSERT_EQ(m.size(), 1u);
    EXPECT_EQ(m[0].start, 8u);
    EXPECT_EQ(m[0].surface, "ALEMANHA");
}

TEST(Linking, MatchesBruteForceOracle) {
    std::vector<std::pair<std::string, std::string>> aliases = {
        {"a", "new york"}, {"b", "york"}, {"c", "new york times"}, {"d", "times"},
        {"e", "são paulo"}, {"f", "paulo"}, {"g", "york times"}, {"h", "new"}};
    EntityGazetteer g;
    for (const auto& [id, alias] : aliases) g.add(id, alias, "en");
    std::vector<std::string> words = {"new", "york", "times", "São", "paulo", "NEW", "Yorkshire", "x", "-", "são"};
    std::mt19937 rng(42);
    for (int trial = 0; trial < 500; ++trial) {
        std::string s;
        int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            if (i) s += (rng() % 4 == 0) ? ", " : " ";
            s += words[rng() % words.size()];
        }
        auto got = link_entities(s, g);
        auto want = oracle_link(s, aliases);
        ASSERT_EQ(got, want) << s;
    }
}

TEST(Linking, GazetteerLoading) {
    auto g = EntityGazetteer::load(data_dir() / "gazetteer.json");
    ASSERT_TRUE(g.aliases_of("germany"));
    EXPECT_EQ(g.aliases_of("germany")->size(), 3u);
    EXPECT_THROW(EntityGazetteer::from_json(nlohmann::json{{"x", nlohmann::json::object()}}), ConfigError);
    EXPECT_THROW(EntityGazetteer::from_json(nlohmann::json{{"x", {{"en", {""}}}}}), ConfigError);
}

TEST(Translation, SameLanguageRejected) {
    TranslationService service(std::make_shared<IdentityProvider>());
    EXPECT_THROW(translate("x", "en", "en", service), std::invalid_argument);
}

TEST(Translation, IdentityProvider) {
    TranslationService service(std::make_shared<IdentityProvider>());
    auto t = translate("anything at all", "en", "pt", service);
    EXPECT_EQ(t.text, "anything at all");
    EXPECT_EQ(t.provenance, "untranslated");
}

TEST(Translation, DictionaryProvider) {
    auto dict = std::make_shared<DictionaryProvider>();
    dict->add("en", "pt", "refugees", "refugiados");
    TranslationService service(dict);
    auto t = translate("refugees", "en", "pt", service);
    EXPECT_EQ(t.text, "refugiados");
    EXPECT_EQ(t.provenance, "translated");
    EXPECT_EQ(translate("Refugees arrive", "en", "pt", service).text, "refugiados arrive");
    EXPECT_EQ(translate("nothing here", "en", "pt", service).provenance, "untranslated");
    EXPECT_EQ(translate("refugees", "en", "de", service).provenance, "untranslated");
}

TEST(Translation, ShippedDictionaryLongestPhraseFirst) {
    auto dict = DictionaryProvider::load(data_dir() / "dictionary.json");
    auto t = dict->translate("Crime in Germany is up 10% plus since migrants were accepted", "en", "pt");
    EXPECT_EQ(t.text, "O crime na Alemanha aumentou mais de 10% desde que os migrantes foram aceitos");
}

TEST(Translation, CacheCoherence) {
    auto provider = std::make_shared<CountingProvider>();
    TranslationService service(provider);
    auto a = service.translate("hello", "en", "pt");
    auto b = service.translate("hello", "en", "pt");
    EXPECT_EQ(a, b);
    EXPECT_EQ(provider->calls, 1);
    EXPECT_EQ(service.provider_calls(), 1u);
    service.translate("hello", "en", "de");
    EXPECT_EQ(provider->calls, 2);
}

TEST(Translation, CacheCoherenceUnderConcurrency) {
    auto provider = std::make_shared<CountingProvider>();
    TranslationService service(provider);
    std::vector<std::thread> threads;
    std::vector<Translation> results(8);
    for (int i = 0; i < 8; ++i) {
        threads.emplace_back([&, i] {
            for (int k = 0; k < 50; ++k) results[i] = service.translate("t" + std::to_string(k % 5), "en", "pt");
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& r : results) EXPECT_EQ(r, results[0]);
    EXPECT_GE(provider->calls, 5);
    EXPECT_LE(provider->calls, 5 * 8);
    EXPECT_EQ(service.translate("t0", "en", "pt").text, "pt:t0");
}

TEST(Translation, ProviderFailureNotCached) {
    TranslationService service(std::make_shared<FailingProvider>());
    EXPECT_THROW(service.translate("x", "en", "pt"), TranslationError);
    EXPECT_THROW(service.translate("x", "en", "pt"), TranslationError);
}

TEST(Enrich, CorrectivShortClaimFallsBackToGerman) {
    auto r = make_record("Alles gelogen", "Kurz", "https://correctiv.org/x", "correctiv", "DE");
    auto c = enrich(r, Verdict::False, EntityGazetteer{}, "de");
    EXPECT_EQ(c.language, "de");
}

TEST(Enrich, YearFromDate) {
    auto r = make_record("Some claim text that is long enough", "t", "https://snopes.com/x");
    r.date_published = CalendarDate{2016, 3, 1};
    EXPECT_EQ(enrich(r, Verdict::True, EntityGazetteer{}).year, 2016);
    r.date_published.reset();
    EXPECT_FALSE(enrich(r, Verdict::True, EntityGazetteer{}).year);
}

TEST(Enrich, EntitiesWithOffsets) {
    auto g = EntityGazetteer::load(data_dir() / "gazetteer.json");
    auto r = make_record("Crime in Germany is up 10% plus since migrants were accepted", "t", "https://snopes.com/x");
    auto c = enrich(r, Verdict::False, g, "en");
    ASSERT_EQ(c.entities.size(), 2u);
    EXPECT_EQ(c.entities[0].entity_id, "germany");
    EXPECT_EQ(c.entities[0].start, 9u);
    EXPECT_EQ(c.entities[1].entity_id, "refugees");
    EXPECT_EQ(c.entities[1].surface, "migrants");
    EXPECT_TRUE(c.translations.empty());
    EXPECT_EQ(check_enriched_claim(c), "");
}

TEST(Enrich, DeterministicAndSoundOverDemoCorpus) {
    auto g = EntityGazetteer::load(data_dir() / "gazetteer.json");
    auto registry = TemplateRegistry::load_directory(data_dir() / "templates");
    auto out = ingest_documents(load_archive(data_dir() / "demo" / "archive.jsonl").documents, registry);
    ASSERT_FALSE(out.records.empty());
    for (const auto& r : out.records) {
        auto lang = registry.find(r.source_id)->default_language;
        auto a = enrich(r, Verdict::Other, g, lang);
        auto b = enrich(r, Verdict::Other, g, lang);
        EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
        EXPECT_EQ(check_enriched_claim(a), "") << r.claim_text;
        auto cps = text::decode_utf8(r.claim_text);
        for (const auto& m : a.entities) {
            EXPECT_EQ(text::encode_utf8(cps.substr(m.start, m.end - m.start)), m.surface);
        }
    }
}

TEST(Enrich, InvariantViolationsDetected) {
    auto c = enrich(make_record("Germany in the news today again", "t", "https://snopes.com/x"), Verdict::True,
                    EntityGazetteer::load(data_dir() / "gazetteer.json"), "en");
    auto bad = c;
    bad.language = "english";
    EXPECT_NE(check_enriched_claim(bad), "");
    bad = c;
    bad.translations["en"] = "x";
    EXPECT_NE(check_enriched_claim(bad), "");
    bad = c;
    bad.entities[0].end = 500;
    EXPECT_NE(check_enriched_claim(bad), "");
    auto round = nlohmann::json(c).get<EnrichedClaim>();
    EXPECT_EQ(round, c);
}
