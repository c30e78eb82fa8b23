#include "untrue/language.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "untrue/text.hpp"

namespace untrue {

namespace {

// Reference text for the bundled profiles. Written for this project in the
// register of fact-check reporting; any prose in the right language works.
constexpr std::string_view kEnglishReference =
    "The claim that crime in the country has risen sharply since the new policy was introduced is not "
    "supported by the official statistics. According to the police report published this year, the number "
    "of recorded offences actually fell, and the figures quoted in the post were taken out of context. "
    "We contacted the office of the politician who shared the message, but they did not respond to our "
    "request for comment before publication. Several social media users have been sharing a video which "
    "they say shows the president making the statement, although the footage was edited and the original "
    "speech was about a different subject. It is true that the government transferred millions of dollars "
    "to the ministry, however the money was also used by other departments. This is why we rated the "
    "statement as partly true. Readers should always check where a story comes from and whether other "
    "reliable sources have reported the same thing. The picture that went viral on the internet last week "
    "was first published several years ago and has nothing to do with the recent events. Experts who "
    "study the economy told us that the numbers would have to be much higher for the claim to be accurate. "
    "The rumour spread quickly through messaging apps, where it was forwarded thousands of times without "
    "any evidence. There is no record of the law being passed, and the parliament website shows that the "
    "vote never took place. When we asked for the source of the information, the author pointed to a blog "
    "that has published false stories before. The senator said during an interview on the evening news "
    "that the plan would create jobs for every worker in the region, which our analysis could not confirm.";

constexpr std::string_view kPortugueseReference =
    "A afirmação de que o crime no país aumentou muito desde que a nova política foi adotada não é "
    "confirmada pelos dados oficiais. Segundo o relatório da polícia publicado neste ano, o número de "
    "ocorrências registradas caiu, e os números citados na publicação foram tirados de contexto. Nós "
    "procuramos a assessoria do político que compartilhou a mensagem, mas não houve resposta até a "
    "publicação desta checagem. Vários usuários das redes sociais estão compartilhando um vídeo que, "
    "segundo eles, mostra o presidente fazendo a declaração, porém as imagens foram editadas e o discurso "
    "original tratava de outro assunto. É verdade que o governo federal transferiu milhões de reais para o "
    "ministério, mas o dinheiro também foi usado por outras pastas. Por isso classificamos a declaração "
    "como exagerada. Os leitores devem sempre verificar de onde vem uma notícia e se outras fontes "
    "confiáveis publicaram a mesma informação. A foto que viralizou na internet na semana passada foi "
    "publicada pela primeira vez há vários anos e não tem relação com os acontecimentos recentes. "
    "Especialistas em economia disseram que os números teriam de ser muito maiores para que a afirmação "
    "fosse correta. O boato se espalhou rapidamente pelos aplicativos de mensagens, onde foi encaminhado "
    "milhares de vezes sem nenhuma prova. Não existe registro de que a lei tenha sido aprovada, e o site "
    "da Câmara mostra que a votação nunca aconteceu. Quando pedimos a fonte da informação, o autor indicou "
    "um blog que já publicou notícias falsas antes. O senador disse em entrevista ao jornal da noite que o "
    "plano criaria empregos para todos os trabalhadores da região, o que a nossa análise não confirmou.";

constexpr std::string_view kGermanReference =
    "Die Behauptung, dass die Kriminalität im Land seit der Einführung der neuen Politik stark gestiegen "
    "ist, wird von den offiziellen Statistiken nicht gestützt. Laut dem in diesem Jahr veröffentlichten "
    "Bericht der Polizei ist die Zahl der erfassten Straftaten sogar gesunken, und die Zahlen in dem "
    "Beitrag wurden aus dem Zusammenhang gerissen. Wir haben das Büro des Politikers, der die Nachricht "
    "geteilt hat, um eine Stellungnahme gebeten, aber bis zur Veröffentlichung keine Antwort erhalten. "
    "Mehrere Nutzer in sozialen Netzwerken verbreiten ein Video, das angeblich den Präsidenten bei dieser "
    "Aussage zeigt, doch die Aufnahmen wurden geschnitten und die ursprüngliche Rede handelte von einem "
    "anderen Thema. Es stimmt, dass die Regierung Millionen Euro an das Ministerium überwiesen hat, "
    "allerdings wurde das Geld auch von anderen Behörden verwendet. Deshalb bewerten wir die Aussage als "
    "teilweise falsch. Leser sollten immer prüfen, woher eine Geschichte stammt und ob andere seriöse "
    "Quellen darüber berichtet haben. Das Bild, das letzte Woche im Internet viral ging, wurde schon vor "
    "mehreren Jahren veröffentlicht und hat nichts mit den aktuellen Ereignissen zu tun. Fachleute für "
    "Wirtschaft sagten uns, dass die Zahlen viel höher sein müssten, damit die Behauptung stimmt. Das "
    "Gerücht verbreitete sich schnell über Messenger, wo es tausendfach ohne jeden Beleg weitergeleitet "
    "wurde. Es gibt keinen Nachweis, dass das Gesetz beschlossen wurde, und die Internetseite des "
    "Bundestages zeigt, dass die Abstimmung nie stattgefunden hat. Als wir nach der Quelle fragten, "
    "verwies der Autor auf einen Blog, der schon früher falsche Geschichten veröffentlicht hat.";

bool is_letter(char32_t cp) { return text::is_alnum(cp) && !(cp >= U'0' && cp <= U'9'); }

}  // namespace

std::vector<std::u32string> char_trigrams(std::string_view input) {
    std::vector<std::u32string> out;
    std::u32string word;
    auto flush = [&]() {
        if (word.empty()) return;
        std::u32string padded = U" " + word + U" ";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) out.push_back(padded.substr(i, 3));
        word.clear();
    };
    for (char32_t cp : text::decode_utf8(input)) {
        if (is_letter(cp)) {
            word.push_back(text::to_lower(cp));
        } else {
            flush();
        }
    }
    flush();
    return out;
}

LanguageDetector::LanguageDetector(const std::map<std::string, std::string>& references) {
    std::map<std::string, std::map<std::u32string, std::size_t>> counts;
    std::set<std::u32string> vocabulary;
    for (const auto& [lang, reference] : references) {
        auto& c = counts[lang];
        for (auto& g : char_trigrams(reference)) {
            ++c[g];
            vocabulary.insert(g);
        }
    }
    // Add-one smoothing over the shared vocabulary plus one unseen slot.
    double v = static_cast<double>(vocabulary.size() + 1);
    for (const auto& [lang, c] : counts) {
        double total = 0;
        for (const auto& [g, n] : c) total += static_cast<double>(n);
        Profile profile;
        for (const auto& [g, n] : c) profile.log_prob[g] = std::log((static_cast<double>(n) + 1.0) / (total + v));
        profile.unseen_log_prob = std::log(1.0 / (total + v));
        profiles_[lang] = std::move(profile);
    }
}

const LanguageDetector& LanguageDetector::builtin() {
    static const LanguageDetector detector({{"en", std::string(kEnglishReference)},
                                            {"pt", std::string(kPortugueseReference)},
                                            {"de", std::string(kGermanReference)}});
    return detector;
}

LanguageGuess LanguageDetector::detect(std::string_view input) const {
    auto trimmed = text::trim(input);
    if (text::codepoint_length(trimmed) < kMinChars || profiles_.empty()) return {std::string(kUndetermined), 0.0};
    auto grams = char_trigrams(trimmed);
    if (grams.empty()) return {std::string(kUndetermined), 0.0};

    std::map<std::string, double> scores;
    for (const auto& [lang, profile] : profiles_) {
        double ll = 0;
        for (const auto& g : grams) {
            auto it = profile.log_prob.find(g);
            ll += it == profile.log_prob.end() ? profile.unseen_log_prob : it->second;
        }
        scores[lang] = ll;
    }
    auto best = scores.begin();
    for (auto it = scores.begin(); it != scores.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    // Posterior of the winner using the per-trigram (geometric mean) likelihood.
    double n = static_cast<double>(grams.size());
    double denom = 0;
    for (const auto& [lang, ll] : scores) denom += std::exp((ll - best->second) / n);
    return {best->first, 1.0 / denom};
}

std::vector<std::string> LanguageDetector::languages() const {
    std::vector<std::string> out;
    for (const auto& [lang, profile] : profiles_) out.push_back(lang);
    return out;
}

bool is_language_code(std::string_view code) {
    if (code == kUndetermined) return true;
    return code.size() == 2 && std::islower(static_cast<unsigned char>(code[0])) &&
           std::islower(static_cast<unsigned char>(code[1]));
}

}  // namespace untrue
