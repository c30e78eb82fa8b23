#!/usr/bin/env python3
"""Writes the fixture archives and their golden claim records.

The golden records are computed here from the page descriptions, not by
parsing the generated HTML, so they act as an independent check on the
extractor.  Run from anywhere; outputs land next to this script and in
data/demo.
"""

import base64
import hashlib
import html
import json
import pathlib

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parent.parent

FETCHED_AT = "2020-02-01T12:00:00Z"
HEADER = {"archive": "untrue-fixture", "version": 1}

COUNTRY = {
    "fullfact": "GB", "snopes": "US", "politifact": "US", "truthorfiction": "US", "checkyourfact": "US",
    "lupa": "BR", "aosfatos": "BR", "apublica": "BR", "g1": "BR", "efarsas": "BR",
    "dpa": "DE", "correctiv": "DE",
}

MONTHS = ["January", "February", "March", "April", "May", "June", "July", "August", "September", "October",
          "November", "December"]


def record_id(url, claim):
    return hashlib.sha256((url + "\n" + claim).encode("utf-8")).hexdigest()


def dump_record(rec):
    return json.dumps(rec, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def archive_line(url, body, status=200, content_type="text/html; charset=utf-8"):
    raw = body if isinstance(body, bytes) else body.encode("utf-8")
    return json.dumps({
        "url": url,
        "fetched_at": FETCHED_AT,
        "http_status": status,
        "content_type": content_type,
        "body_base64": base64.b64encode(raw).decode("ascii"),
    }, ensure_ascii=False, separators=(",", ":"))


def expected(source, claim, title, url, date=None, claimant=None, value=None, best=None, worst=None, label=None):
    rec = {
        "record_id": record_id(url, claim),
        "claim_text": claim,
        "review_title": title,
        "review_url": url,
        "source_id": source,
        "country": COUNTRY[source],
    }
    if claimant is not None:
        rec["claimant"] = claimant
    if date is not None:
        rec["date_published"] = date
    if value is not None:
        rec["rating_value"] = float(value)
    if best is not None:
        rec["best_rating"] = float(best)
    if worst is not None:
        rec["worst_rating"] = float(worst)
    if label is not None:
        rec["rating_label"] = label
    return rec


def claim_review(claim, title, url, date=None, claimant=None, value=None, best=None, worst=None, label=None,
                 title_key="name"):
    review = {
        "@context": "https://schema.org",
        "@type": "ClaimReview",
        "claimReviewed": claim,
        title_key: title,
        "url": url,
    }
    if date is not None:
        review["datePublished"] = date
    item = {"@type": "Claim"}
    if claimant is not None:
        item["author"] = {"@type": "Person", "name": claimant}
    review["itemReviewed"] = item
    rating = {"@type": "Rating"}
    if value is not None:
        rating["ratingValue"] = value
    if best is not None:
        rating["bestRating"] = best
    if worst is not None:
        rating["worstRating"] = worst
    if label is not None:
        rating["alternateName"] = label
    review["reviewRating"] = rating
    return review


def page(title, body, head_extra=""):
    return ("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + html.escape(title) + "</title>"
            + head_extra + "</head>\n<body>\n" + body + "\n</body></html>\n")


def jsonld_page(reviews, page_title="Fact check", extra_blocks=()):
    scripts = "".join('<script type="application/ld+json">' + b + "</script>" for b in extra_blocks)
    payload = reviews if isinstance(reviews, (list, dict)) else reviews
    scripts += '<script type="application/ld+json">' + json.dumps(payload, ensure_ascii=False) + "</script>"
    return page(page_title, "<article><p>Full review text.</p></article>", scripts)


def microdata_page(claim, title, url, date=None, claimant=None, value=None, best=None, worst=None, label=None,
                   head_extra="", date_attr=None):
    a = ['<div itemscope itemtype="https://schema.org/ClaimReview">',
         '<h1 itemprop="name">' + html.escape(title) + "</h1>",
         '<link itemprop="url" href="' + html.escape(url) + '">']
    if date is not None:
        a.append('<time itemprop="datePublished" datetime="' + (date_attr or date) + '">' + date + "</time>")
    a.append('<div itemprop="itemReviewed" itemscope itemtype="https://schema.org/Claim">')
    if claimant is not None:
        a.append('<span itemprop="author" itemscope itemtype="https://schema.org/Person">'
                 '<span itemprop="name">' + html.escape(claimant) + "</span></span>")
    a.append("</div>")
    a.append('<blockquote itemprop="claimReviewed">' + html.escape(claim) + "</blockquote>")
    a.append('<div itemprop="reviewRating" itemscope itemtype="https://schema.org/Rating">')
    if value is not None:
        a.append('<meta itemprop="ratingValue" content="' + str(value) + '">')
    if best is not None:
        a.append('<meta itemprop="bestRating" content="' + str(best) + '">')
    if worst is not None:
        a.append('<meta itemprop="worstRating" content="' + str(worst) + '">')
    if label is not None:
        a.append('<span itemprop="alternateName">' + html.escape(label) + "</span>")
    a.append("</div></div>")
    return page("Checagem", "\n".join(a), head_extra)


def rules_page(claim, title, canonical, date_attr=None, claimant=None, label=None):
    head = '<link rel="canonical" href="' + html.escape(canonical) + '">'
    head += '<meta property="og:title" content="' + html.escape(title) + '">'
    body = ['<h1 class="article-title">' + html.escape(title) + "</h1>"]
    if date_attr is not None:
        body.append('<time class="published" datetime="' + date_attr + '">publicado</time>')
    if claimant is not None:
        body.append('<span class="claimant">' + html.escape(claimant) + "</span>")
    body.append('<div class="claim-text">' + html.escape(claim) + "</div>")
    if label is not None:
        body.append('<span class="rating-label">' + html.escape(label) + "</span>")
    return page(title, "\n".join(body), head)


def write_archive(path, lines):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(HEADER) + "\n")
        for line in lines:
            f.write(line + "\n")


def write_golden(path, records):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(dump_record(rec) + "\n")


# --- extraction fixture --------------------------------------------------------

def extraction_fixture():
    lines, golden = [], []

    # 1. politifact, JSON-LD, label only.
    url = "https://www.politifact.com/factchecks/2018/jun/19/donald-trump/crime-germany/"
    claim = "Crime in Germany is up 10% plus since migrants were accepted"
    title = "Donald Trump wrongly says crime in Germany rose after refugees arrived"
    lines.append(archive_line(url, jsonld_page(claim_review(
        claim, title, url, date="2018-06-19", claimant="Donald Trump", label="Pants on Fire!"))))
    golden.append(expected("politifact", claim, title, url, date="2018-06-19", claimant="Donald Trump",
                           label="Pants on Fire!"))

    # 2. snopes, JSON-LD inside @graph, numeric 1-5 plus label, long-form date.
    url = "https://www.snopes.com/fact-check/sweden-rape-capital/"
    claim = "Sweden is the rape capital of Europe because of refugees"
    title = "Is Sweden the Rape Capital of Europe?"
    graph = {"@context": "https://schema.org", "@graph": [
        {"@type": "WebPage", "name": "Snopes"},
        claim_review(claim, title, url, date="February 20, 2017", value=2, best=5, worst=1, label="Mostly False"),
    ]}
    lines.append(archive_line(url, jsonld_page(graph)))
    golden.append(expected("snopes", claim, title, url, date="2017-02-20", value=2, best=5, worst=1,
                           label="Mostly False"))

    # 3. fullfact, relative review url and headline instead of name.
    page_url = "https://fullfact.org/health/nhs-spending-2019/"
    claim = "NHS spending has risen every year since 2010"
    title = "NHS spending has gone up in real terms"
    lines.append(archive_line(page_url, jsonld_page(claim_review(
        claim, title, "/health/nhs-spending-2019/", date="2019-05-02", claimant="Department of Health",
        label="Correct", title_key="headline"))))
    golden.append(expected("fullfact", claim, title, page_url, date="2019-05-02", claimant="Department of Health",
                           label="Correct"))

    # 4. truthorfiction, microdata with nested Claim/Person and numeric strings.
    url = "https://www.truthorfiction.com/refugee-welfare-checks/"
    claim = "Refugees receive larger welfare checks than retired Americans"
    title = "Refugees Get Bigger Welfare Checks Than Seniors - Fiction!"
    lines.append(archive_line(url, microdata_page(claim, title, url, date="2016-09-12", claimant="Viral email",
                                                  value=1, best=5, worst=1, label="Fiction!")))
    golden.append(expected("truthorfiction", claim, title, url, date="2016-09-12", claimant="Viral email",
                           value=1, best=5, worst=1, label="Fiction!"))

    # 5. checkyourfact, one page carrying two ClaimReviews in an array.
    url_a = "https://checkyourfact.com/2019/03/04/fact-check-merkel-open-borders/"
    url_b = "https://checkyourfact.com/2019/03/04/fact-check-merkel-open-borders/#second"
    claim_a = "Angela Merkel said Germany would take in every refugee who asks"
    claim_b = "Germany accepted one million refugees in 2015"
    title_a = "FACT CHECK: Did Merkel Promise To Take In Every Refugee?"
    title_b = "FACT CHECK: Did Germany Take In One Million Refugees In 2015?"
    lines.append(archive_line(url_a, jsonld_page([
        claim_review(claim_a, title_a, url_a, date="2019-03-04", claimant="Facebook post", label="False"),
        claim_review(claim_b, title_b, url_b, date="2019-03-04", value=5, best=5, worst=1, label="True"),
    ])))
    golden.append(expected("checkyourfact", claim_a, title_a, url_a, date="2019-03-04", claimant="Facebook post",
                           label="False"))
    golden.append(expected("checkyourfact", claim_b, title_b, url_b, date="2019-03-04", value=5, best=5, worst=1,
                           label="True"))

    # 6. aosfatos, Portuguese JSON-LD, mid-scale numeric rating.
    url = "https://www.aosfatos.org/noticias/repasse-8-milhoes-ministerio-educacao/"
    claim = "O governo federal transferiu 8 milhões de dólares para o Ministério da Educação"
    title = "Carlos Menezes acerta sobre repasse de 8 milhões, mas erra ao citar só a Educação"
    lines.append(archive_line(url, jsonld_page(claim_review(
        claim, title, url, date="2019-04-22", claimant="Carlos Menezes", value=3, best=5, worst=1,
        label="Impreciso"))))
    golden.append(expected("aosfatos", claim, title, url, date="2019-04-22", claimant="Carlos Menezes",
                           value=3, best=5, worst=1, label="Impreciso"))

    # 7. lupa, Portuguese microdata, datetime attribute with an offset.
    url = "https://piui.folha.uol.com.br/lupa/2019/03/14/alemanha-deportacao-sirios/"
    claim = "A Alemanha vai deportar todos os refugiados sírios até o fim do ano"
    title = "#Verificamos: É falso que a Alemanha vai deportar todos os refugiados sírios"
    lines.append(archive_line(url, microdata_page(claim, title, url, date="2019-03-14",
                                                  date_attr="2019-03-14T09:30:00-03:00", label="Falso")))
    golden.append(expected("lupa", claim, title, url, date="2019-03-14", label="Falso"))

    # 8. g1, no markup at all: template rules fallback.
    url = "https://g1.globo.com/fato-ou-fake/noticia/2018/10/02/urna-eletronica-voto.ghtml"
    claim = "Urnas eletrônicas completam o voto automaticamente para um candidato"
    title = "É #FAKE que urna eletrônica completa voto automaticamente"
    lines.append(archive_line(url, rules_page(claim, title, url, date_attr="2018-10-02T10:00:00-03:00",
                                              claimant="Mensagem em rede social", label="#FAKE")))
    golden.append(expected("g1", claim, title, url, date="2018-10-02", claimant="Mensagem em rede social",
                           label="#FAKE"))

    # 9. correctiv, German JSON-LD with headline.
    url = "https://correctiv.org/faktencheck/2019/01/10/fluechtlinge-begruessungsgeld/"
    claim = "Flüchtlinge erhalten in Deutschland ein Begrüßungsgeld von 3000 Euro"
    title = "Nein, Flüchtlinge bekommen kein Begrüßungsgeld von 3000 Euro"
    lines.append(archive_line(url, jsonld_page(claim_review(
        claim, title, url, date="2019-01-10", claimant="Facebook-Beitrag", label="Falsch", title_key="headline"))))
    golden.append(expected("correctiv", claim, title, url, date="2019-01-10", claimant="Facebook-Beitrag",
                           label="Falsch"))

    # 10. dpa, German microdata, scale 0-4.
    url = "https://www.dpa.com/de/faktencheck/migranten-kriminalitaet-statistik/"
    claim = "Die Kriminalität von Migranten hat sich in Deutschland seit 2015 verdoppelt"
    title = "Kriminalstatistik zeigt keine Verdopplung"
    lines.append(archive_line(url, microdata_page(claim, title, url, date="2019-06-05", value=1, best=4, worst=0,
                                                  label="Größtenteils falsch")))
    golden.append(expected("dpa", claim, title, url, date="2019-06-05", value=1, best=4, worst=0,
                           label="Größtenteils falsch"))

    # 11. e-farsas, malformed JSON-LD block; the microdata on the page still counts.
    url = "https://www.e-farsas.com/o-papa-disse-que-refugiados-sao-invasores.html"
    claim = "O Papa disse que refugiados são invasores"
    title = "O Papa disse que refugiados são invasores?"
    body = microdata_page(claim, title, url, date="2017-08-30", label="Falso",
                          head_extra='<script type="application/ld+json">{"@type": "ClaimReview", "claimReviewed": </script>')
    lines.append(archive_line(url, body))
    golden.append(expected("efarsas", claim, title, url, date="2017-08-30", label="Falso"))

    # 12. apublica, body that is not UTF-8: a parse error, no records.
    url = "https://apublica.org/checagem/2018/08/pagina-quebrada/"
    lines.append(archive_line(url, b"<html><body>\xff\xfe quebrado \xc3</body></html>"))

    # 13. fullfact, raw JSON payload instead of HTML.
    url = "https://fullfact.org/immigration/net-migration-2019/"
    claim = "Net migration to the UK fell below 100,000 in 2019"
    title = "Net migration has not fallen below 100,000"
    payload = json.dumps(claim_review(claim, title, url, date="2019-11-28", label="Incorrect"), ensure_ascii=False)
    lines.append(archive_line(url, payload, content_type="application/ld+json"))
    golden.append(expected("fullfact", claim, title, url, date="2019-11-28", label="Incorrect"))

    # 14. snopes, non-200 response.
    lines.append(archive_line("https://www.snopes.com/fact-check/missing/", "<html>gone</html>", status=404))

    # 15. snopes, the page from item 2 fetched again: a duplicate.
    url = "https://www.snopes.com/fact-check/sweden-rape-capital/"
    claim = "Sweden is the rape capital of Europe because of refugees"
    lines.append(archive_line(url + "?amp=1", jsonld_page({"@context": "https://schema.org", "@graph": [
        claim_review(claim, "Is Sweden the Rape Capital of Europe?", url, date="February 20, 2017", value=2,
                     best=5, worst=1, label="Mostly False")]})))

    # 16. politifact, rating above bestRating: dropped as invalid.
    url = "https://www.politifact.com/factchecks/2019/jan/01/bad-rating/"
    lines.append(archive_line(url, jsonld_page(claim_review("A claim with a broken rating", "Broken", url,
                                                            value=9, best=5, worst=1))))

    # 17. host with no template.
    lines.append(archive_line("https://example.com/not-a-fact-checker/", jsonld_page(claim_review(
        "Unlisted site claim", "Unlisted", "https://example.com/not-a-fact-checker/", label="False"))))

    # 18. a line cut off mid-record.
    cut = archive_line("https://www.snopes.com/fact-check/truncated/", "<html></html>")
    lines.append(cut[: len(cut) // 2])

    report = {
        "documents": 17, "skipped_archive_records": 1, "unmatched_documents": 1, "non_ok_documents": 1,
        "parse_errors": 1, "malformed_blocks": 1, "dropped_invalid": 1, "duplicates": 1, "records": len(golden),
    }
    out = HERE / "extraction"
    write_archive(out / "archive.jsonl", lines)
    write_golden(out / "golden.jsonl", golden)
    with open(out / "report.json", "w", encoding="utf-8") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")


# --- demo corpus ---------------------------------------------------------------

DEMO = [
    # source, url, claim, title, date, claimant, rating(value, best, worst, label), kind
    ("politifact", "https://www.politifact.com/factchecks/2018/jun/19/donald-trump/crime-germany/",
     "Crime in Germany is up 10% plus since migrants were accepted",
     "Donald Trump wrongly says crime in Germany rose after refugees arrived",
     "2018-06-19", "Donald Trump", (None, None, None, "Pants on Fire!"), "jsonld"),
    ("aosfatos", "https://www.aosfatos.org/noticias/repasse-8-milhoes-ministerio-educacao/",
     "O governo federal transferiu 8 milhões de dólares para o Ministério da Educação",
     "Carlos Menezes acerta sobre repasse de 8 milhões, mas erra ao citar só a Educação",
     "2019-04-22", "Carlos Menezes", (3, 5, 1, "Impreciso"), "jsonld"),
    ("lupa", "https://piui.folha.uol.com.br/lupa/2019/05/08/carlos-menezes-salario-minimo/",
     "O salário mínimo teve o maior aumento real da década em 2019",
     "Carlos Menezes erra ao dizer que salário mínimo teve maior aumento da década",
     "2019-05-08", "Carlos Menezes", (None, None, None, "Falso"), "microdata"),
    ("g1", "https://g1.globo.com/fato-ou-fake/noticia/2019/06/11/carlos-menezes-escolas.ghtml",
     "Carlos Menezes inaugurou 40 escolas técnicas em seu mandato",
     "É verdade que Carlos Menezes inaugurou 40 escolas técnicas",
     "2019-06-11", None, (None, None, None, "Verdadeiro"), "rules"),
    ("lupa", "https://piui.folha.uol.com.br/lupa/2019/03/14/alemanha-deportacao-sirios/",
     "A Alemanha vai deportar todos os refugiados sírios até o fim do ano",
     "#Verificamos: É falso que a Alemanha vai deportar todos os refugiados sírios",
     "2019-03-14", None, (None, None, None, "Falso"), "microdata"),
    ("snopes", "https://www.snopes.com/fact-check/sweden-rape-capital/",
     "Sweden is the rape capital of Europe because of refugees",
     "Is Sweden the Rape Capital of Europe?",
     "2017-02-20", None, (2, 5, 1, "Mostly False"), "jsonld"),
    ("fullfact", "https://fullfact.org/health/nhs-spending-2019/",
     "NHS spending has risen every year since 2010",
     "NHS spending has gone up in real terms",
     "2019-05-02", "Department of Health", (None, None, None, "Correct"), "jsonld"),
    ("truthorfiction", "https://www.truthorfiction.com/obama-muslim-museum/",
     "Barack Obama offered to pay for a Muslim museum out of his own pocket",
     "Obama Offered To Fund Muslim Museum - Unproven!",
     "2013-10-04", None, (None, None, None, "Unproven"), "microdata"),
    ("correctiv", "https://correctiv.org/faktencheck/2019/01/10/fluechtlinge-begruessungsgeld/",
     "Flüchtlinge erhalten in Deutschland ein Begrüßungsgeld von 3000 Euro",
     "Nein, Flüchtlinge bekommen kein Begrüßungsgeld von 3000 Euro",
     "2019-01-10", "Facebook-Beitrag", (None, None, None, "Falsch"), "jsonld"),
    ("dpa", "https://www.dpa.com/de/faktencheck/migranten-kriminalitaet-statistik/",
     "Die Kriminalität von Migranten hat sich in Deutschland seit 2015 verdoppelt",
     "Kriminalstatistik zeigt keine Verdopplung",
     "2019-06-05", None, (1, 4, 0, "Größtenteils falsch"), "microdata"),
    ("correctiv", "https://correctiv.org/faktencheck/2020/01/15/kurz/",
     "Alles gelogen",
     "Kurzer Beitrag ohne Kontext",
     None, None, (None, None, None, "Unbelegt"), "jsonld"),
    ("checkyourfact", "https://checkyourfact.com/2019/03/04/fact-check-germany-million/",
     "Germany accepted one million refugees in 2015",
     "FACT CHECK: Did Germany Take In One Million Refugees In 2015?",
     "2019-03-04", None, (5, 5, 1, "True"), "jsonld"),
]


def demo_corpus():
    lines, golden = [], []
    for source, url, claim, title, date, claimant, (value, best, worst, label), kind in DEMO:
        if kind == "jsonld":
            body = jsonld_page(claim_review(claim, title, url, date=date, claimant=claimant, value=value, best=best,
                                            worst=worst, label=label))
        elif kind == "microdata":
            body = microdata_page(claim, title, url, date=date, claimant=claimant, value=value, best=best,
                                  worst=worst, label=label)
        else:
            body = rules_page(claim, title, url, date_attr=date, claimant=claimant, label=label)
        lines.append(archive_line(url, body))
        golden.append(expected(source, claim, title, url, date=date, claimant=claimant, value=value, best=best,
                               worst=worst, label=label))
    out = ROOT / "data" / "demo"
    write_archive(out / "archive.jsonl", lines)
    write_golden(HERE / "demo_golden.jsonl", golden)


def three_record_fixture():
    rows = [DEMO[0], DEMO[1], DEMO[8]]
    lines = []
    for source, url, claim, title, date, claimant, (value, best, worst, label), kind in rows:
        lines.append(archive_line(url, jsonld_page(claim_review(claim, title, url, date=date, claimant=claimant,
                                                                value=value, best=best, worst=worst, label=label))))
    write_archive(HERE / "three" / "archive.jsonl", lines)


if __name__ == "__main__":
    extraction_fixture()
    demo_corpus()
    three_record_fixture()
