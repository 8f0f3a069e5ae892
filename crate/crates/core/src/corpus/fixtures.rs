use super::model::*;

/// Two knowledge-base concepts for the same tumour topic, joined only through
/// an English-German inter-language link that lands on a German redirect.
///
/// English covers `Neoplasm`, German covers `Tumor`; `Neoplasma` is a German
/// redirect to `Tumor`.
pub fn neoplasm_fixture() -> Corpus {
    let mut c = Corpus {
        languages: ["de", "en", "fr", "hr"].map(LanguageCode::from).to_vec(),
        ..Corpus::default()
    };
    for (concept_id, lang, title) in [
        ("Q133212", "de", "Tumor"),
        ("Q133212", "fr", "Tumeur"),
        ("Q133212", "hr", "Novotvorina"),
        ("Q1216998", "en", "Neoplasm"),
    ] {
        c.sitelinks.push(SitelinkRecord {
            concept_id: concept_id.into(),
            lang: lang.into(),
            title: title.into(),
        });
    }
    c.articles = vec![
        ArticleRecord::new("de", "Tumor", 21_000),
        ArticleRecord::redirect("de", "Neoplasma", "Tumor"),
        ArticleRecord::new("en", "Neoplasm", 48_000),
        ArticleRecord::new("fr", "Tumeur", 17_000),
        ArticleRecord::new("hr", "Novotvorina", 3_000),
    ];
    c.interlanguage_links.push(InterlanguageLinkRecord {
        from_lang: "en".into(),
        from_title: "Neoplasm".into(),
        to_lang: "de".into(),
        to_title: "Neoplasma".into(),
    });
    c
}
