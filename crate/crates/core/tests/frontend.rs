use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::RngExt;

use hasa_core::algebra::{enumerate, equivalent};
use hasa_core::frontend::{
    compile_dtd, parse_dtd, parse_ha, parse_ha_with_warnings, parse_updates, print_ha, read_xml, read_xml_with, write_xml,
    ContentModel, DtdSchema, XmlOptions,
};
use hasa_core::testkit::{self, all_trees, labels, random_automaton, random_tree, rng, AutomatonShape};
use hasa_core::{Error, Label, Regex, Tree, UpdateKind};

// End offsets reachable after matching `re` against `word` from `start`.
fn ends(re: &Regex<Label>, word: &[Label], start: usize) -> BTreeSet<usize> {
    match re {
        Regex::Epsilon => BTreeSet::from([start]),
        Regex::Symbol(l) => {
            if word.get(start) == Some(l) {
                BTreeSet::from([start + 1])
            } else {
                BTreeSet::new()
            }
        }
        Regex::Concat(items) => items.iter().fold(BTreeSet::from([start]), |acc, r| {
            acc.iter().flat_map(|&i| ends(r, word, i)).collect()
        }),
        Regex::Alt(items) => items.iter().flat_map(|r| ends(r, word, start)).collect(),
        Regex::Optional(r) => {
            let mut out = ends(r, word, start);
            out.insert(start);
            out
        }
        Regex::Star(r) | Regex::Plus(r) => {
            let mut seen = BTreeSet::from([start]);
            let mut frontier = vec![start];
            let mut once = BTreeSet::new();
            while let Some(i) = frontier.pop() {
                for j in ends(r, word, i) {
                    once.insert(j);
                    if seen.insert(j) {
                        frontier.push(j);
                    }
                }
            }
            if matches!(re, Regex::Star(_)) {
                seen
            } else {
                once
            }
        }
    }
}

fn valid_node(schema: &DtdSchema, t: &Tree) -> bool {
    let word: Vec<Label> = t.children().iter().map(|c| c.label().clone()).collect();
    let ok = match schema.elements.get(t.label()) {
        None => false,
        Some(ContentModel::Empty) => word.is_empty(),
        Some(ContentModel::Any) => true,
        Some(ContentModel::Children(re)) => ends(re, &word, 0).contains(&word.len()),
    };
    ok && t.children().iter().all(|c| valid_node(schema, c))
}

fn valid(schema: &DtdSchema, t: &Tree) -> bool {
    t.label() == &schema.root && valid_node(schema, t)
}

fn random_model(r: &mut rand_chacha::ChaCha8Rng, names: &[Label], depth: usize) -> Regex<Label> {
    let pick = if depth == 0 { 0 } else { r.random_range(0..6) };
    match pick {
        0 | 1 => Regex::Symbol(names.choose(r).unwrap().clone()),
        2 => Regex::Concat((0..r.random_range(2..4)).map(|_| random_model(r, names, depth - 1)).collect()),
        3 => Regex::Alt((0..r.random_range(2..4)).map(|_| random_model(r, names, depth - 1)).collect()),
        4 => Regex::Star(Box::new(random_model(r, names, depth - 1))),
        _ => {
            let inner = Box::new(random_model(r, names, depth - 1));
            if r.random_bool(0.5) {
                Regex::Plus(inner)
            } else {
                Regex::Optional(inner)
            }
        }
    }
}

fn dtd_text(schema: &DtdSchema) -> String {
    fn show(re: &Regex<Label>) -> String {
        match re {
            Regex::Epsilon => unreachable!(),
            Regex::Symbol(l) => l.to_string(),
            Regex::Concat(v) => format!("({})", v.iter().map(show).collect::<Vec<_>>().join(", ")),
            Regex::Alt(v) => format!("({})", v.iter().map(show).collect::<Vec<_>>().join(" | ")),
            Regex::Star(r) => format!("({})*", show(r)),
            Regex::Plus(r) => format!("({})+", show(r)),
            Regex::Optional(r) => format!("({})?", show(r)),
        }
    }
    let mut out = format!("<!DOCTYPE {} [\n", schema.root);
    for (l, m) in &schema.elements {
        let body = match m {
            ContentModel::Empty => "EMPTY".to_string(),
            ContentModel::Any => "ANY".to_string(),
            ContentModel::Children(re) => format!("({})", show(re)),
        };
        out.push_str(&format!("<!ELEMENT {l} {body}>\n"));
    }
    out.push_str("]>\n");
    out
}

#[test]
fn compiled_dtds_agree_with_a_content_model_validator() {
    let names = labels(&["a", "b", "c"]);
    let mut r = rng(17);
    let mut checked = 0;
    for round in 0..25 {
        let mut elements = BTreeMap::new();
        for (i, l) in names.iter().enumerate() {
            let model = match (round + i) % 5 {
                0 => ContentModel::Empty,
                1 if round % 3 == 0 => ContentModel::Any,
                _ => ContentModel::Children(random_model(&mut r, &names, 3)),
            };
            elements.insert(l.clone(), model);
        }
        let schema = DtdSchema {
            root: names.choose(&mut r).unwrap().clone(),
            elements,
        };
        // Through the text format, so the parser is covered too.
        let parsed = parse_dtd(&dtd_text(&schema)).unwrap();
        let a = compile_dtd(&parsed).unwrap();
        assert!(a.rules().all(|(_, _, nfa)| !nfa.has_epsilon()));
        assert_eq!(a.num_rules(), names.len());
        for _ in 0..8 {
            let size = r.random_range(1..=8);
            let t = random_tree(&mut r, &names, size);
            assert_eq!(a.accepts(&t), valid(&schema, &t), "{} on\n{}", t, dtd_text(&schema));
            checked += 1;
        }
        for t in all_trees(&names, 4) {
            assert_eq!(a.accepts(&t), valid(&schema, &t), "{} on\n{}", t, dtd_text(&schema));
        }
    }
    assert_eq!(checked, 200);
}

#[test]
fn dtd_for_the_worked_example_language() {
    let dtd = "<!ELEMENT a (b*, c?)> <!ELEMENT b EMPTY> <!ELEMENT c EMPTY>";
    let a = compile_dtd(&parse_dtd(dtd).unwrap()).unwrap();
    let doc = testkit::example_doc();
    let all = labels(&["a", "b", "c"]);
    for t in all_trees(&all, 5) {
        assert_eq!(a.accepts(&t), doc.accepts(&t), "{t}");
    }
    assert!(equivalent(&a, &doc).unwrap());
}

#[test]
fn empty_element_alone() {
    let a = compile_dtd(&parse_dtd("<!ELEMENT a EMPTY>").unwrap()).unwrap();
    let accepted: Vec<Tree> = all_trees(&labels(&["a"]), 3).into_iter().filter(|t| a.accepts(t)).collect();
    assert_eq!(accepted, vec![Tree::parse("a").unwrap()]);
}

#[test]
fn xmark_fixtures_compile() {
    let schema = parse_dtd(testkit::XMARK_DTD).unwrap();
    assert_eq!(schema.root.as_str(), "site");
    assert!(schema.elements.len() >= 70);
    let a = testkit::xmark();
    assert_eq!(a.states().len(), schema.elements.len());
    let evolved = testkit::xmark_evolved();
    assert!(evolved.alphabet().contains(&Label::new("website").unwrap()));
    assert!(!evolved.alphabet().contains(&Label::new("creditcard").unwrap()));
    assert_eq!(testkit::xmark_script().rules().len(), 5);
}

#[test]
fn native_format_round_trips_fixtures() {
    for a in [testkit::boolean(), testkit::example_doc(), testkit::example_types(), testkit::xmark()] {
        let b = parse_ha(&print_ha(&a)).unwrap();
        assert!(equivalent(&a, &b).unwrap(), "{}", a.name());
    }
}

#[test]
fn native_format_fuzz() {
    let shape = AutomatonShape::new(labels(&["a", "b"]), 3, 3);
    let mut r = rng(99);
    for _ in 0..100 {
        let a = random_automaton(&mut r, &shape);
        let b = parse_ha(&print_ha(&a)).unwrap();
        assert_eq!(enumerate(&a, 5), enumerate(&b, 5));
    }
}

#[test]
fn native_format_details() {
    let a = parse_ha("automaton e\nalphabet a\nstates q\nfinal q\n").unwrap();
    assert_eq!(a.num_rules(), 0);
    assert!(enumerate(&a, 4).is_empty());

    let text = "alphabet a b\nstates q\nfinal q\nrule a q* -> q\nrule b () -> q\nrule a () -> q\n";
    let (a, warnings) = parse_ha_with_warnings(text).unwrap();
    assert_eq!(warnings.len(), 1);
    assert_eq!(a.num_rules(), 2);
    assert!(a.accepts(&Tree::parse("a(b,a)").unwrap()));

    let block = "alphabet c\nstates q\nfinal q\nrule c -> q nfa { start s0; final s0; s0 q s1; s1 eps s0; }\n";
    assert!(parse_ha(block).unwrap().accepts(&Tree::parse("c(c,c)").unwrap()));

    for bad in [
        "alphabet a\nstates q\nrule a r -> q\n",
        "alphabet a\nstates q\nrule b () -> q\n",
        "alphabet a\nstates q\nrule a (q -> q\n",
        "alphabet a\nstates q\nfrobnicate\n",
        "alphabet a\nstates q\nrule c -> q nfa { final s0; }\n",
    ] {
        let err = parse_ha(bad).unwrap_err();
        assert!(err.is_parse_error(), "{bad:?} gave {err}");
    }
}

#[test]
fn boolean_formulas_up_to_seven_nodes() {
    fn value(t: &Tree) -> Option<bool> {
        let kids: Option<Vec<bool>> = t.children().iter().map(value).collect();
        let kids = kids?;
        match (t.label().as_str(), kids.len()) {
            ("0", 0) => Some(false),
            ("1", 0) => Some(true),
            ("not", 1) => Some(!kids[0]),
            ("and", n) if n > 0 => Some(kids.iter().all(|b| *b)),
            ("or", n) if n > 0 => Some(kids.iter().any(|b| *b)),
            _ => None,
        }
    }
    let m = testkit::boolean();
    let formulas = testkit::boolean_formulas(7);
    assert!(formulas.len() > 1000);
    for t in &formulas {
        assert_eq!(m.accepts(t), value(t).expect("well formed"), "{t}");
    }
    // Ill-formed trees evaluate to nothing and are rejected.
    for t in all_trees(&labels(&["0", "1", "not", "and", "or"]), 5) {
        if value(&t).is_none() {
            assert!(!m.accepts(&t), "{t}");
        }
    }
    let one: Vec<Tree> = enumerate(&m, 1).into_iter().collect();
    assert_eq!(one, vec![Tree::parse("1").unwrap()]);
}

#[test]
fn xml_skeletons() {
    assert_eq!(read_xml("<a><b/><c/></a>").unwrap(), Tree::parse("a(b,c)").unwrap());
    let (t, warnings) = read_xml_with("<a x=\"1\"><b>hi</b></a>", XmlOptions::default()).unwrap();
    assert_eq!(t, Tree::parse("a(b)").unwrap());
    assert_eq!(warnings.len(), 2);
    assert!(read_xml_with("<a x=\"1\"/>", XmlOptions { strict: true }).is_err());
    assert!(matches!(read_xml("<a><b></a>"), Err(Error::Xml { .. })));
    let mut r = rng(5);
    for size in 1..40 {
        let t = random_tree(&mut r, &labels(&["a", "b", "item_1"]), size);
        assert_eq!(read_xml(&write_xml(&t)).unwrap(), t);
    }
}

#[test]
fn update_scripts() {
    let types = testkit::example_types();
    let s = parse_updates(testkit::EXAMPLE_UPD, &types).unwrap();
    let kinds: Vec<UpdateKind> = s.rules().iter().map(|r| r.kind()).collect();
    assert_eq!(kinds, vec![UpdateKind::Ren, UpdateKind::InsFirst, UpdateKind::InsBefore]);
    assert_eq!(s.rules()[0].new_label().map(Label::as_str), Some("a"));
    assert_eq!(s.rules()[2].type_state().map(|p| p.as_str()), Some("g_a"));

    assert!(parse_updates("", &types).unwrap().is_empty());
    assert!(parse_updates("# nothing\n\n", &types).unwrap().is_empty());
    assert!(parse_updates("del a <- g_a", &types).unwrap_err().is_parse_error());
    assert!(parse_updates("ren a <- g_a", &types).unwrap_err().is_parse_error());
    assert!(parse_updates("ins_first a -> b", &types).unwrap_err().is_parse_error());
    assert!(parse_updates("move a -> b", &types).unwrap_err().is_parse_error());
    assert!(matches!(parse_updates("rpl a <- nope", &types), Err(Error::UnknownTypeState(_))));
}
