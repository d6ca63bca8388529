use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::Parser;
use tempfile::TempDir;

use hasa_cli::{run, Cli, EXIT_OK, EXIT_PARSE, EXIT_REJECTED, EXIT_RESOURCE, EXIT_SEMANTIC};
use hasa_core::algebra::equivalent;
use hasa_core::frontend::{parse_ha, print_ha, read_xml};
use hasa_core::testkit;
use hasa_core::{post_script, Tree, UpdateScript};

struct Outcome {
    code: u8,
    out: String,
    err: String,
}

fn hasa(args: &[&str]) -> Outcome {
    let cli = Cli::try_parse_from(std::iter::once("hasa").chain(args.iter().copied())).expect("arguments parse");
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(cli, &mut out, &mut err);
    Outcome {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

struct Files {
    dir: TempDir,
}

impl Files {
    fn new() -> Self {
        let files = Files {
            dir: tempfile::tempdir().unwrap(),
        };
        files.put("doc.ha", testkit::EXAMPLE_DOC_HA);
        files.put("types.ha", testkit::EXAMPLE_TYPES_HA);
        files.put("script.upd", testkit::EXAMPLE_UPD);
        files.put("empty.upd", "");
        files
    }

    fn put(&self, name: &str, text: &str) -> String {
        let p = self.dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_string()
    }
}

fn script_prefix(n: usize) -> UpdateScript {
    let full = testkit::example_script();
    UpdateScript::new(testkit::example_types(), full.rules()[..n].to_vec()).unwrap()
}

#[test]
fn compile_dtd_and_native() {
    let f = Files::new();
    let dtd = f.put("s.dtd", "<!ELEMENT a (b*, c?)>\n<!ELEMENT b EMPTY>\n<!ELEMENT c EMPTY>\n");
    let out = f.path("s.ha");
    assert_eq!(hasa(&["compile", &dtd, "--out", &out]).code, EXIT_OK);
    let compiled = parse_ha(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(equivalent(&compiled, &testkit::example_doc()).unwrap());

    let again = hasa(&["compile", &out]);
    assert_eq!(again.code, EXIT_OK);
    assert!(equivalent(&parse_ha(&again.out).unwrap(), &compiled).unwrap());

    let bad = f.put("bad.ha", "alphabet a\nstates q\nrule a (q -> q\n");
    let r = hasa(&["compile", &bad]);
    assert_eq!(r.code, EXIT_PARSE);
    assert!(r.err.contains("3:"), "{}", r.err);
    assert_eq!(hasa(&["compile", &f.path("missing.dtd")]).code, EXIT_PARSE);
}

#[test]
fn check_worked_example() {
    let f = Files::new();
    let target = f.put("target.ha", &print_ha(&post_script(&testkit::example_doc(), &testkit::example_script()).unwrap()));
    let r = hasa(&[
        "check", "--from", &f.path("doc.ha"), "--to", &target, "--types", &f.path("types.ha"), "--updates",
        &f.path("script.upd"),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.out, r.err);
    assert!(r.out.starts_with("conforms"));

    // A target that never saw the insertion before `c`.
    let partial = f.put("partial.ha", &print_ha(&post_script(&testkit::example_doc(), &script_prefix(2)).unwrap()));
    let cex = f.path("cex.xml");
    let r = hasa(&[
        "--json", "check", "--from", &f.path("doc.ha"), "--to", &partial, "--types", &f.path("types.ha"),
        "--updates", &f.path("script.upd"), "--counterexample-out", &cex,
    ]);
    assert_eq!(r.code, EXIT_REJECTED);
    let report: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(report["verdict"], "violates");
    let t = Tree::parse(report["counterexample"].as_str().unwrap()).unwrap();
    assert_eq!(read_xml(&std::fs::read_to_string(&cex).unwrap()).unwrap(), t);
    // Somewhere an inserted `a` instance sits right before a `c`.
    let has_inserted_before_c = t.positions().iter().any(|p| {
        let node = t.get(p).unwrap();
        node.children().windows(2).any(|w| w[1].label().as_str() == "c" && w[0].label().as_str() == "a" && !w[0].children().is_empty())
    });
    assert!(has_inserted_before_c, "{t}");

    let r = hasa(&[
        "check", "--from", &f.path("doc.ha"), "--to", &f.path("doc.ha"), "--types", &f.path("types.ha"),
        "--updates", &f.path("empty.upd"),
    ]);
    assert_eq!(r.code, EXIT_OK);
}

#[test]
fn check_report_fields_are_stable() {
    let f = Files::new();
    let r = hasa(&[
        "--json", "check", "--from", &f.path("doc.ha"), "--to", &f.path("doc.ha"), "--types", &f.path("types.ha"),
        "--updates", &f.path("empty.upd"),
    ]);
    let report: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    for key in ["verdict", "counterexample", "timings", "stats", "warnings", "error"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    for phase in ["parse", "post", "inclusion", "total"] {
        assert!(report["timings"][phase].is_number(), "missing timing {phase}");
    }
    for part in ["from", "post", "to"] {
        for field in ["states", "finals", "rules", "transitions"] {
            assert!(report["stats"][part][field].is_number(), "missing {part}.{field}");
        }
    }
}

#[test]
fn check_reports_root_occurrences() {
    let f = Files::new();
    let del = f.put("del.upd", "del a\n");
    let r = hasa(&[
        "check", "--from", &f.path("doc.ha"), "--to", &f.path("doc.ha"), "--types", &f.path("types.ha"),
        "--updates", &del,
    ]);
    assert!(r.err.contains("does not apply at the root"), "{}", r.err);
}

#[test]
fn post_output_round_trips() {
    let f = Files::new();
    let out = f.path("post.ha");
    let r = hasa(&[
        "post", "--schema", &f.path("doc.ha"), "--types", &f.path("types.ha"), "--updates", &f.path("script.upd"),
        "--out", &out,
    ]);
    assert_eq!(r.code, EXIT_OK);
    let written = parse_ha(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let direct = post_script(&testkit::example_doc(), &testkit::example_script()).unwrap();
    assert!(equivalent(&written, &direct).unwrap());

    let r = hasa(&[
        "post", "--schema", &f.path("doc.ha"), "--types", &f.path("types.ha"), "--updates", &f.path("empty.upd"),
    ]);
    let unchanged = parse_ha(&r.out).unwrap();
    for t in testkit::all_trees(&testkit::labels(&["a", "b", "c"]), 5) {
        assert_eq!(unchanged.accepts(&t), testkit::example_doc().accepts(&t), "{t}");
    }
}

#[test]
fn member_with_trace() {
    let f = Files::new();
    let post = f.put("post.ha", &print_ha(&post_script(&testkit::example_doc(), &testkit::example_script()).unwrap()));
    let updated = f.put("t1.xml", "<a><a/><a/><a><b><d/></b></a><c><a><b><d/></b></a></c></a>");
    let r = hasa(&["member", "--automaton", &post, &updated, "--trace"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.out.starts_with("accepted: root state q_a1"), "{}", r.out);
    assert_eq!(r.out.lines().count(), 1 + 10);

    let original = f.put("t.xml", "<a><b/><b/><c/></a>");
    assert_eq!(hasa(&["member", "--automaton", &post, &original]).code, EXIT_REJECTED);
    let unknown = f.put("u.xml", "<a><zzz/></a>");
    assert_eq!(hasa(&["member", "--automaton", &post, &unknown]).code, EXIT_REJECTED);
    let broken = f.put("broken.xml", "<a><b></a>");
    assert_eq!(hasa(&["member", "--automaton", &post, &broken]).code, EXIT_PARSE);
    let text = f.put("text.xml", "<a>words</a>");
    assert_eq!(hasa(&["--strict", "member", "--automaton", &post, &text]).code, EXIT_PARSE);
}

fn rewrite_results(f: &Files, types: &str, script: &str, doc: &str, extra: &[&str]) -> (u8, Vec<String>) {
    let types = f.put("rw_types.ha", types);
    let script = f.put("rw.upd", script);
    let doc = f.put("rw.xml", doc);
    let mut args = vec!["--json", "rewrite", "--types", &types, "--updates", &script];
    args.extend_from_slice(extra);
    args.push(&doc);
    let r = hasa(&args);
    if r.code != EXIT_OK {
        return (r.code, Vec::new());
    }
    let v: serde_json::Value = serde_json::from_str(&r.out).unwrap();
    let list = v["results"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect();
    (r.code, list)
}

const INSERTED_TYPES: &str = "alphabet a b c\nstates p g_a g_b g_c\nrule a (g_b | g_c g_c) -> p\nrule a () -> g_a\nrule b () -> g_b\nrule c g_a -> g_c\n";

#[test]
fn rewrite_documents() {
    let f = Files::new();
    let (code, out) = rewrite_results(&f, testkit::EXAMPLE_TYPES_HA, "ren b -> e\n", "<a><b/><c/></a>", &[]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, vec!["a(e,c)"]);

    let (_, out) = rewrite_results(
        &f,
        INSERTED_TYPES,
        "ins_after c <- p\n",
        "<b><c/><d><c><a/></c><a/></d></b>",
        &["--pool-bound", "5"],
    );
    assert_eq!(out.len(), 4);
    assert!(out.contains(&"b(c,a(c(a),c(a)),d(c(a),a(b),a))".to_string()));
    let mut sorted = out.clone();
    sorted.sort();
    assert_eq!(sorted, out);

    let single = "alphabet x\nstates s\nrule x () -> s\n";
    let (_, out) = rewrite_results(&f, single, "ins_into a <- s\n", "<a><b/><c/></a>", &[]);
    assert_eq!(out, vec!["a(b,c,x)", "a(b,x,c)", "a(x,b,c)"]);

    let (_, out) = rewrite_results(&f, single, "ins_into a <- s\n", "<a><b/><c/></a>", &["--max-results", "2"]);
    assert_eq!(out.len(), 2);

    let (code, _) = rewrite_results(&f, INSERTED_TYPES, "ins_first b <- p\n", "<b/>", &["--pool-bound", "1"]);
    assert_eq!(code, EXIT_SEMANTIC);
}

#[test]
fn enumerate_small_languages() {
    let f = Files::new();
    let r = hasa(&["enumerate", "--automaton", &f.path("doc.ha"), "--max-nodes", "3"]);
    assert_eq!(r.out.lines().collect::<Vec<_>>(), vec!["a", "a(b)", "a(b,b)", "a(b,c)", "a(c)"]);
    let empty = f.put("empty.ha", "alphabet a\nstates q\nfinal q\n");
    let r = hasa(&["enumerate", "--automaton", &empty, "--max-nodes", "4"]);
    assert_eq!((r.code, r.out.as_str()), (EXIT_OK, ""));
    let boolean = f.put("boolean.ha", testkit::BOOLEAN_HA);
    let r = hasa(&["enumerate", "--automaton", &boolean, "--max-nodes", "1"]);
    assert_eq!(r.out, "1\n");
}

fn binary() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_hasa"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

#[test]
fn binary_exit_codes_and_budget() {
    let check = |budget: Option<&str>| {
        let mut cmd = Process::new(binary());
        cmd.arg("--quiet")
            .arg("check")
            .arg("--from")
            .arg(fixture("xmark.dtd"))
            .arg("--to")
            .arg(fixture("xmark_evolved.dtd"))
            .arg("--types")
            .arg(fixture("xmark_types.ha"))
            .arg("--updates")
            .arg(fixture("xmark.upd"));
        match budget {
            Some(b) => cmd.env("HASA_STATE_BUDGET", b),
            None => cmd.env_remove("HASA_STATE_BUDGET"),
        };
        cmd.output().unwrap()
    };
    let ok = check(None);
    assert_eq!(ok.status.code(), Some(i32::from(EXIT_OK)));
    assert!(ok.stdout.is_empty());
    let limited = check(Some("4"));
    assert_eq!(limited.status.code(), Some(i32::from(EXIT_RESOURCE)));

    let usage = Process::new(binary()).arg("frobnicate").output().unwrap();
    assert_ne!(usage.status.code(), Some(0));
}
